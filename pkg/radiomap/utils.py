import math

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(angle: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def normalize_angles(angles: np.ndarray) -> np.ndarray:
    """Vectorised `normalize_angle`."""
    wrapped = np.remainder(angles + math.pi, TWO_PI) - math.pi
    return np.where(wrapped <= -math.pi, wrapped + TWO_PI, wrapped)


def rotation_z(angle: float) -> np.ndarray:
    """Body-to-navigation DCM for a pure rotation of `angle` about z."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def parse_int_with_default(value, default=0):
    try:
        return int(value)
    except (TypeError, ValueError):
        return default
