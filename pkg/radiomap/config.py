import json
import logging
import os
from pathlib import Path
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, ValidationError, model_validator

from radiomap.exceptions import InputFormatError
from radiomap.models import Floorplan, MacId
from radiomap.utils import parse_int_with_default

# Initialize logger
logger = logging.getLogger(__name__)

load_dotenv()


class PdrConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: float = Field(9.81, gt=0, description="Gravity subtracted from the acceleration norm (m/s^2)")
    step_length: float = Field(0.75, gt=0, description="Fixed step length (m)")
    swing_threshold: float = Field(1.0, gt=0, description="Swing the norm must exceed before a step counts (m/s^2)")
    min_step_interval: float = Field(0.3, gt=0, description="Debounce between two steps (s)")
    sample_rate: float = Field(100.0, gt=0, description="Nominal IMU rate (Hz)")
    renormalize_every: int = Field(100, gt=0, description="DCM updates between two orthonormalizations")


class PfConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_particles: int = Field(1000, ge=10, description="Number of particles N")
    step_sigma: float = Field(0.1, ge=0, description="Step length noise (m)")
    heading_sigma: float = Field(0.05, ge=0, description="Heading noise per step (rad)")
    resample_fraction: float = Field(0.2, gt=0, lt=1, description="Resample when ESS < fraction * N")
    heading_model: Literal["independent", "random_walk"] = Field(
        "independent", description="Fresh heading noise per step, or a drifting per-particle heading offset"
    )


class MergeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    d_min: float = Field(2.0, gt=0, description="Merge unconditionally below this distance (m)")
    d_max: float = Field(4.0, gt=0, description="Never merge at or beyond this distance (m)")
    rss_threshold: float = Field(4.0, gt=0, description="Maximum mean RSS difference for a similarity merge (dB)")
    sensitivity_floor: float = Field(-100.0, description="RSS substituted for an AP missing on one side (dBm)")

    @model_validator(mode="after")
    def ordered_gates(self):
        if not self.d_min < self.d_max:
            raise ValueError("d_min must be smaller than d_max")
        return self


class LocalizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm: Literal["nn", "knn", "wknn", "bayes"] = Field("wknn", description="Position estimator")
    k: int = Field(3, ge=1, description="Number of nearest reference points K")
    missing_fill: float = Field(-100.0, description="RSS substituted for an undetected AP (dBm)")
    bayes_sigma: float = Field(4.0, gt=0, description="Per-AP Gaussian likelihood spread (dB)")


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    step_length: float = Field(0.75, gt=0)
    step_frequency: float = Field(2.0, gt=0, description="Steps per second")
    imu_rate: float = Field(100.0, gt=0, description="IMU samples per second")
    scan_interval: float = Field(5.0, gt=0, description="Seconds between two Wi-Fi scans")
    scan_offset: float = Field(0.0, ge=0, description="Delay of the first Wi-Fi scan after the walk starts (s)")
    rss_noise_sigma: float = Field(2.0, ge=0, description="Log-normal shadowing spread (dB)")
    accel_noise_sigma: float = Field(0.05, ge=0, description="Accelerometer noise (m/s^2)")
    gyro_bias: float = Field(0.0, description="Constant bias added to the z gyro (rad/s)")
    accel_amplitude: float = Field(3.0, gt=0, description="Amplitude of the vertical gait oscillation (m/s^2)")
    turn_duration: float = Field(0.1, gt=0, description="Duration of the gyro pulse that performs a turn (s)")
    g: float = Field(9.81, gt=0)
    survey_samples: int = Field(20, ge=1, description="Scans averaged per static survey point")
    seed: int = Field(0, description="Seed for every generator")


class ApSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    mac: MacId
    x: FiniteFloat
    y: FiniteFloat
    tx_ref_dbm: float = Field(-40.0, description="RSS at 1 m (dBm)")
    path_loss_exponent: float = Field(2.5, gt=0)
    wall_loss_db: float = Field(5.0, ge=0, description="Attenuation per crossed wall (dB)")


class Settings(BaseModel):
    """Everything `--config` can set; absent sections keep their defaults."""

    model_config = ConfigDict(frozen=True)

    seed: Optional[int] = None
    pdr: PdrConfig = Field(default_factory=PdrConfig)
    pf: PfConfig = Field(default_factory=PfConfig)
    merge: MergeConfig = Field(default_factory=MergeConfig)
    localizer: LocalizerConfig = Field(default_factory=LocalizerConfig)
    sim: SimConfig = Field(default_factory=SimConfig)


class Scenario(BaseModel):
    """A simulated survey: floorplan, access points, walk and evaluation points."""

    model_config = ConfigDict(frozen=True)

    floorplan: Floorplan
    aps: list[ApSpec] = Field(..., min_length=1)
    waypoints: list[tuple[FiniteFloat, FiniteFloat]] = Field(..., min_length=2)
    test_points: list[tuple[FiniteFloat, FiniteFloat]] = Field(default_factory=list)
    survey_points: list[tuple[FiniteFloat, FiniteFloat]] = Field(default_factory=list)
    static_map_spacing: Optional[float] = Field(None, gt=0, description="Grid spacing of the static map (m)")
    sim: SimConfig = Field(default_factory=SimConfig)

    @model_validator(mode="after")
    def distinct_waypoints(self):
        for i, (a, b) in enumerate(zip(self.waypoints, self.waypoints[1:])):
            if a == b:
                raise ValueError(f"Waypoints {i} and {i + 1} coincide at {a}")
        return self


def override(cfg: BaseModel, **update) -> BaseModel:
    """Copy of a config section with `update` applied and validated again."""
    if not update:
        return cfg

    try:
        return type(cfg).model_validate({**cfg.model_dump(), **update})
    except ValidationError as e:
        raise InputFormatError(f"Invalid {type(cfg).__name__} override {update}: {e}") from e


def default_seed() -> int:
    return parse_int_with_default(os.getenv("RADIOMAP_SEED", 0), 0)


def load_settings(path: Optional[Path]) -> Settings:
    if path is None:
        return Settings()

    try:
        with open(path, "r", encoding="utf-8") as handle:
            settings = Settings.model_validate(json.load(handle))
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise InputFormatError(f"Invalid configuration file {path}: {e}") from e

    logger.debug(f"Loaded settings from {path}: {settings.model_dump()}")
    return settings
