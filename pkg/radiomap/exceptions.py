class RadioMapError(Exception):
    """Base class for every error raised by the radiomap package."""

    exit_code = 1


class InputFormatError(RadioMapError):
    """Malformed input file, record or configuration."""

    exit_code = 2


class AlgorithmError(RadioMapError):
    """An algorithm could not produce a result for valid input."""

    exit_code = 3


class ParticleFilterCollapse(AlgorithmError):
    def __init__(self, step_index: int):
        super().__init__(f"All particles crossed a wall at step {step_index}")
        self.step_index = step_index


class NoReferencePoints(AlgorithmError):
    def __init__(self):
        super().__init__("Radio map has no reference points")


class InsufficientReferencePoints(AlgorithmError):
    def __init__(self, k: int, available: int):
        super().__init__(f"k={k} exceeds the {available} reference points in the radio map")
        self.k = k
        self.available = available


class EmptySample(AlgorithmError):
    def __init__(self, what: str = "errors"):
        super().__init__(f"No {what} to summarize")
