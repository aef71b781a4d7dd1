"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A caller-supplied parameter violates a documented precondition."""


class SeedOverlapError(InvalidParameterError):
    """Calibration and evaluation seed streams would overlap."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a hard resource limit (grid cells, memory)."""
