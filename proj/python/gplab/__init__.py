"""Python access to the gplab numerics and command line."""

from ._core import (
    NumericalError,
    ValidationError,
    ccr_check,
    evolve_gp,
    normalized_toml,
    run,
    scattering_length,
    squeeze_check,
    symplectic_check,
    validate_config,
    weyl_shift_check,
)

__all__ = [
    "NumericalError",
    "ValidationError",
    "ccr_check",
    "evolve_gp",
    "normalized_toml",
    "run",
    "scattering_length",
    "squeeze_check",
    "symplectic_check",
    "validate_config",
    "weyl_shift_check",
]
