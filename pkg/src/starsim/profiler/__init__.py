"""Per-state error profiles, the delta lookup table and parameter calibration."""

from .lut import DeltaLUT, build_delta_lut
from .profile import (
    ErrorProfile,
    default_profile,
    default_profile_path,
    load_profile,
    months_to_bake_hours,
    profile_from_dict,
    save_profile,
    uniform_profile,
    validate_profile,
)

__all__ = [
    "DeltaLUT", "build_delta_lut", "ErrorProfile", "default_profile", "default_profile_path",
    "load_profile", "months_to_bake_hours", "profile_from_dict", "save_profile",
    "uniform_profile", "validate_profile",
]
