"""Discrete-state 3D NAND model: encoding, geometry, aging and pattern statistics."""

from .array import FlashArray, Geometry, WlAddress, dump_array, load_array
from .gray import (
    QLC_MAP,
    TLC_MAP,
    GrayCodeMap,
    decode_states,
    encode_pages,
    gray_map,
    validate_gray_map,
)
from .retention import LcsModel, age_block, apply_program_noise, apply_retention, flip_probability_table
from .stats import RberReport, WeakPatternStats, measure_rber, scan_weak_patterns, triple_counts

__all__ = [
    "FlashArray", "Geometry", "WlAddress", "dump_array", "load_array",
    "QLC_MAP", "TLC_MAP", "GrayCodeMap", "decode_states", "encode_pages", "gray_map",
    "validate_gray_map", "LcsModel", "age_block", "apply_program_noise", "apply_retention",
    "flip_probability_table", "RberReport", "WeakPatternStats", "measure_rber",
    "scan_weak_patterns", "triple_counts",
]
