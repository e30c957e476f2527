"""Write-path data transforms: LFSR baseline, TailCut emulation and STAR."""

from .lfsr import Lfsr, LfsrConfig, is_primitive, keystream, lfsr_derandomize, lfsr_randomize, max_bitline_run
from .modes import Mode, Randomizer, program_block, random_pages, read_wordline
from .star import (
    GROUP_SIZE,
    Fib,
    delta_group_error,
    fib_overhead,
    group_error,
    group_histograms,
    optimal_flip,
    star_flip_states,
    star_read_transform,
    star_write_transform,
)
from .tailcut import tailcut_read_transform, tailcut_remap_mask, tailcut_write_transform

__all__ = [
    "Lfsr", "LfsrConfig", "is_primitive", "keystream", "lfsr_derandomize", "lfsr_randomize",
    "max_bitline_run", "Mode", "Randomizer", "program_block", "random_pages", "read_wordline",
    "GROUP_SIZE", "Fib", "delta_group_error", "fib_overhead", "group_error", "group_histograms",
    "optimal_flip", "star_flip_states", "star_read_transform", "star_write_transform",
    "tailcut_read_transform", "tailcut_remap_mask", "tailcut_write_transform",
]
