"""Behavioral TailCut baseline for TLC.

After LFSR scrambling, a cell about to close an E-P6-E or E-P7-E column
(wordline i-2 erased, i-1 in P6/P7, this cell erased) has its top page bit
complemented.  The affected cells are logged so reads can undo the remap.
This emulates the effect of the on-chip scheme, not its circuitry.
"""

from __future__ import annotations

import numpy as np

from ..errors import MetadataCorruptError, UnsupportedModeError
from ..nand.gray import decode_states
from .lfsr import LfsrConfig, lfsr_randomize

TARGET_VICTIMS = (6, 7)


def _require_tlc(m):
    if m != 3:
        raise UnsupportedModeError("TailCut only supports TLC (3 bits per cell)")


def tailcut_remap_mask(states, prev2, prev1):
    """Cells that would complete an E-P6-E / E-P7-E vertical triple."""
    if prev2 is None or prev1 is None:
        return np.zeros(np.shape(states), dtype=bool)
    return (np.asarray(prev2) == 0) & np.isin(prev1, TARGET_VICTIMS) & (np.asarray(states) == 0)


def tailcut_write_transform(pages, cfg: LfsrConfig, address, gmap, prev2=None, prev1=None):
    """Returns ``(pages', remap)``; ``prev2``/``prev1`` are the programmed states
    of wordlines i-2 and i-1 (``None`` at the top of a block)."""
    pages = np.asarray(pages, dtype=np.uint8)
    _require_tlc(pages.shape[0])
    scrambled = lfsr_randomize(pages, cfg, address)
    remap = tailcut_remap_mask(decode_states(scrambled, gmap), prev2, prev1)
    scrambled[-1] ^= remap.astype(np.uint8)
    return scrambled, remap


def tailcut_read_transform(pages, remap, cfg: LfsrConfig, address):
    pages = np.asarray(pages, dtype=np.uint8)
    _require_tlc(pages.shape[0])
    remap = np.asarray(remap, dtype=bool)
    if remap.shape != pages.shape[1:]:
        raise MetadataCorruptError("TailCut record does not match wordline length")
    restored = pages.copy()
    restored[-1] ^= remap.astype(np.uint8)
    return lfsr_randomize(restored, cfg, address)
