"""State-aware randomization: LFSR, per-group error estimate, best bit-flip, FIB."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, MetadataCorruptError
from ..nand.gray import check_states, decode_states
from .lfsr import LfsrConfig, lfsr_randomize

GROUP_SIZE = 128

# relative slack under which two masks' error changes count as a tie
TIE_RTOL = 1e-12


def group_error(states, profile):
    """Expected error count of a group: sum of per-cell state error probabilities."""
    states = check_states(states, profile.m).astype(np.intp)
    return float(np.asarray(profile.e, dtype=float)[states].sum())


def delta_group_error(states, mask, lut):
    states = np.asarray(states, dtype=np.intp)
    return float(lut.table[mask][states].sum())


def group_histograms(states, group_size, n_states):
    """State histograms of consecutive groups along the last axis.

    ``states`` has shape (..., cells); the result is (..., groups, n_states).
    A trailing partial group is histogrammed on its own.
    """
    states = np.asarray(states)
    lead = states.shape[:-1]
    n = states.shape[-1]
    n_groups = -(-n // group_size)
    flat = states.reshape(-1, n).astype(np.intp)
    gid = np.arange(n) // group_size
    rows = np.arange(flat.shape[0])[:, None] * n_groups
    idx = ((rows + gid[None, :]) * n_states + flat).ravel()
    hist = np.bincount(idx, minlength=flat.shape[0] * n_groups * n_states)
    return hist.reshape(*lead, n_groups, n_states)


def tie_tolerance(lut, group_size):
    return TIE_RTOL * group_size * max(float(np.abs(lut.table).max()), 1e-300)


def select_masks(deltas, tol):
    """Per-row argmin with ties (within ``tol``) going to the smallest mask."""
    best = deltas.min(axis=-1, keepdims=True)
    return np.argmax(deltas <= best + tol, axis=-1).astype(np.uint8)


def optimal_flip(states, lut) -> int:
    states = np.asarray(states)
    hist = np.bincount(states.astype(np.intp), minlength=lut.table.shape[1])
    deltas = lut.table @ hist
    return int(select_masks(deltas, tie_tolerance(lut, states.size)))


def star_flip_states(states, lut, group_size=GROUP_SIZE):
    """Apply the best mask to every group of a (..., cells) state array.

    Returns ``(flipped_states, masks)`` with masks shaped (..., groups).
    """
    states = np.asarray(states)
    hist = group_histograms(states, group_size, lut.table.shape[1])
    deltas = hist @ lut.table.T
    masks = select_masks(deltas, tie_tolerance(lut, group_size))
    cell_masks = np.repeat(masks, group_size, axis=-1)[..., : states.shape[-1]]
    flipped = lut.gmap.flip_table[cell_masks, states]
    return flipped, masks


@dataclass
class Fib:
    """Per-group flip masks of one wordline, stored in the spare area."""

    masks: np.ndarray
    m: int
    spare_offset: int = 0

    @property
    def n_groups(self):
        return int(self.masks.size)

    @property
    def n_bits(self):
        return self.n_groups * self.m

    def pack(self) -> bytes:
        """Groups in ascending cell order, m bits each, LSB-first in each byte."""
        bits = (self.masks[:, None] >> np.arange(self.m)) & 1
        return np.packbits(bits.astype(np.uint8).ravel(), bitorder="little").tobytes()

    @classmethod
    def unpack(cls, raw, n_groups, m, spare_offset=0):
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        if bits.size < n_groups * m:
            raise MetadataCorruptError("FIB shorter than the group count")
        bits = bits[: n_groups * m].reshape(n_groups, m)
        masks = (bits << np.arange(m)).sum(axis=1).astype(np.uint8)
        return cls(masks, m, spare_offset)


def fib_overhead(page_bytes, spare_bytes, group_size, bits_per_cell):
    """FIB bits as a fraction of all wordline bits (data + spare)."""
    cells = page_bytes * 8
    groups = -(-cells // group_size)
    return groups * bits_per_cell / ((page_bytes + spare_bytes) * 8 * bits_per_cell)


def _apply_masks(pages, masks, group_size):
    n = pages.shape[1]
    cell_masks = np.repeat(np.asarray(masks, dtype=np.uint8), group_size)[:n]
    out = pages.copy()
    for j in range(pages.shape[0]):
        out[j] ^= (cell_masks >> j) & 1
    return out


def star_write_transform(pages, cfg: LfsrConfig, address, lut, gmap, group_size=GROUP_SIZE,
                         spare_offset=0):
    """LFSR-scramble one wordline's pages, then flip each group toward lower
    expected error.  Returns ``(pages', fib)``."""
    pages = np.asarray(pages, dtype=np.uint8)
    if pages.shape[0] != gmap.bits_per_cell:
        raise DimensionError(f"expected {gmap.bits_per_cell} pages, got {pages.shape[0]}")
    scrambled = lfsr_randomize(pages, cfg, address)
    states = decode_states(scrambled, gmap)
    _, masks = star_flip_states(states, lut, group_size)
    return _apply_masks(scrambled, masks, group_size), Fib(masks, gmap.bits_per_cell, spare_offset)


def star_read_transform(pages, fib: Fib, cfg: LfsrConfig, address, gmap, group_size=GROUP_SIZE):
    pages = np.asarray(pages, dtype=np.uint8)
    expected = -(-pages.shape[1] // group_size)
    if fib.n_groups != expected or fib.m != gmap.bits_per_cell:
        raise MetadataCorruptError(
            f"FIB holds {fib.n_groups} groups x {fib.m} bits, wordline needs {expected} x {gmap.bits_per_cell}")
    return lfsr_randomize(_apply_masks(pages, fib.masks, group_size), cfg, address)
