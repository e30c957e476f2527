from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import PartialScanError, UnprogrammedReadError

CODEWORD_BYTES = 1024


@dataclass
class WeakPatternStats:
    """Occurrences of every vertical triple ``(k_up, k_victim, k_down)``."""

    counts: np.ndarray  # shape (n, n, n)

    @property
    def total_triples(self):
        return int(self.counts.sum())

    def count(self, k_up, k_victim, k_down):
        return int(self.counts[k_up, k_victim, k_down])

    def __add__(self, other):
        return WeakPatternStats(self.counts + other.counts)

    def frequency(self, triple):
        return self.counts[triple] / max(self.total_triples, 1)

    def rows(self):
        n = self.counts.shape[0]
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    yield a, b, c, int(self.counts[a, b, c])

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k_up", "k_victim", "k_down", "count"])
        w.writerows(self.rows())


def triple_counts(states, n_states):
    """Count vertical triples in a (wordlines, cells) state matrix."""
    states = np.asarray(states, dtype=np.intp)
    if states.shape[0] < 3:
        return np.zeros((n_states,) * 3, dtype=np.int64)
    idx = (states[:-2] * n_states + states[1:-1]) * n_states + states[2:]
    return np.bincount(idx.ravel(), minlength=n_states ** 3).reshape((n_states,) * 3)


def scan_weak_patterns(array, chip, block, allow_partial=False) -> WeakPatternStats:
    """Exact triple counts over programmed states; boundary wordlines only act
    as neighbours (strings do not wrap)."""
    n = array.gmap.n_states
    mask = array.wl_programmed[chip, block]
    states = array.programmed[chip, block]
    if mask.all():
        return WeakPatternStats(triple_counts(states, n))
    if not allow_partial:
        raise PartialScanError(f"block ({chip}, {block}) only partially programmed")
    counts = np.zeros((n,) * 3, dtype=np.int64)
    # scan each run of consecutive programmed wordlines
    run_start = None
    for w, ok in enumerate(list(mask) + [False]):
        if ok and run_start is None:
            run_start = w
        elif not ok and run_start is not None:
            counts += triple_counts(states[run_start:w], n)
            run_start = None
    return WeakPatternStats(counts)


@dataclass
class RberReport:
    per_state: np.ndarray          # error fraction per programmed state (nan if absent)
    cells_per_state: np.ndarray
    error_cells: int
    total_cells: int
    bit_errors: int
    codeword_errors: np.ndarray    # (wordlines, pages, codewords)

    @property
    def rber(self):
        """Fraction of cells whose state moved."""
        return self.error_cells / self.total_cells if self.total_cells else 0.0

    @property
    def bit_error_rate(self):
        pages = self.codeword_errors.shape[1] if self.codeword_errors.ndim == 3 else 1
        bits = self.total_cells * pages
        return self.bit_errors / bits if bits else 0.0

    @property
    def worst_codeword_errors(self):
        return int(self.codeword_errors.max()) if self.codeword_errors.size else 0


def codeword_error_counts(programmed, current, gmap, codeword_bytes=CODEWORD_BYTES):
    """Bit errors per (wordline, page, codeword) for 2-D state matrices."""
    programmed = np.atleast_2d(programmed)
    current = np.atleast_2d(current)
    m = gmap.bits_per_cell
    cw = codeword_bytes * 8
    n_wl, n_cells = programmed.shape
    n_cw = -(-n_cells // cw)
    # only cells that moved contribute, so work on those alone
    moved = np.flatnonzero(programmed != current)
    diff = gmap.code_table[programmed.reshape(-1)[moved]] ^ gmap.code_table[current.reshape(-1)[moved]]
    slot = (moved // n_cells) * n_cw + (moved % n_cells) // cw
    out = np.empty((n_wl, m, n_cw), dtype=np.int64)
    for j in range(m):
        bits = (diff >> j) & 1
        out[:, j, :] = np.bincount(slot, weights=bits, minlength=n_wl * n_cw).reshape(n_wl, n_cw)
    return out


def measure_rber(array, chip, block, codeword_bytes=CODEWORD_BYTES) -> RberReport:
    mask = array.wl_programmed[chip, block]
    if not mask.any():
        raise UnprogrammedReadError(f"block ({chip}, {block}) has no programmed wordlines")
    prog = array.programmed[chip, block][mask]
    cur = array.current[chip, block][mask]
    n = array.gmap.n_states
    wrong = prog != cur
    cells = np.bincount(prog.ravel(), minlength=n)
    errs = np.bincount(prog[wrong], minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_state = np.where(cells > 0, errs / np.maximum(cells, 1), np.nan)
    cw = codeword_error_counts(prog, cur, array.gmap, codeword_bytes)
    return RberReport(per_state=per_state, cells_per_state=cells, error_cells=int(wrong.sum()),
                      total_cells=int(prog.size), bit_errors=int(cw.sum()), codeword_errors=cw)
