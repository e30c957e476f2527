"""Device-level sampling: program blocks through a randomizer, age them, and
turn codeword error counts into lifetime and read-retry figures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..nand.array import FlashArray, Geometry
from ..nand.gray import gray_map
from ..nand.retention import LcsModel, age_block
from ..nand.stats import codeword_error_counts
from ..randomizer.modes import Mode, Randomizer, program_block
from .config import RetryLadder, SSDConfig


@dataclass(frozen=True)
class Condition:
    pec: float
    months: float

    def __str__(self):
        return f"{self.pec:g}PEC/{self.months:g}mo"


class ReadRetryModel:
    """Maps a page's worst codeword error count to a retry count."""

    def __init__(self, ladder: RetryLadder):
        self.ladder = ladder

    def retries(self, errors):
        e = np.asarray(errors, dtype=float)
        r = np.ceil(np.maximum(0.0, e - self.ladder.t0) / self.ladder.dt)
        return np.minimum(r, self.ladder.max_retries).astype(np.int64)


class BlockSample:
    """A handful of blocks programmed with random data under one mode.

    Aging always restarts from the programmed data with the same seed, so
    the same cells see the same uniforms at every condition.
    """

    def __init__(self, ssd: SSDConfig, profile, n_blocks=4, seed=0, mode=None):
        self.ssd = ssd
        self.profile = profile
        self.mode = Mode.parse(mode or ssd.mode)
        self.seed = int(seed)
        self.gmap = gray_map(ssd.m)
        geo = Geometry(chips=1, blocks=n_blocks, wordlines=ssd.wordlines_per_block,
                       page_bytes=ssd.page_bytes, bits_per_cell=ssd.m)
        self.array = FlashArray(geo, self.gmap)
        self.lcs = LcsModel.from_profile(profile)
        randomizer = Randomizer(self.mode, self.gmap, profile)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0xDA7A, int(ssd.m)]))
        self.meta = []
        for b in range(n_blocks):
            self.array.erase(0, b)
            self.meta.append(program_block(self.array, 0, b, randomizer, rng))

    @property
    def n_blocks(self):
        return self.array.geometry.blocks

    def codeword_errors(self, block, cond: Condition):
        """(wordlines, pages, codewords) bit-error counts after aging."""
        age_block(self.array, 0, block, self.profile, cond.pec, cond.months, self.seed, self.lcs)
        return codeword_error_counts(self.array.programmed[0, block], self.array.current[0, block],
                                     self.gmap)

    def page_worst(self, cond: Condition):
        """Worst codeword per page, shape (blocks, wordlines, pages)."""
        return np.stack([self.codeword_errors(b, cond).max(axis=2) for b in range(self.n_blocks)])

    def block_worst(self, block, cond: Condition):
        return int(self.codeword_errors(block, cond).max())


@dataclass
class RetryStats:
    condition: Condition
    mode: str
    mean_retries: float
    histogram: np.ndarray
    mean_worst_errors: float

    def distribution(self):
        h = self.histogram.astype(float)
        return h / h.sum()


def measure_read_retry(ssd: SSDConfig, profile, cond: Condition, n_blocks=4, seed=0,
                       sample: BlockSample | None = None) -> RetryStats:
    """Mean retries per page read at one condition, every page read once."""
    sample = sample or BlockSample(ssd, profile, n_blocks, seed)
    worst = sample.page_worst(cond)
    r = ReadRetryModel(ssd.retry).retries(worst).ravel()
    hist = np.bincount(r, minlength=ssd.retry.max_retries + 1)
    return RetryStats(cond, sample.mode.value, float(r.mean()), hist, float(worst.mean()))


@dataclass
class LifetimeReport:
    mode: str
    block_eol_pec: np.ndarray
    step_pec: int
    max_pec: int
    months: float
    ecc: float
    rows: list = field(default_factory=list)   # (block, pec, worst errors) probes

    @property
    def lifetime_pec(self):
        """Mean end-of-life PEC over the sampled blocks."""
        return float(np.mean(self.block_eol_pec))


def sweep_lifetime(ssd: SSDConfig, profile, step_pec=100, max_pec=30_000, months=12.0, n_blocks=16,
                   seed=0, ecc=None, sample: BlockSample | None = None) -> LifetimeReport:
    """Per-block end of life: the last PEC step whose worst codeword stays
    within the ECC capability after ``months`` of retention.

    Worst-codeword counts grow with PEC for a fixed seed, so each block is
    located by bisection over the PEC grid instead of a full scan.
    """
    if step_pec < 1:
        raise ValueError("step_pec must be >= 1")
    ecc = ssd.ecc_capability if ecc is None else ecc
    sample = sample or BlockSample(ssd, profile, n_blocks, seed)
    n_steps = max_pec // step_pec
    eol = np.empty(sample.n_blocks, dtype=np.int64)
    rows = []

    for b in range(sample.n_blocks):
        def passes(i):
            worst = sample.block_worst(b, Condition(i * step_pec, months))
            rows.append((b, i * step_pec, worst))
            return worst <= ecc

        if math.isinf(ecc) or passes(n_steps):
            eol[b] = n_steps * step_pec
            continue
        if not passes(0):
            eol[b] = 0
            continue
        lo, hi = 0, n_steps          # passes(lo), fails(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if passes(mid):
                lo = mid
            else:
                hi = mid
        eol[b] = lo * step_pec
    return LifetimeReport(sample.mode.value, eol, step_pec, max_pec, months, ecc, rows)
