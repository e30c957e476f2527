"""Fit retention-model parameters to per-state and weak-pattern targets.

A profile's ``e`` is the per-state total error probability at the reference
condition (zero PEC, twelve months, uniformly random neighbours).  Given LCS
parameters, ``retention_base`` and ``program_noise`` are derived so the model
reproduces ``e`` with the requested retention share; the grid search then
picks the LCS parameters that best meet the pattern-ordering targets.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..nand.retention import LcsModel
from .profile import ErrorProfile

DEFAULT_GRID = {
    "beta": (0.0, 0.01, 0.1),
    "gamma": (1.0, 2.0, 3.0),
    "erase_gap": (0.0, 1.0, 2.0),
    "beta_pair": (0.0, 0.001, 0.01, 0.1),
}

RESIDUAL_FLAG = 0.05


@dataclass
class Targets:
    """Calibration targets; only ``state_ratio`` is required.

    ``prone_states`` get the high end of the error spread; ``e_shape``, if
    given, overrides the generated shape and must match ``state_ratio``.
    ``top_patterns`` lists triples that should rank first (in order) by
    model flip probability.
    """

    m: int
    state_ratio: float
    prone_states: tuple = ()
    retention_share: float = 0.48
    top_patterns: tuple = ()
    e_shape: tuple | None = None
    level: float = 2e-3
    c_pec: float = 0.0
    delta: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.state_ratio < 1:
            raise ConfigError("state_ratio must be >= 1")
        if not 0 <= self.retention_share <= 1:
            raise ConfigError("retention_share must be in [0, 1]")

    def shape(self):
        n = 1 << self.m
        if self.e_shape is not None:
            s = np.asarray(self.e_shape, dtype=float)
            if s.shape != (n,):
                raise ConfigError(f"e_shape needs {n} entries")
            return s / s.min()
        s = np.ones(n)
        prone = list(self.prone_states)
        if prone:
            # spread the prone states evenly between the midpoint and the max
            for i, k in enumerate(prone):
                s[k] = self.state_ratio - (self.state_ratio - 1) * 0.5 * i / max(1, len(prone) - 1)
        elif self.state_ratio > 1:
            s[-1] = self.state_ratio
        return s


def model_profile(m, e, beta, gamma, erase_gap, beta_pair, retention_share=0.48, c_pec=0.0,
                  delta=1.0, provenance="model", **extra) -> ErrorProfile:
    """Profile whose model-implied per-state error equals ``e`` at the
    reference condition, split between retention and program noise."""
    e = np.asarray(e, dtype=float)
    lcs = LcsModel(beta, gamma, erase_gap, 1 << m, beta_pair)
    mean_lcs = lcs.factor_table().mean(axis=(0, 2))
    return ErrorProfile(
        m=m, e=e, beta=beta, gamma=gamma, c_pec=c_pec, delta=delta, provenance=provenance,
        retention_base=retention_share * e / (1.0 + mean_lcs),
        program_noise=(1.0 - retention_share) * e,
        erase_gap=erase_gap, beta_pair=beta_pair, extra=dict(extra),
    )


def implied_state_errors(profile: ErrorProfile):
    """Expected per-state error at the reference condition under uniformly
    random neighbours (retention plus program noise)."""
    lcs = LcsModel.from_profile(profile)
    p = np.minimum(1.0, profile.retention_base[None, :, None] * (1.0 + lcs.factor_table()))
    return p.mean(axis=(0, 2)) + profile.program_noise


def pattern_ranking(profile: ErrorProfile, n=10):
    """The ``n`` triples with the highest retention flip probability,
    ties broken by triple index."""
    lcs = LcsModel.from_profile(profile)
    p = profile.retention_base[None, :, None] * (1.0 + lcs.factor_table())
    flat = p.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))[:n]
    return [tuple(int(x) for x in np.unravel_index(i, p.shape)) for i in order]


def _rank_penalty(ranking, wanted):
    pen = 0.0
    for want_pos, triple in enumerate(wanted):
        pos = ranking.index(triple) if triple in ranking else len(ranking)
        pen += math.log1p(abs(pos - want_pos))
    return pen


@dataclass
class CalibrationResult:
    profile: ErrorProfile
    residuals: list          # (target, value, achieved, residual)
    score: float

    @property
    def flagged(self):
        return [r for r in self.residuals if abs(r[3]) > RESIDUAL_FLAG]

    def residual_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target", "value", "achieved", "residual"])
        for name, value, achieved, res in self.residuals:
            w.writerow([name, value, achieved, f"{res:.6g}"])
        return buf.getvalue()


def _score(profile, targets: Targets):
    implied = implied_state_errors(profile)
    ratio = float(implied.max() / implied.min())
    rows = [("state_ratio", targets.state_ratio, round(ratio, 6),
             math.log(ratio / targets.state_ratio))]
    total = implied.sum()
    share = float((implied - profile.program_noise).sum() / total) if total else 0.0
    if total:
        rows.append(("retention_share", targets.retention_share, round(share, 6),
                     math.log(max(share, 1e-12) / max(targets.retention_share, 1e-12))))
    ranking = pattern_ranking(profile, max(10, len(targets.top_patterns)))
    for i, triple in enumerate(targets.top_patterns):
        got = ranking.index(tuple(triple)) + 1 if tuple(triple) in ranking else len(ranking) + 1
        rows.append((f"rank{tuple(triple)}", i + 1, got, math.log(got / (i + 1))))
    sq = sum(r[3] ** 2 for r in rows)
    return sq + _rank_penalty(ranking, [tuple(t) for t in targets.top_patterns]), rows


def calibrate(targets: Targets, grid=None) -> CalibrationResult:
    """Exhaustive search over the LCS grid; the first best point wins, so the
    grid order decides ties (parameter-free models come first)."""
    grid = grid or DEFAULT_GRID
    keys = ("beta", "gamma", "erase_gap", "beta_pair")
    values = [sorted(grid[k]) for k in keys]
    if not all(values):
        raise ConfigError("every grid axis needs at least one value")
    e = targets.shape() * targets.level / targets.shape().max()
    if e.max() > 1:
        raise ConfigError("target level too high for a probability")
    best = None
    for combo in itertools.product(*values):
        params = dict(zip(keys, combo))
        prof = model_profile(targets.m, e, retention_share=targets.retention_share,
                             c_pec=targets.c_pec, delta=targets.delta,
                             provenance="calibrated", **params)
        score, rows = _score(prof, targets)
        if best is None or score < best[0] - 1e-12:
            best = (score, prof, rows)
    score, prof, rows = best
    return CalibrationResult(prof, rows, score)
