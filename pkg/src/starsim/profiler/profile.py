"""Per-state error profiles: JSON schema, validation and shipped defaults."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ProfileError

DEFAULT_RATIO_CAP = 100.0

# retention bake equivalence used only to label time axes
BAKE_HOURS_85C_PER_YEAR_30C = 13.0


def months_to_bake_hours(months):
    return months / 12.0 * BAKE_HOURS_85C_PER_YEAR_30C


@dataclass
class ErrorProfile:
    """Per-state error probabilities plus LCS and aging parameters.

    ``e`` is the per-state error probability used by the STAR estimator.
    ``retention_base`` is the 12-month, zero-PEC retention flip probability
    of an isolated cell (defaults to ``e``).  ``erase_gap`` widens the charge
    distance between the erased state and P1; ``beta_pair`` scales the
    neighbour-interaction LCS term.
    ``program_noise`` is the per-state shift probability at zero PEC applied
    at program time; it grows with wear like retention does.
    """

    m: int
    e: np.ndarray
    beta: float = 0.0
    gamma: float = 1.0
    c_pec: float = 0.0
    delta: float = 1.0
    provenance: str = "unspecified"
    retention_base: np.ndarray | None = None
    program_noise: np.ndarray | None = None
    erase_gap: float = 0.0
    beta_pair: float = 0.0
    ratio_cap: float = DEFAULT_RATIO_CAP
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.e = np.asarray(self.e, dtype=float)
        n = 1 << self.m
        if self.retention_base is None:
            self.retention_base = self.e.copy()
        else:
            self.retention_base = np.asarray(self.retention_base, dtype=float)
        if self.program_noise is None:
            self.program_noise = np.zeros(n)
        else:
            self.program_noise = np.asarray(self.program_noise, dtype=float)
        validate_profile(self)

    @property
    def n_states(self):
        return 1 << self.m

    @property
    def is_uniform(self):
        return bool(np.all(self.e == self.e[0]))

    @property
    def state_ratio(self):
        nz = self.e[self.e > 0]
        if nz.size == 0:
            return 1.0
        return float(nz.max() / nz.min())

    @property
    def flags(self):
        return ["uniform"] if self.is_uniform else []

    def scaled(self, factor):
        """Copy with ``e`` multiplied by ``factor`` (other fields untouched)."""
        d = self.to_dict()
        d["e"] = [x * factor for x in d["e"]]
        return profile_from_dict(d)

    def to_dict(self):
        d = {
            "m": self.m,
            "e": [float(x) for x in self.e],
            "beta": float(self.beta),
            "gamma": float(self.gamma),
            "c_pec": float(self.c_pec),
            "delta": float(self.delta),
            "provenance": self.provenance,
            "retention_base": [float(x) for x in self.retention_base],
            "program_noise": [float(x) for x in self.program_noise],
            "erase_gap": float(self.erase_gap),
            "beta_pair": float(self.beta_pair),
        }
        if self.ratio_cap != DEFAULT_RATIO_CAP:
            d["ratio_cap"] = self.ratio_cap
        d.update(self.extra)
        return d


_SCALARS = ("beta", "gamma", "c_pec", "delta", "erase_gap", "beta_pair", "ratio_cap")


def _check_vector(name, values, n, upper=1.0):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ProfileError(name, f"expected {n} entries, got {arr.size}")
    for i, x in enumerate(arr):
        if math.isnan(x):
            raise ProfileError(f"{name}[{i}]", "NaN")
        if x < 0:
            raise ProfileError(f"{name}[{i}]", f"negative value {x}")
        if upper is not None and x > upper:
            raise ProfileError(f"{name}[{i}]", f"{x} exceeds {upper}")


def validate_profile(p: ErrorProfile):
    if p.m not in (1, 2, 3, 4, 5):
        raise ProfileError("m", f"unsupported bits per cell {p.m}")
    n = 1 << p.m
    _check_vector("e", p.e, n)
    _check_vector("retention_base", p.retention_base, n)
    _check_vector("program_noise", p.program_noise, n)
    for name in _SCALARS:
        x = float(getattr(p, name))
        if math.isnan(x) or x < 0:
            raise ProfileError(name, f"must be a non-negative number, got {x}")
    if p.state_ratio > p.ratio_cap:
        raise ProfileError("e", f"max/min ratio {p.state_ratio:.1f} above cap {p.ratio_cap}")


_KNOWN = {"m", "e", "provenance", "retention_base", "program_noise", *_SCALARS}


def profile_from_dict(d) -> ErrorProfile:
    for key in ("m", "e"):
        if key not in d:
            raise ProfileError(key, "missing")
    kwargs = {k: d[k] for k in _KNOWN if k in d}
    try:
        kwargs["m"] = int(kwargs["m"])
        for name in _SCALARS:
            if name in kwargs:
                kwargs[name] = float(kwargs[name])
    except (TypeError, ValueError) as exc:
        raise ProfileError("m", str(exc)) from None
    extra = {k: v for k, v in d.items() if k not in _KNOWN}
    return ErrorProfile(extra=extra, **kwargs)


def load_profile(path) -> ErrorProfile:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProfileError("<file>", f"parse error: {exc}") from None
    if not isinstance(data, dict):
        raise ProfileError("<file>", "top level must be an object")
    return profile_from_dict(data)


def save_profile(profile: ErrorProfile, path):
    Path(path).write_text(json.dumps(profile.to_dict(), indent=2) + "\n")


def uniform_profile(m, value=0.001, **kwargs) -> ErrorProfile:
    return ErrorProfile(m=m, e=np.full(1 << m, value), provenance="uniform", **kwargs)


def default_profile_path(m):
    name = {3: "tlc_default.json", 4: "qlc_default.json"}[m]
    return resources.files("starsim.profiler") / "data" / name


def default_profile(m) -> ErrorProfile:
    with resources.as_file(default_profile_path(m)) as path:
        return load_profile(path)
