"""Regenerate the shipped default profiles.

The per-state shapes were fitted so STAR's state redistribution matches the
measured per-state reductions; the LCS parameters were chosen so the weak
pattern ranking and the TailCut/STAR lifetime ordering come out right; the
level and wear slope place the baseline end of life at the measured PEC.

    python scripts/build_default_profiles.py
"""

from pathlib import Path

import numpy as np

from starsim.profiler.calibrate import model_profile
from starsim.profiler.profile import save_profile

DATA = Path(__file__).resolve().parents[1] / "src" / "starsim" / "profiler" / "data"

QLC_SHAPE = [4.212, 3.566, 1.092, 1.174, 1.219, 1.278, 1.277, 1.261,
             1.040, 1.121, 1.074, 1.000, 1.283, 1.244, 3.332, 4.600]
TLC_SHAPE = [2.996, 2.317, 1.027, 1.277, 1.264, 1.000, 2.980, 3.700]

SETTINGS = {
    "qlc": dict(m=4, shape=QLC_SHAPE, e_max=0.02783, beta=0.01, gamma=3.0, erase_gap=0.0,
                beta_pair=0.01, c_pec=0.166, delta=1.0),
    "tlc": dict(m=3, shape=TLC_SHAPE, e_max=0.02517, beta=0.001, gamma=3.0, erase_gap=2.5,
                beta_pair=0.05, c_pec=0.0280, delta=1.0),
}


def build(name):
    s = dict(SETTINGS[name])
    shape = np.asarray(s.pop("shape"))
    e = shape / shape.max() * s.pop("e_max")
    return model_profile(e=e, retention_share=0.48, provenance=f"{name} default (model fit)", **s)


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    for name in SETTINGS:
        save_profile(build(name), DATA / f"{name}_default.json")
        print("wrote", DATA / f"{name}_default.json")
