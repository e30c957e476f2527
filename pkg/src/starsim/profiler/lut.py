from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..nand.gray import GrayCodeMap


@dataclass(frozen=True)
class DeltaLUT:
    """Error change per (flip mask, state): ``table[f, k] = e[f(k)] - e[k]``."""

    table: np.ndarray
    gmap: GrayCodeMap

    @property
    def n_masks(self):
        return self.table.shape[0]

    def __getitem__(self, idx):
        return self.table[idx]


def build_delta_lut(profile, gmap: GrayCodeMap) -> DeltaLUT:
    if profile.m != gmap.bits_per_cell:
        raise DimensionError(f"profile m={profile.m} but map m={gmap.bits_per_cell}")
    e = np.asarray(profile.e, dtype=float)
    table = e[gmap.flip_table] - e[None, :]
    table.setflags(write=False)
    return DeltaLUT(table=table, gmap=gmap)
