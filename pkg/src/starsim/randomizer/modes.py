"""Uniform front end over the three write paths used by experiments and the SSD."""

from __future__ import annotations

from enum import Enum

import numpy as np

from ..errors import ConfigError
from ..nand.array import WlAddress
from ..nand.gray import decode_states, encode_pages
from ..profiler.lut import build_delta_lut
from .lfsr import LfsrConfig, lfsr_randomize
from .star import GROUP_SIZE, star_read_transform, star_write_transform
from .tailcut import tailcut_read_transform, tailcut_write_transform


class Mode(str, Enum):
    BASELINE = "baseline"
    TAILCUT = "tailcut"
    STAR = "star"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown randomizer mode {value!r}") from None


class Randomizer:
    """Write/read transform pair for one mode.

    ``write`` returns the pages to program plus the per-wordline metadata the
    read path needs (FIB for STAR, remap record for TailCut, ``None`` otherwise).
    """

    def __init__(self, mode, gmap, profile=None, lfsr=None, group_size=GROUP_SIZE):
        self.mode = Mode.parse(mode)
        self.gmap = gmap
        self.lfsr = lfsr or LfsrConfig()
        self.group_size = group_size
        self.lut = None
        if self.mode is Mode.STAR:
            if profile is None:
                raise ConfigError("STAR needs an error profile")
            self.lut = build_delta_lut(profile, gmap)

    def write(self, pages, address, prev2=None, prev1=None):
        if self.mode is Mode.STAR:
            return star_write_transform(pages, self.lfsr, address, self.lut, self.gmap, self.group_size)
        if self.mode is Mode.TAILCUT:
            return tailcut_write_transform(pages, self.lfsr, address, self.gmap, prev2, prev1)
        return lfsr_randomize(pages, self.lfsr, address), None

    def read(self, pages, meta, address):
        if self.mode is Mode.STAR:
            return star_read_transform(pages, meta, self.lfsr, address, self.gmap, self.group_size)
        if self.mode is Mode.TAILCUT:
            return tailcut_read_transform(pages, meta, self.lfsr, address)
        return lfsr_randomize(pages, self.lfsr, address)


def random_pages(rng, m, n_cells):
    return rng.integers(0, 2, size=(m, n_cells), dtype=np.uint8)


def program_block(array, chip, block, randomizer: Randomizer, rng, data=None):
    """Erase-free program of every wordline of a block with random (or given)
    user data; returns the per-wordline metadata list."""
    g = array.geometry
    meta = []
    for wl in range(g.wordlines):
        addr = WlAddress(chip, block, wl)
        pages = data[wl] if data is not None else random_pages(rng, g.bits_per_cell, g.cells_per_wordline)
        prev2 = array.programmed[chip, block, wl - 2] if wl >= 2 else None
        prev1 = array.programmed[chip, block, wl - 1] if wl >= 1 else None
        out, info = randomizer.write(pages, addr, prev2, prev1)
        array.program_wordline(addr, decode_states(out, array.gmap))
        meta.append(info)
    return meta


def read_wordline(array, address, randomizer: Randomizer, meta, use_programmed=False):
    """Sense all pages of a wordline and run the inverse transform."""
    states = array.programmed[address] if use_programmed else array.read_states(address)
    return randomizer.read(encode_pages(states, array.gmap), meta, address)
