"""Discrete-state flash array with bitline (vertical) adjacency."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..errors import AddressError, DomainError, GeometryError, OverwriteError, UnprogrammedReadError
from .gray import GrayCodeMap, check_states, gray_map


@dataclass(frozen=True)
class Geometry:
    chips: int = 1
    blocks: int = 1
    wordlines: int = 64
    page_bytes: int = 4096
    bits_per_cell: int = 4

    def __post_init__(self):
        for name in ("chips", "blocks", "wordlines", "page_bytes"):
            if getattr(self, name) < 1:
                raise GeometryError(f"{name} must be positive")
        if self.bits_per_cell not in (3, 4):
            raise GeometryError("bits_per_cell must be 3 (TLC) or 4 (QLC)")

    @property
    def cells_per_wordline(self):
        # one bit per cell per page
        return self.page_bytes * 8

    @property
    def shape(self):
        return (self.chips, self.blocks, self.wordlines, self.cells_per_wordline)

    @property
    def cells_per_block(self):
        return self.wordlines * self.cells_per_wordline


class WlAddress(NamedTuple):
    chip: int
    block: int
    wl: int


class FlashArray:
    """Programmed and current (possibly shifted) state planes for every cell."""

    def __init__(self, geometry: Geometry, gmap: GrayCodeMap | None = None):
        self.geometry = geometry
        self.gmap = gmap or gray_map(geometry.bits_per_cell)
        if self.gmap.bits_per_cell != geometry.bits_per_cell:
            raise GeometryError("Gray map and geometry disagree on bits per cell")
        self.programmed = np.zeros(geometry.shape, dtype=np.uint8)
        self.current = np.zeros(geometry.shape, dtype=np.uint8)
        self.wl_programmed = np.zeros(geometry.shape[:3], dtype=bool)
        self.pec = np.zeros(geometry.shape[:2], dtype=np.int64)

    @property
    def m(self):
        return self.geometry.bits_per_cell

    def _check_block(self, chip, block):
        g = self.geometry
        if not (0 <= chip < g.chips and 0 <= block < g.blocks):
            raise AddressError(f"block ({chip}, {block}) outside geometry")

    def _check_wl(self, address):
        chip, block, wl = address
        self._check_block(chip, block)
        if not 0 <= wl < self.geometry.wordlines:
            raise AddressError(f"wordline {wl} outside block")

    def erase(self, chip, block):
        """Erase a block to P0 and count one program/erase cycle."""
        self._check_block(chip, block)
        self.programmed[chip, block] = 0
        self.current[chip, block] = 0
        self.wl_programmed[chip, block] = False
        self.pec[chip, block] += 1

    def set_pec(self, chip, block, pec):
        """Fast-forward the wear counter (stress experiments); never rewinds."""
        self._check_block(chip, block)
        if pec < self.pec[chip, block]:
            raise DomainError("PEC is monotonically non-decreasing")
        self.pec[chip, block] = pec

    def program_wordline(self, address, states):
        self._check_wl(address)
        states = np.asarray(states)
        if states.shape != (self.geometry.cells_per_wordline,):
            raise GeometryError(
                f"wordline needs {self.geometry.cells_per_wordline} states, got {states.shape}")
        check_states(states, self.m)
        if self.wl_programmed[address]:
            raise OverwriteError(f"wordline {tuple(address)} already programmed")
        self.programmed[address] = states
        self.current[address] = states
        self.wl_programmed[address] = True

    def read_states(self, address):
        self._check_wl(address)
        if not self.wl_programmed[address]:
            raise UnprogrammedReadError(f"wordline {tuple(address)} not programmed")
        return self.current[address].copy()

    def read_page(self, address, page_index, gmap: GrayCodeMap | None = None):
        gmap = gmap or self.gmap
        if not 0 <= page_index < gmap.bits_per_cell:
            raise AddressError(f"page index {page_index} invalid for m={gmap.bits_per_cell}")
        codes = gmap.code_table[self.read_states(address)]
        return (codes >> page_index) & 1

    def block_fully_programmed(self, chip, block):
        return bool(self.wl_programmed[chip, block].all())

    def reset_current(self, chip=None, block=None):
        """Undo all injected shifts (current := programmed)."""
        if chip is None:
            self.current[...] = self.programmed
        else:
            self.current[chip, block] = self.programmed[chip, block]


# -- binary snapshot -------------------------------------------------------

DUMP_MAGIC = b"STARNAND"
DUMP_VERSION = 1
_HEADER = struct.Struct("<8sHBxIIII")


def dump_array(array: FlashArray, path):
    g = array.geometry
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, g.bits_per_cell,
                              g.chips, g.blocks, g.wordlines, g.page_bytes))
        fh.write(array.programmed.tobytes())
        fh.write(array.current.tobytes())
        fh.write(array.wl_programmed.astype(np.uint8).tobytes())
        fh.write(array.pec.astype("<u4").tobytes())


def load_array(path) -> FlashArray:
    raw = Path(path).read_bytes()
    magic, version, m, chips, blocks, wls, page_bytes = _HEADER.unpack_from(raw)
    if magic != DUMP_MAGIC:
        raise GeometryError("not a starsim array dump")
    if version != DUMP_VERSION:
        raise GeometryError(f"unsupported dump version {version}")
    arr = FlashArray(Geometry(chips, blocks, wls, page_bytes, m))
    off = _HEADER.size
    n = int(np.prod(arr.geometry.shape))
    for plane in (arr.programmed, arr.current):
        plane[...] = np.frombuffer(raw, dtype=np.uint8, count=n, offset=off).reshape(plane.shape)
        off += n
    nwl = arr.wl_programmed.size
    arr.wl_programmed[...] = np.frombuffer(raw, np.uint8, nwl, off).reshape(arr.wl_programmed.shape) != 0
    off += nwl
    arr.pec[...] = np.frombuffer(raw, "<u4", arr.pec.size, off).reshape(arr.pec.shape)
    return arr
