"""Gray-coded state <-> page-bit mapping for TLC and QLC cells.

A codeword is stored as an integer whose bit ``j`` belongs to page ``j``:
page 0 is LSB, then CSB, MSB and (QLC only) TSB.  Written MSB-first, a QLC
codeword therefore reads TSB,MSB,CSB,LSB, e.g. the erased state is ``1111``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, InvalidStateError

PAGE_NAMES = {
    3: ("LSB", "CSB", "MSB"),
    4: ("LSB", "CSB", "MSB", "TSB"),
}

# Hamiltonian path on the 4-cube honouring the fixed codewords
# P0=1111, P9=1101, P11=0100, P14=0110.
QLC_CODES = (
    0b1111, 0b1011, 0b1010, 0b0010, 0b0011, 0b0001, 0b0000, 0b1000,
    0b1001, 0b1101, 0b0101, 0b0100, 0b1100, 0b1110, 0b0110, 0b0111,
)

# conventional 2-3-2 TLC coding (MSB,CSB,LSB), E = 111
TLC_CODES = (0b111, 0b110, 0b100, 0b000, 0b010, 0b011, 0b001, 0b101)

QLC_ANCHORS = {0: 0b1111, 9: 0b1101, 11: 0b0100, 14: 0b0110}


@dataclass(frozen=True)
class GrayCodeMap:
    bits_per_cell: int
    codes: tuple[int, ...]
    code_table: np.ndarray = field(init=False, repr=False, compare=False)
    state_table: np.ndarray = field(init=False, repr=False, compare=False)
    flip_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = 1 << self.bits_per_cell
        if len(self.codes) != n:
            raise DimensionError(f"need {n} codewords, got {len(self.codes)}")
        if sorted(self.codes) != list(range(n)):
            raise ValueError("codes must be a permutation of all codewords")
        code_table = np.asarray(self.codes, dtype=np.uint8)
        state_table = np.empty(n, dtype=np.uint8)
        state_table[code_table] = np.arange(n, dtype=np.uint8)
        # flip_table[f, k] = state reached from k when mask f is XORed in
        flip_table = state_table[np.arange(n)[:, None] ^ code_table[None, :]]
        for name, arr in (("code_table", code_table), ("state_table", state_table),
                          ("flip_table", flip_table)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_states(self):
        return 1 << self.bits_per_cell

    @property
    def page_names(self):
        return PAGE_NAMES.get(self.bits_per_cell, tuple(f"page{j}" for j in range(self.bits_per_cell)))

    def code_of(self, k: int) -> int:
        check_states([k], self.bits_per_cell)
        return self.codes[k]

    def state_of(self, code: int) -> int:
        if not 0 <= code < self.n_states:
            raise InvalidStateError(f"codeword {code} outside {self.bits_per_cell}-bit range")
        return int(self.state_table[code])

    def flip(self, k: int, mask: int) -> int:
        return int(self.flip_table[mask, k])

    def codeword_str(self, k: int) -> str:
        return format(self.codes[k], f"0{self.bits_per_cell}b")


QLC_MAP = GrayCodeMap(4, QLC_CODES)
TLC_MAP = GrayCodeMap(3, TLC_CODES)


def gray_map(bits_per_cell: int) -> GrayCodeMap:
    try:
        return {3: TLC_MAP, 4: QLC_MAP}[bits_per_cell]
    except KeyError:
        raise DimensionError(f"no shipped Gray map for m={bits_per_cell}") from None


def check_states(states, bits_per_cell):
    arr = np.asarray(states)
    if arr.size and (arr.min() < 0 or arr.max() >= (1 << bits_per_cell)):
        bad = arr[(arr < 0) | (arr >= (1 << bits_per_cell))].ravel()[0]
        raise InvalidStateError(f"state {bad} invalid for m={bits_per_cell}")
    return arr


def encode_pages(states, gmap: GrayCodeMap) -> np.ndarray:
    """Split cell states into ``m`` page bit-vectors, shape ``(m, n)``."""
    arr = check_states(states, gmap.bits_per_cell).astype(np.intp, copy=False)
    codes = gmap.code_table[arr]
    shifts = np.arange(gmap.bits_per_cell, dtype=np.uint8)[:, None]
    return ((codes[None, :] >> shifts) & 1).astype(np.uint8)


def decode_states(pages, gmap: GrayCodeMap) -> np.ndarray:
    pages = np.asarray(pages, dtype=np.uint8)
    if pages.ndim != 2 or pages.shape[0] != gmap.bits_per_cell:
        raise DimensionError(f"expected {gmap.bits_per_cell} pages, got shape {pages.shape}")
    weights = (1 << np.arange(gmap.bits_per_cell, dtype=np.uint8))[:, None]
    codes = (pages * weights).sum(axis=0).astype(np.intp)
    return gmap.state_table[codes]


def validate_gray_map(gmap: GrayCodeMap, anchors=None) -> list[str]:
    """Exhaustively check a map; returns a list of violations (empty if valid)."""
    problems = []
    n = gmap.n_states
    if len(set(gmap.codes)) != n:
        problems.append("not bijective")
    for k in range(n):
        if gmap.state_of(gmap.codes[k]) != k:
            problems.append(f"round trip fails at P{k}")
    for k in range(n - 1):
        dist = bin(gmap.codes[k] ^ gmap.codes[k + 1]).count("1")
        if dist != 1:
            problems.append(f"P{k}->P{k + 1} differ in {dist} bits")
    for k, code in (anchors or {}).items():
        if gmap.codes[k] != code:
            problems.append(f"P{k} is {gmap.codeword_str(k)}, expected {code:0{gmap.bits_per_cell}b}")
    return problems
