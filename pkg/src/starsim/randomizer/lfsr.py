"""Baseline scrambler: per-page LFSR keystream XORed into the data."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DimensionError

# x^32 + x^22 + x^2 + x + 1
DEFAULT_TAPS = (32, 22, 2, 1, 0)


def _gf2_mulmod(a, b, mod, deg):
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= mod
    return result


def _gf2_powmod(base, exp, mod, deg):
    result = 1
    while exp:
        if exp & 1:
            result = _gf2_mulmod(result, base, mod, deg)
        base = _gf2_mulmod(base, base, mod, deg)
        exp >>= 1
    return result


def _prime_factors(n):
    factors, d = set(), 2
    while d * d <= n:
        while n % d == 0:
            factors.add(d)
            n //= d
        d += 1
    if n > 1:
        factors.add(n)
    return sorted(factors)


@lru_cache(maxsize=None)
def is_primitive(taps):
    """True if the polynomial with exponents ``taps`` is primitive over GF(2)."""
    deg = max(taps)
    poly = sum(1 << t for t in set(taps))
    if not poly & 1 or deg < 2:
        return False
    order = (1 << deg) - 1
    x = 0b10
    if _gf2_powmod(x, order, poly, deg) != 1:
        return False
    return all(_gf2_powmod(x, order // q, poly, deg) != 1 for q in _prime_factors(order))


class Lfsr:
    """Bit-serial Fibonacci LFSR; the slow reference for :func:`keystream`."""

    def __init__(self, taps, state):
        self.width = max(taps)
        self.mask = sum(1 << t for t in taps if t < self.width)
        self.state = state & ((1 << self.width) - 1)

    def next_bit(self):
        out = self.state & 1
        fb = bin(self.state & self.mask).count("1") & 1
        self.state = (self.state >> 1) | (fb << (self.width - 1))
        return out

    def bits(self, n):
        return np.array([self.next_bit() for _ in range(n)], dtype=np.uint8)


def keystream(taps, seed, nbits):
    """First ``nbits`` of the LFSR output for an initial state ``seed``.

    Squaring the characteristic polynomial doubles every recurrence lag, so
    the sequence is extended in numpy chunks whose length grows with the
    history already produced.
    """
    width = max(taps)
    lags = [width - t for t in taps if t < width]
    min_lag = min(lags)
    out = np.empty(max(nbits, width), dtype=np.uint8)
    out[:width] = (seed >> np.arange(width, dtype=np.uint64)) & 1
    filled = width
    while filled < nbits:
        scale = 1
        while width * scale * 2 <= filled:
            scale *= 2
        chunk = min(min_lag * scale, nbits - filled)
        acc = np.zeros(chunk, dtype=np.uint8)
        for lag in lags:
            lo = filled - lag * scale
            acc ^= out[lo:lo + chunk]
        out[filled:filled + chunk] = acc
        filled += chunk
    return out[:nbits]


@dataclass(frozen=True)
class LfsrConfig:
    taps: tuple = DEFAULT_TAPS
    base_seed: int = 0x5EED

    def __post_init__(self):
        if not is_primitive(tuple(self.taps)):
            raise ValueError(f"LFSR polynomial {self.taps} is not primitive")

    @property
    def width(self):
        return max(self.taps)

    def page_seed(self, address, page):
        """Seed for one logical page; an all-zero state is bumped to 1."""
        chip, block, wl = address
        key = f"{self.base_seed}:{chip}:{block}:{wl}:{page}".encode()
        seed = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
        seed &= (1 << self.width) - 1
        return seed or 1

    def page_keystream(self, address, page, nbits):
        return keystream(self.taps, self.page_seed(address, page), nbits)


def lfsr_randomize(pages, cfg: LfsrConfig, address):
    """XOR each page with its address-derived keystream (self-inverse)."""
    pages = np.asarray(pages, dtype=np.uint8)
    if pages.ndim != 2:
        raise DimensionError("pages must be a (m, n) bit matrix")
    n = pages.shape[1]
    out = np.empty_like(pages)
    for j in range(pages.shape[0]):
        out[j] = pages[j] ^ cfg.page_keystream(address, j, n)
    return out


lfsr_derandomize = lfsr_randomize


def max_bitline_run(states):
    """Longest run of identical states along the wordline axis of a (W, C) matrix."""
    states = np.asarray(states)
    best = np.ones(states.shape[1], dtype=np.int64)
    run = np.ones(states.shape[1], dtype=np.int64)
    for w in range(1, states.shape[0]):
        same = states[w] == states[w - 1]
        run = np.where(same, run + 1, 1)
        best = np.maximum(best, run)
    return int(best.max()) if best.size else 0
