import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starsim.randomizer import Lfsr, LfsrConfig, is_primitive, keystream, lfsr_randomize, max_bitline_run


def test_default_polynomial_is_primitive():
    assert is_primitive((32, 22, 2, 1, 0))
    assert not is_primitive((4, 2, 0))      # x^4+x^2+1 = (x^2+x+1)^2
    with pytest.raises(ValueError):
        LfsrConfig(taps=(4, 2, 0))


def test_small_lfsr_has_maximal_period():
    taps = (5, 2, 0)
    assert is_primitive(taps)
    bits = keystream(taps, 1, 2 * 31 + 5)
    assert (bits[:31] == bits[31:62]).all()
    windows = {tuple(bits[i:i + 5]) for i in range(31)}
    assert len(windows) == 31


@given(st.integers(1, 2**32 - 1), st.integers(1, 3000))
def test_fast_keystream_matches_bit_serial(seed, n):
    taps = (32, 22, 2, 1, 0)
    fast = keystream(taps, seed, n)
    slow = Lfsr(taps, seed).bits(n)
    assert (fast == slow).all()


def test_randomize_is_self_inverse(rng):
    cfg = LfsrConfig()
    pages = rng.integers(0, 2, (4, 4096), dtype=np.uint8)
    out = lfsr_randomize(pages, cfg, (0, 3, 7))
    assert not (out == pages).all()
    assert (lfsr_randomize(out, cfg, (0, 3, 7)) == pages).all()


def test_page_seeds_differ_by_address():
    cfg = LfsrConfig()
    seeds = {cfg.page_seed((0, b, w), p) for b in range(3) for w in range(3) for p in range(4)}
    assert len(seeds) == 36
    assert all(s != 0 for s in seeds)


def test_constant_data_is_whitened():
    cfg = LfsrConfig()
    zeros = np.zeros((3, 8192), dtype=np.uint8)
    out = lfsr_randomize(zeros, cfg, (0, 0, 0))
    assert abs(out.mean() - 0.5) < 0.02


def test_max_bitline_run():
    states = np.array([[1, 2], [1, 3], [1, 3], [4, 3]])
    assert max_bitline_run(states) == 3
