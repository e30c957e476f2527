import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starsim.errors import DomainError
from starsim.nand import FlashArray, Geometry, LcsModel, WlAddress, age_block, flip_probability_table
from starsim.nand.retention import aging_factor
from starsim.profiler import ErrorProfile, default_profile


def filled_array(rng, m=4, wordlines=8, page_bytes=256):
    arr = FlashArray(Geometry(1, 1, wordlines, page_bytes, m))
    for wl in range(wordlines):
        arr.program_wordline(WlAddress(0, 0, wl), rng.integers(0, 1 << m, page_bytes * 8))
    return arr


def test_factor_table_oracle():
    lcs = LcsModel(beta=0.1, gamma=2.0, erase_gap=1.0, n_states=8, beta_pair=0.01)
    q = np.arange(8.0)
    q[0] = -1.0
    table = lcs.factor_table()
    for up in range(8):
        for k in range(8):
            for down in range(8):
                du = abs(q[up] - q[k]) ** 2
                dd = abs(q[down] - q[k]) ** 2
                assert table[up, k, down] == pytest.approx(0.1 * (du + dd) + 0.01 * du * dd)


def test_flat_neighbourhood_has_no_lcs():
    lcs = LcsModel(beta=0.3, gamma=1.5, n_states=16, beta_pair=0.2)
    table = lcs.factor_table()
    for k in range(16):
        assert table[k, k, k] == 0


def test_e_p15_e_is_worst_pattern():
    lcs = LcsModel(beta=0.01, gamma=3.0, n_states=16)
    table = lcs.factor_table()
    assert np.unravel_index(table.argmax(), table.shape) in {(0, 15, 0), (15, 0, 15)}


def test_direction_table_edges():
    d = LcsModel(0.1, 2.0, n_states=8).direction_table()
    assert (d[:, 0, :] == 1).all()
    assert (d[:, 7, :] == -1).all()
    assert d[0, 7, 0] == -1          # charge leaks toward erased neighbours
    assert d[7, 0, 7] == 1


def test_aging_factor_domain():
    assert aging_factor(0, 0, 0.5, 1.0) == 0.0
    assert aging_factor(1000, 12, 0.5, 1.0) == pytest.approx(1.5)
    assert aging_factor(0, 6, 0.0, 1.0) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        aging_factor(-1, 12, 0, 1)
    with pytest.raises(DomainError):
        aging_factor(0, -1, 0, 1)


def test_zero_retention_zero_noise_changes_nothing(rng):
    arr = filled_array(rng)
    prof = ErrorProfile(m=4, e=np.full(16, 1e-2))
    age_block(arr, 0, 0, prof, 5000, 0)
    assert (arr.current == arr.programmed).all()


def test_program_noise_present_at_zero_pec(rng):
    arr = filled_array(rng)
    prof = ErrorProfile(m=4, e=np.full(16, 1e-2), program_noise=np.full(16, 1e-2),
                        retention_base=np.zeros(16))
    age_block(arr, 0, 0, prof, 0, 0)
    changed = (arr.current != arr.programmed).mean()
    assert 0.005 < changed < 0.015
    assert (np.abs(arr.current.astype(int) - arr.programmed) <= 1).all()


@given(st.integers(0, 2**31), st.floats(0, 20000), st.floats(0, 20000), st.floats(0.1, 36))
def test_retention_flips_pathwise_monotone_in_pec(seed, a, b, months):
    # from the same starting states, a higher PEC only raises each cell's odds
    rng = np.random.default_rng(seed)
    arr = filled_array(rng, m=3, wordlines=6, page_bytes=64)
    prof = dataclasses.replace(default_profile(3), program_noise=np.zeros(8))
    lo, hi = sorted((a, b))
    age_block(arr, 0, 0, prof, lo, months, seed)
    wrong_lo = arr.current != arr.programmed
    age_block(arr, 0, 0, prof, hi, months, seed)
    wrong_hi = arr.current != arr.programmed
    assert (wrong_hi | ~wrong_lo).all()


def test_errors_statistically_monotone_in_pec():
    # noise then retention can cancel per cell, so only the mean is monotone
    prof = default_profile(3)
    rates = []
    for pec in (0, 3000, 6000, 12000):
        fr = []
        for seed in range(20):
            arr = filled_array(np.random.default_rng(seed), m=3, wordlines=8, page_bytes=256)
            age_block(arr, 0, 0, prof, pec, 12, seed)
            fr.append((arr.current != arr.programmed).mean())
        rates.append((np.mean(fr), np.std(fr, ddof=1) / np.sqrt(len(fr))))
    for (m0, s0), (m1, s1) in zip(rates, rates[1:]):
        assert m1 >= m0 - 3 * np.hypot(s0, s1)


def test_more_retention_more_errors(rng):
    arr = filled_array(rng)
    prof = default_profile(4)
    counts = []
    for months in (1, 3, 6, 12, 24):
        age_block(arr, 0, 0, prof, 1000, months, 9)
        counts.append(int((arr.current != arr.programmed).sum()))
    assert counts == sorted(counts)


def test_flip_probability_clipped():
    prof = ErrorProfile(m=3, e=np.full(8, 0.9), beta=1.0, gamma=2.0)
    p = flip_probability_table(prof, 10000, 120)
    assert p.max() <= 1.0
