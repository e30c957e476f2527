import numpy as np
import pytest

from starsim.errors import PartialScanError, UnprogrammedReadError
from starsim.nand import FlashArray, Geometry, WlAddress, measure_rber, scan_weak_patterns, triple_counts
from starsim.nand.gray import QLC_MAP
from starsim.nand.stats import codeword_error_counts


def test_triple_counts_oracle(rng):
    states = rng.integers(0, 4, (6, 50))
    counts = triple_counts(states, 4)
    ref = np.zeros((4, 4, 4), dtype=int)
    for w in range(1, 5):
        for c in range(50):
            ref[states[w - 1, c], states[w, c], states[w + 1, c]] += 1
    assert (counts == ref).all()
    assert counts.sum() == 4 * 50


def test_codeword_counts_oracle(rng):
    a = rng.integers(0, 16, (3, 20000)).astype(np.uint8)
    b = a.copy()
    hit = rng.random(a.shape) < 0.05
    b[hit] = rng.integers(0, 16, hit.sum())
    got = codeword_error_counts(a, b, QLC_MAP)
    diff = QLC_MAP.code_table[a] ^ QLC_MAP.code_table[b]
    for j in range(4):
        for k, start in enumerate(range(0, 20000, 8192)):
            assert got[:, j, k].tolist() == ((diff[:, start:start + 8192] >> j) & 1).sum(axis=1).tolist()


def test_scan_requires_full_block(rng):
    arr = FlashArray(Geometry(1, 1, 4, 16, 3))
    with pytest.raises(PartialScanError):
        arr.program_wordline(WlAddress(0, 0, 0), rng.integers(0, 8, 128))
        scan_weak_patterns(arr, 0, 0)
    stats = scan_weak_patterns(arr, 0, 0, allow_partial=True)
    assert stats.total_triples == 0
    for wl in range(1, 4):
        arr.program_wordline(WlAddress(0, 0, wl), rng.integers(0, 8, 128))
    stats = scan_weak_patterns(arr, 0, 0)
    assert stats.total_triples == 2 * 128


def test_rber_counts_cells(rng):
    arr = FlashArray(Geometry(1, 1, 4, 16, 4))
    with pytest.raises(UnprogrammedReadError):
        measure_rber(arr, 0, 0)
    for wl in range(4):
        arr.program_wordline(WlAddress(0, 0, wl), rng.integers(1, 15, 128))
    arr.current[0, 0, 0, :10] += 1
    rep = measure_rber(arr, 0, 0)
    assert rep.rber == pytest.approx(10 / 512)
    # an adjacent-state shift costs exactly one bit under a Gray map
    assert rep.bit_errors == 10
    assert 1 <= rep.worst_codeword_errors <= 10
