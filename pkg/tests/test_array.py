import numpy as np
import pytest

from starsim.errors import AddressError, DomainError, GeometryError, OverwriteError, UnprogrammedReadError
from starsim.nand import FlashArray, Geometry, WlAddress, dump_array, load_array
from starsim.nand.gray import TLC_MAP


@pytest.fixture
def array():
    return FlashArray(Geometry(chips=1, blocks=2, wordlines=4, page_bytes=16, bits_per_cell=3))


def test_program_and_read(array, rng):
    states = rng.integers(0, 8, 128)
    array.program_wordline(WlAddress(0, 0, 0), states)
    assert (array.read_states(WlAddress(0, 0, 0)) == states).all()
    page = array.read_page(WlAddress(0, 0, 0), 2)
    assert (page == (TLC_MAP.code_table[states] >> 2) & 1).all()


def test_overwrite_and_unprogrammed_read(array):
    addr = WlAddress(0, 0, 1)
    with pytest.raises(UnprogrammedReadError):
        array.read_states(addr)
    array.program_wordline(addr, np.zeros(128, dtype=np.uint8))
    with pytest.raises(OverwriteError):
        array.program_wordline(addr, np.zeros(128, dtype=np.uint8))
    array.erase(0, 0)
    array.program_wordline(addr, np.ones(128, dtype=np.uint8))
    assert array.pec[0, 0] == 1


def test_bad_addresses_and_shapes(array):
    with pytest.raises(AddressError):
        array.erase(0, 5)
    with pytest.raises(AddressError):
        array.read_states(WlAddress(0, 0, 9))
    with pytest.raises(GeometryError):
        array.program_wordline(WlAddress(0, 0, 0), np.zeros(3))
    with pytest.raises(GeometryError):
        Geometry(bits_per_cell=2)


def test_pec_never_rewinds(array):
    array.set_pec(0, 1, 100)
    with pytest.raises(DomainError):
        array.set_pec(0, 1, 50)


def test_dump_round_trip(array, rng, tmp_path):
    array.program_wordline(WlAddress(0, 1, 2), rng.integers(0, 8, 128))
    array.current[0, 1, 2, 5] = 7
    array.set_pec(0, 1, 42)
    path = tmp_path / "a.bin"
    dump_array(array, path)
    back = load_array(path)
    assert (back.programmed == array.programmed).all()
    assert (back.current == array.current).all()
    assert (back.wl_programmed == array.wl_programmed).all()
    assert (back.pec == array.pec).all()


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"\0" * 64)
    with pytest.raises(GeometryError):
        load_array(path)
