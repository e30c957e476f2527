import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starsim.errors import ConfigError, DimensionError, ProfileError
from starsim.nand.gray import QLC_MAP, TLC_MAP
from starsim.profiler import (
    ErrorProfile,
    build_delta_lut,
    default_profile,
    load_profile,
    months_to_bake_hours,
    profile_from_dict,
    save_profile,
    uniform_profile,
)
from starsim.profiler.calibrate import (
    Targets,
    calibrate,
    implied_state_errors,
    model_profile,
    pattern_ranking,
)


def test_lut_oracle(rng):
    prof = ErrorProfile(m=3, e=rng.uniform(1e-4, 1e-2, 8))
    lut = build_delta_lut(prof, TLC_MAP)
    for f in range(8):
        for k in range(8):
            assert lut[f, k] == pytest.approx(prof.e[TLC_MAP.flip(k, f)] - prof.e[k])
    assert (lut.table[0] == 0).all()


def test_lut_dimension_mismatch():
    with pytest.raises(DimensionError):
        build_delta_lut(uniform_profile(3), QLC_MAP)


@pytest.mark.parametrize("bad, field", [
    ({"e": [0.1] * 7}, "e"),
    ({"e": [-0.1] + [0.1] * 7}, "e[0]"),
    ({"e": [float("nan")] + [0.1] * 7}, "e[0]"),
    ({"e": [2.0] + [0.1] * 7}, "e[0]"),
    ({"beta": -1.0}, "beta"),
])
def test_validation_names_field(bad, field):
    d = {"m": 3, "e": [0.01] * 8, **bad}
    with pytest.raises(ProfileError) as info:
        profile_from_dict(d)
    assert info.value.field == field


def test_ratio_cap():
    e = [1e-6] + [1e-2] * 7
    with pytest.raises(ProfileError):
        profile_from_dict({"m": 3, "e": e})
    assert profile_from_dict({"m": 3, "e": e, "ratio_cap": 1e5}).state_ratio == pytest.approx(1e4)


def test_uniform_flag():
    assert uniform_profile(4).flags == ["uniform"]
    assert default_profile(4).flags == []


def test_json_round_trip(tmp_path):
    prof = default_profile(3)
    path = tmp_path / "p.json"
    save_profile(prof, path)
    back = load_profile(path)
    assert back.to_dict() == prof.to_dict()


def test_unknown_keys_preserved(tmp_path):
    d = uniform_profile(3).to_dict()
    d["note"] = "kept"
    path = tmp_path / "p.json"
    path.write_text(json.dumps(d))
    assert load_profile(path).extra == {"note": "kept"}


def test_bad_json(tmp_path):
    path = tmp_path / "p.json"
    path.write_text("{not json")
    with pytest.raises(ProfileError):
        load_profile(path)


def test_bake_equivalence():
    assert months_to_bake_hours(12) == pytest.approx(13.0)


@given(st.floats(0, 0.1), st.floats(1, 3), st.floats(0, 2), st.floats(0, 0.05))
def test_model_profile_reproduces_e(beta, gamma, gap, beta_pair):
    e = np.linspace(1e-3, 4e-3, 8)
    prof = model_profile(3, e, beta, gamma, gap, beta_pair)
    assert np.allclose(implied_state_errors(prof), e, rtol=1e-9)
    retention = (implied_state_errors(prof) - prof.program_noise).sum()
    assert retention / e.sum() == pytest.approx(0.48)


def test_shipped_profiles_rank_expected_patterns():
    assert pattern_ranking(default_profile(4), 1) == [(0, 15, 0)]
    assert pattern_ranking(default_profile(3), 2) == [(0, 7, 0), (0, 6, 0)]


def test_shipped_profiles_prone_states():
    q = default_profile(4).e
    assert set(np.argsort(q)[-4:]) == {0, 1, 14, 15}
    assert default_profile(4).state_ratio >= 2
    assert default_profile(3).state_ratio >= 2


def test_calibrate_uniform_targets_gives_zero_beta():
    res = calibrate(Targets(m=4, state_ratio=1.0))
    assert res.profile.beta == 0
    assert res.profile.beta_pair == 0
    assert res.profile.is_uniform
    assert "target,value,achieved,residual" in res.residual_csv()


def test_calibrate_hits_pattern_targets():
    res = calibrate(Targets(m=3, state_ratio=3.7, prone_states=(7, 0, 6), top_patterns=((0, 7, 0),)))
    assert pattern_ranking(res.profile, 1) == [(0, 7, 0)]
    ratio = [r for r in res.residuals if r[0] == "state_ratio"][0]
    assert abs(ratio[3]) < 0.05


def test_targets_validation():
    with pytest.raises(ConfigError):
        Targets(m=3, state_ratio=0.5)
    with pytest.raises(ConfigError):
        Targets(m=3, state_ratio=2, e_shape=(1, 2)).shape()
