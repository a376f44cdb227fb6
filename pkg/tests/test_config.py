import math

import pytest

from cellfree import SystemConfig
from cellfree.config import coerce_overrides, parse_assignments, read_config_file, thermal_noise_mw


def test_defaults():
    cfg = SystemConfig()
    assert (cfg.M, cfg.N, cfg.K, cfg.tau, cfg.tau_c) == (100, 2, 40, 20, 200)
    assert cfg.tau_f == 180
    assert cfg.rho == pytest.approx(200 / thermal_noise_mw())
    assert cfg.p_p == cfg.rho
    assert cfg.Q2 == 32 and cfg.Q1 == 512


def test_infinite_bits():
    assert math.isinf(SystemConfig(alpha2=math.inf).Q2)


@pytest.mark.parametrize("bad", [dict(M=0), dict(tau=200), dict(D=-1.0), dict(pmax=0.0),
                                 dict(pilot_mode="gold"), dict(tau=10, pilot_mode="orthogonal"),
                                 dict(d0=60.0)])
def test_invalid_configs(bad):
    with pytest.raises(ValueError):
        SystemConfig(**bad)


def test_overrides_are_coerced():
    cfg = SystemConfig().with_overrides({"K": "10", "D": "2e3", "alpha2": "inf",
                                         "rate_prefactor": "yes", "pilot_mode": "orthogonal",
                                         "tau": "10"})
    assert cfg.K == 10 and isinstance(cfg.K, int)
    assert cfg.D == 2000.0 and math.isinf(cfg.alpha2) and cfg.rate_prefactor


def test_unknown_key_is_rejected():
    with pytest.raises(KeyError, match="bogus"):
        coerce_overrides({"bogus": "1"})
    with pytest.raises(ValueError):
        coerce_overrides({"rate_prefactor": "maybe"})


def test_parse_assignments():
    assert parse_assignments(["a=1", " b = x=y "]) == {"a": "1", "b": "x=y"}
    with pytest.raises(ValueError):
        parse_assignments(["novalue"])


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nM = 20\n\nK=5   # inline\n", encoding="utf-8")
    assert read_config_file(path) == {"M": "20", "K": "5"}
    path.write_text("oops\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":1:"):
        read_config_file(path)
