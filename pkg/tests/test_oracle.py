import math

import numpy as np
import pytest

from cellfree import SystemConfig
from cellfree.oracle import oracle_case
from cellfree.quantization import CASE1, CASE2
from cellfree.rates import normalize_weights


@pytest.fixture(scope="module")
def cfg():
    return SystemConfig(M=6, N=2, K=3, tau=2, D=400.0, alpha1=5, alpha2=5)


@pytest.mark.parametrize("case_id", [CASE1, CASE2])
def test_closed_forms_track_samples(cfg, case_id):
    res = oracle_case(case_id, cfg, trials=20_000, seed=9)
    errs = res.relative_errors()
    for name in ("ds2", "bu", "iui", "tn", "tqe"):
        assert np.max(errs[name]) < 0.06, (name, errs[name])
    assert res.max_correlation() < 5 / math.sqrt(res.trials)


def test_case1_sub_terms(cfg):
    res = oracle_case(CASE1, cfg, trials=20_000, seed=2)
    errs = res.relative_errors()
    for name in ("tqe_y", "tqe_g", "tqe_gy"):
        assert np.max(errs[name]) < 0.06, name


def test_weighted_combining_oracle(cfg):
    u = normalize_weights(np.random.default_rng(5).uniform(0.1, 1.0, (cfg.M, cfg.K)))
    res = oracle_case(CASE2, cfg, trials=20_000, seed=4, u=u, q=np.array([1.0, 0.4, 0.7]))
    assert np.max(res.relative_errors()["denominator"]) < 0.03


def test_unquantized_has_no_quantization_error(cfg):
    res = oracle_case(CASE2, cfg.replace(alpha2=math.inf), trials=2_000, seed=1)
    np.testing.assert_array_equal(res.closed.tqe, 0.0)
    assert np.all(res.empirical.tqe < 1e-20)


def test_oracle_is_reproducible(cfg):
    a = oracle_case(CASE2, cfg, trials=500, seed=3, chunk=200)
    b = oracle_case(CASE2, cfg, trials=500, seed=3, chunk=200)
    np.testing.assert_array_equal(a.empirical.bu, b.empirical.bu)


def test_rejects_bad_arguments(cfg):
    with pytest.raises(ValueError):
        oracle_case(CASE2, cfg, trials=0, seed=0)
    with pytest.raises(ValueError):
        oracle_case("case9", cfg, trials=10, seed=0)
