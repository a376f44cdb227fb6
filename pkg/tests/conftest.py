import numpy as np
import pytest

from cellfree import SystemConfig, estimation_stats, large_scale, make_pilots, drop_topology

_CRITERIA = []


def record_criterion(number, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    _CRITERIA.append(line)
    print(line)
    return passed


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def small_config():
    return SystemConfig(M=8, N=2, K=4, tau=2, alpha2=5, D=500.0, pilot_mode="random")


def make_instance(config, seed):
    top = drop_topology(config, seed)
    beta = large_scale(top, config.sigma_sh, seed, config.path_loss)
    pilots = make_pilots(config.K, config.tau, config.pilot_mode, seed)
    gamma = estimation_stats(beta, pilots, config.p_p, config.tau).gamma
    return beta, pilots, gamma


@pytest.fixture
def instance(small_config):
    return make_instance(small_config, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
