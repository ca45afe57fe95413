import pytest

from adiabatic_energy import GateCfg
from trace_lab import family_cfg, gen_trace_set

TEST_KEY = 0x0123456789ABCDEF0123


@pytest.fixture(scope="session")
def cmos_cfg():
    return family_cfg("cmos")


@pytest.fixture(scope="session")
def adiabatic_cfg():
    return family_cfg("adiabatic-mtj")


@pytest.fixture(scope="session")
def balanced_cfg():
    """Adiabatic family without residual imbalance"""
    return family_cfg("adiabatic-mtj", gate=GateCfg(residual_imbalance_epsilon=0.0))


@pytest.fixture(scope="session")
def cmos_traces(cmos_cfg):
    return gen_trace_set(512, TEST_KEY, cmos_cfg, seed=11)


@pytest.fixture(scope="session")
def adiabatic_traces(adiabatic_cfg):
    return gen_trace_set(2000, TEST_KEY, adiabatic_cfg, seed=11)
