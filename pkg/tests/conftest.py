import pytest

from neuropellet.params import SystemParams

TAU, R, ALPHA, T_C = 0.1, 7e19, 1e19, 0.01


@pytest.fixture
def fast() -> SystemParams:
    return SystemParams(tau=TAU, r=R, alpha=ALPHA, t_c=T_C, delta=1.0)


@pytest.fixture
def slow() -> SystemParams:
    return SystemParams(tau=TAU, r=R, alpha=ALPHA, t_c=T_C, delta=1e16)
