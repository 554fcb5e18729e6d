import pytest

from squidcoupler.coupler import QubitPair
from squidcoupler.squid import SquidParams


@pytest.fixture(scope="session")
def params() -> SquidParams:
    return SquidParams(L_pH=200.0, C_fF=5.0, I0_uA=0.48)


@pytest.fixture(scope="session")
def qp() -> QubitPair:
    return QubitPair(
        Iq1_uA=0.46,
        Iq2_uA=0.46,
        delta1_GHz=5.0,
        delta2_GHz=3.0,
        eps1_GHz=8.06,
        eps2_GHz=2.03,
        Mqs_pH=33.0,
        Mqq_pH=0.25,
    )
