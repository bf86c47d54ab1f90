import pytest
from hypothesis import HealthCheck, settings

from mmpert.core import MarketEnv
from mmpert.price_models import PriceModel

from refdata import A_OU, MU

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

@pytest.fixture
def env():
    return MarketEnv()

@pytest.fixture
def ou():
    return PriceModel.ou(0.5, A_OU, MU)

@pytest.fixture
def bm():
    return PriceModel.martingale(0.5)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.VERDICTS, key=lambda s: int(s[3:s.index("]")])):
        terminalreporter.write_line(line)
