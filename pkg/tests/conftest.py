import sys
from fractions import Fraction
from pathlib import Path

import pytest

from pricegame import Buyer, Market, SetFunction, load_instance

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

sys.path.insert(0, str(Path(__file__).resolve().parent))


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture
def load(request):
    def _load(name):
        return load_instance(fixture_path(name))
    return _load


def harmonic_market(m: int, shift: Fraction = Fraction(0)) -> Market:
    """One item, m additive buyers valuing it 1+shift, 1/2, ..., 1/m."""
    buyers = [Buyer(SetFunction.additive([1 + shift]), "additive")]
    for j in range(2, m + 1):
        buyers.append(Buyer(SetFunction.additive([Fraction(1, j)]), "additive"))
    return Market(1, (0,), "unlimited", tuple(buyers))
