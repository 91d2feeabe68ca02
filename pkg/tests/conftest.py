import pytest

from hidmom.operators import ElementTable
from hidmom.units import HARD_NMAX


@pytest.fixture(scope="session")
def table():
    """Shared element memo; values never depend on call order."""
    return ElementTable(n_cap=HARD_NMAX)
