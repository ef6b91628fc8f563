import pytest

from delpezzo.cli import load_fixture
from delpezzo.dp4 import dp4_lines
from delpezzo.lines import find_lines


@pytest.fixture(scope="session")
def surfaces():
    names = ("eq1", "eq2", "eq3_alpha", "eq3_alpha1", "dp4_f2", "dp4_f3")
    return {name: load_fixture(name) for name in names}


@pytest.fixture(scope="session")
def configs(surfaces):
    out = {}
    for name, S in surfaces.items():
        out[name] = dp4_lines(S) if name.startswith("dp4") else find_lines(S)
    return out
