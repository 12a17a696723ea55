import pytest

from endmodels import builders as B
from endmodels import graph as G
from endmodels.model import THICK, Block, Link, ModelEnd, SplitSurfaceSpec


def build(family, **params):
    return B.build(B.FamilyParams(family, params))


def graph(family, **params):
    return G.discretize(build(family, **params))


def two_level(weight, product=()):
    """Two single-component levels joined by one link of ``weight``."""
    s0 = SplitSurfaceSpec(0, {"P": 3})
    s1 = SplitSurfaceSpec(1, {"P": 3})
    block = Block(0, THICK, s0, s1, links=(Link(("bottom", "P"), ("top", "P"), weight),), product=product)
    return ModelEnd((block,))


@pytest.fixture(scope="session")
def split_small():
    return build("split", **B.split_geometric(4))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance")
        for line in LINES:
            terminalreporter.write_line(line)
