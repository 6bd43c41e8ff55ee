import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from kkgeom.algebroid import AlgebroidData
from kkgeom.exprlang import eval_field, parse
from kkgeom.metric import MetricStructure
from kkgeom.nlconnection import NonlinearConnection

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def field(src, m=2, **kw):
    return eval_field(parse(src, m, **kw), m)


def make_d1():
    """Desk scenario: identity anchor, zero bracket, Gamma=(x2*y0, 0),
    g = diag(1+x1^2, 1), g00 = exp(2*x1)."""
    A = AlgebroidData.identity(2)
    N = NonlinearConnection(2, (field("x2*y0"), field("0")))
    G = MetricStructure(2, ((field("1+x1^2"), field("0")),
                            (field("0"), field("1"))), field("exp(2*x1)"))
    return A, N, G


def make_nonabelian():
    """Anchor diag(1, e^{x1}) with bracket coefficient L^2_{12}=1 (the frame
    fields are d/dx1 and e^{x1} d/dx2, whose commutator is the second frame
    field); same metric and Gamma as the d1 scenario."""
    A = AlgebroidData(2, 2,
                      ((field("1"), field("0")),
                       (field("0"), field("exp(x1)"))),
                      (((field("0"), field("0")), (field("0"), field("0"))),
                       ((field("0"), field("1")), (field("-1"), field("0")))))
    N = NonlinearConnection(2, (field("x2*y0"), field("0")))
    G = MetricStructure(2, ((field("1+x1^2"), field("0")),
                            (field("0"), field("1"))), field("exp(2*x1)"))
    return A, N, G


def make_vdep():
    """Fiber-dependent metric over the nonabelian frame: every torsion and
    curvature family is nonzero here."""
    A, N, _ = make_nonabelian()
    N = NonlinearConnection(2, (field("x2*y0 + 0.3*sin(x1)*y0^2"),
                                field("0.2*x1*y0")))
    G = MetricStructure(2,
                        ((field("1+x1^2+0.5*y0^2"), field("0")),
                         (field("0"), field("1"))),
                        field("exp(2*x1)*(1+0.25*y0^2)"))
    return A, N, G


def make_sphere():
    """Constant-curvature surface block: g = diag(1, sin(x1)^2), flat fiber."""
    A = AlgebroidData.identity(2)
    N = NonlinearConnection.zero(2, 2)
    G = MetricStructure(2, ((field("1"), field("0")),
                            (field("0"), field("sin(x1)^2"))), field("1"))
    return A, N, G


@pytest.fixture(scope="session")
def d1():
    return make_d1()


@pytest.fixture(scope="session")
def nonabelian():
    return make_nonabelian()


@pytest.fixture(scope="session")
def vdep():
    return make_vdep()


@pytest.fixture(scope="session")
def sphere():
    return make_sphere()
