import pytest

from kkgeom.algebroid import AlgebroidData
from kkgeom.calculus import EPoint, partial, primal
from kkgeom.dconnection import (
    DConnectionCoeffs,
    DTensorField,
    berwald,
    check_dconnection_transformation,
    h_cov_deriv,
    tensor_product,
    v_cov_deriv,
)
from kkgeom.nlconnection import CoordinateChange, NonlinearConnection
from kkgeom.calculus import SmoothField
from kkgeom.sampling import Box, sample_points
from conftest import field

PTS = sample_points(Box.default(2), 16, seed=0xA1B2)
A_ID = AlgebroidData.identity(2)


def test_berwald_linear_gamma():
    N = NonlinearConnection(2, (field("0.7*y0"), field("-0.3*y0")))
    D = berwald(N, 2)
    for pt in PTS[:4]:
        hv = [primal(v) for v in D.hv_at(pt.x, pt.y)]
        assert hv == pytest.approx([0.7, -0.3])
        hh = D.hh_at(pt.x, pt.y)
        assert all(primal(hh[a][b][c]) == 0.0
                   for a in range(2) for b in range(2) for c in range(2))
        assert primal(D.vv_at(pt.x, pt.y)) == 0.0


def test_berwald_zero_gamma():
    D = berwald(NonlinearConnection.zero(2, 2), 2)
    pt = PTS[0]
    assert [primal(v) for v in D.hv_at(pt.x, pt.y)] == [0.0, 0.0]


def test_berwald_quadratic_gamma():
    N = NonlinearConnection(2, (field("x2*y0^2"), field("0")))
    D = berwald(N, 2)
    pt = EPoint((0.5, 0.8), 3.0)
    hv = [primal(v) for v in D.hv_at(pt.x, pt.y)]
    assert hv[0] == pytest.approx(2 * 0.8 * 3.0)  # d(x2 y0^2)/dy0 = 2 x2 y0
    assert hv[1] == 0.0


def test_scalar_h_cov_deriv_is_h_derivative():
    from kkgeom.nlconnection import h_derivative
    N = NonlinearConnection(2, (field("x2*y0"), field("0")))
    D = DConnectionCoeffs.zero(2, 2)
    f = field("sin(x1)*y0")
    T = DTensorField.scalar(2, 2, f)
    Td = h_cov_deriv(T, A_ID, N, D)
    for pt in PTS[:6]:
        vals = Td.values_at(pt.x, pt.y)
        for g in range(2):
            assert primal(vals[g]) == pytest.approx(
                h_derivative(f, g, A_ID, N, pt), abs=1e-14)


def test_vector_h_cov_deriv_correction_term():
    # constant vector e1, flat frame, only hh[0][0][0] = c nonzero
    N = NonlinearConnection.zero(2, 2)
    c = 0.37
    hh = [[[field("0.37") if (a, b, g) == (0, 0, 0) else field("0")
            for g in range(2)] for b in range(2)] for a in range(2)]
    D = DConnectionCoeffs.from_fields(
        2, 2, hh, [field("0")] * 2,
        [[field("0")] * 2 for _ in range(2)], field("0"))
    T = DTensorField.from_fields(2, 2, 1, 0, [field("1"), field("0")])
    Td = h_cov_deriv(T, A_ID, N, D)
    pt = PTS[0]
    vals = Td.values_at(pt.x, pt.y)
    assert primal(vals[0][0]) == pytest.approx(c)
    assert primal(vals[1][0]) == 0.0
    assert primal(vals[0][1]) == 0.0


def test_flat_reduction_both_derivatives():
    # everything zero: covariant derivatives are plain partials
    N = NonlinearConnection.zero(2, 2)
    D = DConnectionCoeffs.zero(2, 2)
    comp = [[field("sin(x1)*x2"), field("y0^2")],
            [field("exp(0.3*x1)"), field("x2*y0")]]
    T = DTensorField.from_fields(2, 2, 1, 1, comp)
    Th = h_cov_deriv(T, A_ID, N, D)
    Tv = v_cov_deriv(T, A_ID, D)
    for pt in PTS[:5]:
        vh = Th.values_at(pt.x, pt.y)
        vv = Tv.values_at(pt.x, pt.y)
        for a in range(2):
            for b in range(2):
                for g in range(2):
                    assert abs(primal(vh[a][b][g])
                               - partial(comp[a][b], pt, g + 1)) <= 1e-12
                assert abs(primal(vv[a][b])
                           - partial(comp[a][b], pt, "v")) <= 1e-12


def test_v_cov_deriv_two_covariant_vertical_slots():
    # g00 = exp(2 y0) with vv = 1: the two covariant vertical slots cancel
    # the plain derivative exactly
    N = NonlinearConnection.zero(2, 2)
    D = DConnectionCoeffs.from_fields(
        2, 2,
        [[[field("0")] * 2 for _ in range(2)] for _ in range(2)],
        [field("0")] * 2, [[field("0")] * 2 for _ in range(2)], field("1"))
    T = DTensorField.scalar(2, 2, field("exp(2*y0)"), rv=0, sv=2)
    Tv = v_cov_deriv(T, A_ID, D)
    for pt in PTS[:5]:
        assert abs(primal(Tv.values_at(pt.x, pt.y))) <= 1e-12


def test_scalar_v_cov_deriv_is_fiber_partial():
    D = DConnectionCoeffs.zero(2, 2)
    f = field("x1*y0^3")
    T = DTensorField.scalar(2, 2, f)
    Tv = v_cov_deriv(T, A_ID, D)
    pt = EPoint((0.4, 0.1), 0.7)
    assert primal(Tv.values_at(pt.x, pt.y)) == pytest.approx(
        partial(f, pt, "v"), abs=1e-14)


def _generic_connection():
    hh = [[[field("0.2*sin(x1)+0.1*x2*y0") if (a + b + c) % 2 == 0
            else field("0.1*cos(x2)+0.05*y0")
            for c in range(2)] for b in range(2)] for a in range(2)]
    hv = [field("0.4*x1*y0"), field("0.3*cos(x2)")]
    vh = [[field("0.2*sin(x2)+0.1*y0"), field("0.15*x1")],
          [field("0.25*y0"), field("0.1*exp(0.2*x1)")]]
    vv = field("0.3*x1+0.2*y0")
    return DConnectionCoeffs.from_fields(2, 2, hh, hv, vh, vv)


def test_leibniz_rule_for_tensor_product():
    N = NonlinearConnection(2, (field("x2*y0"), field("0.1*x1*y0")))
    D = _generic_connection()
    S = DTensorField.from_fields(2, 2, 1, 0, [field("x2"), field("sin(x1)")],
                                 rv=0, sv=1)
    T = DTensorField.from_fields(2, 2, 0, 1, [field("y0"), field("x1*x2")],
                                 rv=1, sv=0)
    ST = tensor_product(S, T)

    for deriv, extra_axis in ((lambda X: h_cov_deriv(X, A_ID, N, D), True),
                              (lambda X: v_cov_deriv(X, A_ID, D), False)):
        dS, dT, dST = deriv(S), deriv(T), deriv(ST)
        for pt in PTS[:5]:
            s = S.values_at(pt.x, pt.y)
            t = T.values_at(pt.x, pt.y)
            ds = dS.values_at(pt.x, pt.y)
            dt = dT.values_at(pt.x, pt.y)
            dst = dST.values_at(pt.x, pt.y)
            for a in range(2):
                for b in range(2):
                    if extra_axis:
                        for g in range(2):
                            lhs = primal(dst[a][b][g])
                            rhs = primal(ds[a][g]) * primal(t[b]) \
                                + primal(s[a]) * primal(dt[b][g])
                            assert abs(lhs - rhs) <= 1e-9
                    else:
                        lhs = primal(dst[a][b])
                        rhs = primal(ds[a]) * primal(t[b]) \
                            + primal(s[a]) * primal(dt[b])
                        assert abs(lhs - rhs) <= 1e-9


def test_transformation_identity():
    N = NonlinearConnection(2, (field("x2*y0"), field("0")))
    D = _generic_connection()
    C = CoordinateChange(2, 2)
    res = check_dconnection_transformation(D, D, C, A_ID, N, PTS[:8])
    assert res.max_residual == 0.0


def test_transformation_constant_frame():
    # constant frame change: no derivative terms; primed coefficients are the
    # sandwich products
    N = NonlinearConnection(2, (field("x2*y0"), field("0")))
    D = _generic_connection()
    lam = [[2.0, 1.0], [1.0, 1.0]]
    lam_inv = [[1.0, -1.0], [-1.0, 2.0]]
    p = 2

    def hh_p(xs, y):
        hh = D.hh_at(xs, y)
        return [[[sum(lam[ap][a] * hh[a][b][g] * lam_inv[b][bp] * lam_inv[g][gp]
                      for a in range(p) for b in range(p) for g in range(p))
                  for gp in range(p)] for bp in range(p)] for ap in range(p)]

    def hv_p(xs, y):
        hv = D.hv_at(xs, y)
        return [sum(hv[g] * lam_inv[g][gp] for g in range(p))
                for gp in range(p)]

    def vh_p(xs, y):
        vh = D.vh_at(xs, y)
        return [[sum(lam[ap][a] * vh[a][b] * lam_inv[b][bp]
                     for a in range(p) for b in range(p))
                 for bp in range(p)] for ap in range(p)]

    D_p = DConnectionCoeffs(2, 2, hh_p, hv_p, vh_p, D.vv_at)
    C = CoordinateChange(
        2, 2,
        frame=tuple(tuple(SmoothField.constant(v, 2) for v in row)
                    for row in lam),
        frame_inverse=tuple(tuple(SmoothField.constant(v, 2) for v in row)
                            for row in lam_inv))
    res = check_dconnection_transformation(D, D_p, C, A_ID, N, PTS[:8])
    assert res.max_residual <= 1e-12


def test_transformation_fiber_scaling():
    N = NonlinearConnection(2, (field("x2*y0"), field("0")))
    D = _generic_connection()
    k = 2.0

    def sub(fn):
        return lambda xs, y: fn(xs, y / k)

    def scale_list(fn, factor):
        def out(xs, y):
            def walk(node):
                if isinstance(node, list):
                    return [walk(v) for v in node]
                return node * factor
            return walk(fn(xs, y / k))
        return out

    D_p = DConnectionCoeffs(
        2, 2,
        sub(D.hh_at),                  # hh unchanged under fiber scaling
        sub(D.hv_at),                  # hv unchanged (constant phi)
        scale_list(D.vh_at, 1.0 / k),  # vh picks up 1/phi
        lambda xs, y: D.vv_at(xs, y / k) * (1.0 / k),
    )
    C = CoordinateChange(2, 2, fiber_scale=SmoothField.constant(k, 2))
    res = check_dconnection_transformation(D, D_p, C, A_ID, N, PTS[:8])
    assert res.max_residual <= 1e-12
