"""Named check suites over a scenario: validators and identity batteries.

The transformation suite is the only non-obvious construction here: it
builds the primed-chart data independently (transforming the anchor,
bracket, nonlinear-connection and metric tables, then *reconstructing* the
metric connection in the primed chart) and only then measures the residual
of the coefficient change laws, so the law is tested, not restated.
"""

from __future__ import annotations

from .algebroid import (
    AlgebroidData,
    validate_anchor_compatibility,
    validate_antisymmetry,
    validate_jacobi,
)
from .calculus import EvaluationDomainError, SmoothField, primal
from .curvature import (
    check_bianchi,
    check_ricci_commutation,
    default_test_vector,
    oracle_suite,
)
from .dconnection import (
    DConnectionCoeffs,
    DVectorField,
    berwald,
    check_dconnection_transformation,
)
from .lift import local_invertibility_residual
from .metric import MetricStructure, matrix_inverse, metric_dconnection, \
    riemannian_flags
from .nlconnection import (
    CoordinateChange,
    NonlinearConnection,
    check_nlc_transformation,
)
from .report import CheckResult, ResidualTracker
from .sampling import sample_points
from .scenario import Scenario, ScenarioError

__all__ = ["SUITE_NAMES", "SUITE_DEFAULT_SAMPLES", "SUITE_DEFAULT_TOLS",
           "run_validate", "run_suite", "applicable_suites"]

SUITE_NAMES = ["oracle", "ricci-commutation", "bianchi", "compatibility",
               "transformation"]

SUITE_DEFAULT_SAMPLES = {
    "oracle": 20,
    "ricci-commutation": 20,
    "bianchi": 6,
    "compatibility": 40,
    "transformation": 25,
}

SUITE_DEFAULT_TOLS = {
    "oracle": 1e-8,
    "ricci-commutation": 1e-6,
    "bianchi": 1e-5,
    "compatibility": 1e-9,
    "transformation": 1e-8,
}


def _det(mat):
    n = len(mat)
    a = [[float(v) for v in row] for row in mat]
    det = 1.0
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot_row][col] == 0.0:
            return 0.0
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
    return det


def run_validate(sc: Scenario, samples=None, seed=None, tol: float = 1e-8):
    """Structure validators plus metric and lift-morphism sanity checks.
    Returns a list of JSON-ready check dicts."""
    n = samples if samples is not None else sc.samples
    pts = sample_points(sc.box, n, seed if seed is not None else sc.seed)
    checks = []
    for res in (
        validate_antisymmetry(sc.algebroid, pts, tol),
        validate_anchor_compatibility(sc.algebroid, pts, tol),
        validate_jacobi(sc.algebroid, pts, tol),
    ):
        checks.append(res.to_json_obj())
    if sc.metric is not None:
        sym = ResidualTracker("g_symmetry", tol)
        min_det = float("inf")
        min_g00 = float("inf")
        for pt in pts:
            g = [[primal(v) for v in row] for row in sc.metric.g_at(pt.x, pt.y)]
            for a in range(sc.p):
                for b in range(sc.p):
                    sym.update(g[a][b] - g[b][a], pt)
            min_det = min(min_det, abs(_det(g)))
            min_g00 = min(min_g00, abs(primal(sc.metric.g00_at(pt.x, pt.y))))
        checks.append(sym.result().to_json_obj())
        checks.append({
            "name": "metric_nondegeneracy",
            "min_abs_det_g": min_det,
            "min_abs_g00": min_g00,
            "passed": min_det > 1e-12 and min_g00 > 1e-12,
        })
        h_flag, v_flag = riemannian_flags(sc.metric, pts)
        checks.append({
            "name": "riemannian_flags",
            "h_independent_of_y0": h_flag,
            "v_independent_of_y0": v_flag,
            "passed": True,  # informational: fiber dependence is allowed
        })
    if sc.lift is not None and sc.lift.morphism.gtilde is not None:
        worst = local_invertibility_residual(sc.lift.morphism, pts)
        checks.append({
            "name": "lift_local_invertibility",
            "max_residual": worst,
            "tol": tol,
            "passed": worst <= tol,
        })
    return checks


def applicable_suites(sc: Scenario):
    names = ["oracle", "ricci-commutation", "bianchi"]
    if sc.metric is not None:
        names += ["compatibility", "transformation"]
    return names


def _constant_matrix_fields(mat, m):
    return tuple(tuple(SmoothField.constant(v, m) for v in row) for row in mat)


def _frame_change_checks(sc: Scenario, pts, tol) -> list:
    """Constant invertible frame change; primed data built tensorially and
    the primed metric connection rebuilt from it."""
    p, m = sc.p, sc.m
    lam = [[1.0 if a == b else 0.0 for b in range(p)] for a in range(p)]
    if p == 1:
        lam[0][0] = 2.0
    else:
        lam[0][1] = 1.0  # unitriangular, det 1
    lam_inv = matrix_inverse(lam)

    A, N, G = sc.algebroid, sc.connection, sc.metric
    rho_p = tuple(
        tuple(
            SmoothField(
                lambda xs, y, _ap=ap, _i=i: sum(
                    lam_inv[a][_ap] * A.rho[a][_i](xs, y) for a in range(p)),
                m)
            for i in range(m)
        )
        for ap in range(p)
    )
    L_p = tuple(
        tuple(
            tuple(
                SmoothField(
                    lambda xs, y, _gp=gp, _ap=ap, _bp=bp: sum(
                        lam[_gp][g] * A.L[g][a][b](xs, y)
                        * lam_inv[a][_ap] * lam_inv[b][_bp]
                        for g in range(p) for a in range(p) for b in range(p)),
                    m)
                for bp in range(p)
            )
            for ap in range(p)
        )
        for gp in range(p)
    )
    A_p = AlgebroidData(m, p, rho_p, L_p)
    gamma_p = tuple(
        SmoothField(
            lambda xs, y, _gp=gp: sum(
                N.gamma[g](xs, y) * lam_inv[g][_gp] for g in range(p)),
            m)
        for gp in range(p)
    )
    N_p = NonlinearConnection(p, gamma_p)
    g_p = tuple(
        tuple(
            SmoothField(
                lambda xs, y, _ap=ap, _bp=bp: sum(
                    G.g[a][b](xs, y) * lam_inv[a][_ap] * lam_inv[b][_bp]
                    for a in range(p) for b in range(p)),
                m)
            for bp in range(p)
        )
        for ap in range(p)
    )
    G_p = MetricStructure(p, g_p, G.g00)
    base = (berwald(N, m) if sc.baseline == "berwald"
            else DConnectionCoeffs.zero(p, m))
    base_p = (berwald(N_p, m) if sc.baseline == "berwald"
              else DConnectionCoeffs.zero(p, m))
    D = metric_dconnection(G, base, A, N)
    D_p = metric_dconnection(G_p, base_p, A_p, N_p)
    C = CoordinateChange(
        m, p,
        frame=_constant_matrix_fields(lam, m),
        frame_inverse=_constant_matrix_fields(lam_inv, m),
    )
    r1 = check_nlc_transformation(N, N_p, C, A, pts, tol)
    r1.name = "transformation.nlc_frame"
    r2 = check_dconnection_transformation(D, D_p, C, A, N, pts, tol)
    r2.name = "transformation.dconnection_frame"
    return [r1, r2]


def _fiber_scaling_checks(sc: Scenario, pts, tol, factor: float = 2.0) -> list:
    """Fiber rescale y0' = factor * y0; primed component functions are the
    substituted originals and the primed metric connection is rebuilt."""
    p, m = sc.p, sc.m
    A, N, G = sc.algebroid, sc.connection, sc.metric
    inv = 1.0 / factor
    gamma_p = tuple(
        SmoothField(lambda xs, y, _g=g: factor * N.gamma[_g](xs, y * inv), m)
        for g in range(p)
    )
    N_p = NonlinearConnection(p, gamma_p)
    g_p = tuple(
        tuple(
            SmoothField(lambda xs, y, _a=a, _b=b: G.g[_a][_b](xs, y * inv), m)
            for b in range(p)
        )
        for a in range(p)
    )
    g00_p = SmoothField(lambda xs, y: G.g00(xs, y * inv) * inv * inv, m)
    G_p = MetricStructure(p, g_p, g00_p)
    base = (berwald(N, m) if sc.baseline == "berwald"
            else DConnectionCoeffs.zero(p, m))
    base_p = (berwald(N_p, m) if sc.baseline == "berwald"
              else DConnectionCoeffs.zero(p, m))
    D = metric_dconnection(G, base, A, N)
    D_p = metric_dconnection(G_p, base_p, A, N_p)
    C = CoordinateChange(m, p, fiber_scale=SmoothField.constant(factor, m))
    r1 = check_nlc_transformation(N, N_p, C, A, pts, tol)
    r1.name = "transformation.nlc_fiber"
    r2 = check_dconnection_transformation(D, D_p, C, A, N, pts, tol)
    r2.name = "transformation.dconnection_fiber"
    return [r1, r2]


def run_suite(sc: Scenario, suite: str, tol=None, samples=None, seed=None):
    """Run one named suite; returns a list of CheckResult."""
    if suite not in SUITE_NAMES:
        raise ScenarioError("suite", f"unknown suite {suite!r}")
    n = samples if samples is not None else SUITE_DEFAULT_SAMPLES[suite]
    used_tol = tol if tol is not None else SUITE_DEFAULT_TOLS[suite]
    pts = sample_points(sc.box, n, seed if seed is not None else sc.seed)
    A, N = sc.algebroid, sc.connection

    if suite == "oracle":
        return oracle_suite(sc.dconnection(), N, A, pts, used_tol)

    if suite == "ricci-commutation":
        D = sc.dconnection()
        Z1 = default_test_vector(sc.p, sc.m)
        Z2 = DVectorField(sc.p,
                          lambda xs, y: [1.0] + [0.0] * (sc.p - 1),
                          lambda xs, y: 1.0)
        r1 = check_ricci_commutation(Z1, D, N, A, pts, used_tol)
        r1.name = "ricci_commutation_1"
        r2 = check_ricci_commutation(Z2, D, N, A, pts, used_tol)
        r2.name = "ricci_commutation_2"
        return [r1, r2]

    if suite == "bianchi":
        return check_bianchi(sc.dconnection(), N, A, pts, used_tol)

    if suite == "compatibility":
        if sc.metric is None:
            raise ScenarioError("metric",
                                "compatibility suite requires a metric")
        from .metric import compatibility_check
        return [compatibility_check(sc.metric, sc.dconnection(), A, N, pts,
                                    used_tol)]

    if suite == "transformation":
        if sc.metric is None:
            raise ScenarioError(
                "metric", "transformation suite requires a metric (the primed "
                "connection is rebuilt from the transformed metric)")
        return (_frame_change_checks(sc, pts, used_tol)
                + _fiber_scaling_checks(sc, pts, used_tol))

    raise AssertionError(suite)
