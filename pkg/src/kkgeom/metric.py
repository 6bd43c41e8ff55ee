"""(Pseudo)metric structures on the split bundle and compatible connections.

The metric is a symmetric horizontal block g[alpha][beta](x, y0) plus one
vertical coefficient g00(x, y0); both must be nondegenerate on the sampling
box.  ``metric_dconnection`` builds, from any baseline coefficient set, a
connection whose covariant derivatives annihilate the metric; with the
fiber-derivative (Berwald-type) baseline this is the canonical connection.

Matrix inversion is a plain Gauss-Jordan written to run on Jet entries, so
the constructed coefficients can be differentiated again (curvature needs
first derivatives of the inverse metric, the cyclic identity suites need
second).
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebroid import AlgebroidData
from .calculus import (
    EPoint,
    EvaluationDomainError,
    SmoothField,
    jdy,
    jval,
    primal,
    seeded_point,
)
from .dconnection import (
    DConnectionCoeffs,
    DTensorField,
    berwald,
    h_cov_deriv,
    v_cov_deriv,
)
from .nlconnection import NonlinearConnection, adapted_derivatives
from .report import CheckResult, ResidualTracker

__all__ = [
    "MetricStructure",
    "SingularMetricError",
    "matrix_inverse",
    "inverse_h",
    "metric_dconnection",
    "canonical_metric_dconnection",
    "compatibility_check",
    "riemannian_flags",
]


class SingularMetricError(EvaluationDomainError):
    """Metric block not invertible at a point; carries a condition estimate."""

    def __init__(self, message, point=None, condition=None):
        super().__init__(message, point=point)
        self.condition = condition


@dataclass(frozen=True)
class MetricStructure:
    """Horizontal block g (p x p SmoothFields, symmetric) and vertical g00."""

    p: int
    g: tuple       # g[alpha][beta] SmoothFields
    g00: SmoothField

    def __post_init__(self):
        if len(self.g) != self.p or any(len(row) != self.p for row in self.g):
            raise ValueError(f"g table must be {self.p}x{self.p}")

    def g_at(self, xs, y):
        return [[self.g[a][b](xs, y) for b in range(self.p)]
                for a in range(self.p)]

    def g00_at(self, xs, y):
        return self.g00(xs, y)

    @staticmethod
    def flat(p: int, m: int) -> "MetricStructure":
        one = SmoothField.constant(1.0, m)
        zero = SmoothField.constant(0.0, m)
        g = tuple(tuple(one if a == b else zero for b in range(p))
                  for a in range(p))
        return MetricStructure(p, g, one)


def _norm1(mat):
    return max(sum(abs(primal(mat[a][b])) for a in range(len(mat)))
               for b in range(len(mat)))


def matrix_inverse(mat, point=None):
    """Gauss-Jordan with partial pivoting; entries may be floats or Jets.
    Pivot selection uses the underlying float values."""
    n = len(mat)
    aug = [list(row) + [1.0 if i == j else 0.0 for j in range(n)]
           for i, row in enumerate(mat)]
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(primal(aug[r][col])))
        pivot = aug[pivot_row][col]
        if abs(primal(pivot)) < 1e-300:
            raise SingularMetricError(
                f"singular matrix (pivot {primal(pivot):.3e} in column {col})",
                point=point,
            )
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        pivot = aug[col][col]
        aug[col] = [v / pivot for v in aug[col]]
        for r in range(n):
            if r != col:
                factor = aug[r][col]
                if primal(factor) != 0.0:
                    aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def inverse_h(G: MetricStructure, pt: EPoint, residual_tol: float = 1e-12):
    """Pointwise inverse of the horizontal block, self-checked by
    multiplying back; raises SingularMetricError with a condition estimate."""
    g = [[primal(v) for v in row] for row in G.g_at(pt.x, pt.y)]
    try:
        ginv = matrix_inverse(g, point=pt)
    except SingularMetricError as exc:
        exc.condition = float("inf")
        raise
    p = G.p
    worst = 0.0
    for a in range(p):
        for b in range(p):
            acc = sum(g[a][c] * ginv[c][b] for c in range(p))
            worst = max(worst, abs(acc - (1.0 if a == b else 0.0)))
    cond = _norm1(g) * _norm1(ginv)
    if worst > residual_tol * max(1.0, cond):
        raise SingularMetricError(
            f"ill-conditioned metric block (residual {worst:.3e})",
            point=pt, condition=cond,
        )
    return ginv


def metric_dconnection(G: MetricStructure, baseline: DConnectionCoeffs,
                       A: AlgebroidData, N: NonlinearConnection) -> DConnectionCoeffs:
    """Metric-compatible coefficients built over a baseline (ring) set.

    hh is the Koszul-type combination of adapted derivatives of g and the
    bracket table; hv and vh correct the baseline by half the baseline
    covariant derivative of the metric blocks; vv is half the logarithmic
    fiber derivative of g00.
    """
    p = G.p
    m = A.m

    def hh_at(xs, y):
        g_vals, g_delta, _ = adapted_derivatives(
            lambda jxs, jy: G.g_at(jxs, jy), xs, y, A, N)
        ginv = matrix_inverse(g_vals)
        Lv = A.L_at(xs)
        out = [[[None] * p for _ in range(p)] for _ in range(p)]
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    acc = 0.0
                    for e in range(p):
                        term = g_delta[c][e][b] + g_delta[b][e][c] - g_delta[e][b][c]
                        term = term + sum(
                            g_vals[th][e] * Lv[th][c][b]
                            - g_vals[b][th] * Lv[th][c][e]
                            - g_vals[th][c] * Lv[th][b][e]
                            for th in range(p)
                        )
                        acc = acc + ginv[a][e] * term
                    out[a][b][c] = 0.5 * acc
        return out

    def hv_at(xs, y):
        vals, delta, _ = adapted_derivatives(
            lambda jxs, jy: [G.g00_at(jxs, jy)], xs, y, A, N)
        g00 = vals[0]
        if primal(g00) == 0.0:
            raise SingularMetricError("g00 vanishes", point=EPoint(tuple(map(primal, xs)), primal(y)))
        hv0 = baseline.hv_at(xs, y)
        return [
            hv0[c] + 0.5 * (delta[c][0] - 2.0 * hv0[c] * g00) / g00
            for c in range(p)
        ]

    def vh_at(xs, y):
        jxs, jy = seeded_point(xs, y)
        gj = G.g_at(jxs, jy)
        g_vals = [[jval(v) for v in row] for row in gj]
        g_dy = [[jdy(v) for v in row] for row in gj]
        ginv = matrix_inverse(g_vals)
        vh0 = baseline.vh_at(xs, y)
        out = [[None] * p for _ in range(p)]
        for a in range(p):
            for b in range(p):
                acc = 0.0
                for e in range(p):
                    ring = g_dy[b][e] - sum(
                        vh0[th][b] * g_vals[th][e] + vh0[th][e] * g_vals[b][th]
                        for th in range(p)
                    )
                    acc = acc + ginv[a][e] * ring
                out[a][b] = vh0[a][b] + 0.5 * acc
        return out

    def vv_at(xs, y):
        jxs, jy = seeded_point(xs, y)
        g00j = G.g00_at(jxs, jy)
        g00 = jval(g00j)
        if primal(g00) == 0.0:
            raise SingularMetricError("g00 vanishes", point=EPoint(tuple(map(primal, xs)), primal(y)))
        return 0.5 * jdy(g00j) / g00

    return DConnectionCoeffs(p, m, hh_at, hv_at, vh_at, vv_at)


def canonical_metric_dconnection(G: MetricStructure, A: AlgebroidData,
                                 N: NonlinearConnection) -> DConnectionCoeffs:
    """Metric connection over the fiber-derivative (Berwald-type) baseline."""
    return metric_dconnection(G, berwald(N, A.m), A, N)


def _metric_tensors(G: MetricStructure, m: int):
    g_T = DTensorField(G.p, m, 0, 2, 0, 0, lambda xs, y: G.g_at(xs, y))
    g00_T = DTensorField(G.p, m, 0, 0, 0, 2, lambda xs, y: G.g00_at(xs, y))
    return g_T, g00_T


def compatibility_check(G: MetricStructure, D: DConnectionCoeffs,
                        A: AlgebroidData, N: NonlinearConnection, samples,
                        tol: float = 1e-9) -> CheckResult:
    """Max over samples of the four covariant-constancy residual families:
    horizontal and vertical derivatives of both metric blocks."""
    tracker = ResidualTracker("compatibility", tol)
    g_T, g00_T = _metric_tensors(G, A.m)
    g_h = h_cov_deriv(g_T, A, N, D)
    g_v = v_cov_deriv(g_T, A, D)
    g00_h = h_cov_deriv(g00_T, A, N, D)
    g00_v = v_cov_deriv(g00_T, A, D)
    p = G.p
    for pt in samples:
        try:
            vh = g_h.values_at(pt.x, pt.y)
            vv = g_v.values_at(pt.x, pt.y)
            v0h = g00_h.values_at(pt.x, pt.y)
            v0v = g00_v.values_at(pt.x, pt.y)
        except EvaluationDomainError as exc:
            if exc.point is None:
                exc.point = pt
            raise
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    tracker.update(primal(vh[a][b][c]), pt)
                tracker.update(primal(vv[a][b]), pt)
        for c in range(p):
            tracker.update(primal(v0h[c]), pt)
        tracker.update(primal(v0v), pt)
    return tracker.result()


def riemannian_flags(G: MetricStructure, samples, tol: float = 1e-12):
    """(h-block independent of y0, vertical coefficient independent of y0)."""
    max_h = 0.0
    max_v = 0.0
    for pt in samples:
        jxs, jy = seeded_point(pt.x, pt.y)
        gj = G.g_at(jxs, jy)
        for row in gj:
            for v in row:
                max_h = max(max_h, abs(primal(jdy(v))))
        max_v = max(max_v, abs(primal(jdy(G.g00_at(jxs, jy)))))
    return max_h <= tol, max_v <= tol
