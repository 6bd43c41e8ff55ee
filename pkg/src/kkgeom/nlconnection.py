"""Nonlinear fiber connection: adapted-frame derivative and its curvature.

The connection is a p-tuple of coefficient fields Gamma[gamma](x, y0); the
adapted frame operators act on scalar fields as

    delta_gamma f = rho[gamma][i] df/dx_i - Gamma[gamma] df/dy0,

and the vertical operator is plain d/dy0.  Tensor components everywhere in
this package are stored with respect to this frame.  The frame's bracket
defect is the antisymmetric matrix ``nlc_curvature``.  Everything evaluates
on floats or Jets alike, so the operators nest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebroid import AlgebroidData
from .calculus import (
    EPoint,
    SmoothField,
    jdx,
    jdy,
    jval,
    primal,
    seeded_point,
)
from .report import CheckResult, ResidualTracker

__all__ = [
    "NonlinearConnection",
    "CoordinateChange",
    "adapted_derivatives",
    "h_derivative",
    "nlc_curvature",
    "nlc_curvature_at",
    "check_nlc_transformation",
    "bracket_residual",
]


@dataclass(frozen=True)
class NonlinearConnection:
    """Coefficients Gamma[gamma](x, y0) of the horizontal/vertical split."""

    p: int
    gamma: tuple  # p SmoothFields on E

    def __post_init__(self):
        if len(self.gamma) != self.p:
            raise ValueError(f"Gamma table must have {self.p} entries")

    def gamma_at(self, xs, y):
        return [g(xs, y) for g in self.gamma]

    @staticmethod
    def zero(p: int, m: int) -> "NonlinearConnection":
        return NonlinearConnection(p, tuple(SmoothField.constant(0.0, m)
                                            for _ in range(p)))


def _map_structure(fn, obj):
    if isinstance(obj, list):
        return [_map_structure(fn, o) for o in obj]
    return fn(obj)


def adapted_derivatives(array_fn, xs, y, A: AlgebroidData, N: NonlinearConnection):
    """Evaluate ``array_fn`` (nested lists of scalars) at a jointly seeded
    point and return (values, [delta_gamma structure for each gamma], ddy).

    This is the workhorse: one evaluation of the underlying fields yields the
    adapted derivatives of every component at once, and it nests (callers may
    pass Jet-valued xs, y).
    """
    rho = A.rho_at(xs)
    gam = N.gamma_at(xs, y)
    jxs, jy = seeded_point(xs, y)
    out = array_fn(jxs, jy)
    vals = _map_structure(jval, out)
    ddy = _map_structure(jdy, out)
    m = A.m
    delta = [
        _map_structure(
            lambda s, _g=g: sum(rho[_g][i] * jdx(s, i) for i in range(m))
            - gam[_g] * jdy(s),
            out,
        )
        for g in range(A.p)
    ]
    return vals, delta, ddy


def h_derivative(f: SmoothField, gamma: int, A: AlgebroidData,
                 N: NonlinearConnection, p: EPoint) -> float:
    """Adapted-frame derivative delta_gamma f at p (gamma is 0-based)."""
    _, delta, _ = adapted_derivatives(lambda xs, y: [f(xs, y)], p.x, p.y, A, N)
    return primal(delta[gamma][0])


def nlc_curvature_at(A: AlgebroidData, N: NonlinearConnection, xs, y):
    """R[alpha][beta] = delta_beta Gamma_alpha - delta_alpha Gamma_beta
    + L[g][alpha][beta] Gamma_g, antisymmetric; generic over Jets."""
    vals, delta, _ = adapted_derivatives(lambda jxs, jy: N.gamma_at(jxs, jy),
                                         xs, y, A, N)
    Lv = A.L_at(xs)
    p = A.p
    return [
        [
            delta[b][a] - delta[a][b]
            + sum(Lv[g][a][b] * vals[g] for g in range(p))
            for b in range(p)
        ]
        for a in range(p)
    ]


def nlc_curvature(A: AlgebroidData, N: NonlinearConnection, pt: EPoint):
    """Bracket curvature matrix at a point, as plain floats."""
    R = nlc_curvature_at(A, N, pt.x, pt.y)
    out = [[primal(v) for v in row] for row in R]
    # antisymmetric by construction whenever the bracket table is; assert it
    assert all(abs(out[a][b] + out[b][a]) <= 1e-12 * (1.0 + abs(out[a][b]))
               for a in range(A.p) for b in range(A.p)), \
        "bracket curvature not antisymmetric (is the L table antisymmetric?)"
    return out


def bracket_residual(A: AlgebroidData, N: NonlinearConnection, samples,
                     tol: float = 1e-8) -> CheckResult:
    """Certifies the adapted-frame bracket relations against direct operator
    commutation on the test functions {x1..xm, y0}:

        [delta_a, delta_b] f = L^g_{ab} delta_g f + R_ab df/dy0
        [delta_a, d/dy0]  f = (dGamma_a/dy0) df/dy0

    The left sides use nested differentiation only (no component formulas).
    """
    tracker = ResidualTracker("bracket", tol)
    m, p = A.m, A.p

    def delta_apply(g, field, xs, y):
        jxs, jy = seeded_point(xs, y)
        out = field(jxs, jy)
        rho_g = [A.rho[g][i](xs, 0.0) for i in range(m)]
        gam_g = N.gamma[g](xs, y)
        return sum(rho_g[i] * jdx(out, i) for i in range(m)) - gam_g * jdy(out)

    def ddy_apply(field, xs, y):
        jxs, jy = seeded_point(xs, y)
        return jdy(field(jxs, jy))

    coord_fields = [
        SmoothField(lambda xs, y, _k=k: xs[_k], m) for k in range(m)
    ] + [SmoothField(lambda xs, y: y, m)]

    for pt in samples:
        Lv = A.L_at(pt.x)
        R = nlc_curvature(A, N, pt)
        dgam = [
            primal(ddy_apply(N.gamma[g], pt.x, pt.y)) for g in range(p)
        ]
        for f in coord_fields:
            df_dy = primal(ddy_apply(f, pt.x, pt.y))
            delta_f = [
                primal(delta_apply(g, f, pt.x, pt.y)) for g in range(p)
            ]
            for a in range(p):
                for b in range(p):
                    lhs = primal(
                        delta_apply(a, lambda xs, y, _b=b, _f=f:
                                    delta_apply(_b, _f, xs, y), pt.x, pt.y)
                        - delta_apply(b, lambda xs, y, _a=a, _f=f:
                                      delta_apply(_a, _f, xs, y), pt.x, pt.y)
                    )
                    rhs = sum(Lv[g][a][b] * delta_f[g] for g in range(p)) \
                        + R[a][b] * df_dy
                    tracker.update(lhs - rhs, pt)
                # mixed bracket [delta_a, ddy] = +dGamma_a/dy0 . ddy
                lhs = primal(
                    delta_apply(a, lambda xs, y, _f=f: ddy_apply(_f, xs, y),
                                pt.x, pt.y)
                    - ddy_apply(lambda xs, y, _a=a, _f=f:
                                delta_apply(_a, _f, xs, y), pt.x, pt.y)
                )
                rhs = dgam[a] * df_dy
                tracker.update(lhs - rhs, pt)
    return tracker.result()


@dataclass(frozen=True)
class CoordinateChange:
    """A fibred chart change: base map x -> x', linear fiber rescale
    y0' = phi(x) * y0, and frame change Lambda (with pointwise inverse).

    ``base``/``base_inverse`` are m-tuples of fields on M (None = identity).
    ``frame`` is Lambda[a'][a] (row = new index), ``frame_inverse`` its
    pointwise inverse Lambda[a][a'].
    """

    m: int
    p: int
    base: tuple | None = None
    base_inverse: tuple | None = None
    fiber_scale: SmoothField | None = None
    frame: tuple | None = None
    frame_inverse: tuple | None = None

    def base_at(self, xs):
        if self.base is None:
            return list(xs)
        return [f(xs, 0.0) for f in self.base]

    def base_inverse_at(self, xs_p):
        if self.base_inverse is None:
            return list(xs_p)
        return [f(xs_p, 0.0) for f in self.base_inverse]

    def phi_at(self, xs):
        return 1.0 if self.fiber_scale is None else self.fiber_scale(xs, 0.0)

    def phi_grad_at(self, xs):
        if self.fiber_scale is None:
            return [0.0] * self.m
        jxs, _ = seeded_point(xs, 0.0)
        out = self.fiber_scale(jxs, 0.0)
        return [jdx(out, i) for i in range(self.m)]

    def lambda_at(self, xs):
        if self.frame is None:
            return [[1.0 if a == b else 0.0 for b in range(self.p)]
                    for a in range(self.p)]
        return [[f(xs, 0.0) for f in row] for row in self.frame]

    def lambda_inv_at(self, xs):
        if self.frame_inverse is None:
            return [[1.0 if a == b else 0.0 for b in range(self.p)]
                    for a in range(self.p)]
        return [[f(xs, 0.0) for f in row] for row in self.frame_inverse]

    def push(self, pt: EPoint) -> EPoint:
        xs_p = [primal(v) for v in self.base_at(pt.x)]
        return EPoint(tuple(xs_p), primal(self.phi_at(pt.x)) * pt.y)

    def self_check(self, samples, tol: float = 1e-10) -> CheckResult:
        """base o inverse = id and Lambda . Lambda^-1 = I on samples."""
        tracker = ResidualTracker("chart_change", tol)
        for pt in samples:
            xs_p = [primal(v) for v in self.base_at(pt.x)]
            back = [primal(v) for v in self.base_inverse_at(tuple(xs_p))]
            for i in range(self.m):
                tracker.update(back[i] - pt.x[i], pt)
            lam = self.lambda_at(pt.x)
            inv = self.lambda_inv_at(pt.x)
            for a in range(self.p):
                for b in range(self.p):
                    acc = sum(lam[a][c] * inv[c][b] for c in range(self.p))
                    tracker.update(acc - (1.0 if a == b else 0.0), pt)
            if abs(primal(self.phi_at(pt.x))) < 1e-15:
                tracker.update(float("inf"), pt)
        return tracker.result()


def check_nlc_transformation(N: NonlinearConnection, N_primed: NonlinearConnection,
                             C: CoordinateChange, A: AlgebroidData, samples,
                             tol: float = 1e-8) -> CheckResult:
    """Residual of the connection-coefficient change law

        Gamma'_{g'}(x', y0') = [ -rho^k_g y0 dphi/dx_k + phi Gamma_g ] Lam^g_{g'}

    with all right-hand quantities evaluated in the unprimed chart and the
    left side at the pushed-forward point."""
    tracker = ResidualTracker("nlc_transformation", tol)
    p = A.p
    for pt in samples:
        phi = primal(C.phi_at(pt.x))
        if phi == 0.0:
            tracker.update(float("inf"), pt)
            continue
        dphi = [primal(v) for v in C.phi_grad_at(pt.x)]
        lam_inv = [[primal(v) for v in row] for row in C.lambda_inv_at(pt.x)]
        rho = [[primal(v) for v in row] for row in A.rho_at(pt.x)]
        gam = [primal(v) for v in N.gamma_at(pt.x, pt.y)]
        pushed = C.push(pt)
        gam_p = [primal(v) for v in N_primed.gamma_at(pushed.x, pushed.y)]
        for gp in range(p):
            rhs = sum(
                (-sum(rho[g][k] * dphi[k] for k in range(A.m)) * pt.y
                 + phi * gam[g]) * lam_inv[g][gp]
                for g in range(p)
            )
            tracker.update(gam_p[gp] - rhs, pt)
    return tracker.result()
