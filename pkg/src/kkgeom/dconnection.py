"""Linear connection coefficients on the split bundle and covariant calculus.

A coefficient set has four families, stored as array evaluators:

    hh[alpha][beta][gamma]   horizontal derivative of horizontal frame
    hv[gamma]                horizontal derivative of the vertical frame
    vh[alpha][beta]          vertical derivative of horizontal frame
    vv                       vertical derivative of the vertical frame

Block tensors (``DTensorField``) carry separate horizontal and vertical
valences; vertical indices have dimension one but still matter, because each
contravariant vertical slot adds +hv/+vv corrections and each covariant one
subtracts them.  Covariant derivatives return new lazily evaluated tensors,
so they nest to the third order exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebroid import AlgebroidData
from .calculus import EPoint, SmoothField, jdx, jdy, jval, primal, seeded_point
from .nlconnection import (
    CoordinateChange,
    NonlinearConnection,
    adapted_derivatives,
)
from .report import CheckResult, ResidualTracker

__all__ = [
    "DConnectionCoeffs",
    "DTensorField",
    "DVectorField",
    "berwald",
    "h_cov_deriv",
    "v_cov_deriv",
    "tensor_product",
    "cov_deriv_along",
    "bracket_d_vectors",
    "frame_h",
    "frame_v",
    "check_dconnection_transformation",
]


class DConnectionCoeffs:
    """The four coefficient families, as point evaluators (Jet-friendly)."""

    def __init__(self, p, m, hh_at, hv_at, vh_at, vv_at):
        self.p = p
        self.m = m
        self.hh_at = hh_at
        self.hv_at = hv_at
        self.vh_at = vh_at
        self.vv_at = vv_at

    @staticmethod
    def zero(p: int, m: int) -> "DConnectionCoeffs":
        return DConnectionCoeffs(
            p, m,
            lambda xs, y: [[[0.0] * p for _ in range(p)] for _ in range(p)],
            lambda xs, y: [0.0] * p,
            lambda xs, y: [[0.0] * p for _ in range(p)],
            lambda xs, y: 0.0,
        )

    @staticmethod
    def from_fields(p, m, hh, hv, vh, vv) -> "DConnectionCoeffs":
        """Explicit tables of SmoothFields: hh p^3, hv p, vh p^2, vv scalar."""
        return DConnectionCoeffs(
            p, m,
            lambda xs, y: [[[hh[a][b][c](xs, y) for c in range(p)]
                            for b in range(p)] for a in range(p)],
            lambda xs, y: [hv[c](xs, y) for c in range(p)],
            lambda xs, y: [[vh[a][b](xs, y) for b in range(p)] for a in range(p)],
            lambda xs, y: vv(xs, y),
        )

    def all_at(self, xs, y):
        return [self.hh_at(xs, y), self.hv_at(xs, y),
                self.vh_at(xs, y), self.vv_at(xs, y)]


def berwald(N: NonlinearConnection, m: int) -> DConnectionCoeffs:
    """Connection induced by the fiber derivative of the nonlinear
    coefficients: hv[gamma] = dGamma_gamma/dy0, all other families zero."""
    p = N.p

    def hv_at(xs, y):
        jxs, jy = seeded_point(xs, y)
        out = N.gamma_at(jxs, jy)
        return [jdy(o) for o in out]

    return DConnectionCoeffs(
        p, m,
        lambda xs, y: [[[0.0] * p for _ in range(p)] for _ in range(p)],
        hv_at,
        lambda xs, y: [[0.0] * p for _ in range(p)],
        lambda xs, y: 0.0,
    )


class DTensorField:
    """Block tensor with horizontal valence (rh, sh) and vertical valence
    (rv, sv).  Components are indexed by the horizontal multi-index only
    (contravariant slots first); vertical slots are dimension one and carry
    no array axis.  ``values_at`` returns the full nested component list in
    one pass, which is what the derivative operators differentiate."""

    def __init__(self, p, m, rh, sh, rv, sv, values_at):
        self.p = p
        self.m = m
        self.rh = rh
        self.sh = sh
        self.rv = rv
        self.sv = sv
        self.values_at = values_at

    @property
    def h_rank(self):
        return self.rh + self.sh

    def indices(self):
        return itertools.product(range(self.p), repeat=self.h_rank)

    @staticmethod
    def scalar(p, m, field: SmoothField, rv=0, sv=0) -> "DTensorField":
        return DTensorField(p, m, 0, 0, rv, sv, lambda xs, y: field(xs, y))

    @staticmethod
    def from_fields(p, m, rh, sh, fields, rv=0, sv=0) -> "DTensorField":
        """``fields``: nested list of SmoothFields, depth rh+sh."""

        def values_at(xs, y):
            def build(node):
                if isinstance(node, (list, tuple)):
                    return [build(v) for v in node]
                return node(xs, y)

            return build(fields)

        return DTensorField(p, m, rh, sh, rv, sv, values_at)

    def value(self, xs, y, idx=()):
        out = self.values_at(xs, y)
        for k in idx:
            out = out[k]
        return out

    def component(self, idx=()) -> SmoothField:
        """One component as a SmoothField (evaluates the whole block)."""
        return SmoothField(lambda xs, y: self.value(xs, y, idx), self.m)


def _get(values, idx):
    out = values
    for k in idx:
        out = out[k]
    return out


def _nest(p, rank, fill):
    if rank == 0:
        return fill(())
    def build(prefix):
        if len(prefix) == rank:
            return fill(prefix)
        return [build(prefix + (k,)) for k in range(p)]
    return build(())


def h_cov_deriv(T: DTensorField, A: AlgebroidData, N: NonlinearConnection,
                D: DConnectionCoeffs) -> DTensorField:
    """Horizontal covariant derivative; the new covariant horizontal index
    (the direction) is appended last."""
    p = T.p

    def values_at(xs, y):
        vals, delta, _ = adapted_derivatives(
            lambda jxs, jy: T.values_at(jxs, jy), xs, y, A, N)
        Hh = D.hh_at(xs, y)
        Hv = D.hv_at(xs, y)
        vweight = T.rv - T.sv

        def fill(full_idx):
            idx, g = full_idx[:-1], full_idx[-1]
            out = _get(delta[g], idx)
            for k in range(T.rh):
                ak = idx[k]
                out = out + sum(
                    Hh[ak][th][g] * _get(vals, idx[:k] + (th,) + idx[k + 1:])
                    for th in range(p)
                )
            for k in range(T.rh, T.rh + T.sh):
                bk = idx[k]
                out = out - sum(
                    Hh[th][bk][g] * _get(vals, idx[:k] + (th,) + idx[k + 1:])
                    for th in range(p)
                )
            if vweight:
                out = out + vweight * Hv[g] * _get(vals, idx)
            return out

        return _nest(p, T.h_rank + 1, fill)

    return DTensorField(p, T.m, T.rh, T.sh + 1, T.rv, T.sv, values_at)


def v_cov_deriv(T: DTensorField, A: AlgebroidData,
                D: DConnectionCoeffs) -> DTensorField:
    """Vertical covariant derivative; adds one covariant vertical slot
    (no new array axis)."""
    p = T.p

    def values_at(xs, y):
        jxs, jy = seeded_point(xs, y)
        out = T.values_at(jxs, jy)

        def mapv(node, fn):
            if isinstance(node, list):
                return [mapv(v, fn) for v in node]
            return fn(node)

        vals = mapv(out, jval)
        ddy = mapv(out, jdy)
        Vh = D.vh_at(xs, y)
        Vv = D.vv_at(xs, y)
        vweight = T.rv - T.sv

        def fill(idx):
            acc = _get(ddy, idx)
            for k in range(T.rh):
                ak = idx[k]
                acc = acc + sum(
                    Vh[ak][th] * _get(vals, idx[:k] + (th,) + idx[k + 1:])
                    for th in range(p)
                )
            for k in range(T.rh, T.rh + T.sh):
                bk = idx[k]
                acc = acc - sum(
                    Vh[th][bk] * _get(vals, idx[:k] + (th,) + idx[k + 1:])
                    for th in range(p)
                )
            if vweight:
                acc = acc + vweight * Vv * _get(vals, idx)
            return acc

        return _nest(p, T.h_rank, fill)

    return DTensorField(p, T.m, T.rh, T.sh, T.rv, T.sv + 1, values_at)


def tensor_product(S: DTensorField, T: DTensorField) -> DTensorField:
    """Outer product; contravariant horizontal slots of S then T, followed by
    covariant slots of S then T.  Vertical valences add."""
    p = S.p

    def values_at(xs, y):
        sv = S.values_at(xs, y)
        tv = T.values_at(xs, y)

        def fill(idx):
            s_idx = idx[:S.rh] + idx[S.rh + T.rh:S.rh + T.rh + S.sh]
            t_idx = idx[S.rh:S.rh + T.rh] + idx[S.rh + T.rh + S.sh:]
            return _get(sv, s_idx) * _get(tv, t_idx)

        return _nest(p, S.h_rank + T.h_rank, fill)

    return DTensorField(p, S.m, S.rh + T.rh, S.sh + T.sh,
                        S.rv + T.rv, S.sv + T.sv, values_at)


class DVectorField:
    """Vector field in adapted components: h (p entries) plus one vertical.

    Construct either from separate component evaluators or, for derived
    fields whose h and v parts share work, from a single combined evaluator
    ``hv_at`` returning ``(h_list, v_scalar)`` (nested operators always call
    the combined form, so shared subexpressions are evaluated once)."""

    __slots__ = ("p", "hv_at")

    def __init__(self, p, h_at=None, v_at=None, hv_at=None):
        self.p = p
        if hv_at is not None:
            self.hv_at = hv_at
        else:
            self.hv_at = lambda xs, y: (list(h_at(xs, y)), v_at(xs, y))

    def h_at(self, xs, y):
        return self.hv_at(xs, y)[0]

    def v_at(self, xs, y):
        return self.hv_at(xs, y)[1]

    def at(self, pt: EPoint):
        h, v = self.hv_at(pt.x, pt.y)
        return [primal(w) for w in h], primal(v)


def frame_h(p: int, idx: int) -> DVectorField:
    """The idx-th horizontal frame field."""
    return DVectorField(
        p,
        hv_at=lambda xs, y: ([1.0 if a == idx else 0.0 for a in range(p)],
                             0.0),
    )


def frame_v(p: int) -> DVectorField:
    """The vertical frame field."""
    return DVectorField(p, hv_at=lambda xs, y: ([0.0] * p, 1.0))


def cov_deriv_along(X: DVectorField, W: DVectorField, A: AlgebroidData,
                    N: NonlinearConnection, D: DConnectionCoeffs) -> DVectorField:
    """D_X W for vector fields, from the frame coefficients and the Leibniz
    rule only.  Returns closures, so results can be differentiated again."""
    p = X.p

    def combined(xs, y):
        h, v = W.hv_at(xs, y)
        return [list(h), v]

    def components(xs, y):
        vals, delta, ddy = adapted_derivatives(combined, xs, y, A, N)
        Wh, Wv = vals
        dWh, dWv = ddy
        Hh = D.hh_at(xs, y)
        Hv = D.hv_at(xs, y)
        Vh = D.vh_at(xs, y)
        Vv = D.vv_at(xs, y)
        Xh, Xv = X.hv_at(xs, y)
        out_h = []
        for a in range(p):
            acc = 0.0
            for g in range(p):
                acc = acc + Xh[g] * (delta[g][0][a]
                                     + sum(Hh[a][b][g] * Wh[b] for b in range(p)))
            acc = acc + Xv * (dWh[a] + sum(Vh[a][b] * Wh[b] for b in range(p)))
            out_h.append(acc)
        out_v = 0.0
        for g in range(p):
            out_v = out_v + Xh[g] * (delta[g][1] + Hv[g] * Wv)
        out_v = out_v + Xv * (dWv + Vv * Wv)
        return out_h, out_v

    return DVectorField(p, hv_at=components)


def bracket_d_vectors(X: DVectorField, Y: DVectorField, A: AlgebroidData,
                      N: NonlinearConnection) -> DVectorField:
    """[X, Y] in adapted components, computed through the natural frame so
    that only the raw bracket table L and plain derivatives enter (the
    adapted-frame bracket relations are *not* used; this is the oracle)."""
    p = X.p
    m = A.m

    def natural(Z):
        # adapted (h, v) -> natural (A^gamma = h, A^0 = v - Gamma.h)
        def nat_at(xs, y):
            h, v = Z.hv_at(xs, y)
            gam = N.gamma_at(xs, y)
            return [list(h), v - sum(gam[g] * h[g] for g in range(p))]
        return nat_at

    X_nat = natural(X)
    Y_nat = natural(Y)

    def components(xs, y):
        rho = A.rho_at(xs)
        Lv = A.L_at(xs)
        jxs, jy = seeded_point(xs, y)
        Xn_j = X_nat(jxs, jy)
        Yn_j = Y_nat(jxs, jy)

        def unpack(node):
            h, v = node
            hv = [jval(s) for s in h]
            vv = jval(v)
            dh = [[jdx(s, i) for i in range(m)] for s in h]
            dv = [jdx(v, i) for i in range(m)]
            hy = [jdy(s) for s in h]
            vy = jdy(v)
            return hv, vv, dh, dv, hy, vy

        Xh, Xv, dXh, dXv, yXh, yXv = unpack(Xn_j)
        Yh, Yv, dYh, dYv, yYh, yYv = unpack(Yn_j)

        def rho_apply(Zh, Zv, dF, yF):
            # anchor(Z) applied to a function with gradient dF, fiber yF
            return sum(Zh[a] * sum(rho[a][i] * dF[i] for i in range(m))
                       for a in range(p)) + Zv * yF

        out_h = []
        for g in range(p):
            acc = rho_apply(Xh, Xv, dYh[g], yYh[g]) \
                - rho_apply(Yh, Yv, dXh[g], yXh[g])
            acc = acc + sum(Xh[a] * Yh[b] * Lv[g][a][b]
                            for a in range(p) for b in range(p))
            out_h.append(acc)
        out_v = rho_apply(Xh, Xv, dYv, yYv) - rho_apply(Yh, Yv, dXv, yXv)

        # back to adapted components
        gam = N.gamma_at(xs, y)
        out_v_adapted = out_v + sum(gam[g] * out_h[g] for g in range(p))
        return out_h, out_v_adapted

    return DVectorField(p, hv_at=components)


def check_dconnection_transformation(D: DConnectionCoeffs,
                                     D_primed: DConnectionCoeffs,
                                     C: CoordinateChange,
                                     A: AlgebroidData,
                                     N: NonlinearConnection,
                                     samples,
                                     tol: float = 1e-8) -> CheckResult:
    """Residuals of the four coefficient change laws under C:

        hh': Lam^{a'}_a [ delta_g(Laminv^a_{b'}) + hh^a_{bg} Laminv^b_{b'} ] Laminv^g_{g'}
        hv': phi [ delta_g(1/phi) + hv_g / phi ] Laminv^g_{g'}
        vh': Lam^{a'}_a vh^a_b Laminv^b_{b'} / phi
        vv': vv / phi
    """
    tracker = ResidualTracker("dconnection_transformation", tol)
    p = D.p
    for pt in samples:
        phi = primal(C.phi_at(pt.x))
        if phi == 0.0:
            tracker.update(float("inf"), pt)
            continue
        pushed = C.push(pt)
        lam = [[primal(v) for v in row] for row in C.lambda_at(pt.x)]

        # delta_g of the inverse frame entries and of phi, in the old chart
        inv_tensor, inv_delta, _ = adapted_derivatives(
            lambda jxs, jy: C.lambda_inv_at(jxs), pt.x, pt.y, A, N)
        lam_inv = [[primal(v) for v in row] for row in inv_tensor]
        phi_struct, phi_delta, _ = adapted_derivatives(
            lambda jxs, jy: [C.phi_at(jxs)], pt.x, pt.y, A, N)

        Hh = [[[primal(v) for v in r2] for r2 in r1]
              for r1 in D.hh_at(pt.x, pt.y)]
        Hv = [primal(v) for v in D.hv_at(pt.x, pt.y)]
        Vh = [[primal(v) for v in row] for row in D.vh_at(pt.x, pt.y)]
        Vv = primal(D.vv_at(pt.x, pt.y))

        Hh_p = [[[primal(v) for v in r2] for r2 in r1]
                for r1 in D_primed.hh_at(pushed.x, pushed.y)]
        Hv_p = [primal(v) for v in D_primed.hv_at(pushed.x, pushed.y)]
        Vh_p = [[primal(v) for v in row]
                for row in D_primed.vh_at(pushed.x, pushed.y)]
        Vv_p = primal(D_primed.vv_at(pushed.x, pushed.y))

        for ap in range(p):
            for bp in range(p):
                for gp in range(p):
                    rhs = 0.0
                    for a in range(p):
                        for g in range(p):
                            bracket = primal(inv_delta[g][a][bp]) + sum(
                                Hh[a][b][g] * lam_inv[b][bp] for b in range(p))
                            rhs += lam[ap][a] * bracket * lam_inv[g][gp]
                    tracker.update(Hh_p[ap][bp][gp] - rhs, pt)
        for gp in range(p):
            rhs = 0.0
            for g in range(p):
                # delta_g(1/phi) = -delta_g(phi)/phi^2
                dg_invphi = -primal(phi_delta[g][0]) / (phi * phi)
                rhs += phi * (dg_invphi + Hv[g] / phi) * lam_inv[g][gp]
            tracker.update(Hv_p[gp] - rhs, pt)
        for ap in range(p):
            for bp in range(p):
                rhs = sum(lam[ap][a] * Vh[a][b] * lam_inv[b][bp] / phi
                          for a in range(p) for b in range(p))
                tracker.update(Vh_p[ap][bp] - rhs, pt)
        tracker.update(Vv_p - Vv / phi, pt)
    return tracker.result()
