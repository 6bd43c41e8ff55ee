"""Anchored frame data on the base manifold and its consistency checks.

The data is a p-column anchor table rho[alpha][i] (each entry a field on M)
and a bracket-coefficient table L[gamma][alpha][beta], so that the frame
vector fields X_alpha = rho[alpha][i] d/dx_i close under commutator:

    [X_alpha, X_beta] = L[gamma][alpha][beta] X_gamma.

Three sample-based validators certify antisymmetry of L, the commutator
closure (anchor compatibility), and the Jacobi identity.  All identity
suites downstream assume data that passes these.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import (
    EPoint,
    EvaluationDomainError,
    SmoothField,
    jdx,
    jval,
    seeded_point,
)
from .report import CheckResult, ResidualTracker

__all__ = ["AlgebroidData", "validate_antisymmetry",
           "validate_anchor_compatibility", "validate_jacobi",
           "frame_commutator_residual"]

DEFAULT_VALIDATOR_TOL = 1e-8


@dataclass(frozen=True)
class AlgebroidData:
    """Anchor and bracket tables, both pulled back to fields on M."""

    m: int
    p: int
    rho: tuple          # rho[alpha][i] -> SmoothField, shape p x m
    L: tuple            # L[gamma][alpha][beta] -> SmoothField, shape p x p x p

    def __post_init__(self):
        if len(self.rho) != self.p or any(len(row) != self.m for row in self.rho):
            raise ValueError(f"rho table must be {self.p}x{self.m}")
        if (len(self.L) != self.p
                or any(len(a) != self.p for a in self.L)
                or any(len(b) != self.p for a in self.L for b in a)):
            raise ValueError(f"L table must be {self.p}^3")

    def rho_at(self, xs):
        """Anchor values at base point xs (entries float or Jet)."""
        return [[self.rho[a][i](xs, 0.0) for i in range(self.m)]
                for a in range(self.p)]

    def L_at(self, xs):
        return [[[self.L[g][a][b](xs, 0.0) for b in range(self.p)]
                 for a in range(self.p)] for g in range(self.p)]

    @staticmethod
    def identity(m: int) -> "AlgebroidData":
        """Coordinate frame: rho = Id (p = m), L = 0."""
        rho = tuple(
            tuple(SmoothField.constant(1.0 if i == a else 0.0, m) for i in range(m))
            for a in range(m)
        )
        zero = SmoothField.constant(0.0, m)
        L = tuple(tuple((zero,) * m for _ in range(m)) for _ in range(m))
        return AlgebroidData(m, m, rho, L)


def _attach(exc: EvaluationDomainError, point: EPoint):
    if exc.point is None:
        exc.point = point
    return exc


def validate_antisymmetry(A: AlgebroidData, samples,
                          tol: float = DEFAULT_VALIDATOR_TOL) -> CheckResult:
    """max |L^g_{ab} + L^g_{ba}| over samples and indices."""
    tracker = ResidualTracker("antisymmetry", tol)
    for pt in samples:
        try:
            Lv = A.L_at(pt.x)
        except EvaluationDomainError as exc:
            raise _attach(exc, pt)
        for g in range(A.p):
            for a in range(A.p):
                for b in range(A.p):
                    tracker.update(Lv[g][a][b] + Lv[g][b][a], pt)
    return tracker.result()


def validate_anchor_compatibility(A: AlgebroidData, samples,
                                  tol: float = DEFAULT_VALIDATOR_TOL) -> CheckResult:
    """max |L^g_{ab} rho^k_g - (rho^i_a d_i rho^k_b - rho^j_b d_j rho^k_a)|."""
    tracker = ResidualTracker("anchor_compatibility", tol)
    m, p = A.m, A.p
    for pt in samples:
        try:
            jxs, _ = seeded_point(pt.x, pt.y)
            jrho = [[A.rho[a][i](jxs, 0.0) for i in range(m)] for a in range(p)]
            rho = [[jval(jrho[a][i]) for i in range(m)] for a in range(p)]
            drho = [[[jdx(jrho[a][i], k) for k in range(m)] for i in range(m)]
                    for a in range(p)]
            Lv = A.L_at(pt.x)
        except EvaluationDomainError as exc:
            raise _attach(exc, pt)
        for a in range(p):
            for b in range(p):
                for k in range(m):
                    lhs = sum(Lv[g][a][b] * rho[g][k] for g in range(p))
                    rhs = sum(rho[a][i] * drho[b][k][i] for i in range(m)) \
                        - sum(rho[b][j] * drho[a][k][j] for j in range(m))
                    tracker.update(lhs - rhs, pt)
    return tracker.result()


def validate_jacobi(A: AlgebroidData, samples,
                    tol: float = DEFAULT_VALIDATOR_TOL) -> CheckResult:
    """Cyclic sum of rho^i_a d_i L^d_{bc} + L^d_{ae} L^e_{bc} must vanish."""
    tracker = ResidualTracker("jacobi", tol)
    m, p = A.m, A.p
    for pt in samples:
        try:
            rho = A.rho_at(pt.x)
            jxs, _ = seeded_point(pt.x, pt.y)
            jL = [[[A.L[g][a][b](jxs, 0.0) for b in range(p)] for a in range(p)]
                  for g in range(p)]
            Lv = [[[jval(jL[g][a][b]) for b in range(p)] for a in range(p)]
                  for g in range(p)]
            dL = [[[[jdx(jL[g][a][b], k) for k in range(m)] for b in range(p)]
                   for a in range(p)] for g in range(p)]
        except EvaluationDomainError as exc:
            raise _attach(exc, pt)

        def term(a, b, c, d):
            out = sum(rho[a][i] * dL[d][b][c][i] for i in range(m))
            out += sum(Lv[d][a][e] * Lv[e][b][c] for e in range(p))
            return out

        for a in range(p):
            for b in range(p):
                for c in range(p):
                    for d in range(p):
                        tracker.update(
                            term(a, b, c, d) + term(b, c, a, d) + term(c, a, b, d),
                            pt,
                        )
    return tracker.result()


def frame_commutator_residual(A: AlgebroidData, samples,
                              tol: float = DEFAULT_VALIDATOR_TOL) -> CheckResult:
    """Direct check that [X_a, X_b] f = L^g_{ab} X_g f for f in {x1..xm},
    with the commutator evaluated by nested differentiation (no use of the
    compatibility identity)."""
    tracker = ResidualTracker("frame_commutator", tol)
    m, p = A.m, A.p

    def apply_frame(c, field, xs):
        # (X_c field)(xs), generic over Jet-valued xs
        jxs, _ = seeded_point(xs, 0.0)
        out = field(jxs, 0.0)
        rho_c = [A.rho[c][i](xs, 0.0) for i in range(m)]
        return sum(rho_c[i] * jdx(out, i) for i in range(m))

    for pt in samples:
        rho_pt = A.rho_at(pt.x)
        Lv = A.L_at(pt.x)
        for k in range(m):
            for a in range(p):
                for b in range(p):
                    # f = x^k, so X_b f is the anchor entry rho[b][k]
                    lhs = apply_frame(a, A.rho[b][k], pt.x) \
                        - apply_frame(b, A.rho[a][k], pt.x)
                    rhs = sum(Lv[g][a][b] * rho_pt[g][k] for g in range(p))
                    tracker.update(lhs - rhs, pt)
    return tracker.result()
