"""Fiber lifts of base curves and their parallelism ODEs.

A base curve c(t) in M is lifted to the fiber by a morphism column
g[alpha](x) and a fiber function y0(t).  Three parallelism notions are
integrated with classic fixed-step fourth-order Runge-Kutta (deterministic,
reproducible step counts):

    parallel lift:        du/dt + Gamma_a(c, u) g^a(c) u = 0     (linear)
    horizontal parallel:  dz^a/dt + hh^a_{bc}(c, y0) z^b z^c = 0 (quadratic)
    vertical parallel:    du/dt + vv(c, u) u^2 = 0               (quadratic)

Quadratic systems can blow up in finite time; integration stops when the
state leaves [-1e12, 1e12] or turns non-finite, and the trajectory records
the last valid time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .algebroid import AlgebroidData
from .calculus import EPoint, Jet, SmoothField, jdx, jval, primal
from .dconnection import DConnectionCoeffs
from .nlconnection import NonlinearConnection

__all__ = [
    "BaseCurve",
    "LiftMorphism",
    "LiftState",
    "Trajectory",
    "rk4_integrate",
    "lift_condition_residual",
    "integrate_parallel_lift",
    "integrate_horizontal_parallel",
    "integrate_vertical_parallel",
    "acceleration_lift",
    "local_invertibility_residual",
]

BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class BaseCurve:
    """m coordinate functions of t, with velocities via jets in t."""

    m: int
    components: tuple  # callables t -> scalar

    def point_at(self, t: float):
        return tuple(primal(c(t)) for c in self.components)

    def velocity_at(self, t: float):
        jt = Jet(t, (1.0,), 0.0)
        return [primal(jdx(c(jt), 0)) for c in self.components]


@dataclass(frozen=True)
class LiftMorphism:
    """Fiber-to-frame column g[alpha](x), optionally with a stated left
    inverse gtilde[alpha](x)."""

    p: int
    g: tuple                  # p SmoothFields on M
    gtilde: tuple | None = None

    def g_at(self, xs):
        return [f(xs, 0.0) for f in self.g]

    def gtilde_at(self, xs):
        if self.gtilde is None:
            return None
        return [f(xs, 0.0) for f in self.gtilde]


@dataclass(frozen=True)
class LiftState:
    t: float
    state: tuple

    def __post_init__(self):
        object.__setattr__(self, "state", tuple(float(v) for v in self.state))


@dataclass
class Trajectory:
    points: list                 # of LiftState
    completed: bool
    message: str = ""

    @property
    def last(self) -> LiftState:
        return self.points[-1]


def rk4_integrate(f, t0: float, t1: float, state0, steps: int) -> Trajectory:
    """Classic fixed-step RK4 on dstate/dt = f(t, state); aborts on blow-up."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = (t1 - t0) / steps
    state = tuple(float(v) for v in state0)
    points = [LiftState(t0, state)]

    def ok(vec):
        return all(math.isfinite(v) and abs(v) <= BLOWUP_LIMIT for v in vec)

    for k in range(steps):
        t = t0 + k * h
        try:
            k1 = f(t, state)
            k2 = f(t + 0.5 * h, tuple(s + 0.5 * h * d for s, d in zip(state, k1)))
            k3 = f(t + 0.5 * h, tuple(s + 0.5 * h * d for s, d in zip(state, k2)))
            k4 = f(t + h, tuple(s + h * d for s, d in zip(state, k3)))
        except (ArithmeticError, ValueError):
            return Trajectory(points, False,
                              f"state blew up after t={points[-1].t:.6g}")
        new_state = tuple(
            s + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for s, a, b, c, d in zip(state, k1, k2, k3, k4)
        )
        if not ok(new_state):
            return Trajectory(points, False,
                              f"state blew up after t={points[-1].t:.6g}")
        state = new_state
        points.append(LiftState(t0 + (k + 1) * h, state))
    return Trajectory(points, True)


def lift_condition_residual(c: BaseCurve, L: LiftMorphism, y: float,
                            A: AlgebroidData, t: float):
    """Residual vector rho^i_a(c) g^a(c) y - dc^i/dt (length m); zero iff the
    pair (g, y) reproduces the base velocity through the anchor."""
    xs = c.point_at(t)
    vel = c.velocity_at(t)
    rho = [[primal(v) for v in row] for row in A.rho_at(xs)]
    g = [primal(v) for v in L.g_at(xs)]
    return [
        sum(rho[a][i] * g[a] for a in range(A.p)) * y - vel[i]
        for i in range(A.m)
    ]


def local_invertibility_residual(L: LiftMorphism, points):
    """max |gtilde_b g^a - delta^a_b| over base points (needs gtilde)."""
    if L.gtilde is None:
        raise ValueError("lift morphism has no stated inverse")
    worst = 0.0
    for pt in points:
        g = [primal(v) for v in L.g_at(pt.x)]
        gt = [primal(v) for v in L.gtilde_at(pt.x)]
        for a in range(L.p):
            for b in range(L.p):
                worst = max(worst,
                            abs(gt[b] * g[a] - (1.0 if a == b else 0.0)))
    return worst


def integrate_parallel_lift(c: BaseCurve, L: LiftMorphism, A: AlgebroidData,
                            N: NonlinearConnection, y0: float, steps: int,
                            t0: float = 0.0, t1: float = 1.0) -> Trajectory:
    """du/dt = -Gamma_a(c(t), u) g^a(c(t)) u; state = (u,)."""

    def f(t, state):
        u = state[0]
        xs = c.point_at(t)
        gam = [primal(v) for v in N.gamma_at(xs, u)]
        g = [primal(v) for v in L.g_at(xs)]
        return (-sum(gam[a] * g[a] for a in range(A.p)) * u,)

    return rk4_integrate(f, t0, t1, (y0,), steps)


def integrate_horizontal_parallel(c: BaseCurve, L: LiftMorphism,
                                  A: AlgebroidData, N: NonlinearConnection,
                                  D: DConnectionCoeffs, z0, steps: int,
                                  t0: float = 0.0, t1: float = 1.0,
                                  y0: float = 1.0) -> Trajectory:
    """dz^a/dt = -hh^a_{bc}(c(t), u) z^b z^c, with the fiber coordinate u
    co-integrated along the parallel-lift equation (the coefficients are
    evaluated on the lifted point).  State = (z_1..z_p, u)."""
    p = A.p

    def f(t, state):
        z = state[:p]
        u = state[p]
        xs = c.point_at(t)
        Hh = [[[primal(v) for v in r2] for r2 in r1] for r1 in D.hh_at(xs, u)]
        gam = [primal(v) for v in N.gamma_at(xs, u)]
        g = [primal(v) for v in L.g_at(xs)]
        dz = [
            -sum(Hh[a][b][cc] * z[b] * z[cc] for b in range(p) for cc in range(p))
            for a in range(p)
        ]
        du = -sum(gam[a] * g[a] for a in range(p)) * u
        return tuple(dz) + (du,)

    return rk4_integrate(f, t0, t1, tuple(z0) + (y0,), steps)


def integrate_vertical_parallel(c: BaseCurve, A: AlgebroidData,
                                N: NonlinearConnection, D: DConnectionCoeffs,
                                y0: float, steps: int,
                                t0: float = 0.0, t1: float = 1.0) -> Trajectory:
    """du/dt = -vv(c(t), u) u^2; state = (u,)."""

    def f(t, state):
        u = state[0]
        xs = c.point_at(t)
        vv = primal(D.vv_at(xs, u))
        return (-vv * u * u,)

    return rk4_integrate(f, t0, t1, (y0,), steps)


def acceleration_lift(c: BaseCurve, L: LiftMorphism, A: AlgebroidData,
                      N: NonlinearConnection, y: float, dy_dt: float,
                      t: float):
    """Adapted components of the acceleration of the lifted curve:
    horizontal part z^a = g^a(c) y, vertical part dy/dt + Gamma_a z^a.
    The lift is horizontal exactly when the vertical part vanishes."""
    xs = c.point_at(t)
    g = [primal(v) for v in L.g_at(xs)]
    z = [g[a] * y for a in range(A.p)]
    gam = [primal(v) for v in N.gamma_at(xs, y)]
    v_comp = dy_dt + sum(gam[a] * z[a] for a in range(A.p))
    return z, v_comp
