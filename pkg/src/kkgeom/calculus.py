"""Exact forward-mode differentiation for scalar fields on E = M x K.

Points on E carry base coordinates x1..xm and one fiber coordinate y0.
Derivatives are obtained by evaluating fields on Jet-valued coordinates:
a Jet carries a value together with all first partials (d/dx1..d/dxm,
d/dy0).  Nesting Jets inside Jets yields exact second and third partials,
which is all the downstream identity suites ever need.

Everything here is immutable and evaluation is pure, so fields can be
evaluated concurrently and results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

__all__ = [
    "EvaluationDomainError",
    "EPoint",
    "Jet",
    "SmoothField",
    "Scalar",
    "partial",
    "fd_partial",
    "gradient",
    "seeded_point",
    "jval",
    "jdx",
    "jdy",
    "primal",
    "fsin",
    "fcos",
    "ftan",
    "fexp",
    "flog",
    "fsqrt",
    "fabs_",
    "fpow",
]

# A scalar is either a float or a Jet whose components are scalars.
Scalar = object

DEFAULT_FD_STEP = 1e-5


class EvaluationDomainError(ValueError):
    """A field was evaluated outside its domain (log <= 0, x/0, overflow...).

    Carries the offending point when raised inside a sampling loop.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class EPoint:
    """A point of E: base coordinates ``x`` (length m) and fiber coordinate ``y``."""

    x: tuple
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", float(self.y))
        if not all(math.isfinite(v) for v in self.x) or not math.isfinite(self.y):
            raise ValueError(f"non-finite point coordinates: {self.x}, {self.y}")

    @property
    def m(self):
        return len(self.x)

    def as_list(self):
        return list(self.x) + [self.y]


def primal(s):
    """Fully unwrap a (possibly nested) Jet down to its underlying float."""
    while isinstance(s, Jet):
        s = s.value
    return s


def jval(s):
    return s.value if isinstance(s, Jet) else s


def jdx(s, i):
    return s.dx[i] if isinstance(s, Jet) else 0.0


def jdy(s):
    return s.dy if isinstance(s, Jet) else 0.0


class Jet:
    """Truncated first-order jet: value plus partials (dx1..dxm, dy).

    Components may themselves be Jets, which is how higher derivatives are
    taken.  Arithmetic follows the product/chain rules exactly (to IEEE
    rounding); mixed float/Jet arithmetic promotes the float to a constant.
    """

    __slots__ = ("value", "dx", "dy")

    def __init__(self, value, dx, dy):
        self.value = value
        self.dx = tuple(dx)
        self.dy = dy

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.value + other.value,
                tuple(a + b for a, b in zip(self.dx, other.dx)),
                self.dy + other.dy,
            )
        return Jet(self.value + other, self.dx, self.dy)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.value - other.value,
                tuple(a - b for a, b in zip(self.dx, other.dx)),
                self.dy - other.dy,
            )
        return Jet(self.value - other, self.dx, self.dy)

    def __rsub__(self, other):
        return Jet(other - self.value, tuple(-a for a in self.dx), -self.dy)

    def __mul__(self, other):
        if isinstance(other, Jet):
            u, v = self.value, other.value
            return Jet(
                u * v,
                tuple(a * v + u * b for a, b in zip(self.dx, other.dx)),
                self.dy * v + u * other.dy,
            )
        return Jet(self.value * other, tuple(a * other for a in self.dx), self.dy * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # Values divide directly so Jet evaluation matches float evaluation
        # bit-for-bit; only derivative coefficients go through _recip.
        if isinstance(other, Jet):
            if primal(other.value) == 0.0:
                raise EvaluationDomainError("division by zero")
            u, v = self.value, other.value
            inv2 = _recip(v * v)
            return Jet(
                _jdiv(u, v),
                tuple((a * v - u * b) * inv2 for a, b in zip(self.dx, other.dx)),
                (self.dy * v - u * other.dy) * inv2,
            )
        if primal(other) == 0.0:
            raise EvaluationDomainError("division by zero")
        return Jet(
            _jdiv(self.value, other),
            tuple(_jdiv(a, other) for a in self.dx),
            _jdiv(self.dy, other),
        )

    def __rtruediv__(self, other):
        if primal(self.value) == 0.0:
            raise EvaluationDomainError("division by zero")
        u = self.value
        factor = (-other) * _recip(u * u)
        return Jet(_jdiv(other, u), tuple(a * factor for a in self.dx), self.dy * factor)

    def __neg__(self):
        return Jet(-self.value, tuple(-a for a in self.dx), -self.dy)

    def __pos__(self):
        return self

    def __pow__(self, expo):
        return fpow(self, expo)

    def __rpow__(self, base):
        return fpow(base, self)

    def __abs__(self):
        return fabs_(self)

    def __repr__(self):
        return f"Jet({self.value!r}, dx={self.dx!r}, dy={self.dy!r})"

    def chain(self, fv, dfv):
        """Apply a scalar function with value fv and derivative dfv at self.value."""
        return Jet(fv, tuple(dfv * a for a in self.dx), dfv * self.dy)


def _jdiv(a, b):
    """a / b for floats or Jets, delegating to Jet division where needed."""
    if isinstance(a, Jet) or isinstance(b, Jet):
        if not isinstance(a, Jet):
            m = len(b.dx)
            a = Jet(a, (0.0,) * m, 0.0)
        return a / b
    if b == 0.0:
        raise EvaluationDomainError("division by zero")
    return a / b


def _recip(v):
    if isinstance(v, Jet):
        if primal(v.value) == 0.0:
            raise EvaluationDomainError("division by zero")
        inv = _recip(v.value)
        factor = -(inv * inv)
        return Jet(inv, tuple(a * factor for a in v.dx), v.dy * factor)
    if v == 0.0:
        raise EvaluationDomainError("division by zero")
    return 1.0 / v


# -- scalar function dispatchers (float or Jet, any nesting depth) ----------


def fsin(u):
    if isinstance(u, Jet):
        return u.chain(fsin(u.value), fcos(u.value))
    return math.sin(u)


def fcos(u):
    if isinstance(u, Jet):
        return u.chain(fcos(u.value), -fsin(u.value))
    return math.cos(u)


def ftan(u):
    if isinstance(u, Jet):
        c = fcos(u.value)
        return u.chain(ftan(u.value), _recip(c * c))
    return math.tan(u)


def fexp(u):
    if isinstance(u, Jet):
        ev = fexp(u.value)
        return u.chain(ev, ev)
    try:
        return math.exp(u)
    except OverflowError as exc:
        raise EvaluationDomainError(f"exp overflow at {u!r}") from exc


def flog(u):
    if primal(u) <= 0.0:
        raise EvaluationDomainError(f"log of non-positive value {primal(u)!r}")
    if isinstance(u, Jet):
        return u.chain(flog(u.value), _recip(u.value))
    return math.log(u)


def fsqrt(u):
    if primal(u) < 0.0:
        raise EvaluationDomainError(f"sqrt of negative value {primal(u)!r}")
    if isinstance(u, Jet):
        if primal(u.value) == 0.0:
            raise EvaluationDomainError("sqrt derivative singular at 0")
        sv = fsqrt(u.value)
        return u.chain(sv, 0.5 * _recip(sv))
    return math.sqrt(u)


def fabs_(u):
    if isinstance(u, Jet):
        sign = math.copysign(1.0, primal(u.value)) if primal(u.value) != 0.0 else 0.0
        return u.chain(fabs_(u.value), sign)
    return abs(u)


def fpow(base, expo):
    """base ** expo for floats or Jets.

    Integer-valued constant exponents use the power rule (valid for any
    base); everything else routes through exp(expo * log base).
    """
    if not isinstance(expo, Jet):
        e = float(expo)
        if e == int(e):
            return _ipow(base, int(e))
        if primal(base) <= 0.0:
            raise EvaluationDomainError(
                f"non-integer power of non-positive base {primal(base)!r}"
            )
        if isinstance(base, Jet):
            fv = fpow(base.value, e)
            return base.chain(fv, e * fpow(base.value, e - 1.0))
        return math.pow(base, e)
    # exponent carries derivatives: a^b = exp(b log a), needs a > 0
    if primal(base) <= 0.0:
        raise EvaluationDomainError(
            f"power with varying exponent needs positive base, got {primal(base)!r}"
        )
    return fexp(expo * flog(base))


def _ipow(base, n):
    if n == 0:
        return 1.0
    if n < 0:
        return _recip(_ipow(base, -n))
    result = base
    for _ in range(n - 1):
        result = result * base
    return result


class SmoothField:
    """A scalar field on E, evaluatable on float or Jet coordinates.

    Wraps a function of ``(xs, y)`` where ``xs`` is a length-m sequence.
    The same arithmetic path is used for floats and Jets, so the value
    component of a Jet evaluation is bit-identical to a float evaluation.
    """

    __slots__ = ("_fn", "m", "name")

    def __init__(self, fn: Callable, m: int, name: str = ""):
        self._fn = fn
        self.m = m
        self.name = name

    def __call__(self, xs: Sequence, y) -> Scalar:
        return self._fn(xs, y)

    def at(self, p: EPoint) -> float:
        v = self._fn(p.x, p.y)
        v = primal(v)
        if not math.isfinite(v):
            raise EvaluationDomainError(f"non-finite field value at {p}", point=p)
        return v

    @staticmethod
    def constant(c: float, m: int) -> "SmoothField":
        return SmoothField(lambda xs, y: c, m, name=repr(c))


def seeded_point(xs, y):
    """Coordinates seeded for all m+1 first-derivative directions at once."""
    m = len(xs)
    jxs = tuple(
        Jet(xs[i], tuple(1.0 if j == i else 0.0 for j in range(m)), 0.0)
        for i in range(m)
    )
    jy = Jet(y, (0.0,) * m, 1.0)
    return jxs, jy


def gradient(f, xs, y):
    """(value, [df/dx1..df/dxm], df/dy) of f at possibly Jet-valued coordinates."""
    jxs, jy = seeded_point(xs, y)
    out = f(jxs, jy)
    m = len(xs)
    return jval(out), [jdx(out, i) for i in range(m)], jdy(out)


def _dir_index(dir, m):
    if dir == "v":
        return m
    i = int(dir)
    if not 1 <= i <= m:
        raise ValueError(f"direction must be 1..{m} or 'v', got {dir!r}")
    return i - 1


def partial(f: SmoothField, p: EPoint, dir) -> float:
    """Exact partial d f/d x_i (dir = 1..m) or d f/d y0 (dir = 'v') at p."""
    m = p.m
    k = _dir_index(dir, m)
    _, dxs, dy = gradient(f, p.x, p.y)
    out = dy if k == m else dxs[k]
    out = primal(out)
    if not math.isfinite(out):
        raise EvaluationDomainError(f"non-finite derivative at {p}", point=p)
    return out


def fd_partial(f: SmoothField, p: EPoint, dir, h: float = DEFAULT_FD_STEP) -> float:
    """Central finite difference (f(p + h e) - f(p - h e)) / 2h: the slow,
    independent cross-check for :func:`partial`."""
    if h <= 0.0:
        raise ValueError("step h must be positive")
    m = p.m
    k = _dir_index(dir, m)

    def shifted(sign):
        if k == m:
            return p.x, p.y + sign * h
        xs = list(p.x)
        xs[k] += sign * h
        return tuple(xs), p.y

    xa, ya = shifted(+1.0)
    xb, yb = shifted(-1.0)
    fa = primal(f(xa, ya))
    fb = primal(f(xb, yb))
    out = (fa - fb) / (2.0 * h)
    if not math.isfinite(out):
        raise EvaluationDomainError(f"non-finite finite difference at {p}", point=p)
    return out
