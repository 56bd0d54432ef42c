"""Shared numerical kernels.

Fixed-step classical RK4 over tuples of floats, bracketed scalar root
finding (bisection with secant acceleration), inversion of monotone maps,
and the three-point parabola used for sub-grid extremum refinement.

Everything here is a pure function of its inputs and bit-deterministic:
identical inputs give identical outputs, with no adaptivity and no hidden
state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    RangeError,
)

Field = Callable[[float, tuple], tuple]


# ---------------------------------------------------------------------------
# grid and bracket containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform time grid on [t_start, t_end] with step dt.

    The span must be an integer number of steps to within 1e-9 relative;
    anything else is a configuration mistake, not a rounding problem to
    paper over.
    """

    t_start: float
    t_end: float
    dt: float

    def __post_init__(self):
        if not (self.dt > 0):
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not (self.t_end > self.t_start):
            raise ConfigError(
                f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]"
            )
        span = (self.t_end - self.t_start) / self.dt
        if abs(span - round(span)) > 1e-9 * max(1.0, abs(span)):
            raise ConfigError(
                f"grid span {self.t_end - self.t_start} is not an integral "
                f"number of steps of dt={self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_steps + 1) * self.dt

    def node(self, k: int) -> float:
        return self.t_start + k * self.dt

    def index_at(self, t: float, tol: float = 1e-9) -> int:
        """Index of the grid node at time t; DomainError if t is off-grid."""
        k = int(round((t - self.t_start) / self.dt))
        if k < 0 or k > self.n_steps:
            raise DomainError(f"t={t} lies outside the grid")
        if abs(self.node(k) - t) > tol * max(1.0, abs(t)):
            raise DomainError(f"t={t} is not a grid node (dt={self.dt})")
        return k


@dataclass(frozen=True)
class Bracket:
    """A sign-change interval [lo, hi] with cached endpoint values."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise BracketError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if (self.f_lo > 0 and self.f_hi > 0) or (self.f_lo < 0 and self.f_hi < 0):
            raise BracketError(
                f"no sign change on [{self.lo}, {self.hi}]: "
                f"f(lo)={self.f_lo}, f(hi)={self.f_hi}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, f(lo), f(hi))


# ---------------------------------------------------------------------------
# RK4
# ---------------------------------------------------------------------------


def _check_stage(deriv: tuple, t: float) -> None:
    # sum is NaN/inf iff some component is non-finite (inf-inf folds to NaN)
    s = sum(deriv)
    if s - s != 0.0:
        bad = [v for v in deriv if not math.isfinite(v)]
        raise IntegrationError(
            f"non-finite derivative {bad} at t={t}", time=t
        )


def rk4_step(field: Field, t: float, y: tuple, h: float) -> tuple:
    """One classical RK4 step of size h from (t, y).

    Raises IntegrationError with the offending stage time if any stage
    derivative is non-finite.
    """
    k1 = field(t, y)
    _check_stage(k1, t)
    half = 0.5 * h
    tm = t + half
    k2 = field(tm, tuple(a + half * b for a, b in zip(y, k1)))
    _check_stage(k2, tm)
    k3 = field(tm, tuple(a + half * b for a, b in zip(y, k2)))
    _check_stage(k3, tm)
    te = t + h
    k4 = field(te, tuple(a + h * b for a, b in zip(y, k3)))
    _check_stage(k4, te)
    sixth = h / 6.0
    return tuple(
        a + sixth * (b + 2.0 * (c + d) + e)
        for a, b, c, d, e in zip(y, k1, k2, k3, k4)
    )


def integrate_fixed_step(field: Field, y0: Sequence[float], grid: Grid) -> np.ndarray:
    """Integrate field over the grid; returns one state row per node.

    The state is carried as a tuple of python floats (fast for the small
    systems here) and copied into a (n_steps+1, dim) array.
    """
    y = tuple(float(v) for v in y0)
    for v in y:
        if not math.isfinite(v):
            raise DomainError(f"initial state contains non-finite value {v}")
    n = grid.n_steps
    out = np.empty((n + 1, len(y)))
    out[0] = y
    t0 = grid.t_start
    h = grid.dt
    for k in range(n):
        y = rk4_step(field, t0 + k * h, y, h)
        out[k + 1] = y
    return out


# ---------------------------------------------------------------------------
# scalar solvers
# ---------------------------------------------------------------------------


def find_root_bracketed(
    f: Callable[[float], float],
    bracket: Bracket,
    tol_x: float = 1e-12,
    max_iter: int = 100,
    *,
    tol_f: float = 0.0,
) -> float:
    """Root of f inside the bracket.

    Bisection guarantees progress; a secant step is tried on alternate
    iterations and used only when it lands strictly inside the current
    bracket. Returns once the bracket width is <= tol_x (or |f| <= tol_f
    when tol_f > 0). The returned point never leaves [lo, hi].
    """
    lo, hi, f_lo, f_hi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    for it in range(max_iter):
        if hi - lo <= tol_x:
            return lo if abs(f_lo) <= abs(f_hi) else hi
        if it % 2 == 1 and f_hi != f_lo:
            x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if not (lo < x < hi):
                x = 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
        if not (lo < x < hi):
            # no representable point strictly inside: machine resolution
            return lo if abs(f_lo) <= abs(f_hi) else hi
        fx = f(x)
        if fx == 0.0 or (tol_f > 0.0 and abs(fx) <= tol_f):
            return x
        if (fx > 0.0) == (f_lo > 0.0):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations (bracket [{lo}, {hi}])",
        best=0.5 * (lo + hi),
    )


def invert_monotone(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> float:
    """Solve f(x) = target for strictly increasing f on [lo, hi].

    Stops when |f(x) - target| <= tol * max(1, |target|), the artifact-wide
    convention of relative tolerances above magnitude one.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > f_hi:
        raise DomainError("map is not increasing on the given interval")
    if not (f_lo <= target <= f_hi):
        raise RangeError(
            f"target {target} outside attainable range [{f_lo}, {f_hi}]"
        )
    if target == f_lo:
        return lo
    if target == f_hi:
        return hi
    scale = tol * max(1.0, abs(target))
    bracket = Bracket(lo, hi, f_lo - target, f_hi - target)
    return find_root_bracketed(
        lambda x: f(x) - target, bracket, tol_x=0.0, max_iter=200, tol_f=scale
    )


def parabolic_vertex(
    x0: float, y0: float, x1: float, y1: float, x2: float, y2: float
) -> tuple[float, float]:
    """Vertex (x, y) of the parabola through three points.

    Degenerate (collinear) samples return the middle point unchanged.
    """
    c1 = (y1 - y0) / (x1 - x0)
    c2 = ((y2 - y1) / (x2 - x1) - c1) / (x2 - x0)
    if c2 == 0.0:
        return x1, y1
    xv = 0.5 * (x0 + x1) - 0.5 * c1 / c2
    yv = y0 + c1 * (xv - x0) + c2 * (xv - x0) * (xv - x1)
    return xv, yv
