"""SIR contagion core.

Susceptible agents catch the sentiment from infected ones at rate beta*I*S
and drop out at rate gamma. The module carries the two conserved
combinations of the flow equations (the infected and recovered first
integrals), the implicit final-size equation for the long-run recovered
mass, and sub-grid refinement of the infection peak.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryExtremumError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
)
from .numerics import (
    Bracket,
    Grid,
    find_root_bracketed,
    integrate_fixed_step,
    parabolic_vertex,
)


@dataclass(frozen=True)
class EpidemicParams:
    """Rates and initial masses of the contagion.

    endowment is the currency each newly infected agent brings to the asset
    market; it rides along here because every market scenario needs it next
    to beta and gamma.
    """

    beta: float = 5e-4
    gamma: float = 0.1
    n1: float = 999.0
    n2: float = 1.0
    n3: float = 0.0
    endowment: float = 1.0

    def __post_init__(self):
        # beta=0 is admitted as the uncoupled limit: pure recovery decay
        if not (self.beta >= 0):
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if not (self.gamma > 0):
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if not (self.n1 > 0):
            raise ConfigError(f"n1 must be > 0, got {self.n1}")
        if not (self.n2 >= 0):
            raise ConfigError(f"n2 must be >= 0, got {self.n2}")
        if not (self.n3 >= 0):
            raise ConfigError(f"n3 must be >= 0, got {self.n3}")
        if not (self.endowment > 0):
            raise ConfigError(f"endowment must be > 0, got {self.endowment}")

    @property
    def total(self) -> float:
        return self.n1 + self.n2 + self.n3

    @property
    def threshold(self) -> float:
        """gamma/beta: infections grow only while S exceeds this mass."""
        if self.beta == 0:
            return math.inf
        return self.gamma / self.beta


@dataclass(frozen=True)
class EpidemicState:
    s: float
    i: float
    r: float


@dataclass(frozen=True, eq=False)
class EpidemicTrajectory:
    params: EpidemicParams
    grid: Grid
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray

    def state_at(self, k: int) -> EpidemicState:
        return EpidemicState(float(self.s[k]), float(self.i[k]), float(self.r[k]))


@dataclass(frozen=True)
class InfectionPeak:
    """Refined interior maximum of the infected mass, if one exists."""

    t_star: float | None
    s_star: float | None
    i_star: float | None
    exists: bool


def sir_derivatives(state: EpidemicState, params: EpidemicParams) -> tuple[float, float, float]:
    """(ds, di, dr) flow rates; they sum to zero by construction."""
    inf = params.beta * state.i * state.s
    rec = params.gamma * state.i
    return (-inf, inf - rec, rec)


def simulate_epidemic(params: EpidemicParams, grid: Grid) -> EpidemicTrajectory:
    beta, gamma = params.beta, params.gamma

    def field(t, y):
        s, i, r = y
        inf = beta * i * s
        rec = gamma * i
        return (-inf, inf - rec, rec)

    rows = integrate_fixed_step(field, (params.n1, params.n2, params.n3), grid)
    return EpidemicTrajectory(
        params=params,
        grid=grid,
        times=grid.times(),
        s=rows[:, 0],
        i=rows[:, 1],
        r=rows[:, 2],
    )


# ---------------------------------------------------------------------------
# conserved quantities and the final size
# ---------------------------------------------------------------------------


def _c_infected(params: EpidemicParams) -> float:
    gb = params.threshold
    return params.n1 + params.n2 - gb * math.log(params.n1)


def _c_recovered(params: EpidemicParams) -> float:
    gb = params.threshold
    return params.n3 + gb * math.log(params.n1)


def first_integral_I(state: EpidemicState, params: EpidemicParams) -> float:
    """The infected mass implied by S alone.

    Equals I along any exact trajectory; the spread between this and the
    integrated I measures accumulated integration error.
    """
    if state.s <= 0:
        raise DomainError(f"susceptible mass must be positive, got {state.s}")
    gb = params.threshold
    if not math.isfinite(gb):
        raise DomainError("conserved combination is undefined at beta=0")
    return -state.s + gb * math.log(state.s) + _c_infected(params)


def first_integral_R(state: EpidemicState, params: EpidemicParams) -> float:
    """The recovered mass implied by S alone (mirror of first_integral_I)."""
    if state.s <= 0:
        raise DomainError(f"susceptible mass must be positive, got {state.s}")
    gb = params.threshold
    if not math.isfinite(gb):
        raise DomainError("conserved combination is undefined at beta=0")
    return -gb * math.log(state.s) + _c_recovered(params)


def steady_state_recovered(params: EpidemicParams, tol: float = 1e-10) -> float:
    """Long-run recovered mass R_inf.

    Solves R = -(gamma/beta)*ln(N-R) + C_R on the branch where the leftover
    susceptible mass N-R sits below gamma/beta (the branch the dynamics
    actually reach; the implicit equation has a second, spurious root above
    the threshold for typical parameters). n2=0 short-circuits: nothing ever
    spreads and R stays at n3 exactly.

    tol bounds the equation residual, relative to the population size when
    that exceeds 1 (near-total outbreaks leave no float with a smaller
    absolute residual); the returned root is exact to machine resolution.
    """
    if params.n2 == 0:
        return params.n3
    if params.beta == 0:
        # nothing spreads; the seed infection simply recovers
        return params.n3 + params.n2
    n_total = params.total
    gb = params.threshold
    c_r = _c_recovered(params)

    def g(r: float) -> float:
        return r + gb * math.log(n_total - r) - c_r

    lo = max(n_total - gb, params.n3)
    hi = n_total * (1.0 - 1e-12)
    g_lo, g_hi = g(lo), g(hi)
    # g is strictly decreasing on [lo, hi]; a valid bracket has g_lo >= 0 >= g_hi
    if g_lo == 0.0:
        return lo
    if g_hi > 0.0:
        # near-total outbreak: the leftover susceptible mass is below the
        # bracket's floor of 1e-12*N, where ln(N-R) has no resolution left.
        # Solve the same relation for that mass directly via the fixed
        # point s = exp((C_R - N + s)/(gamma/beta)); contraction rate s/gb.
        s = 0.0
        for _ in range(100):
            s_next = math.exp((c_r - n_total + s) / gb)
            if s_next == s:
                break
            s = s_next
        return n_total - s
    if g_lo < 0.0:
        raise ConvergenceError(
            f"no bracket for the final-size root on [{lo}, {hi}]: "
            f"g(lo)={g_lo}, g(hi)={g_hi}"
        )
    bracket = Bracket(lo, hi, g_lo, g_hi)
    return find_root_bracketed(g, bracket, tol_x=0.0, max_iter=200,
                               tol_f=tol * max(1.0, n_total))


# ---------------------------------------------------------------------------
# infection peak
# ---------------------------------------------------------------------------


def infection_peak(params: EpidemicParams, trajectory: EpidemicTrajectory) -> InfectionPeak:
    """Sub-grid refinement of the interior maximum of I.

    A peak exists only when the initial susceptible mass exceeds
    gamma/beta and some infection is seeded (n2 > 0); otherwise I never
    grows and the detector reports no peak rather than a boundary value.
    """
    if trajectory.params != params:
        raise ConsistencyError("trajectory was produced with different parameters")
    if params.n1 <= params.threshold or params.n2 == 0:
        return InfectionPeak(t_star=None, s_star=None, i_star=None, exists=False)

    i_arr = trajectory.i
    k = int(np.argmax(i_arr))
    if k == 0 or k == len(i_arr) - 1:
        raise BoundaryExtremumError(
            f"infected maximum sits on the grid boundary (node {k}); "
            f"the horizon is too short to contain the peak"
        )
    t = trajectory.times
    t_star, i_star = parabolic_vertex(
        float(t[k - 1]), float(i_arr[k - 1]),
        float(t[k]), float(i_arr[k]),
        float(t[k + 1]), float(i_arr[k + 1]),
    )
    # quadratic (Newton-form) interpolation of S at the refined time
    s0, s1, s2 = float(trajectory.s[k - 1]), float(trajectory.s[k]), float(trajectory.s[k + 1])
    t0, t1v, t2v = float(t[k - 1]), float(t[k]), float(t[k + 1])
    c1 = (s1 - s0) / (t1v - t0)
    c2 = ((s2 - s1) / (t2v - t1v) - c1) / (t2v - t0)
    s_star = s0 + c1 * (t_star - t0) + c2 * (t_star - t0) * (t_star - t1v)
    return InfectionPeak(t_star=t_star, s_star=s_star, i_star=i_star, exists=True)
