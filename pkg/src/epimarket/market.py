"""Asset market driven by the contagion.

Newly infected agents spend their endowment on shares at the going price;
recovered agents liquidate at rate gamma. Aggregate speculative holdings x
clear against an exogenous linear supply curve, so the price is an exact
closed-form function of x. The euphoric scenario integrates the holdings
ODE directly; the depressive scenario is its exact sign-mirror; a
trapezoid quadrature of the underlying cohort integral serves as an
independent oracle for the state variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .epidemic import EpidemicParams, EpidemicState, EpidemicTrajectory
from .errors import ConfigError, ConsistencyError, DomainError, PriceFloorError
from .numerics import Grid, integrate_fixed_step


@dataclass(frozen=True)
class SupplyCurve:
    """Excess supply phi(p) = kappa*(p - p0): zero at the baseline price,
    strictly increasing, exactly invertible."""

    p0: float = 1.0
    kappa: float = 10.0
    form: str = "linear"

    def __post_init__(self):
        if not (self.p0 > 0):
            raise ConfigError(f"p0 must be > 0, got {self.p0}")
        if not (self.kappa > 0):
            raise ConfigError(f"kappa must be > 0, got {self.kappa}")
        if self.form != "linear":
            raise ConfigError(f"unsupported supply curve form '{self.form}'")


def excess_supply(p: float, curve: SupplyCurve) -> float:
    if p <= 0:
        raise DomainError(f"price must be positive, got {p}")
    return curve.kappa * (p - curve.p0)


def clearing_price(x: float, curve: SupplyCurve) -> float:
    """Price at which supply absorbs holdings x; exact inverse of the
    linear curve. Holdings at or below -kappa*p0 would need a zero or
    negative price, which is a parameter misconfiguration, never clamped.
    """
    if x <= -curve.kappa * curve.p0:
        raise PriceFloorError(
            f"holdings x={x} drive the clearing price to or below zero "
            f"(floor at x={-curve.kappa * curve.p0})"
        )
    return curve.p0 + x / curve.kappa


@dataclass(frozen=True)
class MarketState:
    epidemic: EpidemicState
    x: float
    p: float


@dataclass(frozen=True, eq=False)
class MarketTrajectory:
    """Node-aligned market history.

    x is total speculative holdings; for the rational scenario it splits
    into z (held by the currently infected) and h (held by cured agents
    waiting out the plateau), and the plateau metadata t1/t2/p_star plus
    the two phase-boundary node indices are populated.
    """

    params: EpidemicParams
    curve: SupplyCurve
    grid: Grid
    scenario: str
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray
    x: np.ndarray
    p: np.ndarray
    z: np.ndarray | None = None
    h: np.ndarray | None = None
    t1: float | None = None
    t2: float | None = None
    p_star: float | None = None
    plateau_start: int | None = None
    post_start: int | None = None

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, k: int) -> MarketState:
        return MarketState(
            epidemic=EpidemicState(float(self.s[k]), float(self.i[k]), float(self.r[k])),
            x=float(self.x[k]),
            p=float(self.p[k]),
        )

    def nodes(self) -> Iterator[tuple[float, MarketState]]:
        for k in range(len(self.times)):
            yield float(self.times[k]), self.state_at(k)

    def epidemic_view(self) -> EpidemicTrajectory:
        return EpidemicTrajectory(
            params=self.params, grid=self.grid, times=self.times,
            s=self.s, i=self.i, r=self.r,
        )

    def phases(self) -> list[str]:
        """Per-node phase labels for serialization.

        Non-rational scenarios are all 'na'. Rational runs are 'pre' up to
        the sell-start time, 'plateau' strictly inside it, and 'post' from
        the node where the plateau closed.
        """
        n = len(self.times)
        if self.scenario != "rational" or self.plateau_start is None:
            return ["na"] * n
        post = self.post_start if self.post_start is not None else n
        labels = []
        for k in range(n):
            if k < self.plateau_start:
                labels.append("pre")
            elif k < post:
                labels.append("plateau")
            else:
                labels.append("post")
        return labels


# ---------------------------------------------------------------------------
# scenario integrators
# ---------------------------------------------------------------------------


def simulate_myopic(params: EpidemicParams, curve: SupplyCurve, grid: Grid) -> MarketTrajectory:
    """Euphoria with immediate liquidation on recovery.

    State equation for holdings: dx = beta*I*S*w/P - gamma*x, the
    exponential-kernel reduction of the cohort integral, with
    P = p0 + x/kappa evaluated at every integration stage.
    """
    beta, gamma, w = params.beta, params.gamma, params.endowment
    p0, kappa = curve.p0, curve.kappa
    floor = -kappa * p0

    def field(t, y):
        s, i, r, x = y
        if x <= floor:
            raise PriceFloorError(
                f"clearing price hit zero at t={t} (x={x})", time=t
            )
        p = p0 + x / kappa
        inf = beta * i * s
        rec = gamma * i
        return (-inf, inf - rec, rec, inf * w / p - gamma * x)

    rows = integrate_fixed_step(field, (params.n1, params.n2, params.n3, 0.0), grid)
    x = rows[:, 3]
    return MarketTrajectory(
        params=params, curve=curve, grid=grid, scenario="myopic",
        times=grid.times(), s=rows[:, 0], i=rows[:, 1], r=rows[:, 2],
        x=x, p=p0 + x / kappa,
    )


def simulate_depression(params: EpidemicParams, curve: SupplyCurve, grid: Grid) -> MarketTrajectory:
    """Pessimism spreading: infected agents short, recovered agents cover.

    The drive term divides by the reflected price 2*p0 - P rather than P,
    which makes the run the exact sign-mirror of the euphoric one:
    x(t) = -x_boom(t) and P(t) = 2*p0 - P_boom(t) node for node. The price
    floor therefore binds exactly when the mirrored boom would have peaked
    at or above 2*p0; that is a hard error, not a clamp.
    """
    beta, gamma, w = params.beta, params.gamma, params.endowment
    p0, kappa = curve.p0, curve.kappa
    floor = -kappa * p0

    def field(t, y):
        s, i, r, x = y
        if x <= floor:
            raise PriceFloorError(
                f"clearing price hit zero at t={t} (x={x})", time=t
            )
        mirrored = 2.0 * p0 - (p0 + x / kappa)
        inf = beta * i * s
        rec = gamma * i
        return (-inf, inf - rec, rec, -inf * w / mirrored - gamma * x)

    rows = integrate_fixed_step(field, (params.n1, params.n2, params.n3, 0.0), grid)
    x = rows[:, 3]
    return MarketTrajectory(
        params=params, curve=curve, grid=grid, scenario="depression",
        times=grid.times(), s=rows[:, 0], i=rows[:, 1], r=rows[:, 2],
        x=x, p=p0 + x / kappa,
    )


# ---------------------------------------------------------------------------
# cohort-integral oracle
# ---------------------------------------------------------------------------


def _demand_integrand(trajectory: MarketTrajectory, params: EpidemicParams) -> np.ndarray:
    """Per-node share-purchase rate of the freshly infected cohort."""
    w = params.endowment
    rate = params.beta * trajectory.i * trajectory.s * w
    if trajectory.scenario == "myopic":
        return rate / trajectory.p
    if trajectory.scenario == "depression":
        return -rate / (2.0 * trajectory.curve.p0 - trajectory.p)
    raise DomainError(
        f"cohort quadrature is defined for myopic and depression runs, "
        f"not '{trajectory.scenario}'"
    )


def cohort_holdings_quadrature(
    trajectory: MarketTrajectory, params: EpidemicParams, t: float
) -> float:
    """Trapezoid of the cohort integral at grid node t.

    Integrates the purchase rate against the exp(-gamma*(t-v)) survival
    kernel using the stored I, S, P history; an independent check on the
    ODE state x, never used by the integrator itself.
    """
    if trajectory.params != params:
        raise ConsistencyError("trajectory was produced with different parameters")
    k = trajectory.grid.index_at(t)
    if k == 0:
        return 0.0
    u = _demand_integrand(trajectory, params)[: k + 1]
    tk = trajectory.times[k]
    g = u * np.exp(-params.gamma * (tk - trajectory.times[: k + 1]))
    return float(trajectory.grid.dt * (g.sum() - 0.5 * (g[0] + g[-1])))


def cohort_holdings_profile(
    trajectory: MarketTrajectory, params: EpidemicParams
) -> np.ndarray:
    """cohort_holdings_quadrature at every node in one O(n) pass.

    Uses the recurrence X(t+dt) = exp(-gamma*dt)*X(t) + local trapezoid,
    which reproduces the global trapezoid exactly (up to rounding) while
    staying stable for any gamma*t.
    """
    if trajectory.params != params:
        raise ConsistencyError("trajectory was produced with different parameters")
    u = _demand_integrand(trajectory, params)
    dt = trajectory.grid.dt
    decay = math.exp(-params.gamma * dt)
    half = 0.5 * dt
    out = np.empty(len(u))
    out[0] = 0.0
    acc = 0.0
    for j in range(1, len(u)):
        acc = acc * decay + half * (u[j - 1] * decay + u[j])
        out[j] = acc
    return out
