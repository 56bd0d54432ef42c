"""Rational-expectations scenario: cured agents wait out the peak.

Before a sell-start time t1 nobody who recovers sells, so holdings split
into z (currently infected) and h (cured and waiting) and the price climbs
on z+h. From t1 the price is pinned at P* = clearing(z(t1)+h(t1)) while
waiting inventory transfers to newly infected buyers; the plateau closes
when the waiting stock is gone (absorbed) or when net new buying at P*
turns negative (flow-reversed). The solver shoots on t1 until the two
closing events coincide: a node-level bisection on the event order,
followed by a continuous bisection inside the final one-node bracket on
the signed leftover inventory at the flow reversal. Sub-node states come
from single partial RK4 steps, so the whole solve stays deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .epidemic import EpidemicParams
from .errors import DomainError, GridTooCoarseError, NoPlateauError
from .market import MarketTrajectory, SupplyCurve, clearing_price
from .numerics import Grid, rk4_step


@dataclass(frozen=True)
class PlateauDiagnosis:
    """Which event ended the plateau scan, and when.

    kind is 'absorbed' (waiting inventory ran out first), 'flow-reversed'
    (net buying at P* turned negative first) or 'open' (neither happened
    before the horizon end).
    """

    kind: str
    time: float
    h_value: float
    flow_value: float


@dataclass(frozen=True)
class PlateauSolution:
    t1: float
    t2: float
    p_star: float
    residual_flow: float
    residual_absorption: float
    iterations: int


@dataclass(frozen=True)
class _Closure:
    """Diagnostics of one plateau integration at a trial t1."""

    found: bool
    t2: float
    p_star: float
    phi_star: float
    residual_flow: float
    residual_absorption: float


# ---------------------------------------------------------------------------
# phase fields
# ---------------------------------------------------------------------------


def _phase1_field(params: EpidemicParams, curve: SupplyCurve):
    beta, gamma, w = params.beta, params.gamma, params.endowment
    p0, kappa = curve.p0, curve.kappa

    def field(t, y):
        s, i, r, z, h = y
        p = p0 + (z + h) / kappa
        inf = beta * i * s
        rec = gamma * i
        cure = gamma * z
        return (-inf, inf - rec, rec, inf * w / p - cure, cure)

    return field


def _phase2_field(params: EpidemicParams, p_star: float):
    beta, gamma, w = params.beta, params.gamma, params.endowment

    def field(t, y):
        s, i, r, z, h = y
        inf = beta * i * s
        rec = gamma * i
        # z and h exchange at exactly opposite rates: z+h is conserved
        flow = inf * w / p_star - gamma * z
        return (-inf, inf - rec, rec, flow, -flow)

    return field


def _phase3_field(params: EpidemicParams, curve: SupplyCurve):
    beta, gamma, w = params.beta, params.gamma, params.endowment
    p0, kappa = curve.p0, curve.kappa

    def field(t, y):
        s, i, r, z = y
        p = p0 + z / kappa
        inf = beta * i * s
        rec = gamma * i
        return (-inf, inf - rec, rec, inf * w / p - gamma * z)

    return field


def _integrate_phase1(params: EpidemicParams, curve: SupplyCurve, grid: Grid,
                      upto: int, field) -> list[tuple]:
    """Accumulation-phase states at nodes 0..upto as (s, i, r, z, h)."""
    y = (params.n1, params.n2, params.n3, 0.0, 0.0)
    nodes = [y]
    t0, h = grid.t_start, grid.dt
    for k in range(upto):
        y = rk4_step(field, t0 + k * h, y, h)
        nodes.append(y)
    return nodes


def _state_at(field1, nodes: list[tuple], grid: Grid, t1: float) -> tuple[int, tuple]:
    """Phase-1 state at (possibly off-node) time t1 via one partial step."""
    k = int((t1 - grid.t_start) / grid.dt)
    if t1 - grid.node(k) < 0.0:
        k -= 1
    if k >= len(nodes):
        raise DomainError(f"t1={t1} beyond integrated phase-1 range")
    rem = t1 - grid.node(k)
    st = nodes[k]
    if rem > 0.0:
        st = rk4_step(field1, grid.node(k), st, rem)
    return k, st


# ---------------------------------------------------------------------------
# single-shot simulation at a given t1
# ---------------------------------------------------------------------------


def simulate_re_given_t1(
    params: EpidemicParams, curve: SupplyCurve, t1: float, grid: Grid
) -> tuple[MarketTrajectory, PlateauDiagnosis]:
    """Three-phase trajectory for a trial sell-start time t1.

    t1 is normally a grid node; off-node values are accepted (the solved
    t1 is generically sub-node) and handled with partial realignment
    steps. The plateau phase ends at the first node where h <= 0 or where
    net flow at P* is <= 0, whichever fires first; from that node h is
    frozen at zero and the price clears on z alone.
    """
    if not (grid.t_start <= t1 < grid.t_end):
        raise DomainError(f"t1={t1} outside the grid [{grid.t_start}, {grid.t_end})")
    beta, gamma, w = params.beta, params.gamma, params.endowment
    p0, kappa = curve.p0, curve.kappa
    n = grid.n_steps
    dt = grid.dt

    field1 = _phase1_field(params, curve)
    k_guess = int((t1 - grid.t_start) / dt)
    if t1 - grid.node(k_guess) < 0.0:
        k_guess -= 1
    nodes1 = _integrate_phase1(params, curve, grid, k_guess, field1)
    k1, st1 = _state_at(field1, nodes1, grid, t1)
    p_star = clearing_price(st1[3] + st1[4], curve)

    size = n + 1
    s = np.empty(size)
    i_arr = np.empty(size)
    r = np.empty(size)
    z = np.empty(size)
    h = np.empty(size)
    p = np.empty(size)
    for j, st in enumerate(nodes1):
        s[j], i_arr[j], r[j], z[j], h[j] = st
        p[j] = p0 + (st[3] + st[4]) / kappa

    f2 = _phase2_field(params, p_star)
    flow1 = beta * st1[1] * st1[0] * w / p_star - gamma * st1[3]
    diag: PlateauDiagnosis | None = None
    if st1[4] <= 0.0:
        diag = PlateauDiagnosis("absorbed", t1, st1[4], flow1)
    elif flow1 <= 0.0:
        diag = PlateauDiagnosis("flow-reversed", t1, st1[4], flow1)

    plateau_start = k1 + 1
    post_start: int | None = None
    event_state = None
    event_node = None

    if diag is None:
        t_prev, st_prev = t1, st1
        j = k1 + 1
        while j <= n:
            st = rk4_step(f2, t_prev, st_prev, grid.node(j) - t_prev)
            flow = beta * st[1] * st[0] * w / p_star - gamma * st[3]
            if st[4] <= 0.0:
                diag = PlateauDiagnosis("absorbed", grid.node(j), st[4], flow)
                event_state, event_node = st, j
                break
            if flow <= 0.0:
                diag = PlateauDiagnosis("flow-reversed", grid.node(j), st[4], flow)
                event_state, event_node = st, j
                break
            s[j], i_arr[j], r[j], z[j], h[j] = st
            p[j] = p_star
            t_prev, st_prev = grid.node(j), st
            j += 1
        else:
            diag = PlateauDiagnosis("open", grid.t_end, st_prev[4],
                                    beta * st_prev[1] * st_prev[0] * w / p_star
                                    - gamma * st_prev[3])

    f3 = _phase3_field(params, curve)
    if diag.kind != "open":
        if event_node is None:
            # plateau collapsed at t1 itself; unwind from there
            st3 = (st1[0], st1[1], st1[2], st1[3])
            t_cur = t1
            post_start = k1 + 1
            start_j = k1 + 1
        else:
            st3 = (event_state[0], event_state[1], event_state[2], event_state[3])
            s[event_node], i_arr[event_node], r[event_node] = st3[0], st3[1], st3[2]
            z[event_node] = st3[3]
            h[event_node] = 0.0
            p[event_node] = clearing_price(st3[3], curve)
            t_cur = grid.node(event_node)
            post_start = event_node
            start_j = event_node + 1
        for j in range(start_j, n + 1):
            st3 = rk4_step(f3, t_cur, st3, grid.node(j) - t_cur)
            s[j], i_arr[j], r[j], z[j] = st3
            h[j] = 0.0
            p[j] = clearing_price(st3[3], curve)
            t_cur = grid.node(j)

    traj = MarketTrajectory(
        params=params, curve=curve, grid=grid, scenario="rational",
        times=grid.times(), s=s, i=i_arr, r=r, x=z + h, p=p, z=z, h=h,
        t1=t1, t2=diag.time, p_star=p_star,
        plateau_start=plateau_start, post_start=post_start,
    )
    return traj, diag


# ---------------------------------------------------------------------------
# shooting solve
# ---------------------------------------------------------------------------


def _node_diagnosis(params, curve, grid, nodes, k1) -> str:
    """Event order for t1 at grid node k1; stops at the first event."""
    beta, gamma, w = params.beta, params.gamma, params.endowment
    st1 = nodes[k1]
    if st1[4] <= 0.0:
        return "absorbed"
    p_star = clearing_price(st1[3] + st1[4], curve)
    if beta * st1[1] * st1[0] * w / p_star - gamma * st1[3] <= 0.0:
        return "flow-reversed"
    f2 = _phase2_field(params, p_star)
    st = st1
    n = grid.n_steps
    for j in range(k1 + 1, n + 1):
        st = rk4_step(f2, grid.node(j - 1), st, grid.dt)
        if st[4] <= 0.0:
            return "absorbed"
        if beta * st[1] * st[0] * w / p_star - gamma * st[3] <= 0.0:
            return "flow-reversed"
    return "open"


def _closure_at(params, curve, grid, field1, nodes, t1: float) -> _Closure:
    """Integrate the plateau from t1 to the net-flow zero crossing.

    The (s, i, z) dynamics at pinned P* do not depend on h, so the scan
    runs past h <= 0 if needed; the signed leftover h at the crossing is
    the shooting defect (negative: inventory ran out early, raise t1;
    positive: inventory left over, lower t1).
    """
    beta, gamma, w = params.beta, params.gamma, params.endowment
    k1, st1 = _state_at(field1, nodes, grid, t1)
    phi_star = st1[3] + st1[4]
    p_star = clearing_price(phi_star, curve)
    f2 = _phase2_field(params, p_star)

    t_prev, st_prev = t1, st1
    flow_prev = beta * st1[1] * st1[0] * w / p_star - gamma * st1[3]
    if flow_prev <= 0.0:
        return _Closure(True, t1, p_star, phi_star, flow_prev, st1[4])
    n = grid.n_steps
    for j in range(k1 + 1, n + 1):
        tj = grid.node(j)
        st = rk4_step(f2, t_prev, st_prev, tj - t_prev)
        flow = beta * st[1] * st[0] * w / p_star - gamma * st[3]
        if flow <= 0.0:
            frac = flow_prev / (flow_prev - flow)
            t2 = t_prev + frac * (tj - t_prev)
            st2 = st_prev
            if t2 > t_prev:
                st2 = rk4_step(f2, t_prev, st_prev, t2 - t_prev)
            resid_flow = beta * st2[1] * st2[0] * w / p_star - gamma * st2[3]
            return _Closure(True, t2, p_star, phi_star, resid_flow, st2[4])
        t_prev, st_prev, flow_prev = tj, st, flow
    return _Closure(False, grid.t_end, p_star, phi_star, flow_prev, st_prev[4])


def solve_plateau(
    params: EpidemicParams, curve: SupplyCurve, grid: Grid, tol: float = 1e-4
) -> PlateauSolution:
    """Shoot on the sell-start time until the plateau closes cleanly.

    Stage one bisects t1 over grid nodes on the event-order sign from the
    plateau scan. Stage two bisects continuously inside the final one-node
    bracket on the leftover-inventory defect until both closure residuals
    sit within half the requested tolerance: |h(t2)| <= 0.5*tol*phi(P*)
    and |flow(t2)| <= 0.5*tol*gamma*phi(P*).
    """
    if params.n2 == 0 or params.n1 <= params.threshold:
        raise NoPlateauError(
            "no boom: the contagion never grows, so no plateau exists"
        )
    field1 = _phase1_field(params, curve)
    n = grid.n_steps
    nodes = _integrate_phase1(params, curve, grid, n, field1)
    evals = 0

    def diag(k: int) -> str:
        nonlocal evals
        evals += 1
        return _node_diagnosis(params, curve, grid, nodes, k)

    lo_k, hi_k = 1, n - 1
    kind_lo, kind_hi = diag(lo_k), diag(hi_k)
    if kind_lo == kind_hi:
        raise NoPlateauError(
            f"plateau diagnosis is '{kind_lo}' across (0, {grid.t_end}): "
            f"no sign change to shoot on"
        )
    if kind_lo != "absorbed" or kind_hi != "flow-reversed":
        raise GridTooCoarseError(
            "event order is not monotone in t1 at this resolution; retry with dt/2"
        )
    while hi_k - lo_k > 1:
        mid = (lo_k + hi_k) // 2
        kind = diag(mid)
        if kind == "absorbed":
            lo_k = mid
        elif kind == "flow-reversed":
            hi_k = mid
        else:
            raise GridTooCoarseError(
                "plateau never closed before the horizon end; retry with dt/2 "
                "or extend the horizon"
            )

    t_lo, t_hi = grid.node(lo_k), grid.node(hi_k)
    for _ in range(80):
        t_mid = 0.5 * (t_lo + t_hi)
        c = _closure_at(params, curve, grid, field1, nodes, t_mid)
        evals += 1
        if not c.found:
            raise GridTooCoarseError(
                "flow never reversed before the horizon end; retry with dt/2"
            )
        if (abs(c.residual_absorption) <= 0.5 * tol * c.phi_star
                and abs(c.residual_flow) <= 0.5 * tol * params.gamma * c.phi_star):
            return PlateauSolution(
                t1=t_mid, t2=c.t2, p_star=c.p_star,
                residual_flow=c.residual_flow,
                residual_absorption=c.residual_absorption,
                iterations=evals,
            )
        if c.residual_absorption > 0.0:
            t_hi = t_mid
        else:
            t_lo = t_mid
        if t_hi - t_lo <= 1e-13 * max(1.0, t_hi):
            break
    raise GridTooCoarseError(
        f"plateau closure residuals did not reach tol={tol} at dt={grid.dt}; "
        f"retry with dt/2"
    )


def re_price_path(
    params: EpidemicParams, curve: SupplyCurve, grid: Grid, tol: float = 1e-4
) -> MarketTrajectory:
    """Solved three-phase price path with t1, t2, P* attached as metadata.

    t2 in the metadata is the sub-node flow-reversal time from the solve;
    the trajectory's phase column switches at whole nodes.
    """
    sol = solve_plateau(params, curve, grid, tol)
    traj, _diag = simulate_re_given_t1(params, curve, sol.t1, grid)
    return replace(traj, t2=sol.t2)
