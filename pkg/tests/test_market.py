"""Supply curve, clearing, the euphoric and depressive scenarios, quadrature."""
from __future__ import annotations

import numpy as np
import pytest

from epimarket import (
    EpidemicParams,
    Grid,
    SupplyCurve,
    clearing_price,
    cohort_holdings_profile,
    cohort_holdings_quadrature,
    excess_supply,
    simulate_depression,
    simulate_epidemic,
    simulate_myopic,
)
from epimarket.analysis import refine_peak
from epimarket.errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    PriceFloorError,
)


# ---------------------------------------------------------------------------
# supply curve and clearing
# ---------------------------------------------------------------------------


def test_curve_rejects_bad_values():
    with pytest.raises(ConfigError):
        SupplyCurve(p0=0.0)
    with pytest.raises(ConfigError):
        SupplyCurve(kappa=-1.0)
    with pytest.raises(ConfigError):
        SupplyCurve(form="quadratic")


def test_excess_supply_linear_form(curve):
    assert excess_supply(1.0, curve) == 0.0
    assert excess_supply(1.5, curve) == pytest.approx(5.0, rel=1e-12)
    with pytest.raises(DomainError):
        excess_supply(0.0, curve)
    with pytest.raises(DomainError):
        excess_supply(-1.0, curve)


def test_clearing_price_inverts_the_curve(curve):
    assert clearing_price(0.0, curve) == 1.0
    assert clearing_price(5.0, curve) == pytest.approx(1.5, rel=1e-12)
    assert clearing_price(-5.0, curve) == pytest.approx(0.5, rel=1e-12)
    for p in (0.2, 1.0, 3.7, 25.0):
        assert clearing_price(excess_supply(p, curve), curve) == pytest.approx(
            p, rel=1e-9
        )


def test_clearing_price_floor(curve):
    with pytest.raises(PriceFloorError):
        clearing_price(-10.0, curve)  # exactly -kappa*p0
    with pytest.raises(PriceFloorError):
        clearing_price(-11.0, curve)
    assert clearing_price(-9.99, curve) > 0.0


# ---------------------------------------------------------------------------
# myopic scenario
# ---------------------------------------------------------------------------


def test_myopic_boundary_values(curve, myopic_run):
    assert float(myopic_run.p[0]) == curve.p0
    assert float(myopic_run.x[0]) == 0.0
    assert abs(float(myopic_run.p[-1]) - curve.p0) <= 0.01 * curve.p0


def test_myopic_price_peak_values(myopic_run):
    t_p, p_p = refine_peak(myopic_run.times, myopic_run.p, mode="max")
    assert t_p == pytest.approx(19.886189, abs=1e-4)
    assert p_p == pytest.approx(8.474567, abs=1e-4)


def test_myopic_clearing_holds_at_every_node(curve, myopic_run):
    resid = np.abs(curve.kappa * (myopic_run.p - curve.p0) - myopic_run.x)
    scale = np.maximum(1.0, np.abs(myopic_run.x))
    assert float((resid / scale).max()) <= 1e-9


def test_myopic_embeds_the_pure_epidemic(params, grid, epidemic_run, myopic_run):
    # the market never feeds back into the contagion, so the embedded
    # S, I, R paths must be bit-identical to the standalone integration
    assert np.array_equal(myopic_run.s, epidemic_run.s)
    assert np.array_equal(myopic_run.i, epidemic_run.i)
    assert np.array_equal(myopic_run.r, epidemic_run.r)


def test_myopic_without_seed_is_flat(curve):
    p = EpidemicParams(n2=0.0, n1=1000.0)
    traj = simulate_myopic(p, curve, Grid(0.0, 50.0, 1e-2))
    assert np.all(traj.p == curve.p0)
    assert np.all(traj.x == 0.0)


def test_myopic_beta_zero_never_buys(curve):
    p = EpidemicParams(beta=0.0)
    traj = simulate_myopic(p, curve, Grid(0.0, 50.0, 1e-2))
    assert np.all(traj.x == 0.0)
    assert np.all(traj.p == curve.p0)


def test_myopic_peak_height_falls_with_deeper_markets(params, grid):
    peaks = []
    for kappa in (5.0, 10.0, 20.0):
        traj = simulate_myopic(params, SupplyCurve(kappa=kappa), grid)
        peaks.append(refine_peak(traj.times, traj.p, mode="max")[1])
    assert peaks[0] > peaks[1] > peaks[2]


# ---------------------------------------------------------------------------
# cohort quadrature oracle
# ---------------------------------------------------------------------------


def test_quadrature_empty_at_zero(params, myopic_run):
    assert cohort_holdings_quadrature(myopic_run, params, 0.0) == 0.0


def test_quadrature_matches_state_at_price_peak(params, grid, myopic_run):
    t_p, _ = refine_peak(myopic_run.times, myopic_run.p, mode="max")
    k = int(round(t_p / grid.dt))
    q = cohort_holdings_quadrature(myopic_run, params, grid.node(k))
    x = float(myopic_run.x[k])
    assert q == pytest.approx(x, rel=1e-4)


def test_quadrature_rejects_off_grid_time(params, myopic_run):
    with pytest.raises(DomainError):
        cohort_holdings_quadrature(myopic_run, params, 0.005)


def test_quadrature_rejects_mismatched_params(myopic_run):
    with pytest.raises(ConsistencyError):
        cohort_holdings_quadrature(myopic_run, EpidemicParams(beta=6e-4), 1.0)


def test_quadrature_no_recovery_limit(curve):
    # with gamma ~ 0 the kernel is flat and holdings are cumulative buying
    p = EpidemicParams(gamma=1e-9)
    g = Grid(0.0, 50.0, 1e-2)
    traj = simulate_myopic(p, curve, g)
    for k in (1000, 2500, 5000):
        q = cohort_holdings_quadrature(traj, p, g.node(k))
        x = float(traj.x[k])
        assert q == pytest.approx(x, rel=1e-4)


def test_profile_agrees_with_pointwise_quadrature(params, grid, myopic_run):
    prof = cohort_holdings_profile(myopic_run, params)
    assert prof[0] == 0.0
    for k in (1, 500, 2116, 10000, 30000):
        q = cohort_holdings_quadrature(myopic_run, params, grid.node(k))
        assert abs(prof[k] - q) <= 1e-9 * max(1.0, abs(q))


# ---------------------------------------------------------------------------
# depression scenario
# ---------------------------------------------------------------------------


def test_depression_is_the_exact_mirror(params, grid):
    deep = SupplyCurve(kappa=400.0)
    bust = simulate_depression(params, deep, grid)
    boom = simulate_myopic(params, deep, grid)
    assert float(np.abs(bust.x + boom.x).max()) <= 1e-12
    assert float(np.abs(bust.p - (2.0 * deep.p0 - boom.p)).max()) <= 1e-12


def test_depression_trough_and_recovery(params, grid):
    deep = SupplyCurve(kappa=400.0)
    bust = simulate_depression(params, deep, grid)
    t_t, p_t = refine_peak(bust.times, bust.p, mode="min")
    assert t_t == pytest.approx(20.5475, abs=1e-3)
    assert p_t == pytest.approx(0.224340, abs=1e-4)
    assert p_t > 0.0
    assert abs(float(bust.p[-1]) - deep.p0) <= 0.01 * deep.p0
    assert float(np.abs(deep.kappa * (bust.p - deep.p0) - bust.x).max()) <= 1e-6


def test_depression_floors_in_shallow_markets(params, grid):
    # the boom peak exceeds 2*p0 here, so the mirrored trough would need a
    # negative price; the guard must fire rather than clamp
    with pytest.raises(PriceFloorError):
        simulate_depression(params, SupplyCurve(kappa=1.0), grid)
    with pytest.raises(PriceFloorError):
        simulate_depression(params, SupplyCurve(kappa=100.0), grid)


def test_depression_without_seed_is_flat(curve):
    p = EpidemicParams(n2=0.0, n1=1000.0)
    traj = simulate_depression(p, curve, Grid(0.0, 50.0, 1e-2))
    assert np.all(traj.p == curve.p0)
