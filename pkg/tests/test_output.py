"""File writers: time series, plot data, timeline, sweep table, run report."""
from __future__ import annotations

import json

import numpy as np
import pytest

from epimarket import (
    EpidemicParams,
    Grid,
    build_timeline,
    check_propositions,
    infection_peak,
    parameter_sweep,
    simulate_myopic,
)
from epimarket.errors import ConfigError
from epimarket.output import (
    RunReport,
    read_timeseries_csv,
    timeline_payload,
    write_plot_dat,
    write_report,
    write_sweep_csv,
    write_timeline_json,
    write_timeseries,
)

TIMELINE_KEYS = [
    "t_i_star", "t_p_star_m", "p_star_m", "t1", "t2", "p_star_re",
    "ordering_ok", "verdicts",
]


@pytest.fixture(scope="module")
def tiny_run(curve):
    return simulate_myopic(EpidemicParams(), curve, Grid(0.0, 0.02, 0.01))


# ---------------------------------------------------------------------------
# time series
# ---------------------------------------------------------------------------


def test_csv_layout(tmp_path, tiny_run):
    path = write_timeseries(tiny_run, "csv", tmp_path / "run.csv")
    lines = (tmp_path / "run.csv").read_text().splitlines()
    assert path == str(tmp_path / "run.csv")
    assert lines[0] == "t,S,I,R,X,P,phase"
    assert len(lines) == 4  # header + one row per node
    assert lines[1].split(",")[0] == "0.0"
    assert lines[1].endswith(",na")


def test_csv_round_trip_is_exact(tmp_path, myopic_run):
    write_timeseries(myopic_run, "csv", tmp_path / "m.csv")
    back = read_timeseries_csv(tmp_path / "m.csv")
    assert np.array_equal(back["t"], myopic_run.times)
    assert np.array_equal(back["S"], myopic_run.s)
    assert np.array_equal(back["I"], myopic_run.i)
    assert np.array_equal(back["R"], myopic_run.r)
    assert np.array_equal(back["X"], myopic_run.x)
    assert np.array_equal(back["P"], myopic_run.p)
    assert back["phase"] == ["na"] * len(myopic_run.times)


def test_repeated_writes_are_byte_identical(tmp_path, tiny_run):
    write_timeseries(tiny_run, "csv", tmp_path / "a.csv")
    write_timeseries(tiny_run, "csv", tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_json_mirror(tmp_path, tiny_run):
    write_timeseries(tiny_run, "json", tmp_path / "run.json")
    payload = json.loads((tmp_path / "run.json").read_text())
    assert sorted(payload) == sorted(["t", "S", "I", "R", "X", "P", "phase"])
    assert payload["t"] == [0.0, 0.01, 0.02]
    assert payload["P"][0] == 1.0
    assert payload["phase"] == ["na", "na", "na"]


def test_unknown_format_is_rejected(tmp_path, tiny_run):
    with pytest.raises(ConfigError):
        write_timeseries(tiny_run, "xml", tmp_path / "run.xml")


def test_read_rejects_foreign_headers(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ConfigError):
        read_timeseries_csv(bad)


def test_plot_dat_layout(tmp_path, tiny_run):
    write_plot_dat(tiny_run, tmp_path / "run.dat")
    lines = (tmp_path / "run.dat").read_text().splitlines()
    assert lines[0] == "# t P I"
    assert len(lines) == 4
    assert len(lines[1].split(" ")) == 3


# ---------------------------------------------------------------------------
# timeline and sweep
# ---------------------------------------------------------------------------


def test_timeline_json_payload(tmp_path, myopic_run, rational_run, peak):
    tl = build_timeline(myopic_run, rational_run, peak)
    verdicts = check_propositions(myopic_run, rational_run, timeline=tl).claims
    write_timeline_json(tl, verdicts, tmp_path / "timeline.json")
    payload = json.loads((tmp_path / "timeline.json").read_text())
    assert list(payload) == TIMELINE_KEYS
    assert payload["t1"] == tl.t1
    assert payload["ordering_ok"]["t2_lt_t_i_star"] is True
    assert payload["verdicts"]["re_peak_lower"] == "pass"
    assert timeline_payload(tl, verdicts) == payload


def test_sweep_csv_layout(tmp_path, params, curve, grid):
    rows = parameter_sweep(params, curve, grid, axes={"n1": [100.0]})
    rows += parameter_sweep(params, curve, grid, axes={"gamma": [-1.0]})
    write_sweep_csv(rows, tmp_path / "sweep.csv")
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:6] == ["index", "beta", "gamma", "n1", "kappa", "boom"]
    assert header[-3:] == ["refinements", "dt_used", "error"]
    assert len(header) == 22
    assert len(lines) == 3
    for ln in lines[1:]:
        assert len(ln.split(",")) == 22
    no_boom = lines[1].split(",")
    assert no_boom[5] == "false"
    error_row = lines[2].split(",")
    assert "gamma" in error_row[-1]
    assert "," not in error_row[-1]


# ---------------------------------------------------------------------------
# run report
# ---------------------------------------------------------------------------


def test_report_payload(tmp_path):
    report = RunReport(
        config_echo="beta=0.0005\n",
        scenario="myopic",
        timeline=None,
        verdicts=None,
        manifest=["myopic.csv"],
        engine_version="0.1.0",
        duration_s=1.25,
        error=None,
    )
    write_report(report, tmp_path / "report.json")
    payload = json.loads((tmp_path / "report.json").read_text())
    assert list(payload) == [
        "config", "scenario", "timeline", "manifest",
        "engine_version", "duration_s", "error",
    ]
    assert payload["timeline"] is None
    assert payload["manifest"] == ["myopic.csv"]
    assert payload["error"] is None
