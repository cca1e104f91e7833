import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarlink.channel import LinkScenario, received_power
from polarlink.controller import (
    SweepConfig,
    SweepError,
    coarse_to_fine_sweep,
    exhaustive_cost_s,
    exhaustive_sweep,
    improvement_db,
    link_probe,
    optimize_link,
    sweep_cost_s,
    trace_grid,
)
from polarlink.metasurface import BiasSetting, RotationTable, SurfaceModel, bias_to_rotation

TABLE = RotationTable.default()


def quadratic(cx=12.0, cy=7.0):
    return lambda b: -((b.vx - cx) ** 2 + (b.vy - cy) ** 2)


def test_constant_probe():
    trace = coarse_to_fine_sweep(lambda b: -40.0)
    assert len(trace.entries) == 50
    assert trace.total_time_s == pytest.approx(1.0)
    assert sweep_cost_s(SweepConfig()) == pytest.approx(1.0)
    assert trace.best == BiasSetting(0, 0)
    assert trace.entries[-1].t_s == pytest.approx(1.0)


def test_quadratic_probe_near_optimum():
    cfg = SweepConfig()
    trace = coarse_to_fine_sweep(quadratic(), cfg)
    step = (cfg.v_max - cfg.v_min) / cfg.steps_per_axis**cfg.n_iterations
    assert abs(trace.best.vx - 12) <= step and abs(trace.best.vy - 7) <= step


def test_symmetric_window_refines_further():
    lower = coarse_to_fine_sweep(quadratic(), SweepConfig(window="lower"))
    sym = coarse_to_fine_sweep(quadratic(), SweepConfig(window="symmetric"))
    assert sym.best_power_dbm > lower.best_power_dbm


def test_lower_window_sits_below_best():
    trace = coarse_to_fine_sweep(quadratic())
    (x0, x1), (y0, y1) = trace.windows[1]
    assert (x0, x1) == pytest.approx((6.0, 12.0)) and (y0, y1) == pytest.approx((0.0, 6.0))


def test_window_voltages_clamped():
    # best at the lowest corner pushes the next window below 0 V
    trace = coarse_to_fine_sweep(lambda b: -(b.vx + b.vy))
    assert trace.windows[1][0][0] < 0
    assert all(0 <= e.bias.vx <= 30 and 0 <= e.bias.vy <= 30 for e in trace.entries)


def test_exhaustive_counts():
    trace = exhaustive_sweep(lambda b: 0.0)
    assert len(trace.entries) == 961
    assert trace.total_time_s == pytest.approx(19.22)
    assert exhaustive_cost_s(1.0) == pytest.approx(19.22)
    assert len(exhaustive_sweep(lambda b: 0.0, step=15).entries) == 9
    assert trace_grid(trace, 31).shape == (31, 31)


def test_exhaustive_scan_order():
    trace = exhaustive_sweep(lambda b: 0.0, step=15)
    assert [(e.bias.vx, e.bias.vy) for e in trace.entries[:4]] == [(0, 0), (15, 0), (30, 0), (0, 15)]


def test_link_with_41_degree_misalignment():
    s = LinkScenario(surface=SurfaceModel(), rx_orientation=41, bypass_fraction=0.0)
    trace, _ = optimize_link(s)
    assert bias_to_rotation(TABLE, trace.best) == pytest.approx(41.0, abs=3.0)
    oracle = exhaustive_sweep(link_probe(s))
    assert bias_to_rotation(TABLE, oracle.best) == pytest.approx(41.0, abs=0.5)


def test_orthogonal_link_improves():
    s = LinkScenario(surface=SurfaceModel(), bypass_fraction=0.0)
    _, report = optimize_link(s)
    assert improvement_db(s, report) >= 10


def test_matched_link_picks_least_rotation():
    s = LinkScenario(surface=SurfaceModel(), rx_orientation=0, bypass_fraction=0.0)
    best = exhaustive_sweep(link_probe(s)).best
    assert bias_to_rotation(TABLE, best) == pytest.approx(1.9)
    assert (best.vx, best.vy) == (10, 15)


def test_reflective_spread_smaller():
    s = LinkScenario(surface=SurfaceModel(), bypass_fraction=0.0)
    r = s.replace(surface=SurfaceModel(mode="reflective"))

    def spread(sc):
        p = [e.power_dbm for e in exhaustive_sweep(link_probe(sc), step=3).entries]
        return max(p) - min(p)

    assert spread(r) < spread(s)
    _, report = optimize_link(r)
    assert improvement_db(r, report) > 0


def test_optimize_needs_surface():
    with pytest.raises(ValueError):
        optimize_link(LinkScenario())


def test_probe_failure_keeps_partial_trace():
    calls = []

    def probe(b):
        calls.append(b)
        if len(calls) == 8:
            raise OSError("supply offline")
        return 0.0

    with pytest.raises(SweepError) as info:
        coarse_to_fine_sweep(probe)
    assert len(info.value.trace.entries) == 7
    assert isinstance(info.value.__cause__, OSError)


def test_attribution_lag_shifts_readings():
    readings = iter(range(100))
    trace = coarse_to_fine_sweep(lambda b: float(next(readings)), SweepConfig(attribution_lag=1))
    powers = [e.power_dbm for e in trace.entries[:4]]
    assert powers == [0.0, 0.0, 1.0, 2.0]


def test_trace_csv(tmp_path):
    trace = coarse_to_fine_sweep(quadratic())
    trace.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "index,vx,vy,power_dbm,t_s"
    assert len(lines) == 51


@pytest.mark.parametrize(
    "kw", [dict(n_iterations=0), dict(steps_per_axis=1), dict(v_min=5, v_max=5), dict(v_max=31),
           dict(settle_time_s=0), dict(window="wide"), dict(attribution_lag=-1)],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SweepConfig(**kw)


centres = st.floats(0, 30)


@given(centres, centres, st.integers(1, 3), st.integers(2, 6), st.sampled_from(["lower", "symmetric"]))
def test_call_count_and_window_shrink(cx, cy, n, t, window):
    cfg = SweepConfig(n_iterations=n, steps_per_axis=t, window=window)
    trace = coarse_to_fine_sweep(quadratic(cx, cy), cfg)
    assert len(trace.entries) == n * t * t
    assert trace.total_time_s == pytest.approx(sweep_cost_s(cfg))
    for (a, b) in zip(trace.windows, trace.windows[1:]):
        for axis in (0, 1):
            assert b[axis][1] - b[axis][0] == pytest.approx((a[axis][1] - a[axis][0]) / t)


@given(centres, centres)
def test_deterministic(cx, cy):
    a = coarse_to_fine_sweep(quadratic(cx, cy))
    b = coarse_to_fine_sweep(quadratic(cx, cy))
    assert a.entries == b.entries


@settings(max_examples=25)
@given(centres, centres, st.floats(0.1, 5))
def test_oracle_dominates_when_grid_contains_coarse_points(cx, cy, w):
    probe = lambda b: -w * (b.vx - cx) ** 2 - (b.vy - cy) ** 2
    coarse = coarse_to_fine_sweep(probe, SweepConfig(n_iterations=1, steps_per_axis=5))
    oracle = exhaustive_sweep(probe, step=2)
    assert oracle.best_power_dbm >= coarse.best_power_dbm


@given(centres, centres)
def test_best_is_global_max_of_trace(cx, cy):
    trace = coarse_to_fine_sweep(quadratic(cx, cy))
    assert trace.best_power_dbm == max(e.power_dbm for e in trace.entries)
    assert not math.isnan(trace.best_power_dbm)
