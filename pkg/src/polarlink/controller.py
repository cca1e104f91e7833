"""Closed-loop bias-voltage search.

``coarse_to_fine_sweep`` evaluates a T x T grid per iteration and then narrows
each axis to the coarse cell just below the best point, so refinement always
moves toward lower voltages. ``window="symmetric"`` centres the next window on
the best point instead; it is not the default.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import LinkReport, LinkScenario, baseline, received_power
from .metasurface import V_RANGE, BiasSetting

MeasurementProbe = Callable[[BiasSetting], float]


@dataclass(frozen=True)
class SweepConfig:
    n_iterations: int = 2
    steps_per_axis: int = 5
    v_min: float = 0.0
    v_max: float = 30.0
    settle_time_s: float = 0.02  # 50 Hz supply switching
    window: str = "lower"
    attribution_lag: int = 0

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")
        if self.steps_per_axis < 2:
            raise ValueError("steps_per_axis must be >= 2")
        if not (V_RANGE[0] <= self.v_min < self.v_max <= V_RANGE[1]):
            raise ValueError(f"need {V_RANGE[0]} <= v_min < v_max <= {V_RANGE[1]}")
        if not self.settle_time_s > 0:
            raise ValueError("settle_time_s must be positive")
        if self.window not in ("lower", "symmetric"):
            raise ValueError("window must be 'lower' or 'symmetric'")
        if self.attribution_lag < 0:
            raise ValueError("attribution_lag must be >= 0")


@dataclass(frozen=True)
class TraceEntry:
    bias: BiasSetting
    power_dbm: float
    t_s: float


@dataclass
class SweepTrace:
    entries: list = field(default_factory=list)
    settle_time_s: float = 0.02
    windows: list = field(default_factory=list)  # per iteration: ((x_lo, x_hi), (y_lo, y_hi))

    @property
    def best_index(self) -> int:
        # first maximum in scan order
        best = 0
        for k, e in enumerate(self.entries):
            if e.power_dbm > self.entries[best].power_dbm:
                best = k
        return best

    @property
    def best(self) -> BiasSetting:
        return self.entries[self.best_index].bias

    @property
    def best_power_dbm(self) -> float:
        return self.entries[self.best_index].power_dbm

    @property
    def total_time_s(self) -> float:
        return len(self.entries) * self.settle_time_s

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "vx", "vy", "power_dbm", "t_s"])
            for k, e in enumerate(self.entries):
                w.writerow([k, _g(e.bias.vx), _g(e.bias.vy), _g(e.power_dbm), _g(e.t_s)])


def _g(x: float) -> str:
    return format(x, ".6g")


class SweepError(RuntimeError):
    """A probe call failed mid-sweep; ``trace`` holds what was measured so far."""

    def __init__(self, message: str, trace: SweepTrace):
        super().__init__(message)
        self.trace = trace


class _Recorder:
    def __init__(self, probe: MeasurementProbe, settle_time_s: float, lag: int = 0):
        self.probe = probe
        self.trace = SweepTrace(settle_time_s=settle_time_s)
        self.lag = lag
        self._readings: list[float] = []

    def __call__(self, vx: float, vy: float) -> float:
        b = BiasSetting(_clip(vx), _clip(vy))
        try:
            reading = float(self.probe(b))
        except Exception as exc:
            raise SweepError(f"probe failed at {b}: {exc}", self.trace) from exc
        self._readings.append(reading)
        # with a lag the sample is credited to the bias applied ``lag`` states later
        k = len(self._readings) - 1
        power = self._readings[max(0, k - self.lag)]
        t = (k + 1) * self.trace.settle_time_s
        self.trace.entries.append(TraceEntry(b, power, t))
        return power


def _clip(v: float) -> float:
    return min(max(v, V_RANGE[0]), V_RANGE[1])


def coarse_to_fine_sweep(probe: MeasurementProbe, cfg: SweepConfig = SweepConfig()) -> SweepTrace:
    rec = _Recorder(probe, cfg.settle_time_s, cfg.attribution_lag)
    T = cfg.steps_per_axis
    x_lo, x_hi = cfg.v_min, cfg.v_max
    y_lo, y_hi = cfg.v_min, cfg.v_max
    for _ in range(cfg.n_iterations):
        rec.trace.windows.append(((x_lo, x_hi), (y_lo, y_hi)))
        dx, dy = (x_hi - x_lo) / T, (y_hi - y_lo) / T
        best = None
        for ty in range(T):
            vy = y_lo + ty * dy
            for tx in range(T):
                vx = x_lo + tx * dx
                p = rec(vx, vy)
                if best is None or p > best[0]:
                    best = (p, vx, vy)
        _, bx, by = best
        if cfg.window == "lower":
            x_lo, x_hi = bx - dx, bx
            y_lo, y_hi = by - dy, by
        else:
            x_lo, x_hi = bx - dx / 2, bx + dx / 2
            y_lo, y_hi = by - dy / 2, by + dy / 2
    return rec.trace


def grid_axis(step: float, v_min: float = V_RANGE[0], v_max: float = V_RANGE[1]) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(round((v_max - v_min) / step))
    return v_min + step * np.arange(n + 1)


def exhaustive_sweep(
    probe: MeasurementProbe,
    step: float = 1.0,
    v_min: float = V_RANGE[0],
    v_max: float = V_RANGE[1],
    settle_time_s: float = 0.02,
) -> SweepTrace:
    """Full grid scan, vy outer / vx inner; used as the search oracle."""
    axis = grid_axis(step, v_min, v_max)
    rec = _Recorder(probe, settle_time_s)
    for vy in axis:
        for vx in axis:
            rec(float(vx), float(vy))
    return rec.trace


def trace_grid(trace: SweepTrace, n: int) -> np.ndarray:
    """Reshape an exhaustive trace into a [vy][vx] power matrix."""
    return np.array([e.power_dbm for e in trace.entries]).reshape(n, n)


def link_probe(s: LinkScenario) -> MeasurementProbe:
    return lambda b: received_power(s, b).rx_power_dbm


def optimize_link(s: LinkScenario, cfg: SweepConfig = SweepConfig()) -> tuple[SweepTrace, LinkReport]:
    if s.surface is None:
        raise ValueError("optimize_link needs a scenario with a surface")
    trace = coarse_to_fine_sweep(link_probe(s), cfg)
    return trace, received_power(s, trace.best)


def improvement_db(s: LinkScenario, report: LinkReport) -> float:
    """Signal gain of ``report`` over the same link with the surface removed."""
    base = received_power(baseline(s))
    return report.signal_dbm - base.signal_dbm


def sweep_cost_s(cfg: SweepConfig) -> float:
    return cfg.n_iterations * cfg.steps_per_axis**2 * cfg.settle_time_s


def exhaustive_cost_s(step: float, settle_time_s: float = 0.02, v_min=V_RANGE[0], v_max=V_RANGE[1]) -> float:
    return len(grid_axis(step, v_min, v_max)) ** 2 * settle_time_s
