"""Command-line front end.

    polarlink <command> --scenario FILE --out DIR [--seed N] [--step VOLTS]

Exit status: 0 on success, 2 for scenario/usage errors, 3 for runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .channel import LinkScenario, baseline, dbm_to_mw, range_extension, received_power
from .controller import exhaustive_sweep, grid_axis, link_probe, optimize_link, trace_grid
from .estimator import estimate_rotation
from .scenario import ConfigError, Scenario, load_scenario

log = logging.getLogger("polarlink")

COMMANDS = ("transmissive", "reflective", "heatmap", "estimate", "frequency-sweep", "power-sweep")
ISM_BAND = (2.4e9, 2.5e9)
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


@dataclass(frozen=True)
class RunManifest:
    command: str
    scenario: Path
    out: Path
    seed: int | None = None
    step: float = 1.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.step > 0:
            raise ConfigError("--step must be positive")


def num(x: float) -> float:
    """Round to 6 significant digits for output."""
    if not math.isfinite(x):
        return x
    return float(format(x, ".6g"))


def _cm(d: float) -> str:
    return format(d * 100, "g")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n", encoding="utf-8", newline="\n")


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format(v, ".6g") if isinstance(v, float) else v for v in r])


def _with_surface(s: LinkScenario) -> LinkScenario:
    if s.surface is None:
        raise ConfigError("scenario has no [surface] section (or it is disabled)")
    return s


def compare(s: LinkScenario, cfg):
    """Baseline vs optimized link at one geometry."""
    base = received_power(baseline(s))
    trace, opt = optimize_link(s, cfg)
    gain = opt.signal_dbm - base.signal_dbm
    cap_gain = opt.capacity_bits_per_s_per_hz - base.capacity_bits_per_s_per_hz
    return {
        "distance_m": num(s.tx_rx_distance),
        "bypass_fraction": num(s.effective_bypass()),
        "baseline_rx_dbm": num(base.rx_power_dbm),
        "optimized_rx_dbm": num(opt.rx_power_dbm),
        "gain_db": num(gain),
        "range_factor": num(range_extension(gain)),
        "baseline_capacity_bits_per_s_per_hz": num(base.capacity_bits_per_s_per_hz),
        "optimized_capacity_bits_per_s_per_hz": num(opt.capacity_bits_per_s_per_hz),
        "capacity_gain_bits_per_s_per_hz": num(cap_gain),
        "capacity_gain_kbits_per_s_per_hz": num(cap_gain / 1e3),
        "best_bias": {"vx": num(trace.best.vx), "vy": num(trace.best.vy)},
        "probe_calls": len(trace.entries),
        "sweep_time_s": num(trace.total_time_s),
        "residual_mismatch_deg": num(opt.mismatch_deg),
    }, trace


def run_comparison(sc: Scenario, out: Path, mode: str) -> dict:
    link = _with_surface(sc.link)
    link = link.replace(surface=link.surface.with_mode(mode))
    results = []
    for d in sc.distance_list():
        row, trace = compare(link.replace(tx_rx_distance=d), sc.controller)
        trace.to_csv(out / f"trace_{_cm(d)}cm.csv")
        results.append(row)
    report = {"schema": 1, "command": mode, "mode": mode, "results": results}
    _write_json(out / "comparison.json", report)
    return report


def run_heatmap(sc: Scenario, out: Path, step: float = 1.0) -> dict:
    link = _with_surface(sc.link)
    axis = [float(v) for v in grid_axis(step)]
    summary = []
    for d in sc.distance_list():
        s = link.replace(tx_rx_distance=d)
        trace = exhaustive_sweep(link_probe(s), step, settle_time_s=sc.controller.settle_time_s)
        grid = trace_grid(trace, len(axis))
        name = f"heatmap_{_cm(d)}cm.csv"
        rows = [[vy, *(float(p) for p in row)] for vy, row in zip(axis, grid)]
        _write_rows(out / name, ["vy\\vx", *axis], rows)
        vals = [num(float(p)) for p in grid.ravel()]
        est = estimate_rotation(s, sc.estimator.resolution, sc.estimator.alignment, sc.estimator.step)
        k = max(range(len(vals)), key=lambda i: (vals[i], -i))
        summary.append({
            "distance_m": num(d),
            "file": name,
            "max_power_dbm": max(vals),
            "min_power_dbm": min(vals),
            "argmax_bias": {"vx": axis[k % len(axis)], "vy": axis[k // len(axis)]},
            "max_rotation_deg": num(est.theta_max_rot),
            "min_rotation_deg": num(est.theta_min_rot),
        })
    report = {"schema": 1, "command": "heatmap", "step_v": step, "distances": summary}
    _write_json(out / "heatmap_summary.json", report)
    return report


def run_estimate(sc: Scenario, out: Path) -> dict:
    est = estimate_rotation(_with_surface(sc.link), sc.estimator.resolution, sc.estimator.alignment, sc.estimator.step)
    d = est.to_dict()
    for k in ("theta0_deg", "theta_min_deg", "theta_max_deg"):
        d[k] = num(d[k])
    _write_json(out / "estimate.json", d)
    return d


def run_frequency_sweep(sc: Scenario, out: Path) -> list:
    link = _with_surface(sc.link)
    freqs = sc.frequencies or (link.frequency,)
    rows = []
    for f in freqs:
        if not ISM_BAND[0] <= f <= ISM_BAND[1]:
            log.warning("frequency %.4g Hz lies outside the 2.4-2.5 GHz ISM band", f)
        s = link.replace(frequency=f)
        row, _ = compare(s, sc.controller)
        rows.append([f, link.surface.insertion_loss_at(f), row["baseline_rx_dbm"], row["optimized_rx_dbm"], row["gain_db"]])
    _write_rows(out / "frequency_sweep.csv",
                ["frequency_hz", "insertion_loss_db", "baseline_dbm", "optimized_dbm", "improvement_db"], rows)
    return rows


def find_crossover(powers, base_caps, surf_caps):
    """Lowest tx power (dBm) above which the surface never loses; None if it never loses."""
    diff = [s - b for s, b in zip(surf_caps, base_caps)]
    losing = [k for k, v in enumerate(diff) if v < 0]
    if not losing:
        return None
    k = losing[-1]
    if k == len(diff) - 1:
        return math.inf
    p0, p1, d0, d1 = powers[k], powers[k + 1], diff[k], diff[k + 1]
    return p0 + (p1 - p0) * (-d0) / (d1 - d0)


def run_power_sweep(sc: Scenario, out: Path) -> dict:
    link = _with_surface(sc.link)
    powers = sorted(sc.tx_powers_dbm or (link.tx_power_dbm,))
    rows, base_caps, surf_caps = [], [], []
    for p in powers:
        s = link.replace(tx_power_dbm=p)
        base = received_power(baseline(s))
        trace, opt = optimize_link(s, sc.controller)
        base_caps.append(base.capacity_bits_per_s_per_hz)
        surf_caps.append(opt.capacity_bits_per_s_per_hz)
        rows.append([p, dbm_to_mw(p), base.capacity_bits_per_s_per_hz, opt.capacity_bits_per_s_per_hz,
                     trace.best.vx, trace.best.vy])
    _write_rows(out / "power_sweep.csv",
                ["tx_power_dbm", "tx_power_mw", "baseline_capacity", "surface_capacity", "vx", "vy"], rows)
    cross = find_crossover(powers, base_caps, surf_caps)
    if cross is None:
        status = "surface_always_helps"
    elif math.isinf(cross):
        status = "surface_never_helps_at_max_power"
    else:
        status = "crossover"
    found = status == "crossover"
    report = {
        "schema": 1,
        "command": "power-sweep",
        "status": status,
        "crossover_dbm": num(cross) if found else None,
        "crossover_mw": num(dbm_to_mw(cross)) if found else None,
    }
    _write_json(out / "power_sweep.json", report)
    return report


def run(manifest: RunManifest):
    sc = load_scenario(manifest.scenario, manifest.seed)
    out = manifest.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from None
    cmd = manifest.command
    if cmd in ("transmissive", "reflective"):
        return run_comparison(sc, out, cmd)
    if cmd == "heatmap":
        return run_heatmap(sc, out, manifest.step)
    if cmd == "estimate":
        return run_estimate(sc, out)
    if cmd == "frequency-sweep":
        return run_frequency_sweep(sc, out)
    return run_power_sweep(sc, out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polarlink", description="Polarization-rotating surface link simulator")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--scenario", required=True, type=Path)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--seed", type=int, default=None, help="overrides rng_seed from the scenario")
    ap.add_argument("--step", type=float, default=1.0, help="heatmap voltage step (V)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run(RunManifest(args.command, args.scenario, args.out, args.seed, args.step))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
