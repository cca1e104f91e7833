"""Recover the rotation range a surface induces, using received power only.

1. Align: turn the receiver to the orientation of strongest power with the
   surface contributing no rotation.
2. Sweep every bias pair and keep the weakest and strongest settings.
3. At each of those two settings turn the receiver again; the offsets from the
   alignment orientation are the smallest and largest induced rotations.

Offsets are folded onto [0, 90] degrees because a dipole cannot tell theta
from theta + 180, so the direction of rotation is not reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .channel import LinkScenario, dbm_to_mw, received_power
from .controller import exhaustive_sweep
from .jones import fold_axis_difference, normalize_angle
from .metasurface import BiasSetting

SPAN_DEG = 180.0


class AmbiguousSweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class OrientationSweep:
    angles: tuple
    powers: tuple  # dBm

    def __post_init__(self):
        if len(self.angles) != len(self.powers):
            raise ValueError("angles and powers differ in length")

    def argmax(self) -> float:
        lin = [dbm_to_mw(p) for p in self.powers]
        hi, lo = max(lin), min(lin)
        if hi <= 0.0 or hi - lo <= 1e-12 * hi:
            raise AmbiguousSweepError("received power does not vary with receiver orientation")
        return self.angles[lin.index(hi)]


@dataclass(frozen=True)
class RotationEstimate:
    theta0: float
    theta_min_rot: float
    theta_max_rot: float
    v_min: BiasSetting
    v_max: BiasSetting

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "theta0_deg": self.theta0,
            "theta_min_deg": self.theta_min_rot,
            "theta_max_deg": self.theta_max_rot,
            "v_min": self.v_min.as_dict(),
            "v_max": self.v_max.as_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def sweep_orientation(
    probe: Callable[[float], float], resolution: float = 1.0, start: float = -90.0
) -> OrientationSweep:
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    n = int(round(SPAN_DEG / resolution))
    angles = tuple(start + k * resolution for k in range(n + 1))
    return OrientationSweep(angles, tuple(probe(a) for a in angles))


def find_alignment(probe: Callable[[float], float], resolution: float = 1.0, start: float = -90.0) -> float:
    """Receiver orientation (degrees) of strongest power over a half-turn sweep."""
    return normalize_angle(sweep_orientation(probe, resolution, start).argmax())


def find_extreme_biases(
    probe: Callable[[BiasSetting], float], step: float = 1.0
) -> tuple[BiasSetting, BiasSetting]:
    """(weakest, strongest) bias settings over the full grid; first hit wins ties."""
    trace = exhaustive_sweep(probe, step)
    lo = hi = 0
    for k, e in enumerate(trace.entries):
        if e.power_dbm < trace.entries[lo].power_dbm:
            lo = k
        if e.power_dbm > trace.entries[hi].power_dbm:
            hi = k
    return trace.entries[lo].bias, trace.entries[hi].bias


def _rx_probe(s: LinkScenario, b: BiasSetting | None):
    return lambda angle: received_power(s.replace(rx_orientation=angle), b).rx_power_dbm


def estimate_rotation(
    s: LinkScenario, resolution: float = 1.0, alignment: str = "absent", step: float = 1.0
) -> RotationEstimate:
    """Run the three-step procedure against the simulated link.

    ``alignment="absent"`` aligns with the surface removed from the path;
    ``"min_rotation"`` keeps it in place at its least-rotating grid bias.
    """
    if s.surface is None:
        raise ValueError("estimate_rotation needs a scenario with a surface")
    if alignment == "absent":
        theta0 = find_alignment(_rx_probe(s.replace(surface=None), None), resolution)
    elif alignment == "min_rotation":
        theta0 = find_alignment(_rx_probe(s, s.surface.min_rotation_bias()), resolution)
    else:
        raise ValueError("alignment must be 'absent' or 'min_rotation'")

    v_min, v_max = find_extreme_biases(lambda b: received_power(s, b).rx_power_dbm, step)

    rot = []
    for b in (v_min, v_max):
        theta = find_alignment(_rx_probe(s, b), resolution)
        rot.append(fold_axis_difference(theta - theta0))
    lo, hi = sorted(rot)
    return RotationEstimate(theta0, lo, hi, v_min, v_max)
