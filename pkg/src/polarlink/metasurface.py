"""Device model of the voltage-tuned polarization rotator.

The rotator is a birefringent phase shifter sandwiched between two quarter-wave
plates. Its net effect is a geometric rotation by half the X/Y phase
difference. The bias-voltage to rotation mapping comes from a simulated lookup
grid, interpolated bilinearly.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .jones import JonesOperator, cascade, rotation_array, rotation_matrix

V_RANGE = (0.0, 30.0)

# Bias grid (volts) and rotation degrees indexed [vy][vx].
DEFAULT_VX = (2.0, 3.0, 4.0, 5.0, 6.0, 10.0, 15.0)
DEFAULT_VY = (2.0, 3.0, 4.0, 5.0, 6.0, 10.0, 15.0)
DEFAULT_THETA = (
    (11.6, 26.1, 36.8, 41.0, 44.3, 48.3, 48.7),
    (6.5, 12.4, 26.6, 32.2, 35.2, 38.6, 39.2),
    (23.0, 4.9, 10.9, 17.3, 20.8, 25.0, 25.6),
    (27.0, 9.3, 7.4, 14.0, 18.0, 22.6, 23.2),
    (41.8, 25.0, 7.9, 2.1, 4.2, 10.2, 10.7),
    (45.8, 30.0, 13.7, 7.9, 2.8, 5.1, 5.6),
    (48.2, 33.1, 18.2, 12.9, 7.3, 1.9, 2.0),
)

# Varactor capacitance span that produced the grid above; informational only.
CAPACITANCE_RANGE_PF = (0.84, 2.41)

# Unit-cell geometry of the fabricated board (mm); not simulated.
UNIT_CELL_MM = {"d1": 7.0, "d2": 11.0, "c1": 12.0, "c2": 0.6}


class DomainError(ValueError):
    """Inputs fall outside the region where a closed-form expression is defined."""


@dataclass(frozen=True)
class BiasSetting:
    vx: float
    vy: float

    def __post_init__(self):
        lo, hi = V_RANGE
        for name in ("vx", "vy"):
            v = getattr(self, name)
            if not math.isfinite(v) or not lo <= v <= hi:
                raise ValueError(f"{name}={v} V outside [{lo}, {hi}] V")

    def as_dict(self) -> dict:
        return {"vx": self.vx, "vy": self.vy}


@dataclass(frozen=True)
class RotationTable:
    vx_grid: tuple
    vy_grid: tuple
    theta: tuple  # rows follow vy_grid, columns follow vx_grid

    def __post_init__(self):
        vx = tuple(float(v) for v in self.vx_grid)
        vy = tuple(float(v) for v in self.vy_grid)
        theta = tuple(tuple(float(t) for t in row) for row in self.theta)
        for name, g in (("vx_grid", vx), ("vy_grid", vy)):
            if len(g) < 2 or any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError(f"{name} must be strictly ascending with >= 2 points")
        if len(theta) != len(vy) or any(len(r) != len(vx) for r in theta):
            raise ValueError("theta shape does not match the voltage grids")
        if any(not 0.0 <= t <= 90.0 for r in theta for t in r):
            raise ValueError("rotation entries must lie in [0, 90] degrees")
        object.__setattr__(self, "vx_grid", vx)
        object.__setattr__(self, "vy_grid", vy)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def default(cls) -> "RotationTable":
        return cls(DEFAULT_VX, DEFAULT_VY, DEFAULT_THETA)

    @classmethod
    def constant(cls, degrees: float) -> "RotationTable":
        return cls((0.0, 30.0), (0.0, 30.0), ((degrees, degrees), (degrees, degrees)))

    @classmethod
    def from_csv(cls, path) -> "RotationTable":
        """Header row holds the vx grid (first cell is a label), first column the vy grid."""
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
        vx = [float(v) for v in rows[0][1:]]
        vy = [float(r[0]) for r in rows[1:]]
        theta = [[float(v) for v in r[1:]] for r in rows[1:]]
        return cls(tuple(vx), tuple(vy), tuple(map(tuple, theta)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["vy\\vx", *self.vx_grid])
            for v, row in zip(self.vy_grid, self.theta):
                w.writerow([v, *row])

    @property
    def min_rotation(self) -> float:
        return min(min(r) for r in self.theta)

    @property
    def max_rotation(self) -> float:
        return max(max(r) for r in self.theta)


def _bracket(grid: Sequence[float], v: float) -> tuple[int, float]:
    v = min(max(v, grid[0]), grid[-1])
    i = min(bisect.bisect_right(grid, v) - 1, len(grid) - 2)
    return i, (v - grid[i]) / (grid[i + 1] - grid[i])


def bias_to_rotation(table: RotationTable, b: BiasSetting) -> float:
    """Rotation in degrees at bias ``b``; bilinear inside the grid, edge-clamped outside."""
    i, tx = _bracket(table.vx_grid, b.vx)
    k, ty = _bracket(table.vy_grid, b.vy)
    t = table.theta
    lower = t[k][i] * (1 - tx) + t[k][i + 1] * tx
    upper = t[k + 1][i] * (1 - tx) + t[k + 1][i + 1] * tx
    return lower * (1 - ty) + upper * ty


class SurfaceMode(str, Enum):
    TRANSMISSIVE = "transmissive"
    REFLECTIVE = "reflective"


@dataclass(frozen=True)
class SurfaceModel:
    rotation_table: RotationTable = field(default_factory=RotationTable.default)
    insertion_loss_db: float = -5.0
    mode: SurfaceMode = SurfaceMode.TRANSMISSIVE
    reflective_rotation_factor: float = 0.3
    # optional (frequency Hz, insertion loss dB) pairs; overrides the flat value
    loss_table: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", SurfaceMode(self.mode))
        if self.insertion_loss_db > 0:
            raise ValueError("insertion_loss_db must be <= 0")
        if not 0.0 <= self.reflective_rotation_factor <= 1.0:
            raise ValueError("reflective_rotation_factor must be in [0, 1]")
        if self.loss_table is not None:
            pts = tuple(sorted((float(f), float(l)) for f, l in self.loss_table))
            if any(l > 0 for _, l in pts):
                raise ValueError("loss_table entries must be <= 0 dB")
            object.__setattr__(self, "loss_table", pts)

    def with_mode(self, mode) -> "SurfaceModel":
        return replace(self, mode=SurfaceMode(mode))

    def insertion_loss_at(self, frequency: float | None) -> float:
        if self.loss_table is None or frequency is None:
            return self.insertion_loss_db
        f, l = zip(*self.loss_table)
        return float(np.interp(frequency, f, l))

    def effective_rotation(self, b: BiasSetting) -> float:
        theta = bias_to_rotation(self.rotation_table, b)
        if self.mode is SurfaceMode.REFLECTIVE:
            theta *= self.reflective_rotation_factor
        return theta

    def min_rotation_bias(self) -> BiasSetting:
        """Grid bias with the smallest tabulated rotation (first in row-major order)."""
        t = self.rotation_table
        k, i = min(
            ((k, i) for k in range(len(t.vy_grid)) for i in range(len(t.vx_grid))),
            key=lambda ki: t.theta[ki[0]][ki[1]],
        )
        return BiasSetting(_clip_v(t.vx_grid[i]), _clip_v(t.vy_grid[k]))


def _clip_v(v: float) -> float:
    return min(max(v, V_RANGE[0]), V_RANGE[1])


def load_loss_table(path) -> tuple:
    """Two-column CSV (frequency_hz, insertion_loss_db) with a header row."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    return tuple((float(f), float(l)) for f, l in rows[1:])


_QWP_AXES = np.diag([1.0, 1j])


def qwp_operator(sign: int) -> JonesOperator:
    """Quarter-wave plate turned by ``sign`` * 45 degrees relative to the phase shifter.

    The plate's frame is rotated (passive convention), so the operator is
    R(45)^T diag(1, j) R(45) for ``sign=+1``. With this reading the stack
    qwp(-45) -> bfs -> qwp(+45) is a pure rotation by +delta/2.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    r = rotation_matrix(45.0 * sign).m
    return JonesOperator(r.T @ _QWP_AXES @ r)


def bfs_operator(delta: float) -> JonesOperator:
    """Birefringent phase shifter with X/Y phase difference ``delta`` radians."""
    if not math.isfinite(delta):
        raise ValueError("delta must be finite")
    return JonesOperator(np.diag([1.0, np.exp(1j * delta)]))


def rotator_operator(delta: float) -> JonesOperator:
    return cascade([qwp_operator(-1), bfs_operator(delta), qwp_operator(+1)])


def db_to_amplitude(db: float) -> float:
    return 10.0 ** (db / 20.0)


def surface_matrix(model: SurfaceModel, b: BiasSetting, frequency: float | None = None) -> np.ndarray:
    amp = db_to_amplitude(model.insertion_loss_at(frequency))
    return amp * rotation_array(model.effective_rotation(b))


def surface_operator(model: SurfaceModel, b: BiasSetting, frequency: float | None = None) -> JonesOperator:
    """Insertion-loss-scaled rotation the surface applies at bias ``b``."""
    return JonesOperator(surface_matrix(model, b, frequency))


# ---------------------------------------------------------------- two-port


def port_waves(v: complex, i: complex, z0: float) -> tuple[complex, complex]:
    """Incoming and outgoing power-wave amplitudes at a port."""
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    k = 2.0 * math.sqrt(z0)
    return (v + z0 * i) / k, (v - z0 * i) / k


@dataclass(frozen=True)
class ScatteringMatrix:
    """Two-port S-parameters with the forward transmission split by polarization.

    ``s21yx`` is the y-polarized output at port 2 for an x-polarized input at port 1.
    """

    s11: complex = 0j
    s12: complex = 0j
    s22: complex = 0j
    s21xx: complex = 0j
    s21yx: complex = 0j
    s21xy: complex = 0j
    s21yy: complex = 0j

    def coefficients(self) -> dict:
        return {k: complex(getattr(self, k)) for k in self.__dataclass_fields__}

    def is_passive(self, tol: float = 1e-9) -> bool:
        return all(abs(v) <= 1.0 + tol for v in self.coefficients().values())

    def matrix(self, polarization: str = "x") -> np.ndarray:
        """Scalar 2x2 S-matrix for a co-polarized measurement."""
        s21 = self.s21xx if polarization == "x" else self.s21yy
        return np.array([[self.s11, self.s12], [s21, self.s22]], dtype=complex)

    def outgoing(self, a1: complex, a2: complex, polarization: str = "x") -> np.ndarray:
        return self.matrix(polarization) @ np.array([a1, a2], dtype=complex)


def transmission_efficiency(s: ScatteringMatrix, incident_polarization: str) -> float:
    if incident_polarization == "x":
        return abs(s.s21xx) ** 2 + abs(s.s21yx) ** 2
    if incident_polarization == "y":
        return abs(s.s21xy) ** 2 + abs(s.s21yy) ** 2
    raise ValueError("incident_polarization must be 'x' or 'y'")


def phase_shifter_bandwidth(f0: float, gamma: float, z_in: float, z_load: float, m: float) -> float:
    """Bandwidth (Hz) of a quarter-wave-transformer phase shifter stage.

    ``gamma`` is the largest tolerable reflection coefficient and ``m`` the
    substrate thickness divisor.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    if not m > 0:
        raise DomainError("m must be positive")
    if z_in <= 0 or z_load <= 0:
        raise DomainError("impedances must be positive")
    if z_in == z_load:
        raise DomainError("z_in == z_load: matched load makes the expression degenerate")
    arg = gamma / math.sqrt(1.0 - gamma**2) * 2.0 * math.sqrt(z_in * z_load) / abs(z_load - z_in)
    if arg > 1.0:
        raise DomainError(f"arccos argument {arg:.4g} > 1: mismatch too small, expression out of domain")
    return f0 * (2.0 - m / math.pi * math.acos(arg))
