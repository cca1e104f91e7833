"""Jones vectors and 2x2 Jones operators.

Angles are given in degrees at every public entry point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _finite(*values) -> None:
    for v in values:
        ok = cmath.isfinite(v) if isinstance(v, (int, float, complex)) else np.isfinite(v).all()
        if not ok:
            raise ValueError(f"non-finite input: {v!r}")


def normalize_angle(theta: float) -> float:
    """Map an angle in degrees onto (-180, 180]."""
    _finite(theta)
    t = math.fmod(theta, 360.0)
    if t <= -180.0:
        t += 360.0
    elif t > 180.0:
        t -= 360.0
    return t


def fold_axis_difference(delta: float) -> float:
    """Difference between two linear-polarization axes, folded onto [0, 90].

    A dipole axis at theta and theta + 180 is the same axis.
    """
    d = math.fmod(abs(delta), 180.0)
    return 180.0 - d if d > 90.0 else d


@dataclass(frozen=True)
class PolarizationState:
    ex: complex
    ey: complex

    def __post_init__(self):
        _finite(self.ex, self.ey)

    @classmethod
    def linear(cls, theta: float, amplitude: float = 1.0) -> "PolarizationState":
        t = math.radians(theta)
        return cls(amplitude * math.cos(t), amplitude * math.sin(t))

    @classmethod
    def from_vector(cls, v) -> "PolarizationState":
        return cls(complex(v[0]), complex(v[1]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.ex, self.ey], dtype=complex)

    def normalized(self) -> "PolarizationState":
        n = math.sqrt(intensity(self))
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        return PolarizationState(self.ex / n, self.ey / n)


@dataclass(frozen=True, eq=False)
class JonesOperator:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"Jones operator must be 2x2, got {m.shape}")
        _finite(m)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __matmul__(self, other: "JonesOperator") -> "JonesOperator":
        return JonesOperator(self.m @ other.m)

    @property
    def T(self) -> "JonesOperator":
        return JonesOperator(self.m.T)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.m, compute_uv=False)

    def is_passive(self, tol: float = 1e-9) -> bool:
        return bool(self.singular_values()[0] <= 1.0 + tol)


IDENTITY = JonesOperator(np.eye(2))


def rotation_array(theta: float) -> np.ndarray:
    t = math.radians(theta)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def rotation_matrix(theta: float) -> JonesOperator:
    """Counterclockwise rotation by ``theta`` degrees."""
    _finite(theta)
    return JonesOperator(rotation_array(theta))


def rotate_operator(m: JonesOperator, theta: float) -> JonesOperator:
    """Operator of a device whose axes are turned counterclockwise by ``theta``: R M R^T."""
    r = rotation_matrix(theta).m
    return JonesOperator(r @ m.m @ r.T)


def apply(m: JonesOperator, j: PolarizationState) -> PolarizationState:
    return PolarizationState.from_vector(m.m @ j.vector)


def cascade(ops: Sequence[JonesOperator]) -> JonesOperator:
    """Compose a stack of devices; ``ops[0]`` is the first one the wave meets."""
    if len(ops) == 0:
        raise ValueError("cascade needs at least one operator")
    out = ops[0].m
    for op in ops[1:]:
        out = op.m @ out
    return JonesOperator(out)


def intensity(j: PolarizationState) -> float:
    return abs(j.ex) ** 2 + abs(j.ey) ** 2


def fit_global_phase(a: JonesOperator, b: JonesOperator) -> float:
    """Phase phi (radians) minimizing ||a - exp(j*phi) b||_F."""
    inner = np.vdot(b.m, a.m)
    if abs(inner) == 0.0:
        return 0.0
    return float(np.angle(inner))


def distance_up_to_phase(a: JonesOperator, b: JonesOperator) -> float:
    phi = fit_global_phase(a, b)
    return float(np.linalg.norm(a.m - np.exp(1j * phi) * b.m))


def equal_up_to_phase(a: JonesOperator, b: JonesOperator, tol: float = 1e-9) -> bool:
    return distance_up_to_phase(a, b) < tol
