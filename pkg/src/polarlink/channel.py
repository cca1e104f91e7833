"""Link budget for a linearly polarized Tx/Rx pair with an optional rotating surface.

The received field is the coherent sum of a component that passes through (or
reflects off) the surface and a component that bypasses it unrotated. Power at
the receiver is the co-polarized projection of that field, bounded below by a
cross-polarization floor relative to the total field intensity.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .jones import fold_axis_difference, normalize_angle
from .metasurface import BiasSetting, SurfaceMode, SurfaceModel, surface_matrix

C = 299_792_458.0


def dbm_to_mw(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    if p_mw <= 0.0:
        return -math.inf
    return 10.0 * math.log10(p_mw)


def free_space_path_loss(d: float, f: float) -> float:
    if not (d > 0 and f > 0):
        raise ValueError("distance and frequency must be positive")
    return 20.0 * math.log10(4.0 * math.pi * d * f / C)


def mismatch_loss(delta_theta: float, floor_db: float) -> float:
    """Malus-law polarization loss (dB) with a cross-polarization floor."""
    if not floor_db < 0:
        raise ValueError("floor_db must be negative")
    c2 = math.cos(math.radians(delta_theta)) ** 2
    if c2 <= 0.0:
        return floor_db
    return max(10.0 * math.log10(c2), floor_db)


def capacity(snr_db: float) -> float:
    """Shannon spectral efficiency in bit/s/Hz."""
    if math.isnan(snr_db):
        raise ValueError("snr_db is NaN")
    if snr_db == -math.inf:
        return 0.0
    return math.log2(1.0 + 10.0 ** (snr_db / 10.0))


def range_extension(power_gain_db: float) -> float:
    """Free-space distance factor bought by a power gain."""
    return 10.0 ** (power_gain_db / 20.0)


def _square_solid_angle(side: float, d: float) -> float:
    # on-axis square of side ``side`` seen from distance ``d``
    a2 = side * side
    return 4.0 * math.asin(a2 / (a2 + 4.0 * d * d))


def bypass_fraction_from_geometry(
    tx_rx_distance: float,
    surface_side: float,
    surface_distance: float,
    beamwidth_deg: float | None = None,
    rx_surface_distance: float | None = None,
) -> float:
    """Share of received power that goes around the surface.

    Each endpoint couples to the surface by the fraction of its reference solid
    angle the square covers: the facing hemisphere for an omni antenna, or the
    main-beam cone for a directional one. The through share is the product of
    the two couplings. ``rx_surface_distance`` defaults to the in-line
    placement ``tx_rx_distance - surface_distance``.
    """
    if surface_side == 0:
        return 1.0
    if min(tx_rx_distance, surface_side, surface_distance) < 0:
        raise ValueError("geometry must be non-negative")
    if rx_surface_distance is None:
        rx_surface_distance = tx_rx_distance - surface_distance
    if rx_surface_distance < 0:
        raise ValueError("surface is not between the endpoints")
    if beamwidth_deg is None:
        ref = 2.0 * math.pi
    else:
        ref = min(2.0 * math.pi, 2.0 * math.pi * (1.0 - math.cos(math.radians(beamwidth_deg) / 2.0)))

    def coupling(d):
        return min(1.0, _square_solid_angle(surface_side, d) / ref)

    return max(0.0, 1.0 - coupling(surface_distance) * coupling(rx_surface_distance))


@dataclass(frozen=True)
class Ray:
    """Extra propagation component, relative to the direct-path field."""

    amplitude: float
    phase_deg: float = 0.0
    orientation_deg: float = 0.0


@dataclass(frozen=True)
class LinkScenario:
    frequency: float = 2.44e9
    tx_power_dbm: float = 0.0
    tx_orientation: float = 0.0
    rx_orientation: float = 90.0
    tx_rx_distance: float = 0.24
    surface: SurfaceModel | None = None
    tx_surface_distance: float = 0.12
    # None: derive from surface_side via the geometric model
    bypass_fraction: float | None = 0.0
    surface_side: float | None = None
    beamwidth_deg: float | None = None
    combining_phase_deg: float = 0.0
    crosspol_floor_db: float = -30.0
    noise_floor_dbm: float = -90.0
    noise_enabled: bool = False
    noise_sigma_db: float = 0.5
    n_samples: int = 1
    rx_sensitivity_dbm: float | None = None
    antenna_gains_dbi: tuple = (0.0, 0.0)
    rng_seed: int = 42
    extra_rays: tuple = ()

    def __post_init__(self):
        if not (self.tx_rx_distance > 0 and self.tx_surface_distance > 0):
            raise ValueError("distances must be positive")
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")
        if self.bypass_fraction is None:
            if self.surface_side is None:
                raise ValueError("bypass_fraction or surface_side is required")
        elif not 0.0 <= self.bypass_fraction <= 1.0:
            raise ValueError("bypass_fraction must be in [0, 1]")
        if not self.crosspol_floor_db < 0:
            raise ValueError("crosspol_floor_db must be negative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.noise_sigma_db < 0:
            raise ValueError("noise_sigma_db must be >= 0")
        object.__setattr__(self, "antenna_gains_dbi", tuple(float(g) for g in self.antenna_gains_dbi))
        object.__setattr__(self, "extra_rays", tuple(self.extra_rays))

    def replace(self, **changes) -> "LinkScenario":
        return replace(self, **changes)

    @property
    def reflective(self) -> bool:
        return self.surface is not None and self.surface.mode is SurfaceMode.REFLECTIVE

    def reflection_path_length(self) -> float:
        # specular bounce midway between side-by-side endpoints
        return 2.0 * math.hypot(self.tx_surface_distance, self.tx_rx_distance / 2.0)

    def effective_bypass(self) -> float:
        cached = self.__dict__.get("_bypass")
        if cached is None:
            cached = self._bypass_uncached()
            object.__setattr__(self, "_bypass", cached)
        return cached

    def _bypass_uncached(self) -> float:
        if self.bypass_fraction is not None:
            return self.bypass_fraction
        if self.reflective:
            half = self.reflection_path_length() / 2.0
            return bypass_fraction_from_geometry(
                self.tx_rx_distance, self.surface_side, half, self.beamwidth_deg, rx_surface_distance=half
            )
        return bypass_fraction_from_geometry(
            self.tx_rx_distance, self.surface_side, self.tx_surface_distance, self.beamwidth_deg
        )


@dataclass(frozen=True)
class LinkReport:
    rx_power_dbm: float
    snr_db: float
    capacity_bits_per_s_per_hz: float
    mismatch_deg: float
    signal_dbm: float = field(default=math.nan)


def _unit(theta_deg: float) -> np.ndarray:
    t = math.radians(theta_deg)
    return np.array([math.cos(t), math.sin(t)], dtype=complex)


def received_field(s: LinkScenario, b: BiasSetting | None = None) -> np.ndarray:
    """Jones vector at the receiver, normalized to the unobstructed direct path."""
    tx = _unit(s.tx_orientation)
    if s.surface is None:
        e = tx.copy()
    else:
        if b is None:
            raise ValueError("a bias setting is required when a surface is present")
        f = s.effective_bypass()
        through = surface_matrix(s.surface, b, s.frequency) @ tx
        if s.reflective:
            # field falls off as 1/distance relative to the direct path
            through = through * (s.tx_rx_distance / s.reflection_path_length())
        phase = np.exp(1j * math.radians(s.combining_phase_deg))
        e = math.sqrt(f) * tx + math.sqrt(1.0 - f) * phase * through
    for ray in s.extra_rays:
        e = e + ray.amplitude * np.exp(1j * math.radians(ray.phase_deg)) * _unit(ray.orientation_deg)
    return e


def polarization_power(e: np.ndarray, rx_orientation: float, floor_db: float) -> float:
    """Fraction of field intensity an Rx dipole picks up, never below the floor."""
    co = abs(np.dot(_unit(rx_orientation).real, e)) ** 2
    total = float(np.vdot(e, e).real)
    return max(co, 10.0 ** (floor_db / 10.0) * total)


def major_axis_deg(e: np.ndarray) -> float:
    ex, ey = e
    return 0.5 * math.degrees(math.atan2(2.0 * (ex * ey.conjugate()).real, abs(ex) ** 2 - abs(ey) ** 2))


def _noise_rng(s: LinkScenario, b: BiasSetting | None) -> np.random.Generator:
    key = repr(((b.vx, b.vy) if b else None, s.rx_orientation, s.tx_orientation,
                s.tx_power_dbm, s.tx_rx_distance, s.frequency))
    return np.random.default_rng([int(s.rng_seed) & 0xFFFFFFFF, zlib.crc32(key.encode())])


def _measure(signal_mw: float, s: LinkScenario, b: BiasSetting | None) -> float:
    """Averaged power reading of ``n_samples`` noisy samples, in mW."""
    rng = _noise_rng(s, b)
    n = s.n_samples
    jitter = 10.0 ** (s.noise_sigma_db * rng.standard_normal(n) / 10.0)
    amp = np.sqrt(signal_mw * jitter)
    noise = math.sqrt(dbm_to_mw(s.noise_floor_dbm) / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return float(np.mean(np.abs(amp + noise) ** 2))


def received_power(s: LinkScenario, b: BiasSetting | None = None) -> LinkReport:
    e = received_field(s, b)
    rel = polarization_power(e, s.rx_orientation, s.crosspol_floor_db)
    pl = free_space_path_loss(s.tx_rx_distance, s.frequency)
    signal_dbm = s.tx_power_dbm + sum(s.antenna_gains_dbi) - pl + mw_to_dbm(rel)
    measured = dbm_to_mw(signal_dbm)
    if s.noise_enabled:
        measured = _measure(measured, s, b)
    rx_dbm = mw_to_dbm(measured)
    if s.rx_sensitivity_dbm is not None:
        rx_dbm = max(rx_dbm, s.rx_sensitivity_dbm)
    snr_db = signal_dbm - s.noise_floor_dbm
    mismatch = fold_axis_difference(normalize_angle(major_axis_deg(e) - s.rx_orientation))
    return LinkReport(rx_dbm, snr_db, capacity(snr_db), mismatch, signal_dbm)


def baseline(s: LinkScenario) -> LinkScenario:
    """Same link with the surface removed."""
    return s.replace(surface=None)
