"""Gaussian-mode geometry of a symmetric two-mirror Fabry-Perot cavity.

All quantities are SI: metres, radians, rad/s. The cavity consists of two
identical concave spherical mirrors (radius of curvature ``roc``, diameter
``diameter``) separated by ``length``; the ion sits at the mode waist at the
midpoint. Transverse/longitudinal misalignment of one mirror tilts the mode
and shifts the effective length; the ion is assumed to be repositioned onto
the tilted mode centre, so coupling rates under misalignment are computed
from the effective mode, not the nominal one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.optimize import brentq

from .errors import InvalidCapError, UnstableGeometryError, ValidationError


@dataclass(frozen=True)
class CavityGeometry:
    """Nominal symmetric cavity.

    length: mirror separation L (m)
    roc: mirror radius of curvature R (m), equal for both mirrors
    diameter: mirror diameter D (m)
    wavelength: mode wavelength (m)

    Positivity and D <= 2R are enforced at construction. Mode stability
    (0 < L < 2R) and mirror clearance (L > 2h) are *not* constructor
    invariants: infeasible geometries must remain representable so that
    ``stability_margin`` can report them to the optimiser; the mode
    operations raise ``UnstableGeometryError`` instead.
    """

    length: float
    roc: float
    diameter: float
    wavelength: float

    def __post_init__(self) -> None:
        for name in ("length", "roc", "diameter", "wavelength"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"CavityGeometry.{name} must be finite and > 0, got {v!r}")
        if self.diameter > 2.0 * self.roc:
            raise InvalidCapError(
                f"mirror diameter {self.diameter} exceeds 2R = {2.0 * self.roc}"
            )

    @property
    def sagitta(self) -> float:
        """Depth h of the spherical mirror cap (m)."""
        return sagitta(self.roc, self.diameter)


@dataclass(frozen=True)
class Misalignment:
    """Translational offset of one mirror from the coaxial position.

    transverse: offset perpendicular to the cavity axis (m)
    longitudinal: offset along the cavity axis (m)
    """

    transverse: float
    longitudinal: float

    def __post_init__(self) -> None:
        if self.transverse < 0.0 or self.longitudinal < 0.0:
            raise ValidationError("misalignment components must be >= 0")

    @classmethod
    def uniform(cls, m: float) -> "Misalignment":
        """Worst-case convention: equal transverse and longitudinal offset."""
        return cls(transverse=m, longitudinal=m)

    @property
    def is_zero(self) -> bool:
        return self.transverse == 0.0 and self.longitudinal == 0.0


@dataclass(frozen=True)
class EffectiveMode:
    """Misalignment-corrected fundamental mode.

    tilt: mode axis tilt angle from the nominal axis (rad)
    length: effective cavity length L' (m)
    divergence: far-field divergence half-angle (rad)
    waist: 1/e^2 intensity radius at the waist (m)
    spot_at_mirror: 1/e^2 intensity radius on the mirror (m)
    offset_at_mirror: transverse displacement of the mode centre on the mirror (m)
    """

    tilt: float
    length: float
    divergence: float
    waist: float
    spot_at_mirror: float
    offset_at_mirror: float


@dataclass(frozen=True)
class MirrorSolid:
    """Spherical-cap mirror solid: sagitta (m) and milled volume (m^3)."""

    sagitta: float
    volume: float


@dataclass(frozen=True)
class AtomicSystem:
    """Decay rates of the lambda system's excited state.

    gamma: total half-linewidth of the excited state, Gamma/2 (rad/s)
    gamma_1: partial half-linewidth of the cavity-arm transition (rad/s)
    gamma_0: partial half-linewidth of the drive-arm transition (rad/s);
        carried for bookkeeping, not used by the extraction formulas
    alpha: cavity-arm branching ratio gamma_1/gamma
    """

    gamma: float
    gamma_1: float
    gamma_0: float = 0.0

    def __post_init__(self) -> None:
        if not self.gamma > 0.0:
            raise ValidationError("gamma must be > 0")
        if self.gamma_1 < 0.0 or self.gamma_1 > self.gamma * (1.0 + 1e-12):
            raise ValidationError("gamma_1 must lie in [0, gamma]")
        if self.gamma_0 < 0.0:
            raise ValidationError("gamma_0 must be >= 0")

    @classmethod
    def from_branching_ratio(
        cls, gamma: float, alpha: float, gamma_0: float = 0.0
    ) -> "AtomicSystem":
        if not 0.0 < alpha <= 1.0:
            raise ValidationError("branching ratio alpha must lie in (0, 1]")
        return cls(gamma=gamma, gamma_1=alpha * gamma, gamma_0=gamma_0)

    @property
    def alpha(self) -> float:
        return self.gamma_1 / self.gamma


def sagitta(roc: float, diameter: float) -> float:
    """Spherical-cap depth h = R - sqrt(R^2 - D^2/4), in a cancellation-safe form."""
    if diameter > 2.0 * roc:
        raise InvalidCapError(f"diameter {diameter} exceeds 2R = {2.0 * roc}")
    half = 0.5 * diameter
    return half * half / (roc + math.sqrt(roc * roc - half * half))


def mirror_solid(roc: float, diameter: float) -> MirrorSolid:
    """Sagitta and milled volume of one spherical-cap mirror.

    V = (pi h / 6) (3 D^2 / 4 + h^2), valid for 0 < D <= 2R.
    """
    if not (roc > 0.0 and diameter >= 0.0):
        raise ValidationError("roc must be > 0 and diameter >= 0")
    h = sagitta(roc, diameter)
    v = math.pi * h / 6.0 * (0.75 * diameter * diameter + h * h)
    return MirrorSolid(sagitta=h, volume=v)


def cap_diameter_for_volume(roc: float, volume: float) -> float:
    """Largest mirror diameter whose spherical cap does not exceed ``volume``.

    Inverts V(h) = pi h^2 (R - h/3), which is strictly increasing on (0, R].
    Returns the full hemisphere diameter 2R when the budget exceeds the
    hemisphere volume.
    """
    if not (roc > 0.0 and volume > 0.0):
        raise ValidationError("roc and volume must be > 0")
    hemisphere = 2.0 * math.pi * roc**3 / 3.0
    if volume >= hemisphere:
        return 2.0 * roc

    def excess(h: float) -> float:
        return math.pi * h * h * (roc - h / 3.0) - volume

    h = brentq(excess, 0.0, roc, xtol=1e-18, rtol=8.9e-16)
    return 2.0 * math.sqrt(h * (2.0 * roc - h))


def mode_waist(geom: CavityGeometry) -> float:
    """Waist w0 = sqrt(lambda / 2 pi) [L (2R - L)]^(1/4) of the fundamental mode (m)."""
    l, r = geom.length, geom.roc
    if not 0.0 < l < 2.0 * r:
        raise UnstableGeometryError(
            f"no stable mode: length {l} outside (0, 2R) with R = {r}"
        )
    return math.sqrt(geom.wavelength / (2.0 * math.pi)) * (l * (2.0 * r - l)) ** 0.25


def divergence(geom: CavityGeometry) -> float:
    """Far-field divergence half-angle theta = lambda / (pi w0) (rad)."""
    return geom.wavelength / (math.pi * mode_waist(geom))


def coupling_rate_from_mode(
    length: float,
    waist: float,
    wavelength: float,
    gamma_1: float,
    suppression: float = 1.0,
) -> float:
    """Antinode coupling rate g0 = sqrt(3 lambda^2 c gamma_1 / (pi^2 L w0^2)) (rad/s).

    ``suppression`` rescales g0 for transitions the cavity polarisation does
    not address optimally (default 1: optimal alignment).
    """
    if gamma_1 < 0.0:
        raise ValidationError("gamma_1 must be >= 0")
    if not (length > 0.0 and waist > 0.0):
        raise UnstableGeometryError("coupling rate needs a stable mode (L, w0 > 0)")
    g0 = math.sqrt(
        3.0 * wavelength**2 * SPEED_OF_LIGHT * gamma_1 / (math.pi**2 * length * waist**2)
    )
    return suppression * g0


def coupling_g0(geom: CavityGeometry, atom: AtomicSystem, suppression: float = 1.0) -> float:
    """Ion-cavity coupling rate at the central antinode of the nominal mode (rad/s)."""
    return coupling_rate_from_mode(
        geom.length, mode_waist(geom), geom.wavelength, atom.gamma_1, suppression
    )


def _effective_mode(
    length: float, roc: float, wavelength: float, mis: Misalignment
) -> EffectiveMode:
    """Core of effective_mode, independent of the mirror diameter."""
    remainder = (2.0 * roc - length) - mis.longitudinal
    if remainder <= 0.0:
        raise UnstableGeometryError(
            "misaligned cavity beyond the concentric point: "
            f"(2R - L) - m_par = {remainder} <= 0"
        )
    tilt = math.atan(mis.transverse / remainder)
    # remainder / cos(tilt) == hypot(remainder, transverse), exact and stable
    l_eff = 2.0 * roc - math.hypot(remainder, mis.transverse)
    if l_eff <= 0.0:
        raise UnstableGeometryError(f"effective length {l_eff} <= 0")
    theta = math.sqrt(
        2.0 * wavelength / (math.pi * math.sqrt(l_eff * (2.0 * roc - l_eff)))
    )
    waist = wavelength / (math.pi * theta)
    offset = tilt * l_eff / 2.0
    spot = math.hypot(waist, theta * l_eff / 2.0)
    return EffectiveMode(
        tilt=tilt,
        length=l_eff,
        divergence=theta,
        waist=waist,
        spot_at_mirror=spot,
        offset_at_mirror=offset,
    )


def effective_mode(geom: CavityGeometry, mis: Misalignment) -> EffectiveMode:
    """Mode of the misaligned cavity.

    The transverse offset tilts the mode axis by
    phi = arctan(m_perp / ((2R - L) - m_par)) about the cavity centre, the
    longitudinal offset stretches the length to
    L' = 2R - (2R - L - m_par)/cos(phi), and the divergence follows the
    nominal formula evaluated at L'. Reduces exactly to the nominal mode at
    zero misalignment.
    """
    return _effective_mode(geom.length, geom.roc, geom.wavelength, mis)


def stability_margin(geom: CavityGeometry, mis: Misalignment) -> float:
    """Signed feasibility margin min(L', 2R - L', L - 2h) / L.

    Positive iff the misaligned cavity supports a stable mode and the
    mirrors can be assembled without touching. Negative values signal how
    badly the worst condition is violated; the optimiser uses this as its
    feasibility gate.
    """
    l, r = geom.length, geom.roc
    clearance = l - 2.0 * geom.sagitta
    remainder = (2.0 * r - l) - mis.longitudinal
    if remainder <= 0.0:
        return min(remainder, clearance) / l
    l_eff = 2.0 * r - math.hypot(remainder, mis.transverse)
    return min(l_eff, 2.0 * r - l_eff, clearance) / l
