"""Intrinsic round-trip loss model: surface scattering, aperture clipping,
cavity decay rates and finesse, and the clipping-loss length boundary.

Losses are dimensionless round-trip power fractions (1 ppm = 1e-6). The
clipping integral follows the hard-edged spherical mirror model: the tilted,
unit-power fundamental Gaussian is integrated over the projected mirror disk
of diameter D, displaced by the mode offset at the mirror.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from scipy.constants import c as SPEED_OF_LIGHT

from .errors import (
    DegenerateCavityError,
    NoFeasibleLengthError,
    NumericalError,
    UnstableGeometryError,
    ValidationError,
)
from .geometry import CavityGeometry, Misalignment, effective_mode, sagitta, stability_margin

# Quadrature results below this are indistinguishable from refinement noise.
LOSS_FLOOR = 1e-13

CLIP_MODELS = ("single", "two-mirror")


@dataclass(frozen=True)
class LossBudget:
    """Decomposition of the intrinsic round-trip loss.

    scatter: surface-scattering contribution
    clip: aperture-clipping contribution
    """

    scatter: float
    clip: float

    def __post_init__(self) -> None:
        if self.scatter < 0.0 or self.clip < 0.0:
            raise ValidationError("loss components must be >= 0")

    @property
    def total(self) -> float:
        """Total intrinsic round-trip loss, scatter + clip exactly."""
        return self.scatter + self.clip


@dataclass(frozen=True)
class CavityRates:
    """Field amplitude decay rates (rad/s) and finesse of the cavity."""

    kappa: float
    kappa_in: float
    kappa_out: float
    finesse: float


def scattering_loss(sigma: float, wavelength: float) -> float:
    """Round-trip scattering loss 2[1 - exp(-(4 pi sigma / lambda)^2)].

    sigma: RMS mirror surface roughness (m). Bounded by 2 and monotone in
    sigma; ~2 (4 pi sigma / lambda)^2 for smooth mirrors.
    """
    if sigma < 0.0:
        raise ValidationError("surface roughness must be >= 0")
    if wavelength <= 0.0:
        raise ValidationError("wavelength must be > 0")
    x = 4.0 * math.pi * sigma / wavelength
    return 2.0 * (-math.expm1(-x * x))


@lru_cache(maxsize=64)
def _radial_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _gaussian_disk_fraction(spot: float, offset: float, radius: float, tol: float) -> float:
    """Power fraction of a displaced unit-power Gaussian inside a centred disk.

    Intensity profile exp(-2((x - offset)^2 + y^2)/spot^2), normalised to unit
    total power, integrated over x^2 + y^2 <= radius^2. Polar quadrature about
    the disk centre: radial Gauss-Legendre times angular trapezoid (uniform,
    spectrally accurate for the periodic integrand), doubled in both
    directions until successive refinements agree to ``tol``.
    """
    w2 = spot * spot
    # Start resolved enough that the peak (width ~ spot/2) is sampled.
    n_rad = int(min(4096, max(32, 2 ** math.ceil(math.log2(4.0 * radius / spot + 1.0)))))
    n_ang = int(min(4096, max(16, 2 ** math.ceil(math.log2(4.0 * offset / spot + 1.0)))))
    prev = None
    while True:
        r, wr = _radial_rule(n_rad)
        r = r * radius
        wr = wr * radius
        phi = np.arange(n_ang) * (2.0 * math.pi / n_ang)
        # Split the exponent so every factor stays in [0, 1]: no overflow and
        # the radial peak factors out of the angular sum.
        radial = np.exp(-2.0 * (r - offset) ** 2 / w2) * r * wr
        angular = np.exp(np.outer(-4.0 * r * offset / w2, 1.0 - np.cos(phi)))
        total = float(radial @ angular.sum(axis=1)) * (2.0 / (math.pi * w2)) * (
            2.0 * math.pi / n_ang
        )
        if prev is not None and abs(total - prev) < tol:
            return min(max(total, 0.0), 1.0)
        if n_rad >= 16384 and n_ang >= 8192:
            raise NumericalError(
                "clipping quadrature failed to converge: "
                f"spot={spot}, offset={offset}, radius={radius}"
            )
        prev = total
        n_rad = min(16384, 2 * n_rad)
        n_ang = min(8192, 2 * n_ang)


def aperture_loss(spot: float, offset: float, radius: float, tol: float = 1e-10) -> float:
    """Round-trip loss of a displaced Gaussian on one hard-edged disk mirror."""
    if not (spot > 0.0 and radius > 0.0 and offset >= 0.0):
        raise ValidationError("spot and radius must be > 0, offset >= 0")
    # Exact tail bound for a radially displaced Gaussian:
    # P(miss) <= exp(-2 (radius - offset)^2 / spot^2). Skip the quadrature
    # when that already puts the loss below the noise floor.
    slack = radius - offset
    if slack > 0.0 and 2.0 * slack * slack / (spot * spot) > -math.log(LOSS_FLOOR * 0.1):
        return 0.0
    loss = 1.0 - _gaussian_disk_fraction(spot, offset, radius, tol)
    if loss < LOSS_FLOOR:
        return 0.0
    return min(loss, 1.0)


def clipping_loss(
    geom: CavityGeometry,
    mis: Misalignment,
    model: str = "single",
    tol: float = 1e-10,
) -> float:
    """Round-trip clipping loss of the misaligned mode on the finite mirrors.

    model="single" evaluates the overlap integral once (the mode spot,
    displaced by phi L'/2, on one mirror disk) and reports it as the
    round-trip value. model="two-mirror" sums the per-mirror integrals; with
    equal mirrors and a tilt about the cavity centre both displacements are
    phi L'/2, so this doubles the single-mirror value.
    """
    if model not in CLIP_MODELS:
        raise ValidationError(f"unknown clip model {model!r}; expected one of {CLIP_MODELS}")
    if stability_margin(geom, mis) <= 0.0:
        raise UnstableGeometryError(
            "clipping loss undefined: misaligned cavity has no stable mode "
            "or the mirrors interpenetrate"
        )
    mode = effective_mode(geom, mis)
    per_mirror = aperture_loss(
        mode.spot_at_mirror, mode.offset_at_mirror, geom.diameter / 2.0, tol
    )
    if model == "two-mirror":
        return min(2.0 * per_mirror, 1.0)
    return per_mirror


def cavity_rates(l_eff: float, transmission: float, budget: LossBudget) -> CavityRates:
    """Decay rates and finesse for outcoupler transmission T and loss budget.

    kappa = c (T + L_in) / (4 L'), split exactly into the intrinsic part
    kappa_in = c L_in / (4 L') and the outcoupler part kappa_out = c T / (4 L');
    finesse = 2 pi / (T + L_in).
    """
    if l_eff <= 0.0:
        raise ValidationError("effective length must be > 0")
    if transmission < 0.0:
        raise ValidationError("transmission must be >= 0")
    round_trip = transmission + budget.total
    if round_trip == 0.0:
        raise DegenerateCavityError("T + L_in = 0: finesse unbounded")
    scale = SPEED_OF_LIGHT / (4.0 * l_eff)
    kappa_in = scale * budget.total
    kappa_out = scale * transmission
    return CavityRates(
        kappa=kappa_in + kappa_out,
        kappa_in=kappa_in,
        kappa_out=kappa_out,
        finesse=2.0 * math.pi / round_trip,
    )


def clipping_boundary(
    roc: float,
    diameter: float,
    mis: Misalignment,
    wavelength: float,
    threshold: float = 1e-6,
    model: str = "single",
    resolution: float = 1e-9,
    scan_points: int = 512,
) -> float:
    """Largest cavity length L* with clipping loss <= threshold throughout (2h, L*].

    Scans the stable length interval (2h, 2R - m_par) on a dense grid to
    bracket the first threshold crossing, then bisects to ``resolution``
    (default 1 nm). Returns the stability edge when the threshold is never
    exceeded; raises NoFeasibleLengthError when even the shortest assemblable
    cavity violates it.
    """
    if threshold <= 0.0:
        raise ValidationError("threshold must be > 0")
    h = sagitta(roc, diameter)
    lo = 2.0 * h
    hi = 2.0 * roc - mis.longitudinal
    if hi - lo <= 2.0 * resolution:
        raise NoFeasibleLengthError("no assemblable stable length exists for this mirror")

    def ok(length: float) -> bool:
        geom = CavityGeometry(length, roc, diameter, wavelength)
        if stability_margin(geom, mis) <= 0.0:
            return False
        return clipping_loss(geom, mis, model=model) <= threshold

    grid = np.linspace(lo + resolution, hi - resolution, scan_points)
    good = grid[0]
    if not ok(good):
        raise NoFeasibleLengthError(
            f"clipping loss exceeds {threshold} even at the minimum length {good}"
        )
    bad = None
    for length in grid[1:]:
        if ok(length):
            good = length
        else:
            bad = length
            break
    if bad is None:
        return float(grid[-1])
    while bad - good > resolution:
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
    return float(good)
