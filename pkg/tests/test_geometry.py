import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ioncavity.errors import InvalidCapError, UnstableGeometryError, ValidationError
from ioncavity.geometry import (
    AtomicSystem,
    CavityGeometry,
    Misalignment,
    cap_diameter_for_volume,
    coupling_g0,
    coupling_rate_from_mode,
    divergence,
    effective_mode,
    mirror_solid,
    mode_waist,
    stability_margin,
)

LAMBDA = 854e-9

# Strategy: stable geometries parameterised by (R, L/2R fraction, D/R fraction).
stable_geoms = st.builds(
    lambda roc, frac, dfrac: CavityGeometry(frac * 2.0 * roc, roc, dfrac * roc, LAMBDA),
    roc=st.floats(30e-6, 2e-3),
    frac=st.floats(0.02, 0.98),
    dfrac=st.floats(0.05, 1.9),
)


def test_waist_confocal_identity():
    geom = CavityGeometry(250e-6, 250e-6, 100e-6, LAMBDA)
    expected = math.sqrt(LAMBDA * geom.length / (2.0 * math.pi))
    assert mode_waist(geom) == pytest.approx(expected, rel=1e-14)


def test_waist_vanishes_at_concentric_limit():
    waists = [
        mode_waist(CavityGeometry(2.0 * 250e-6 * (1 - eps), 250e-6, 100e-6, LAMBDA))
        for eps in (1e-2, 1e-4, 1e-6)
    ]
    assert waists[0] > waists[1] > waists[2]
    assert waists[2] < 1e-6


def test_waist_reference_value():
    geom = CavityGeometry(300e-6, 300e-6, 100e-6, LAMBDA)
    assert mode_waist(geom) == pytest.approx(6.3855693888754811e-06, rel=1e-12)


def test_divergence_reference_value():
    geom = CavityGeometry(300e-6, 300e-6, 100e-6, LAMBDA)
    assert divergence(geom) == pytest.approx(0.042570462592503207, rel=1e-12)


@given(stable_geoms)
@settings(max_examples=80)
def test_divergence_waist_identity(geom):
    theta = divergence(geom)
    w0 = mode_waist(geom)
    assert theta * w0 == pytest.approx(LAMBDA / math.pi, rel=1e-15)
    assert theta**2 * math.pi**2 * w0**2 == pytest.approx(LAMBDA**2, rel=1e-12)


def test_divergence_plane_wave_limit():
    thetas = [
        divergence(CavityGeometry(300e-6, roc, 100e-6, LAMBDA))
        for roc in (200e-6, 2e-3, 2e-2)
    ]
    assert thetas[0] > thetas[1] > thetas[2]


def test_divergence_blows_up_at_both_edges():
    roc = 250e-6
    mid = divergence(CavityGeometry(roc, roc, 100e-6, LAMBDA))
    near_concentric = divergence(CavityGeometry(2 * roc * (1 - 1e-5), roc, 100e-6, LAMBDA))
    near_zero = divergence(CavityGeometry(2 * roc * 1e-5, roc, 100e-6, LAMBDA))
    assert near_concentric > 3 * mid
    assert near_zero > 3 * mid


def test_unstable_geometry_raises():
    with pytest.raises(UnstableGeometryError):
        mode_waist(CavityGeometry(500e-6, 200e-6, 100e-6, LAMBDA))


def test_constructor_rejects_nonsense():
    with pytest.raises(ValidationError):
        CavityGeometry(-1e-6, 200e-6, 100e-6, LAMBDA)
    with pytest.raises(ValidationError):
        CavityGeometry(200e-6, 200e-6, 100e-6, 0.0)
    with pytest.raises(InvalidCapError):
        CavityGeometry(200e-6, 100e-6, 300e-6, LAMBDA)


@given(stable_geoms, st.floats(1e4, 1e8))
@settings(max_examples=60)
def test_coupling_dual_form_agreement(geom, gamma_1):
    w0 = mode_waist(geom)
    g0 = coupling_rate_from_mode(geom.length, w0, LAMBDA, gamma_1)
    mode_volume = math.pi * w0**2 * geom.length / 4.0
    alt = math.sqrt(3.0 * LAMBDA**2 * 299792458.0 * gamma_1 / (4.0 * math.pi * mode_volume))
    assert g0 == pytest.approx(alt, rel=1e-12)


def test_coupling_volume_scaling():
    # doubling the mode volume at fixed wavelength and gamma_1 divides g0 by sqrt(2)
    g_ref = coupling_rate_from_mode(300e-6, 6e-6, LAMBDA, 1e6)
    g_dbl = coupling_rate_from_mode(600e-6, 6e-6, LAMBDA, 1e6)
    assert g_dbl == pytest.approx(g_ref / math.sqrt(2.0), rel=1e-12)


def test_coupling_zero_gamma1():
    geom = CavityGeometry(300e-6, 300e-6, 100e-6, LAMBDA)
    atom = AtomicSystem(gamma=1e7, gamma_1=0.0)
    assert coupling_g0(geom, atom) == 0.0


def test_coupling_reference_value():
    geom = CavityGeometry(300e-6, 300e-6, 100e-6, LAMBDA)
    atom = AtomicSystem(gamma=2 * math.pi * 11.6e6, gamma_1=2 * math.pi * 0.58e6)
    assert coupling_g0(geom, atom) == pytest.approx(140709251.19861404, rel=1e-12)


def test_coupling_suppression_factor():
    geom = CavityGeometry(300e-6, 300e-6, 100e-6, LAMBDA)
    atom = AtomicSystem(gamma=1e7, gamma_1=5e5)
    assert coupling_g0(geom, atom, suppression=0.5) == pytest.approx(
        0.5 * coupling_g0(geom, atom), rel=1e-15
    )


def test_atomic_system_branching():
    atom = AtomicSystem.from_branching_ratio(gamma=1e7, alpha=0.05)
    assert atom.gamma_1 == pytest.approx(5e5)
    assert atom.alpha == pytest.approx(0.05)
    with pytest.raises(ValidationError):
        AtomicSystem.from_branching_ratio(gamma=1e7, alpha=1.5)
    with pytest.raises(ValidationError):
        AtomicSystem(gamma=1e7, gamma_1=2e7)


def test_effective_mode_aligned_reduces_to_nominal():
    geom = CavityGeometry(300e-6, 200e-6, 100e-6, LAMBDA)
    mode = effective_mode(geom, Misalignment(0.0, 0.0))
    assert mode.tilt == 0.0
    assert mode.length == geom.length
    assert mode.divergence == pytest.approx(divergence(geom), rel=1e-14)
    assert mode.offset_at_mirror == 0.0


def test_effective_mode_longitudinal_only():
    geom = CavityGeometry(300e-6, 200e-6, 100e-6, LAMBDA)
    mode = effective_mode(geom, Misalignment(transverse=0.0, longitudinal=2e-6))
    assert mode.tilt == 0.0
    assert mode.length == pytest.approx(302e-6, abs=1e-18)


def test_effective_mode_reference_case():
    geom = CavityGeometry(300e-6, 200e-6, 100e-6, LAMBDA)
    mode = effective_mode(geom, Misalignment.uniform(5e-6))
    assert mode.tilt == pytest.approx(math.atan(5.0 / 95.0), rel=1e-14)
    assert mode.tilt == pytest.approx(0.052583061610941718, rel=1e-12)
    assert mode.length == pytest.approx(3.0486851204779776e-04, rel=1e-12)


@given(stable_geoms, st.floats(0, 6e-6), st.floats(0, 6e-6))
@settings(max_examples=60)
def test_effective_mode_spot_invariant(geom, m_perp, m_par):
    mis = Misalignment(m_perp, m_par)
    if stability_margin(geom, mis) <= 0.0:
        return
    mode = effective_mode(geom, mis)
    expected = math.sqrt(
        (LAMBDA / (math.pi * mode.divergence)) ** 2
        + (mode.length * mode.divergence / 2.0) ** 2
    )
    assert mode.spot_at_mirror == pytest.approx(expected, rel=1e-12)
    assert mode.offset_at_mirror == pytest.approx(mode.tilt * mode.length / 2.0, rel=1e-12)


def test_effective_mode_is_continuous_in_misalignment(rng):
    geom = CavityGeometry(300e-6, 200e-6, 100e-6, LAMBDA)
    base = effective_mode(geom, Misalignment.uniform(5e-6))
    for eps in (1e-9, 1e-12):
        bumped = effective_mode(geom, Misalignment.uniform(5e-6 + eps))
        assert abs(bumped.tilt - base.tilt) < 1e-3 * eps / 1e-9 + 1e-9
        assert abs(bumped.length - base.length) < 1e-2 * eps / 1e-9 + 1e-12


def test_effective_mode_beyond_concentric_raises():
    geom = CavityGeometry(395e-6, 200e-6, 100e-6, LAMBDA)
    with pytest.raises(UnstableGeometryError):
        effective_mode(geom, Misalignment(transverse=1e-6, longitudinal=6e-6))


def test_mirror_solid_degenerate_and_hemisphere():
    small = mirror_solid(250e-6, 1e-12)
    assert small.sagitta == pytest.approx(0.0, abs=1e-20)
    assert small.volume == pytest.approx(0.0, abs=1e-40)
    hemi = mirror_solid(250e-6, 500e-6)
    assert hemi.sagitta == pytest.approx(250e-6, rel=1e-12)
    assert hemi.volume == pytest.approx(2.0 / 3.0 * math.pi * (250e-6) ** 3, rel=1e-12)


def test_mirror_solid_reference_case():
    solid = mirror_solid(250e-6, 100e-6)
    assert solid.sagitta == pytest.approx(5.0510257216821902e-06, rel=1e-12)
    assert solid.volume == pytest.approx(1.9902805766145131e-14, rel=1e-12)


def test_mirror_solid_rejects_oversize_cap():
    with pytest.raises(InvalidCapError):
        mirror_solid(100e-6, 201e-6)


@given(st.floats(50e-6, 1e-3), st.floats(0.05, 0.95), st.floats(1.01, 1.6))
@settings(max_examples=80)
def test_mirror_solid_monotone_in_diameter(roc, dfrac, grow):
    d1 = dfrac * 2.0 * roc
    d2 = min(grow * d1, 2.0 * roc)
    s1, s2 = mirror_solid(roc, d1), mirror_solid(roc, d2)
    if d2 > d1:
        assert s2.sagitta > s1.sagitta
        assert s2.volume > s1.volume


@given(st.floats(50e-6, 1e-3), st.floats(0.1, 0.999))
@settings(max_examples=60)
def test_cap_diameter_inverts_volume(roc, dfrac):
    d = dfrac * 2.0 * roc
    volume = mirror_solid(roc, d).volume
    assert cap_diameter_for_volume(roc, volume) == pytest.approx(d, rel=1e-9)


def test_cap_diameter_saturates_at_hemisphere():
    roc = 200e-6
    hemi = 2.0 / 3.0 * math.pi * roc**3
    assert cap_diameter_for_volume(roc, 2 * hemi) == pytest.approx(2 * roc)


def test_stability_margin_cases():
    aligned = Misalignment(0.0, 0.0)
    # half-confocal interior point
    assert stability_margin(CavityGeometry(250e-6, 250e-6, 100e-6, LAMBDA), aligned) > 0
    # concentric boundary through longitudinal offset: L' = L + m_par = 2R
    geom = CavityGeometry(396e-6, 200e-6, 100e-6, LAMBDA)
    assert stability_margin(geom, Misalignment(0.0, 4e-6)) == pytest.approx(0.0, abs=1e-12)
    # interpenetrating mirrors: L < 2h
    deep = CavityGeometry(20e-6, 100e-6, 198e-6, LAMBDA)
    assert stability_margin(deep, aligned) < 0
    # past the concentric point entirely
    assert stability_margin(CavityGeometry(500e-6, 200e-6, 100e-6, LAMBDA), aligned) < 0


def test_misalignment_validation_and_uniform():
    with pytest.raises(ValidationError):
        Misalignment(-1e-6, 0.0)
    m = Misalignment.uniform(5e-6)
    assert m.transverse == m.longitudinal == 5e-6
    assert not m.is_zero
    assert Misalignment(0.0, 0.0).is_zero
