import math

import numpy as np
import pytest

from ioncavity.geometry import CavityGeometry, Misalignment, stability_margin


def draw_stable_case(rng, misaligned=True, wavelength=854e-9):
    """One random stable, assemblable cavity (+ misalignment) for property tests."""
    for _ in range(500):
        roc = 10 ** rng.uniform(math.log10(50e-6), math.log10(1.0e-3))
        length = rng.uniform(0.08, 0.92) * 2.0 * roc
        diameter = rng.uniform(0.15, 1.4) * roc
        m = Misalignment(
            transverse=rng.uniform(0.0, 8e-6) if misaligned else 0.0,
            longitudinal=rng.uniform(0.0, 8e-6) if misaligned else 0.0,
        )
        geom = CavityGeometry(length, roc, diameter, wavelength)
        if stability_margin(geom, m) > 0.02:
            return geom, m
    raise RuntimeError("failed to draw a stable cavity")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
