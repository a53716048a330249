import math

import numpy as np
import pytest

from ioncavity.errors import NumericalError, StepSizeUnderflowError, ValidationError
from ioncavity.vstirap import (
    LambdaCavitySystem,
    PulseSpec,
    SimResult,
    adiabatic_limit,
    optimize_pulse,
    saturation_family,
    simulate,
)


def rk4_reference(g, kappa, gamma, peak, width, tau, dt):
    """Independent fixed-step classic Runge-Kutta integration of the same
    amplitude equations; returns the integrated photon output probability."""

    def rhs(t, y):
        om = peak * math.sin(math.pi * t / width) ** 2 if 0.0 <= t <= width else 0.0
        ho = 0.5 * om
        x0, y0, xe, ye, x1, y1 = y[0], y[1], y[2], y[3], y[4], y[5]
        return np.array(
            [
                ho * ye,
                -ho * xe,
                ho * y0 + g * y1 - gamma * xe,
                -ho * x0 - g * x1 - gamma * ye,
                g * ye - kappa * x1,
                -g * xe - kappa * y1,
                2.0 * kappa * (x1 * x1 + y1 * y1),
                2.0 * gamma * (xe * xe + ye * ye),
            ]
        )

    steps = int(round(tau / dt))
    y = np.zeros(8)
    y[0] = 1.0
    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return y[6]


def test_undriven_system_emits_nothing():
    system = LambdaCavitySystem.from_cooperativity(10.0, 1.0, 1.0)
    result = simulate(system, PulseSpec(0.0, 30.0), 40.0)
    assert result.p_out == 0.0
    assert result.norm_leak == 0.0
    assert result.residual_norm == pytest.approx(1.0, abs=1e-12)


def test_decoupled_cavity_emits_nothing():
    system = LambdaCavitySystem(0.0, 1.0, 1.0)
    result = simulate(system, PulseSpec(3.0, 30.0), 40.0)
    assert result.p_out == 0.0


def test_matches_fixed_step_reference():
    # C = 10, kappa = gamma, near-optimal pulse, kappa*tau = 40
    system = LambdaCavitySystem.from_cooperativity(10.0, 1.0, 1.0)
    pulse = PulseSpec(5.71, 39.99)
    result = simulate(system, pulse, 40.0, tol=1e-9)
    reference = rk4_reference(system.g, 1.0, 1.0, pulse.peak, pulse.width, 40.0, dt=1e-4)
    assert abs(result.p_out - reference) < 1e-6


def test_probability_conservation_at_all_samples():
    system = LambdaCavitySystem.from_cooperativity(1.0, 2.0, 0.5)
    result = simulate(system, PulseSpec(4.0, 15.0), 25.0, tol=1e-9, samples=300)
    assert result.conservation_error <= 10 * 1e-9
    total = result.p_out + result.norm_leak + result.residual_norm
    assert total == pytest.approx(1.0, abs=1e-8)


def test_output_bounded_by_adiabatic_limit():
    for c in (0.1, 1.0, 10.0):
        system = LambdaCavitySystem.from_cooperativity(c, 1.0, 1.0)
        for peak, width in ((2.0, 30.0), (8.0, 10.0), (0.5, 40.0)):
            result = simulate(system, PulseSpec(peak, width), 40.0)
            assert result.p_out <= adiabatic_limit(c) + 1e-4


def test_tolerance_refinement_converges():
    system = LambdaCavitySystem.from_cooperativity(10.0, 1.0, 1.0)
    pulse = PulseSpec(5.71, 39.99)
    coarse = simulate(system, pulse, 40.0, tol=1e-6, samples=0).p_out
    fine = simulate(system, pulse, 40.0, tol=5e-7, samples=0).p_out
    assert abs(coarse - fine) < 1e-6


def test_scaling_invariance():
    # scaling all rates by s and all times by 1/s leaves p_out unchanged
    s = 3.7
    base = simulate(
        LambdaCavitySystem(2.3, 1.1, 0.7), PulseSpec(4.2, 17.0), 30.0, tol=1e-10, samples=0
    )
    scaled = simulate(
        LambdaCavitySystem(2.3 * s, 1.1 * s, 0.7 * s),
        PulseSpec(4.2 * s, 17.0 / s),
        30.0 / s,
        tol=1e-10,
        samples=0,
    )
    assert abs(base.p_out - scaled.p_out) < 1e-10


def test_waveform_matches_integrated_output():
    system = LambdaCavitySystem.from_cooperativity(10.0, 1.0, 1.0)
    result = simulate(system, PulseSpec(5.71, 30.0), 40.0, samples=4000)
    t = result.waveform[:, 0]
    rate = result.waveform[:, 1]
    integral = float(np.trapz(rate, t))
    assert integral == pytest.approx(result.p_out, abs=2e-4)


def test_warns_when_window_shorter_than_pulse():
    system = LambdaCavitySystem.from_cooperativity(1.0, 1.0, 1.0)
    with pytest.warns(UserWarning):
        simulate(system, PulseSpec(2.0, 10.0), 5.0)


def test_adiabatic_limit_values():
    assert adiabatic_limit(0.1) == pytest.approx(1.0 / 6.0, rel=1e-12)
    assert adiabatic_limit(1.0) == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert adiabatic_limit(10.0) == pytest.approx(20.0 / 21.0, rel=1e-12)


def test_validation_errors():
    with pytest.raises(ValidationError):
        LambdaCavitySystem(-1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        LambdaCavitySystem(1.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        PulseSpec(-1.0, 1.0)
    with pytest.raises(ValidationError):
        PulseSpec(1.0, 0.0)
    system = LambdaCavitySystem(1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        simulate(system, PulseSpec(1.0, 1.0), -1.0)


def test_integrator_failure_signals():
    system = LambdaCavitySystem.from_cooperativity(10.0, 1.0, 1.0)
    with pytest.raises(NumericalError):
        simulate(system, PulseSpec(5.0, 30.0), 40.0, max_steps=10)
    with pytest.raises(StepSizeUnderflowError):
        simulate(system, PulseSpec(5.0, 30.0), 40.0, delta=math.nan)


def test_pulse_amplitude_shape():
    pulse = PulseSpec(peak=2.0, width=4.0)
    assert pulse.amplitude(-0.1) == 0.0
    assert pulse.amplitude(0.0) == 0.0
    assert pulse.amplitude(2.0) == pytest.approx(2.0, rel=1e-12)
    assert pulse.amplitude(4.0) == pytest.approx(0.0, abs=1e-15)
    assert pulse.amplitude(4.1) == 0.0


def test_optimize_pulse_long_window_reaches_limit():
    system = LambdaCavitySystem.from_cooperativity(1.0, 1.0, 1.0)
    _, result = optimize_pulse(system, 60.0)
    assert abs(result.p_out - 2.0 / 3.0) < 0.02 * (2.0 / 3.0)


def test_optimize_pulse_short_window_reference_case():
    # C = 10, kappa = gamma, kappa*tau = 10: within 10% of 20/21
    system = LambdaCavitySystem.from_cooperativity(10.0, 1.0, 1.0)
    _, result = optimize_pulse(system, 10.0)
    assert result.p_out >= 0.9 * 20.0 / 21.0
    assert result.p_out <= 20.0 / 21.0 + 1e-4


def test_optimize_pulse_monotone_in_window():
    system = LambdaCavitySystem.from_cooperativity(1.0, 1.0, 1.0)
    pulse_short, res_short = optimize_pulse(system, 6.0)
    _, res_long = optimize_pulse(system, 12.0, include=(pulse_short,))
    assert res_long.p_out >= res_short.p_out - 1e-9


def test_saturation_family_structure():
    grid = saturation_family([1.0], [1.0], [5.0, 10.0], search_tol=1e-5)
    assert grid.values.shape == (2, 1)
    assert bool(np.all(grid.feasible))
    assert grid.values[1, 0] >= grid.values[0, 0] - 1e-9
    assert grid.values[1, 0] <= adiabatic_limit(1.0) + 1e-4
    assert grid.fixed["combos"] == [{"c": 1.0, "kappa_over_gamma": 1.0}]
    assert len(grid.fixed["conservation"]) == 1
    assert len(grid.fixed["pulses"][0]) == 2


def test_sim_result_fields_present():
    system = LambdaCavitySystem.from_cooperativity(1.0, 1.0, 1.0)
    result = simulate(system, PulseSpec(2.0, 10.0), 15.0, samples=32)
    assert isinstance(result, SimResult)
    assert result.steps > 0
    assert result.waveform.shape == (33, 2)
    assert result.waveform[0, 0] == 0.0 and result.waveform[-1, 0] == pytest.approx(15.0)
