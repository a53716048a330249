"""Driven three-level lambda system coupled to a single decaying cavity mode.

Single-excitation amplitude model on the basis {|0, n=0>, |e, n=0>, |1, n=1>}
with non-Hermitian decay: the excited state loses amplitude at the atomic
half-linewidth gamma (spontaneous emission, terminal) and the one-photon
state at the cavity field decay kappa (photon emitted from the cavity, the
useful channel). On Raman resonance the amplitudes obey

    i c0' = (Omega(t)/2) ce
    i ce' = (Omega(t)/2) c0 + g c1 + (delta - i gamma) ce
    i c1' = g ce - i kappa c1

from c0(0) = 1, with the sine-squared drive Omega(t) = peak sin^2(pi t / width)
on [0, width]. The integrated photon output P_out(tau) = int_0^tau 2 kappa
|c1|^2 dt approaches the slow-driving bound 2C/(2C+1) for long windows.

Equations are integrated with an adaptive embedded Dormand-Prince 5(4) pair;
the drive envelope is evaluated analytically at the stage times.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.optimize import minimize as sp_minimize

from .errors import NumericalError, StepSizeUnderflowError, ValidationError
from .grids import Axis, SweepGrid
from .performance import p_gen_bound


@dataclass(frozen=True)
class LambdaCavitySystem:
    """Rates of the ion-cavity system (all rad/s).

    g: ion-cavity coupling (0 allowed: decoupled cavity)
    kappa: cavity field amplitude decay
    gamma: atomic half-linewidth of the excited state
    """

    g: float
    kappa: float
    gamma: float

    def __post_init__(self) -> None:
        if self.g < 0.0:
            raise ValidationError("g must be >= 0")
        if not (self.kappa > 0.0 and self.gamma > 0.0):
            raise ValidationError("kappa and gamma must be > 0")

    @property
    def cooperativity(self) -> float:
        return self.g * self.g / (2.0 * self.gamma * self.kappa)

    @classmethod
    def from_cooperativity(
        cls, c: float, kappa: float, gamma: float
    ) -> "LambdaCavitySystem":
        if c < 0.0:
            raise ValidationError("cooperativity must be >= 0")
        return cls(g=math.sqrt(2.0 * c * gamma * kappa), kappa=kappa, gamma=gamma)


@dataclass(frozen=True)
class PulseSpec:
    """Sine-squared drive pulse: Omega(t) = peak sin^2(pi t / width) on [0, width]."""

    peak: float
    width: float

    def __post_init__(self) -> None:
        if self.peak < 0.0:
            raise ValidationError("peak Rabi frequency must be >= 0")
        if not self.width > 0.0:
            raise ValidationError("pulse width must be > 0")

    def amplitude(self, t: float) -> float:
        if 0.0 <= t <= self.width:
            s = math.sin(math.pi * t / self.width)
            return self.peak * s * s
        return 0.0


@dataclass(frozen=True)
class SimResult:
    """Outcome of one pulse simulation.

    p_out: integrated photon output probability over [0, tau]
    waveform: (n, 2) array of (t, instantaneous emission rate 2 kappa |c1|^2)
    norm_leak: accumulated spontaneous-emission probability
    steps: accepted + rejected integrator steps
    residual_norm: |c0|^2 + |ce|^2 + |c1|^2 remaining at tau
    conservation_error: max |norm + integrated leaks - 1| over the samples
    """

    p_out: float
    waveform: np.ndarray
    norm_leak: float
    steps: int
    residual_norm: float
    conservation_error: float


@njit(cache=True)
def _rhs(t, y, g, kappa, gamma, delta, peak, width):
    om = 0.0
    if 0.0 <= t <= width:
        s = math.sin(math.pi * t / width)
        om = peak * s * s
    ho = 0.5 * om
    x0, yi0, xe, ye, x1, y1 = y[0], y[1], y[2], y[3], y[4], y[5]
    out = np.empty(8)
    out[0] = ho * ye
    out[1] = -ho * xe
    out[2] = delta * ye + ho * yi0 + g * y1 - gamma * xe
    out[3] = -delta * xe - ho * x0 - g * x1 - gamma * ye
    out[4] = g * ye - kappa * x1
    out[5] = -g * xe - kappa * y1
    out[6] = 2.0 * kappa * (x1 * x1 + y1 * y1)
    out[7] = 2.0 * gamma * (xe * xe + ye * ye)
    return out


@njit(cache=True)
def _integrate(g, kappa, gamma, delta, peak, width, tau, rtol, atol, max_steps, sample_times):
    """Adaptive Dormand-Prince 5(4) propagation to tau with exact stops at
    the requested sample times. Returns (status, y, attempts, emit, normerr)
    with status 0 ok, 1 step budget exhausted, 2 step-size underflow.
    """
    y = np.zeros(8)
    y[0] = 1.0
    n_s = sample_times.size
    emit = np.zeros(n_s)
    normerr = np.zeros(n_s)
    i_s = 0

    rate = max(g, max(kappa, max(gamma, max(abs(delta), peak))))
    if width > 0.0:
        rate = max(rate, 1.0 / width)
    t = 0.0
    h = 1e-3 / rate
    hmin = 1e-13 / rate
    attempts = 0
    k1 = _rhs(t, y, g, kappa, gamma, delta, peak, width)
    k = np.empty((7, 8))
    status = 0

    while True:
        while i_s < n_s and sample_times[i_s] <= t:
            emit[i_s] = 2.0 * kappa * (y[4] * y[4] + y[5] * y[5])
            norm = (
                y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]
                + y[4] * y[4] + y[5] * y[5] + y[6] + y[7]
            )
            normerr[i_s] = abs(norm - 1.0)
            i_s += 1
        if t >= tau:
            break
        t_stop = tau
        if i_s < n_s and sample_times[i_s] < t_stop:
            t_stop = sample_times[i_s]
        hit = False
        h_eff = h
        if h >= (t_stop - t) * (1.0 - 1e-12):
            h_eff = t_stop - t
            hit = True

        # Stages unrolled (numba-friendly, avoids tableau indexing overhead).
        k[0] = k1
        y2 = y + h_eff * (0.2 * k[0])
        k[1] = _rhs(t + 0.2 * h_eff, y2, g, kappa, gamma, delta, peak, width)
        y3 = y + h_eff * (0.075 * k[0] + 0.225 * k[1])
        k[2] = _rhs(t + 0.3 * h_eff, y3, g, kappa, gamma, delta, peak, width)
        y4 = y + h_eff * (
            (44.0 / 45.0) * k[0] + (-56.0 / 15.0) * k[1] + (32.0 / 9.0) * k[2]
        )
        k[3] = _rhs(t + 0.8 * h_eff, y4, g, kappa, gamma, delta, peak, width)
        y5 = y + h_eff * (
            (19372.0 / 6561.0) * k[0]
            + (-25360.0 / 2187.0) * k[1]
            + (64448.0 / 6561.0) * k[2]
            + (-212.0 / 729.0) * k[3]
        )
        k[4] = _rhs(t + (8.0 / 9.0) * h_eff, y5, g, kappa, gamma, delta, peak, width)
        y6 = y + h_eff * (
            (9017.0 / 3168.0) * k[0]
            + (-355.0 / 33.0) * k[1]
            + (46732.0 / 5247.0) * k[2]
            + (49.0 / 176.0) * k[3]
            + (-5103.0 / 18656.0) * k[4]
        )
        k[5] = _rhs(t + h_eff, y6, g, kappa, gamma, delta, peak, width)
        ynew = y + h_eff * (
            (35.0 / 384.0) * k[0]
            + (500.0 / 1113.0) * k[2]
            + (125.0 / 192.0) * k[3]
            + (-2187.0 / 6784.0) * k[4]
            + (11.0 / 84.0) * k[5]
        )
        k[6] = _rhs(t + h_eff, ynew, g, kappa, gamma, delta, peak, width)
        errv = h_eff * (
            (71.0 / 57600.0) * k[0]
            + (-71.0 / 16695.0) * k[2]
            + (71.0 / 1920.0) * k[3]
            + (-17253.0 / 339200.0) * k[4]
            + (22.0 / 525.0) * k[5]
            + (-1.0 / 40.0) * k[6]
        )
        err = 0.0
        bad = False
        for i in range(8):
            ay = abs(y[i])
            an = abs(ynew[i])
            sc = atol + rtol * (ay if ay > an else an)
            e = errv[i] / sc
            err += e * e
            if not math.isfinite(ynew[i]):
                bad = True
        err = math.sqrt(err / 8.0)

        attempts += 1
        if attempts >= max_steps:
            status = 1
            break

        if bad or not math.isfinite(err):
            h = 0.2 * h_eff
            if h < hmin:
                status = 2
                break
            continue
        if err <= 1.0:
            t = t_stop if hit else t + h_eff
            y = ynew
            k1 = k[6]
            fac = 5.0
            if err > 0.0:
                fac = 0.9 * err ** -0.2
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            h_new = h_eff * fac
            h = h_new if not hit else max(h, h_new)
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            h = h_eff * fac
            if h < hmin:
                status = 2
                break

    return status, y, attempts, emit, normerr


def simulate(
    system: LambdaCavitySystem,
    pulse: PulseSpec,
    tau: float,
    tol: float = 1e-9,
    delta: float = 0.0,
    samples: int = 512,
    max_steps: int = 50_000_000,
) -> SimResult:
    """Propagate the driven system over [0, tau] and integrate the photon output.

    tol bounds the integrator's relative local error per step; the step
    controller applies it with a 10x safety margin so that accumulated
    quantities (p_out, leaks) also track tol. ``samples`` uniform output
    times record the emission waveform and the probability conservation
    residual; samples=0 skips recording (fast path for searches). delta is
    the common drive/cavity detuning from the excited state (rad/s), zero on
    Raman resonance.
    """
    if not tau > 0.0:
        raise ValidationError("tau must be > 0")
    if not tol > 0.0:
        raise ValidationError("tol must be > 0")
    if tau < pulse.width:
        warnings.warn(
            "output window tau is shorter than the drive pulse; "
            "the photon is still being produced at the cutoff",
            stacklevel=2,
        )
    sample_times = (
        np.linspace(0.0, tau, samples + 1)[1:] if samples > 0 else np.empty(0)
    )
    rtol = 0.1 * tol
    status, y, steps, emit, normerr = _integrate(
        system.g,
        system.kappa,
        system.gamma,
        delta,
        pulse.peak,
        pulse.width,
        tau,
        rtol,
        1e-4 * rtol,
        max_steps,
        sample_times,
    )
    if status == 2:
        raise StepSizeUnderflowError(
            f"integrator step collapsed for g={system.g}, kappa={system.kappa}, "
            f"gamma={system.gamma}, pulse={pulse}"
        )
    if status == 1:
        raise NumericalError(f"integrator exceeded {max_steps} step attempts")
    if samples > 0:
        waveform = np.column_stack(
            [np.concatenate([[0.0], sample_times]), np.concatenate([[0.0], emit])]
        )
        conservation = float(np.max(normerr))
    else:
        waveform = np.empty((0, 2))
        norm = float(np.dot(y[:6], y[:6]) + y[6] + y[7])
        conservation = abs(norm - 1.0)
    return SimResult(
        p_out=float(y[6]),
        waveform=waveform,
        norm_leak=float(y[7]),
        steps=int(steps),
        residual_norm=float(np.dot(y[:6], y[:6])),
        conservation_error=conservation,
    )


def adiabatic_limit(c: float) -> float:
    """Slow-driving photon generation bound 2C/(2C+1)."""
    return p_gen_bound(c)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, iters: int = 14) -> tuple[float, float]:
    """Golden-section maximisation of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimize_pulse(
    system: LambdaCavitySystem,
    tau: float,
    tol: float = 1e-9,
    search_tol: float = 1e-6,
    n_peaks: int = 25,
    n_widths: int = 24,
    width_max_factor: float = 4.0,
    include: tuple[PulseSpec, ...] = (),
) -> tuple[PulseSpec, SimResult]:
    """Maximise the photon output over (peak Rabi frequency, pulse width).

    Log grid of peak amplitudes ([0.01, 100] times the fastest system rate)
    against a log grid of widths on [0.05, width_max_factor] tau; the two
    best separated grid cells (the landscape can have a short-pulse and an
    adiabatic branch) are refined by golden-section passes on each
    coordinate plus a local simplex polish. The width may exceed the output
    window: the drive can still be rising when collection stops at tau.
    Scouting runs use the looser ``search_tol``; the winning pulse is
    re-simulated at ``tol`` and that result is returned. Extra candidate
    pulses (warm starts) can be supplied via ``include``.
    """
    if not tau > 0.0:
        raise ValidationError("tau must be > 0")
    r_max = max(system.g, system.kappa, system.gamma)
    peaks = r_max * np.logspace(-2.0, 2.0, n_peaks)
    w_lo, w_hi = 0.05 * tau, width_max_factor * tau
    widths = np.logspace(math.log10(w_lo), math.log10(w_hi), n_widths)

    cache: dict[tuple[float, float], float] = {}

    def p_out(peak: float, width: float) -> float:
        width = min(max(width, 1e-6 * tau), w_hi)
        peak = max(peak, 0.0)
        key = (peak, width)
        if key not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cache[key] = simulate(
                    system, PulseSpec(peak, width), tau, tol=search_tol, samples=0
                ).p_out
        return cache[key]

    grid = np.array([[p_out(pk, wd) for wd in widths] for pk in peaks])
    i0, j0 = np.unravel_index(int(np.argmax(grid)), grid.shape)
    seeds = [(peaks[i0], widths[j0])]
    # Second-best cell outside the winning cell's neighbourhood, in case the
    # runner-up branch refines past the leader.
    masked = grid.copy()
    masked[max(0, i0 - 2) : i0 + 3, max(0, j0 - 2) : j0 + 3] = -np.inf
    if np.isfinite(masked).any():
        i1, j1 = np.unravel_index(int(np.argmax(masked)), masked.shape)
        if grid[i1, j1] > 0.8 * grid[i0, j0]:
            seeds.append((peaks[i1], widths[j1]))
    for cand in include:
        if 0.0 < cand.peak and 0.0 < cand.width <= w_hi:
            seeds.append((cand.peak, cand.width))

    peak_step = (peaks[-1] / peaks[0]) ** (1.0 / (n_peaks - 1))
    width_step = (widths[-1] / widths[0]) ** (1.0 / (n_widths - 1))
    best_peak, best_width, best_val = seeds[0][0], seeds[0][1], -1.0
    for pk, wd in seeds:
        for _ in range(3):
            lp, _ = _golden_max(
                lambda x: p_out(10.0**x, wd),
                math.log10(pk / peak_step),
                math.log10(pk * peak_step),
            )
            pk = 10.0**lp
            lw, _ = _golden_max(
                lambda x: p_out(pk, 10.0**x),
                math.log10(max(wd / width_step, 1e-6 * tau)),
                math.log10(min(wd * width_step, w_hi)),
            )
            wd = 10.0**lw
        res = sp_minimize(
            lambda x: -p_out(10.0 ** x[0], 10.0 ** x[1]),
            [math.log10(pk), math.log10(wd)],
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 120},
        )
        pk, wd = 10.0 ** res.x[0], min(10.0 ** res.x[1], w_hi)
        val = p_out(pk, wd)
        if val > best_val:
            best_peak, best_width, best_val = pk, wd, val

    pulse = PulseSpec(best_peak, best_width)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return pulse, simulate(system, pulse, tau, tol=tol)


def _family_column(args) -> tuple[list[float], list[float], list[list[float]]]:
    (c, ratio, kappa_tau_values, gamma, tol, search_tol, n_peaks, n_widths) = args
    kappa = ratio * gamma
    system = LambdaCavitySystem.from_cooperativity(c, kappa, gamma)
    outs: list[float] = []
    cons: list[float] = []
    pulses: list[list[float]] = []
    warm: tuple[PulseSpec, ...] = ()
    for kt in kappa_tau_values:
        tau = kt / kappa
        pulse, result = optimize_pulse(
            system,
            tau,
            tol=tol,
            search_tol=search_tol,
            n_peaks=n_peaks,
            n_widths=n_widths,
            include=warm,
        )
        outs.append(result.p_out)
        cons.append(result.conservation_error)
        pulses.append([pulse.peak, pulse.width])
        warm = (pulse,)
    return outs, cons, pulses


def saturation_family(
    c_values,
    kappa_over_gamma_values,
    kappa_tau_values,
    gamma: float = 1.0,
    tol: float = 1e-9,
    search_tol: float = 1e-6,
    n_peaks: int = 25,
    n_widths: int = 20,
    workers: int = 1,
) -> SweepGrid:
    """Optimised photon output versus window length for a family of systems.

    For every (cooperativity, kappa/gamma) pair and every dimensionless
    window kappa*tau, records the best p_out found by ``optimize_pulse``.
    Windows are processed in ascending order and each best pulse warm-starts
    the next window, so each curve is non-decreasing by construction up to
    integrator tolerance. The pair list, the winning pulses and the
    conservation residuals are stored in ``fixed``.
    """
    c_values = [float(c) for c in c_values]
    ratios = [float(r) for r in kappa_over_gamma_values]
    kts = np.sort(np.asarray(kappa_tau_values, dtype=float))
    if kts.size == 0 or kts[0] <= 0.0:
        raise ValidationError("kappa_tau values must be positive")
    combos = [(c, r) for c in c_values for r in ratios]
    jobs = [
        (c, r, list(kts), gamma, tol, search_tol, n_peaks, n_widths) for c, r in combos
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_family_column, jobs))
    else:
        columns = [_family_column(j) for j in jobs]

    values = np.column_stack([np.array(col[0]) for col in columns])
    feasible = np.ones_like(values, dtype=bool)
    return SweepGrid(
        axes=(
            Axis("kappa_tau", kts, unit="-"),
            Axis("combo", np.arange(len(combos), dtype=float), unit="index"),
        ),
        values=values,
        feasible=feasible,
        quantity="p_out",
        unit="-",
        fixed={
            "combos": [{"c": c, "kappa_over_gamma": r} for c, r in combos],
            "gamma": gamma,
            "tol": tol,
            "conservation": [col[1] for col in columns],
            "pulses": [col[2] for col in columns],
        },
    )
