"""Cooperativity, photon generation/extraction probabilities, analytic
optimal outcoupler transmission, and remote-entanglement rate bookkeeping.

The chain: intrinsic cooperativity C_in (set by geometry, atom and intrinsic
loss) bounds the extraction probability at 1 - 2/(1 + sqrt(1 + 2 C_in)),
reached when the outcoupler transmission takes its analytic optimum
T_opt = L_in sqrt(1 + 2 C_in). At finite T the operating cooperativity is
C = C_in L_in / (T + L_in) (intrinsic cooperativity rescaled by
kappa_in/kappa) and the extraction probability factorises into generation
times escape, [2C/(2C+1)] [T/(T + L_in)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateCavityError, LosslessCavityError, ValidationError


@dataclass(frozen=True)
class PerformancePoint:
    """Operating point of a cavity design.

    c_in: intrinsic cooperativity
    c: operating cooperativity at the chosen transmission
    p_gen: photon generation probability bound at that cooperativity
    p_ext: extraction probability
    t_opt: analytically optimal outcoupler transmission
    """

    c_in: float
    c: float
    p_gen: float
    p_ext: float
    t_opt: float

    def __post_init__(self) -> None:
        eps = 1e-9
        if not (-eps <= self.p_ext <= self.p_gen + eps <= 1.0 + 2 * eps):
            raise ValidationError(
                f"require 0 <= p_ext <= p_gen <= 1, got p_ext={self.p_ext}, p_gen={self.p_gen}"
            )
        if self.c > self.c_in * (1.0 + 1e-12):
            raise ValidationError("operating cooperativity cannot exceed the intrinsic one")


@dataclass(frozen=True)
class NetworkBudget:
    """Efficiencies and attempt-cycle time contributions of the photonic link.

    net_efficiency, det_efficiency: photon network transmission and detector
    efficiency, in [0, 1]; carried as opaque scalars.
    prep_time: state preparation and pumping time (s)
    latency: summed optical/electronic latencies per attempt (s)
    photon_time: characteristic photon production window (s)
    transit_time: two-node signal propagation time, link length over c (s)
    """

    net_efficiency: float
    det_efficiency: float
    prep_time: float = 0.0
    latency: float = 0.0
    photon_time: float = 0.0
    transit_time: float = 0.0

    def __post_init__(self) -> None:
        for name in ("net_efficiency", "det_efficiency"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        for name in ("prep_time", "latency", "photon_time", "transit_time"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be >= 0")

    @property
    def attempt_period(self) -> float:
        return self.prep_time + self.latency + self.photon_time + self.transit_time


def intrinsic_cooperativity(g0: float, gamma: float, kappa_in: float) -> float:
    """C_in = g0^2 / (2 gamma kappa_in), cooperativity against intrinsic loss only."""
    if gamma <= 0.0:
        raise ValidationError("gamma must be > 0")
    if kappa_in < 0.0:
        raise ValidationError("kappa_in must be >= 0")
    if kappa_in == 0.0:
        raise LosslessCavityError("kappa_in = 0: intrinsic cooperativity unbounded")
    return g0 * g0 / (2.0 * gamma * kappa_in)


def geometric_cooperativity(alpha: float, theta: float, l_in: float) -> float:
    """C_in = 6 alpha theta^2 / L_in: branching ratio times geometry over loss.

    Algebraically identical to g0^2/(2 gamma kappa_in) with g0 and kappa_in
    evaluated on the same (effective) mode; the separated form makes the
    atomic, geometric and mirror contributions independent.
    """
    if l_in < 0.0:
        raise ValidationError("intrinsic loss must be >= 0")
    if l_in == 0.0:
        raise LosslessCavityError("zero intrinsic loss: cooperativity unbounded")
    return 6.0 * alpha * theta * theta / l_in


def p_gen_bound(c: float) -> float:
    """Adiabatic photon generation bound 2C/(2C + 1)."""
    if c < 0.0:
        raise ValidationError("cooperativity must be >= 0")
    return 2.0 * c / (2.0 * c + 1.0)


def p_ext_operating(c_in: float, transmission: float, l_in: float) -> float:
    """Extraction probability at a concrete outcoupler transmission.

    C = C_in L_in / (T + L_in); returns [2C/(2C+1)] [T/(T + L_in)].
    """
    if transmission < 0.0 or l_in < 0.0:
        raise ValidationError("transmission and loss must be >= 0")
    total = transmission + l_in
    if total == 0.0:
        raise DegenerateCavityError("T + L_in = 0: extraction undefined")
    c = c_in * l_in / total
    return p_gen_bound(c) * (transmission / total)


def p_ext_bound(c_in: float) -> float:
    """Best-case extraction probability 1 - 2/(1 + sqrt(1 + 2 C_in)).

    Equals the maximum of p_ext_operating over transmission, attained at
    optimal_transmission(c_in, l_in).
    """
    if c_in < 0.0:
        raise ValidationError("cooperativity must be >= 0")
    return 1.0 - 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * c_in))


def optimal_transmission(c_in: float, l_in: float) -> float:
    """Analytic optimum of the outcoupler transmission, T_opt = L_in sqrt(1 + 2 C_in)."""
    if c_in < 0.0 or l_in < 0.0:
        raise ValidationError("cooperativity and loss must be >= 0")
    return l_in * math.sqrt(1.0 + 2.0 * c_in)


def operating_point(c_in: float, l_in: float) -> PerformancePoint:
    """Full performance point with the transmission set to its analytic optimum."""
    t_opt = optimal_transmission(c_in, l_in)
    if t_opt + l_in == 0.0:
        # c_in = 0 and l_in = 0: nothing couples, nothing escapes
        raise DegenerateCavityError("degenerate lossless, uncoupled cavity")
    c = c_in * l_in / (t_opt + l_in)
    return PerformancePoint(
        c_in=c_in,
        c=c,
        p_gen=p_gen_bound(c),
        p_ext=p_ext_bound(c_in),
        t_opt=t_opt,
    )


def bell_rate(p_ext: float, net: NetworkBudget) -> float:
    """Remote Bell-pair rate (1/2) (P_ext e_net e_det)^2 / tau_att (1/s).

    Quadratic in the single-photon detection probability because both nodes
    must herald; the 1/2 accounts for anti-coincidence outcomes intrinsic to
    the two-photon protocol.
    """
    if not 0.0 <= p_ext <= 1.0:
        raise ValidationError("p_ext must lie in [0, 1]")
    tau = net.attempt_period
    if tau <= 0.0:
        raise ValidationError("attempt period must be > 0")
    success = p_ext * net.net_efficiency * net.det_efficiency
    return 0.5 * success * success / tau
