"""Constrained cavity design optimisation and parameter-sweep engines.

The design problem: maximise the photon extraction probability over cavity
length L, mirror curvature radius R and mirror diameter D, at the analytic
optimum of the outcoupler transmission, subject to a minimum length, a
mirror milling volume budget, a clipping-loss ceiling, mode stability under
the assumed misalignment, and a box bound on L and R. Because enlarging D
only ever reduces clipping, the volume budget binds at any optimum, so the
default search eliminates D by solving V(R, D) = V_max and runs Nelder-Mead
over (L, R) from random restarts until the two best restarts agree to 0.1%.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as sp_minimize

from .errors import (
    ConvergenceError,
    InvalidCapError,
    LosslessCavityError,
    NoFeasibleDesignError,
    UnknownQuantityError,
    UnstableGeometryError,
    ValidationError,
)
from .geometry import (
    CavityGeometry,
    Misalignment,
    _effective_mode,
    cap_diameter_for_volume,
    mirror_solid,
    stability_margin,
)
from .grids import Axis, SweepGrid
from .losses import LossBudget, cavity_rates, clipping_loss
from .performance import (
    PerformancePoint,
    geometric_cooperativity,
    operating_point,
    p_ext_operating,
)

DEGRADATION_FRACTIONS = (0.01, 0.05, 0.10)

SWEEP_QUANTITIES = (
    "clipping_loss",
    "theta_eff",
    "p_ext",
    "t_opt",
    "optimal_p_ext",
    "optimal_l",
    "optimal_r",
    "optimal_d",
    "optimal_t",
    "optimal_c_in",
    "optimal_kappa_out",
)

ROBUSTNESS_SCENARIOS = ("length-transmission", "radius-diameter", "misalignment-scatter")

_INFEASIBLE = (UnstableGeometryError, InvalidCapError, LosslessCavityError, ValidationError)


@dataclass(frozen=True)
class DesignConstraints:
    """Engineering envelope for the design optimisation.

    min_length: shortest cavity the experiment permits (m)
    volume_budget: milling volume available per mirror (m^3)
    misalignment: assumed worst-case offset M, applied both transversally
        and longitudinally (m)
    scatter_loss: assumed round-trip surface scattering loss
    clip_threshold: largest tolerable round-trip clipping loss
    box_max: upper bound on L and R to keep the search bounded (m)
    wavelength: mode wavelength (m); the 854 nm default is a common ion
        cavity-transition wavelength, not a normative choice
    alpha: cavity-arm branching ratio of the emitter
    """

    min_length: float
    volume_budget: float
    misalignment: float
    scatter_loss: float
    clip_threshold: float = 1e-6
    box_max: float = 3e-3
    wavelength: float = 854e-9
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if not self.min_length > 0.0:
            raise ValidationError("min_length must be > 0")
        if not self.volume_budget > 0.0:
            raise ValidationError("volume_budget must be > 0")
        if not self.clip_threshold > 0.0:
            raise ValidationError("clip_threshold must be > 0")
        if self.misalignment < 0.0 or self.scatter_loss < 0.0:
            raise ValidationError("misalignment and scatter_loss must be >= 0")
        if self.box_max < self.min_length:
            raise ValidationError("box_max must be >= min_length")
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError("alpha must lie in (0, 1]")

    @property
    def mis(self) -> Misalignment:
        return Misalignment.uniform(self.misalignment)


@dataclass(frozen=True)
class OptimalDesign:
    """Result of the constrained optimisation, with explicit constraint margins."""

    length: float
    roc: float
    diameter: float
    transmission: float
    p_ext: float
    c_in: float
    kappa_out: float
    restarts_used: int
    feasible: bool
    margins: dict = field(default_factory=dict)


def evaluate_design(
    length: float,
    roc: float,
    diameter: float,
    mis: Misalignment,
    scatter_loss: float,
    alpha: float,
    wavelength: float,
    clip_model: str = "single",
) -> PerformancePoint:
    """Full performance chain for one geometry.

    effective mode -> clipping loss -> intrinsic loss -> intrinsic
    cooperativity -> analytic transmission optimum -> extraction bound.
    Raises UnstableGeometryError for geometries without a stable,
    assemblable mode.
    """
    geom = CavityGeometry(length, roc, diameter, wavelength)
    if stability_margin(geom, mis) <= 0.0:
        raise UnstableGeometryError(
            f"no stable assemblable mode at L={length}, R={roc}, D={diameter}"
        )
    mode = _effective_mode(length, roc, wavelength, mis)
    clip = clipping_loss(geom, mis, model=clip_model)
    budget = LossBudget(scatter=scatter_loss, clip=clip)
    c_in = geometric_cooperativity(alpha, mode.divergence, budget.total)
    return operating_point(c_in, budget.total)


def _design_record(constraints: DesignConstraints, length: float, roc: float,
                   diameter: float, restarts: int) -> OptimalDesign:
    """Assemble the OptimalDesign for a converged geometry, margins included."""
    mis = constraints.mis
    geom = CavityGeometry(length, roc, diameter, constraints.wavelength)
    mode = _effective_mode(length, roc, constraints.wavelength, mis)
    clip = clipping_loss(geom, mis)
    budget = LossBudget(scatter=constraints.scatter_loss, clip=clip)
    point = operating_point(
        geometric_cooperativity(constraints.alpha, mode.divergence, budget.total),
        budget.total,
    )
    rates = cavity_rates(mode.length, point.t_opt, budget)
    volume = mirror_solid(roc, diameter).volume
    margins = {
        "stability": stability_margin(geom, mis),
        "clipping": constraints.clip_threshold - clip,
        "volume": constraints.volume_budget - volume,
        "length": length - constraints.min_length,
        "box": constraints.box_max - max(length, roc),
    }
    bad = {k: v for k, v in margins.items() if v < -1e-12 and k != "stability"}
    bad.update({k: v for k, v in margins.items() if k == "stability" and v <= 0.0})
    if bad:
        raise NoFeasibleDesignError(f"converged design violates constraints: {bad}")
    return OptimalDesign(
        length=length,
        roc=roc,
        diameter=diameter,
        transmission=point.t_opt,
        p_ext=point.p_ext,
        c_in=point.c_in,
        kappa_out=rates.kappa_out,
        restarts_used=restarts,
        feasible=True,
        margins=margins,
    )


def optimize(
    constraints: DesignConstraints,
    seed: int = 0,
    reduce_volume: bool = True,
    min_restarts: int = 4,
    max_restarts: int = 40,
    agreement: float = 1e-3,
    xatol_m: float = 5e-8,
) -> OptimalDesign:
    """Maximise extraction probability under the given constraints.

    Nelder-Mead (standard 1, 2, 0.5, 0.5 coefficients) from random starts
    drawn uniformly over the stable part of the box; infeasible simplex
    points receive a penalty that grows with the constraint violation.
    Restarts continue until the best two agree within ``agreement`` relative
    in extraction probability (at least ``min_restarts``); deterministic for
    a fixed seed.

    reduce_volume=True (default) saturates the milling budget analytically,
    D = D(R, V_max), and searches (L, R); reduce_volume=False searches
    (L, R, D) with the budget as a penalty constraint.
    """
    c = constraints
    mis = c.mis
    rng = np.random.default_rng(seed)
    scale = 1e6  # optimise in micrometres: O(1..1000) coordinates

    def diameter_for(roc: float) -> float:
        d = cap_diameter_for_volume(roc, c.volume_budget)
        return min(d, 2.0 * roc * (1.0 - 1e-12))

    def unpack(x: np.ndarray) -> tuple[float, float, float]:
        length, roc = x[0] / scale, x[1] / scale
        if reduce_volume:
            if roc <= 0.0:
                return length, roc, 0.0
            return length, roc, diameter_for(roc)
        return length, roc, x[2] / scale

    def objective(x: np.ndarray) -> float:
        length, roc, diameter = unpack(x)
        if length <= 0.0 or roc <= 0.0 or diameter <= 0.0:
            return 10.0
        violation = 0.0
        if length < c.min_length:
            violation += (c.min_length - length) / c.min_length
        if length > c.box_max:
            violation += (length - c.box_max) / c.box_max
        if roc > c.box_max:
            violation += (roc - c.box_max) / c.box_max
        if not reduce_volume:
            volume = mirror_solid(roc, diameter).volume if diameter <= 2 * roc else math.inf
            if volume > c.volume_budget:
                violation += min((volume - c.volume_budget) / c.volume_budget, 1e3)
        if diameter > 2.0 * roc:
            violation += (diameter - 2.0 * roc) / (2.0 * roc)
            return 1.0 + violation
        geom = CavityGeometry(length, roc, diameter, c.wavelength)
        margin = stability_margin(geom, mis)
        if margin <= 0.0:
            return 1.0 + violation - margin
        clip = clipping_loss(geom, mis)
        if clip > c.clip_threshold:
            violation += math.log10(clip / c.clip_threshold)
        if violation > 0.0:
            return 1.0 + violation
        mode = _effective_mode(length, roc, c.wavelength, mis)
        c_in = geometric_cooperativity(c.alpha, mode.divergence, c.scatter_loss + clip)
        return -(1.0 - 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * c_in)))

    def random_start() -> np.ndarray:
        for _ in range(1000):
            length = rng.uniform(c.min_length, c.box_max)
            roc = rng.uniform(length / 2.0, c.box_max)
            diameter = diameter_for(roc)
            if not reduce_volume:
                diameter = diameter * rng.uniform(0.3, 1.0)
            geom = CavityGeometry(length, roc, diameter, c.wavelength)
            if stability_margin(geom, mis) > 0.0:
                x = [length * scale, roc * scale]
                if not reduce_volume:
                    x.append(diameter * scale)
                return np.asarray(x)
        raise NoFeasibleDesignError("no stable random start found inside the box")

    nm_options = {
        "maxiter": 500,
        "xatol": xatol_m * scale,
        "fatol": 1e-9,
        "adaptive": False,
    }
    results: list[tuple[float, np.ndarray]] = []
    restarts = 0
    while restarts < max_restarts:
        x0 = random_start()
        res = sp_minimize(objective, x0, method="Nelder-Mead", options=nm_options)
        # re-polish with a fresh simplex: Nelder-Mead stagnates on the
        # penalty boundary when the simplex degenerates along it
        res = sp_minimize(objective, res.x, method="Nelder-Mead", options=nm_options)
        restarts += 1
        if res.fun < 0.0:
            results.append((-res.fun, res.x))
        if restarts >= min_restarts and len(results) >= 2:
            ranked = sorted(results, key=lambda t: -t[0])
            if (ranked[0][0] - ranked[1][0]) <= agreement * ranked[0][0]:
                break
    if not results:
        raise NoFeasibleDesignError(
            f"all {restarts} restarts ended infeasible for constraints {c}"
        )
    ranked = sorted(results, key=lambda t: -t[0])
    if len(ranked) < 2 or (ranked[0][0] - ranked[1][0]) > agreement * ranked[0][0]:
        raise ConvergenceError(
            f"best restarts disagree by more than {agreement:.1%} after {restarts} runs"
        )
    length, roc, diameter = unpack(ranked[0][1])
    return _design_record(constraints, length, roc, diameter, restarts)


def _mis_from(params: dict) -> Misalignment:
    if "m" in params:
        return Misalignment.uniform(params["m"])
    return Misalignment(
        transverse=params.get("m_perp", 0.0), longitudinal=params.get("m_par", 0.0)
    )


def _cell_quantity(quantity: str, params: dict, cell_seed: int) -> float:
    """Evaluate one sweep cell; raises the infeasibility family on bad cells."""
    lam = params.get("lambda", 854e-9)
    if quantity == "clipping_loss":
        geom = CavityGeometry(params["l"], params["r"], params["d"], lam)
        mis = _mis_from(params)
        if stability_margin(geom, mis) <= 0.0:
            raise UnstableGeometryError("unstable cell")
        return clipping_loss(geom, mis, model=params.get("clip_model", "single"))
    if quantity == "theta_eff":
        mode = _effective_mode(params["l"], params["r"], lam, _mis_from(params))
        return mode.divergence
    if quantity in ("p_ext", "t_opt"):
        if "theta" in params:
            c_in = geometric_cooperativity(
                params["alpha"], params["theta"], params["l_scat"]
            )
            point = operating_point(c_in, params["l_scat"])
        else:
            point = evaluate_design(
                params["l"],
                params["r"],
                params["d"],
                _mis_from(params),
                params["l_scat"],
                params["alpha"],
                lam,
                clip_model=params.get("clip_model", "single"),
            )
        return point.p_ext if quantity == "p_ext" else point.t_opt
    if quantity.startswith("optimal_"):
        constraints = DesignConstraints(
            min_length=params["l_min"],
            volume_budget=params["v_max"],
            misalignment=params.get("m", 0.0),
            scatter_loss=params["l_scat"],
            clip_threshold=params.get("clip_threshold", 1e-6),
            box_max=params.get("box_max", 3e-3),
            wavelength=lam,
            alpha=params["alpha"],
        )
        try:
            design = optimize(constraints, seed=cell_seed)
        except NoFeasibleDesignError as exc:
            raise UnstableGeometryError(str(exc)) from exc
        return {
            "optimal_p_ext": design.p_ext,
            "optimal_l": design.length,
            "optimal_r": design.roc,
            "optimal_d": design.diameter,
            "optimal_t": design.transmission,
            "optimal_c_in": design.c_in,
            "optimal_kappa_out": design.kappa_out,
        }[quantity]
    raise UnknownQuantityError(
        f"unknown sweep quantity {quantity!r}; expected one of {SWEEP_QUANTITIES}"
    )


def _sweep_cell(args) -> tuple[float, bool]:
    quantity, params, cell_seed = args
    try:
        return _cell_quantity(quantity, params, cell_seed), True
    except _INFEASIBLE:
        return math.nan, False


_QUANTITY_UNITS = {
    "clipping_loss": "-",
    "theta_eff": "rad",
    "p_ext": "-",
    "t_opt": "-",
    "optimal_p_ext": "-",
    "optimal_l": "m",
    "optimal_r": "m",
    "optimal_d": "m",
    "optimal_t": "-",
    "optimal_c_in": "-",
    "optimal_kappa_out": "rad/s",
}

AXIS_UNITS = {
    "l": "m",
    "r": "m",
    "d": "m",
    "m": "m",
    "m_perp": "m",
    "m_par": "m",
    "theta": "rad",
    "l_scat": "-",
    "l_min": "m",
    "v_max": "m^3",
    "t": "-",
    "lambda": "m",
}


def sweep(
    axes: tuple[Axis, Axis],
    fixed: dict,
    quantity: str,
    seed: int = 0,
    workers: int = 1,
) -> SweepGrid:
    """Evaluate ``quantity`` on the cartesian grid of two parameter axes.

    Cells where the cavity is unstable or the optimiser finds nothing
    feasible are marked infeasible rather than erroring. Deterministic for a
    fixed seed: per-cell seeds are derived from (seed, i, j), and parallel
    execution merges results in grid order.
    """
    if quantity not in SWEEP_QUANTITIES:
        raise UnknownQuantityError(
            f"unknown sweep quantity {quantity!r}; expected one of {SWEEP_QUANTITIES}"
        )
    ax1, ax2 = axes
    for ax in (ax1, ax2):
        if ax.name in fixed:
            raise ValidationError(f"axis {ax.name!r} also appears in fixed parameters")
    jobs = []
    for i, v1 in enumerate(ax1.values):
        for j, v2 in enumerate(ax2.values):
            params = dict(fixed)
            params[ax1.name] = float(v1)
            params[ax2.name] = float(v2)
            cell_seed = int(np.random.SeedSequence([seed, i, j]).generate_state(1)[0])
            jobs.append((quantity, params, cell_seed))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, jobs, chunksize=8))
    else:
        cells = [_sweep_cell(job) for job in jobs]
    shape = (ax1.values.size, ax2.values.size)
    values = np.array([v for v, _ in cells]).reshape(shape)
    feasible = np.array([ok for _, ok in cells]).reshape(shape)
    return SweepGrid(
        axes=(ax1, ax2),
        values=values,
        feasible=feasible,
        quantity=quantity,
        unit=_QUANTITY_UNITS[quantity],
        fixed=dict(fixed),
        seed=seed,
    )


def robustness(
    design: OptimalDesign,
    constraints: DesignConstraints,
    scenario: str,
    n_primary: int = 41,
    n_secondary: int = 81,
    length_span: float = 0.15,
    transmission_span: float = 2.5,
    roc_span: float = 0.20,
    diameter_span: float = 0.35,
    misalignment_factor: float = 2.0,
    scatter_factor: float = 2.5,
) -> SweepGrid:
    """Extraction probability of the fixed design under manufacturing error.

    length-transmission: vary (L, T) about the design, R and D fixed.
    radius-diameter: vary (R, D) with the volume budget lifted, L and T fixed.
    misalignment-scatter: keep the built design and re-evaluate under true
    misalignment and scattering loss that differ from the assumed values.

    The grid's fixed map carries the design point and the absolute
    ``degradation_levels`` at +-1%, 5%, 10% of the design extraction
    probability, ready for contour overlays.
    """
    if scenario not in ROBUSTNESS_SCENARIOS:
        raise ValidationError(
            f"unknown scenario {scenario!r}; expected one of {ROBUSTNESS_SCENARIOS}"
        )
    c = constraints
    p_ref = design.p_ext

    def point_p_ext(length, roc, diameter, mis, scatter, transmission) -> float:
        geom = CavityGeometry(length, roc, diameter, c.wavelength)
        if stability_margin(geom, mis) <= 0.0:
            raise UnstableGeometryError("unstable perturbed cavity")
        mode = _effective_mode(length, roc, c.wavelength, mis)
        clip = clipping_loss(geom, mis)
        l_in = scatter + clip
        c_in = geometric_cooperativity(c.alpha, mode.divergence, l_in)
        return p_ext_operating(c_in, transmission, l_in)

    if scenario == "length-transmission":
        ax1 = Axis("l", design.length * np.linspace(1 - length_span, 1 + length_span, n_primary), "m")
        ax2 = Axis(
            "t",
            design.transmission * np.linspace(1 / transmission_span, transmission_span, n_secondary),
            "-",
        )
        eval_cell = lambda v1, v2: point_p_ext(
            v1, design.roc, design.diameter, c.mis, c.scatter_loss, v2
        )
    elif scenario == "radius-diameter":
        ax1 = Axis("r", design.roc * np.linspace(1 - roc_span, 1 + roc_span, n_primary), "m")
        ax2 = Axis(
            "d", design.diameter * np.linspace(1 - diameter_span, 1 + diameter_span, n_secondary), "m"
        )
        eval_cell = lambda v1, v2: point_p_ext(
            design.length, v1, v2, c.mis, c.scatter_loss, design.transmission
        )
    else:
        ax1 = Axis("m", np.linspace(0.0, misalignment_factor * c.misalignment, n_primary), "m")
        ax2 = Axis(
            "l_scat",
            c.scatter_loss * np.linspace(1 / scatter_factor, scatter_factor, n_secondary),
            "-",
        )
        eval_cell = lambda v1, v2: point_p_ext(
            design.length,
            design.roc,
            design.diameter,
            Misalignment.uniform(v1),
            v2,
            design.transmission,
        )

    values = np.full((ax1.values.size, ax2.values.size), math.nan)
    feasible = np.zeros_like(values, dtype=bool)
    for i, v1 in enumerate(ax1.values):
        for j, v2 in enumerate(ax2.values):
            try:
                values[i, j] = eval_cell(float(v1), float(v2))
                feasible[i, j] = True
            except _INFEASIBLE:
                pass
    levels = sorted(
        p_ref * (1.0 + s * f) for f in DEGRADATION_FRACTIONS for s in (-1.0, 1.0)
    )
    fixed = {
        "scenario": scenario,
        "design": {
            "l": design.length,
            "r": design.roc,
            "d": design.diameter,
            "t": design.transmission,
            "p_ext": design.p_ext,
        },
        "degradation_levels": levels,
        "m": c.misalignment,
        "l_scat": c.scatter_loss,
        "alpha": c.alpha,
        "lambda": c.wavelength,
    }
    return SweepGrid(
        axes=(ax1, ax2),
        values=values,
        feasible=feasible,
        quantity="p_ext",
        unit="-",
        fixed=fixed,
    )
