"""Command-line interface: config ingestion, dispatch, result serialisation.

Subcommands: evaluate, optimize, sweep, robustness, vstirap. A JSON config
file supplies the parameters; the --out, --format, --seed and --threads
flags override the corresponding config entries (precedence: flags > file >
defaults). Unknown keys anywhere in the config are errors. Identical config
and seed produce byte-identical output files.

Exit codes: 0 success, 2 validation error, 3 infeasible, 4 numerical failure.
Failures emit a one-line machine-readable JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CavityError,
    DegenerateCavityError,
    InvalidCapError,
    LosslessCavityError,
    NoFeasibleDesignError,
    NoFeasibleLengthError,
    NumericalError,
    UnstableGeometryError,
    ValidationError,
)
from .geometry import CavityGeometry, Misalignment, effective_mode
from .grids import Axis
from .losses import LossBudget, cavity_rates, clipping_loss
from .optimizer import (
    DesignConstraints,
    OptimalDesign,
    evaluate_design,
    optimize,
    robustness,
    sweep,
)
from .performance import p_ext_operating, p_gen_bound
from .serialize import Record, write_grid, write_record, write_waveform
from .units import parse_quantity
from . import vstirap as vs

MODES = ("evaluate", "optimize", "sweep", "robustness", "vstirap")
FORMATS = ("csv", "json")

# name -> dimension for axis and fixed sweep parameters
AXIS_DIMENSIONS = {
    "l": "length",
    "r": "length",
    "d": "length",
    "m": "length",
    "m_perp": "length",
    "m_par": "length",
    "l_min": "length",
    "lambda": "length",
    "box_max": "length",
    "theta": "angle",
    "l_scat": "fraction",
    "t": "fraction",
    "clip_threshold": "fraction",
    "v_max": "volume",
    "alpha": "dimensionless",
}

_REQUIRED = object()


@dataclass
class RunConfig:
    """Validated run request."""

    mode: str
    parameters: dict
    seed: int = 0
    out: Path = field(default_factory=lambda: Path("out.csv"))
    fmt: str = "csv"
    threads: int = 1


def _check_keys(doc: dict, allowed, where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _coerce(value, kind, where: str):
    if kind == "dict":
        if not isinstance(value, dict):
            raise ValidationError(f"field {where!r} must be an object")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"field {where!r} must be an integer")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(f"field {where!r} must be a boolean")
        return value
    if isinstance(kind, tuple) and kind[0] == "choice":
        if value not in kind[1]:
            raise ValidationError(f"field {where!r} must be one of {kind[1]}, got {value!r}")
        return value
    if isinstance(kind, tuple) and kind[0] == "list":
        if not isinstance(value, list) or not value:
            raise ValidationError(f"field {where!r} must be a non-empty list")
        return [parse_quantity(v, kind[1], f"{where}[{i}]") for i, v in enumerate(value)]
    return parse_quantity(value, kind, where)


def _validate(params: dict, spec: dict, where: str) -> dict:
    if not isinstance(params, dict):
        raise ValidationError(f"{where} must be an object")
    _check_keys(params, spec, where)
    out = {}
    for name, (kind, default) in spec.items():
        if name in params:
            out[name] = _coerce(params[name], kind, f"{where}.{name}")
        elif default is _REQUIRED:
            raise ValidationError(f"missing required field {where}.{name}")
        else:
            out[name] = default
    return out


def _misalignment(p: dict, where: str) -> Misalignment:
    if p.get("m") is not None:
        if p.get("m_perp") is not None or p.get("m_par") is not None:
            raise ValidationError(f"{where}: give either m or (m_perp, m_par), not both")
        return Misalignment.uniform(p["m"])
    return Misalignment(
        transverse=p.get("m_perp") or 0.0, longitudinal=p.get("m_par") or 0.0
    )


_EVALUATE_SPEC = {
    "l": ("length", _REQUIRED),
    "r": ("length", _REQUIRED),
    "d": ("length", _REQUIRED),
    "m": ("length", None),
    "m_perp": ("length", None),
    "m_par": ("length", None),
    "l_scat": ("fraction", _REQUIRED),
    "alpha": ("dimensionless", 0.05),
    "lambda": ("length", 854e-9),
    "clip_model": (("choice", ("single", "two-mirror")), "single"),
    "t": ("fraction", None),
}

_CONSTRAINT_SPEC = {
    "l_min": ("length", _REQUIRED),
    "v_max": ("volume", _REQUIRED),
    "m": ("length", _REQUIRED),
    "l_scat": ("fraction", _REQUIRED),
    "clip_threshold": ("fraction", 1e-6),
    "box_max": ("length", 3e-3),
    "lambda": ("length", 854e-9),
    "alpha": ("dimensionless", 0.05),
}

_OPTIMIZE_SPEC = dict(
    _CONSTRAINT_SPEC,
    reduce_volume=("bool", True),
    min_restarts=("int", 4),
    max_restarts=("int", 40),
)

_ROBUSTNESS_SPEC = {
    "scenario": (("choice", ("length-transmission", "radius-diameter", "misalignment-scatter")), _REQUIRED),
    "constraints": ("dict", _REQUIRED),
    "n_primary": ("int", 41),
    "n_secondary": ("int", 81),
    "length_span": ("dimensionless", 0.15),
    "transmission_span": ("dimensionless", 2.5),
    "roc_span": ("dimensionless", 0.20),
    "diameter_span": ("dimensionless", 0.35),
    "misalignment_factor": ("dimensionless", 2.0),
    "scatter_factor": ("dimensionless", 2.5),
}

_VSTIRAP_COMMON = {
    "task": (("choice", ("simulate", "optimize", "family")), _REQUIRED),
    "tol": ("dimensionless", 1e-9),
}
_VSTIRAP_SPECS = {
    "simulate": dict(
        _VSTIRAP_COMMON,
        g=("rate", _REQUIRED),
        kappa=("rate", _REQUIRED),
        gamma=("rate", _REQUIRED),
        peak=("rate", _REQUIRED),
        width=("time", _REQUIRED),
        tau=("time", _REQUIRED),
        delta=("rate", 0.0),
        samples=("int", 512),
    ),
    "optimize": dict(
        _VSTIRAP_COMMON,
        g=("rate", _REQUIRED),
        kappa=("rate", _REQUIRED),
        gamma=("rate", _REQUIRED),
        tau=("time", _REQUIRED),
        search_tol=("dimensionless", 1e-6),
    ),
    "family": dict(
        _VSTIRAP_COMMON,
        c_values=(("list", "dimensionless"), _REQUIRED),
        kappa_over_gamma=(("list", "dimensionless"), _REQUIRED),
        kappa_tau=(("list", "dimensionless"), _REQUIRED),
        gamma=("rate", 1.0),
        search_tol=("dimensionless", 1e-6),
    ),
}


def _design_constraints(p: dict) -> DesignConstraints:
    return DesignConstraints(
        min_length=p["l_min"],
        volume_budget=p["v_max"],
        misalignment=p["m"],
        scatter_loss=p["l_scat"],
        clip_threshold=p["clip_threshold"],
        box_max=p["box_max"],
        wavelength=p["lambda"],
        alpha=p["alpha"],
    )


def _design_record_fields(design: OptimalDesign) -> Record:
    rec: Record = {
        "l": (design.length, "m"),
        "r": (design.roc, "m"),
        "d": (design.diameter, "m"),
        "t": (design.transmission, "-"),
        "p_ext": (design.p_ext, "-"),
        "c_in": (design.c_in, "-"),
        "kappa_out": (design.kappa_out, "rad/s"),
        "restarts_used": (float(design.restarts_used), "-"),
        "feasible": (1.0 if design.feasible else 0.0, "-"),
    }
    units = {"stability": "-", "clipping": "-", "volume": "m^3", "length": "m", "box": "m"}
    for name, value in design.margins.items():
        rec[f"margin_{name}"] = (value, units.get(name, "-"))
    return rec


def _run_evaluate(params: dict, cfg: RunConfig) -> list[Path]:
    p = _validate(params, _EVALUATE_SPEC, "parameters")
    mis = _misalignment(p, "parameters")
    point = evaluate_design(
        p["l"], p["r"], p["d"], mis, p["l_scat"], p["alpha"], p["lambda"],
        clip_model=p["clip_model"],
    )
    geom = CavityGeometry(p["l"], p["r"], p["d"], p["lambda"])
    mode = effective_mode(geom, mis)
    clip = clipping_loss(geom, mis, model=p["clip_model"])
    budget = LossBudget(scatter=p["l_scat"], clip=clip)
    rates = cavity_rates(mode.length, point.t_opt, budget)
    record: Record = {
        "p_ext": (point.p_ext, "-"),
        "c_in": (point.c_in, "-"),
        "t_opt": (point.t_opt, "-"),
        "c": (point.c, "-"),
        "p_gen": (point.p_gen, "-"),
        "kappa_out": (rates.kappa_out, "rad/s"),
        "kappa_in": (rates.kappa_in, "rad/s"),
        "kappa": (rates.kappa, "rad/s"),
        "finesse": (rates.finesse, "-"),
        "l_clip": (clip, "-"),
        "l_in": (budget.total, "-"),
        "phi": (mode.tilt, "rad"),
        "l_eff": (mode.length, "m"),
        "theta_eff": (mode.divergence, "rad"),
        "w0": (mode.waist, "m"),
        "w_mirror": (mode.spot_at_mirror, "m"),
        "dx_mirror": (mode.offset_at_mirror, "m"),
    }
    if p["t"] is not None:
        record["t"] = (p["t"], "-")
        record["p_ext_at_t"] = (p_ext_operating(point.c_in, p["t"], budget.total), "-")
    return write_record(cfg.out, record, cfg.fmt)


def _run_optimize(params: dict, cfg: RunConfig) -> list[Path]:
    p = _validate(params, _OPTIMIZE_SPEC, "parameters")
    design = optimize(
        _design_constraints(p),
        seed=cfg.seed,
        reduce_volume=p["reduce_volume"],
        min_restarts=p["min_restarts"],
        max_restarts=p["max_restarts"],
    )
    return write_record(cfg.out, _design_record_fields(design), cfg.fmt)


def _axis_from_spec(doc: dict, where: str) -> Axis:
    spec = {
        "name": (("choice", tuple(AXIS_DIMENSIONS)), _REQUIRED),
        "start": ("dimensionless", _REQUIRED),
        "stop": ("dimensionless", _REQUIRED),
        "num": ("int", _REQUIRED),
        "scale": (("choice", ("linear", "log")), "linear"),
    }
    if not isinstance(doc, dict):
        raise ValidationError(f"{where} must be an object")
    _check_keys(doc, spec, where)
    name = _coerce(doc.get("name"), spec["name"][0], f"{where}.name")
    dim = AXIS_DIMENSIONS[name]
    start = parse_quantity(doc.get("start"), dim, f"{where}.start")
    stop = parse_quantity(doc.get("stop"), dim, f"{where}.stop")
    num = _coerce(doc.get("num"), "int", f"{where}.num")
    scale = _coerce(doc.get("scale", "linear"), spec["scale"][0], f"{where}.scale")
    if num < 1:
        raise ValidationError(f"{where}.num must be >= 1")
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise ValidationError(f"{where}: log axes need positive bounds")
        values = np.logspace(math.log10(start), math.log10(stop), num)
    else:
        values = np.linspace(start, stop, num)
    from .optimizer import AXIS_UNITS

    return Axis(name, values, AXIS_UNITS.get(name, "-"))


def _parse_fixed(doc: dict, where: str) -> dict:
    if not isinstance(doc, dict):
        raise ValidationError(f"{where} must be an object")
    fixed = {}
    for name, value in doc.items():
        if name == "clip_model":
            fixed[name] = _coerce(value, ("choice", ("single", "two-mirror")), f"{where}.{name}")
        elif name in AXIS_DIMENSIONS:
            fixed[name] = parse_quantity(value, AXIS_DIMENSIONS[name], f"{where}.{name}")
        else:
            raise ValidationError(f"unknown key(s) in {where}: {name}")
    return fixed


def _run_sweep(params: dict, cfg: RunConfig) -> list[Path]:
    _check_keys(params, ("axes", "fixed", "quantity"), "parameters")
    axes_doc = params.get("axes")
    if not isinstance(axes_doc, list) or len(axes_doc) != 2:
        raise ValidationError("parameters.axes must be a list of exactly two axis objects")
    ax1 = _axis_from_spec(axes_doc[0], "parameters.axes[0]")
    ax2 = _axis_from_spec(axes_doc[1], "parameters.axes[1]")
    fixed = _parse_fixed(params.get("fixed", {}), "parameters.fixed")
    quantity = params.get("quantity")
    if not isinstance(quantity, str):
        raise ValidationError("parameters.quantity must be a string")
    grid = sweep((ax1, ax2), fixed, quantity, seed=cfg.seed, workers=cfg.threads)
    return write_grid(cfg.out, grid, cfg.fmt)


def _run_robustness(params: dict, cfg: RunConfig) -> list[Path]:
    p = _validate(params, _ROBUSTNESS_SPEC, "parameters")
    constraints = _design_constraints(
        _validate(p["constraints"], _CONSTRAINT_SPEC, "parameters.constraints")
    )
    design = optimize(constraints, seed=cfg.seed)
    grid = robustness(
        design,
        constraints,
        p["scenario"],
        n_primary=p["n_primary"],
        n_secondary=p["n_secondary"],
        length_span=p["length_span"],
        transmission_span=p["transmission_span"],
        roc_span=p["roc_span"],
        diameter_span=p["diameter_span"],
        misalignment_factor=p["misalignment_factor"],
        scatter_factor=p["scatter_factor"],
    )
    return write_grid(cfg.out, grid, cfg.fmt)


def _run_vstirap(params: dict, cfg: RunConfig) -> list[Path]:
    task = params.get("task")
    if task not in _VSTIRAP_SPECS:
        raise ValidationError(
            f"parameters.task must be one of {tuple(_VSTIRAP_SPECS)}, got {task!r}"
        )
    p = _validate(params, _VSTIRAP_SPECS[task], "parameters")
    if task == "simulate":
        system = vs.LambdaCavitySystem(g=p["g"], kappa=p["kappa"], gamma=p["gamma"])
        result = vs.simulate(
            system,
            vs.PulseSpec(p["peak"], p["width"]),
            p["tau"],
            tol=p["tol"],
            delta=p["delta"],
            samples=p["samples"],
        )
        meta = {
            "p_out": result.p_out,
            "norm_leak": result.norm_leak,
            "residual_norm": result.residual_norm,
            "steps": result.steps,
            "conservation_error": result.conservation_error,
            "seed": cfg.seed,
        }
        return write_waveform(cfg.out, result.waveform, meta, cfg.fmt)
    if task == "optimize":
        system = vs.LambdaCavitySystem(g=p["g"], kappa=p["kappa"], gamma=p["gamma"])
        pulse, result = vs.optimize_pulse(
            system, p["tau"], tol=p["tol"], search_tol=p["search_tol"]
        )
        record: Record = {
            "peak": (pulse.peak, "rad/s"),
            "width": (pulse.width, "s"),
            "p_out": (result.p_out, "-"),
            "norm_leak": (result.norm_leak, "-"),
            "residual_norm": (result.residual_norm, "-"),
            "conservation_error": (result.conservation_error, "-"),
            "steps": (float(result.steps), "-"),
        }
        return write_record(cfg.out, record, cfg.fmt)
    grid = vs.saturation_family(
        p["c_values"],
        p["kappa_over_gamma"],
        p["kappa_tau"],
        gamma=p["gamma"],
        tol=p["tol"],
        search_tol=p["search_tol"],
        workers=cfg.threads,
    )
    return write_grid(cfg.out, grid, cfg.fmt)


_RUNNERS = {
    "evaluate": _run_evaluate,
    "optimize": _run_optimize,
    "sweep": _run_sweep,
    "robustness": _run_robustness,
    "vstirap": _run_vstirap,
}


def run(cfg: RunConfig) -> list[Path]:
    """Execute a validated run request; returns the written files."""
    if cfg.mode not in MODES:
        raise ValidationError(f"unknown mode {cfg.mode!r}; expected one of {MODES}")
    if cfg.fmt not in FORMATS:
        raise ValidationError(f"unknown format {cfg.fmt!r}; expected one of {FORMATS}")
    if cfg.threads < 1:
        raise ValidationError("--threads must be >= 1")
    return _RUNNERS[cfg.mode](cfg.parameters, cfg)


def load_config(
    mode: str,
    config_path: str | None,
    out: str | None,
    fmt: str | None,
    seed: int | None,
    threads: int | None,
) -> RunConfig:
    """Merge a config file with CLI flags (flags > file > defaults)."""
    doc = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ValidationError(f"config file {config_path} not found")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {config_path} is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ValidationError("config root must be a JSON object")
        _check_keys(doc, ("mode", "parameters", "seed", "output", "threads"), "config")
        if "mode" in doc and doc["mode"] != mode:
            raise ValidationError(
                f"config mode {doc['mode']!r} does not match subcommand {mode!r}"
            )
    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ValidationError("config.output must be an object")
    _check_keys(output, ("path", "format"), "config.output")
    file_seed = doc.get("seed", 0)
    if isinstance(file_seed, bool) or not isinstance(file_seed, int) or file_seed < 0:
        raise ValidationError("config.seed must be a non-negative integer")
    file_threads = doc.get("threads", 1)
    if isinstance(file_threads, bool) or not isinstance(file_threads, int):
        raise ValidationError("config.threads must be an integer")
    fmt_final = fmt or output.get("format") or "csv"
    out_final = out or output.get("path") or f"{mode}.{fmt_final}"
    return RunConfig(
        mode=mode,
        parameters=doc.get("parameters", {}),
        seed=seed if seed is not None else file_seed,
        out=Path(out_final),
        fmt=fmt_final,
        threads=threads if threads is not None else file_threads,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ioncavity",
        description="Fabry-Perot ion-cavity photon extraction design toolkit",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=FORMATS, dest="fmt")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
    return parser


_EXIT_CODES: tuple[tuple[type, int], ...] = (
    (ValidationError, 2),
    (NumericalError, 4),
    (NoFeasibleDesignError, 3),
    (NoFeasibleLengthError, 3),
    (UnstableGeometryError, 3),
    (InvalidCapError, 3),
    (DegenerateCavityError, 3),
    (LosslessCavityError, 3),
    (CavityError, 4),
)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.mode, args.config, args.out, args.fmt, args.seed, args.threads)
        written = run(cfg)
    except CavityError as exc:
        code = next(c for t, c in _EXIT_CODES if isinstance(exc, t))
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return code
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
