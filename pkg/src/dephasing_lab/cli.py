"""Command-line front end.

Usage::

    dephasing-lab zurek --couplings 0.95,0.61,0.37,0.17 --lambda 6e-5 --out z.csv
    dephasing-lab analyze --config model.json --format json
    dephasing-lab optimize --alpha 0.5236
    dephasing-lab prep-error --epsilon 0.01 --n 5
    dephasing-lab sweep --format csv --out sweep.csv
    dephasing-lab simulate --config model.json

A run is described by a JSON document (see README for the schema). Command
line shortcuts are merged over the file before validation. Every output
embeds the resolved configuration and the package version.

Exit codes: 0 success, 2 configuration error, 3 validation error,
4 numerical precondition violated.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .bloch import SWEEP_COLUMNS, FieldPair, alpha_sweep, optimize_initial_state, sweep_rows
from .coherence import decoherence_free_states, fragility_probe, verify_coherence
from .dephasing import DephasingModel, QubitAmplitudes, default_horizon, echo_deficit, trajectory
from .exceptions import ConfigError, NumericalPreconditionError, ValidationError
from .quantum_core import as_hermitian
from .spin_bath import (
    DEFAULT_COUPLINGS,
    ProductState,
    ZurekConfig,
    build_zurek,
    min_gap,
    perturbative_average,
    perturbative_deficit,
    preparation_bound,
    product_average_echo,
    product_state,
)

COMMANDS = ("simulate", "analyze", "zurek", "prep-error", "optimize", "sweep")
FORMATS = ("csv", "json")
EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 2, 3, 4
DEFAULT_SAMPLES = 100_000
DEFAULT_SWEEP_POINTS = 25
TRAJECTORY_COLUMNS = ("t", "re_r", "im_r", "abs_r", "echo", "purity")
ZUREK_COLUMNS = ("t", "exact_echo", "perturbative_echo", "exact_deficit", "perturbative_deficit")

SCHEMA: dict[str, Any] = {
    "command": None,
    "model": {"h_int": None, "h_env": None},
    "zurek": {"couplings": None, "lambda": None},
    "initial_state": None,
    "amplitudes": {"a": None, "b": None},
    "time_grid": {"horizon": None, "samples": None},
    "output": {"path": None, "format": None},
    "seed": None,
    "tolerances": {"cluster": None, "intersection": None, "coherence": None},
    "prep_error": {"epsilon": None, "n": None},
    "bloch": {"alpha": None, "sphere_samples": None, "time_samples": None},
    "sweep": {"alphas": None, "points": None},
    "fragility": {"scale": None, "samples": None},
}


@dataclass
class RunConfig:
    """Validated run description with every default resolved."""

    command: str
    model: DephasingModel | None = None
    zurek: ZurekConfig | None = None
    initial_state: np.ndarray | None = None
    amplitudes: QubitAmplitudes = field(default_factory=QubitAmplitudes.balanced)
    horizon: float | None = None
    samples: int = DEFAULT_SAMPLES
    out_path: str | None = None
    out_format: str = "csv"
    seed: int = 0
    cluster_tol: float | None = None
    intersection_tol: float = 1e-9
    coherence_tol: float = 1e-9
    epsilon: float = 0.01
    n_spins: int = 5
    alpha: float | None = None
    sphere_samples: int = 2000
    time_samples: int = 256
    sweep_alphas: tuple[float, ...] = ()
    fragility_scale: float = 1e-2
    fragility_samples: int = 0


# ---------------------------------------------------------------- parsing


def _check_keys(doc: dict, schema: dict, path: str = ""):
    for key, value in doc.items():
        where = f"{path}{key}"
        if key not in schema:
            raise ConfigError(f"unknown key '{where}'")
        if isinstance(schema[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be an object")
            _check_keys(value, schema[key], where + ".")


def _complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"'{where}': expected a number or [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    raise ConfigError(f"'{where}': expected a number or [re, im] pair, got {value!r}")


def _matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise ConfigError(f"'{where}': expected a non-empty list of rows")
    n = len(value)
    for i, row in enumerate(value):
        if len(row) != n:
            raise ConfigError(f"'{where}': row {i} has {len(row)} entries, expected {n}")
    return np.array([[_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(value)])


def _number(value, where: str, kind=float, positive: bool = False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{where}': expected a number, got {value!r}")
    if kind is int and not float(value).is_integer():
        raise ConfigError(f"'{where}': expected an integer, got {value!r}")
    value = kind(value)
    if not np.isfinite(value):
        raise ConfigError(f"'{where}': must be finite")
    if positive and not value > 0:
        raise ConfigError(f"'{where}': must be positive, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"'{where}': must be at least {minimum}, got {value!r}")
    return value


def _get(doc: dict, section: str, key: str):
    return doc.get(section, {}).get(key)


def parse_config_dict(doc: dict) -> RunConfig:
    """Validate a configuration object and fill in defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(doc, SCHEMA)
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"'command': expected one of {', '.join(COMMANDS)}, got {command!r}")
    cfg = RunConfig(command=command)

    has_model, has_zurek = "model" in doc, "zurek" in doc
    if has_model and has_zurek:
        raise ConfigError("give exactly one model source: 'model' or 'zurek', not both")
    if command in ("simulate", "analyze") and not (has_model or has_zurek):
        raise ConfigError(f"command '{command}' needs a 'model' or 'zurek' section")
    if command == "zurek" and not has_zurek:
        raise ConfigError("command 'zurek' needs a 'zurek' section")

    if has_model:
        m = doc["model"]
        for key in ("h_int", "h_env"):
            if key not in m:
                raise ConfigError(f"'model.{key}' is required")
        mats = {}
        for key in ("h_int", "h_env"):
            mats[key] = _matrix(m[key], f"model.{key}")
            try:
                as_hermitian(mats[key])
            except ValidationError as exc:
                raise ValidationError(f"'model.{key}': {exc}") from None
        cfg.model = DephasingModel(mats["h_int"], mats["h_env"])
    if has_zurek:
        z = doc["zurek"]
        if "couplings" not in z:
            raise ConfigError("'zurek.couplings' is required")
        if not isinstance(z["couplings"], list) or not z["couplings"]:
            raise ConfigError("'zurek.couplings': expected a non-empty list")
        couplings = tuple(_number(g, f"zurek.couplings[{k}]") for k, g in enumerate(z["couplings"]))
        lam = _number(z.get("lambda", 0.0), "zurek.lambda")
        cfg.zurek = ZurekConfig(couplings, lam)
        cfg.model = build_zurek(cfg.zurek)

    if doc.get("initial_state") is not None:
        raw = doc["initial_state"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("'initial_state': expected a non-empty list")
        psi = np.array([_complex(x, f"initial_state[{i}]") for i, x in enumerate(raw)])
        if cfg.model is None:
            raise ConfigError("'initial_state' given without a model")
        cfg.initial_state = cfg.model.check_state(psi)

    amps = doc.get("amplitudes", {})
    if amps:
        half = np.sqrt(0.5)
        a = _complex(amps["a"], "amplitudes.a") if amps.get("a") is not None else complex(half)
        b = _complex(amps["b"], "amplitudes.b") if amps.get("b") is not None else complex(half)
        cfg.amplitudes = QubitAmplitudes(a, b)

    if _get(doc, "prep_error", "epsilon") is not None:
        cfg.epsilon = _number(_get(doc, "prep_error", "epsilon"), "prep_error.epsilon")
        if not 0 <= cfg.epsilon <= 0.5:
            raise ValidationError(f"'prep_error.epsilon' must lie in [0, 1/2], got {cfg.epsilon!r}")
    if _get(doc, "prep_error", "n") is not None:
        cfg.n_spins = _number(_get(doc, "prep_error", "n"), "prep_error.n", int, minimum=1)
    if command == "prep-error":
        if cfg.zurek is None:
            if cfg.n_spins > len(DEFAULT_COUPLINGS):
                raise ConfigError(f"'prep_error.n' at most {len(DEFAULT_COUPLINGS)} without explicit couplings")
            cfg.zurek = ZurekConfig(DEFAULT_COUPLINGS[: cfg.n_spins], 0.0)
        elif cfg.zurek.n != cfg.n_spins:
            if _get(doc, "prep_error", "n") is not None:
                raise ConfigError("'prep_error.n' disagrees with the number of 'zurek.couplings'")
            cfg.n_spins = cfg.zurek.n

    horizon = _get(doc, "time_grid", "horizon")
    if horizon is not None:
        cfg.horizon = _number(horizon, "time_grid.horizon", positive=True)
    elif cfg.zurek is not None:
        cfg.horizon = 1e4 / min_gap(cfg.zurek.couplings)
    elif cfg.model is not None:
        cfg.horizon = default_horizon(cfg.model)
    samples = _get(doc, "time_grid", "samples")
    if samples is not None:
        cfg.samples = _number(samples, "time_grid.samples", int, minimum=2)

    fmt = _get(doc, "output", "format")
    if fmt is not None:
        if fmt not in FORMATS:
            raise ConfigError(f"'output.format': expected csv or json, got {fmt!r}")
        cfg.out_format = fmt
    elif command == "analyze":
        cfg.out_format = "json"
    path = _get(doc, "output", "path")
    if path is not None:
        if not isinstance(path, str):
            raise ConfigError("'output.path' must be a string")
        cfg.out_path = path
    if doc.get("seed") is not None:
        cfg.seed = _number(doc["seed"], "seed", int, minimum=0)

    tol = doc.get("tolerances", {})
    if tol.get("cluster") is not None:
        cfg.cluster_tol = _number(tol["cluster"], "tolerances.cluster", positive=True)
    if tol.get("intersection") is not None:
        cfg.intersection_tol = _number(tol["intersection"], "tolerances.intersection", positive=True)
    if tol.get("coherence") is not None:
        cfg.coherence_tol = _number(tol["coherence"], "tolerances.coherence", positive=True)

    bloch = doc.get("bloch", {})
    if bloch.get("alpha") is not None:
        cfg.alpha = _number(bloch["alpha"], "bloch.alpha")
        FieldPair(cfg.alpha)
    if command == "optimize" and cfg.alpha is None:
        raise ConfigError("command 'optimize' needs 'bloch.alpha'")
    if bloch.get("sphere_samples") is not None:
        cfg.sphere_samples = _number(bloch["sphere_samples"], "bloch.sphere_samples", int, minimum=500)
    if bloch.get("time_samples") is not None:
        cfg.time_samples = _number(bloch["time_samples"], "bloch.time_samples", int, minimum=64)

    sweep = doc.get("sweep", {})
    if sweep.get("alphas") is not None and sweep.get("points") is not None:
        raise ConfigError("give either 'sweep.alphas' or 'sweep.points'")
    if sweep.get("alphas") is not None:
        if not isinstance(sweep["alphas"], list) or not sweep["alphas"]:
            raise ConfigError("'sweep.alphas': expected a non-empty list")
        cfg.sweep_alphas = tuple(_number(a, f"sweep.alphas[{i}]") for i, a in enumerate(sweep["alphas"]))
        for a in cfg.sweep_alphas:
            FieldPair(a)
    elif command == "sweep":
        points = _number(sweep.get("points", DEFAULT_SWEEP_POINTS), "sweep.points", int, minimum=1)
        cfg.sweep_alphas = tuple(float(k * (np.pi / 2) / (points + 1)) for k in range(1, points + 1))

    frag = doc.get("fragility", {})
    if frag.get("scale") is not None:
        cfg.fragility_scale = _number(frag["scale"], "fragility.scale", positive=True)
    if frag.get("samples") is not None:
        cfg.fragility_samples = _number(frag["samples"], "fragility.samples", int, minimum=0)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config_dict(doc)


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def config_to_dict(cfg: RunConfig) -> dict:
    """Normalized JSON-ready form of ``cfg``; parsing it gives back ``cfg``."""
    doc: dict[str, Any] = {"command": cfg.command}
    if cfg.zurek is not None:
        doc["zurek"] = {"couplings": list(cfg.zurek.couplings), "lambda": cfg.zurek.lam}
    elif cfg.model is not None:
        doc["model"] = {
            "h_int": [[_pair(x) for x in row] for row in cfg.model.h_int],
            "h_env": [[_pair(x) for x in row] for row in cfg.model.h_env],
        }
    if cfg.initial_state is not None:
        doc["initial_state"] = [_pair(x) for x in cfg.initial_state]
    doc["amplitudes"] = {"a": _pair(cfg.amplitudes.a), "b": _pair(cfg.amplitudes.b)}
    doc["time_grid"] = {"horizon": cfg.horizon, "samples": cfg.samples}
    doc["output"] = {"path": cfg.out_path, "format": cfg.out_format}
    doc["seed"] = cfg.seed
    doc["tolerances"] = {"cluster": cfg.cluster_tol, "intersection": cfg.intersection_tol, "coherence": cfg.coherence_tol}
    doc["prep_error"] = {"epsilon": cfg.epsilon, "n": cfg.n_spins}
    doc["bloch"] = {"alpha": cfg.alpha, "sphere_samples": cfg.sphere_samples, "time_samples": cfg.time_samples}
    if cfg.sweep_alphas:
        doc["sweep"] = {"alphas": list(cfg.sweep_alphas)}
    doc["fragility"] = {"scale": cfg.fragility_scale, "samples": cfg.fragility_samples}
    return doc


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2)


# ---------------------------------------------------------------- running


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_csv(columns, rows, cfg: RunConfig, summary: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# dephasing-lab {__version__}\n")
    buf.write("# config: " + json.dumps(config_to_dict(cfg), sort_keys=True) + "\n")
    for key, value in (summary or {}).items():
        buf.write(f"# {key}: {_fmt(value) if not isinstance(value, (list, dict)) else json.dumps(value)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _write_json(result, cfg: RunConfig) -> str:
    doc = {"version": __version__, "config": config_to_dict(cfg), "result": result}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _time_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.horizon, cfg.samples)


def _initial_state(cfg: RunConfig) -> np.ndarray:
    """Configured state, or the first basis vector (``|0...0>`` for spin baths)."""
    if cfg.initial_state is not None:
        return cfg.initial_state
    return np.eye(cfg.model.dim, dtype=complex)[0]


def _run_simulate(cfg: RunConfig) -> str:
    rec = trajectory(cfg.model, _initial_state(cfg), cfg.amplitudes, _time_grid(cfg))
    if cfg.out_format == "json":
        return _write_json(
            {
                "t": rec.times.tolist(),
                "r": [_pair(z) for z in rec.r],
                "echo": rec.echo.tolist(),
                "purity": rec.purity.tolist(),
            },
            cfg,
        )
    rows = zip(rec.times, rec.r.real, rec.r.imag, np.abs(rec.r), rec.echo, rec.purity)
    return _write_csv(TRAJECTORY_COLUMNS, rows, cfg)


def _run_analyze(cfg: RunConfig) -> str:
    report = decoherence_free_states(cfg.model, cfg.intersection_tol, cfg.cluster_tol)
    result = report.to_dict()
    # sampled check of one random member per group
    rng = np.random.default_rng(cfg.seed)
    for doc, group in zip(result["groups"], report.groups):
        doc["verified"] = verify_coherence(
            cfg.model, group.random_state(rng), cfg.horizon, tol=cfg.coherence_tol
        )
    if cfg.fragility_samples > 0 and report.exists:
        result["fragility"] = {
            "scale": cfg.fragility_scale,
            "samples": cfg.fragility_samples,
            "seed": cfg.seed,
            "preserved_fraction": fragility_probe(
                cfg.model, cfg.fragility_scale, cfg.fragility_samples, cfg.seed,
                tol=cfg.intersection_tol, cluster_tol=cfg.cluster_tol,
            ),
        }
    if cfg.out_format == "json":
        return _write_json(result, cfg)
    rows = []
    for gi, g in enumerate(report.groups):
        for vi, col in enumerate(g.basis.T):
            for ci, z in enumerate(col):
                rows.append((str(gi), g.delta, str(vi), str(ci), z.real, z.imag))
    summary = {"exists": str(report.exists).lower(), "block_dim": str(report.block_dim)}
    if "fragility" in result:
        summary["preserved_fraction"] = result["fragility"]["preserved_fraction"]
    return _write_csv(("group", "delta", "vector", "component", "re", "im"), rows, cfg, summary)


def _run_zurek(cfg: RunConfig) -> str:
    times = _time_grid(cfg)
    psi = _initial_state(cfg)
    exact = echo_deficit(cfg.model, psi, times)
    pert = perturbative_deficit(cfg.zurek, times)
    summary = {
        "min_gap": cfg.zurek.min_gap,
        "numeric_average_echo": float(np.mean(1.0 - exact)),
        "perturbative_average_echo": perturbative_average(cfg.zurek),
    }
    if cfg.out_format == "json":
        return _write_json(
            {
                **summary,
                "t": times.tolist(),
                "exact_echo": (1.0 - exact).tolist(),
                "perturbative_echo": (1.0 - pert).tolist(),
                "exact_deficit": exact.tolist(),
                "perturbative_deficit": pert.tolist(),
            },
            cfg,
        )
    rows = zip(times, 1.0 - exact, 1.0 - pert, exact, pert)
    return _write_csv(ZUREK_COLUMNS, rows, cfg, summary)


def _run_prep_error(cfg: RunConfig) -> str:
    spec = ProductState.uniform_error(cfg.epsilon, cfg.n_spins)
    model = build_zurek(ZurekConfig(cfg.zurek.couplings, 0.0))
    times = _time_grid(cfg)
    numeric = float(np.mean(1.0 - echo_deficit(model, product_state(spec), times)))
    result = {
        "epsilon": cfg.epsilon,
        "n": cfg.n_spins,
        "bound": preparation_bound(cfg.epsilon, cfg.n_spins),
        "analytic_average": product_average_echo(spec),
        "numeric_average": numeric,
        "first_order": 1 - 2 * cfg.n_spins * cfg.epsilon,
    }
    if cfg.out_format == "json":
        return _write_json(result, cfg)
    cols = tuple(result)
    return _write_csv(cols, [tuple(result[c] for c in cols)], cfg)


def _run_optimize(cfg: RunConfig) -> str:
    opt = optimize_initial_state(FieldPair(cfg.alpha), cfg.sphere_samples, cfg.time_samples)
    if cfg.out_format == "json":
        return _write_json(opt.to_dict(), cfg)
    return _write_csv(SWEEP_COLUMNS, sweep_rows([opt]), cfg)


def _run_sweep(cfg: RunConfig) -> str:
    results = alpha_sweep(cfg.sweep_alphas, cfg.sphere_samples, cfg.time_samples)
    if cfg.out_format == "json":
        return _write_json([r.to_dict() for r in results], cfg)
    return _write_csv(SWEEP_COLUMNS, sweep_rows(results), cfg)


RUNNERS = {
    "simulate": _run_simulate,
    "analyze": _run_analyze,
    "zurek": _run_zurek,
    "prep-error": _run_prep_error,
    "optimize": _run_optimize,
    "sweep": _run_sweep,
}


def render(cfg: RunConfig) -> str:
    """Run ``cfg`` and return the output document as text."""
    return RUNNERS[cfg.command](cfg)


def run(cfg: RunConfig) -> int:
    """Run ``cfg``, writing to ``cfg.out_path`` or stdout; returns the exit status."""
    text = render(cfg)
    if cfg.out_path:
        with open(cfg.out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- argv


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dephasing-lab", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=float, help="time grid end")
    p.add_argument("--samples", type=int, help="time grid points")
    p.add_argument("--couplings", type=_csv_floats, help="zurek couplings, comma separated")
    p.add_argument("--lambda", dest="lam", type=float, help="zurek self-evolution strength")
    p.add_argument("--alpha", type=float, help="half-angle between fields (rad)")
    p.add_argument("--epsilon", type=float, help="per-spin preparation error")
    p.add_argument("--n", type=int, help="number of environment spins")
    p.add_argument("--points", type=int, help="sweep grid size")
    return p


def merge_args(doc: dict, args: argparse.Namespace) -> dict:
    doc = copy.deepcopy(doc)
    doc["command"] = args.command

    def put(section, key, value):
        if value is not None:
            doc.setdefault(section, {})[key] = value

    put("output", "path", args.out)
    put("output", "format", args.format)
    put("time_grid", "horizon", args.horizon)
    put("time_grid", "samples", args.samples)
    put("zurek", "couplings", args.couplings)
    put("zurek", "lambda", args.lam)
    put("bloch", "alpha", args.alpha)
    put("prep_error", "epsilon", args.epsilon)
    put("prep_error", "n", args.n)
    put("sweep", "points", args.points)
    if args.seed is not None:
        doc["seed"] = args.seed
    return doc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc: dict = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{args.config}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from None
            if not isinstance(doc, dict):
                raise ConfigError(f"{args.config}: configuration must be a JSON object")
        cfg = parse_config_dict(merge_args(doc, args))
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalPreconditionError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
