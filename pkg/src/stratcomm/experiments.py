"""Experiment orchestration and deterministic result emission.

Configs are JSON documents with a schema_version field and one section per
problem ingredient (channel, rd, rd_comparison, model, game, table1,
random_audit, solver, counterexample). Runners turn a validated config into
(rows, columns, extras) and emit() writes CSV or JSON with a metadata header
carrying the tool version, the seed, and a digest of the effective config,
and nothing time-dependent, so identical config plus seed gives byte
identical files.

Floating-point values are written with 12 significant digits in both
formats. Matrix-valued cells are serialized as nested lists in JSON and as
row-major text in CSV (entries joined by ';', rows joined by '|').
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import scalar_game
from .chain import ChainModel, DistortionSpec, EncoderStrategy
from .equilibria import (
    ReducedGame,
    audit_commitment_order,
    nash_equilibria,
    solve_ose,
    solve_rse,
)
from .info_limits import (
    channel_capacity,
    feasibility_test,
    rate_distortion_curve,
)
from .probability import ConditionalKernel, FiniteDistribution

SCHEMA_VERSION = 1
DEFAULT_SWEEP = {"start": 0.0, "stop": 7.0, "step": 0.5}
_SOLVER_KEYS = (
    "sigma_cap",
    "vertex_cap",
    "grid_resolution",
    "max_grid_points",
    "refine_rounds",
    "support_cap",
    "pair_budget",
)


class ConfigError(ValueError):
    """A configuration file failed validation; the message names the field."""


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


def load_config(path: str) -> dict:
    """Parse and validate a JSON experiment config."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config parse error at line {err.lineno}: {err.msg}")
    return validate_config(raw)


def validate_config(raw: dict) -> dict:
    _require(isinstance(raw, dict), "config root must be an object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION, f"schema_version: unsupported value {version!r}")
    known = {
        "schema_version",
        "seed",
        "channel",
        "rd",
        "rd_comparison",
        "model",
        "game",
        "table1",
        "random_audit",
        "solver",
        "counterexample",
        "feasibility",
    }
    for key in raw:
        _require(key in known, f"unknown config section {key!r}")
    if "seed" in raw and raw["seed"] is not None:
        _require(isinstance(raw["seed"], int), "seed: must be an integer")
    if "model" in raw:
        build_model(raw["model"])
    if "game" in raw:
        build_game(raw["game"])
    if "channel" in raw:
        _parse_kernel(raw["channel"].get("matrix"), "channel.matrix")
    if "random_audit" in raw:
        section = raw["random_audit"]
        _require(isinstance(section, dict), "random_audit: must be an object")
        n = section.get("n_instances")
        _require(isinstance(n, int) and n > 0, "random_audit.n_instances: positive integer required")
    if "solver" in raw:
        for key in raw["solver"]:
            _require(
                key in _SOLVER_KEYS + ("enforce_rate",),
                f"solver.{key}: unknown option",
            )
    return raw


def _parse_distribution(values, where: str) -> FiniteDistribution:
    _require(isinstance(values, list) and values, f"{where}: nonempty array required")
    try:
        return FiniteDistribution(np.asarray(values, dtype=float))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{where}: {err}")


def _parse_kernel(values, where: str) -> ConditionalKernel:
    _require(isinstance(values, list) and values, f"{where}: nonempty matrix required")
    try:
        return ConditionalKernel(np.asarray(values, dtype=float))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{where}: {err}")


def build_model(section: dict) -> ChainModel:
    """A ChainModel from its config section, with field-level errors."""
    _require(isinstance(section, dict), "model: must be an object")
    for field_name in ("source", "observation", "n_u", "n_y", "channel"):
        _require(field_name in section, f"model.{field_name}: missing")
    source = _parse_distribution(section["source"], "model.source")
    n_u, n_y = section["n_u"], section["n_y"]
    _require(
        isinstance(n_u, int) and n_u >= 1 and isinstance(n_y, int) and n_y >= 1,
        "model.n_u / model.n_y: positive integers required",
    )
    observation = _parse_kernel(section["observation"], "model.observation")
    channel = _parse_kernel(section["channel"], "model.channel")
    if "enc_table" in section or "dec_table" in section:
        _require(
            "enc_table" in section and "dec_table" in section,
            "model.enc_table / model.dec_table: both tables are required together",
        )
        try:
            distortion = DistortionSpec.from_symbol_tables(
                section["enc_table"], section["dec_table"], n_u, n_y
            )
        except (TypeError, ValueError) as err:
            raise ConfigError(f"model distortion tables: {err}")
    else:
        _require(
            "d_enc" in section and "d_dec" in section,
            "model.d_enc / model.d_dec: missing distortion tensors",
        )
        try:
            distortion = DistortionSpec(
                np.asarray(section["d_enc"], dtype=float),
                np.asarray(section["d_dec"], dtype=float),
            )
        except (TypeError, ValueError) as err:
            raise ConfigError(f"model distortion tensors: {err}")
    rate_ratio = section.get("rate_ratio", 1.0)
    model = ChainModel(
        source=source,
        observation=observation,
        n_u=n_u,
        n_y=n_y,
        channel=channel,
        distortion=distortion,
        rate_ratio=float(rate_ratio),
    )
    from .chain import validate_model

    problems = validate_model(model)
    if problems:
        raise ConfigError("model: " + "; ".join(problems))
    return model


def build_game(section: dict) -> ReducedGame:
    """A ReducedGame from its config section."""
    _require(isinstance(section, dict), "game: must be an object")
    _require(
        "enc_cost" in section and "dec_cost" in section,
        "game.enc_cost / game.dec_cost: missing",
    )
    try:
        return ReducedGame(
            np.asarray(section["enc_cost"], dtype=float),
            np.asarray(section["dec_cost"], dtype=float),
            tuple(section.get("enc_labels", ())),
            tuple(section.get("dec_labels", ())),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"game: {err}")


def build_problem(config: dict):
    """The model or reduced game a config describes (model wins when both exist)."""
    if "model" in config:
        return build_model(config["model"])
    if "game" in config:
        return build_game(config["game"])
    raise ConfigError("config needs a 'model' or 'game' section for this command")


def table1_game(alpha: float, beta: float) -> ReducedGame:
    """The bundled three-symbol game at one (alpha, beta) pair.

    Rows are encoder meanings g0..g2, columns decoder interpretations h0..h2;
    alpha and beta set how far symbol 1 sits from symbol 0 for the encoder
    and the decoder respectively, with a fixed bias between the two players
    on the remaining entries.
    """
    enc = np.array([
        [0.0, alpha, 7.0],
        [alpha, 0.0, 6.0],
        [7.0, 6.0, 0.0],
    ])
    dec = np.array([
        [0.0, beta + 1.2, 8.0],
        [beta, 1.2, 7.0],
        [7.0, 7.2, 1.0],
    ])
    return ReducedGame(enc, dec, ("g0", "g1", "g2"), ("h0", "h1", "h2"))


def _sweep_values(spec, where: str) -> list:
    if spec is None:
        spec = dict(DEFAULT_SWEEP)
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, list):
        _require(bool(spec), f"{where}: sweep list must be nonempty")
        return [float(v) for v in spec]
    if isinstance(spec, dict):
        for key in ("start", "stop", "step"):
            _require(key in spec, f"{where}.{key}: missing")
        start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
        _require(step > 0 and stop >= start, f"{where}: needs step > 0 and stop >= start")
        count = int((stop - start) / step + 1e-9) + 1
        return [round(start + k * step, 10) for k in range(count)]
    raise ConfigError(f"{where}: expected a number, list, or start/stop/step object")


def random_chain_model(
    rng: np.random.Generator,
    max_alphabet: int = 3,
    distortion_low: float = 0.0,
    distortion_high: float = 1.0,
) -> ChainModel:
    """One random small chain instance: simplex-uniform kernels, uniform distortions."""
    size = {
        name: int(rng.integers(2, max_alphabet + 1))
        for name in ("w", "u", "y", "x", "xhat", "what")
    }
    source = FiniteDistribution(rng.dirichlet(np.ones(size["w"])))
    observation = ConditionalKernel(
        rng.dirichlet(np.ones(size["u"] * size["y"]), size=size["w"])
    )
    channel = ConditionalKernel(rng.dirichlet(np.ones(size["xhat"]), size=size["x"]))
    shape = (size["w"], size["u"], size["y"], size["what"])
    distortion = DistortionSpec(
        rng.uniform(distortion_low, distortion_high, size=shape),
        rng.uniform(distortion_low, distortion_high, size=shape),
    )
    return ChainModel(
        source=source,
        observation=observation,
        n_u=size["u"],
        n_y=size["y"],
        channel=channel,
        distortion=distortion,
        rate_ratio=1.0,
    )


def _solver_options(config: dict) -> dict:
    section = config.get("solver", {})
    return {key: section[key] for key in section if key in _SOLVER_KEYS}


def _split(options: dict, keys) -> dict:
    return {key: options[key] for key in options if key in keys}


def _vec(values) -> np.ndarray:
    return np.asarray(values, dtype=float)


def _one_hot(index: int, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[int(index)] = 1.0
    return out


def _commitment_rows(problem, result, kind: str):
    if isinstance(problem, ReducedGame):
        leader = _vec(result.leader)
        choice = int(np.asarray(result.follower_choice).ravel()[0])
        follower = _one_hot(choice, problem.n_follower)
    else:
        leader = _vec(result.leader)
        n_ctx = result.follower_choice.size
        follower = np.zeros((n_ctx, problem.n_what))
        follower[np.arange(n_ctx), result.follower_choice.ravel()] = 1.0
    return {
        "kind": kind,
        "index": 0,
        "enc_value": float(result.value),
        "dec_value": float(result.follower_value),
        "leader": leader,
        "follower": follower,
    }


def run_capacity(config: dict, seed=None):
    _require("channel" in config, "channel: section required for this command")
    section = config["channel"]
    kernel = _parse_kernel(section.get("matrix"), "channel.matrix")
    tolerance = float(section.get("tolerance", 1e-10))
    result = channel_capacity(kernel, tol=tolerance)
    row = {
        "capacity": result.capacity,
        "lower_bound": result.lower_bound,
        "upper_bound": result.upper_bound,
        "iterations": result.iterations,
        "converged": result.converged,
        "input_distribution": result.input_distribution,
    }
    columns = [
        "capacity",
        "lower_bound",
        "upper_bound",
        "iterations",
        "converged",
        "input_distribution",
    ]
    return [row], columns, {}


def _rd_rows(source, matrix, n_points, label):
    points = rate_distortion_curve(source, matrix, n_points=n_points)
    return [
        {
            "curve": label,
            "multiplier": point.multiplier,
            "distortion": point.distortion,
            "rate": point.rate,
        }
        for point in points
    ]


def run_rdcurve(config: dict, seed=None):
    columns = ["curve", "multiplier", "distortion", "rate"]
    if "rd_comparison" in config:
        section = config["rd_comparison"]
        source = _parse_distribution(
            section.get("source", [1 / 3, 1 / 3, 1 / 3]), "rd_comparison.source"
        )
        betas = section.get("betas", [0.5, 1.0, 2.0])
        _require(isinstance(betas, list) and betas, "rd_comparison.betas: nonempty list")
        n_points = int(section.get("n_points", 33))
        rows = []
        n = source.size
        hamming = 1.0 - np.eye(n)
        rows.extend(_rd_rows(source, hamming, n_points, "hamming"))
        for beta in betas:
            matrix = table1_game(1.0, float(beta)).dec_cost
            matrix = matrix / matrix.max()
            rows.extend(_rd_rows(source, matrix, n_points, f"beta={beta:g}"))
        return rows, columns, {"normalization": "matrix scaled so the max entry is 1"}
    _require("rd" in config, "rd or rd_comparison: section required for this command")
    section = config["rd"]
    source = _parse_distribution(section.get("source"), "rd.source")
    matrix = np.asarray(section.get("distortion"), dtype=float)
    _require(matrix.ndim == 2, "rd.distortion: 2-D matrix required")
    n_points = int(section.get("n_points", 33))
    rows = _rd_rows(source, matrix, n_points, "rd")
    return rows, columns, {}


def run_ose(config: dict, seed=None):
    problem = build_problem(config)
    options = _solver_options(config)
    result = solve_ose(problem, **_split(options, ("sigma_cap", "vertex_cap")))
    columns = ["kind", "index", "enc_value", "dec_value", "leader", "follower"]
    return [_commitment_rows(problem, result, "ose")], columns, {}


def run_rse(config: dict, seed=None):
    problem = build_problem(config)
    options = _solver_options(config)
    result = solve_rse(
        problem,
        **_split(options, ("grid_resolution", "max_grid_points", "refine_rounds")),
    )
    columns = ["kind", "index", "enc_value", "dec_value", "leader", "follower"]
    return [_commitment_rows(problem, result, "rse")], columns, {}


def run_ne(config: dict, seed=None):
    problem = build_problem(config)
    options = _solver_options(config)
    report = nash_equilibria(problem, **_split(options, ("support_cap", "pair_budget")))
    rows = []
    for index, point in enumerate(report.equilibria):
        rows.append(
            {
                "kind": f"ne_{point.kind}",
                "index": index,
                "enc_value": point.leader_value,
                "dec_value": point.follower_value,
                "leader": _vec(point.leader),
                "follower": _vec(point.follower),
            }
        )
    columns = ["kind", "index", "enc_value", "dec_value", "leader", "follower"]
    return rows, columns, {"n_equilibria": len(rows)}


def run_audit_order(config: dict, seed=None):
    columns = [
        "instance",
        "sizes",
        "ose",
        "rse",
        "n_ne",
        "min_ne",
        "max_ne",
        "rse_ge_ose",
        "ose_le_all_ne",
        "exists_ne_ge_rse",
    ]
    options = _solver_options(config)
    if "random_audit" in config:
        _require(seed is not None, "random_audit: a seed is required")
        section = config["random_audit"]
        n_instances = int(section["n_instances"])
        max_alphabet = int(section.get("max_alphabet", 3))
        low, high = section.get("distortion_range", [0.0, 1.0])
        rng = np.random.default_rng(seed)
        rows = []
        violations = {"rse_ge_ose": 0, "ose_le_all_ne": 0, "exists_ne_ge_rse": 0}
        for index in range(n_instances):
            model = random_chain_model(rng, max_alphabet, float(low), float(high))
            audit = audit_commitment_order(model, **options)
            for key in violations:
                violations[key] += 0 if audit[key] else 1
            rows.append(_audit_row(index, model, audit))
        extras = {f"violations_{key}": count for key, count in violations.items()}
        extras["n_instances"] = n_instances
        return rows, columns, extras
    problem = build_problem(config)
    audit = audit_commitment_order(problem, **options)
    return [_audit_row(0, problem, audit)], columns, {}


def _audit_row(index: int, problem, audit: dict) -> dict:
    if isinstance(problem, ChainModel):
        sizes = problem.sizes()
        size_text = "w{w}u{u}y{y}x{x}c{xhat}r{what}".format(**sizes)
    else:
        size_text = f"{problem.n_leader}x{problem.n_follower}"
    ne_values = audit["ne_values"]
    return {
        "instance": index,
        "sizes": size_text,
        "ose": audit["ose"],
        "rse": audit["rse"],
        "n_ne": audit["n_ne"],
        "min_ne": min(ne_values) if ne_values else float("nan"),
        "max_ne": max(ne_values) if ne_values else float("nan"),
        "rse_ge_ose": audit["rse_ge_ose"],
        "ose_le_all_ne": audit["ose_le_all_ne"],
        "exists_ne_ge_rse": audit["exists_ne_ge_rse"],
    }


def run_counterexample(config: dict, seed=None):
    section = config.get("counterexample", {})
    resolution = float(section.get("resolution", 1e-3))
    record = scalar_game.audit_counterexample(resolution)
    columns = [
        "rse_value",
        "rse_leader",
        "rse_grid_value",
        "ose_value",
        "ose_grid_value",
        "max_ne_value",
        "min_ne_value",
        "separation",
        "resolution",
    ]
    return [dict(record)], columns, {}


def run_table1(config: dict, seed=None):
    section = config.get("table1", {})
    alphas = _sweep_values(section.get("alpha"), "table1.alpha")
    betas = _sweep_values(section.get("beta"), "table1.beta")
    options = _solver_options(config)
    rows = []
    failures = 0
    for alpha in alphas:
        for beta in betas:
            game = table1_game(alpha, beta)
            try:
                ose = solve_ose(game, **_split(options, ("sigma_cap", "vertex_cap")))
                rse = solve_rse(
                    game,
                    **_split(
                        options, ("grid_resolution", "max_grid_points", "refine_rounds")
                    ),
                )
                report = nash_equilibria(
                    game, **_split(options, ("support_cap", "pair_budget"))
                )
            except (ValueError, RuntimeError):
                failures += 1
                continue
            for kind, result in (("ose", ose), ("rse", rse)):
                row = _commitment_rows(game, result, kind)
                row["alpha"], row["beta"] = alpha, beta
                rows.append(row)
            for index, point in enumerate(report.equilibria):
                rows.append(
                    {
                        "alpha": alpha,
                        "beta": beta,
                        "kind": f"ne_{point.kind}",
                        "index": index,
                        "enc_value": point.leader_value,
                        "dec_value": point.follower_value,
                        "leader": _vec(point.leader),
                        "follower": _vec(point.follower),
                    }
                )
    columns = [
        "alpha",
        "beta",
        "kind",
        "index",
        "enc_value",
        "dec_value",
        "leader",
        "follower",
    ]
    order = {"ose": 0, "rse": 1}
    rows.sort(
        key=lambda row: (
            row["alpha"],
            row["beta"],
            order.get(row["kind"], 2),
            row["kind"],
            row["index"],
        )
    )
    return rows, columns, {"failures": failures}


def run_feasibility(config: dict, seed=None):
    """Feasibility report for the encoder given in the config (or a constant one)."""
    model = build_model(config.get("model", {}))
    section = config.get("feasibility", {})
    if "encoder" in section:
        encoder = EncoderStrategy(_parse_kernel(section["encoder"], "feasibility.encoder"))
    else:
        encoder = EncoderStrategy.constant(model.n_u, 0, model.n_x)
    report = feasibility_test(model, encoder)
    row = {
        "feasible": report.feasible,
        "demand": report.demand,
        "capacity": report.capacity,
        "budget": report.budget,
        "margin": report.margin,
        "rate_ratio": report.rate_ratio,
    }
    columns = ["feasible", "demand", "capacity", "budget", "margin", "rate_ratio"]
    return [row], columns, {}


def _format_float(value: float) -> str:
    return format(float(value), ".12g")


def _cell_text(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(value)
    if isinstance(value, np.ndarray):
        if value.ndim == 1:
            return ";".join(_format_float(v) for v in value)
        return "|".join(";".join(_format_float(v) for v in row) for row in value)
    if isinstance(value, (list, tuple)):
        return ";".join(_cell_text(v) for v in value)
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v != v:
            return None
        return float(_format_float(v))
    if isinstance(value, np.ndarray):
        return [_json_value(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    return value


def config_digest(config: dict, seed) -> str:
    payload = {"config": _json_value(config), "seed": seed}
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def render(rows, columns, fmt: str, metadata: dict) -> str:
    """Rows as a CSV or JSON document string with a metadata header."""
    if fmt == "csv":
        lines = [f"# {key}: {_cell_text(value)}" for key, value in metadata.items()]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_cell_text(row.get(column, "")) for column in columns))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        document = {
            "metadata": _json_value(metadata),
            "columns": list(columns),
            "rows": [
                {column: _json_value(row.get(column)) for column in columns}
                for row in rows
            ],
        }
        return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"
    raise ConfigError(f"unknown output format {fmt!r}")


def emit(rows, columns, path: str, fmt: str, metadata: dict):
    text = render(rows, columns, fmt, metadata)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as err:
        raise RuntimeError(f"cannot write {path}: {err}")


RUNNERS = {
    "capacity": run_capacity,
    "rdcurve": run_rdcurve,
    "ose": run_ose,
    "rse": run_rse,
    "ne": run_ne,
    "audit-order": run_audit_order,
    "counterexample": run_counterexample,
    "table1": run_table1,
    "feasibility": run_feasibility,
}
