"""``qtrans`` command line: run an experiment from a flat JSON config and write tables."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import FockConfig
from .dynamics import (
    TimeGrid,
    heisenberg_FK,
    nondegenerate_amplitudes,
    perfect_transfer_times,
    printed_transfer_times,
)
from .model import (
    DeviceParams,
    ModelParams,
    build_H0,
    build_H2,
    check_perturbative,
    derive_model_params,
    effective_params,
    first_order_residual,
    fn_generator_W,
)
from .protocols import (
    degenerate_transfer,
    effective_vs_full_sweep,
    nondegenerate_transfer,
    prepare_coherent,
)

SCHEMA_VERSION = 1
EXPERIMENTS = ("derive", "fig2", "transfer-degenerate", "transfer-nondegenerate", "coherent", "validate", "sweep")
DEFAULT_BETAS = [math.pi / 4, math.pi / 6, math.pi / 12]

_COMMON = {"schema_version": None, "n_a": 10, "n_b": 10, "leakage_tol": 1e-6}
_MODEL_REQUIRED = ("omega_a", "omega_b", "epsilon", "lambda_a", "lambda_b")
_GRID = {"t_end": None, "n_points": None}
_DEVICE_REQUIRED = ("e_j", "c_j", "c_g", "c_0", "v_g", "v", "d", "m", "omega_b")
_DEVICE_OPTIONAL = {
    "s": 1e-12, "r": 1e-5, "length": 1e-2, "l": 4.2e-7, "c": 1.6e-10, "k": 1, "phi_c": 0.0, "phi_0": None,
    "n_g": None, "strategy": "as_written",
}

SCHEMAS = {
    "derive": (_DEVICE_REQUIRED, _DEVICE_OPTIONAL),
    "fig2": ((), {"betas": DEFAULT_BETAS, "delta": 1.0, "delta_t_max": 2 * math.pi, "n_points": 1001, "Theta": 0.0}),
    "transfer-degenerate": (_MODEL_REQUIRED, {"n": 1, "threshold": 2.0, **_GRID}),
    "transfer-nondegenerate": (_MODEL_REQUIRED, {"strategy": "as_written", "threshold": 10.0, **_GRID}),
    "coherent": (_MODEL_REQUIRED, {"strategy": "mean_detuning", "xi_re": 1.0, "xi_im": 0.0, "n_b": 25, **_GRID}),
    "validate": (
        _MODEL_REQUIRED,
        {
            "protocol": "degenerate",
            "ratios": [8, 16, 32, 64],
            "strategy": "mean_detuning",
            "n": 1,
            "exponent_range": None,
            "n_random": 1000,
        },
    ),
    "sweep": (
        _MODEL_REQUIRED,
        {"parameter": "epsilon", "values": None, "protocol": "transfer-degenerate", "strategy": "as_written", "n": 1},
    ),
}


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Round-trip float formatting with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float written at 17 significant digits; non-finite floats become null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(fmt(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def load_config(path: str | None, overrides: list[str], experiment: str) -> dict:
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a flat JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            raw[key] = json.loads(value)
        except json.JSONDecodeError:
            raw[key] = value
    return validate_config(raw, experiment)


def validate_config(raw: dict, experiment: str) -> dict:
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if "schema_version" not in raw:
        raise ConfigError("missing required field 'schema_version'")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {raw['schema_version']!r} (expected {SCHEMA_VERSION})")
    required, optional = SCHEMAS[experiment]
    allowed = set(_COMMON) | set(required) | set(optional)
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown config fields for {experiment}: {', '.join(unknown)}")
    missing = [k for k in required if k not in raw]
    if missing:
        raise ConfigError(f"missing required fields for {experiment}: {', '.join(missing)}")
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(f"field {key!r}: nested objects are not allowed")
    cfg = {**_COMMON, **optional, **raw}
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fock(cfg: dict, n_a=None, n_b=None) -> FockConfig:
    return FockConfig(n_a=int(n_a or cfg["n_a"]), n_b=int(n_b or cfg["n_b"]), leakage_tol=float(cfg["leakage_tol"]))


def _model(cfg: dict) -> ModelParams:
    return ModelParams(**{k: float(cfg[k]) for k in _MODEL_REQUIRED})


def _grid(cfg: dict) -> TimeGrid | None:
    if cfg.get("t_end") is None:
        return None
    return TimeGrid(0.0, float(cfg["t_end"]), int(cfg.get("n_points") or 2001))


def _check(name: str, passed: bool, value) -> dict:
    return {"name": name, "passed": bool(passed), "value": value}


def _flatten_report(rep) -> dict:
    d = rep.as_dict()
    extras = d.pop("extras")
    for k, v in extras.items():
        if isinstance(v, (int, float, str)):
            d[k] = v
    return d


def run_derive(cfg: dict):
    dev_fields = {k: cfg[k] for k in _DEVICE_REQUIRED}
    for k in ("s", "r", "length", "l", "c", "k", "phi_c", "phi_0"):
        if cfg[k] is not None:
            dev_fields[k] = cfg[k]
    dev = DeviceParams(**dev_fields)
    d = derive_model_params(dev, n_g=cfg["n_g"], strategy=cfg["strategy"])
    rows = [{"name": q.name, "value": q.value, "formula": q.formula} for q in d.quantities]
    diag = check_perturbative(d.effective)
    rows.append({"name": "perturbative_ratio", "value": diag["ratio"], "formula": "|Lambda|/max(|lambda_a|,|lambda_b|)"})
    derived = {q.name: q.value for q in d.quantities}
    checks = [_check("epsilon_positive", d.model.epsilon > 0, d.model.epsilon)]
    return rows, derived, checks


def run_fig2(cfg: dict):
    betas = cfg["betas"]
    if not isinstance(betas, list) or not betas:
        raise ConfigError("betas must be a non-empty list")
    delta = float(cfg["delta"])
    if delta == 0:
        raise ConfigError("delta must be non-zero")
    dt = np.linspace(0.0, float(cfg["delta_t_max"]), int(cfg["n_points"]))
    rows, table = fig2_table(betas, delta, dt / delta, float(cfg["Theta"]))
    checks = []
    for beta, col in zip(betas, table.T):
        want = math.sin(2 * beta) ** 2
        checks.append(_check(f"max_K2[beta={fmt(beta)}]", abs(col.max() - want) < 1e-12 or dt[-1] < math.pi, col.max()))
    return rows, {"betas": betas, "delta": delta}, checks


def fig2_table(betas, delta: float, times: np.ndarray, Theta: float = 0.0):
    """``|K(-t)|^2`` per beta on the given times; returns CSV rows and the raw matrix."""
    cols = []
    for beta in betas:
        _, _, K = heisenberg_FK(float(beta), delta, Theta, -times)
        cols.append(np.abs(K) ** 2)
    table = np.stack(cols, axis=1)
    rows = []
    for i, t in enumerate(times):
        row = {"delta_t": delta * t}
        for beta, v in zip(betas, table[i]):
            row[f"K2[beta={fmt(float(beta))}]"] = v
        rows.append(row)
    return rows, table


def run_transfer_degenerate(cfg: dict):
    p = _model(cfg)
    rep = degenerate_transfer(p, int(cfg["n"]), _fock(cfg), _grid(cfg), threshold=float(cfg["threshold"]))
    eff = effective_params(p)
    row = _flatten_report(rep)
    row["printed_time"] = float(printed_transfer_times(eff.delta)[0])
    derived = {**eff.as_dict(), "perfect_transfer_time": float(perfect_transfer_times(eff.delta)[0])}
    checks = [
        _check("fidelities_in_unit_interval", all(0 <= rep_f <= 1 + 1e-12 for rep_f in (rep.full_fidelity, rep.effective_fidelity, rep.analytic_fidelity)), rep.full_fidelity),
    ]
    return [row], derived, checks


def run_transfer_nondegenerate(cfg: dict):
    p = _model(cfg)
    rep = nondegenerate_transfer(p, _fock(cfg), _grid(cfg), cfg["strategy"], threshold=float(cfg["threshold"]))
    eff = effective_params(p, cfg["strategy"])
    row = _flatten_report(rep)
    checks = [
        _check("fidelities_in_unit_interval", 0 <= rep.full_fidelity <= 1 + 1e-12, rep.full_fidelity),
        _check("effective_conditional_fidelity", abs(rep.extras["effective_conditional_fidelity"] - 1) < 1e-12, rep.extras["effective_conditional_fidelity"]),
    ]
    return [row], eff.as_dict(), checks


def run_coherent(cfg: dict):
    p = _model(cfg)
    eff = effective_params(p, cfg["strategy"])
    xi = complex(float(cfg["xi_re"]), float(cfg["xi_im"]))
    fock = FockConfig(n_a=2, n_b=int(cfg["n_b"]), leakage_tol=float(cfg["leakage_tol"]))
    rep = prepare_coherent(eff, xi, fock, _grid(cfg))
    rows = rep.table()
    fano = rep.fano[np.isfinite(rep.fano)]
    checks = [
        _check("fidelity", float(1 - rep.fidelity.min()) < 1e-10, float(1 - rep.fidelity.min())),
        _check("poisson", bool(np.all(np.abs(fano - 1) < 1e-6)), float(np.max(np.abs(fano - 1))) if fano.size else 0.0),
        _check("norm", rep.max_norm_error < 1e-10, rep.max_norm_error),
    ]
    return rows, {**eff.as_dict(), "xi": [xi.real, xi.imag]}, checks


def run_validate(cfg: dict, seed: int):
    p = _model(cfg)
    fock = _fock(cfg)
    v = effective_vs_full_sweep(
        p, cfg["ratios"], fock, protocol=cfg["protocol"], strategy=cfg["strategy"], n=int(cfg["n"])
    )
    rows = v.table()
    rng = np.random.default_rng(seed)
    n_rand = int(cfg["n_random"])
    beta, delta, Theta, t = (rng.uniform(lo, hi, n_rand) for lo, hi in ((-3, 3), (-5, 5), (-5, 5), (-50, 50)))
    F1, F2, K = heisenberg_FK(beta, delta, Theta, t)
    comp = float(max(np.max(np.abs(np.abs(F1) ** 2 + np.abs(K) ** 2 - 1)), np.max(np.abs(np.abs(F2) ** 2 + np.abs(K) ** 2 - 1))))
    x = rng.uniform(0, 2 * math.pi, n_rand)
    c01, c10 = nondegenerate_amplitudes(rng.uniform(-3, 3, n_rand), 2.0, x)
    amp = float(np.max(np.abs(np.abs(c01) ** 2 + np.abs(c10) ** 2 - 1)))
    checks = [
        _check("error_decreases_with_ratio", v.spearman < 0, v.spearman),
        _check("complementarity", comp < 1e-14, comp),
        _check("nondegenerate_amplitude_norm", amp < 1e-14, amp),
    ]
    if cfg["exponent_range"] is not None:
        lo, hi = cfg["exponent_range"]
        checks.append(_check("exponent_in_range", lo <= v.exponent <= hi, v.exponent))
    if cfg["protocol"] == "degenerate" and math.isclose(p.omega_a, p.omega_b):
        eff = effective_params(p.replace(epsilon=p.omega_a + cfg["ratios"][0] * math.hypot(p.lambda_a, p.lambda_b)))
        small = FockConfig(4, 4)
        W = fn_generator_W(eff, small, Lambda=eff.model.epsilon - eff.model.omega_a)
        H2, H0 = build_H2(eff.model, small), build_H0(eff.model, small)
        res = first_order_residual(H2, H0, W, small) / np.linalg.norm(H2 - H0, 2)
        checks.append(_check("first_order_cancellation", res < 1e-12, res))
    derived = {"exponent": v.exponent, "fit_residual": v.fit_residual, "spearman": v.spearman, "seed": seed}
    return rows, derived, checks


def run_sweep(cfg: dict):
    name = cfg["parameter"]
    if name not in _MODEL_REQUIRED:
        raise ConfigError(f"parameter must be one of {', '.join(_MODEL_REQUIRED)}")
    values = cfg["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("values must be a non-empty list")
    base = _model(cfg)
    fock = _fock(cfg)
    rows = []
    for value in values:
        p = base.replace(**{name: float(value)})
        if cfg["protocol"] == "transfer-degenerate":
            rep = degenerate_transfer(p, int(cfg["n"]), fock)
        elif cfg["protocol"] == "transfer-nondegenerate":
            rep = nondegenerate_transfer(p, fock, None, cfg["strategy"])
        else:
            raise ConfigError(f"unknown sweep protocol {cfg['protocol']!r}")
        rows.append({name: float(value), **_flatten_report(rep)})
    checks = [_check("fidelities_in_unit_interval", all(0 <= r["full_fidelity"] <= 1 + 1e-12 for r in rows), None)]
    return rows, {"parameter": name}, checks


def run_experiment(experiment: str, cfg: dict, seed: int = 0):
    if experiment == "derive":
        return run_derive(cfg)
    if experiment == "fig2":
        return run_fig2(cfg)
    if experiment == "transfer-degenerate":
        return run_transfer_degenerate(cfg)
    if experiment == "transfer-nondegenerate":
        return run_transfer_nondegenerate(cfg)
    if experiment == "coherent":
        return run_coherent(cfg)
    if experiment == "validate":
        return run_validate(cfg, seed)
    if experiment == "sweep":
        return run_sweep(cfg)
    raise ConfigError(f"unknown experiment {experiment!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtrans", description=__doc__)
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="inline config override")
    parser.add_argument("--out", help="output directory (table plus meta.json); stdout if omitted")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--version", action="version", version=f"qtrans {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set, args.experiment)
        rows, derived, checks = run_experiment(args.experiment, cfg, args.seed)
    except (ConfigError, ValueError, TypeError) as exc:
        sys.stderr.write(to_json({"status": "error", "experiment": args.experiment, "error": str(exc)}) + "\n")
        return 2
    body = to_csv(rows) if args.format == "csv" else to_json(rows) + "\n"
    failed = [c for c in checks if not c["passed"]]
    meta = {
        "tool": "qtrans",
        "version": __version__,
        "experiment": args.experiment,
        "config_sha256": config_hash(cfg),
        "seed": args.seed,
        "config": cfg,
        "derived": derived,
        "checks": checks,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.experiment}.{args.format}").write_text(body, newline="\n")
        (out / "meta.json").write_text(to_json(meta) + "\n", newline="\n")
    else:
        sys.stdout.write(body)
    if failed:
        sys.stderr.write(to_json({"status": "failed", "experiment": args.experiment, "failed_checks": failed}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
