"""Batch experiment runner: JSON config in, CSV/JSON reports out.

Exit codes: 0 success, 2 config error, 3 runtime error.  Outputs are
deterministic for a fixed config (the elapsed_ms column is the one
allowed exception); real columns carry 17 significant digits and every
output starts with a ``schema=1`` tag so downstream tooling can validate
its input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import exceptional as exc
from . import potentials as pot
from . import preimage as pre
from . import pressure as prs
from .errors import TreePressureError
from .maps import CANTOR_REPELLER, map_from_spec

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

DEFAULTS = {
    "depth_cap": 24,
    "period_cap": 16,
    "p_max": 8,
    "size_max": 64,
    "epsilon": 1e-9,
    "slack": 1e-2,
    "grid_size": 512,
    "samples": 100,
    "iters": 5000,
    "telescoping_n": 20,
}


class ConfigError(ValueError):
    pass


def _require(cfg: dict, name: str):
    if name not in cfg:
        raise ConfigError(f'missing required config field "{name}"')
    return cfg[name]


def _get(cfg: dict, name: str):
    return cfg.get(name, DEFAULTS[name])


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv(path: str, command: str, columns: list[str], rows: list[list]) -> None:
    lines = [f"# schema={SCHEMA_VERSION} command={command}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_safe(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "pole"
        if v == math.inf:
            return "inf"
        if v == -math.inf:
            return "-inf"
    return v


def _write_json(path: str, command: str, config: dict, report: dict) -> None:
    doc = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "report": report,
    }

    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        return _json_safe(obj)

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clean(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def validate_report_document(doc: dict) -> None:
    """Schema gate for emitted JSON reports (used by the round-trip tests)."""
    for key in ("schema", "command", "config", "report"):
        if key not in doc:
            raise ValueError(f"report document missing key {key!r}")
    if doc["schema"] != SCHEMA_VERSION:
        raise ValueError(f"unexpected schema tag {doc['schema']!r}")
    if not isinstance(doc["report"], dict):
        raise ValueError("report payload must be an object")


def _mode_name(mode: str) -> str:
    return "parallel-deterministic" if mode == "parallel" else "serial"


# -- command handlers ----------------------------------------------------------


def cmd_tree_pressure(cfg: dict, out: str, mode: str) -> None:
    m = map_from_spec(_require(cfg, "map"))
    G = pot.potential_from_spec(m, _require(cfg, "potential"))
    x = float(_require(cfg, "x"))
    n_max = int(_require(cfg, "n_max"))
    estimates = prs.tree_pressure(
        m, G, x, n_max, mode=_mode_name(mode), depth_cap=_get(cfg, "depth_cap")
    )
    rows = []
    for est in estimates:
        fold = est.diagnostics
        rows.append([
            est.n,
            est.value,
            fold.log_sum,
            fold.leaf_count,
            fold.pole_hits,
            fold.min_pole_distance,
            est.increment if est.increment is not None else float("nan"),
            fold.elapsed * 1000.0,
        ])
    _write_csv(
        out, "tree_pressure",
        ["n", "estimate", "log_sum", "leaf_count", "pole_hits",
         "min_pole_distance", "cauchy_increment", "elapsed_ms"],
        rows,
    )


def _run_estimator(m, G, x, spec: dict, mode: str, cfg: dict):
    method = spec.get("method")
    if method == "tree":
        n = int(spec.get("n", 12))
        ests = prs.tree_pressure(
            m, G, x, n, mode=_mode_name(mode), depth_cap=_get(cfg, "depth_cap")
        )
        est = ests[-1]
        return est, f"n={est.n}"
    if method == "ulam":
        bins = int(spec.get("bins", 1024))
        est = prs.ulam_pressure(m, G, bins, iters=_get(cfg, "iters"))
        return est, f"bins={bins}"
    if method == "periodic":
        n = int(spec.get("n", 10))
        est = prs.periodic_orbit_pressure(m, G, n, cap=_get(cfg, "period_cap"))
        return est, f"n={n}"
    raise ConfigError(f'unknown estimator method "{method}"')


def cmd_compare(cfg: dict, out: str, mode: str) -> None:
    m = map_from_spec(_require(cfg, "map"))
    G = pot.potential_from_spec(m, _require(cfg, "potential"))
    estimators = _require(cfg, "estimators")
    if not isinstance(estimators, list) or len(estimators) < 2:
        raise ConfigError('config field "estimators" must list at least 2 estimators')
    for spec in estimators:
        if spec.get("method") == "ulam" and m.julia_structure == CANTOR_REPELLER:
            raise ConfigError(
                "estimator ulam is unavailable for cantor_repeller maps"
            )
        if spec.get("method") == "tree" and "x" not in cfg and "x" not in spec:
            raise ConfigError('missing required config field "x"')
    x = float(cfg.get("x", 0.0))
    rows = []
    base_value = None
    for spec in estimators:
        est, params = _run_estimator(m, G, x, spec, mode, cfg)
        if base_value is None:
            base_value = est.value
        rows.append([est.method, est.value, params, est.value - base_value])
    _write_csv(out, "compare", ["method", "value", "parameters", "discrepancy"], rows)


def cmd_exceptional(cfg: dict, out: str, mode: str) -> None:
    m = map_from_spec(_require(cfg, "map"))
    G = pot.potential_from_spec(m, _require(cfg, "potential"))
    rep = exc.is_exceptional(
        m, G, p_max=_get(cfg, "p_max"), size_max=_get(cfg, "size_max")
    )
    _write_json(out, "exceptional", cfg, rep.to_dict())


def cmd_normality(cfg: dict, out: str, mode: str) -> None:
    m = map_from_spec(_require(cfg, "map"))
    if "lambda" in cfg:
        lam = [float(c) for c in cfg["lambda"]]
    elif "potential" in cfg:
        lam = pot.singular_set(pot.potential_from_spec(m, cfg["potential"]))
    else:
        raise ConfigError('missing required config field "lambda"')
    x = float(_require(cfg, "x"))
    n = int(_require(cfg, "n"))
    eps = float(_get(cfg, "epsilon"))
    cert = pre.lambda_normal(m, lam, x, n, eps, depth_cap=_get(cfg, "depth_cap"))
    _write_json(out, "normality", cfg, {
        "x": cert.x,
        "depth": cert.depth,
        "epsilon": cert.epsilon,
        "normal": cert.normal,
        "witness": list(cert.witness) if cert.witness is not None else None,
        "blocking_depth": cert.blocking_depth,
    })


def cmd_hyperbolicity(cfg: dict, out: str, mode: str) -> None:
    m = map_from_spec(_require(cfg, "map"))
    G = pot.potential_from_spec(m, _require(cfg, "potential"))
    n = int(_require(cfg, "n"))
    grid_size = int(_get(cfg, "grid_size"))
    oracle_spec = cfg.get("oracle", {})
    method = oracle_spec.get("method", "auto")
    if method == "ulam":
        oracle = prs.ulam_pressure(
            m, G, int(oracle_spec.get("bins", 1024)), iters=_get(cfg, "iters")
        )
    elif method == "periodic":
        oracle = prs.periodic_orbit_pressure(
            m, G, int(oracle_spec.get("n", 10)), cap=_get(cfg, "period_cap")
        )
    elif method == "auto":
        oracle = prs.default_pressure_oracle(m, G)
    else:
        raise ConfigError(f'unknown oracle method "{method}"')
    rep = prs.hyperbolicity_check(m, G, n, grid_size, oracle, slack=_get(cfg, "slack"))
    _write_json(out, "hyperbolicity", cfg, {
        "sup_estimate": rep.sup_estimate,
        "pressure_value": rep.pressure_value,
        "pressure_method": rep.pressure_method,
        "n": rep.n,
        "margin": rep.margin,
        "verdict": rep.verdict,
        "slack": rep.slack,
    })


def _standard_k(m) -> list[tuple[float, float]]:
    if m.julia_structure == CANTOR_REPELLER:
        a = m.params["a"]
        gap = 0.5 * math.sqrt(1.0 - 4.0 / a)
        return [(0.0, 0.5 - gap), (0.5 + gap, 1.0)]
    return [(0.05, 0.45), (0.55, 0.95)]


def cmd_cohomology(cfg: dict, out: str, mode: str) -> None:
    m = map_from_spec(_require(cfg, "map"))
    G = pot.potential_from_spec(m, _require(cfg, "potential"))
    N = int(_require(cfg, "N"))
    count = int(_get(cfg, "samples"))
    n_tel = int(_get(cfg, "telescoping_n"))
    samples = pot.default_sample_points(m, count)
    max_residual = pot.verify_cohomology(G, m, N, samples)
    K = [tuple(comp) for comp in cfg.get("K", _standard_k(m))]
    sn = pot.verify_snbound(G, m, N, K, n_tel, sample_points=samples)
    _write_json(out, "cohomology", cfg, {
        "window": N,
        "max_residual": max_residual,
        "telescoping_n": n_tel,
        "telescoping_residual": sn.telescoping_residual,
        "snbound_lhs": sn.lhs,
        "snbound_bound": sn.bound,
        "snbound_holds": bool(sn.lhs <= sn.bound),
        "samples_used": sn.samples_used,
        "samples_filtered": sn.samples_filtered,
    })


COMMANDS = {
    "tree_pressure": cmd_tree_pressure,
    "compare": cmd_compare,
    "exceptional": cmd_exceptional,
    "normality": cmd_normality,
    "hyperbolicity": cmd_hyperbolicity,
    "cohomology": cmd_cohomology,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="treepressure",
        description="Batch experiments on tree pressure for interval maps.",
    )
    parser.add_argument("--command", required=True, choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to JSON config")
    parser.add_argument("--out", required=True, help="output CSV/JSON path")
    parser.add_argument("--mode", choices=["serial", "parallel"], default="serial")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else 0

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    except (OSError, json.JSONDecodeError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    handler = COMMANDS[args.command]
    try:
        handler(cfg, args.out, args.mode)
    except TreePressureError as e:
        # value-validation failures are config errors; caps, escapes and
        # solver failures are runtime errors
        if isinstance(e, ValueError):
            print(f"config error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, ValueError, KeyError, TypeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())
