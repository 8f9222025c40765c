"""Command-line harness: run named checks over a declarative sweep config and
write JSON or CSV reports.

Exit status of ``run``: 0 when no cell is violated and none failed, 1 when at
least one verdict is ``violated``, 2 for config or usage errors, 3 when some
cells raised but none was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from . import ineq
from .dist import Distribution1D, DomainError, from_spec

SCHEMA_VERSION = 1
CSV_COLUMNS = ("check", "inputs", "lhs", "rhs", "gap", "err", "tol", "verdict", "message")
EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG, EXIT_CELL_ERROR = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CheckSpec:
    """How a check consumes a sweep cell.

    ``axes`` names the sweep dimensions beyond the pair: ``lam``, ``r``
    (Renyi order) or ``pqr`` (Young exponents). ``group`` checks take a
    coefficient row and a list of distributions instead of a pair.
    """

    func: Callable
    axes: tuple[str, ...]
    tol: float | None
    summary: str
    contract: str
    group: bool = False


CHECKS: dict[str, CheckSpec] = {
    "epi_shannon": CheckSpec(
        ineq.epi_shannon, (), ineq.GRID_TOL,
        "Shannon's entropy-power inequality",
        "N(X+Y) >= N(X) + N(Y); gap = N(X+Y) - N(X) - N(Y)"),
    "epi_lieb": CheckSpec(
        ineq.epi_lieb, ("lam",), ineq.GRID_TOL,
        "Lieb's entropy form of the EPI",
        "h(sqrt(l)X + sqrt(1-l)Y) >= l h(X) + (1-l) h(Y); equality iff X, Y Gaussian "
        "with equal power"),
    "epi_power_concavity": CheckSpec(
        ineq.epi_power_concavity, ("lam",), ineq.GRID_TOL,
        "concavity form of the EPI in entropy powers",
        "N(sqrt(l)X + sqrt(1-l)Y) >= l N(X) + (1-l) N(Y)"),
    "reverse_epi": CheckSpec(
        ineq.reverse_epi, ("lam",), ineq.GRID_TOL,
        "reverse EPI for the power-preserving rotation",
        "h(U | V) <= l h(X) + (1-l) h(Y), U = sqrt(l)X + sqrt(1-l)Y, V = -sqrt(1-l)X + sqrt(l)Y; "
        "gap = rhs - lhs"),
    "deficit_sandwich": CheckSpec(
        ineq.deficit_sandwich, ("lam",), ineq.GRID_TOL,
        "EPI deficit bounded by the mutual information of the rotated pair",
        "0 <= h(U) - l h(X) - (1-l) h(Y) <= I(U; V); two steps, both gaps >= 0"),
    "proof_chain": CheckSpec(
        ineq.proof_chain, ("lam",), ineq.GRID_TOL,
        "transport proof of the EPI, step by step",
        "change-of-variable identities, conditioning and Jensen steps, vanishing Gaussian "
        "line; step gaps add up to the epi_lieb gap within 1e-4"),
    "equality_diagnostics": CheckSpec(
        ineq.equality_diagnostics, ("lam",), None,
        "equality case probe",
        "equality regime iff T' and U' are constant (deviation < 1e-6) and the epi_lieb "
        "gap is below 1e-6"),
    "reverse_equivalence": CheckSpec(
        ineq.reverse_equivalence, ("lam",), ineq.IDENTITY_TOL,
        "reverse EPI as the forward EPI with the roles of X and Y permuted",
        "reverse_epi gap = h(V) - (1-l) h(X) - l h(Y); identity"),
    "renyi_epi": CheckSpec(
        ineq.renyi_epi, ("lam", "r"), ineq.GRID_TOL,
        "Renyi entropy-power inequality",
        "h_r(U) - l h_p(X) - (1-l) h_q(Y) >= same expression for unit Gaussians, "
        "1/p' = l/r', 1/q' = (1-l)/r'"),
    "young_check": CheckSpec(
        ineq.young_check, ("pqr",), ineq.GRID_TOL,
        "sharp Young convolution inequality (reversed for exponents below 1)",
        "C_r ||f*g||_r <= C_p ||f||_p C_q ||g||_q with 1/p + 1/q = 1 + 1/r, "
        "C_m = sqrt(m^(1/m) / |m'|^(1/m'))"),
    "zamir_feder": CheckSpec(
        ineq.zamir_feder, (), None,
        "generalized EPI for linear transformations",
        "h(A X) >= sum_ij a_ij^2 h(X_j), A with orthonormal rows; several rows only for "
        "Gaussian components", group=True),
}


@dataclass(frozen=True)
class Group:
    dists: tuple[str, ...]
    coeffs: tuple  # one row (floats) or several rows (tuples)


@dataclass(frozen=True)
class ExperimentConfig:
    checks: tuple[str, ...]
    distributions: dict[str, Distribution1D]
    pairs: tuple[tuple[str, str], ...] = ()
    lambdas: tuple[float, ...] = (0.5,)
    exponents: tuple[tuple[float, float, float], ...] = ()
    renyi_orders: tuple[float, ...] = ()
    groups: tuple[Group, ...] = ()
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)
    output: str | None = None
    format: str = "json"

    def echo(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "checks": list(self.checks),
            "distributions": {k: v.to_spec() for k, v in self.distributions.items()},
            "pairs": [list(p) for p in self.pairs],
            "lambdas": list(self.lambdas),
            "exponents": [list(e) for e in self.exponents],
            "renyi_orders": list(self.renyi_orders),
            "groups": [{"dists": list(g.dists), "coeffs": _jsonable(g.coeffs)} for g in self.groups],
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if hasattr(v, "value") and not isinstance(v, (int, float, str)):
        return v.value
    return v


# ------------------------------------------------------------------ parsing

def _field(doc: dict, key: str, kind, default=None, required=False):
    if key not in doc:
        if required:
            raise ConfigError(f"missing required field '{key}'")
        return default
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"field '{key}' has type {type(val).__name__}")
    return val


def _real(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _random_rows(rng: np.random.Generator, rows: int, cols: int) -> tuple:
    """Random matrix with orthonormal rows (a unit vector when rows == 1)."""
    q, _ = np.linalg.qr(rng.standard_normal((cols, rows)))
    A = q.T
    return tuple(float(v) for v in A[0]) if rows == 1 else tuple(tuple(map(float, r)) for r in A)


def parse_config(doc, seed_override: int | None = None) -> ExperimentConfig:
    """Validate a loaded YAML document and build an :class:`ExperimentConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    known = {"schema", "checks", "distributions", "pairs", "lambdas", "exponents",
             "renyi_orders", "groups", "seed", "tolerances", "output"}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError(f"unknown top-level field(s): {extra}")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema' must be {SCHEMA_VERSION}, got {doc.get('schema')!r}")

    checks = _field(doc, "checks", list, required=True)
    for i, name in enumerate(checks):
        if name not in CHECKS:
            raise ConfigError(f"checks[{i}]: unknown check {name!r}; known: {sorted(CHECKS)}")

    dists = {}
    for name, spec in (_field(doc, "distributions", dict, {}) or {}).items():
        if not isinstance(spec, dict):
            raise ConfigError(f"distributions.{name}: expected a mapping")
        try:
            dists[str(name)] = from_spec(spec)
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"distributions.{name}: {exc}") from exc

    def resolve(n, where):
        if n not in dists:
            raise ConfigError(f"{where}: unknown distribution {n!r}")
        return str(n)

    raw_pairs = _field(doc, "pairs", (str, list, dict), "all")
    if raw_pairs == "all":
        pairs = tuple(itertools.product(dists, repeat=2))
    elif isinstance(raw_pairs, dict):
        if set(raw_pairs) != {"cross"} or not isinstance(raw_pairs["cross"], list):
            raise ConfigError("field 'pairs' as a mapping takes only 'cross: [names]'")
        names = [resolve(n, "pairs.cross") for n in raw_pairs["cross"]]
        pairs = tuple(itertools.product(names, repeat=2))
    elif isinstance(raw_pairs, list):
        pairs = []
        for i, p in enumerate(raw_pairs):
            if not (isinstance(p, list) and len(p) == 2):
                raise ConfigError(f"pairs[{i}]: expected [X, Y]")
            pairs.append((resolve(p[0], f"pairs[{i}]"), resolve(p[1], f"pairs[{i}]")))
        pairs = tuple(pairs)
    else:
        raise ConfigError("field 'pairs' must be 'all', {cross: [...]} or a list of [X, Y]")

    lambdas = tuple(_real(v, f"lambdas[{i}]") for i, v in
                    enumerate(_field(doc, "lambdas", list, [0.5])))
    for i, lam in enumerate(lambdas):
        if not 0 < lam < 1:
            raise ConfigError(f"lambdas[{i}]: {lam} not in (0, 1)")

    exponents = []
    for i, e in enumerate(_field(doc, "exponents", list, []) or []):
        if not (isinstance(e, list) and len(e) == 3):
            raise ConfigError(f"exponents[{i}]: expected [p, q, r]")
        exponents.append(tuple(_real(v, f"exponents[{i}]") for v in e))
    orders = tuple(_real(v, f"renyi_orders[{i}]") for i, v in
                   enumerate(_field(doc, "renyi_orders", list, []) or []))

    seed = int(_field(doc, "seed", int, 0)) if seed_override is None else int(seed_override)
    rng = np.random.default_rng(seed)
    groups = []
    for i, g in enumerate(_field(doc, "groups", list, []) or []):
        where = f"groups[{i}]"
        if not isinstance(g, dict) or "dists" not in g:
            raise ConfigError(f"{where}: expected a mapping with 'dists'")
        names = tuple(resolve(n, where) for n in g["dists"])
        if "coeffs" in g:
            c = g["coeffs"]
            if c and isinstance(c[0], list):
                coeffs = tuple(tuple(_real(v, where) for v in row) for row in c)
            else:
                coeffs = tuple(_real(v, where) for v in c)
            groups.append(Group(names, coeffs))
        elif "random" in g:
            count, rows = int(g["random"]), int(g.get("rows", 1))
            if not 1 <= rows <= len(names):
                raise ConfigError(f"{where}: rows must lie in 1..{len(names)}")
            groups.extend(Group(names, _random_rows(rng, rows, len(names))) for _ in range(count))
        else:
            raise ConfigError(f"{where}: needs 'coeffs' or 'random'")

    tols = {}
    for k, v in (_field(doc, "tolerances", dict, {}) or {}).items():
        if k not in CHECKS:
            raise ConfigError(f"tolerances.{k}: unknown check")
        if k == "equality_diagnostics":
            raise ConfigError("tolerances.equality_diagnostics: thresholds are fixed")
        tols[k] = _real(v, f"tolerances.{k}")

    out = _field(doc, "output", dict, {}) or {}
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output.format: expected json or csv, got {fmt!r}")

    for name in checks:
        spec = CHECKS[name]
        if spec.group and not groups:
            raise ConfigError(f"check {name!r} needs 'groups'")
        if not spec.group and not pairs:
            raise ConfigError(f"check {name!r} needs at least one pair")
        if "pqr" in spec.axes and not exponents:
            raise ConfigError(f"check {name!r} needs 'exponents'")
        if "r" in spec.axes and not orders:
            raise ConfigError(f"check {name!r} needs 'renyi_orders'")

    return ExperimentConfig(tuple(checks), dists, pairs, lambdas, tuple(exponents), orders,
                            tuple(groups), seed, tols, out.get("path"), fmt)


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from exc
    return parse_config(doc, seed_override)


# ------------------------------------------------------------------ running

@dataclass(frozen=True)
class Cell:
    check: str
    args: tuple
    inputs: dict


def expand_cells(cfg: ExperimentConfig) -> list[Cell]:
    """Cells in config order: checks, then pairs (or groups), then sweep axes."""
    cells = []
    for name in cfg.checks:
        spec = CHECKS[name]
        if spec.group:
            for g in cfg.groups:
                args = (g.coeffs, tuple(cfg.distributions[n] for n in g.dists))
                cells.append(Cell(name, args, {"dists": list(g.dists), "coeffs": _jsonable(g.coeffs)}))
            continue
        axes = []
        for ax in spec.axes:
            axes.append({"lam": cfg.lambdas, "r": cfg.renyi_orders, "pqr": cfg.exponents}[ax])
        for x, y in cfg.pairs:
            for combo in itertools.product(*axes):
                inputs = {"X": x, "Y": y}
                flat = []
                for ax, v in zip(spec.axes, combo):
                    if ax == "pqr":
                        inputs.update(p=v[0], q=v[1], r=v[2])
                        flat.extend(v)
                    else:
                        inputs[ax] = v
                        flat.append(v)
                cells.append(Cell(name, (cfg.distributions[x], cfg.distributions[y], *flat), inputs))
    return cells


def _tol_for(cfg: ExperimentConfig, name: str, tol_scale: float) -> float | None:
    tol = cfg.tolerances.get(name, CHECKS[name].tol)
    return None if tol is None else tol * tol_scale


def run_cell(cell: Cell, tol: float | None) -> dict:
    spec = CHECKS[cell.check]
    kwargs = {} if tol is None else {"tol": tol}
    try:
        rep = spec.func(*cell.args, **kwargs)
    except Exception as exc:  # per-cell failure record, the run goes on
        return {"check": cell.check, "inputs": cell.inputs, "verdict": "error",
                "error": f"{type(exc).__name__}: {exc}"}
    d = _jsonable(rep.to_dict())
    verdict = d.get("verdict")
    return {"check": cell.check, "inputs": cell.inputs, "verdict": verdict, "result": d}


def run_cells(cfg: ExperimentConfig, workers: int = 1, tol_scale: float = 1.0) -> list[dict]:
    cells = expand_cells(cfg)
    tols = [_tol_for(cfg, c.check, tol_scale) for c in cells]
    if workers <= 1:
        return [run_cell(c, t) for c, t in zip(cells, tols)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves input order whatever the completion order
        return list(pool.map(run_cell, cells, tols))


def summarize(records: list[dict]) -> dict:
    counts: dict[str, int] = {}
    for r in records:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    for k in ("holds", "equality", "violated"):
        counts.setdefault(k, 0)
    return {"cells": len(records), "counts": dict(sorted(counts.items()))}


def exit_status(records: list[dict]) -> int:
    verdicts = {r["verdict"] for r in records}
    if "violated" in verdicts:
        return EXIT_VIOLATED
    if "error" in verdicts:
        return EXIT_CELL_ERROR
    return EXIT_OK


def render_json(cfg: ExperimentConfig, records: list[dict]) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "config_echo": cfg.echo(),
           "reports": records, "summary": summarize(records)}
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _num(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _row(r: dict) -> dict:
    row = {"check": r["check"], "inputs": json.dumps(r["inputs"], separators=(",", ":")),
           "verdict": r["verdict"], "message": r.get("error", "")}
    res = r.get("result", {})
    if res.get("kind") == "chain":
        steps = res["steps"]
        row.update(lhs="", rhs="", gap=_num(res["total_gap"]),
                   err=_num(math.fsum(s["err"] for s in steps)),
                   tol=_num(max(s["tol"] for s in steps)))
    elif res.get("kind") == "diagnostic":
        row.update(lhs=_num(res["dev_T"]), rhs=_num(res["dev_U"]), gap=_num(res["epi_lieb_gap"]),
                   err="", tol="")
    else:
        row.update({k: _num(res.get(k)) for k in ("lhs", "rhs", "gap", "err", "tol")})
    return row


def render_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(_row(r))
    return buf.getvalue()


# --------------------------------------------------------------------- main

def _workers(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("EPI_LAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"EPI_LAB_WORKERS must be an integer, got {env!r}") from None
    return 1


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.seed)
    fmt = args.format or cfg.format
    out = args.out or cfg.output
    records = run_cells(cfg, _workers(args.workers), args.tol_scale)
    text = render_json(cfg, records) if fmt == "json" else render_csv(records)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    s = summarize(records)
    print("summary: " + " ".join(f"{k}={v}" for k, v in s["counts"].items()), file=sys.stderr)
    return exit_status(records)


def cmd_list(args) -> int:
    for name, spec in CHECKS.items():
        print(f"{name:22s} {spec.summary}")
    return EXIT_OK


def cmd_describe(args) -> int:
    spec = CHECKS.get(args.name)
    if spec is None:
        print(f"unknown check {args.name!r}", file=sys.stderr)
        return EXIT_CONFIG
    axes = ", ".join(("X", "Y") + spec.axes) if not spec.group else "A, dists"
    print(f"{args.name}: {spec.summary}")
    print(f"  sweep axes: {axes}")
    print(f"  contract:   {spec.contract}")
    print(f"  default tol: {spec.tol if spec.tol is not None else 'per input'}")
    doc = (spec.func.__doc__ or "").strip()
    if doc:
        print("  " + doc.replace("\n", "\n  "))
    return EXIT_OK


def cmd_selftest(args) -> int:
    here = Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
    if not here.exists():
        print(f"acceptance suite not found at {here}", file=sys.stderr)
        return EXIT_CONFIG
    import pytest
    return int(pytest.main([str(here), "-q", "-s"]))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epi-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the checks of a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--format", choices=("json", "csv"))
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--tol-scale", type=float, default=1.0)
    r.set_defaults(func=cmd_run)
    sub.add_parser("list-checks", help="list check names").set_defaults(func=cmd_list)
    d = sub.add_parser("describe-check", help="print the contract of a check")
    d.add_argument("name")
    d.set_defaults(func=cmd_describe)
    sub.add_parser("selftest", help="run the acceptance suite").set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not getattr(args, "tol_scale", 1.0) > 0:
        print("error: --tol-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
