"""Benchmark harness: ``saamg run <config>`` and ``saamg sweep <config>``."""
import argparse
import csv
import dataclasses
import itertools
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import NegativeEigenvalueError, SetupError
from .hierarchy import SetupConfig, setup
from .krylov import KrylovConfig, solve
from .problems import ProblemSpec, assemble, mesh_random_cube, mesh_stretched_cube
from .prolongator import VARIANTS, SmootherConfig
from .sparse import read_matrix_market, spmv

REPORT_SCHEMA = "saamg-report/1"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SETUP_FAILURE = 2
EXIT_NOT_CONVERGED = 3

_PROBLEM_KEYS = {
    "random_cube": {"type", "n", "seed"},
    "stretched_cube": {"type", "n", "kx", "ky", "kz", "sigma"},
    "matrix_market": {"type", "path", "coords_path", "rhs_path"},
}
_TOP_KEYS = {
    "problem", "theta", "strength_source", "variants", "krylov", "coarse_size",
    "max_levels", "tau", "smoother", "power_iters", "seed", "variant_grid",
}
_SMOOTHER_KEYS = {"type", "degree", "sweeps", "ratio", "boost", "omega"}
_KRYLOV_KEYS = {"method", "rel_tol", "max_iters", "restart"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: dict
    theta: float = 0.025
    strength_source: str = "distance_laplacian"
    variants: tuple = ()
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    coarse_size: int = 1000
    max_levels: int = 10
    tau: float = 1.1
    smoother: dict = field(default_factory=dict)
    power_iters: int = 10
    seed: int = 42
    variant_grid: list = None

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if "problem" not in data:
            raise ConfigError("missing 'problem' section")
        problem = dict(data["problem"])
        ptype = problem.get("type")
        if ptype not in _PROBLEM_KEYS:
            raise ConfigError(f"unknown problem type {ptype!r}")
        bad = set(problem) - _PROBLEM_KEYS[ptype]
        if bad:
            raise ConfigError(f"unknown keys for {ptype}: {sorted(bad)}")
        kw = {k: v for k, v in data.items() if k not in ("problem", "krylov", "variants")}
        krylov = dict(data.get("krylov") or {})
        bad = set(krylov) - _KRYLOV_KEYS
        if bad:
            raise ConfigError(f"unknown krylov keys: {sorted(bad)}")
        smoother = dict(data.get("smoother") or {})
        bad = set(smoother) - _SMOOTHER_KEYS
        if bad:
            raise ConfigError(f"unknown smoother keys: {sorted(bad)}")
        kw["smoother"] = smoother
        variants = _parse_variants(data.get("variants", ()))
        grid = data.get("variant_grid")
        if grid is not None:
            grid = [_parse_variants(v) for v in grid]
        kw["variant_grid"] = grid
        try:
            cfg = cls(problem=problem, variants=variants, krylov=KrylovConfig(**krylov), **kw)
            cfg.setup_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        # file paths inside the config are relative to the config itself
        if isinstance(data, dict) and isinstance(data.get("problem"), dict):
            base = os.path.dirname(os.path.abspath(path))
            for key in ("path", "coords_path", "rhs_path"):
                value = data["problem"].get(key)
                if isinstance(value, str) and not os.path.isabs(value):
                    data["problem"][key] = os.path.join(base, value)
        return cls.from_dict(data)

    def setup_config(self, variants=None):
        variants = self.variants if variants is None else variants
        sm = self.smoother
        pcfg = SmootherConfig.from_variants(
            variants, tau=self.tau, power_iters=self.power_iters, seed=self.seed
        )
        return SetupConfig(
            theta=float(self.theta),
            strength_source=self.strength_source,
            coarse_size=int(self.coarse_size),
            max_levels=int(self.max_levels),
            smoother=sm.get("type", "chebyshev"),
            cheby_degree=int(sm.get("degree", 2)),
            cheby_sweeps=int(sm.get("sweeps", 1)),
            cheby_ratio=float(sm.get("ratio", 10.0)),
            cheby_boost=float(sm.get("boost", 1.1)),
            jacobi_omega=float(sm.get("omega", 2.0 / 3.0)),
            prolongator=pcfg,
        )

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["variants"] = list(self.variants)
        if out["variant_grid"] is None:
            del out["variant_grid"]
        else:
            out["variant_grid"] = [list(v) for v in out["variant_grid"]]
        return out


def _parse_variants(value):
    if isinstance(value, str):
        value = [v for v in value.replace("+", ",").split(",") if v.strip()]
    names = tuple(str(v).strip() for v in value)
    unknown = set(names) - set(VARIANTS)
    if unknown:
        raise ConfigError(f"unknown variants {sorted(unknown)}; choose from {list(VARIANTS)}")
    return tuple(v for v in VARIANTS if v in names)


def all_variant_combinations():
    """The 16 on/off combinations, traditional first."""
    combos = []
    for flags in itertools.product((False, True), repeat=len(VARIANTS)):
        combos.append(tuple(v for v, on in zip(VARIANTS, flags) if on))
    return combos


# ---------------------------------------------------------------- running

def build_problem(problem):
    ptype = problem["type"]
    if ptype == "random_cube":
        mesh = mesh_random_cube(int(problem.get("n", 20)), int(problem.get("seed", 0)))
        return assemble(mesh, ProblemSpec("poisson"))
    if ptype == "stretched_cube":
        n = int(problem.get("n", 20))
        mesh = mesh_stretched_cube(n, problem.get("kx", 1), problem.get("ky", 1), problem.get("kz", 1))
        sigma = problem.get("sigma")
        spec = ProblemSpec("reaction_diffusion", float(sigma)) if sigma else ProblemSpec("poisson")
        return assemble(mesh, spec)
    A = read_matrix_market(problem["path"])
    coords = None
    if problem.get("coords_path"):
        coords = np.loadtxt(problem["coords_path"], ndmin=2)
    if problem.get("rhs_path"):
        b = np.loadtxt(problem["rhs_path"], ndmin=1)
    else:
        b = spmv(A, np.ones(A.ncols))
    return A, b, coords


def execute(cfg, variants=None, system=None):
    """Build, set up and solve one configuration; returns ``(report, exit_code)``."""
    variants = cfg.variants if variants is None else variants
    A, b, coords = build_problem(cfg.problem) if system is None else system
    report = {
        "schema": REPORT_SCHEMA,
        "config": {**cfg.to_dict(), "variants": list(variants)},
        "variants": list(variants),
        "n": A.nrows,
        "nnz": A.nnz,
        "iterations": None,
        "converged": False,
        "operator_complexity": None,
        "skipped_lumping_rows": None,
        "failure": None,
        "levels": [],
        "residual_history": [],
    }
    scfg = cfg.setup_config(variants)
    try:
        h = setup(A, coords if scfg.strength_source == "distance_laplacian" else None, scfg)
    except NegativeEigenvalueError as exc:
        report["failure"] = {"kind": "negative_eigenvalue", "level": exc.level,
                             "value": exc.value, "message": str(exc)}
        return report, EXIT_SETUP_FAILURE
    except SetupError as exc:
        report["failure"] = {"kind": "setup", "level": exc.level, "message": str(exc)}
        return report, EXIT_SETUP_FAILURE
    res = solve(A, b, h, cfg.krylov)
    report.update(
        iterations=res.iterations,
        converged=res.converged,
        operator_complexity=h.operator_complexity,
        skipped_lumping_rows=res.skipped_lumping_rows,
        levels=h.summary()["levels"],
        residual_history=[float(v) for v in res.residual_history],
    )
    if not res.converged:
        report["failure"] = {"kind": "not_converged", "message": res.failure}
        return report, EXIT_NOT_CONVERGED
    return report, EXIT_OK


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def dump_report(report, out):
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ------------------------------------------------------------------ sweeping

def parse_seed_range(text):
    """``"a..b"`` (inclusive) or a comma list."""
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def load_grid(path):
    """Problem/parameter overrides from a YAML grid file.

    Either ``cases: [{...}, ...]`` or a mapping of parameter to list of
    values, expanded as a Cartesian product.
    """
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if isinstance(data, dict) and "cases" in data:
        return [dict(c) for c in data["cases"]]
    if not isinstance(data, dict):
        raise ConfigError("grid file must be a mapping")
    keys = sorted(data)
    values = [v if isinstance(v, list) else [v] for v in (data[k] for k in keys)]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def _apply_override(cfg, override):
    data = cfg.to_dict()
    data["krylov"] = dataclasses.asdict(cfg.krylov)
    for key, value in override.items():
        if key in _TOP_KEYS and key != "problem":
            data[key] = value
        else:
            data["problem"][key] = value
    return RunConfig.from_dict(data)


def sweep(cfg, overrides, combos=None):
    """Run every override for every variant combination.

    Returns ``(summary_rows, per_run_rows)``; setup failures and
    non-converged runs are excluded from the means and counted instead.
    """
    combos = combos or cfg.variant_grid or all_variant_combinations()
    runs = []
    for override in overrides:
        case = _apply_override(cfg, override)
        system = build_problem(case.problem)
        for combo in combos:
            report, code = execute(case, combo, system)
            runs.append({
                "variants": "+".join(combo) or "traditional",
                **{k: override[k] for k in sorted(override)},
                "exit_code": code,
                "iterations": report["iterations"] if code == EXIT_OK else "",
                "operator_complexity": report["operator_complexity"] if code != EXIT_SETUP_FAILURE else "",
            })
    summary = []
    for combo in combos:
        name = "+".join(combo) or "traditional"
        rows = [r for r in runs if r["variants"] == name]
        ok = [r for r in rows if r["exit_code"] == EXIT_OK]
        summary.append({
            "variants": name,
            "runs": len(rows),
            "setup_failures": sum(r["exit_code"] == EXIT_SETUP_FAILURE for r in rows),
            "not_converged": sum(r["exit_code"] == EXIT_NOT_CONVERGED for r in rows),
            "mean_iterations": float(np.mean([r["iterations"] for r in ok])) if ok else "",
            "mean_complexity": float(np.mean([r["operator_complexity"] for r in ok])) if ok else "",
        })
    return summary, runs


def write_csv(rows, path):
    fieldnames = list(rows[0]) if rows else []
    for r in rows:
        for k in r:
            if k not in fieldnames:
                fieldnames.append(k)
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            fh.close()


# ----------------------------------------------------------------- commands

def main(argv=None):
    parser = argparse.ArgumentParser(prog="saamg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one configured system")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="write the JSON report here instead of stdout")

    p_sweep = sub.add_parser("sweep", help="run variant combinations over seeds or a grid")
    p_sweep.add_argument("config")
    group = p_sweep.add_mutually_exclusive_group()
    group.add_argument("--seeds", help="seed range a..b (inclusive) or comma list")
    group.add_argument("--grid", help="YAML file of parameter overrides")
    p_sweep.add_argument("--variants", action="append",
                         help="restrict to this combination (repeatable), e.g. OneNorm+Sprsfy; "
                              "'traditional' for none")
    p_sweep.add_argument("--out", help="summary CSV path (default stdout)")
    p_sweep.add_argument("--per-run", help="also write one CSV row per run here")

    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.command == "run":
            report, code = execute(cfg)
            dump_report(report, args.out)
            return code
        if args.seeds:
            overrides = [{"seed": s} for s in parse_seed_range(args.seeds)]
        elif args.grid:
            overrides = load_grid(args.grid)
        else:
            overrides = [{}]
        combos = None
        if args.variants:
            combos = [() if v == "traditional" else _parse_variants(v) for v in args.variants]
        summary, runs = sweep(cfg, overrides, combos)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"saamg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_csv(summary, args.out)
    if args.per_run:
        write_csv(runs, args.per_run)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
