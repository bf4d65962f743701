"""Command-line entry point ``hardy-kernels``.

Exit codes: 0 success, 1 domain or configuration error (also unknown commands),
2 numeric failure, 3 an audit returned FAIL.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import estimate_audit, spectral
from .duhamel import perturbed_kernel_1d
from .errors import ConfigError, DomainError, FormatError, NumericError
from .hardy_map import HardyCoupling, delta_of_kappa, kappa_of_delta, kappa_star
from .kernel_engine import RadialGrid, heat_table
from .levy_models import LevyModel, check_profile_conditions
from .report import FAIL, PASS, AuditReport
from .storage import export_csv, read_reports, read_table, write_report, write_table

__all__ = ["RunConfig", "load_config", "config_from_dict", "run_command", "main"]

MAX_T = 4.0
MAX_N = 2048
CACHE_ENV = "HARDY_KERNELS_CACHE"
SUITES = ("all", "kernels", "duhamel", "spectral", "envelopes")


@dataclass
class RunConfig:
    """Validated run configuration.

    ``r_min`` and ``r_max`` default to ``None``, meaning the default of the command.
    """

    model: LevyModel
    coupling: HardyCoupling | None = None
    N: int = 256
    r_min: float | None = None
    r_max: float | None = None
    M: int = 64
    T: float = 1.0
    tol: float = 1e-3
    n_terms: int = 200
    nodes: int = 32
    out: str | None = None
    suite: str = "all"
    workers: int = 1
    unsafe_large: bool = False

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out["model"] = self.model.to_dict()
        out["coupling"] = None if self.coupling is None else self.coupling.to_dict()
        return out

    def digest(self) -> str:
        """Stable hash of the numeric settings, used as the cache key."""
        d = self.to_dict()
        for key in ("out", "suite", "workers", "unsafe_large"):
            d.pop(key)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)} | {"kappa", "delta"}


def config_from_dict(data: dict) -> RunConfig:
    """Validate a raw mapping and derive the coupling.

    Raises
    ------
    ConfigError
        Unknown or malformed fields, inconsistent ``kappa``/``delta``, or a guard violation.
    DomainError
        ``kappa`` above the critical coupling, or an invalid model.
    """
    data = {k: v for k, v in data.items() if v is not None}
    unknown = sorted(set(data) - _FIELDS - {"coupling"})
    if unknown:
        raise ConfigError(f"unknown configuration fields: {unknown}")
    if "model" not in data:
        raise ConfigError("missing required field: ['model']")
    model_raw = data.pop("model")
    if isinstance(model_raw, str):
        try:
            model_raw = json.loads(model_raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model is not valid JSON: {exc}") from exc
    if not isinstance(model_raw, dict) or "d" not in model_raw or "alpha" not in model_raw:
        raise ConfigError("model must be an object with at least 'd' and 'alpha'")
    model = LevyModel.from_dict(model_raw)

    nested = data.pop("coupling", None) or {}
    if not isinstance(nested, dict):
        raise ConfigError("coupling must be an object")
    kappa = data.pop("kappa", nested.get("kappa"))
    delta = data.pop("delta", nested.get("delta"))
    coupling = _coupling(model.d, model.alpha, kappa, delta)

    kw = {}
    bad = []
    casts = {"N": int, "M": int, "n_terms": int, "nodes": int, "workers": int, "T": float, "tol": float,
             "r_min": float, "r_max": float, "out": str, "suite": str, "unsafe_large": bool}
    for key, value in data.items():
        try:
            kw[key] = casts[key](value)
        except (TypeError, ValueError):
            bad.append(key)
    if bad:
        raise ConfigError(f"malformed configuration fields: {sorted(bad)}")
    cfg = RunConfig(model=model, coupling=coupling, **kw)
    _validate(cfg)
    return cfg


def _coupling(d: int, alpha: float, kappa, delta) -> HardyCoupling | None:
    if kappa is None and delta is None:
        return None
    if kappa is not None:
        kappa = float(kappa)
        if kappa < 0 or kappa > kappa_star(d, alpha) * (1 + 1e-12):
            raise DomainError(f"kappa={kappa} outside [0, kappa*={kappa_star(d, alpha):.12g}]")
    if delta is not None and kappa is not None:
        if not math.isclose(delta_of_kappa(d, alpha, kappa), float(delta), rel_tol=1e-8, abs_tol=1e-10):
            raise ConfigError(f"inconsistent fields: ['kappa', 'delta'] (kappa={kappa} gives "
                              f"delta={delta_of_kappa(d, alpha, kappa):.12g}, not {delta})")
    if kappa is not None:
        return HardyCoupling.from_kappa(d, alpha, kappa)
    return HardyCoupling.from_delta(d, alpha, float(delta))


def _validate(cfg: RunConfig) -> None:
    bad = []
    if cfg.N < 8:
        bad.append("N")
    if cfg.M < 1:
        bad.append("M")
    if not cfg.T > 0:
        bad.append("T")
    if not cfg.tol > 0:
        bad.append("tol")
    if cfg.n_terms < 1:
        bad.append("n_terms")
    if cfg.nodes < 2:
        bad.append("nodes")
    if cfg.workers < 1:
        bad.append("workers")
    if cfg.suite not in SUITES:
        bad.append("suite")
    if cfg.r_min is not None and cfg.r_max is not None and not 0 < cfg.r_min < cfg.r_max:
        bad.extend(["r_min", "r_max"])
    if bad:
        raise ConfigError(f"invalid configuration fields: {bad}")
    if not cfg.unsafe_large and (cfg.T > MAX_T or cfg.N > MAX_N):
        raise ConfigError(f"T <= {MAX_T} and N <= {MAX_N} unless --unsafe-large is given "
                          f"(got T={cfg.T}, N={cfg.N})")


def load_config(path) -> RunConfig:
    """Read a JSON configuration file and validate it with :func:`config_from_dict`."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"configuration file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(data)


# ---------------------------------------------------------------------------------
# commands


def _radii(cfg: RunConfig, r_min: float, r_max: float) -> np.ndarray:
    return np.geomspace(cfg.r_min or r_min, cfg.r_max or r_max, cfg.N)


def _require_coupling(cfg: RunConfig) -> HardyCoupling:
    if cfg.coupling is None:
        raise ConfigError("missing required field: ['kappa' or 'delta']")
    return cfg.coupling


def _cache_path(kind: str, cfg: RunConfig) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    Path(root).mkdir(parents=True, exist_ok=True)
    return Path(root) / f"{kind}-{cfg.digest()}.hkt"


def _cached(kind: str, cfg: RunConfig, build):
    path = _cache_path(kind, cfg)
    if path is not None and path.exists():
        try:
            return read_table(path)
        except FormatError:
            pass
    table = build()
    if path is not None:
        write_table(table, path)
    return table


def _emit_table(table, cfg: RunConfig) -> None:
    if cfg.out:
        out = Path(cfg.out)
        if out.suffix == ".csv":
            rows = export_csv(table, out)
            print(f"wrote {rows} rows to {out}")
        else:
            write_table(table, out)
            print(f"wrote {out}")


def cmd_map(args) -> int:
    if (args.kappa is None) == (args.delta is None):
        raise ConfigError("give exactly one of --kappa or --delta")
    ks = kappa_star(args.d, args.alpha)
    if args.kappa is not None:
        kappa, delta = args.kappa, delta_of_kappa(args.d, args.alpha, args.kappa)
    else:
        kappa, delta = kappa_of_delta(args.d, args.alpha, args.delta), args.delta
    print(f"kappa={kappa:.12g} delta={delta:.12g} kappa_star={ks:.12g}")
    return 0


def cmd_kernel(cfg: RunConfig) -> int:
    grid = RadialGrid.log(n=cfg.N, r_min=cfg.r_min or 1e-3, r_max=cfg.r_max or 1e2, m=cfg.M,
                          t_min=min(1e-2, cfg.T), t_max=cfg.T)
    table = _cached("heat", cfg, lambda: heat_table(cfg.model, grid))
    print(f"heat table {table.values.shape} for {cfg.model.kind} d={cfg.model.d} alpha={cfg.model.alpha}")
    _emit_table(table, cfg)
    return 0


def cmd_perturb(cfg: RunConfig) -> int:
    coupling = _require_coupling(cfg)
    radii = _radii(cfg, 1e-3, 1e2)
    table = _cached("perturbed", cfg, lambda: perturbed_kernel_1d(
        cfg.model, coupling, radii=radii, T=cfg.T, k_steps=cfg.M, n_terms=cfg.n_terms, tol=cfg.tol))
    print(f"perturbed table {table.values.shape} kappa={coupling.kappa:.6g} delta={coupling.delta:.6g}")
    _emit_table(table, cfg)
    return 0


def _solve(cfg: RunConfig) -> spectral.GroundState:
    coupling = _require_coupling(cfg)
    radii = spectral.default_radii(cfg.N, cfg.r_min or 1e-5, cfg.r_max or 40.0)
    return spectral.ground_state_solve(cfg.model, coupling, radii=radii)


def cmd_solve(cfg: RunConfig) -> int:
    gs = _solve(cfg)
    print(f"lambda_star={gs.lambda_star:.10g} E={gs.E:.10g} E_m={gs.E_m:.10g}")
    if cfg.out:
        Path(cfg.out).write_text(gs.to_json())
        print(f"wrote {cfg.out}")
    return 0


def _kernel_tasks(cfg: RunConfig) -> list:
    return [partial(check_profile_conditions, cfg.model),
            partial(estimate_audit.kernel_comparability_audit, cfg.model, min(cfg.T, MAX_T)),
            partial(estimate_audit.subconvolution_audit, cfg.model)]


def _duhamel_tasks(cfg: RunConfig) -> list:
    model, c = cfg.model, _require_coupling(cfg)
    if model.d != 1:
        raise DomainError("the duhamel suite runs in d = 1")
    n = min(cfg.N, 256)
    tasks = [partial(estimate_audit.hardy_upper_audit, model.alpha, 1, model, c, T=cfg.T, n=n)]
    if model.kind == "stable":
        tasks.append(partial(estimate_audit.hardy_lower_audit, model.alpha, 1, c, T=cfg.T, n=min(n, 128)))
    else:
        tasks.append(partial(estimate_audit.domination_audit, model.alpha, 1, c, n=min(n, 128), m=model.m))
    return tasks


def run_suite(cfg: RunConfig, suite: str) -> list[AuditReport]:
    """Run the audits of ``suite`` and return their reports."""
    tasks = []
    if suite in ("all", "kernels"):
        tasks += _kernel_tasks(cfg)
    if suite in ("all", "duhamel") and (suite == "duhamel" or cfg.model.d == 1):
        tasks += _duhamel_tasks(cfg)
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_call, tasks))
    else:
        reports = [task() for task in tasks]
    wants_state = suite in ("spectral", "envelopes") or (suite == "all" and cfg.model.kind == "relativistic"
                                                         and cfg.coupling is not None and cfg.model.d == 3)
    if wants_state:
        gs = _solve(cfg)
        if suite in ("all", "spectral"):
            reports.append(_form_report(gs))
            if cfg.model.d == 3 and cfg.model.alpha == 1.0:
                reports.append(spectral.herbst_check(gs))
        if suite in ("all", "envelopes"):
            reports.append(estimate_audit.bound_state_envelope_audit(gs))
    return reports


def _form_report(gs: spectral.GroundState, budget: float = 0.05) -> AuditReport:
    res = spectral.schrodinger_form_check(gs)
    return AuditReport(
        "ground_state_form", params={**gs.model.to_dict(), **gs.coupling.to_dict()},
        grid={"n": int(gs.phi.radii.size)}, constants={"E": gs.E, "lambda_star": gs.lambda_star},
        residuals=res, verdict=PASS if res["relative_error"] <= budget else FAIL, refinement_stable=True)


def _call(task):
    return task()


def cmd_audit(cfg: RunConfig) -> int:
    reports = run_suite(cfg, cfg.suite)
    for rep in reports:
        print(f"{rep.verdict:12s} {rep.estimate_id}")
    if cfg.out:
        write_report(reports, cfg.out)
        print(f"wrote {cfg.out}")
    return 3 if any(r.verdict == FAIL for r in reports) else 0


def cmd_report(args) -> int:
    reports = read_reports(args.path)
    for rep in reports:
        consts = " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in rep.constants.items())
        print(f"{rep.verdict:12s} {rep.estimate_id:28s} {consts}")
    return 3 if any(r.verdict == FAIL for r in reports) else 0


# ---------------------------------------------------------------------------------
# argument parsing


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file; flags override its fields")
    p.add_argument("--model", help='model as JSON, e.g. \'{"d": 3, "alpha": 1, "kind": "stable"}\'')
    p.add_argument("--kappa", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--n-terms", dest="n_terms", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--unsafe-large", dest="unsafe_large", action="store_true", default=None,
                   help=f"lift the guards T <= {MAX_T} and N <= {MAX_N}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardy-kernels", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")
    p = sub.add_parser("map", help="convert between kappa and delta")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--kappa", type=float)
    p.add_argument("--delta", type=float)
    for name, text in [("kernel", "tabulate the free heat kernel"),
                       ("perturb", "tabulate the Hardy-perturbed kernel (d = 1)"),
                       ("solve", "solve for the ground state"),
                       ("audit", "run an audit suite")]:
        p = sub.add_parser(name, help=text)
        _add_run_options(p)
        if name == "audit":
            p.add_argument("--suite", choices=SUITES)
    p = sub.add_parser("report", help="summarize a saved report file")
    p.add_argument("path")
    return parser


_DEFAULT_MODEL = {"d": 3, "alpha": 1.0, "kind": "stable"}


def _config_from_args(args) -> RunConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"configuration file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    for key in ("model", "kappa", "delta", "N", "r_min", "r_max", "M", "T", "tol", "n_terms", "nodes",
                "workers", "out", "unsafe_large", "suite"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    data.setdefault("model", _DEFAULT_MODEL)
    return config_from_dict(data)


_COMMANDS = {"kernel": cmd_kernel, "perturb": cmd_perturb, "solve": cmd_solve, "audit": cmd_audit}


def run_command(argv) -> int:
    """Parse ``argv`` and run the command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "map":
            return cmd_map(args)
        if args.command == "report":
            return cmd_report(args)
        return _COMMANDS[args.command](_config_from_args(args))
    except (ConfigError, DomainError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
