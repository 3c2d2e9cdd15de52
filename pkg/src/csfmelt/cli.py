"""``csfmelt`` command line: run, sweep, reference, verify.

Exit codes: 0 success, 1 invalid input, 2 solver failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from datetime import datetime, timezone

from . import benchmarks as bm
from .config import RunConfig, load_config
from .errors import InvalidInputError, SolverError
from .report import ensure_writable, write_report

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2
log = logging.getLogger("csfmelt")


def _now():
    return datetime.now(timezone.utc).isoformat()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--workers", type=int, help="parallel sweep workers")
    common.add_argument("--budget-minutes", type=float, help="wall-clock budget; selects the budgeted "
                        "reference when the paper-resolution one would not fit")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="csfmelt", description="Diffuse-interface CSF heat-transfer benchmarks")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="solve a single configuration")
    sub.add_parser("sweep", parents=[common], help="solve the Cartesian product of a config's lists")
    sub.add_parser("reference", parents=[common], help="build and cache the sharp 1D references")
    sub.add_parser("verify", parents=[common], help="check delta and evaporation invariants")
    return p


def _settings(args, cfg: RunConfig):
    out = args.out or cfg.out or "csfmelt-out"
    workers = args.workers if args.workers is not None else cfg.workers
    if workers < 1:
        raise InvalidInputError("--workers must be >= 1")
    budget = args.budget_minutes if args.budget_minutes is not None else cfg.budget_minutes
    if budget is not None and budget <= 0:
        raise InvalidInputError("--budget-minutes must be positive")
    policy = cfg.reference
    specs = cfg.specs()
    if budget is not None and policy == "paper-exact" and specs:
        need = max(bm.estimate_reference_seconds(s, "paper-exact") for s in specs)
        if need > 0.5 * budget * 60.0:
            log.warning("paper-resolution reference needs ~%.0f s; using the budgeted reference", need)
            policy = "budgeted"
    return out, workers, budget, policy, specs


def _cmd_solve(args, cfg: RunConfig, single: bool) -> int:
    out, workers, budget, policy, specs = _settings(args, cfg)
    if single and not cfg.is_single:
        raise InvalidInputError("'run' needs scalar case, method, eps and n_i; use 'sweep' for lists")
    ensure_writable(out)
    started = _now()
    deadline = time.monotonic() + 60.0 * budget if budget else None
    fields = {}
    if single:
        row = bm.run_benchmark(specs[0], policy, keep_field=cfg.fields)
        fld = row.pop("_field", None)
        if fld is not None:
            fields[0] = (fld, specs[0].eps)
        report = bm.SweepReport([row]).fit_orders()
    else:
        marker = ensure_writable(out) / "markers"
        report = bm.sweep(cfg.benchmark, cfg.case, cfg.method, cfg.eps, cfg.n_i, policy=policy,
                          workers=workers, marker_dir=marker, deadline=deadline, dt=cfg.dt,
                          t_end=cfg.t_end, steady=cfg.steady, material=cfg.material,
                          keep_fields=cfg.fields)
        fields = {i: (f, specs[i].eps) for i, f in report.fields.items()}
    write_report(report, out, config=cfg, started=started, finished=_now(),
                 fields=fields, extra_meta={"reference_policy": policy})
    for r in report.rows:
        print(f"{r['benchmark']} {r['case']} {r['method']} eps={r['eps']:.4g} n_i={r['n_i']}: "
              f"{r['status']} l2={r['l2_error']} recoil_err={r['recoil_error']}")
    failed = [r for r in report.rows if r["status"] == "failed"]
    for r in failed:
        print(f"solver failure: {r['message']}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def _cmd_reference(args, cfg: RunConfig) -> int:
    out, _, _, policy, specs = _settings(args, cfg)
    if cfg.benchmark == "B4":
        raise InvalidInputError("B4 has no 1D sharp reference")
    ensure_writable(out)
    started = _now()
    built = []
    for s in {(s.dt, s.t_end): s for s in specs if not s.steady}.values():
        ref = bm.reference_1d(s, policy)
        built.append({"benchmark": s.benchmark, "policy": policy, "key": ref.key,
                      "T_interface": ref.T_interface, "nodes": int(ref.x.size), "wall_time": ref.wall_time})
        print(f"{s.benchmark} {policy} reference {ref.key}: T_interface = {ref.T_interface:.6f} K")
    write_report([], out, config=cfg, started=started, finished=_now(), extra_meta={"references": built})
    return EXIT_OK


def _cmd_verify() -> int:
    from .verify import run_all

    ok = True
    for name, passed, detail in run_all():
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok &= passed
    return EXIT_OK if ok else EXIT_INVALID


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return _cmd_verify()
        if not args.config:
            raise InvalidInputError(f"'{args.command}' needs --config")
        cfg = load_config(args.config)
        if args.command == "reference":
            return _cmd_reference(args, cfg)
        return _cmd_solve(args, cfg, single=args.command == "run")
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
