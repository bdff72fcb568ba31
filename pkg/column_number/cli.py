"""Command-line front end: ``python -m column_number <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or precondition
error, 3 internal guard, 4 thin-direction search exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from . import bounds, casecheck, lp, model, numtheory, oracle, reduction
from .config import constants_version, get_settings
from .errors import ColumnNumberError, PreconditionError
from .intervals import fraction_str, parse_fraction
from .services import ledger
from .services.charts import write_sweep_chart

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str) -> None:
    """One stderr handler on the package logger."""

    pkg = logging.getLogger("column_number")
    for handler in list(pkg.handlers):
        pkg.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    pkg.addHandler(handler)
    pkg.setLevel(level.upper())


class RunManifest(BaseModel):
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    # emitted file name -> sha256 hex digest
    artifacts: Dict[str, str] = Field(default_factory=dict)
    wall_ms: float = 0.0
    exit_code: int = 0
    constants_version: str = ""


class RunContext:
    """Where a command writes its files; tracks them for the manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.artifacts: Dict[str, Path] = {}

    def path(self, name: str) -> Path:
        target = Path(name)
        if not target.is_absolute():
            target = self.out_dir / target
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def register(self, target: Path) -> Path:
        """Manifest keys are POSIX paths relative to ``out_dir`` when possible."""

        try:
            key = target.relative_to(self.out_dir).as_posix()
        except ValueError:
            key = target.as_posix()
        self.artifacts[key] = target
        return target

    def emit_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        target.write_text(text, encoding="utf-8")
        return self.register(target)

    def emit_frame(self, name: str, frame: pd.DataFrame) -> Path:
        target = self.path(name)
        frame.to_csv(target, index=False, lineterminator="\n")
        return self.register(target)

    def checksums(self) -> Dict[str, str]:
        return {
            name: hashlib.sha256(target.read_bytes()).hexdigest()
            for name, target in sorted(self.artifacts.items())
        }

    def write_manifest(self, manifest: RunManifest) -> Path:
        target = self.path("manifest.json")
        target.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
        return target


def _echo(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, sort_keys=True))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_numtheory(args: argparse.Namespace, ctx: RunContext) -> int:
    eps = parse_fraction(args.eps)
    if args.action == "x0":
        _echo(
            {
                "eps": fraction_str(eps),
                "analytic_threshold": numtheory.analytic_threshold(eps),
                "x0": numtheory.find_x0(eps),
            }
        )
        return 0

    rows = list(numtheory.lemma21_rows(args.x_from, args.x_to, eps))
    failed = [r.x for r in rows if not r.passed]
    frame = pd.DataFrame(
        {
            "x": [r.x for r in rows],
            "lhs1": [fraction_str(r.lhs1) for r in rows],
            "rhs1": [fraction_str(r.rhs1) for r in rows],
            "lhs2": [fraction_str(r.lhs2) for r in rows],
            "rhs2": [fraction_str(r.rhs2) for r in rows],
            "pass": [r.passed for r in rows],
        }
    )
    if not args.out:
        sys.stdout.write(frame.to_csv(index=False, lineterminator="\n"))
        logger.info("checked %d values of x, %d failed", len(rows), len(failed))
        return 0 if not failed else 1
    ctx.emit_frame(args.out, frame)
    _echo(
        {
            "from": args.x_from,
            "to": args.x_to,
            "eps": fraction_str(eps),
            "checked": len(rows),
            "failed": failed[:50],
            "passed": not failed,
        }
    )
    return 0 if not failed else 1


def _family_matrix(kind: str, delta: int, a3: Optional[int]) -> model.TypedMatrix:
    if kind == "type2":
        return model.type2_extremal(delta)
    if kind == "type3":
        if a3 is None:
            raise ColumnNumberError("--a3 is required for --kind type3", exit_code=2)
        return model.type3_extremal(delta, a3)
    return model.family(model.FamilyKind(kind), delta)


def cmd_family(args: argparse.Namespace, ctx: RunContext) -> int:
    M = _family_matrix(args.kind, args.delta, args.a3)
    if args.out:
        ctx.emit_text(args.out, M.model_dump_json())
    if args.emit == "columns":
        print(model.enumerate_columns(M).to_json())
        return 0
    _echo(
        {
            "kind": args.kind,
            "delta": args.delta,
            "matrix": M.model_dump(),
            "column_count": model.column_count(M),
            "delta_endpoints": model.delta_endpoints(M),
            "generic": model.is_generic(model.enumerate_columns(M)),
        }
    )
    return 0


def cmd_reduce(args: argparse.Namespace, ctx: RunContext) -> int:
    A = model.ColumnSet.from_json(Path(args.input).read_text(encoding="utf-8"))
    delta = args.delta if args.delta is not None else model.delta_bruteforce(A)
    M = reduction.reduce(A, delta)
    if args.output:
        ctx.emit_text(args.output, M.model_dump_json())
    _echo(
        {
            "input_columns": len(A),
            "delta": delta,
            "matrix": M.model_dump(),
            "column_count": model.column_count(M),
        }
    )
    return 0


def cmd_zm(args: argparse.Namespace, ctx: RunContext) -> int:
    m = args.m
    if args.mode == "exact":
        problem = lp.build_primal(m)
    else:
        eps = parse_fraction(args.eps_num) / m
        problem = lp.build_approx_primal(m, eps)
        if problem.uncovered:
            logger.error("eps=%s leaves rows %s without variables", eps, list(problem.uncovered[:10]))
            return 1
    solution = lp.solve(problem)
    if not solution.optimal:
        logger.error("LP for m=%d is %s", m, solution.status.value)
        return 1
    if args.certificate:
        cert = lp.extract_certificate(m, problem, solution)
        if not lp.check_dual_feasible(cert):
            logger.error("extracted certificate is not dual feasible")
            return 1
        ctx.emit_text(args.certificate, cert.to_json())
    if args.vertex:
        vertex = oracle.vertex_enumerate_lp_value(m)
        if vertex != solution.value:
            logger.error("vertex enumeration gives %s, simplex %s", vertex, solution.value)
            return 1
    print(str(solution.value))
    print(f"approx. {float(solution.value):.10f}")
    return 0


def cmd_sweep(args: argparse.Namespace, ctx: RunContext) -> int:
    policy = bounds.EpsPolicy(numerator=parse_fraction(args.eps_num), retries=args.retries)
    w = parse_fraction(args.w)
    report = bounds.sweep(args.m_lo, args.m_hi, w, policy, jobs=args.jobs)
    if args.out:
        columns: Dict[str, List[Any]] = {
            "m": [r.m for r in report.records],
            "bound_num": [r.bound.numerator for r in report.records],
            "bound_den": [r.bound.denominator for r in report.records],
            "solved": [r.solved for r in report.records],
            "eps_num": [r.eps_used.numerator if r.eps_used is not None else "" for r in report.records],
            "eps_den": [r.eps_used.denominator if r.eps_used is not None else "" for r in report.records],
        }
        if args.with_timings:
            columns["wall_ms"] = [round(r.wall_ms, 3) for r in report.records]
        ctx.emit_frame(args.out, pd.DataFrame(columns))
    if args.chart:
        ctx.register(write_sweep_chart(report, ctx.path(args.chart)))
    _echo(
        {
            "from": args.m_lo,
            "to": args.m_hi,
            "w": fraction_str(w),
            "passed": report.passed,
            "solves": report.solves,
            "failures": report.failures,
        }
    )
    return 0 if report.passed else 1


def cmd_analytic(args: argparse.Namespace, ctx: RunContext) -> int:
    m = args.m
    C = parse_fraction(args.c) / (m * m)
    params = bounds.AnalyticParams(m=m, C=C, eps=parse_fraction(args.eps), w=parse_fraction(args.w))
    report = bounds.check_analytic(params)
    payload: Dict[str, Any] = {
        "m": m,
        "C": fraction_str(C),
        "feasible": report.feasible,
        "objective": fraction_str(report.objective),
        "objective_le_w": report.objective <= params.w,
    }
    in_window = True
    if not args.no_window:
        lo, hi = bounds.c_window(m, params.eps, params.w, enforce_x0=not args.ignore_x0)
        in_window = lo <= C <= hi
        payload["window"] = [fraction_str(lo), fraction_str(hi)]
        payload["c_in_window"] = in_window
    _echo(payload)
    return 0 if report.passed and in_window else 1


def cmd_threshold(args: argparse.Namespace, ctx: RunContext) -> int:
    w = parse_fraction(args.w)
    if args.search:
        found = bounds.threshold_search(w)
        print(found if found is not None else "none")
        return 0 if found is not None else 1
    if args.delta is None:
        raise ColumnNumberError("threshold needs --delta or --search", exit_code=2)
    verdict = bounds.verify_threshold(args.delta, w)
    print("true" if verdict else "false")
    return 0 if verdict else 1


def cmd_claims(args: argparse.Namespace, ctx: RunContext) -> int:
    relax = args.relax or []
    if args.which == "type2":
        report = casecheck.check_type2(relax)
    else:
        report = casecheck.check_type3(args.d, relax)
    print(report.model_dump_json())
    if not relax and report.solutions_found:
        return 1
    return 0


def cmd_oracle(args: argparse.Namespace, ctx: RunContext) -> int:
    cfg = oracle.SearchConfig(
        delta=args.delta,
        m_max=args.m_max,
        window=args.window,
        normalize_a1=not args.no_normalize,
        allow_large=args.allow_large,
    )
    result = oracle.best_typed_matrix(cfg, jobs=args.jobs)
    if args.emit:
        ctx.emit_text(args.emit, result.witness.model_dump_json())
    print(result.model_dump_json())
    return 0


# ---------------------------------------------------------------------------
# verify-all
# ---------------------------------------------------------------------------


def _check_lp_values() -> bool:
    z = {m: lp.solve(lp.build_primal(m)).value for m in range(1, 6)}
    return z[1] == z[2] == z[3] == 1 and z[4] == Fraction(35, 36) and z[5] == Fraction(119, 120)


def _check_vertex_oracle() -> bool:
    return all(
        oracle.vertex_enumerate_lp_value(m) == lp.solve(lp.build_primal(m)).value for m in range(1, 7)
    )


def _check_analytic() -> bool:
    m = 3257
    C = Fraction(496, 100) / (m * m)
    report = bounds.check_analytic(bounds.AnalyticParams(m=m, C=C))
    lo, hi = bounds.c_window(m)
    return report.passed and lo <= C <= hi


def _check_lemma21() -> bool:
    return all(r.passed for r in numtheory.lemma21_rows(1880, 5000, Fraction(1, 1000)))


def _family_samples(limit: int = 200):
    for delta in range(1, limit + 1):
        yield model.FamilyKind.F1, delta, delta + 2
        if delta % 2 and delta >= 3:
            yield model.FamilyKind.F2, delta, delta + 3
        if delta % 12 in (2, 8) and delta >= 14:
            yield model.FamilyKind.F3, delta, delta + 4


def _check_families() -> bool:
    for kind, delta, expected in _family_samples():
        M = model.family(kind, delta)
        if model.column_count(M) != expected or model.delta_endpoints(M) != delta:
            logger.error("family %s at Δ=%d does not have %d columns / Δ", kind.value, delta, expected)
            return False
        if not model.is_generic(model.enumerate_columns(M)):
            return False
    return True


def _check_claims() -> bool:
    relaxed = casecheck.check_type3(4, relax=["delta"])
    return (
        casecheck.check_type2().solutions_found == 0
        and casecheck.check_type3(3).solutions_found == 0
        and casecheck.check_type3(4).solutions_found == 0
        and relaxed.solutions_found > 0
        and relaxed.configurations == [((0, 0, 1, 1), (1, 2))]
    )


def _check_reduction(trials: int = 200, seed: int = 42) -> bool:
    rng = np.random.default_rng(seed)
    samples = [(kind, delta) for kind, delta, _ in _family_samples(60) if delta >= 2]
    for _ in range(trials):
        kind, delta = samples[int(rng.integers(len(samples)))]
        A = model.enumerate_columns(model.family(kind, delta))
        U = reduction.random_unimodular(rng)
        flips = rng.integers(0, 2, size=len(A)).astype(bool)
        M = reduction.reduce(reduction.transform(A, U, flips), delta)
        if (
            model.column_count(M) < len(A)
            or model.delta_endpoints(M) > delta
            or M.m > reduction.type_cap(delta)
        ):
            return False
    return True


def _check_threshold() -> bool:
    return bounds.verify_threshold(10**8) and not bounds.verify_threshold(10**4)


def _check_small_delta(jobs: int) -> bool:
    for delta in range(2, 13):
        cap = reduction.type_cap(delta)
        result = oracle.best_typed_matrix(oracle.SearchConfig(delta=delta), jobs=jobs)
        upper = max(bounds.refined_small_type_bound(m, delta) for m in range(1, min(cap, 3) + 1))
        if cap >= 4:
            z = lp.solve(lp.build_primal(cap)).value
            upper = max(upper, bounds.column_bound(cap, delta, z))
        lower = model.g_tilde(delta) if delta >= 3 else 4
        if not lower <= result.count <= upper:
            logger.error("Δ=%d: oracle count %d outside [%d, %s]", delta, result.count, lower, upper)
            return False
    return True


def acceptance_checks(sweep_to: int = 500, jobs: int = 1) -> Dict[str, bool]:
    checks: Dict[str, Callable[[], bool]] = {
        "lp_values": _check_lp_values,
        "vertex_oracle": _check_vertex_oracle,
        "sweep": lambda: bounds.sweep(4, sweep_to, jobs=jobs).passed,
        "analytic_certificate": _check_analytic,
        "lemma21": _check_lemma21,
        "families": _check_families,
        "claims": _check_claims,
        "reduction": _check_reduction,
        "threshold": _check_threshold,
        "small_delta": lambda: _check_small_delta(jobs),
    }
    results: Dict[str, bool] = {}
    for name, check in checks.items():
        start = time.perf_counter()
        try:
            results[name] = bool(check())
        except ColumnNumberError as exc:
            logger.error("check %s raised: %s", name, exc.detail)
            results[name] = False
        logger.info("check %s: %s (%.1f s)", name, results[name], time.perf_counter() - start)
    return results


def cmd_verify_all(args: argparse.Namespace, ctx: RunContext) -> int:
    checks = acceptance_checks(args.sweep_to, args.jobs)
    passed = all(checks.values())
    _echo({"passed": passed, "checks": checks})
    return 0 if passed else 1


def cmd_ledger(args: argparse.Namespace, ctx: RunContext) -> int:
    if not args.ledger:
        raise PreconditionError("no ledger: pass --ledger or set COLNUM_LEDGER_PATH")
    if not Path(args.ledger).exists():
        raise PreconditionError(f"ledger {args.ledger} does not exist")
    if args.action == "verify":
        intact = ledger.verify_run_chain(args.ledger)
        _echo({"ledger": str(args.ledger), "intact": intact})
        return 0 if intact else 1
    print(json.dumps(ledger.list_runs(args.ledger, limit=args.limit), indent=2))
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="column_number", description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=settings.jobs, help="worker processes for sweep/oracle")
    parser.add_argument("--log-level", default=settings.log_level)
    parser.add_argument("--ledger", type=Path, default=settings.ledger_path, help="SQLite run ledger")
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="directory for emitted files")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("numtheory", help="Σφ estimates and x0(ε)")
    p.add_argument("action", choices=["check-lemma21", "x0"])
    p.add_argument("--from", dest="x_from", type=int, default=1880)
    p.add_argument("--to", dest="x_to", type=int, default=5000)
    p.add_argument("--eps", default="1/1000")
    p.add_argument("--out", help="write the per-x CSV here and print a JSON summary instead")
    p.set_defaults(handler=cmd_numtheory)

    p = sub.add_parser("family", help="extremal family members")
    p.add_argument("--kind", choices=["F1", "F2", "F3", "type2", "type3"], required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--a3", type=int)
    p.add_argument("--emit", choices=["summary", "columns"], default="summary")
    p.add_argument("--out", help="write the TypedMatrix JSON here")
    p.set_defaults(handler=cmd_family)

    p = sub.add_parser("reduce", help="reduce a column set to type m")
    p.add_argument("--input", required=True, help="JSON list of [x, y] columns")
    p.add_argument("--delta", type=int)
    p.add_argument("--output", help="write the TypedMatrix JSON here")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("zm", help="exact or approximate z_m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "approx"], default="exact")
    p.add_argument("--eps-num", default="1.85", help="eps = eps_num / m in approx mode")
    p.add_argument("--certificate", help="write the dual certificate JSON here")
    p.add_argument("--vertex", action="store_true", help="cross-check by vertex enumeration (m <= 6)")
    p.set_defaults(handler=cmd_zm)

    p = sub.add_parser("sweep", help="certify z_m <= w over a range of m")
    p.add_argument("--from", dest="m_lo", type=int, default=4)
    p.add_argument("--to", dest="m_hi", type=int, default=500)
    p.add_argument("--w", default="999/1000")
    p.add_argument("--eps-num", default="37/20")
    p.add_argument("--retries", type=int, default=8)
    p.add_argument("--out")
    p.add_argument("--with-timings", action="store_true", help="add a wall_ms column to the CSV")
    p.add_argument("--chart", help="plotly HTML chart of the bounds")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("analytic", help="three-rectangle certificate at one m")
    p.add_argument("--m", type=int, default=3257)
    p.add_argument("--c", default="4.96", help="C·m²")
    p.add_argument("--eps", default="1/1000")
    p.add_argument("--w", default="999/1000")
    p.add_argument("--no-window", action="store_true")
    p.add_argument("--ignore-x0", action="store_true")
    p.set_defaults(handler=cmd_analytic)

    p = sub.add_parser("threshold", help="final inequality at Δ")
    p.add_argument("--delta", type=int)
    p.add_argument("--w", default="999/1000")
    p.add_argument("--search", action="store_true")
    p.set_defaults(handler=cmd_threshold)

    p = sub.add_parser("claims", help="residue checks for types 2 and 3")
    p.add_argument("--which", choices=["type2", "type3"], required=True)
    p.add_argument("--d", type=int, choices=[3, 4], default=4)
    p.add_argument("--relax", action="append", help="residue name to relax (repeatable)")
    p.set_defaults(handler=cmd_claims)

    p = sub.add_parser("oracle", help="exhaustive search over typed matrices")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--m-max", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--emit")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("verify-all", help="run every acceptance check")
    p.add_argument("--sweep-to", type=int, default=500)
    p.set_defaults(handler=cmd_verify_all)

    p = sub.add_parser("ledger", help="list recorded runs or verify the hash chain")
    p.add_argument("action", choices=["list", "verify"])
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(handler=cmd_ledger)

    return parser


def _parameters(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        key: str(value) if isinstance(value, Path) else value
        for key, value in sorted(vars(args).items())
        if key not in ("handler", "ledger", "out_dir", "log_level")
    }


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    configure_logging(args.log_level)

    ctx = RunContext(args.out_dir)
    start = time.perf_counter()
    try:
        code = args.handler(args, ctx)
    except ColumnNumberError as exc:
        logger.error("%s", exc.detail)
        code = exc.exit_code
    except ValidationError as exc:
        logger.error("invalid parameters: %s", exc)
        code = 2
    except Exception:
        logger.exception("unexpected failure in %s", args.command)
        code = 3
    wall_ms = (time.perf_counter() - start) * 1000

    manifest = RunManifest(
        command=args.command,
        parameters=_parameters(args),
        artifacts=ctx.checksums(),
        wall_ms=round(wall_ms, 3),
        exit_code=code,
        constants_version=constants_version(),
    )
    if ctx.artifacts:
        ctx.write_manifest(manifest)
    if args.ledger and args.command != "ledger":
        digest = ledger.record_run(
            args.ledger, args.command, manifest.model_dump(), code, manifest.constants_version
        )
        logger.debug("ledger entry %s", digest[:12])
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
