"""Command-line entry point: ``cholfill {assemble,factor,predict,analyze,sweep,bench,gcurve}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analyzer import AnalysisReport, compare, diagonal_profile, emit_report
from .assembly import assemble, export_matrix_market
from .cholesky import Mode, factor, warmup
from .errors import InvalidArgument
from .fill_model import g_of_N, predict
from .mesh import MeshKind, ProblemConfig, load_config

log = logging.getLogger("cholfill")

OUTPUT_DIR_ENV = "CHOLFILL_OUTPUT_DIR"
LARGE_N = 600


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    N: int = 64
    epsilons: tuple[float, ...] = (1e-6,)
    mesh: MeshKind = MeshKind.UNIFORM
    sigma: float = 2.0
    beta: float = 1.0
    problem: str = "ones"
    mode: Mode = Mode.IEEE
    fmt: str = "json"
    out: Path | None = None
    jobs: int = 1
    allow_large: bool = False
    n_range: tuple[int, int] = (200, 500)
    extra: dict = field(default_factory=dict)

    def problem_config(self, epsilon: float) -> ProblemConfig:
        return ProblemConfig(self.N, epsilon, self.beta, self.sigma, self.mesh, self.problem)

    def validate(self) -> None:
        if self.subcommand != "gcurve":
            if self.N < 2:
                raise InvalidArgument("--n must be at least 2")
            if self.mesh is MeshKind.SHISHKIN and self.N % 4:
                raise InvalidArgument("Shishkin meshes need --n divisible by 4")
            if not self.epsilons or any(e <= 0 for e in self.epsilons):
                raise InvalidArgument("--eps values must be positive")
            if self.beta <= 0 or self.sigma <= 0:
                raise InvalidArgument("--beta and --sigma must be positive")
        if self.subcommand in ("factor", "analyze", "sweep", "bench") and self.N > LARGE_N and not self.allow_large:
            gb = (self.N - 1) ** 3 * 8 / 2**30
            raise InvalidArgument(f"N={self.N} needs about {gb:.2f} GiB per factor; pass --allow-large")
        if self.jobs < 1:
            raise InvalidArgument("--jobs must be >= 1")
        if self.subcommand == "gcurve" and not 1 <= self.n_range[0] <= self.n_range[1]:
            raise InvalidArgument("--n-range must be LO:HI with 1 <= LO <= HI")


def parse_eps(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None


def parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected LO:HI") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with a [problem] section")
    common.add_argument("--n", type=int, dest="N")
    common.add_argument("--eps", type=parse_eps, help="epsilon, or comma-separated list for sweeps")
    common.add_argument("--mesh", choices=[k.value for k in MeshKind])
    common.add_argument("--sigma", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--problem")
    common.add_argument("--mode", choices=[m.value for m in Mode], default="ieee")
    common.add_argument("--format", choices=["json", "csv", "table"], default="json", dest="fmt")
    common.add_argument("--out", type=Path, help="output file (relative paths go under $%s)" % OUTPUT_DIR_ENV)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--allow-large", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cholfill", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("assemble", parents=[common], help="write A (Matrix Market) and the right-hand side")
    p = sub.add_parser("factor", parents=[common], help="factor A and print FactorStats")
    p.add_argument("--factor-out", type=Path, help="also write L in Matrix Market format")
    sub.add_parser("predict", parents=[common], help="analytic subnormal/underflow prediction")
    sub.add_parser("analyze", parents=[common], help="factor, profile and compare with prediction")
    sub.add_parser("sweep", parents=[common], help="analyze over a list of epsilons")
    p = sub.add_parser("bench", parents=[common], help="time IEEE against flush-to-zero per epsilon (CSV)")
    p.add_argument("--repeat", type=int, default=1, help="factorizations per (eps, mode); the fastest is kept")
    p = sub.add_parser("gcurve", parents=[common], help="CSV of the boundary curve g(N)")
    p.add_argument("--n-range", type=parse_range, default=(200, 500))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = {}
    if args.config is not None:
        pc = load_config(args.config)
        base = dict(N=pc.N, epsilons=(pc.epsilon,), mesh=pc.mesh, sigma=pc.sigma, beta=pc.beta, problem=pc.problem)
    for key, val in [("N", args.N), ("epsilons", args.eps), ("sigma", args.sigma), ("beta", args.beta),
                     ("problem", args.problem)]:
        if val is not None:
            base[key] = val
    if args.mesh is not None:
        base["mesh"] = MeshKind(args.mesh)
    cfg = RunConfig(
        subcommand=args.subcommand,
        mode=Mode(args.mode),
        fmt=args.fmt,
        out=_resolve_out(args.out),
        jobs=args.jobs,
        allow_large=args.allow_large,
        **base,
    )
    if args.subcommand == "gcurve":
        cfg = replace(cfg, n_range=args.n_range)
    if args.subcommand == "factor" and args.factor_out is not None:
        cfg = replace(cfg, extra={"factor_out": _resolve_out(args.factor_out)})
    if args.subcommand == "bench":
        cfg = replace(cfg, extra={"repeat": max(1, args.repeat)})
    if args.subcommand == "assemble":
        cfg = replace(cfg, fmt="mtx" if args.fmt == "json" else args.fmt)
    return cfg


def _resolve_out(path: Path | None) -> Path | None:
    if path is None:
        return None
    root = os.environ.get(OUTPUT_DIR_ENV)
    if root and not path.is_absolute():
        Path(root).mkdir(parents=True, exist_ok=True)
        return Path(root) / path
    return path


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def analyze_one(cfg: RunConfig, epsilon: float) -> AnalysisReport:
    pc = cfg.problem_config(epsilon)
    mx, my = pc.meshes()
    A, _ = assemble(mx, my, pc.spec())
    warmup()
    L, stats = factor(A, cfg.mode, overwrite=True)
    prof = diagonal_profile(L)
    del L, A
    reference = predict(cfg.N, epsilon, b=cfg.beta**2 if cfg.problem == "ones" else 1.0) if cfg.N >= 3 else None
    # the prediction models the uniform mesh with a constant reaction term
    mesh = mx.kind.value
    if cfg.problem != "ones" and mesh == "uniform":
        mesh = "uniform-variable-b"
    return compare(stats, reference, epsilon=epsilon, mesh=mesh, profile=prof)


def run_sweep(cfg: RunConfig) -> tuple[list[AnalysisReport], list[tuple[float, str]]]:
    """One factor-and-analyze per epsilon; failures are collected, not raised."""
    reports, errors = [], []
    if cfg.jobs > 1 and len(cfg.epsilons) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [(e, pool.submit(analyze_one, cfg, e)) for e in cfg.epsilons]
            for e, fut in futures:
                try:
                    reports.append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    errors.append((e, f"{type(exc).__name__}: {exc}"))
    else:
        for e in cfg.epsilons:
            try:
                reports.append(analyze_one(cfg, e))
            except Exception as exc:  # noqa: BLE001
                errors.append((e, f"{type(exc).__name__}: {exc}"))
    for e, msg in errors:
        log.error("eps=%g failed: %s", e, msg)
    return reports, errors


def run_gcurve(lo: int, hi: int) -> str:
    rows = [(N, g_of_N(N)) for N in range(lo, hi + 1)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "g", "N_times_g"])
    for N, g in rows:
        w.writerow([N, repr(g), repr(N * g)])
    return buf.getvalue()


def run_bench(cfg: RunConfig) -> str:
    """Best-of-``repeat`` factor time for each epsilon in both arithmetic modes."""
    warmup()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "epsilon", "mode", "seconds", "subnormals", "underflow_zeros"])
    for e in cfg.epsilons:
        pc = cfg.problem_config(e)
        for mode in Mode:
            best = None
            for _ in range(cfg.extra.get("repeat", 1)):
                A, _ = assemble(*pc.meshes(), pc.spec())
                _, stats = factor(A, mode, overwrite=True)
                del A
                if best is None or stats.elapsed_seconds < best.elapsed_seconds:
                    best = stats
            w.writerow([cfg.N, repr(e), mode.value, f"{best.elapsed_seconds:.4f}", best.subnormals, best.underflow_zeros])
    return buf.getvalue()


def dispatch(cfg: RunConfig) -> int:
    cfg.validate()
    cmd = cfg.subcommand
    if cmd == "gcurve":
        _write(run_gcurve(*cfg.n_range), cfg.out)
        return 0
    if cmd == "predict":
        preds = [predict(cfg.N, e, b=cfg.beta**2).to_dict() for e in cfg.epsilons]
        _write(json.dumps(preds[0] if len(preds) == 1 else preds, indent=2) + "\n", cfg.out)
        return 0
    if cmd == "assemble":
        pc = cfg.problem_config(cfg.epsilons[0])
        A, rhs = assemble(*pc.meshes(), pc.spec())
        if cfg.out is None:
            raise InvalidArgument("assemble needs --out for the Matrix Market file")
        export_matrix_market(A, cfg.out)
        np.savetxt(cfg.out.with_suffix(".rhs.txt"), rhs, fmt="%.17g")
        log.info("wrote %s (n=%d, bandwidth=%d)", cfg.out, A.n, A.bandwidth)
        return 0
    if cmd == "factor":
        results = []
        for e in cfg.epsilons:
            pc = cfg.problem_config(e)
            A, _ = assemble(*pc.meshes(), pc.spec())
            warmup()
            L, stats = factor(A, cfg.mode, overwrite=True)
            if "factor_out" in cfg.extra:
                export_matrix_market(L.band, cfg.extra["factor_out"], symmetric=False)
            results.append(json.loads(stats.to_json()))
        _write(json.dumps(results[0] if len(results) == 1 else results, indent=2) + "\n", cfg.out)
        return 0
    if cmd == "analyze":
        if len(cfg.epsilons) != 1:
            raise InvalidArgument("analyze takes a single --eps; use sweep for lists")
        report = analyze_one(cfg, cfg.epsilons[0])
        _write(emit_report(report, cfg.fmt), cfg.out)
        return 0
    if cmd == "bench":
        _write(run_bench(cfg), cfg.out)
        return 0
    if cmd == "sweep":
        reports, errors = run_sweep(cfg)
        if reports:
            _write(emit_report(reports, cfg.fmt), cfg.out)
        for e, msg in errors:
            print(f"eps={e:g}: {msg}", file=sys.stderr)
        return 1 if errors else 0
    raise InvalidArgument(f"unknown subcommand {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        return dispatch(cfg)
    except (InvalidArgument, ValueError, ArithmeticError, OSError) as exc:
        print(f"cholfill: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
