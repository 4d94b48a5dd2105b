"""Diagonal-maximum profiles of a factor and predicted-vs-observed censuses."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .cholesky import DENORM_MIN, REALMIN, CholeskyFactor, FactorStats
from .errors import InvalidArgument
from .fill_model import FillPrediction, tail_count


@numba.njit(cache=True)
def _diag_max(band):
    n, w = band.shape
    bw = w - 1
    out = np.zeros(w)
    for i in range(n):
        for c in range(max(0, bw - i), w):
            v = abs(band[i, c])
            if v > out[bw - c]:
                out[bw - c] = v
    return out


@dataclass(frozen=True)
class DiagonalProfile:
    """``max_abs[d]`` is the largest ``|l(i, i-d)|``; ``None`` marks an all-zero (absent) diagonal."""

    max_abs: list[float | None]

    @property
    def bandwidth(self) -> int:
        return len(self.max_abs) - 1

    def first_below(self, threshold: float) -> int | None:
        """Smallest distance whose diagonal maximum is below ``threshold`` (absent counts)."""
        for d, v in enumerate(self.max_abs):
            if v is None or v < threshold:
                return d
        return None

    def absent_runs(self) -> list[tuple[int, int]]:
        runs, start = [], None
        for d, v in enumerate(self.max_abs + [0.0]):
            if v is None and start is None:
                start = d
            elif v is not None and start is not None:
                runs.append((start, d - 1))
                start = None
        return runs

    def log2(self) -> list[float | None]:
        return [None if v is None else math.log2(v) for v in self.max_abs]


def diagonal_profile(L: CholeskyFactor) -> DiagonalProfile:
    raw = _diag_max(L.band)
    return DiagonalProfile([None if v == 0.0 else float(v) for v in raw])


@dataclass(frozen=True)
class Discrepancy:
    observed: int
    predicted: int
    absolute: int
    relative: float | None


@dataclass(frozen=True)
class AnalysisReport:
    N: int
    epsilon: float
    mesh: str
    mode: str
    observed: FactorStats
    prediction: FillPrediction | None
    crossings: dict[str, int | None]
    discrepancies: dict[str, Discrepancy]
    brackets: dict[str, tuple[int, int]]
    verdict: str
    profile: DiagonalProfile | None = field(default=None, compare=False)
    notes: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "epsilon": self.epsilon,
            "mesh": self.mesh,
            "mode": self.mode,
            "observed": asdict(self.observed),
            "prediction": None if self.prediction is None else self.prediction.to_dict(),
            "crossings": self.crossings,
            "discrepancies": {k: asdict(v) for k, v in self.discrepancies.items()},
            "brackets": {k: list(v) for k, v in self.brackets.items()},
            "verdict": self.verdict,
            "profile": None if self.profile is None else self.profile.max_abs,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnalysisReport:
        return cls(
            N=d["N"],
            epsilon=d["epsilon"],
            mesh=d["mesh"],
            mode=d["mode"],
            observed=FactorStats(**d["observed"]),
            prediction=None if d["prediction"] is None else FillPrediction.from_dict(d["prediction"]),
            crossings=d["crossings"],
            discrepancies={k: Discrepancy(**v) for k, v in d["discrepancies"].items()},
            brackets={k: tuple(v) for k, v in d["brackets"].items()},
            verdict=d["verdict"],
            profile=None if d["profile"] is None else DiagonalProfile(d["profile"]),
            notes=d.get("notes", {}),
        )


def level_bracket(N: int, k: int | None) -> tuple[int, int]:
    """Counts reachable if the true crossing level is within one of ``k``."""
    if k is None:
        return (0, 0)
    return (tail_count(N, k + 1), tail_count(N, k - 1))


def _discrepancy(obs: int, pred: int) -> Discrepancy:
    rel = None if pred == 0 else (obs - pred) / pred
    return Discrepancy(obs, pred, obs - pred, rel)


def compare(
    observed: FactorStats,
    predicted: FillPrediction | None,
    *,
    epsilon: float | None = None,
    mesh: str = "uniform",
    profile: DiagonalProfile | None = None,
) -> AnalysisReport:
    """Check an observed census against a prediction with a one-level tolerance.

    Underflow zeros must fall in the bracket around ``k_zero`` and subnormals
    plus underflow zeros in the bracket around ``k_subnormal``.  Non-uniform
    meshes get the verdict ``"qualitative"``; if a uniform-mesh prediction is
    supplied for reference, the ratio of observed to predicted underflow zeros
    is recorded in ``notes`` but not judged.
    """
    crossings = {}
    if profile is not None:
        crossings = {
            "realmin": profile.first_below(REALMIN),
            "zero": profile.first_below(DENORM_MIN),
        }
    if predicted is None or mesh != "uniform":
        if observed.n <= 0:
            raise InvalidArgument("empty factor")
        m = observed.bandwidth
        notes = {}
        if predicted is not None and predicted.predicted_underflow_zeros:
            notes["underflow_zeros_vs_uniform"] = observed.underflow_zeros / predicted.predicted_underflow_zeros
        return AnalysisReport(
            N=m + 1,
            epsilon=epsilon if epsilon is not None else math.nan,
            mesh=mesh,
            mode=observed.mode,
            observed=observed,
            prediction=predicted,
            crossings=crossings,
            discrepancies={},
            brackets={},
            verdict="qualitative",
            profile=profile,
            notes=notes,
        )
    N = predicted.N
    if observed.bandwidth != N - 1 or observed.n != (N - 1) ** 2:
        raise InvalidArgument(f"factor of order {observed.n} does not belong to N={N}")

    disc = {
        "nonzeros": _discrepancy(observed.nonzeros, predicted.predicted_nonzeros),
        "subnormals": _discrepancy(observed.subnormals, predicted.predicted_subnormals),
        "underflow_zeros": _discrepancy(observed.underflow_zeros, predicted.predicted_underflow_zeros),
    }
    brackets = {
        "underflow_zeros": level_bracket(N, predicted.k_zero),
        "subnormals_plus_zeros": level_bracket(N, predicted.k_subnormal),
    }
    tiny = observed.subnormals + observed.underflow_zeros
    inside = (
        brackets["underflow_zeros"][0] <= observed.underflow_zeros <= brackets["underflow_zeros"][1]
        and brackets["subnormals_plus_zeros"][0] <= tiny <= brackets["subnormals_plus_zeros"][1]
        and observed.nonzeros + observed.underflow_zeros == predicted.exact_nonzeros
    )
    if observed.mode == "ftz":
        # flushed subnormals become zeros; only their sum is predicted
        inside = (
            brackets["subnormals_plus_zeros"][0] <= tiny <= brackets["subnormals_plus_zeros"][1]
            and observed.nonzeros + observed.underflow_zeros == predicted.exact_nonzeros
        )
    return AnalysisReport(
        N=N,
        epsilon=predicted.epsilon,
        mesh=mesh,
        mode=observed.mode,
        observed=observed,
        prediction=predicted,
        crossings=crossings,
        discrepancies=disc,
        brackets=brackets,
        verdict="match" if inside else "mismatch",
        profile=profile,
    )


TABLE_ROWS = ("Time (s)", "Nonzeros", "Subnormals", "Underflow zeros")


def format_table(reports: list[AnalysisReport]) -> str:
    """Text table laid out like the timing/census tables: one column per epsilon."""
    header = ["eps"] + [f"{r.epsilon:.0e}" for r in reports]
    rows = [
        ["Time (s)"] + [f"{r.observed.elapsed_seconds:.3f}" for r in reports],
        ["Nonzeros"] + [f"{r.observed.nonzeros:,}" for r in reports],
        ["Subnormals"] + [f"{r.observed.subnormals:,}" for r in reports],
        ["Underflow zeros"] + [f"{r.observed.underflow_zeros:,}" for r in reports],
    ]
    if any(r.prediction is not None for r in reports):
        rows.append(
            ["Predicted subnormals"]
            + [f"{r.prediction.predicted_subnormals:,}" if r.prediction else "-" for r in reports]
        )
        rows.append(
            ["Predicted underflow zeros"]
            + [f"{r.prediction.predicted_underflow_zeros:,}" if r.prediction else "-" for r in reports]
        )
        rows.append(["Verdict"] + [r.verdict for r in reports])
    table = [header] + rows
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    lines = []
    for idx, row in enumerate(table):
        cells = [row[0].ljust(widths[0])] + [cell.rjust(widths[c]) for c, cell in enumerate(row) if c]
        lines.append(" | ".join(cells))
        if idx == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def profile_csv(profile: DiagonalProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["distance", "max_abs", "log2_max_abs"])
    for d, (v, lg) in enumerate(zip(profile.max_abs, profile.log2())):
        w.writerow([d, "absent" if v is None else repr(v), "" if lg is None else f"{lg:.6f}"])
    return buf.getvalue()


def sweep_csv(reports: list[AnalysisReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["N", "epsilon", "mesh", "mode", "elapsed_seconds", "nonzeros", "subnormals", "underflow_zeros",
         "predicted_subnormals", "predicted_underflow_zeros", "verdict"]
    )
    for r in reports:
        p = r.prediction
        w.writerow(
            [r.N, repr(r.epsilon), r.mesh, r.mode, f"{r.observed.elapsed_seconds:.6f}", r.observed.nonzeros,
             r.observed.subnormals, r.observed.underflow_zeros,
             "" if p is None else p.predicted_subnormals, "" if p is None else p.predicted_underflow_zeros,
             r.verdict]
        )
    return buf.getvalue()


def emit_report(report: AnalysisReport | list[AnalysisReport], fmt: str = "json", out=None) -> str:
    """Render a report (or a sweep of them) as ``json``, ``csv`` or ``table``; write to ``out`` if given.

    A single report's CSV is its diagonal profile; a list gives one row per run.
    """
    reports = report if isinstance(report, list) else [report]
    if fmt == "json":
        payload = [r.to_dict() for r in reports]
        text = json.dumps(payload if isinstance(report, list) else payload[0], indent=2) + "\n"
    elif fmt == "csv":
        if isinstance(report, list) or report.profile is None:
            text = sweep_csv(reports)
        else:
            text = profile_csv(report.profile)
    elif fmt == "table":
        text = format_table(reports)
    else:
        raise InvalidArgument(f"unknown format {fmt!r}")
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def load_report(text: str) -> AnalysisReport | list[AnalysisReport]:
    data = json.loads(text)
    if isinstance(data, list):
        return [AnalysisReport.from_dict(d) for d in data]
    return AnalysisReport.from_dict(data)
