"""Exit criteria for the package, one test per criterion.

Each test prints a PASS/FAIL line (collected again in the terminal summary).
Criteria 4 and the full-size timing report need ``--runslow``.
"""

import time

import numpy as np
import pytest

from cholfill.analyzer import diagonal_profile, level_bracket
from cholfill.assembly import assemble
from cholfill.cholesky import REALMIN, Mode, factor, solve, warmup
from cholfill.fill_model import (
    cumulative_count,
    exact_nonzeros,
    g_of_N,
    per_level_count,
    predict,
    symbolic_levels,
)
from cholfill.mesh import get_problem, shishkin_mesh, uniform_mesh

from .oracles import dense_cholesky, ulp_distance


def _system(N, eps, mesh="uniform", problem="ones"):
    m = uniform_mesh(N) if mesh == "uniform" else shishkin_mesh(N, eps)
    return assemble(m, m, get_problem(problem, eps))


@pytest.fixture(scope="module", autouse=True)
def _jit():
    warmup()
    dense_cholesky(np.eye(2))
    symbolic_levels(3)
    diagonal_profile(factor(_system(3, 1.0)[0])[0])


def test_c1_exact_nonzero_count(criterion):
    t0 = time.perf_counter()
    details = []
    ok = True
    for N in (4, 8, 16, 32, 64):
        m = N - 1
        sym = symbolic_levels(N).structural_nonzeros()
        A, _ = _system(N, 1.0)
        _, stats = factor(A)
        ok &= sym == m**3 + m - 1 == stats.nonzeros
        details.append(f"N={N}:{sym}/{stats.nonzeros}")
    elapsed = time.perf_counter() - t0
    criterion("C1 exact-arithmetic nonzero count", ok and elapsed < 5, f"{' '.join(details)} in {elapsed:.2f}s")


def test_c2_level_count_consistency(criterion):
    t0 = time.perf_counter()
    bad = []
    for N in range(3, 65):
        m = N - 1
        census = symbolic_levels(N).census()
        tail = 0
        for p in range(m, 0, -1):
            tail += census.get(p, 0)
            if cumulative_count(N, p) != sum(per_level_count(N, k) for k in range(p, m + 1)) or tail != cumulative_count(N, p):
                bad.append((N, p))
    elapsed = time.perf_counter() - t0
    criterion("C2 cumulative/per-level/census agree", not bad and elapsed < 10, f"N=3..64, mismatches={bad[:5]}, {elapsed:.2f}s")


def test_c3_predicted_counts_fast(criterion):
    expected = {
        1e-6: (948_600, 109_800_960),
        1e-5: (1_360_170, 100_086_990),
        1e-4: (2_399_040, 77_173_710),
    }
    predict(512, 1e-6)
    got = {}
    worst = 0.0
    for eps in expected:
        t0 = time.perf_counter()
        p = predict(512, eps)
        worst = max(worst, time.perf_counter() - t0)
        got[eps] = (p.predicted_subnormals, p.predicted_underflow_zeros)
    criterion("C3 predict(512, eps) reproduces census", got == expected and worst < 1e-3, f"{got}, slowest {worst * 1e3:.3f} ms")


@pytest.mark.slow
@pytest.mark.parametrize("eps", [1e-1, 1e-4, 1e-5, 1e-6])
def test_c4_observed_counts_full_factorization(criterion, eps):
    published = {
        1e-1: (133_433_341, 0, 0),
        1e-4: (56_259_631, 2_399_040, 77_173_710),
        1e-5: (33_346_351, 1_360_170, 100_086_990),
        1e-6: (23_632_381, 948_600, 109_800_960),
    }
    A, _ = _system(512, eps)
    _, stats = factor(A, overwrite=True)
    del A
    obs = (stats.nonzeros, stats.subnormals, stats.underflow_zeros)
    pred = predict(512, eps)
    if eps == 1e-1:
        ok = obs == published[eps]
    else:
        zlo, zhi = level_bracket(512, pred.k_zero)
        tlo, thi = level_bracket(512, pred.k_subnormal)
        ok = (
            zlo <= stats.underflow_zeros <= zhi
            and tlo <= stats.subnormals + stats.underflow_zeros <= thi
            and stats.nonzeros + stats.underflow_zeros == exact_nonzeros(512)
        )
    criterion(
        f"C4 N=512 eps={eps:g} factor census",
        ok,
        f"observed {obs}, table {published[eps]}, exact={obs == published[eps]}, {stats.elapsed_seconds:.1f}s",
    )


def test_c5_profile_crossing_structure(criterion):
    t0 = time.perf_counter()
    A, _ = _system(128, 1e-6)
    L, _ = factor(A)
    prof = diagonal_profile(L)
    first = prof.first_below(REALMIN)
    runs = prof.absent_runs()
    A1, _ = _system(128, 1.0)
    prof1 = diagonal_profile(factor(A1)[0])
    elapsed = time.perf_counter() - t0
    # the flushed band [41, 87] is matched with one diagonal of tolerance at each end
    band_ok = len(runs) == 1 and abs(runs[0][0] - 41) <= 1 and abs(runs[0][1] - 87) <= 1
    ok = first in (38, 39) and band_ok and prof1.first_below(REALMIN) is None and elapsed < 10
    criterion(
        "C5 diagonal-max profile crossings (N=128)",
        ok,
        f"eps=1e-6: first<realmin at d={first}, absent runs {runs}; eps=1: no crossing={prof1.first_below(REALMIN) is None}; {elapsed:.2f}s",
    )


def test_c6_g_curve(criterion):
    t0 = time.perf_counter()
    Ns = np.arange(1, 5001)
    g = np.array([g_of_N(int(N)) for N in Ns])
    peak = g.max()
    above = g > 1e-3
    ups = Ns[1:][above[1:] & ~above[:-1]]
    downs = Ns[1:][~above[1:] & above[:-1]]
    tail = 5000 * g_of_N(5000)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(peak / 1.05e-3 - 1) <= 0.02
        and len(ups) == 1 and 262 <= ups[0] <= 264
        and len(downs) == 1 and 483 <= downs[0] - 1 <= 485
        and 0.9 <= tail <= 1.0
        and elapsed < 1
    )
    criterion(
        "C6 g(N) boundary curve",
        ok,
        f"max {peak:.4e} at N={Ns[g.argmax()]}, crossings up@{ups.tolist()} down-after@{(downs - 1).tolist()}, 5000*g={tail:.4f}, {elapsed:.3f}s",
    )


def test_c7_numerical_correctness(criterion):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst_ulp = worst_res = worst_rec = 0.0
    cases = []
    for _ in range(20):
        N = int(rng.integers(3, 33))
        eps = float(10 ** rng.uniform(-4, 0))
        mesh = "shishkin" if N % 4 == 0 and rng.random() < 0.5 else "uniform"
        problem = str(rng.choice(["ones", "varying", "constant-solution"]))
        A, rhs = _system(N, eps, mesh, problem)
        L, _ = factor(A)
        Ad, Ld = A.to_dense(), L.to_dense()
        worst_ulp = max(worst_ulp, ulp_distance(Ld, dense_cholesky(Ad)).max())
        b = rng.standard_normal(A.n)
        x = solve(L, b)
        worst_res = max(worst_res, np.abs(Ad @ x - b).max() / np.abs(b).max())
        u = np.finfo(float).eps / 2
        bound = 100 * u * A.bandwidth * np.abs(Ad).max()
        worst_rec = max(worst_rec, np.abs(Ad - Ld @ Ld.T).max() / bound)
        cases.append((N, f"{eps:.1e}", mesh[0], problem[0]))
    elapsed = time.perf_counter() - t0
    ok = worst_ulp <= 1 and worst_res <= 1e-8 and worst_rec <= 1 and elapsed < 10
    criterion(
        "C7 factor vs dense oracle, solve, reconstruction",
        ok,
        f"20 cases, max ulp {worst_ulp:g}, max residual {worst_res:.2e}, reconstruction/bound {worst_rec:.3f}, {elapsed:.2f}s",
    )


def _timing_report(N, eps_slow, eps_fast):
    times = {}
    for eps in (eps_fast, eps_slow):
        for mode in Mode:
            A, _ = _system(N, eps)
            _, stats = factor(A, mode, overwrite=True)
            times[(eps, mode.value)] = (stats.elapsed_seconds, stats.subnormals)
    return times


def _timing_verdict(times, eps_slow, eps_fast):
    ieee = times[(eps_slow, "ieee")][0] / times[(eps_fast, "ieee")][0]
    ftz = times[(eps_slow, "ftz")][0] / times[(eps_fast, "ftz")][0]
    slower = "IEEE slowdown seen" if ieee > 1.2 else "no IEEE slowdown"
    closed = "FTZ closes the gap" if ftz < 1.2 else "FTZ does not close the gap"
    rows = ", ".join(f"eps={e:g}/{m}: {t:.2f}s ({s} subnormals)" for (e, m), (t, s) in times.items())
    return f"{slower} (x{ieee:.2f}), {closed} (x{ftz:.2f}); {rows}"


# qualitative and machine dependent: reported, never asserted
def test_c8_timing_report_desk_scale(criterion):
    times = _timing_report(192, 1e-4, 1e-1)
    criterion("C8 timing, N=192", True, _timing_verdict(times, 1e-4, 1e-1), gating=False)


@pytest.mark.slow
def test_c8_timing_report_full(criterion):
    times = _timing_report(512, 1e-3, 1e-1)
    criterion("C8 timing, N=512", True, _timing_verdict(times, 1e-3, 1e-1), gating=False)


def test_c9_shishkin_qualitative(criterion):
    N, eps = 256, 1e-6
    _, s_shi = factor(_system(N, eps, "shishkin")[0], overwrite=True)
    _, s_uni = factor(_system(N, eps)[0], overwrite=True)
    ratio = s_shi.underflow_zeros / s_uni.underflow_zeros
    ok = s_shi.underflow_zeros > 0 and 0.5 <= ratio <= 0.9
    criterion(
        "C9 Shishkin underflow zeros vs uniform (qualitative)",
        ok,
        f"shishkin {s_shi.underflow_zeros:,} / uniform {s_uni.underflow_zeros:,} = {ratio:.3f}",
    )
