import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cholfill.assembly import BandedSymmetricMatrix, assemble, export_matrix_market, import_matrix_market
from cholfill.errors import InvalidArgument, ModelViolation
from cholfill.mesh import ProblemSpec, get_problem, shishkin_mesh, uniform_mesh

from .oracles import dense_assembly


def test_single_unknown():
    mesh = uniform_mesh(2)
    A, rhs = assemble(mesh, mesh, get_problem("ones", 1.0))
    assert A.n == 1
    assert A[0, 0] == 4 + 1 / 4
    assert rhs.tolist() == [0.25]


@pytest.mark.parametrize("N", [4, 8, 16, 32])
@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-6])
def test_uniform_stencil(N, eps):
    mesh = uniform_mesh(N)
    A, _ = assemble(mesh, mesh, get_problem("ones", eps))
    m = N - 1
    h = 1 / N
    assert A.bandwidth == m
    np.testing.assert_allclose(A.diagonal(0), 4 * eps**2 + h * h, rtol=1e-15)
    west = A.diagonal(1)
    south = A.diagonal(m)
    # absent across block boundaries, exactly -eps^2 elsewhere
    rows = np.arange(1, m * m)
    assert np.all(west[rows % m == 0] == 0)
    assert np.all(west[rows % m != 0] == -(eps**2))
    assert np.all(south == -(eps**2))
    inner = A.band[:, 1 : m - 1]
    assert not inner.any()


@pytest.mark.parametrize(
    "mesh",
    [uniform_mesh(8), shishkin_mesh(8, 1e-2), shishkin_mesh(12, 1e-5)],
    ids=["uniform", "shishkin", "shishkin12"],
)
@pytest.mark.parametrize("problem", ["ones", "varying", "constant-solution"])
def test_matches_dense_oracle(mesh, problem):
    spec = get_problem(problem, 1e-2)
    A, rhs = assemble(mesh, mesh, spec)
    dense, f = dense_assembly(mesh, mesh, spec)
    assert np.array_equal(A.to_dense(), dense)
    assert np.array_equal(rhs, f)


def test_symmetric_random_probe():
    mesh = uniform_mesh(8)
    A, _ = assemble(mesh, mesh, get_problem("ones", 1e-2))
    dense, _ = dense_assembly(mesh, mesh, get_problem("ones", 1e-2))
    rng = np.random.default_rng(7)
    x, y = rng.standard_normal((2, A.n))
    assert y @ (A.to_dense() @ x) == pytest.approx(x @ (dense @ y), rel=1e-14)
    np.testing.assert_array_equal(A.to_dense(), A.to_dense().T)


@settings(max_examples=40, deadline=None)
@given(q=st.integers(1, 6), eps=st.floats(1e-8, 1.0), shishkin=st.booleans())
def test_sign_structure_and_row_sums(q, eps, shishkin):
    N = 4 * q
    mesh = shishkin_mesh(N, eps) if shishkin else uniform_mesh(N)
    spec = get_problem("ones", eps)
    A, _ = assemble(mesh, mesh, spec)
    dense = A.to_dense()
    off = dense - np.diag(np.diag(dense))
    assert np.all(np.diag(dense) > 0)
    assert np.all(off <= 0)
    assert np.count_nonzero(dense, axis=1).max() <= 5
    # putting the boundary legs back, each row sums to hbar*kbar*b >= hbar*kbar*beta^2
    ones = np.ones(A.n)
    legs = assemble(mesh, mesh, ProblemSpec(eps, b=spec.b, f=lambda x, y: 0 * x, g=lambda x, y: 1 + 0 * x))[1]
    hb, kb = np.meshgrid(mesh.half_sums, mesh.half_sums)
    row_sums = dense @ ones - legs
    np.testing.assert_allclose(row_sums, (hb * kb).ravel(), rtol=1e-9, atol=1e-9 * eps**2)


def test_reaction_coefficient_checked():
    mesh = uniform_mesh(4)
    bad = ProblemSpec(1e-2, b=lambda x, y: x - 0.5)
    with pytest.raises(ModelViolation):
        assemble(mesh, mesh, bad)
    low = ProblemSpec(1e-2, beta=2.0, b=lambda x, y: 1.0 + 0 * x)
    with pytest.raises(ModelViolation):
        assemble(mesh, mesh, low)


def test_mismatched_meshes():
    with pytest.raises(InvalidArgument):
        assemble(uniform_mesh(4), uniform_mesh(8), get_problem("ones", 1.0))


def test_matrix_market_header_and_single_entry(tmp_path):
    mesh = uniform_mesh(2)
    A, _ = assemble(mesh, mesh, get_problem("ones", 1.0))
    path = tmp_path / "a.mtx"
    export_matrix_market(A, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real symmetric"
    data = [ln for ln in lines if not ln.startswith("%")]
    assert data[0] == "1 1 1"
    assert len(data) == 2


@pytest.mark.parametrize("eps", [1e-2, 1e-150])
def test_matrix_market_round_trip(tmp_path, eps):
    mesh = shishkin_mesh(8, eps)
    A, _ = assemble(mesh, mesh, get_problem("varying", eps))
    path = tmp_path / "a.mtx"
    export_matrix_market(A, path)
    back = BandedSymmetricMatrix(import_matrix_market(path))
    assert back == A


def test_from_dense_round_trip():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((6, 6))
    M = M + M.T
    M[np.abs(np.subtract.outer(range(6), range(6))) > 2] = 0
    B = BandedSymmetricMatrix.from_dense(M)
    assert B.bandwidth == 2
    assert np.array_equal(B.to_dense(), M)
    np.testing.assert_allclose(B.matvec(np.arange(6.0)), M @ np.arange(6.0))
