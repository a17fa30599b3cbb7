import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from seqdyn.numerics import (
    EigenSolverError,
    SparseBilinear,
    bilinear,
    eigenvalues,
    finite_difference_jacobian,
    sort_spectrum,
)


def char_poly_roots(A, dps=60):
    """Eigenvalues via Faddeev-LeVerrier coefficients and mpmath.polyroots (no LAPACK)."""
    with mpmath.workdps(dps):
        n = len(A)
        M = mpmath.matrix([[mpmath.mpf(float(v)) for v in row] for row in A])
        Mk = mpmath.zeros(n, n)
        coeffs = [mpmath.mpf(1)]
        c = mpmath.mpf(1)
        for k in range(1, n + 1):
            Mk = M * Mk + c * mpmath.eye(n)
            AM = M * Mk
            c = -sum(AM[i, i] for i in range(n)) / k
            coeffs.append(c)
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * dps)
        return np.array([complex(r) for r in roots])


def match_spectra(a, b):
    """Largest distance from a point of either spectrum to the closest point of the other."""
    d = np.abs(a[:, None] - b[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# -- sparse payoff arrays -----------------------------------------------------

def test_sparse_matches_dense():
    rng = np.random.default_rng(0)
    dense = np.zeros((5, 4))
    triples = []
    for i, j in [(0, 0), (1, 3), (4, 2), (2, 1), (4, 0)]:
        v = rng.normal()
        dense[i, j] = v
        triples.append((i, j, v))
    U = SparseBilinear(triples, (5, 4))
    x, y = rng.random(5), rng.random(4)
    np.testing.assert_allclose(U.toarray(), dense)
    np.testing.assert_allclose(U.matvec(y), dense @ y)
    np.testing.assert_allclose(U.rmatvec(x), x @ dense)
    assert bilinear(U, x, y) == pytest.approx(x @ dense @ y, rel=1e-14)
    assert len(U) == 5


@pytest.mark.parametrize(
    "triples, shape",
    [
        ([(0, 0, 1.0), (0, 0, 2.0)], (2, 2)),
        ([(2, 0, 1.0)], (2, 2)),
        ([(0, -1, 1.0)], (2, 2)),
        ([(0, 0, float("nan"))], (2, 2)),
    ],
)
def test_sparse_rejects_bad_triples(triples, shape):
    with pytest.raises(ValueError):
        SparseBilinear(triples, shape)


def test_sparse_shape_mismatch():
    U = SparseBilinear([(0, 0, 1.0)], (2, 3))
    with pytest.raises(ValueError):
        U.matvec(np.ones(2))
    with pytest.raises(ValueError):
        U.rmatvec(np.ones(3))


def test_shifted_adds_constant_to_stored_entries():
    U = SparseBilinear([(0, 1, 2.0), (1, 0, -1.0)], (2, 2))
    V = U.shifted(3.0)
    assert V.triples() == [(0, 1, 5.0), (1, 0, 2.0)]


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, 6, elements=st.floats(-5, 5)),
    arrays(np.float64, 6, elements=st.floats(-5, 5)),
    arrays(np.float64, 4, elements=st.floats(-5, 5)),
    st.floats(-3, 3),
)
def test_bilinear_is_linear_in_left_argument(a, b, y, c):
    rng = np.random.default_rng(7)
    triples = [(i, j, float(rng.normal())) for i in range(6) for j in range(4) if rng.random() < 0.5]
    U = SparseBilinear(triples, (6, 4))
    lhs = bilinear(U, a + c * b, y)
    rhs = bilinear(U, a, y) + c * bilinear(U, b, y)
    assert lhs == pytest.approx(rhs, abs=1e-9)


# -- eigenvalues --------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_eigenvalues_match_characteristic_polynomial_oracle(seed):
    A = np.random.default_rng(seed).normal(size=(20, 20))
    oracle = char_poly_roots(A)
    assert match_spectra(eigenvalues(A), oracle) < 1e-8


def test_rotation_has_imaginary_pair():
    ev = sort_spectrum(eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]])))
    np.testing.assert_allclose(ev, [1j, -1j], atol=1e-15)


def test_triangular_spectrum_is_diagonal():
    A = np.triu(np.arange(1.0, 17.0).reshape(4, 4))
    np.testing.assert_allclose(sort_spectrum(eigenvalues(A)).real, [16, 11, 6, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spectrum_invariant_under_permutation_similarity(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(8, 8))
    P = np.eye(8)[rng.permutation(8)]
    assert match_spectra(eigenvalues(A), eigenvalues(P @ A @ P.T)) < 1e-9


@pytest.mark.parametrize(
    "bad",
    [np.ones((2, 3)), np.array([[1.0, np.inf], [0.0, 1.0]]), np.array([[np.nan]]), np.ones(3)],
)
def test_eigenvalues_rejects_bad_input(bad):
    with pytest.raises((ValueError, EigenSolverError)):
        eigenvalues(bad)


def test_solver_failure_is_reported(monkeypatch):
    def broken(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigvals", broken)
    with pytest.raises(EigenSolverError):
        eigenvalues(np.eye(2))


def test_sort_spectrum_orders_real_then_imaginary():
    got = sort_spectrum(np.array([1 - 1j, 2 + 0j, 1 + 1j, -3 + 0j]))
    np.testing.assert_array_equal(got, [2, 1 + 1j, 1 - 1j, -3])


# -- finite differences -------------------------------------------------------

def test_finite_difference_jacobian_of_known_map():
    def f(v):
        x, y = v
        return np.array([x * x * y, np.sin(x) + y**3])

    x0 = np.array([0.7, -1.3])
    exact = np.array([[2 * x0[0] * x0[1], x0[0] ** 2], [np.cos(x0[0]), 3 * x0[1] ** 2]])
    np.testing.assert_allclose(finite_difference_jacobian(f, x0), exact, rtol=1e-8, atol=1e-9)


def test_finite_difference_flags_non_finite_output():
    with np.errstate(invalid="ignore"), pytest.raises(FloatingPointError, match="coordinate 1"):
        finite_difference_jacobian(lambda v: np.log(v), np.array([1.0, 5e-7]))
