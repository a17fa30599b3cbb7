"""Small numeric kernel: sparse bilinear forms, dense eigenvalues, FD Jacobians."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np


class EigenSolverError(RuntimeError):
    """The dense eigensolver failed to converge or was given a bad matrix."""


class SparseBilinear:
    """Sparse real matrix stored as (row, col, value) triples.

    Used for the sequence-form payoff arrays, where only pairs of sequences
    that jointly reach a terminal node carry a value.
    """

    def __init__(self, triples: Iterable[tuple[int, int, float]], shape: tuple[int, int]):
        triples = list(triples)
        nrows, ncols = shape
        if nrows <= 0 or ncols <= 0:
            raise ValueError(f"shape must be positive, got {shape}")
        seen = set()
        for r, c, _ in triples:
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise ValueError(f"triple index ({r}, {c}) outside shape {shape}")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry at ({r}, {c})")
            seen.add((r, c))
        self.shape = (nrows, ncols)
        self.rows = np.array([t[0] for t in triples], dtype=np.intp)
        self.cols = np.array([t[1] for t in triples], dtype=np.intp)
        self.values = np.array([t[2] for t in triples], dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("payoff entries must be finite")

    def __len__(self) -> int:
        return len(self.values)

    def triples(self) -> list[tuple[int, int, float]]:
        return [(int(r), int(c), float(v)) for r, c, v in zip(self.rows, self.cols, self.values)]

    def _check(self, left: np.ndarray | None, right: np.ndarray | None) -> None:
        if left is not None and left.shape != (self.shape[0],):
            raise ValueError(f"left vector has shape {left.shape}, expected ({self.shape[0]},)")
        if right is not None and right.shape != (self.shape[1],):
            raise ValueError(f"right vector has shape {right.shape}, expected ({self.shape[1]},)")

    def matvec(self, right) -> np.ndarray:
        """Return ``U @ right`` as a dense row-space vector."""
        right = np.asarray(right, dtype=float)
        self._check(None, right)
        return np.bincount(self.rows, weights=self.values * right[self.cols], minlength=self.shape[0])

    def rmatvec(self, left) -> np.ndarray:
        """Return ``left @ U`` as a dense column-space vector."""
        left = np.asarray(left, dtype=float)
        self._check(left, None)
        return np.bincount(self.cols, weights=self.values * left[self.rows], minlength=self.shape[1])

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.values
        return out

    def shifted(self, c: float) -> "SparseBilinear":
        return SparseBilinear(
            [(r, col, v + c) for r, col, v in self.triples()], self.shape
        )


def bilinear(U: SparseBilinear, left, right) -> float:
    """``left^T U right``, summed in triple-list order."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    U._check(left, right)
    total = 0.0
    for term in left[U.rows] * U.values * right[U.cols]:
        total += term
    return float(total)


def eigenvalues(A) -> np.ndarray:
    """Full spectrum of a dense real square matrix (with multiplicity).

    Delegates to LAPACK ``geev`` (balancing, Hessenberg reduction and shifted
    QR) through :func:`numpy.linalg.eigvals`; failures surface as
    :class:`EigenSolverError` instead of a silently wrong answer.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise EigenSolverError(f"eigenvalues need a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        bad = np.argwhere(~np.isfinite(A))[0]
        raise EigenSolverError(f"non-finite entry at {tuple(int(i) for i in bad)} in {A.shape[0]}x{A.shape[1]} matrix")
    try:
        return np.linalg.eigvals(A).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"eigenvalue iteration did not converge for {A.shape[0]}x{A.shape[1]} matrix: {exc}"
        ) from exc


def sort_spectrum(values) -> np.ndarray:
    """Sort by real part descending, ties by imaginary part descending."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((-values.imag, -values.real))
    return values[order]


def finite_difference_jacobian(f: Callable[[np.ndarray], np.ndarray], x0, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``f`` at ``x0``, one column per coordinate."""
    x0 = np.asarray(x0, dtype=float)
    f0 = np.asarray(f(x0), dtype=float)
    jac = np.empty((f0.size, x0.size))
    for j in range(x0.size):
        step = np.zeros_like(x0)
        step[j] = h
        fp = np.asarray(f(x0 + step), dtype=float)
        fm = np.asarray(f(x0 - step), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise FloatingPointError(f"non-finite sample while perturbing coordinate {j}")
        jac[:, j] = (fp - fm) / (2 * h)
    return jac
