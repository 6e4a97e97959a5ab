"""Complex matrix algebra on the operator space B(H).

Conventions used project-wide:

* operators are plain complex ``numpy`` arrays of shape (dim, dim);
* ``vectorize`` is column-stacking, so vec(A X B) = (B^T kron A) vec(X)
  and the 2-norm of vec(X) equals the Hilbert-Schmidt norm of X;
* the weighted inner product <A, B>_rho = Tr(A^dag B rho^-1) is defined
  for strictly positive rho only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, PreconditionError

# Absolute tolerance for hermiticity / positivity decisions on
# unit-normalized operators; rank decisions use a relative cutoff.
DEFAULT_POSITIVITY_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def matrix_unit(dim: int, i: int, j: int) -> np.ndarray:
    """|i><j| in the computational basis (0-indexed)."""
    unit = np.zeros((dim, dim), dtype=complex)
    unit[i, j] = 1.0
    return unit


def as_operator(entries, name: str = "operator") -> np.ndarray:
    """Validate and return a square, finite complex matrix."""
    mat = np.asarray(entries, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise PreconditionError(
            f"{name}: expected a square matrix, got shape {mat.shape}"
        )
    if not np.all(np.isfinite(mat.real)) or not np.all(np.isfinite(mat.imag)):
        raise PreconditionError(f"{name}: entries must be finite")
    return mat


def _check_same_dim(*mats: np.ndarray) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatchError(f"operator dimensions differ: {sorted(dims)}")
    return dims.pop()


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt scalar product Tr(a^dag b)."""
    _check_same_dim(a, b)
    return complex(np.trace(a.conj().T @ b))


def hs_norm(a: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(a))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


@dataclass(frozen=True)
class HermitianReport:
    """Positivity classification of an operator at a given tolerance."""

    is_hermitian: bool
    min_eigenvalue: float
    is_positive_semidefinite: bool
    is_strictly_positive: bool
    tolerance_used: float


def positivity_report(x: np.ndarray, tol: float = DEFAULT_POSITIVITY_TOL) -> HermitianReport:
    """Classify hermiticity and positivity via the Hermitian part's spectrum.

    Asymmetry beyond ``tol`` marks the input non-Hermitian and clears
    every positivity flag; the minimum eigenvalue of the Hermitian part
    is reported regardless.
    """
    x = as_operator(x)
    herm = bool(np.max(np.abs(x - x.conj().T)) <= tol)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(x)).min())
    return HermitianReport(
        is_hermitian=herm,
        min_eigenvalue=min_eig,
        is_positive_semidefinite=herm and min_eig >= -tol,
        is_strictly_positive=herm and min_eig > tol,
        tolerance_used=tol,
    )


def inverse_of_positive(rho: np.ndarray, tol: float = DEFAULT_POSITIVITY_TOL) -> np.ndarray:
    """Invert a strictly positive operator through its eigendecomposition.

    Rejects inputs whose smallest eigenvalue does not clear the
    strict-positivity tolerance instead of amplifying them into a wild
    inverse.
    """
    rho = as_operator(rho, "rho")
    report = positivity_report(rho, tol)
    if not report.is_strictly_positive:
        raise PreconditionError(
            "rho is not strictly positive "
            f"(min eigenvalue {report.min_eigenvalue:.3e}, tol {tol:.1e})"
        )
    w, v = np.linalg.eigh(hermitian_part(rho))
    return (v / w) @ v.conj().T


def rho_inner(a: np.ndarray, b: np.ndarray, rho: np.ndarray,
              tol: float = DEFAULT_POSITIVITY_TOL) -> complex:
    """Weighted scalar product <a, b>_rho = Tr(a^dag b rho^-1).

    Reduces to ``hs_inner`` for rho = I. ``rho`` must be strictly
    positive.
    """
    _check_same_dim(a, b, as_operator(rho, "rho"))
    return complex(np.trace(a.conj().T @ b @ inverse_of_positive(rho, tol)))


def vectorize(x: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a dim^2 vector."""
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def devectorize(vec: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if dim is None:
        dim = int(round(np.sqrt(vec.size)))
    if dim * dim != vec.size:
        raise PreconditionError(
            f"vector of length {vec.size} is not a stacked {dim}x{dim} matrix"
        )
    return vec.reshape((dim, dim), order="F")


def rho_orthonormalize(ops, rho: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> list[np.ndarray]:
    """Gram-Schmidt a family of operators under the rho-inner product.

    Returns a rho-orthonormal list spanning the input; inputs that are
    linearly dependent on their predecessors (relative rho-norm below
    ``tol`` after projection) are dropped, so the output length is the
    rank of the family.
    """
    rho_inv = inverse_of_positive(as_operator(rho, "rho"))

    def inner(a, b):
        return complex(np.trace(a.conj().T @ b @ rho_inv))

    basis: list[np.ndarray] = []
    for op in ops:
        op = as_operator(op)
        original_norm = np.sqrt(abs(inner(op, op)))
        if original_norm == 0.0:
            continue
        # two Gram-Schmidt passes keep the output orthogonal to ~1e-15
        for _ in range(2):
            for e in basis:
                op = op - e * inner(e, op)
        norm = np.sqrt(abs(inner(op, op)))
        if norm <= tol * original_norm:
            continue
        basis.append(op / norm)
    return basis
