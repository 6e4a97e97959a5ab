"""Eigen-analysis of superoperators.

Full nonsymmetric spectra with paired left/right eigenvectors,
clustering of the peripheral part (eigenvalues of unit modulus), and
rank-revealing eigenspace / range splits.

Numerical strategy: eigenvalues within ``merge`` distance (1e-7) of
each other are treated as one cluster, and for peripheral clusters the
right and left eigenvector sets are recomputed jointly as the small
singular directions of (S - lambda I) and its adjoint. This sidesteps
the ill-conditioned individual eigenvectors an eigensolver returns for
numerically split degenerate eigenvalues, and is well-posed exactly on
the peripheral spectrum, where valid quantum operations admit no
nontrivial Jordan blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .channels import KrausMap, _coerce_superoperator, classify
from .errors import PreconditionError, TheoremViolationError
from .operators import devectorize

DEFAULT_PERIPHERAL_TOL = 1e-7
# eigenvalues closer than this are considered numerically identical
CLUSTER_MERGE_TOL = 1e-7


@dataclass(frozen=True)
class PeripheralCluster:
    """One eigenvalue of unit modulus with its multiplicity."""

    eigenvalue: complex          # representative, snapped to |lambda| = 1
    indices: tuple[int, ...]     # positions in the sorted eigenvalue list
    multiplicity: int


@dataclass
class SpectralData:
    """Sorted spectrum of a superoperator with eigenvector pairs.

    ``right_operators[i]`` / ``left_operators[i]`` belong to
    ``eigenvalues[i]``; on peripheral clusters they are biorthonormal,
    Tr(L_i^dag R_j) = delta_ij.
    """

    eigenvalues: np.ndarray
    right_operators: list[np.ndarray]
    left_operators: list[np.ndarray]
    peripheral_clusters: list[PeripheralCluster]
    tol_peripheral: float
    dim: int = field(default=0)

    def peripheral_indices(self) -> set[int]:
        out: set[int] = set()
        for cluster in self.peripheral_clusters:
            out.update(cluster.indices)
        return out

    def subperipheral_gap(self) -> float:
        """Largest non-peripheral eigenvalue modulus (0 if none)."""
        peripheral = self.peripheral_indices()
        rest = [abs(w) for i, w in enumerate(self.eigenvalues) if i not in peripheral]
        return max(rest, default=0.0)


@dataclass
class SubspaceBasis:
    """Linearly independent operators spanning a subspace of B(H)."""

    operators: list[np.ndarray]
    orthonormal_under: str = "hs"   # "hs" | "rho" | "none"

    @property
    def dimension(self) -> int:
        return len(self.operators)

    def matrix(self) -> np.ndarray:
        """Stack the vectorized elements as columns (empty: 0 columns)."""
        if not self.operators:
            return np.zeros((0, 0), dtype=complex)
        return np.column_stack([op.reshape(-1, order="F") for op in self.operators])


def _sorted_eig(sop: np.ndarray):
    """Eigendecomposition sorted by (descending modulus, ascending phase)."""
    try:
        w, vl, vr = scipy.linalg.eig(sop, left=True, right=True)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise TheoremViolationError(f"eigendecomposition failed: {exc}") from exc
    phase = np.mod(np.angle(w), 2 * np.pi)
    order = np.lexsort((phase, -np.abs(w)))
    return w[order], vl[:, order], vr[:, order]


def _cluster_indices(eigenvalues: np.ndarray, merge_tol: float) -> list[list[int]]:
    """Single-linkage grouping of eigenvalues within merge_tol."""
    n = len(eigenvalues)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigenvalues[i] - eigenvalues[j]) < merge_tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=min)


def _null_pair(sop: np.ndarray, eigenvalue: complex, multiplicity: int):
    """Joint right/left null bases of (S - lambda I) from one SVD.

    The ``multiplicity`` smallest singular directions are taken; right
    singular vectors span the eigenspace, left singular vectors span
    the adjoint's eigenspace for conj(lambda).
    """
    shifted = sop - eigenvalue * np.eye(sop.shape[0])
    u, s, vh = np.linalg.svd(shifted)
    right = vh[len(s) - multiplicity:].conj().T
    left = u[:, len(s) - multiplicity:]
    return right, left, s


def _biorthonormalize(right: np.ndarray, left: np.ndarray) -> np.ndarray:
    """Rescale the left family so that left^dag right = I.

    Raises when the cluster Gram matrix is numerically singular, which
    indicates a nontrivial Jordan block or a misclustered eigenvalue.
    """
    gram = left.conj().T @ right
    sigma = np.linalg.svd(gram, compute_uv=False)
    if sigma[-1] < 1e-10 * max(sigma[0], 1e-300):
        raise TheoremViolationError(
            "peripheral cluster Gram matrix is numerically singular "
            f"(singular values range {sigma[-1]:.2e} .. {sigma[0]:.2e}); "
            "eigenvalue clustering is unreliable or the map has a defective "
            "peripheral eigenvalue"
        )
    return left @ np.linalg.inv(gram).conj().T


def _fix_phases(right: np.ndarray, left: np.ndarray):
    """Rotate each column pair so the right vector's largest entry is real positive.

    Unit-modulus rotations applied to both members preserve
    biorthonormality.
    """
    for col in range(right.shape[1]):
        pivot = np.argmax(np.abs(right[:, col]))
        entry = right[pivot, col]
        if abs(entry) > 0:
            rot = np.conj(entry) / abs(entry)
            right[:, col] *= rot
            left[:, col] *= rot
    return right, left


def full_spectrum(channel_or_sop, tol_peripheral: float = DEFAULT_PERIPHERAL_TOL) -> SpectralData:
    """Complete spectral decomposition with peripheral clustering.

    Accepts a :class:`KrausMap` or a raw superoperator matrix. Left and
    right eigenvectors are biorthonormalized per eigenvalue cluster
    wherever the cluster Gram matrix allows it; peripheral clusters are
    rebuilt from joint null spaces (see module docstring) and failure
    there is an error rather than a silent degradation.
    """
    sop, dim = _coerce_superoperator(channel_or_sop)
    w, vl, vr = _sorted_eig(sop)

    n = len(w)
    right_cols = np.empty((n, n), dtype=complex)
    left_cols = np.empty((n, n), dtype=complex)
    clusters: list[PeripheralCluster] = []

    for indices in _cluster_indices(w, CLUSTER_MERGE_TOL):
        rep = complex(np.mean(w[indices]))
        m = len(indices)
        if abs(1.0 - abs(rep)) <= tol_peripheral:
            rep /= abs(rep)
            right, left, _ = _null_pair(sop, rep, m)
            left = _biorthonormalize(right, left)
            right, left = _fix_phases(right, left)
            clusters.append(
                PeripheralCluster(rep, tuple(indices), m)
            )
        else:
            right = vr[:, indices] / np.linalg.norm(vr[:, indices], axis=0)
            left = vl[:, indices]
            gram = left.conj().T @ right
            sigma = np.linalg.svd(gram, compute_uv=False)
            if sigma[-1] > 1e-10 * sigma[0]:
                left = left @ np.linalg.inv(gram).conj().T
            # else: (near-)defective decaying cluster; keep raw vectors
        for k, idx in enumerate(indices):
            right_cols[:, idx] = right[:, k]
            left_cols[:, idx] = left[:, k]

    clusters.sort(key=lambda c: np.mod(np.angle(c.eigenvalue), 2 * np.pi))
    return SpectralData(
        eigenvalues=w,
        right_operators=[devectorize(right_cols[:, i], dim) for i in range(n)],
        left_operators=[devectorize(left_cols[:, i], dim) for i in range(n)],
        peripheral_clusters=clusters,
        tol_peripheral=tol_peripheral,
        dim=dim,
    )


def peripheral_spectrum(channel: KrausMap, tol: float = DEFAULT_PERIPHERAL_TOL):
    """Unit-modulus eigenvalues with multiplicities, as (lambda, d) pairs.

    Only valid for trace non-increasing maps, for which the spectral
    radius is guaranteed to be at most 1; a radius beyond 1 + tol is
    reported as a theorem violation (numerical trouble or a map that is
    not what it claims).
    """
    if not classify(channel).trace_nonincreasing:
        raise PreconditionError(
            "peripheral spectrum is only defined for trace non-increasing maps"
        )
    data = full_spectrum(channel, tol_peripheral=tol)
    radius = float(np.max(np.abs(data.eigenvalues)))
    if radius > 1.0 + max(tol, 1e-8):
        raise TheoremViolationError(
            f"spectral radius {radius:.12f} exceeds 1 beyond tolerance"
        )
    return [(c.eigenvalue, c.multiplicity) for c in data.peripheral_clusters]


def _match_eigenvalue(sop: np.ndarray, lam: complex, tol: float) -> tuple[complex, int]:
    """Snap lam onto the computed spectrum, returning (representative, multiplicity)."""
    w = np.linalg.eigvals(sop)
    match_tol = max(tol, CLUSTER_MERGE_TOL)
    dists = np.abs(w - lam)
    if dists.min() > match_tol:
        raise PreconditionError(
            f"{lam} is not an eigenvalue (closest is {w[dists.argmin()]}, "
            f"distance {dists.min():.3e} > {match_tol:.1e})"
        )
    members = w[dists <= match_tol]
    return complex(np.mean(members)), len(members)


def eigenspace_basis(channel_or_sop, lam: complex, tol: float = DEFAULT_PERIPHERAL_TOL) -> SubspaceBasis:
    """Orthonormal basis of Ker(P - lambda I) at tolerance resolution.

    Singular directions of (S - lambda I) with sigma <= 10 * tol are
    kept, so every element X satisfies ||P(X) - lambda X|| <= 10 * tol.
    Directions belonging to a Jordan chain fail that bound and are
    dropped, which is what makes the kernel/range split detect
    defectiveness.
    """
    sop, dim = _coerce_superoperator(channel_or_sop)
    rep, m = _match_eigenvalue(sop, lam, tol)
    right, _, s = _null_pair(sop, rep, m)
    keep = [k for k in range(m) if s[len(s) - m + k] <= 10 * tol]
    if not keep:
        raise PreconditionError(
            f"eigenvalue {lam}: no null direction within residual 10*tol"
        )
    return SubspaceBasis([devectorize(right[:, k], dim) for k in keep], "hs")


def range_basis(channel_or_sop, lam: complex, tol: float = DEFAULT_PERIPHERAL_TOL) -> SubspaceBasis:
    """Orthonormal basis of Ran(P - lambda I) at tolerance resolution."""
    sop, dim = _coerce_superoperator(channel_or_sop)
    u, s, _ = np.linalg.svd(sop - lam * np.eye(sop.shape[0]))
    cols = [u[:, k] for k in range(len(s)) if s[k] > 10 * tol]
    return SubspaceBasis([devectorize(c, dim) for c in cols], "hs")


def ker_ran_intersection_dim(channel_or_sop, lam: complex, tol: float = DEFAULT_PERIPHERAL_TOL) -> int:
    """dim(Ker ∩ Ran) of (P - lambda I) via the combined-rank formula.

    For eigenvalues of unit modulus of a genuine quantum operation the
    result must be 0; a positive value flags Jordan structure.
    """
    kernel = eigenspace_basis(channel_or_sop, lam, tol)
    ran = range_basis(channel_or_sop, lam, tol)
    k, r = kernel.dimension, ran.dimension
    if k == 0 or r == 0:
        return 0
    combined = np.column_stack([kernel.matrix(), ran.matrix()])
    sigma = np.linalg.svd(combined, compute_uv=False)
    # columns are unit vectors: 1e-7 separates alignment noise (<=1e-8)
    # from genuine principal angles (>=1e-3 for the ensembles used)
    rank = int(np.sum(sigma > 1e-7))
    return k + r - rank
