"""Attractor spaces of iterated quantum operations and their dual bases.

Three independent routes to the same structure:

* spectral: peripheral right eigenvectors with duals taken from the
  biorthonormalized left eigenvectors. Needs nothing beyond trace
  non-increasingness and is the default.
* rho formula: when a strictly positive rho with P(rho) <= rho is
  known, the dual of an eigenvector X is X rho^-1 / Tr(X^dag X rho^-1)
  after rho-orthonormalizing degenerate clusters.
* algebraic: for each unit-modulus eigenvalue lambda, the solution
  space of the Kraus-operator commutation system
      A_j X rho^-1 = lambda X rho^-1 A_j          (and its adjoint)
      A_j rho^-1 X = lambda rho^-1 X A_j          (and its adjoint)
  contains the eigenspace, and equals it whenever P(rho) = rho.

``verify_structure`` measures how well a computed basis satisfies the
whole set of relations and is the backbone of the CLI verify command.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import KrausMap, classify
from .errors import DimensionMismatchError, PreconditionError
from .invariants import check_subinvariant
from .operators import (
    DEFAULT_RANK_TOL,
    as_operator,
    hs_norm,
    identity,
    inverse_of_positive,
    rho_orthonormalize,
    vectorize,
)
from .spectral import (
    DEFAULT_PERIPHERAL_TOL,
    SpectralData,
    SubspaceBasis,
    full_spectrum,
    range_basis,
)

ROUTE_SPECTRAL = "spectral_left_eigenvectors"
ROUTE_RHO = "rho_formula"
ROUTE_ALGEBRAIC = "algebraic"


@dataclass(frozen=True)
class AttractorEntry:
    """One basis element of Attr(P): eigenvalue, eigenvector, dual."""

    eigenvalue: complex
    vector: np.ndarray
    dual: np.ndarray
    index: int


@dataclass
class AttractorBasis:
    """Biorthonormal basis of the attractor space, Tr(dual_a^dag X_b) = delta_ab."""

    entries: list[AttractorEntry]
    route: str
    rho: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def eigenvalues(self) -> list[complex]:
        """Distinct peripheral eigenvalues in stored order."""
        seen: list[complex] = []
        for e in self.entries:
            if not any(abs(e.eigenvalue - s) < 1e-9 for s in seen):
                seen.append(e.eigenvalue)
        return seen

    def cluster(self, lam: complex, tol: float = 1e-7) -> list[AttractorEntry]:
        return [e for e in self.entries if abs(e.eigenvalue - lam) < tol]

    def biorthonormality_defect(self) -> float:
        """Max deviation of Tr(dual_a^dag X_b) from the identity matrix."""
        if not self.entries:
            return 0.0
        duals = np.column_stack([vectorize(e.dual) for e in self.entries])
        vecs = np.column_stack([vectorize(e.vector) for e in self.entries])
        gram = duals.conj().T @ vecs
        return float(np.max(np.abs(gram - np.eye(len(self.entries)))))


def _basis_from_spectrum(data: SpectralData) -> AttractorBasis:
    entries = []
    for cluster in data.peripheral_clusters:
        for i, idx in enumerate(cluster.indices):
            entries.append(
                AttractorEntry(
                    eigenvalue=cluster.eigenvalue,
                    vector=data.right_operators[idx],
                    dual=data.left_operators[idx],
                    index=i,
                )
            )
    return AttractorBasis(entries=entries, route=ROUTE_SPECTRAL)


def attractor_basis(channel: KrausMap, tol: float = DEFAULT_PERIPHERAL_TOL) -> AttractorBasis:
    """Attractor basis and duals via the spectral route.

    The duals are peripheral left eigenvectors, which are automatically
    orthogonal to every decaying (generalized) eigenspace, so the
    projection they induce annihilates all transients.
    """
    if not classify(channel).trace_nonincreasing:
        raise PreconditionError("attractor basis requires a trace non-increasing map")
    return _basis_from_spectrum(full_spectrum(channel, tol_peripheral=tol))


def attractor_projector(basis: AttractorBasis, x: np.ndarray) -> np.ndarray:
    """Project onto Attr(P): sum_a X_a Tr(dual_a^dag x)."""
    x = as_operator(x)
    if basis.entries and basis.entries[0].vector.shape != x.shape:
        raise DimensionMismatchError(
            f"operator shape {x.shape} does not match basis "
            f"shape {basis.entries[0].vector.shape}"
        )
    out = np.zeros_like(x)
    for e in basis.entries:
        out += e.vector * np.trace(e.dual.conj().T @ x)
    return out


def projector_matrix(basis: AttractorBasis, dim: int | None = None) -> np.ndarray:
    """Matrix of the attractor projection on vectorized operators.

    Pi = sum_a vec(X_a) vec(dual_a)^dag; ``dim`` is only needed for an
    empty basis (a map with no peripheral spectrum projects to zero).
    """
    if basis.entries:
        dim = basis.entries[0].vector.shape[0]
    elif dim is None:
        raise PreconditionError("empty basis: pass dim explicitly")
    pi = np.zeros((dim * dim, dim * dim), dtype=complex)
    for e in basis.entries:
        pi += np.outer(vectorize(e.vector), vectorize(e.dual).conj())
    return pi


def _check_eigenoperator(channel: KrausMap, x: np.ndarray, lam: complex, tol: float):
    residual = hs_norm(channel.apply(x) - lam * x)
    if residual > 100 * tol * max(hs_norm(x), 1e-300):
        raise PreconditionError(
            f"operator is not an eigenvector for {lam} "
            f"(residual {residual:.3e})"
        )


def dual_basis_rho(channel: KrausMap, pairs, rho: np.ndarray,
                   tol: float = DEFAULT_PERIPHERAL_TOL) -> AttractorBasis:
    """Duals from a subinvariant strictly positive rho.

    ``pairs`` is either an :class:`AttractorBasis` or an iterable of
    (eigenvalue, eigenvector) pairs. Degenerate clusters are
    rho-orthonormalized first (which rescales and mixes the vectors of
    a cluster, so the rebuilt pairs are returned alongside the duals),
    then each dual is X rho^-1 / Tr(X^dag X rho^-1).
    """
    rho = as_operator(rho, "rho")
    rho_inv = inverse_of_positive(rho)
    if not check_subinvariant(channel, rho):
        raise PreconditionError("rho is not subinvariant: P(rho) <= rho fails")
    if isinstance(pairs, AttractorBasis):
        pairs = [(e.eigenvalue, e.vector) for e in pairs.entries]
    else:
        pairs = [(complex(lam), as_operator(x)) for lam, x in pairs]

    groups: list[tuple[complex, list[np.ndarray]]] = []
    for lam, x in pairs:
        _check_eigenoperator(channel, x, lam, tol)
        for glam, members in groups:
            if abs(glam - lam) < 1e-9:
                members.append(x)
                break
        else:
            groups.append((lam, [x]))

    entries = []
    for lam, members in groups:
        if len(members) > 1:
            # degenerate cluster: the formula needs rho-orthogonal vectors
            ortho = rho_orthonormalize(members, rho, DEFAULT_RANK_TOL)
            if len(ortho) != len(members):
                raise PreconditionError(
                    f"eigenvectors for {lam} are linearly dependent under the "
                    "rho inner product"
                )
        else:
            ortho = members
        for i, x in enumerate(ortho):
            scale = complex(np.trace(x.conj().T @ x @ rho_inv))
            if abs(scale) < 1e-12:
                raise PreconditionError(
                    "normalization trace vanishes; input is degenerate"
                )
            entries.append(
                AttractorEntry(
                    eigenvalue=lam,
                    vector=x,
                    dual=x @ rho_inv / scale,
                    index=i,
                )
            )
    return AttractorBasis(entries=entries, route=ROUTE_RHO, rho=rho)


def _commutation_system(channel: KrausMap, rho_inv: np.ndarray, lam: complex) -> np.ndarray:
    """Stack the four Kraus commutation families as one linear system on vec(X).

    Uses vec(A X B) = (B^T kron A) vec(X).
    """
    dim = channel.dim
    eye = identity(dim)
    blocks = []
    for a in channel.kraus:
        adag = a.conj().T
        blocks.append(np.kron(rho_inv.T, a) - lam * np.kron((rho_inv @ a).T, eye))
        blocks.append(np.kron(rho_inv.T, adag)
                      - np.conj(lam) * np.kron((rho_inv @ adag).T, eye))
        blocks.append(np.kron(eye, a @ rho_inv) - lam * np.kron(a.T, rho_inv))
        blocks.append(np.kron(eye, adag @ rho_inv)
                      - np.conj(lam) * np.kron(adag.T, rho_inv))
    return np.vstack(blocks)


def algebraic_attractor(channel: KrausMap, rho: np.ndarray, lam: complex,
                        tol: float = DEFAULT_PERIPHERAL_TOL) -> SubspaceBasis:
    """Solution space of the Kraus commutation system for one unit-modulus lambda.

    Contains Ker(P - lambda I) for any subinvariant strictly positive
    rho and coincides with it when P(rho) = rho.
    """
    rho = as_operator(rho, "rho")
    rho_inv = inverse_of_positive(rho)
    if not check_subinvariant(channel, rho):
        raise PreconditionError("rho is not subinvariant: P(rho) <= rho fails")
    if abs(abs(lam) - 1.0) > max(tol, 1e-7):
        raise PreconditionError(f"|lambda| = {abs(lam):.6f} is not on the unit circle")
    system = _commutation_system(channel, rho_inv, lam)
    _, s, vh = np.linalg.svd(system)
    # the relative cutoff needs an absolute floor: for maps that satisfy
    # the equations identically the whole system is roundoff dust, and
    # dust is never small relative to itself
    scale = max(1.0, max(np.linalg.norm(a) for a in channel.kraus)
                * np.linalg.norm(rho_inv))
    cutoff = max(DEFAULT_RANK_TOL * (s[0] if len(s) else 0.0), 1e-10 * scale)
    ops = [vh[k].conj().reshape((channel.dim, channel.dim), order="F")
           for k in range(len(s)) if s[k] <= cutoff]
    return SubspaceBasis(ops, "hs")


def attractor_basis_algebraic(channel: KrausMap, rho: np.ndarray,
                              tol: float = DEFAULT_PERIPHERAL_TOL) -> AttractorBasis:
    """Full attractor basis via the algebraic route.

    The unit-modulus eigenvalues are taken from the computed spectrum
    (the commutation system presumes lambda known); duals come from the
    rho formula. Intended for maps with a strictly positive fixed rho,
    where the algebraic space equals the eigenspace.
    """
    data = full_spectrum(channel, tol_peripheral=tol)
    pairs = []
    for cluster in data.peripheral_clusters:
        basis = algebraic_attractor(channel, rho, cluster.eigenvalue, tol)
        pairs.extend((cluster.eigenvalue, op) for op in basis.operators)
    built = dual_basis_rho(channel, pairs, rho, tol)
    return AttractorBasis(entries=built.entries, route=ROUTE_ALGEBRAIC, rho=built.rho)


@dataclass
class StructureEquationReport:
    """Residuals of the structure relations for a computed attractor basis.

    ``kraus_residuals`` holds the four commutation families, maximized
    over Kraus indices and basis entries; ``max_residual`` is their
    maximum. The remaining fields cover the adjoint-eigenvector and
    similarity relations, the weighted orthogonality statements, and
    the dimension comparison between the algebraic solution spaces and
    the eigenspaces.
    """

    kraus_residuals: dict = field(default_factory=dict)
    max_residual: float = 0.0
    dimension_match: bool = True
    dimensions: dict = field(default_factory=dict)
    adjoint_right_residual: float = 0.0
    adjoint_left_residual: float = 0.0
    similarity_residual: float = 0.0
    cross_eigenvalue_overlap: float = 0.0
    ker_ran_overlap: float = 0.0
    subinvariant_gap: float = 0.0
    rho2_residual: float = 0.0

    def overall_max(self) -> float:
        return max(
            self.max_residual,
            self.adjoint_right_residual,
            self.adjoint_left_residual,
            self.similarity_residual,
            self.cross_eigenvalue_overlap,
            self.ker_ran_overlap,
            self.rho2_residual,
        )

    def to_dict(self) -> dict:
        return {
            "kraus_residuals": dict(self.kraus_residuals),
            "max_residual": self.max_residual,
            "dimension_match": self.dimension_match,
            "dimensions": {str(k): list(v) for k, v in self.dimensions.items()},
            "adjoint_right_residual": self.adjoint_right_residual,
            "adjoint_left_residual": self.adjoint_left_residual,
            "similarity_residual": self.similarity_residual,
            "cross_eigenvalue_overlap": self.cross_eigenvalue_overlap,
            "ker_ran_overlap": self.ker_ran_overlap,
            "subinvariant_gap": self.subinvariant_gap,
            "rho2_residual": self.rho2_residual,
        }


def _normalized_rho_overlap(a: np.ndarray, b: np.ndarray, rho_inv: np.ndarray) -> float:
    """|<a, b>_rho| scaled by the rho-norms, i.e. a weighted cosine."""
    na = np.sqrt(abs(np.trace(a.conj().T @ a @ rho_inv)))
    nb = np.sqrt(abs(np.trace(b.conj().T @ b @ rho_inv)))
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.trace(a.conj().T @ b @ rho_inv)) / (na * nb))


def verify_structure(channel: KrausMap, rho: np.ndarray, basis: AttractorBasis,
                     tol: float = DEFAULT_PERIPHERAL_TOL,
                     rho2: np.ndarray | None = None) -> StructureEquationReport:
    """Evaluate every structure relation on a basis, reporting residuals.

    Checks, for each entry (lambda, X) of the basis:

    * P^dag(X rho^-1) = conj(lambda) X rho^-1 and the mirrored
      P^dag(rho^-1 X) = conj(lambda) rho^-1 X;
    * P(rho^-1 X rho) = lambda rho^-1 X rho;
    * the four Kraus commutation families;
    * rho-orthogonality between eigenspaces of distinct unit-modulus
      eigenvalues and between each eigenspace and its range;
    * optionally the two-sided family rho2 A_j X rho^-1 =
      lambda rho2 X rho^-1 A_j for a positive rho2 with
      P^dag(rho2) <= rho2 (rho2 = I reproduces the first Kraus family).

    Report-style: residuals are returned, never raised.
    """
    rho = as_operator(rho, "rho")
    rho_inv = inverse_of_positive(rho)
    if not check_subinvariant(channel, rho):
        raise PreconditionError("rho is not subinvariant: P(rho) <= rho fails")

    report = StructureEquationReport()
    shrink = rho - channel.apply(rho)
    gap = np.linalg.eigvalsh((shrink + shrink.conj().T) / 2)
    report.subinvariant_gap = float(max(0.0, -gap.min()))
    if rho2 is not None:
        rho2 = as_operator(rho2, "rho2")

    families = {
        "kraus_right": 0.0,
        "kraus_right_adjoint": 0.0,
        "kraus_left": 0.0,
        "kraus_left_adjoint": 0.0,
    }
    for e in basis.entries:
        lam, x = e.eigenvalue, e.vector / max(hs_norm(e.vector), 1e-300)
        xr = x @ rho_inv
        rx = rho_inv @ x
        report.adjoint_right_residual = max(
            report.adjoint_right_residual,
            hs_norm(channel.adjoint_apply(xr) - np.conj(lam) * xr),
        )
        report.adjoint_left_residual = max(
            report.adjoint_left_residual,
            hs_norm(channel.adjoint_apply(rx) - np.conj(lam) * rx),
        )
        sim = rho_inv @ x @ rho
        report.similarity_residual = max(
            report.similarity_residual,
            hs_norm(channel.apply(sim) - lam * sim),
        )
        for a in channel.kraus:
            adag = a.conj().T
            families["kraus_right"] = max(
                families["kraus_right"], hs_norm(a @ xr - lam * xr @ a))
            families["kraus_right_adjoint"] = max(
                families["kraus_right_adjoint"],
                hs_norm(adag @ xr - np.conj(lam) * xr @ adag))
            families["kraus_left"] = max(
                families["kraus_left"], hs_norm(a @ rx - lam * rx @ a))
            families["kraus_left_adjoint"] = max(
                families["kraus_left_adjoint"],
                hs_norm(adag @ rx - np.conj(lam) * rx @ adag))
        if rho2 is not None:
            for a in channel.kraus:
                report.rho2_residual = max(
                    report.rho2_residual,
                    hs_norm(rho2 @ a @ xr - lam * rho2 @ xr @ a),
                )
    report.kraus_residuals = families
    report.max_residual = max(families.values(), default=0.0)

    # weighted orthogonality across eigenvalues and against ranges
    for i, e in enumerate(basis.entries):
        for f in basis.entries[i + 1:]:
            if abs(e.eigenvalue - f.eigenvalue) > 1e-9:
                report.cross_eigenvalue_overlap = max(
                    report.cross_eigenvalue_overlap,
                    _normalized_rho_overlap(e.vector, f.vector, rho_inv),
                )
    for lam in basis.eigenvalues():
        ran = range_basis(channel, lam, tol)
        for e in basis.cluster(lam):
            for r in ran.operators:
                report.ker_ran_overlap = max(
                    report.ker_ran_overlap,
                    _normalized_rho_overlap(e.vector, r, rho_inv),
                )
        algebraic_dim = algebraic_attractor(channel, rho, lam, tol).dimension
        kernel_dim = len(basis.cluster(lam))
        report.dimensions[np.round(lam, 9)] = (kernel_dim, algebraic_dim)
        if algebraic_dim != kernel_dim:
            report.dimension_match = False
    return report


def product_closure_check(channel: KrausMap, rho: np.ndarray,
                          x1: np.ndarray, lam1: complex,
                          x2: np.ndarray, lam2: complex,
                          tol: float = DEFAULT_PERIPHERAL_TOL) -> float:
    """Residual of P(X1 X2 rho^-1) = lambda1 lambda2 X1 X2 rho^-1.

    Requires P(rho) = rho (within tol, relative) and X1, X2 to be
    unit-modulus eigenoperators; the zero product conforms trivially.
    """
    rho = as_operator(rho, "rho")
    rho_inv = inverse_of_positive(rho)
    fixed_residual = hs_norm(channel.apply(rho) - rho)
    if fixed_residual > tol * max(hs_norm(rho), 1e-300) * 10:
        raise PreconditionError(
            f"rho is not a fixed state (||P(rho) - rho|| = {fixed_residual:.3e})"
        )
    for x, lam in ((x1, lam1), (x2, lam2)):
        if abs(abs(lam) - 1.0) > max(tol, 1e-7):
            raise PreconditionError(f"|lambda| = {abs(lam):.6f} is not 1")
        _check_eigenoperator(channel, as_operator(x), lam, tol)
    product = x1 @ x2 @ rho_inv
    # an exactly-zero product computed through eigenvectors carrying
    # O(tol) error shows up as dust of that size; below the dust scale
    # the statement holds trivially
    dust = tol * hs_norm(x1) * hs_norm(x2) * np.linalg.norm(rho_inv, 2)
    if hs_norm(product) <= dust:
        return 0.0
    return hs_norm(channel.apply(product) - lam1 * lam2 * product)
