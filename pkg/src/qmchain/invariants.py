"""Fixed points, subinvariant states, and channel reduction.

``cesaro_average`` is the workhorse: for a trace preserving map the
running average (1/n) sum_k P^k(rho0) converges to a fixed state. The
plain running average only sheds its transient like 1/n, so the
implementation restarts the window from the current average once per
window; every restart multiplies the non-fixed components by a factor
of order 1/(window * |1 - lambda|), giving geometric convergence in the
number of windows while each window still uses the O(1)-memory
incremental update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausMap, classify, superoperator_matrix
from .errors import PreconditionError, TheoremViolationError
from .operators import (
    DEFAULT_POSITIVITY_TOL,
    DEFAULT_RANK_TOL,
    as_operator,
    hermitian_part,
    identity,
    matrix_unit,
    positivity_report,
    vectorize,
)

DEFAULT_CESARO_TOL = 1e-6
DEFAULT_CESARO_NMAX = 100_000
_RESTART_WINDOW = 4096
_RESIDUAL_STRIDE = 32
# negative eigenvalue mass beyond which clipping would hide a real error
_MAX_CLIP = 1e-6


@dataclass(frozen=True)
class InvariantStateResult:
    """A (near-)fixed state with its convergence diagnostics."""

    state: np.ndarray
    residual: float
    iterations_used: int
    strictly_positive: bool
    support_dim: int
    converged: bool


def _project_to_state(mat: np.ndarray) -> np.ndarray:
    """Nearest PSD unit-trace operator: clip negative eigenvalues, renormalize."""
    w, v = np.linalg.eigh(hermitian_part(mat))
    clipped = float(-w[w < 0].sum())
    if clipped > _MAX_CLIP:
        raise TheoremViolationError(
            f"average has negative eigenvalue mass {clipped:.3e}; "
            "this is beyond roundoff and signals a failed iteration"
        )
    w = np.clip(w, 0.0, None)
    state = (v * w) @ v.conj().T
    trace = float(np.trace(state).real)
    if trace <= 0:
        raise TheoremViolationError("average collapsed to the zero operator")
    return state / trace


def _finish(sop: np.ndarray, dim: int, avg_vec: np.ndarray, iterations: int,
            tol: float, positivity_tol: float) -> InvariantStateResult:
    state = _project_to_state(avg_vec.reshape((dim, dim), order="F"))
    residual = float(np.linalg.norm(sop @ vectorize(state) - vectorize(state)))
    # the state is only known to ~residual accuracy, so rank and strict
    # positivity are decided at that resolution, not at machine noise
    resolution = 10 * residual
    report = positivity_report(state, max(positivity_tol, resolution))
    eigs = np.linalg.eigvalsh(state)
    cutoff = max(DEFAULT_RANK_TOL, resolution)
    support = int(np.sum(eigs > cutoff * max(eigs.max(), 1e-300)))
    return InvariantStateResult(
        state=state,
        residual=residual,
        iterations_used=iterations,
        strictly_positive=report.is_strictly_positive,
        support_dim=support,
        converged=residual <= tol,
    )


def cesaro_average(channel: KrausMap, rho0: np.ndarray,
                   n_max: int = DEFAULT_CESARO_NMAX,
                   tol: float = DEFAULT_CESARO_TOL,
                   positivity_tol: float = DEFAULT_POSITIVITY_TOL) -> InvariantStateResult:
    """Running average of P^k(rho0) until ||P(avg) - avg|| <= tol.

    Requires a trace preserving map (the hypothesis under which the
    limit exists) and a PSD, unit-trace rho0. On exhaustion of n_max
    the best average found is returned with ``converged=False``.
    """
    if not classify(channel).trace_preserving:
        raise PreconditionError("Cesaro averaging requires a trace preserving map")
    rho0 = as_operator(rho0, "rho0")
    if not positivity_report(rho0, max(positivity_tol, 1e-8)).is_positive_semidefinite:
        raise PreconditionError("rho0 must be positive semidefinite")
    if abs(np.trace(rho0).real - 1.0) > 1e-8:
        raise PreconditionError("rho0 must have unit trace")

    sop = superoperator_matrix(channel)
    dim = channel.dim
    seed = vectorize(rho0)
    total = 0
    # aim an order of magnitude below tol so that quantities derived
    # from the state (eigenspace membership, support) meet tol too
    target = tol / 10
    best_vec, best_residual = seed, np.inf

    def track(avg):
        nonlocal best_vec, best_residual
        residual = float(np.linalg.norm(sop @ avg - avg))
        if residual < best_residual:
            best_vec, best_residual = avg.copy(), residual
        return residual

    while True:
        avg = seed.copy()
        current = seed.copy()
        total += 1
        if track(avg) <= target or total >= n_max:
            return _finish(sop, dim, best_vec, total, tol, positivity_tol)
        window = min(_RESTART_WINDOW, n_max - total)
        for n in range(2, window + 2):
            current = sop @ current
            avg += (current - avg) / n
            total += 1
            if n % _RESIDUAL_STRIDE == 0 or n == window + 1:
                if track(avg) <= target:
                    return _finish(sop, dim, best_vec, total, tol, positivity_tol)
            if total >= n_max:
                track(avg)
                return _finish(sop, dim, best_vec, total, tol, positivity_tol)
        seed = avg


def find_invariant_state(channel: KrausMap, tol: float = DEFAULT_CESARO_TOL) -> InvariantStateResult:
    """Fixed state of a channel: the Cesaro limit started from I/N."""
    mixed = identity(channel.dim) / channel.dim
    return cesaro_average(channel, mixed, tol=tol)


def refine_fixed_state(channel: KrausMap, state: np.ndarray,
                       tol: float = 1e-7) -> np.ndarray:
    """Project a near-fixed state onto the eigenspace of eigenvalue 1.

    Cesaro averages carry O(tol) transient contamination; replacing the
    state by its component inside Ker(P - I) (then re-projecting to a
    PSD unit-trace operator) drops the fixed-point residual to the
    eigensolver floor. Pointless for states that are already exact.
    """
    from .spectral import eigenspace_basis

    kernel = eigenspace_basis(channel, 1.0, tol)
    state = as_operator(state, "state")
    projected = np.zeros_like(state)
    for k in kernel.operators:
        projected += k * np.trace(k.conj().T @ state)
    return _project_to_state(projected)


def subinvariant_candidate(channel: KrausMap, tol: float = DEFAULT_POSITIVITY_TOL):
    """Heuristic search for a strictly positive rho with P(rho) <= rho.

    Tries the maximally mixed state, then the fixed state of the
    trace-preserving normalization A_j -> A_j (sum A^dag A)^(-1/2) of
    the map. Returns None when neither candidate works; a general
    search is a semidefinite feasibility problem and out of scope.
    """
    mixed = identity(channel.dim) / channel.dim
    if check_subinvariant(channel, mixed, tol):
        return mixed
    total = sum(a.conj().T @ a for a in channel.kraus)
    w, v = np.linalg.eigh(hermitian_part(total))
    if w.min() <= 1e-8:
        return None
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    normalized = KrausMap([a @ inv_sqrt for a in channel.kraus])
    candidate = find_invariant_state(normalized).state
    report = positivity_report(candidate, max(tol, 1e-8))
    if report.is_strictly_positive and check_subinvariant(channel, candidate, max(tol, 1e-9)):
        return candidate
    return None


def check_subinvariant(channel: KrausMap, rho: np.ndarray,
                       tol: float = DEFAULT_POSITIVITY_TOL) -> bool:
    """True iff rho - P(rho) is PSD within tol (the operator order)."""
    rho = as_operator(rho, "rho")
    if not positivity_report(rho, max(tol, 1e-8)).is_positive_semidefinite:
        raise PreconditionError("rho must be positive semidefinite")
    gap = np.linalg.eigvalsh(hermitian_part(rho - channel.apply(rho)))
    return bool(gap.min() >= -tol)


def support_projection(rho: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projector onto eigenvectors with eigenvalue > tol * max."""
    rho = as_operator(rho, "rho")
    if not positivity_report(rho, 1e-8).is_positive_semidefinite:
        raise PreconditionError("support projection needs a PSD operator")
    w, v = np.linalg.eigh(hermitian_part(rho))
    if w.max() <= 0:
        raise PreconditionError("the zero operator has empty support")
    keep = v[:, w > tol * w.max()]
    return keep @ keep.conj().T


@dataclass(frozen=True)
class ReducedChannel:
    """A channel compressed onto the support of an invariant state.

    ``isometry`` V has orthonormal columns spanning the support;
    compress(X) = V^dag X V lives on the reduced space, embed is its
    right inverse.
    """

    projector: np.ndarray
    isometry: np.ndarray
    reduced_map: KrausMap

    @property
    def support_dim(self) -> int:
        return self.isometry.shape[1]

    def compress(self, x: np.ndarray) -> np.ndarray:
        return self.isometry.conj().T @ x @ self.isometry

    def embed(self, y: np.ndarray) -> np.ndarray:
        return self.isometry @ y @ self.isometry.conj().T


def _projector_isometry(projector: np.ndarray, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(projector))
    if np.max(np.abs(w * (1 - w))) > max(tol, 1e-8):
        raise PreconditionError("matrix is not an orthogonal projection")
    return v[:, w > 0.5]


def reduce_channel(channel: KrausMap, projector: np.ndarray,
                   tol: float = 1e-7) -> ReducedChannel:
    """Restrict a map to the range of a projector that reduces it.

    The projector P reduces the map iff P(P X P) = P P(P X P) P for all
    X, which is equivalent to (I - P) A_j P = 0 for every Kraus
    operator; that form is what is checked, within tol.
    """
    projector = as_operator(projector, "projector")
    if projector.shape[0] != channel.dim:
        raise PreconditionError("projector dimension does not match the map")
    isometry = _projector_isometry(projector, tol)
    complement = identity(channel.dim) - projector
    for j, a in enumerate(channel.kraus):
        leak = float(np.linalg.norm(complement @ a @ projector))
        if leak > tol:
            raise PreconditionError(
                f"projector does not reduce the map: ||(1-P) A_{j} P|| = {leak:.3e}"
            )
    reduced = KrausMap([isometry.conj().T @ a @ isometry for a in channel.kraus])
    return ReducedChannel(projector=projector, isometry=isometry, reduced_map=reduced)


def _spanning_states(dim: int) -> list[np.ndarray]:
    """N^2 pure/diagonal states whose complex span is all of B(H)."""
    states = [matrix_unit(dim, a, a) for a in range(dim)]
    for a in range(dim):
        for b in range(a + 1, dim):
            plus = (matrix_unit(dim, a, a) + matrix_unit(dim, b, b)
                    + matrix_unit(dim, a, b) + matrix_unit(dim, b, a)) / 2
            phase = (matrix_unit(dim, a, a) + matrix_unit(dim, b, b)
                     - 1j * matrix_unit(dim, a, b) + 1j * matrix_unit(dim, b, a)) / 2
            states.extend([plus, phase])
    return states


def recurrent_subspace(channel: KrausMap, tol: float = DEFAULT_CESARO_TOL) -> ReducedChannel:
    """Reduce a channel onto the support of a maximal invariant state.

    The maximal state is realized by mixing the Cesaro limits of a
    family of initial states spanning B(H): supports of PSD summands
    add, so the mixture's support contains the support of every fixed
    state. On the reduced space the mixture is strictly positive and
    the whole rho-weighted theory applies.
    """
    if not classify(channel).trace_preserving:
        raise PreconditionError("recurrent subspace requires a trace preserving map")
    limits = [
        cesaro_average(channel, state, tol=tol * 1e-2).state
        for state in _spanning_states(channel.dim)
    ]
    rho_tilde = sum(limits) / len(limits)
    # cutoff sits above the residual floor of the restarted averages
    projector = support_projection(rho_tilde, tol=1e-6)
    return reduce_channel(channel, projector, tol=max(tol, 1e-7))
