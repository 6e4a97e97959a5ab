"""Quantum operations represented by their Kraus operators.

The Kraus list is the canonical representation; the superoperator
matrix (column-stacking convention, so the matrix of X -> A X A^dag is
conj(A) kron A) and the Choi matrix are derived views cached on the
map. A zoo of standard channels is provided for tests and the CLI
generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatchError, PreconditionError
from .operators import (
    DEFAULT_POSITIVITY_TOL,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_operator,
    identity,
    matrix_unit,
    vectorize,
)


class KrausMap:
    """A completely positive map P(X) = sum_j A_j X A_j^dag.

    Immutable after construction. Trace non-increasingness is *not*
    enforced here: non-physical maps are legitimate inputs for negative
    tests, and :func:`classify` reports the actual channel class on
    demand.
    """

    def __init__(self, kraus):
        ops = [as_operator(a, f"kraus[{i}]") for i, a in enumerate(kraus)]
        if not ops:
            raise PreconditionError("a Kraus map needs at least one operator")
        dims = {a.shape[0] for a in ops}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"Kraus operators have mixed dimensions: {sorted(dims)}"
            )
        for a in ops:
            a.flags.writeable = False
        self.kraus: tuple[np.ndarray, ...] = tuple(ops)
        self.dim: int = ops[0].shape[0]

    def __len__(self) -> int:
        return len(self.kraus)

    def __repr__(self) -> str:
        return f"KrausMap(dim={self.dim}, n_kraus={len(self.kraus)})"

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = as_operator(x)
        if x.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"operator has dim {x.shape[0]}, map has dim {self.dim}"
            )
        return x

    def apply(self, x: np.ndarray) -> np.ndarray:
        """P(X) = sum_j A_j X A_j^dag."""
        x = self._check_dim(x)
        out = np.zeros_like(x)
        for a in self.kraus:
            out += a @ x @ a.conj().T
        return out

    def adjoint_apply(self, x: np.ndarray) -> np.ndarray:
        """P^dag(X) = sum_j A_j^dag X A_j, the Hilbert-Schmidt adjoint."""
        x = self._check_dim(x)
        out = np.zeros_like(x)
        for a in self.kraus:
            out += a.conj().T @ x @ a
        return out

    @cached_property
    def _superoperator(self) -> np.ndarray:
        sop = np.zeros((self.dim**2, self.dim**2), dtype=complex)
        for a in self.kraus:
            sop += np.kron(a.conj(), a)
        sop.flags.writeable = False
        return sop

    @cached_property
    def _choi(self) -> np.ndarray:
        choi = np.zeros((self.dim**2, self.dim**2), dtype=complex)
        for a in self.kraus:
            v = vectorize(a)
            choi += np.outer(v, v.conj())
        choi /= self.dim
        choi.flags.writeable = False
        return choi


def superoperator_matrix(channel: KrausMap) -> np.ndarray:
    """dim^2 x dim^2 matrix S with S vec(X) = vec(P(X))."""
    return channel._superoperator


def _coerce_superoperator(channel_or_sop) -> tuple[np.ndarray, int]:
    """Accept a KrausMap or a raw dim^2 x dim^2 matrix."""
    if isinstance(channel_or_sop, KrausMap):
        return channel_or_sop._superoperator, channel_or_sop.dim
    sop = as_operator(channel_or_sop, "superoperator")
    dim = int(round(np.sqrt(sop.shape[0])))
    if dim * dim != sop.shape[0]:
        raise PreconditionError(
            f"superoperator side {sop.shape[0]} is not a perfect square"
        )
    return sop, dim


def choi_matrix(channel_or_sop) -> np.ndarray:
    """Choi matrix (I kron P) applied to the maximally entangled projector.

    Equals (1/N) sum_j vec(A_j) vec(A_j)^dag for a Kraus map; a raw
    superoperator is reshuffled instead, which lets maps with no Kraus
    form (hence possibly not completely positive) be checked.
    """
    if isinstance(channel_or_sop, KrausMap):
        return channel_or_sop._choi
    sop, dim = _coerce_superoperator(channel_or_sop)
    four = sop.reshape(dim, dim, dim, dim)
    return four.transpose(3, 1, 2, 0).reshape(dim**2, dim**2) / dim


def is_completely_positive(channel_or_sop, tol: float = DEFAULT_POSITIVITY_TOL) -> bool:
    """Choi positivity test; always true for maps given in Kraus form."""
    choi = choi_matrix(channel_or_sop)
    if np.max(np.abs(choi - choi.conj().T)) > tol:
        return False
    return float(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min()) >= -tol


@dataclass(frozen=True)
class ChannelClassification:
    """Trace and unitality class of a map, decided in the PSD order."""

    trace_preserving: bool
    trace_nonincreasing: bool
    unital: bool
    subunital: bool
    tolerance_used: float


def classify(channel: KrausMap, tol: float = DEFAULT_POSITIVITY_TOL) -> ChannelClassification:
    """Classify via eigenvalue bounds of I - P^dag(I) and I - P(I).

    The paper-style inequalities are operator inequalities, so the
    comparisons are spectral, not entrywise.
    """
    eye = identity(channel.dim)
    gap_tp = np.linalg.eigvalsh(eye - channel.adjoint_apply(eye))
    gap_unital = np.linalg.eigvalsh(eye - channel.apply(eye))
    return ChannelClassification(
        trace_preserving=bool(np.max(np.abs(gap_tp)) <= tol),
        trace_nonincreasing=bool(gap_tp.min() >= -tol),
        unital=bool(np.max(np.abs(gap_unital)) <= tol),
        subunital=bool(gap_unital.min() >= -tol),
        tolerance_used=tol,
    )


def iterate(channel: KrausMap, x: np.ndarray, n: int) -> np.ndarray:
    """n-fold application P^n(X) by repeated superoperator-vector products.

    This is the brute-force reference dynamics the asymptotic formula is
    tested against.
    """
    if n < 0:
        raise PreconditionError("iteration count must be non-negative")
    x = channel._check_dim(x)
    sop = channel._superoperator
    vec = vectorize(x)
    for _ in range(n):
        vec = sop @ vec
    return vec.reshape((channel.dim, channel.dim), order="F")


def direct_sum(left: KrausMap, right: KrausMap) -> KrausMap:
    """Block-diagonal join acting as `left` and `right` on the two sectors.

    Coherences between the sectors are destroyed, which keeps the result
    trace preserving whenever both inputs are.
    """
    dim = left.dim + right.dim
    ops = []
    for a in left.kraus:
        block = np.zeros((dim, dim), dtype=complex)
        block[: left.dim, : left.dim] = a
        ops.append(block)
    for b in right.kraus:
        block = np.zeros((dim, dim), dtype=complex)
        block[left.dim :, left.dim :] = b
        ops.append(block)
    return KrausMap(ops)


# ---------------------------------------------------------------------------
# standard channel zoo
# ---------------------------------------------------------------------------

def identity_channel(dim: int = 2) -> KrausMap:
    return KrausMap([identity(dim)])


def unitary_channel(u) -> KrausMap:
    """Conjugation X -> U X U^dag by a single unitary."""
    u = as_operator(u, "unitary")
    if np.max(np.abs(u.conj().T @ u - identity(u.shape[0]))) > 1e-10:
        raise PreconditionError("matrix is not unitary within 1e-10")
    return KrausMap([u])


def random_unitary_channel(weights, unitaries) -> KrausMap:
    """Mixture of unitary conjugations, P(X) = sum_i w_i U_i X U_i^dag.

    Weights must be non-negative and sum to one; the resulting channel
    is trace preserving and unital.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or len(weights) != len(unitaries):
        raise PreconditionError("need one weight per unitary")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-10:
        raise PreconditionError("weights must be non-negative and sum to 1")
    return KrausMap(
        [np.sqrt(w) * as_operator(u, "unitary") for w, u in zip(weights, unitaries)]
    )


def bit_flip(p: float) -> KrausMap:
    """Qubit bit flip {sqrt(1-p) I, sqrt(p) X}."""
    if not 0.0 <= p <= 1.0:
        raise PreconditionError("flip probability must lie in [0, 1]")
    return KrausMap([np.sqrt(1 - p) * identity(2), np.sqrt(p) * PAULI_X])


def amplitude_damping(gamma: float) -> KrausMap:
    """Qubit amplitude damping with decay probability gamma.

    Kraus operators diag(1, sqrt(1-gamma)) and sqrt(gamma) |0><1|.
    """
    if not 0.0 <= gamma <= 1.0:
        raise PreconditionError("gamma must lie in [0, 1]")
    k0 = np.diag([1.0, np.sqrt(1.0 - gamma)]).astype(complex)
    k1 = np.sqrt(gamma) * matrix_unit(2, 0, 1)
    return KrausMap([k0, k1])


def depolarizing(p: float) -> KrausMap:
    """Qubit depolarizing channel P(X) = (1-p) X + p Tr(X) I/2."""
    if not 0.0 <= p <= 1.0:
        raise PreconditionError("p must lie in [0, 1]")
    return KrausMap(
        [
            np.sqrt(1 - 3 * p / 4) * identity(2),
            np.sqrt(p / 4) * PAULI_X,
            np.sqrt(p / 4) * PAULI_Y,
            np.sqrt(p / 4) * PAULI_Z,
        ]
    )


def phase_damping(lam: float) -> KrausMap:
    """Qubit phase damping {diag(1, sqrt(1-lam)), diag(0, sqrt(lam))}."""
    if not 0.0 <= lam <= 1.0:
        raise PreconditionError("lambda must lie in [0, 1]")
    k0 = np.diag([1.0, np.sqrt(1.0 - lam)]).astype(complex)
    k1 = np.diag([0.0, np.sqrt(lam)]).astype(complex)
    return KrausMap([k0, k1])


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the phase-corrected QR of a Ginibre matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_cptp(dim: int, k: int, seed: int) -> KrausMap:
    """Random quantum channel from a Haar-random Stinespring isometry.

    A Ginibre (dim*k) x dim matrix is QR-orthonormalized into an
    isometry V and cut into k blocks A_j; V^dag V = I makes the result
    trace preserving by construction.
    """
    if dim < 1 or k < 1:
        raise PreconditionError("dim and k must be positive")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim * k, dim)) + 1j * rng.standard_normal((dim * k, dim))
    v, _ = np.linalg.qr(z)
    return KrausMap([v[j * dim : (j + 1) * dim, :] for j in range(k)])


def random_cptni(dim: int, k: int, seed: int, shrink: float = 0.5) -> KrausMap:
    """Trace non-increasing map: a random channel scaled by sqrt(shrink)."""
    if not 0.0 < shrink <= 1.0:
        raise PreconditionError("shrink must lie in (0, 1]")
    base = random_cptp(dim, k, seed)
    return KrausMap([np.sqrt(shrink) * a for a in base.kraus])


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix G G^dag / Tr(G G^dag)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


STANDARD_KINDS = (
    "identity",
    "unitary",
    "random_unitary",
    "amplitude_damping",
    "depolarizing",
    "phase_damping",
    "random_cptp",
    "random_cptni",
)


def _required(params: dict, name: str, kind: str):
    if name not in params:
        raise PreconditionError(f"channel kind {kind!r} needs parameter {name!r}")
    return params.pop(name)


def standard_channel(kind: str, seed: int | None = None, **params) -> KrausMap:
    """Dispatch into the channel zoo by name (the CLI generator backend).

    ``seed`` is consumed by the random families and by ``unitary`` /
    ``random_unitary`` when explicit matrices are not supplied.
    """
    rng = np.random.default_rng(seed)
    if kind == "identity":
        return identity_channel(int(params.pop("dim", 2)))
    elif kind == "unitary":
        if "matrix" in params:
            return unitary_channel(params.pop("matrix"))
        return unitary_channel(haar_random_unitary(int(params.pop("dim", 2)), rng))
    elif kind == "random_unitary":
        if "unitaries" in params:
            unitaries = params.pop("unitaries")
            return random_unitary_channel(
                _required(params, "weights", kind), unitaries
            )
        count = int(params.pop("count", 2))
        dim = int(params.pop("dim", 2))
        weights = params.pop("weights", [1.0 / count] * count)
        return random_unitary_channel(
            weights, [haar_random_unitary(dim, rng) for _ in range(count)]
        )
    elif kind == "amplitude_damping":
        return amplitude_damping(float(_required(params, "gamma", kind)))
    elif kind == "depolarizing":
        return depolarizing(float(_required(params, "p", kind)))
    elif kind == "phase_damping":
        lam = params.pop("lambda", params.pop("lam", None))
        if lam is None:
            raise PreconditionError("channel kind 'phase_damping' needs parameter 'lambda'")
        return phase_damping(float(lam))
    elif kind == "random_cptp":
        return random_cptp(
            int(_required(params, "dim", kind)), int(_required(params, "k", kind)), seed
        )
    elif kind == "random_cptni":
        return random_cptni(
            int(_required(params, "dim", kind)),
            int(_required(params, "k", kind)),
            seed,
            float(params.pop("shrink", 0.5)),
        )
    raise PreconditionError(
        f"unknown channel kind {kind!r}; choose from {', '.join(STANDARD_KINDS)}"
    )
