"""Closed-form asymptotic propagator and convergence measurement.

For a trace non-increasing map the iterates P^n(X0) approach

    X_inf(n) = sum over unit-modulus eigenvalues lambda and cluster
               index i of  lambda^n * X_{lambda,i} * c_{lambda,i},

with coefficients c = Tr(dual^dag X0). ``convergence_report`` measures
the Hilbert-Schmidt distance between the brute-force iterates and this
formula; it decays like the subperipheral gap q to the n-th power (up
to a polynomial factor when decaying Jordan blocks are defective).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attractor import AttractorBasis, _basis_from_spectrum
from .channels import KrausMap, classify, superoperator_matrix
from .errors import PreconditionError, TheoremViolationError
from .operators import as_operator, vectorize
from .spectral import DEFAULT_PERIPHERAL_TOL, full_spectrum


@dataclass(frozen=True)
class AsymptoticCoefficient:
    eigenvalue: complex
    phase: float          # exactly 0.0 for the eigenvalue 1
    index: int
    value: complex


@dataclass
class AsymptoticModel:
    """Attractor basis with the expansion coefficients of one initial X0."""

    basis: AttractorBasis
    coefficients: list[AsymptoticCoefficient]
    subperipheral_gap: float
    dim: int


def build_model(channel: KrausMap, x0: np.ndarray,
                tol: float = DEFAULT_PERIPHERAL_TOL) -> AsymptoticModel:
    """Expand X0 over the attractor basis of a trace non-increasing map."""
    if not classify(channel).trace_nonincreasing:
        raise PreconditionError("asymptotics require a trace non-increasing map")
    x0 = as_operator(x0)
    if x0.shape[0] != channel.dim:
        raise PreconditionError(
            f"initial operator has dim {x0.shape[0]}, map has dim {channel.dim}"
        )
    data = full_spectrum(channel, tol_peripheral=tol)
    radius = float(np.max(np.abs(data.eigenvalues)))
    if radius > 1.0 + max(tol, 1e-8):
        raise TheoremViolationError(
            f"spectral radius {radius:.12f} exceeds 1 beyond tolerance"
        )
    basis = _basis_from_spectrum(data)
    coefficients = []
    for e in basis.entries:
        phase = float(np.angle(e.eigenvalue))
        # snap so that a stationary peripheral part is n-independent bitwise
        if abs(phase) <= tol or abs(abs(phase) - 2 * np.pi) <= tol:
            phase = 0.0
        coefficients.append(
            AsymptoticCoefficient(
                eigenvalue=e.eigenvalue,
                phase=phase,
                index=e.index,
                value=complex(np.trace(e.dual.conj().T @ x0)),
            )
        )
    return AsymptoticModel(
        basis=basis,
        coefficients=coefficients,
        subperipheral_gap=data.subperipheral_gap(),
        dim=channel.dim,
    )


def asymptotic_state(model: AsymptoticModel, n: int) -> np.ndarray:
    """X_inf(n); lambda^n is evaluated as a pure phase e^(i n theta).

    Snapping |lambda| to exactly 1 keeps large n from drifting the
    modulus, and an all-ones peripheral spectrum gives an n-independent
    result.
    """
    if n < 0:
        raise PreconditionError("iteration count must be non-negative")
    out = np.zeros((model.dim, model.dim), dtype=complex)
    for entry, coeff in zip(model.basis.entries, model.coefficients):
        out += np.exp(1j * n * coeff.phase) * coeff.value * entry.vector
    return out


def convergence_report(channel: KrausMap, x0: np.ndarray, ns,
                       tol: float = DEFAULT_PERIPHERAL_TOL) -> list[tuple[int, float]]:
    """Hilbert-Schmidt distance ||P^n(X0) - X_inf(n)|| for each requested n.

    The iterates are advanced once through the whole sorted n list, so
    the cost is max(ns) superoperator products.
    """
    ns = sorted(int(n) for n in ns)
    if not ns:
        raise PreconditionError("need at least one iteration count")
    if ns[0] < 0:
        raise PreconditionError("iteration counts must be non-negative")
    model = build_model(channel, x0, tol)
    sop = superoperator_matrix(channel)
    vec = vectorize(as_operator(x0))
    out = []
    step = 0
    for n in ns:
        for _ in range(n - step):
            vec = sop @ vec
        step = n
        target = vectorize(asymptotic_state(model, n))
        out.append((n, float(np.linalg.norm(vec - target))))
    return out
