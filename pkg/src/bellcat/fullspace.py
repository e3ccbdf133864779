"""Outcome correlation over the full two-spin Hilbert space."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConsistencyError
from .spin import Direction, eigensystem, projection_operator
from .states import CatState

IMAG_TOL = 1e-12
VIOLATION_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationReport:
    """Local, nonlocal and total correlation for one direction pair.

    ``p_*`` are the raw traces ``raw_P_*`` divided by ``normalization_used``
    (which is ``s**2``).  ``subspace_probability`` is the weight N of the
    measured subspace: 1 for the full space.
    """

    p_local: float
    p_nonlocal: float
    p_total: float
    normalization_used: float
    raw_P_local: float
    raw_P_nonlocal: float
    subspace_probability: float = 1.0

    @property
    def scaled(self) -> float:
        return self.p_total / self.subspace_probability

    def to_dict(self) -> dict:
        return asdict(self)


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise ConsistencyError(f"{what} has imaginary part {value.imag:.3e}")
    return float(value.real)


def _report(state: CatState, raw_local: float, raw_nonlocal: float) -> CorrelationReport:
    norm = state.spin.s_squared
    p_local, p_nonlocal = raw_local / norm, raw_nonlocal / norm
    return CorrelationReport(
        p_local=p_local,
        p_nonlocal=p_nonlocal,
        p_total=p_local + p_nonlocal,
        normalization_used=norm,
        raw_P_local=raw_local,
        raw_P_nonlocal=raw_nonlocal,
    )


def full_correlation(state: CatState, a: Direction, b: Direction) -> CorrelationReport:
    """Trace of ``(S.a) x (S.b)`` against the local and nonlocal density parts.

    The density matrix is supported on two product kets, so the trace reduces to
    four matrix elements of the one-spin projection operators.
    """
    op_a = projection_operator(state.spin, a)
    op_b = projection_operator(state.spin, b)
    (a1, b1), (a2, b2) = state.components

    def omega(bra, ket):
        return op_a[bra[0], ket[0]] * op_b[bra[1], ket[1]]

    p1, p2 = (a1, b1), (a2, b2)
    sin2, cos2 = math.sin(state.xi) ** 2, math.cos(state.xi) ** 2
    local = sin2 * omega(p1, p1) + cos2 * omega(p2, p2)
    # Tr[Omega |P1><P2|] = <P2|Omega|P1>
    coherence = math.sin(state.xi) * math.cos(state.xi) * np.exp(2j * state.eta)
    nonlocal_ = coherence * omega(p2, p1) + np.conj(coherence) * omega(p1, p2)
    return _report(state, _real(complex(local), "P_local"), _real(complex(nonlocal_), "P_nonlocal"))


def full_correlation_via_eigenbasis(state: CatState, a: Direction, b: Direction) -> CorrelationReport:
    """Same quantity as :func:`full_correlation`, summed over product eigenstates.

    Computes ``sum m m' <a_m, b_m'| rho |a_m, b_m'>`` over the complete set of
    eigenstates of ``S.a`` and ``S.b``.  Used to cross-check the direct trace.
    """
    sys_a = eigensystem(projection_operator(state.spin, a))
    sys_b = eigensystem(projection_operator(state.spin, b))
    (a1, b1), (a2, b2) = state.components
    # <a_m, b_m'|P> for every (m, m'), as a (d, d) array
    ov1 = np.outer(sys_a.eigenvectors[a1].conj(), sys_b.eigenvectors[b1].conj())
    ov2 = np.outer(sys_a.eigenvectors[a2].conj(), sys_b.eigenvectors[b2].conj())
    weights = np.outer(sys_a.eigenvalues, sys_b.eigenvalues)

    sin2, cos2 = math.sin(state.xi) ** 2, math.cos(state.xi) ** 2
    local = np.sum(weights * (sin2 * np.abs(ov1) ** 2 + cos2 * np.abs(ov2) ** 2))
    coherence = math.sin(state.xi) * math.cos(state.xi) * np.exp(2j * state.eta)
    nonlocal_ = np.sum(weights * 2 * np.real(coherence * ov1 * ov2.conj()))
    return _report(state, float(local), float(nonlocal_))


def extended_bi_check(state: CatState, a: Direction, b: Direction, c: Direction) -> tuple[float, bool]:
    """Evaluate ``|p(a,b) - p(a,c)| - |p(b,c)|`` against the bound 1."""
    p_ab = full_correlation(state, a, b).p_total
    p_ac = full_correlation(state, a, c).p_total
    p_bc = full_correlation(state, b, c).p_total
    lhs = abs(p_ab - p_ac) - abs(p_bc)
    return lhs, lhs > 1 + VIOLATION_TOL
