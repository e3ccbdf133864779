"""Two-spin Bell cat-states and the local/nonlocal split of their density matrix.

Product kets are ordered as ``np.kron(first, second)``, so the product slot of
Dicke indices ``(i, j)`` is ``i * d + j``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .spin import Spin


class Polarization(enum.Enum):
    ANTIPARALLEL = "anti"
    PARALLEL = "para"

    @classmethod
    def parse(cls, text: "str | Polarization") -> "Polarization":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        for mode in cls:
            if key in (mode.value, mode.name.lower()):
                return mode
        raise ValueError(f"unknown polarization {text!r}; use 'anti' or 'para'")

    @property
    def sign(self) -> int:
        """-1 for antiparallel, +1 for parallel; the sign of the local correlation."""
        return -1 if self is Polarization.ANTIPARALLEL else 1


@dataclass(frozen=True)
class CatState:
    """``c1|P1> + c2|P2>`` with ``c1 = exp(i eta) sin xi`` and ``c2 = exp(-i eta) cos xi``.

    Antiparallel: P1 = |+s,-s>, P2 = |-s,+s>.  Parallel: P1 = |+s,+s>, P2 = |-s,-s>.
    """

    spin: Spin
    polarization: Polarization
    xi: float
    eta: float

    @property
    def c1(self) -> complex:
        return complex(np.exp(1j * self.eta) * math.sin(self.xi))

    @property
    def c2(self) -> complex:
        return complex(np.exp(-1j * self.eta) * math.cos(self.xi))

    @property
    def components(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """Dicke index pairs ``(i_first, i_second)`` of P1 and P2."""
        top = self.spin.twice_s  # index of m = -s
        if self.polarization is Polarization.ANTIPARALLEL:
            return (0, top), (top, 0)
        return (0, 0), (top, top)

    @property
    def slots(self) -> tuple[int, int]:
        d = self.spin.dim
        (a1, b1), (a2, b2) = self.components
        return a1 * d + b1, a2 * d + b2

    @property
    def reduced_params(self) -> tuple[float, float]:
        return self.xi % (2 * math.pi), self.eta % (2 * math.pi)

    def vector(self) -> np.ndarray:
        psi = np.zeros(self.spin.dim**2, dtype=complex)
        k1, k2 = self.slots
        psi[k1] = self.c1
        psi[k2] = self.c2
        return psi


def make_cat_state(spin: Spin | str | int, polarization: Polarization | str,
                   xi: float, eta: float) -> CatState:
    if not isinstance(spin, Spin):
        spin = Spin.parse(spin)
    xi, eta = float(xi), float(eta)
    if not (math.isfinite(xi) and math.isfinite(eta)):
        raise ValueError(f"non-finite state parameters xi={xi}, eta={eta}")
    return CatState(spin, Polarization.parse(polarization), xi, eta)


@dataclass(frozen=True)
class DensityDecomposition:
    rho_total: np.ndarray
    rho_local: np.ndarray
    rho_nonlocal: np.ndarray


def density_decomposition(state: CatState) -> DensityDecomposition:
    """Dense ``|psi><psi|`` split into its diagonal and coherence parts.

    Matrices are ``(2s+1)**2`` square; at s = 30 each one holds about 1.4e7
    complex entries (~220 MB), so avoid this for large spins.  Nothing else in
    the package materializes these matrices.
    """
    n = state.spin.dim**2
    k1, k2 = state.slots
    sin2, cos2 = math.sin(state.xi) ** 2, math.cos(state.xi) ** 2
    coherence = math.sin(state.xi) * math.cos(state.xi) * np.exp(2j * state.eta)

    local = np.zeros((n, n), dtype=complex)
    local[k1, k1] = sin2
    local[k2, k2] = cos2
    nonlocal_ = np.zeros((n, n), dtype=complex)
    nonlocal_[k1, k2] = coherence
    nonlocal_[k2, k1] = np.conj(coherence)
    return DensityDecomposition(local + nonlocal_, local, nonlocal_)
