"""Spin-s angular momentum matrices in the Dicke basis.

All matrices and kets use the Dicke ordering ``m = s, s-1, ..., -s``: row 0 is
``|+s>`` and row ``2s`` is ``|-s>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DegenerateSpectrumError

MAX_TWICE_S = 60

HERMITIAN_ATOL = 1e-12
DEGENERACY_GAP = 1e-10
RESIDUAL_TOL = 1e-11


@dataclass(frozen=True)
class Spin:
    """Spin quantum number stored exactly as the integer ``2s``."""

    twice_s: int

    def __post_init__(self):
        if isinstance(self.twice_s, bool) or not isinstance(self.twice_s, (int, np.integer)):
            raise TypeError(f"twice_s must be an integer, got {self.twice_s!r}")
        if self.twice_s < 1:
            raise ValueError(
                f"twice_s={self.twice_s} describes a trivial spin; need 2s >= 1"
            )
        if self.twice_s > MAX_TWICE_S:
            raise ValueError(f"twice_s={self.twice_s} exceeds the supported maximum {MAX_TWICE_S}")
        object.__setattr__(self, "twice_s", int(self.twice_s))

    @classmethod
    def parse(cls, text: str | int | Fraction) -> "Spin":
        """Parse ``"3/2"``, ``"2"``, ``2`` or ``Fraction(3, 2)``."""
        try:
            value = Fraction(str(text).strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse spin from {text!r}") from None
        twice = 2 * value
        if twice.denominator != 1:
            raise ValueError(f"spin {text!r} is not a multiple of 1/2")
        return cls(int(twice))

    @property
    def s(self) -> Fraction:
        return Fraction(self.twice_s, 2)

    @property
    def value(self) -> float:
        return self.twice_s / 2

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    @property
    def is_half_integer(self) -> bool:
        return self.twice_s % 2 == 1

    @property
    def parity(self) -> int:
        """The sign ``(-1)**(2s)``."""
        return -1 if self.twice_s % 2 else 1

    @property
    def s_squared(self) -> float:
        return float(self.s**2)

    def m_values(self) -> np.ndarray:
        return self.value - np.arange(self.dim)

    def __str__(self) -> str:
        return str(self.s)


@dataclass(frozen=True)
class Direction:
    """Unit vector given by polar angle ``theta`` in [0, pi] and azimuth ``phi``.

    ``phi`` is reduced into [0, 2*pi) on construction.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError(f"non-finite direction angles ({self.theta}, {self.phi})")
        if not -1e-12 <= theta <= math.pi + 1e-12:
            raise ValueError(f"theta={theta} outside [0, pi]")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", phi % (2 * math.pi))

    @classmethod
    def canonical(cls, theta: float, phi: float) -> "Direction":
        """Build a direction from unrestricted angles, folding theta into [0, pi]."""
        theta = math.remainder(theta, 2 * math.pi)
        if theta < 0:
            theta, phi = -theta, phi + math.pi
        return cls(theta, phi)

    @classmethod
    def from_degrees(cls, theta: float, phi: float = 0.0) -> "Direction":
        return cls(math.radians(theta), math.radians(phi))

    @property
    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    """Real eigenvalues, descending."""
    eigenvectors: np.ndarray
    """Columns are the eigenvectors in the same order as ``eigenvalues``."""

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _spin_operators(twice_s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s = twice_s / 2
    m = s - np.arange(twice_s + 1)
    # <m+1|S+|m> lives on the superdiagonal in descending-m order
    s_plus = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(m).astype(complex)
    return _readonly(sx), _readonly(sy), _readonly(sz)


def spin_operators(spin: Spin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return read-only ``(Sx, Sy, Sz)`` for ``spin`` in the Dicke basis."""
    return _spin_operators(spin.twice_s)


def projection_operator(spin: Spin, r: Direction) -> np.ndarray:
    """Spin component ``S . r`` along the unit vector of ``r``."""
    sx, sy, sz = spin_operators(spin)
    if r.theta == 0.0:
        return sz.copy()
    nx, ny, nz = r.unit_vector
    return nx * sx + ny * sy + nz * sz


def _fix_phase(v: np.ndarray, threshold: float = 1e-12) -> np.ndarray:
    # first amplitude above threshold, scanning from m = +s, made real positive
    idx = int(np.argmax(np.abs(v) > threshold))
    return v * (abs(v[idx]) / v[idx])


def eigensystem(op: np.ndarray) -> EigenSystem:
    """Eigen-decompose a Hermitian matrix with deterministic ordering and phases.

    Eigenvalues are sorted descending; each eigenvector has its first
    non-negligible amplitude real and positive.

    Raises:
        ValueError: ``op`` is not square or not Hermitian.
        DegenerateSpectrumError: two eigenvalues lie within 1e-10.
    """
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {op.shape}")
    scale = max(1.0, float(np.max(np.abs(op))))
    asym = float(np.max(np.abs(op - op.conj().T)))
    if asym > HERMITIAN_ATOL * scale:
        raise ValueError(f"matrix is not Hermitian (max |M - M^H| = {asym:.3e})")

    vals, vecs = np.linalg.eigh(op)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    if vals.size > 1 and np.min(-np.diff(vals)) < DEGENERACY_GAP:
        raise DegenerateSpectrumError(
            f"eigenvalue gap {np.min(-np.diff(vals)):.3e} below {DEGENERACY_GAP}"
        )
    vecs = np.column_stack([_fix_phase(vecs[:, k]) for k in range(vals.size)])

    residual = np.max(np.linalg.norm(op @ vecs - vecs * vals, axis=0))
    if residual > RESIDUAL_TOL * scale:
        raise DegenerateSpectrumError(f"eigen-residual {residual:.3e} too large")
    return EigenSystem(_readonly(vals), _readonly(vecs))


def spin32_analytic_eigenstates(r: Direction) -> list[np.ndarray]:
    """Closed-form eigenstates of ``S . r`` for s = 3/2.

    Returned in the order m = 3/2, 1/2, -1/2, -3/2, with the phase convention
    of the closed form (not the one used by :func:`eigensystem`).
    """
    c, s = math.cos(r.theta / 2), math.sin(r.theta / 2)
    e1, e2, e3 = (np.exp(1j * k * r.phi) for k in (1, 2, 3))
    r3 = math.sqrt(3)
    up32 = np.array([c**3, r3 * s * c**2 * e1, r3 * s**2 * c * e2, s**3 * e3])
    up12 = np.array([
        r3 * s * c**2,
        -(1 - 3 * s**2) * c * e1,
        (1 - 3 * c**2) * s * e2,
        -r3 * s**2 * c * e3,
    ])
    dn12 = np.array([
        r3 * s**2 * c,
        (1 - 3 * c**2) * s * e1,
        (1 - 3 * s**2) * c * e2,
        r3 * s * c**2 * e3,
    ])
    dn32 = np.array([s**3, -r3 * s**2 * c * e1, r3 * s * c**2 * e2, -(c**3) * e3])
    return [v.astype(complex) for v in (up32, up12, dn12, dn32)]


def random_direction(rng: np.random.Generator) -> Direction:
    """Direction drawn uniformly on the unit sphere."""
    return Direction(math.acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, 2 * math.pi))
