"""Local hidden-variable models for the three-direction inequality.

Party A answers ``A(r, lam) = +-1`` deterministically; party B answers
``B(r, lam) = -A(r, lam)`` for antiparallel and ``+A(r, lam)`` for parallel
polarization.  A weight ``w <= 1`` multiplies the hidden-variable density,
modelling a lambda-independent acceptance probability.

Sampling only ever covers the model families implemented here (plus any
user subclass of :class:`LhvModel`); it is evidence about those families, not
a proof about all local models.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import UnsupportedModelError
from .spin import Direction
from .states import Polarization

MIN_SAMPLES = 1000
CHUNK = 1 << 16
MAX_GRID = 10**6


@dataclass(frozen=True)
class LhvModel:
    """Base hidden-variable model; subclasses define sampling and the A outcome."""

    polarization: Polarization = Polarization.ANTIPARALLEL
    weight: float = 1.0

    rule_id = "base"
    discretizable = False

    def __post_init__(self):
        if not 0.0 < self.weight <= 1.0 + 1e-12:
            raise ValueError(f"total weight must lie in (0, 1], got {self.weight}")

    def sample_lambdas(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def outcome_a(self, r: Direction, lambdas: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def outcome_b(self, r: Direction, lambdas: np.ndarray) -> np.ndarray:
        sign = -1 if self.polarization is Polarization.ANTIPARALLEL else 1
        return sign * self.outcome_a(r, lambdas)

    @property
    def params(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "polarization"}
        d["polarization"] = self.polarization.value
        return d

    @property
    def label(self) -> str:
        extra = ",".join(f"{k}={v}" for k, v in self.params.items() if k != "polarization")
        return f"{self.rule_id}[{self.polarization.value},{extra}]"


def _pm1(x: np.ndarray) -> np.ndarray:
    # sign with ties sent to +1, so outcomes are exactly +-1
    return np.where(x >= 0, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class SignModel(LhvModel):
    """``A = sign(lam . r)`` with ``lam`` uniform on the unit sphere."""

    rule_id = "sign"

    def sample_lambdas(self, rng, n):
        v = rng.standard_normal((n, 3))
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def outcome_a(self, r, lambdas):
        return _pm1(lambdas @ r.unit_vector)


@dataclass(frozen=True)
class PhaseModel(LhvModel):
    """``A = sign(cos(k phi_r - lam))`` with ``lam`` uniform on [0, 2pi)."""

    k: int = 1

    rule_id = "phase"
    discretizable = True

    def sample_lambdas(self, rng, n):
        return rng.uniform(0.0, 2 * math.pi, size=n)

    def outcome_a(self, r, lambdas):
        return _pm1(np.cos(self.k * r.phi - lambdas))

    def breakpoints(self, r: Direction) -> np.ndarray:
        """Values of lam in [0, 2pi) where the outcome along ``r`` flips."""
        base = self.k * r.phi
        return np.mod([base + math.pi / 2, base - math.pi / 2], 2 * math.pi)


def builtin_models() -> list[LhvModel]:
    """Sign and phase models, full and sub-normalized, for both polarizations."""
    models: list[LhvModel] = []
    for pol in Polarization:
        models += [
            SignModel(pol),
            SignModel(pol, weight=0.5),
            PhaseModel(pol, k=1),
            PhaseModel(pol, k=3),
            PhaseModel(pol, weight=0.5, k=1),
        ]
    return models


@dataclass(frozen=True)
class LhvEstimate:
    p_ab: float
    p_ac: float
    p_bc: float
    se_ab: float
    se_ac: float
    se_bc: float
    p_s_lc: float
    se_p_s: float
    """Delta-method standard error of ``p_s_lc`` using the sample covariance."""
    samples: int
    rng_seed: int
    model: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LhvExact:
    p_ab: float
    p_ac: float
    p_bc: float
    p_s_lc: float
    cells: int
    model: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _chunk_moments(model, a, b, c, seed_seq, n):
    rng = np.random.default_rng(seed_seq)
    lam = model.sample_lambdas(rng, n)
    a_a = model.outcome_a(a, lam)
    prods = np.stack([
        a_a * model.outcome_b(b, lam),
        a_a * model.outcome_b(c, lam),
        model.outcome_a(b, lam) * model.outcome_b(c, lam),
    ]).astype(float) * model.weight
    return prods.sum(axis=1), prods @ prods.T


def estimate(model: LhvModel, a: Direction, b: Direction, c: Direction,
             samples: int, seed: int, workers: int = 1) -> LhvEstimate:
    """Monte Carlo estimate of the three local correlations and ``p_s_lc``.

    Samples are drawn in fixed-size chunks, each with its own child seed of
    ``seed``; the result depends only on ``(samples, seed)``, never on
    ``workers``.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    jobs = list(zip(children, sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _chunk_moments(model, a, b, c, *j), jobs))
    else:
        parts = [_chunk_moments(model, a, b, c, *j) for j in jobs]

    total = np.zeros(3)
    second = np.zeros((3, 3))
    for s1, s2 in parts:
        total += s1
        second += s2
    n = samples
    mean = total / n
    cov = (second - n * np.outer(mean, mean)) / (n - 1)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None) / n)

    p_ab, p_ac, p_bc = mean
    grad = np.array([p_ac, p_ab, -math.copysign(1.0, p_bc)])
    se_ps = math.sqrt(max(float(grad @ cov @ grad), 0.0) / n)
    return LhvEstimate(
        p_ab=float(p_ab), p_ac=float(p_ac), p_bc=float(p_bc),
        se_ab=float(se[0]), se_ac=float(se[1]), se_bc=float(se[2]),
        p_s_lc=float(p_ab * p_ac - abs(p_bc)), se_p_s=se_ps,
        samples=samples, rng_seed=seed, model=model.label,
    )


def exhaustive_check(model: LhvModel, a: Direction, b: Direction, c: Direction,
                     grid_points: int | None = None) -> LhvExact:
    """Integrate the correlations over lambda instead of sampling.

    With ``grid_points=None`` the piecewise-constant integrand is integrated
    exactly between its breakpoints.  Otherwise a midpoint rule on
    ``grid_points`` equal cells is used (a single cell makes every outcome a
    constant).

    Raises:
        UnsupportedModelError: the model's hidden variable is not a phase.
    """
    if not model.discretizable:
        raise UnsupportedModelError(f"model {model.rule_id!r} has no finite lambda grid")
    two_pi = 2 * math.pi
    if grid_points is None:
        cuts = np.concatenate([[0.0, two_pi]] + [model.breakpoints(r) for r in (a, b, c)])
        cuts = np.unique(cuts)
        lam = (cuts[:-1] + cuts[1:]) / 2
        weights = np.diff(cuts) / two_pi
    else:
        if not 1 <= grid_points <= MAX_GRID:
            raise ValueError(f"grid_points must be in [1, {MAX_GRID}]")
        lam = (np.arange(grid_points) + 0.5) * two_pi / grid_points
        weights = np.full(grid_points, 1.0 / grid_points)
    weights = weights * model.weight

    def corr(x, y):
        return float(weights @ (model.outcome_a(x, lam) * model.outcome_b(y, lam)))

    p_ab, p_ac, p_bc = corr(a, b), corr(a, c), corr(b, c)
    return LhvExact(p_ab, p_ac, p_bc, p_ab * p_ac - abs(p_bc), len(lam), model.label)
