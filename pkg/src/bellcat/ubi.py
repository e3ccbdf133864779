"""The three-direction inequality ``p(a,b) p(a,c) <= |p(b,c)|`` and its violation.

``p_s = p(a,b) p(a,c) - |p(b,c)|``; any positive value is a violation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConsistencyError, UnderflowError
from .scs import UNDERFLOW_GUARD, correlation_closed_form, half_angle, subspace_correlation
from .spin import Direction, Spin
from .states import CatState, Polarization, make_cat_state

VIOLATION_TOL = 1e-12
CEILING = 1 + 1e-9
EQUATORIAL_TOL = 1e-12


@dataclass(frozen=True)
class UbiReport:
    p_ab: float
    p_ac: float
    p_bc: float
    p_s: float
    violated: bool
    scaled: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _report(p_ab: float, p_ac: float, p_bc: float, scaled: bool) -> UbiReport:
    p_ab, p_ac, p_bc = float(p_ab), float(p_ac), float(p_bc)
    p_s = p_ab * p_ac - abs(p_bc)
    return UbiReport(p_ab, p_ac, p_bc, p_s, bool(p_s > VIOLATION_TOL), bool(scaled))


def _local_correlation(state: CatState, x: Direction, y: Direction) -> float:
    n = 2 * state.spin.twice_s
    kx, gx = half_angle(x.theta)
    ky, gy = half_angle(y.theta)
    return state.polarization.sign * (kx**n - gx**n) * (ky**n - gy**n)


def ubi_local(state: CatState, a: Direction, b: Direction, c: Direction) -> UbiReport:
    """Inequality evaluated with the local correlation only; can never be violated.

    Raises:
        ConsistencyError: the local correlations violate the inequality.
    """
    report = _report(
        _local_correlation(state, a, b),
        _local_correlation(state, a, c),
        _local_correlation(state, b, c),
        scaled=False,
    )
    if report.violated:
        raise ConsistencyError(f"local correlations violate the inequality: p_s={report.p_s:.3e}")
    return report


def ubi_quantum(state: CatState, a: Direction, b: Direction, c: Direction,
                scaled: bool = True) -> UbiReport:
    """Inequality evaluated with the full (local + nonlocal) subspace correlation.

    With ``scaled`` each correlation is divided by the weight N of its measured
    subspace.

    Raises:
        UnderflowError: a subspace weight is at or below 1e-300 (scaled only).
    """
    values = []
    for x, y in ((a, b), (a, c), (b, c)):
        report = subspace_correlation(state, x, y)
        if scaled:
            n = report.subspace_probability
            if not n > UNDERFLOW_GUARD:
                raise UnderflowError(
                    f"subspace weight N={n:.3e} too small at (theta={x.theta}, phi={x.phi}), "
                    f"(theta={y.theta}, phi={y.phi})"
                )
            values.append(report.p_total / n)
        else:
            values.append(report.p_total)
    return _report(*values, scaled=scaled)


def equatorial_ps(spin: Spin, polarization: Polarization, phi_a: float, phi_b: float, phi_c: float,
                  *, check: bool = True) -> float:
    """Scaled ``p_s`` for equatorial directions and ``xi = eta = pi/4``.

    Equals ``sin[2s(pa -+ pb)] sin[2s(pa -+ pc)] - |sin[2s(pb -+ pc)]|`` (upper
    sign antiparallel).  Only meaningful for half-integer spin: for integer
    spin the nonlocal part vanishes and the scaled correlations are zero or
    undefined.
    """
    if not spin.is_half_integer:
        raise ValueError(f"equatorial reduction requires half-integer spin, got s={spin}")
    sgn = -polarization.sign
    ts = spin.twice_s
    value = (math.sin(ts * (phi_a - sgn * phi_b)) * math.sin(ts * (phi_a - sgn * phi_c))
             - abs(math.sin(ts * (phi_b - sgn * phi_c))))
    if check:
        q = math.pi / 4
        state = make_cat_state(spin, polarization, q, q)
        eq = [Direction(math.pi / 2, p) for p in (phi_a, phi_b, phi_c)]
        reference = ubi_quantum(state, *eq, scaled=True).p_s
        if abs(reference - value) > EQUATORIAL_TOL:
            raise ConsistencyError(f"equatorial formula {value} != subspace evaluation {reference}")
    return value


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for :func:`max_violation_search`.

    The coarse stage evaluates two deterministic grids: an equatorial one
    (all theta = pi/2) with ``grid_points`` azimuths per direction and
    ``state_points`` values of xi and eta on [0, pi), and an off-equator one
    with ``theta_points`` polar angles (pi/2 included) and coarser azimuth and
    state grids.  The ``top_k`` best cells, plus ``restarts`` seeded random
    points, are refined by compass search whose step halves until it drops
    below ``tolerance``.
    """

    grid_points: int = 24
    theta_points: int = 5
    state_points: int = 8
    refine_iterations: int = 200
    tolerance: float = 1e-8
    top_k: int = 4
    restarts: int = 0
    seed: int = 0
    scaled: bool = True
    chunk_size: int = 1 << 18

    def __post_init__(self):
        if self.grid_points < 2 or self.state_points < 2:
            raise ValueError("grid_points and state_points must be at least 2")
        if self.theta_points < 3 or self.theta_points % 2 == 0:
            raise ValueError("theta_points must be odd and >= 3 so that pi/2 lies on the grid")
        if self.refine_iterations < 0 or self.top_k < 1 or self.restarts < 0:
            raise ValueError("refine_iterations, top_k and restarts must be non-negative (top_k >= 1)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "SearchConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown search options: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ViolationSearchResult:
    best_p_s: float
    best_angles: tuple[float, float, float, float, float, float]
    """``(theta_a, phi_a, theta_b, phi_b, theta_c, phi_c)``"""
    best_state_params: tuple[float, float]
    evaluations: int
    converged: bool
    spin: str = ""
    polarization: str = ""
    scaled: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["best_angles"] = list(self.best_angles)
        d["best_state_params"] = list(self.best_state_params)
        return d

    def directions(self) -> tuple[Direction, Direction, Direction]:
        t = self.best_angles
        return Direction(t[0], t[1]), Direction(t[2], t[3]), Direction(t[4], t[5])


# parameter vector layout
_THETA_IDX = (0, 2, 4)
_NPARAM = 8  # theta_a, phi_a, theta_b, phi_b, theta_c, phi_c, xi, eta


def _objective(spin: Spin, pol: Polarization, x: np.ndarray, scaled: bool) -> np.ndarray:
    """p_s for a batch of parameter vectors, shape (n, 8); -inf where N underflows."""
    ta, pa, tb, pb, tc, pc, xi, eta = x.T
    valid = np.ones(x.shape[0], dtype=bool)
    ps = []
    for t1, p1, t2, p2 in ((ta, pa, tb, pb), (ta, pa, tc, pc), (tb, pb, tc, pc)):
        p_lc, p_nlc, n = correlation_closed_form(spin, pol, xi, eta, t1, p1, t2, p2)
        p = p_lc + p_nlc
        if scaled:
            ok = n > UNDERFLOW_GUARD
            valid &= ok
            p = np.where(ok, p / np.where(ok, n, 1.0), 0.0)
        ps.append(p)
    out = ps[0] * ps[1] - np.abs(ps[2])
    return np.where(valid, out, -np.inf)


def _coarse_grids(cfg: SearchConfig):
    two_pi = 2 * math.pi
    phis = np.arange(cfg.grid_points) * two_pi / cfg.grid_points
    states = np.arange(cfg.state_points) * math.pi / cfg.state_points
    half = math.pi / 2
    yield [(half,), phis, (half,), phis, (half,), phis, states, states]

    thetas = np.linspace(0.0, math.pi, cfg.theta_points)
    n_phi = max(4, cfg.grid_points // 3)
    coarse_phis = np.arange(n_phi) * two_pi / n_phi
    n_state = max(2, cfg.state_points // 2)
    coarse_states = np.arange(n_state) * math.pi / n_state
    yield [thetas, coarse_phis, thetas, coarse_phis, thetas, coarse_phis, coarse_states, coarse_states]


def _grid_chunks(axes, chunk: int):
    """Cartesian product of ``axes`` as (n, 8) arrays, built without Python loops per row."""
    sizes = [len(a) for a in axes]
    total = math.prod(sizes)
    arrays = [np.asarray(a, dtype=float) for a in axes]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        cols = []
        for arr, size, stride in zip(arrays, sizes, _strides(sizes)):
            cols.append(arr[(idx // stride) % size])
        yield np.column_stack(cols)


def _strides(sizes):
    strides = []
    acc = 1
    for size in reversed(sizes):
        strides.append(acc)
        acc *= size
    return list(reversed(strides))


def _sort_key(p: float, x: np.ndarray):
    return (-p, tuple(np.round(x, 12)))


def _refine(spin, pol, x0, f0, cfg: SearchConfig):
    """Compass search with halving step; returns (x, f, evaluations, converged)."""
    x, fx = x0.copy(), f0
    step = 2 * math.pi / cfg.grid_points
    evaluations = 0
    eye = np.eye(_NPARAM)
    # improvements at rounding level must not move the point
    min_gain = 4 * np.finfo(float).eps
    for _ in range(cfg.refine_iterations):
        if step < cfg.tolerance:
            return x, fx, evaluations, True
        trial = np.vstack([x + step * eye, x - step * eye])
        trial[:, _THETA_IDX] = np.clip(trial[:, _THETA_IDX], 0.0, math.pi)
        values = _objective(spin, pol, trial, cfg.scaled)
        evaluations += len(trial)
        best = int(np.argmax(values))
        if values[best] > fx + min_gain:
            x, fx = trial[best], float(values[best])
        else:
            step /= 2
    return x, fx, evaluations, step < cfg.tolerance


def _canonical(x: np.ndarray) -> tuple[tuple[float, ...], tuple[float, float]]:
    two_pi = 2 * math.pi
    angles = []
    for i in range(3):
        d = Direction.canonical(float(x[2 * i]), float(x[2 * i + 1]))
        angles += [d.theta, d.phi]
    return tuple(angles), (float(x[6]) % two_pi, float(x[7]) % two_pi)


def max_violation_search(spin: Spin, polarization: Polarization,
                         config: SearchConfig | None = None) -> ViolationSearchResult:
    """Maximize ``p_s`` over the three directions and the state parameters (xi, eta).

    Deterministic for a given config: a fixed coarse grid, compass-search
    refinement of the best cells, then optional seeded random restarts.  Ties
    go to the lexicographically smallest angle tuple.  The winner is
    re-evaluated through the brute-force subspace route.

    Raises:
        ConsistencyError: the maximum exceeds 1 + 1e-9 or the two evaluation
            routes disagree at the optimum.
    """
    cfg = config or SearchConfig()
    pol = Polarization.parse(polarization)
    evaluations = 0

    candidates: list[tuple[float, np.ndarray]] = []
    for axes in _coarse_grids(cfg):
        for block in _grid_chunks(axes, cfg.chunk_size):
            values = _objective(spin, pol, block, cfg.scaled)
            evaluations += len(block)
            k = min(cfg.top_k, len(values))
            top = np.argpartition(-values, k - 1)[:k]
            candidates += [(float(values[i]), block[i]) for i in top]
            candidates = sorted(candidates, key=lambda c: _sort_key(*c))[: cfg.top_k]

    if cfg.restarts:
        rng = np.random.default_rng(cfg.seed)
        starts = rng.uniform(0.0, 2 * math.pi, size=(cfg.restarts, _NPARAM))
        starts[:, _THETA_IDX] = rng.uniform(0.0, math.pi, size=(cfg.restarts, 3))
        values = _objective(spin, pol, starts, cfg.scaled)
        evaluations += cfg.restarts
        candidates += list(zip(values.tolist(), starts))

    finals = []
    for f0, x0 in candidates:
        x, fx, n_eval, converged = _refine(spin, pol, x0, f0, cfg)
        evaluations += n_eval
        angles, state_params = _canonical(x)
        finals.append((fx, angles, state_params, converged))

    best_p = max(f[0] for f in finals)
    tied = [f for f in finals if f[0] >= best_p - VIOLATION_TOL]
    best = min(tied, key=lambda f: f[1] + f[2])
    p_s, angles, state_params, converged = best

    if p_s > CEILING:
        raise ConsistencyError(f"search exceeded the violation ceiling: p_s={p_s!r}")
    result = ViolationSearchResult(
        best_p_s=p_s,
        best_angles=angles,
        best_state_params=state_params,
        evaluations=evaluations,
        converged=converged,
        spin=str(spin),
        polarization=pol.value,
        scaled=cfg.scaled,
    )
    _verify(spin, pol, result)
    return result


def _verify(spin: Spin, pol: Polarization, result: ViolationSearchResult) -> None:
    state = make_cat_state(spin, pol, *result.best_state_params)
    check = ubi_quantum(state, *result.directions(), scaled=result.scaled).p_s
    # near-empty subspaces make the scaled ratio ill-conditioned
    if abs(check - result.best_p_s) > 1e-7:
        raise ConsistencyError(
            f"optimum p_s={result.best_p_s} not reproduced by brute force ({check})"
        )
