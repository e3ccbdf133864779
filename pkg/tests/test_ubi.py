import json
import math

import numpy as np
import pytest

from bellcat import (
    ConsistencyError, Direction, Polarization, SearchConfig, Spin, eigensystem, equatorial_ps, make_cat_state,
    max_violation_search, projection_operator, ubi_local, ubi_quantum,
)
from bellcat.scs import half_angle

from conftest import HALF, QUARTER, equator, random_direction


def eigen_oracle(state, x, y):
    """Scaled subspace correlation from numerically diagonalized projection operators."""
    spin = state.spin
    ex = eigensystem(projection_operator(spin, x))
    ey = eigensystem(projection_operator(spin, y))
    psi = state.vector()
    ends = (0, spin.twice_s)
    probs = np.array([abs(np.vdot(np.kron(ex.vector(i), ey.vector(j)), psi)) ** 2 for i in ends for j in ends])
    return float(probs @ [1, -1, -1, 1] / probs.sum())


def test_report_invariants(rng):
    for _ in range(200):
        state = make_cat_state(Spin(int(rng.integers(1, 8))), "anti", *rng.uniform(0, 6, 2))
        r = ubi_quantum(state, *(random_direction(rng) for _ in range(3)), scaled=False)
        assert r.p_s == pytest.approx(r.p_ab * r.p_ac - abs(r.p_bc), abs=1e-13)
        assert r.violated == (r.p_s > 1e-12)
        assert json.loads(json.dumps(r.to_dict())) == r.to_dict()


@pytest.mark.parametrize("pol", list(Polarization))
def test_local_never_violates(pol, rng):
    for _ in range(2000):
        state = make_cat_state(Spin(int(rng.integers(1, 16))), pol, *rng.uniform(0, 6, 2))
        r = ubi_local(state, *(random_direction(rng) for _ in range(3)))
        assert r.p_s <= 1e-12 and not r.violated


def test_local_same_b_c(rng):
    for _ in range(50):
        state = make_cat_state(Spin(int(rng.integers(1, 8))), "para", 0.1, 0.2)
        a, b = random_direction(rng), random_direction(rng)
        r = ubi_local(state, a, b, b)
        n = 2 * state.spin.twice_s
        kb, gb = half_angle(b.theta)
        assert r.p_bc == pytest.approx((kb**n - gb**n) ** 2, abs=1e-15)
        assert r.p_s == pytest.approx(r.p_ab**2 - abs(r.p_bc), abs=1e-15)
        assert r.p_s <= 1e-15


def test_local_equatorial_zero():
    r = ubi_local(make_cat_state("5/2", "anti", 0.3, 0.3), equator(0.1), equator(1), equator(2))
    assert (r.p_ab, r.p_ac, r.p_bc, r.p_s) == pytest.approx((0, 0, 0, 0), abs=1e-15)


@pytest.mark.parametrize("twice_s", range(1, 31))
def test_equator_kills_local_factor(twice_s):
    k, g = half_angle(HALF)
    assert abs(k ** (2 * twice_s) - g ** (2 * twice_s)) <= 1e-15


@pytest.mark.parametrize("spin,phi_a", [("1/2", HALF), ("3/2", HALF), ("5/2", 3 * math.pi / 10), ("7/2", HALF)])
def test_quantum_maximum(spin, phi_a):
    state = make_cat_state(spin, "anti", QUARTER, QUARTER)
    r = ubi_quantum(state, equator(phi_a), equator(0.0), equator(0.0))
    assert r.p_s == pytest.approx(1.0, abs=1e-12) and r.violated


def test_quantum_matches_eigen_oracle(rng):
    for _ in range(40):
        state = make_cat_state(Spin(int(rng.integers(1, 6))), rng.choice(["anti", "para"]), *rng.uniform(0, 6, 2))
        a, b, c = (random_direction(rng) for _ in range(3))
        r = ubi_quantum(state, a, b, c)
        assert r.p_ab == pytest.approx(eigen_oracle(state, a, b), abs=1e-10)
        assert r.p_bc == pytest.approx(eigen_oracle(state, b, c), abs=1e-10)


def test_integer_unscaled_equals_local(rng):
    for twice_s in (2, 4, 6):
        for _ in range(50):
            state = make_cat_state(Spin(twice_s), "anti", *rng.uniform(0, 6, 2))
            dirs = [random_direction(rng) for _ in range(3)]
            q = ubi_quantum(state, *dirs, scaled=False)
            assert q.p_s == pytest.approx(ubi_local(state, *dirs).p_s, abs=1e-15)
            assert not q.violated


def test_integer_scaled_near_equator():
    # dividing by N lets an integer-spin state exceed zero near the equator
    state = make_cat_state("1", "anti", QUARTER, 0.0)
    t = 1.62
    a, b = Direction(t, 5 * math.pi / 4), Direction(t, 7 * math.pi / 4)
    expected = eigen_oracle(state, a, b) ** 2 - abs(eigen_oracle(state, b, b))
    r = ubi_quantum(state, a, b, b)
    assert expected == pytest.approx(0.9951619316352139, abs=1e-12)
    assert r.p_s == pytest.approx(expected, abs=1e-10)
    assert ubi_quantum(state, a, b, b, scaled=False).p_s < 0


def test_equatorial_examples():
    sp = Spin.parse
    assert equatorial_ps(sp("3/2"), Polarization.ANTIPARALLEL, HALF, 0, 0) == pytest.approx(1.0, abs=1e-12)
    assert equatorial_ps(sp("5/2"), Polarization.ANTIPARALLEL, 3 * math.pi / 10, 0, 0) == pytest.approx(1.0, abs=1e-12)
    assert equatorial_ps(sp("5/2"), Polarization.PARALLEL, 0.7, 0.7, 0.7, check=False) == pytest.approx(
        math.sin(7) ** 2 - abs(math.sin(7)), abs=1e-12)
    assert equatorial_ps(sp("7/2"), Polarization.ANTIPARALLEL, 1.3, 1.3, 1.3) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError, match="half-integer"):
        equatorial_ps(Spin(2), Polarization.ANTIPARALLEL, 0, 0, 0)


@pytest.mark.parametrize("pol", list(Polarization))
@pytest.mark.parametrize("twice_s", [1, 3, 5, 7, 9])
def test_equatorial_matches_subspace_and_period(pol, twice_s, rng):
    spin = Spin(twice_s)
    for _ in range(20):
        pa, pb, pc = rng.uniform(0, 2 * math.pi, 3)
        v = equatorial_ps(spin, pol, pa, pb, pc)  # checks ubi_quantum internally
        shifted = equatorial_ps(spin, pol, pa + 2 * math.pi / twice_s, pb, pc)
        assert shifted == pytest.approx(v, abs=1e-12)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(theta_points=4)
    with pytest.raises(ValueError):
        SearchConfig(tolerance=0)
    with pytest.raises(ValueError, match="unknown"):
        SearchConfig.from_dict({"grid": 5})
    assert SearchConfig.from_dict({"grid_points": 12}).grid_points == 12


def test_search_spin_half():
    r = max_violation_search(Spin(1), Polarization.ANTIPARALLEL)
    assert r.best_p_s == pytest.approx(1.0, abs=1e-6)
    assert r.converged
    np.testing.assert_allclose(r.best_angles, [HALF, 0, HALF, HALF, HALF, HALF], atol=1e-9)
    np.testing.assert_allclose(r.best_state_params, [QUARTER, QUARTER], atol=1e-9)


def test_search_is_deterministic():
    cfg = SearchConfig(grid_points=8, state_points=4, restarts=2, seed=7)
    first = max_violation_search(Spin(3), Polarization.PARALLEL, cfg)
    assert first == max_violation_search(Spin(3), Polarization.PARALLEL, cfg)
    assert first.best_p_s <= 1 + 1e-9


@pytest.mark.parametrize("twice_s", [2, 4, 6])
def test_search_integer_unscaled(twice_s):
    r = max_violation_search(Spin(twice_s), Polarization.ANTIPARALLEL, SearchConfig(scaled=False))
    assert r.best_p_s <= 1e-9
    assert not r.scaled
