import math

import numpy as np
import pytest

from bellcat import (
    Direction, Polarization, Spin, density_decomposition, extended_bi_check, full_correlation,
    full_correlation_via_eigenbasis, make_cat_state, projection_operator,
)

from conftest import HALF, QUARTER, equator, random_direction

SPINS = [1, 2, 3, 4, 5]


def dense_trace(state, a, b):
    """Independent oracle: Tr[(S.a x S.b) rho] on the dense density matrices."""
    omega = np.kron(projection_operator(state.spin, a), projection_operator(state.spin, b))
    dec = density_decomposition(state)
    s2 = state.spin.value ** 2
    return (np.trace(omega @ dec.rho_local).real / s2, np.trace(omega @ dec.rho_nonlocal).real / s2)


def test_spin32_aligned_local():
    r = full_correlation(make_cat_state("3/2", "anti", 0.4, 1.0), Direction(0, 0), Direction(0, 0))
    assert r.raw_P_local == pytest.approx(-9 / 4, abs=1e-14)
    assert r.p_local == pytest.approx(-1.0, abs=1e-14)
    assert r.normalization_used == 9 / 4


def test_equatorial_a_kills_local(rng):
    for _ in range(10):
        state = make_cat_state(Spin(int(rng.integers(1, 8))), "para", *rng.uniform(0, 3, 2))
        assert full_correlation(state, equator(rng.uniform(0, 6)), random_direction(rng)).p_local == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("pol", list(Polarization))
@pytest.mark.parametrize("twice_s", SPINS)
def test_matches_dense_oracle(pol, twice_s, rng):
    for _ in range(20):
        state = make_cat_state(Spin(twice_s), pol, *rng.uniform(0, 2 * math.pi, 2))
        a, b = random_direction(rng), random_direction(rng)
        r = full_correlation(state, a, b)
        lc, nlc = dense_trace(state, a, b)
        assert r.p_local == pytest.approx(lc, abs=1e-13)
        assert r.p_nonlocal == pytest.approx(nlc, abs=1e-13)
        assert r.p_total == pytest.approx(r.p_local + r.p_nonlocal, abs=1e-13)
        assert r.p_local == pytest.approx(pol.sign * math.cos(a.theta) * math.cos(b.theta), abs=1e-12)
        if twice_s > 1:
            assert abs(r.p_nonlocal) <= 1e-12


def test_spin_half_nonlocal_closed_form(rng):
    for pol in Polarization:
        for _ in range(50):
            xi, eta = rng.uniform(0, 2 * math.pi, 2)
            a, b = random_direction(rng), random_direction(rng)
            r = full_correlation(make_cat_state("1/2", pol, xi, eta), a, b)
            phase = a.phi + pol.sign * b.phi + 2 * eta
            expected = math.sin(2 * xi) * math.sin(a.theta) * math.sin(b.theta) * math.cos(phase)
            assert r.p_nonlocal == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("twice_s", [1, 2, 3, 4, 5, 8, 15])
def test_eigenbasis_agrees(twice_s, rng):
    for pol in Polarization:
        for _ in range(10):
            state = make_cat_state(Spin(twice_s), pol, *rng.uniform(0, 2 * math.pi, 2))
            a, b = random_direction(rng), random_direction(rng)
            direct, via = full_correlation(state, a, b), full_correlation_via_eigenbasis(state, a, b)
            assert via.p_local == pytest.approx(direct.p_local, abs=1e-11)
            assert via.p_nonlocal == pytest.approx(direct.p_nonlocal, abs=1e-11)


def test_spin_half_eigenbasis_examples():
    a = b = Direction(HALF, 0.3)
    r = full_correlation_via_eigenbasis(make_cat_state("1/2", "anti", QUARTER, QUARTER), a, b)
    assert r.p_total == pytest.approx(0.0, abs=1e-12)
    r = full_correlation_via_eigenbasis(make_cat_state("1/2", "anti", QUARTER, 0.0), a, b)
    assert r.p_total == pytest.approx(1.0, abs=1e-12)


def test_spin_one_total(rng):
    state = make_cat_state(1, "anti", 0.8, 0.1)
    for _ in range(20):
        a, b = random_direction(rng), random_direction(rng)
        assert full_correlation_via_eigenbasis(state, a, b).p_total == pytest.approx(
            -math.cos(a.theta) * math.cos(b.theta), abs=1e-12)


def test_extended_bi_spin32(rng):
    for _ in range(200):
        state = make_cat_state("3/2", "anti", *rng.uniform(0, 6, 2))
        lhs, violated = extended_bi_check(state, *(random_direction(rng) for _ in range(3)))
        assert not violated and lhs <= 1


def test_extended_bi_spin_half():
    state = make_cat_state("1/2", "anti", QUARTER, QUARTER)
    # on the equator p(x, y) = -sin(phi_x - phi_y) for this state
    lhs, violated = extended_bi_check(state, equator(HALF), equator(0.0), equator(0.0))
    assert lhs == pytest.approx(0.0, abs=1e-12) and not violated
    lhs, violated = extended_bi_check(state, equator(HALF), equator(math.pi), equator(0.0))
    assert lhs == pytest.approx(2.0, abs=1e-12) and violated


def test_extended_bi_same_direction(rng):
    for _ in range(20):
        a = random_direction(rng)
        state = make_cat_state(Spin(int(rng.integers(1, 6))), "para", *rng.uniform(0, 6, 2))
        lhs, violated = extended_bi_check(state, a, a, a)
        assert lhs == pytest.approx(-abs(full_correlation(state, a, a).p_total), abs=1e-15)
        assert lhs <= 0 and not violated
