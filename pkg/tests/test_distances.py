import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from amprox import distances as dist
from amprox.errors import DomainError

LN2 = math.log(2.0)
pos = st.floats(0.01, 50.0)


def vecs(n=3, lo=0.01, hi=50.0):
    return arrays(float, n, elements=st.floats(lo, hi))


def test_kl_scalar_values():
    assert dist.kl(1, 1) == 0.0
    assert dist.kl(0, 3) == 3.0
    assert dist.kl(2, 1) == pytest.approx(2 * LN2 - 1, abs=1e-15)
    assert dist.kl(2, 1) == pytest.approx(0.386294, abs=1e-6)
    assert dist.kl(1, 0) == math.inf


def test_kl_rejects_negative_and_nan():
    with pytest.raises(DomainError):
        dist.kl(-1, 1)
    with pytest.raises(DomainError):
        dist.kl_vec([1.0, math.nan], [1.0, 1.0])


def test_kl_vec_values():
    assert dist.kl_vec([1, 1], [1, 1]) == 0.0
    assert dist.kl_vec([1, 1], [2, 2]) == pytest.approx(2 * (1 - LN2), abs=1e-15)
    assert dist.kl_vec([0, 1], [1, 1]) == pytest.approx(1.0)


def test_kl_split_examples():
    total, mass, shape = dist.kl_split([1, 1], [2, 2])
    assert total == pytest.approx(0.613706, abs=1e-6)
    assert mass == pytest.approx(total, abs=1e-15)
    assert shape == pytest.approx(0.0, abs=1e-15)
    assert dist.kl_split([1, 2], [1, 2]) == pytest.approx((0, 0, 0))
    total, mass, shape = dist.kl_split([2, 0], [1, 1])
    assert total == pytest.approx(2 * LN2)
    assert mass == pytest.approx(0.0)
    assert shape == pytest.approx(total)


def test_hellinger_and_pearson_values():
    assert dist.hellinger([4], [1]) == 1.0
    assert dist.hellinger([1], [4]) == 1.0
    assert dist.pearson([1], [4]) == 2.25
    assert dist.pearson([4], [1]) == 9.0
    with pytest.raises(DomainError):
        dist.pearson([1], [0])


def test_weighted_sq():
    assert dist.weighted_sq([1.5, 0.75], [0, 0], [1, 4]) == pytest.approx(4.5)
    x, z = np.array([1.0, -2.0, 3.0]), np.array([0.5, 1.0, -1.0])
    assert dist.weighted_sq(x, z, np.ones(3)) == pytest.approx(dist.sq_euclid(x, z))


def test_bregman_of_entropy_is_kl():
    h = lambda x: float(np.sum(x * np.log(x) - x))  # noqa: E731
    x, z = np.array([0.3, 2.0]), np.array([1.1, 0.7])
    assert dist.bregman(h, np.log, x, z) == pytest.approx(dist.kl_vec(x, z), abs=1e-14)
    assert dist.bregman(h, np.log, x, x) == 0.0


def test_phi_distance_entropy_matches_kl():
    assert dist.phi_distance(dist.ENTROPY_PHI, [2.0], [1.0]) == pytest.approx(2 * LN2 - 1, abs=1e-15)
    assert dist.phi_distance(dist.HELLINGER_PHI, [1.0, 2.0], [1.0, 2.0]) == 0.0


def test_validate_phi_hellinger_passes_and_square_fails():
    grid = np.logspace(-2, 2, 200)
    rep = dist.validate_phi(dist.HELLINGER_PHI, grid)
    assert rep.passed, rep.summary()
    square = dist.PhiSpec(lambda t: t * t, lambda t: 2 * t, 2.0, "square")
    bad = dist.validate_phi(square, grid)
    assert not bad.passed
    assert "normalized_at_one" in bad.notes


def test_validate_phi_notes_dropped_points():
    rep = dist.validate_phi(dist.HELLINGER_PHI, [0.001, 0.5, 2.0])
    assert rep.passed
    assert "0.01" in rep.notes


def test_phi_spec_requires_positive_curvature():
    with pytest.raises(DomainError):
        dist.PhiSpec(lambda t: 0.0, lambda t: 0.0, 0.0, "flat")


def test_shannon_entropy():
    assert dist.shannon_entropy([1.0]) == 0.0
    assert dist.shannon_entropy([0.0, 0.0]) == 0.0
    assert dist.shannon_entropy([0.5, 0.5]) == pytest.approx(LN2)


@settings(max_examples=200, deadline=None)
@given(vecs(), vecs())
def test_divergences_nonnegative_and_zero_on_diagonal(x, z):
    for fn in (dist.kl_vec, dist.hellinger, dist.pearson):
        assert fn(x, z) >= -1e-12
        assert fn(x, x) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(vecs(), vecs())
def test_kl_split_adds_up(x, z):
    total, mass, shape = dist.kl_split(x, z)
    assert total == pytest.approx(mass + shape, rel=1e-10, abs=1e-10)
    assert mass >= -1e-12 and shape >= -1e-12


@settings(max_examples=100, deadline=None)
@given(vecs(), vecs())
def test_hellinger_symmetric(x, z):
    assert dist.hellinger(x, z) == pytest.approx(dist.hellinger(z, x), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(vecs(2, 0.05, 20.0), vecs(2, 0.05, 20.0))
def test_phi_distance_with_root_kernel_is_hellinger(x, z):
    # d_phi with phi=(sqrt t - 1)^2 reduces to the Hellinger distance
    assert dist.phi_distance(dist.HELLINGER_PHI, x, z) == pytest.approx(dist.hellinger(x, z), rel=1e-10)
