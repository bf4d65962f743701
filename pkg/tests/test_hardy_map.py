import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_kernels import DomainError, HardyCoupling, delta_of_kappa, h_factor, kappa_of_delta, kappa_star

# reference values from mpmath at 30 digits
MPMATH_KAPPA_STAR = {
    (1, 0.5): 0.13999967745248263087,
    (3, 0.5): 0.81597791751976735986,
    (3, 1.0): 0.63661977236758134308,
    (3, 1.5): 0.44642959996256534301,
}
MPMATH_KAPPA = {
    (1, 0.5, 0.1): 0.09315557510374568983,
    (3, 1.5, 0.4): 0.35289669204701944895,
}


@pytest.mark.parametrize("key", MPMATH_KAPPA_STAR)
def test_kappa_star_matches_high_precision(key):
    assert kappa_star(*key) == pytest.approx(MPMATH_KAPPA_STAR[key], rel=1e-13)


@pytest.mark.parametrize("key", MPMATH_KAPPA)
def test_kappa_of_delta_matches_high_precision(key):
    assert kappa_of_delta(*key) == pytest.approx(MPMATH_KAPPA[key], rel=1e-13)


@pytest.mark.parametrize("d, alpha", list(MPMATH_KAPPA_STAR))
def test_right_endpoint_is_critical(d, alpha):
    top = 0.5 * (d - alpha)
    assert kappa_of_delta(d, alpha, top) == pytest.approx(kappa_star(d, alpha), rel=1e-13)
    assert delta_of_kappa(d, alpha, kappa_star(d, alpha)) == top


def test_zero_maps_to_zero():
    assert kappa_of_delta(3, 1.0, 0.0) == 0.0
    assert delta_of_kappa(3, 1.0, 0.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(MPMATH_KAPPA_STAR)), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_map_is_increasing(dims, u, v):
    d, alpha = dims
    top = 0.5 * (d - alpha)
    lo, hi = sorted((u * top, v * top))
    if hi - lo > 1e-9:
        assert kappa_of_delta(d, alpha, lo) < kappa_of_delta(d, alpha, hi)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(MPMATH_KAPPA_STAR)), st.floats(0.001, 0.999))
def test_roundtrip(dims, u):
    d, alpha = dims
    delta = u * 0.5 * (d - alpha)
    assert delta_of_kappa(d, alpha, kappa_of_delta(d, alpha, delta)) == pytest.approx(delta, abs=1e-10)


@pytest.mark.parametrize("call", [
    lambda: kappa_star(2, 1.0),
    lambda: kappa_star(1, 1.0),
    lambda: kappa_star(3, 2.0),
    lambda: kappa_of_delta(3, 1.0, 1.2),
    lambda: kappa_of_delta(3, 1.0, -0.1),
    lambda: delta_of_kappa(3, 1.0, 0.7),
    lambda: delta_of_kappa(3, 1.0, -1e-3),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_coupling_constructors_agree():
    a = HardyCoupling.from_kappa(3, 1.0, 0.5)
    b = HardyCoupling.from_delta(3, 1.0, a.delta)
    assert a.delta == pytest.approx(0.5, abs=1e-12)
    assert b.kappa == pytest.approx(0.5, rel=1e-12)
    assert a.to_dict()["kappa_star"] == pytest.approx(2 / math.pi)


def test_h_factor():
    assert h_factor(1.0, 1.0, 1.0, 0.5) == 2.0
    assert h_factor(4.0, 1.0, 0.5, 1.0) == pytest.approx(1.0 + 16.0)
    assert h_factor(1.0, 0.0, 1.0, 0.5) == math.inf
    assert h_factor(1.0, 0.0, 1.0, 0.0) == 2.0
    r = np.array([0.5, 2.0])
    np.testing.assert_allclose(h_factor(1.0, r, 1.0, 1.0), 1 + 1 / r)
