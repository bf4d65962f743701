import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_kernels import DomainError, HardyCoupling, LevyModel, kappa_star
from hardy_kernels.duhamel import (
    CellSemigroup,
    RadialFunction,
    mass_bound_check,
    perturbed_apply_radial,
    perturbed_kernel_1d,
)
from hardy_kernels.kernel_engine import heat_kernel

REL1 = LevyModel(1, 0.5, "relativistic", m=1.0)
STABLE1 = LevyModel(1, 0.5)
KS1 = kappa_star(1, 0.5)
RADII = np.geomspace(1e-3, 1e2, 48)


@pytest.fixture(scope="module")
def tables():
    out = {}
    for frac in (0.0, 0.3, 0.6):
        c = HardyCoupling.from_kappa(1, 0.5, frac * KS1)
        out[frac] = perturbed_kernel_1d(REL1, c, radii=RADII, T=0.5, k_steps=8)
    return out


@pytest.mark.parametrize("d, expected", [(1, 1.0), (3, math.pi)])
def test_norm_of_exponential(d, expected):
    # ||e^{-r}||^2 is 2 * 1/2 in d = 1 and 4 pi * 2/8 in d = 3
    r = np.geomspace(1e-6, 60.0, 4000)
    f = RadialFunction(r, np.exp(-r), 0.0)
    assert f.norm2(d) ** 2 == pytest.approx(expected, rel=1e-5)


def test_norm_uses_singular_core():
    # f = r^{-1/4} on (0, 1] in d = 1: ||f||^2 = 2 * int_0^1 r^{-1/2} dr = 4
    r = np.geomspace(1e-8, 1.0, 2000)
    f = RadialFunction(r, r**-0.25, 0.25)
    assert f.norm2(1) ** 2 == pytest.approx(4.0, rel=1e-5)


def test_radial_function_interpolation_and_validation():
    r = np.geomspace(0.1, 10.0, 21)
    f = RadialFunction(r, r**-0.5, 0.5)
    assert f(1.0) == pytest.approx(1.0)
    assert f(0.01) == pytest.approx(10.0)
    with pytest.raises(DomainError):
        RadialFunction(r, np.ones(3))
    with pytest.raises(DomainError):
        RadialFunction(r, np.full(21, np.nan))
    with pytest.raises(DomainError):
        RadialFunction(r, np.ones(21), -1.0)


def test_zero_coupling_reproduces_free_kernel(tables):
    tab = tables[0.0]
    np.testing.assert_array_equal(tab.values, tab.free)
    np.testing.assert_array_equal(tab.opposite, tab.free_opposite)


def test_free_cell_kernel_matches_point_kernel(tables):
    # away from the diagonal the cell-averaged kernel approaches p_t(x - y)
    tab = tables[0.0]
    i, j = 30, 10
    t = tab.times[-1]
    point = heat_kernel(REL1, float(t), abs(RADII[i] - RADII[j]))
    assert tab.free[-1, i, j] == pytest.approx(point, rel=0.05)


def test_kernel_symmetric_and_monotone_in_coupling(tables):
    for tab in tables.values():
        np.testing.assert_allclose(tab.values, np.swapaxes(tab.values, 1, 2), rtol=1e-12)
    assert np.all(tables[0.3].values >= tables[0.0].values)
    assert np.all(tables[0.6].values >= tables[0.3].values)
    # opposite-side cells far below the same-side kernel are lost to cancellation
    low, high = tables[0.3], tables[0.6]
    resolvable = np.abs(low.opposite) > 1e-8 * np.abs(low.values)
    assert np.all(high.opposite[resolvable] >= low.opposite[resolvable] * (1 - 1e-12))


def test_table_metadata(tables):
    tab = tables[0.6]
    assert tab.kind == "perturbed"
    assert tab.hardy.kappa == pytest.approx(0.6 * KS1)
    assert tab.n_terms > 0
    np.testing.assert_allclose(tab.times, 0.5 * np.arange(1, 9) / 8)


def test_cell_semigroup_conserves_mass():
    # even sector: the cell matrix applied to 1 integrates the kernel over the line
    op = CellSemigroup(REL1, np.geomspace(1e-4, 1e5, 200), 1)
    ones = op.apply(0.5, np.ones(op.n))
    assert np.all(ones[20:120] == pytest.approx(1.0, abs=2e-3))


@pytest.mark.parametrize("d, alpha", [(1, 0.5), (3, 1.0)])
def test_zero_coupling_preserves_constants(d, alpha):
    model = LevyModel(d, alpha, "relativistic", m=1.0)
    # the cell discretization error is second order; 40 points per decade keeps it below 1e-3
    r = np.geomspace(1e-4, 1e5, 361)
    out = perturbed_apply_radial(model, HardyCoupling.from_kappa(d, alpha, 0.0), 0.5,
                                 RadialFunction(r, np.ones_like(r), 0.0), k_steps=8)
    sel = (r > 1e-2) & (r < 1e2)
    np.testing.assert_allclose(out.values[sel], 1.0, atol=2e-3)


@settings(max_examples=5, deadline=None)
@given(st.floats(0.1, 0.9))
def test_perturbation_raises_constants(frac):
    r = np.geomspace(1e-4, 1e5, 121)
    c = HardyCoupling.from_kappa(1, 0.5, frac * KS1)
    out = perturbed_apply_radial(STABLE1, c, 0.25, RadialFunction(r, np.ones_like(r), 0.0), k_steps=8, tol=1e-5)
    sel = (r > 1e-2) & (r < 1e2)
    assert np.all(out.values[sel] > 1.0)


def test_series_and_march_agree_on_radial_action():
    r = np.geomspace(1e-4, 1e5, 121)
    c = HardyCoupling.from_kappa(3, 1.0, 0.3)
    h = RadialFunction(r, np.exp(-r), 0.0)
    model = LevyModel(3, 1.0, "relativistic")
    a = perturbed_apply_radial(model, c, 0.5, h, k_steps=8, tol=1e-10)
    b = perturbed_apply_radial(model, c, 0.5, h, k_steps=8, method="march")
    sel = (r > 1e-2) & (r < 10)
    np.testing.assert_allclose(a.values[sel], b.values[sel], rtol=1e-6)


def test_mass_bound_check_is_finite_and_stable():
    rep = mass_bound_check(REL1, HardyCoupling.from_kappa(1, 0.5, 0.5 * KS1), [0.25],
                           radii=np.geomspace(1e-3, 1e4, 71), k_steps=8)
    assert rep.passed
    assert 0 < rep.constants["c_upper"] < 10


def test_domain_errors():
    c = HardyCoupling.from_kappa(1, 0.5, 0.05)
    with pytest.raises(DomainError):
        perturbed_kernel_1d(LevyModel(3, 1.0), HardyCoupling.from_kappa(3, 1.0, 0.1))
    with pytest.raises(DomainError):
        perturbed_kernel_1d(LevyModel(1, 0.4), c)
    with pytest.raises(DomainError):
        perturbed_kernel_1d(REL1, c, radii=RADII[:8], method="picard")
    r = np.geomspace(1e-3, 1e2, 20)
    with pytest.raises(DomainError):
        perturbed_apply_radial(REL1, c, 5.0, RadialFunction(r, np.ones_like(r)))
    with pytest.raises(DomainError):
        perturbed_apply_radial(REL1, c, 0.5, RadialFunction(r, np.ones_like(r), 0.3))
