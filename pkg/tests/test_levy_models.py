import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hardy_kernels import DomainError, LevyModel, check_profile_conditions
from hardy_kernels.levy_models import bessel_k_integral, sphere_area, stable_density_constant

# mpmath references (25+ digits).  The defect symbols subtract the closed-form mass
# from an oscillatory mpmath integral of the tabulated defect.
TEMPERED_SYMBOL = {0.3: 0.01688772673709762004, 2.0: 0.68645154207871403199, 10.0: 7.9432416658089634973}
LAYERED_SYMBOL = {0.5: 0.16933026413956759298, 3.0: 1.2092600843498365223}


@pytest.mark.parametrize("d, alpha, expected", [
    (1, 0.5, 0.19947114020071633897),
    (3, 1.0, 1.0 / math.pi**2),
    (3, 1.5, 0.11905056737670181835),
])
def test_stable_density_constant(d, alpha, expected):
    assert stable_density_constant(d, alpha) == pytest.approx(expected, rel=1e-14)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_relativistic_symbol_closed_form():
    m = LevyModel(3, 1.0, "relativistic", m=1.0)
    rho = np.array([0.0, 1e-8, 0.3, 3.0, 1e4])
    np.testing.assert_allclose(m.symbol(rho), rho**2 / (np.sqrt(rho**2 + 1) + 1), rtol=1e-12, atol=0)
    assert m.symbol(3.0) == pytest.approx(2.16228, abs=5e-6)


@pytest.mark.parametrize("model", [LevyModel(3, 1.0, "relativistic", m=1.0), LevyModel(1, 0.5, "relativistic", m=2.0)])
@pytest.mark.parametrize("rho", [0.3, 2.0, 10.0])
def test_symbol_from_levy_khintchine_matches_closed_form(model, rho):
    assert model._symbol_exact(rho) == pytest.approx(float(model.symbol(rho)), rel=1e-8)


@pytest.mark.parametrize("exact, rtol", [(True, 1e-8), (False, 1e-6)])
def test_tempered_and_layered_symbols(exact, rtol):
    tm = LevyModel(3, 1.0, "tempered", lam=1.0, beta=2.0)
    ly = LevyModel(1, 0.5, "layered", gamma=1.0)
    for model, table in ((tm, TEMPERED_SYMBOL), (ly, LAYERED_SYMBOL)):
        rho = np.array(list(table))
        np.testing.assert_allclose(model.symbol(rho, exact=exact), list(table.values()), rtol=rtol)


@pytest.mark.parametrize("mu, x", [(0.75, 0.01), (1.5, 2.0), (2.0, 30.0), (1.0, 1e-4)])
def test_bessel_integral_matches_scipy(mu, x):
    assert bessel_k_integral(mu, x) == pytest.approx(special.kv(mu, x), rel=1e-10)


MODELS = [
    LevyModel(3, 1.0, "relativistic", m=1.0),
    LevyModel(1, 0.5, "relativistic", m=1.0),
    LevyModel(3, 1.0, "tempered", lam=1.0, beta=2.0),
    LevyModel(1, 0.5, "layered", gamma=1.0),
]


@pytest.mark.parametrize("model", MODELS, ids=lambda m: f"{m.kind}-d{m.d}")
def test_density_plus_defect_is_stable(model):
    r = np.geomspace(1e-4, 1e2, 60)
    sigma = model.sigma_density(r)
    assert np.all(sigma >= 0)
    np.testing.assert_allclose(model.density(r) + sigma, model.stable_density(r), rtol=1e-11)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: f"{m.kind}-d{m.d}")
def test_sigma_mass_numeric_matches_closed_form(model):
    assert model.sigma_mass_numeric() == pytest.approx(model.sigma_mass, rel=1e-7)


def test_relativistic_defect_small_radius():
    # 1 - nu/nu_stable ~ (z/2)^2 / (mu - 1) as z -> 0, mu = (d + alpha)/2
    m = LevyModel(3, 1.0, "relativistic", m=1.0)
    r = np.array([1e-6, 1e-4])
    ratio = m.sigma_density(r) / m.stable_density(r)
    np.testing.assert_allclose(ratio, (r / 2) ** 2 / (2.0 - 1.0), rtol=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(1e-3, 50.0))
def test_relativistic_density_below_stable(mass, r):
    m = LevyModel(3, 1.0, "relativistic", m=mass)
    assert 0 < m.density(r) <= m.stable_density(r)


def test_dict_roundtrip():
    for model in MODELS + [LevyModel(3, 1.5)]:
        assert LevyModel.from_dict(model.to_dict()) == model
    assert LevyModel.from_dict({"d": 3, "alpha": 1, "kind": "tempered", "lambda": 2.0, "beta": 3.0}).lam == 2.0


@pytest.mark.parametrize("kwargs", [
    dict(d=2, alpha=1.0),
    dict(d=1, alpha=1.0),
    dict(d=3, alpha=1.0, kind="gamma"),
    dict(d=3, alpha=1.0, kind="relativistic", m=0.0),
    dict(d=3, alpha=1.0, kind="tempered", beta=0.5),
    dict(d=3, alpha=1.0, kind="layered", gamma=-1.0),
])
def test_invalid_models(kwargs):
    with pytest.raises(DomainError):
        LevyModel(**kwargs)


def test_unknown_field_rejected():
    with pytest.raises(DomainError):
        LevyModel.from_dict({"d": 3, "alpha": 1.0, "mass": 1.0})


def test_density_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        LevyModel(3, 1.0).density(np.array([0.0, 1.0]))


@pytest.mark.parametrize("model", [LevyModel(3, 1.0), LevyModel(1, 0.5, "relativistic")], ids=["stable", "rel"])
def test_profile_conditions_pass(model):
    rep = check_profile_conditions(model)
    assert rep.passed
    assert rep.constants["c_nu_by_psi"] > 0
    assert rep.residuals["sigma_min_relative"] >= 0
