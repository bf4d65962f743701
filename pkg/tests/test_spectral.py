import math

import numpy as np
import pytest
from scipy import integrate

from hardy_kernels import DomainError, HardyCoupling, LevyModel, kappa_star
from hardy_kernels.duhamel import RadialFunction
from hardy_kernels.spectral import (
    GroundState,
    birman_schwinger_mu,
    decay_exponent_fits,
    default_radii,
    form_energy,
    form_identity_residual,
    fourier_form_energy,
    hardy_ratio,
    herbst_check,
    herbst_lower,
    l2_norm_sq,
    mu_curve,
    potential_energy,
    sigma_pairing,
)

STABLE3 = LevyModel(3, 1.0)
REL3 = LevyModel(3, 1.0, "relativistic", m=1.0)
R = np.geomspace(1e-4, 12.0, 400)
GAUSS = RadialFunction(R, np.exp(-R * R / 2), 0.0)


def _relativistic_gauss_energy() -> float:
    # (2 pi)^-3 int (sqrt(rho^2 + 1) - 1) (2 pi)^3 e^{-rho^2} d^3 rho, cancellation-free
    val, _ = integrate.quad(lambda x: x ** 4 / (math.sqrt(x * x + 1) + 1) * math.exp(-x * x), 0, np.inf,
                            epsabs=0.0, epsrel=1e-13)
    return 4.0 * math.pi * val


@pytest.mark.parametrize("model, expected", [
    (STABLE3, 2.0 * math.pi),
    (LevyModel(1, 0.5), math.gamma(0.75)),
    (REL3, None),
])
def test_form_energy_of_gaussian(model, expected):
    if expected is None:
        expected = _relativistic_gauss_energy()
    assert form_energy(model, GAUSS) == pytest.approx(expected, rel=1e-6)


def test_fourier_form_energy_matches_closed_form():
    fhat = lambda x: (2.0 * math.pi) ** 1.5 * math.exp(-x * x / 2)  # noqa: E731
    assert fourier_form_energy(STABLE3, fhat) == pytest.approx(2.0 * math.pi, rel=1e-10)


def test_potential_energy_and_hardy_ratio_of_gaussian():
    # int e^{-r^2} |x|^{-1} d^3x = 2 pi, equal to the alpha = 1 form energy
    assert potential_energy(GAUSS, 3, 1.0) == pytest.approx(2.0 * math.pi, rel=1e-7)
    assert hardy_ratio(1.0, 3, GAUSS) == pytest.approx(1.0, rel=1e-6)
    assert hardy_ratio(1.0, 3, GAUSS) <= 1.0 / kappa_star(3, 1.0)


def test_l2_norm_of_gaussian():
    assert l2_norm_sq(GAUSS, 3) == pytest.approx(math.pi ** 1.5, rel=1e-7)


def test_form_identity_and_sigma_pairing():
    assert form_identity_residual(REL3, GAUSS) < 1e-6
    assert form_identity_residual(STABLE3, GAUSS) == 0.0
    assert sigma_pairing(STABLE3, GAUSS) == 0.0
    assert sigma_pairing(REL3, GAUSS) > 0.0


def test_form_energy_rejects_non_decaying_input():
    with pytest.raises(DomainError):
        form_energy(STABLE3, RadialFunction(R, np.ones_like(R), 0.0))


def test_potential_energy_rejects_nonintegrable_hint():
    with pytest.raises(DomainError):
        potential_energy(RadialFunction(R, np.exp(-R), 1.0), 3, 1.0)


def test_mu_curve_decreases_in_lambda_for_relativistic_model():
    c = HardyCoupling.from_kappa(3, 1.0, 0.5)
    mu = mu_curve(REL3, c, [0.2, 0.5, 1.0], radii=default_radii(128))
    assert np.all(np.diff(mu) < 0)


def test_stable_mu_stays_below_scale_invariant_value_and_grows_with_range():
    # the Galerkin value is a lower bound for kappa / kappa*, approached as the grid widens
    c = HardyCoupling.from_kappa(3, 1.0, 0.5)
    bound = c.kappa / c.kappa_star
    narrow, _ = birman_schwinger_mu(STABLE3, c, 1.0, radii=default_radii(128))
    wide, vec = birman_schwinger_mu(STABLE3, c, 1.0, radii=default_radii(192, 1e-8, 1e4))
    assert narrow < wide < bound
    assert bound - wide < 0.01
    assert np.all(vec.values > 0)


def test_herbst_lower_closed_form():
    assert herbst_lower(1.0, 0.5) == pytest.approx(math.sqrt(1 - math.pi ** 2 / 16), rel=1e-15)
    assert herbst_lower(2.0, 0.0) == 2.0
    with pytest.raises(DomainError):
        herbst_lower(1.0, 0.7)


@pytest.mark.parametrize("model, coupling", [
    (LevyModel(3, 1.0, "tempered", lam=1.0, beta=2.0), HardyCoupling.from_kappa(3, 1.0, 0.5)),
    (REL3, HardyCoupling.from_kappa(3, 1.5, 0.2)),
    (REL3, HardyCoupling.from_kappa(3, 1.0, 2.0 / math.pi)),
])
def test_solver_domain_errors(model, coupling):
    with pytest.raises(DomainError):
        birman_schwinger_mu(model, coupling, 1.0, radii=default_radii(32))


@pytest.mark.slow
def test_ground_state_roundtrip_and_checks(ground_state_256):
    gs = ground_state_256
    back = GroundState.from_dict(gs.to_dict())
    assert back.E == gs.E
    assert back.lambda_star == gs.lambda_star
    np.testing.assert_array_equal(back.phi.values, gs.phi.values)
    np.testing.assert_array_equal(back.phi.radii, gs.phi.radii)
    rep = herbst_check(gs)
    assert rep.passed
    assert rep.constants["lower"] <= gs.E_m < 1.0
    assert gs.E == pytest.approx(-gs.lambda_star)


@pytest.mark.slow
def test_decay_fits_require_windows(ground_state_256):
    short = GroundState(ground_state_256.model, ground_state_256.coupling, ground_state_256.E,
                        ground_state_256.lambda_star,
                        RadialFunction(ground_state_256.phi.radii[:100], ground_state_256.phi.values[:100]))
    with pytest.raises(DomainError):
        decay_exponent_fits(short)


def test_herbst_check_rejects_other_models():
    phi = RadialFunction(R, np.exp(-R))
    gs = GroundState(STABLE3, HardyCoupling.from_kappa(3, 1.0, 0.5), -0.1, 0.1, phi)
    with pytest.raises(DomainError):
        herbst_check(gs)
