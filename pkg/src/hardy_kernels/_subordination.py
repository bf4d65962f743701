"""Gaussian subordination for stable and relativistic kernels.

The isotropic ``alpha``-stable process is Brownian motion (generator ``Delta``)
run with an ``alpha/2``-stable subordinator, and the relativistic process uses the
same subordinator exponentially tilted by ``exp(m t - m^{2/alpha} tau)``.  Every
radial quantity needed downstream is then a positive mixture of Gaussian
quantities, which avoids the cancellation of oscillatory Fourier integrals in the
far field.

The one-sided ``beta``-stable density ``eta_1`` (Laplace exponent ``lambda^beta``)
is evaluated by Kanter's integral for moderate arguments and by its convergent
power series for large ones.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

LOG_H = 0.1
_LOGU_HI = math.log(1e40)
_SERIES_SWITCH = 20.0


def _kanter(u: float, beta: float) -> float:
    """``eta_1(u)`` from Kanter's positive integral representation."""
    p = 1.0 / (1.0 - beta)

    def k(phi: float) -> float:
        return (math.sin(beta * phi) / math.sin(phi)) ** p * math.sin((1.0 - beta) * phi) / math.sin(beta * phi)

    x = u ** (-beta * p)

    def f(phi: float) -> float:
        kv = k(phi)
        return kv * math.exp(-x * kv)

    val, _ = integrate.quad(f, 0.0, math.pi, epsabs=0.0, epsrel=1e-13, limit=400)
    return beta * p * u ** (-p) / math.pi * val


def _series(u: float, beta: float) -> float:
    """Convergent large-argument series of ``eta_1``."""
    total = 0.0
    for k in range(1, 400):
        size = math.exp(math.lgamma(k * beta + 1.0) - math.lgamma(k + 1.0) - (k * beta + 1.0) * math.log(u))
        total += (-1) ** (k + 1) * size * math.sin(math.pi * k * beta) / math.pi
        # the sine factor can vanish, so test the magnitude without it
        if size < 1e-17 * abs(total) and k > 3:
            break
    return total


def eta1(u: float, beta: float) -> float:
    """Density of the one-sided ``beta``-stable law with Laplace exponent ``lambda^beta``."""
    if u <= 0:
        return 0.0
    if beta == 0.5:
        return 0.5 / math.sqrt(math.pi) * u**-1.5 * math.exp(-0.25 / u)
    if u >= _SERIES_SWITCH:
        return _series(u, beta)
    return _kanter(u, beta)


@lru_cache(maxsize=16)
def log_eta1_table(beta: float) -> tuple[np.ndarray, np.ndarray]:
    """``(log u, log eta_1(u))`` on a uniform log grid of step :data:`LOG_H`.

    The lower end is where ``eta_1`` underflows; the upper end is ``u = 1e40``.
    """
    # eta_1(u) ~ exp(-c u^{-beta/(1-beta)}) as u -> 0; find where it reaches e^{-700}
    lo = 0.0
    while True:
        v = eta1(math.exp(lo), beta)
        if v <= 0.0 or math.log(v) < -700.0:
            break
        lo -= 1.0
    logs = np.arange(lo, _LOGU_HI + LOG_H / 2, LOG_H)
    vals = np.array([eta1(math.exp(s), beta) for s in logs])
    good = vals > 0
    return logs[good], np.log(vals[good])


def tail_mass(beta: float) -> float:
    """``int_{u_hi}^inf eta_1`` from the leading term of the series."""
    u_hi = math.exp(_LOGU_HI)
    return math.gamma(beta + 1.0) * math.sin(math.pi * beta) / math.pi * u_hi ** (-beta) / beta


def tau_quadrature(alpha: float, t: float, m: float = 0.0):
    """Nodes and log-weights for ``int f(tau) eta_t(tau) dtau``.

    Parameters
    ----------
    alpha : float
        Stability index, so ``beta = alpha/2``.
    t : float
        Time.
    m : float
        Relativistic mass; ``0`` for the stable law.

    Returns
    -------
    tau, logw : ndarray
        ``sum exp(logw) f(tau)`` approximates the mixture integral.
    """
    beta = 0.5 * alpha
    logu, logeta = log_eta1_table(beta)
    scale = t ** (1.0 / beta)
    tau = scale * np.exp(logu)
    logw = logeta + logu + math.log(LOG_H)
    logw[0] -= math.log(2.0)
    logw[-1] -= math.log(2.0)
    if m > 0:
        mass = m ** (2.0 / alpha)
        logw = logw + m * t - mass * tau
    keep = logw > -745.0
    return tau[keep], logw[keep]


def potential_quadrature(alpha: float, lam: float, m: float = 0.0, power: int = 0):
    """Nodes and log-weights for ``int f(tau) u(tau) dtau``.

    ``u(tau) = int_0^inf t^power / power! e^{-lam t} eta_t(tau) dt`` is the
    (time-weighted) potential density of the subordinator.  With ``power = n - 1``
    this produces the ``n``-fold convolution power of the resolvent kernel.
    """
    beta = 0.5 * alpha
    logu, logeta = log_eta1_table(beta)
    mass = m ** (2.0 / alpha) if m > 0 else 0.0
    log_tau = np.arange(-70.0, 70.0 + LOG_H / 2, LOG_H)
    tau = np.exp(log_tau)
    # substitute t = (tau/u)^beta: eta_t(tau) dt = beta tau^{beta-1} u^{-beta} eta_1(u) du
    wu = logeta + logu + math.log(LOG_H) - beta * logu
    log_t = beta * (log_tau[:, None] - logu[None, :])
    t = np.exp(log_t)
    expo = wu[None, :] - (lam - m) * t
    if power:
        expo = expo + power * log_t - math.lgamma(power + 1.0)
    inner = special.logsumexp(expo, axis=1)
    logw = math.log(beta) + (beta - 1.0) * log_tau + inner - mass * tau + log_tau + math.log(LOG_H)
    keep = logw > -745.0
    return tau[keep], logw[keep]


def gaussian_mixture(tau: np.ndarray, logw: np.ndarray, x: np.ndarray, what: str, d: int = 1) -> np.ndarray:
    """Evaluate a Gaussian mixture quantity at ``x >= 0``.

    ``what`` selects ``density`` (``d``-dimensional), ``survival`` (one-dimensional
    ``P(X > x)``), ``moment`` (``int_0^x u p_1(u) du``) or ``ramp``
    (``int_0^x (x - u) p_1(u) du``).
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    out = np.empty_like(flat)
    chunk = max(1, 4_000_000 // max(tau.size, 1))
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk, None]
        if what == "density":
            g = logw - 0.5 * d * np.log(4.0 * math.pi * tau) - xs**2 / (4.0 * tau)
            out[start:start + chunk] = np.exp(special.logsumexp(g, axis=1))
        elif what == "survival":
            # log(erfc(z)/2) = log Phi(-sqrt(2) z)
            g = logw + special.log_ndtr(-xs / np.sqrt(2.0 * tau))
            out[start:start + chunk] = np.exp(special.logsumexp(g, axis=1))
        elif what == "moment":
            q = xs**2 / (4.0 * tau)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = logw + 0.5 * np.log(tau / math.pi) + np.log(-np.expm1(-q))
            with np.errstate(divide="ignore", invalid="ignore"):
                out[start:start + chunk] = np.exp(special.logsumexp(g, axis=1))
        elif what == "ramp":
            g = logw + 0.5 * np.log(tau) + _log_ramp(xs**2 / (4.0 * tau))
            out[start:start + chunk] = np.exp(special.logsumexp(g, axis=1))
        else:
            raise ValueError(what)
    return out.reshape(x.shape)


_RAMP_COEF = np.array([(-1.0) ** k / (math.factorial(k) * (2 * k + 1) * (2 * k + 2)) for k in range(16)])


def _log_ramp(q: np.ndarray) -> np.ndarray:
    """``log h(q)`` with ``h(q) = sqrt(q) erf(sqrt(q)) - (1 - e^{-q})/sqrt(pi)``.

    A unit-weight Gaussian component with ``e^{-u^2/4 tau}`` contributes ``sqrt(tau) h(x^2/4 tau)``
    to the ramp integral.  A power series avoids cancellation for small ``q``.
    """
    q = np.broadcast_to(q, q.shape).astype(float)
    out = np.empty_like(q)
    small = q < 0.5
    qs = q[small]
    with np.errstate(divide="ignore"):
        out[small] = np.log(2.0 / math.sqrt(math.pi) * qs * np.polynomial.polynomial.polyval(qs, _RAMP_COEF))
        qb = q[~small]
        out[~small] = np.log(np.sqrt(qb) * special.erf(np.sqrt(qb)) + np.expm1(-qb) / math.sqrt(math.pi))
    return out
