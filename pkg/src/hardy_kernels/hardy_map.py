"""Coupling constant <-> singularity exponent correspondence.

For the Hardy potential ``V(x) = kappa |x|^{-alpha}`` in dimension ``d`` the
function ``|x|^{-delta}`` is invariant for the perturbed stable semigroup
exactly when ``kappa = kappa_of_delta(d, alpha, delta)``.  The map is strictly
increasing on ``(0, (d - alpha)/2]`` and its value at the right end point is
the sharp constant of the fractional Hardy inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "HardyCoupling",
    "check_alpha",
    "kappa_of_delta",
    "kappa_star",
    "delta_of_kappa",
    "h_factor",
]

_BISECT_LOWER = 1e-9
_BISECT_MAXITER = 200


def check_alpha(d: int, alpha: float) -> None:
    """Raise :class:`DomainError` unless ``d in {1, 3}`` and ``0 < alpha < min(2, d)``."""
    if d not in (1, 3):
        raise DomainError(f"dimension must be 1 or 3, got {d}")
    if not (0.0 < alpha < min(2.0, d)):
        raise DomainError(f"alpha must lie in (0, {min(2, d)}), got {alpha}")


def kappa_of_delta(d: int, alpha: float, delta: float) -> float:
    """Coupling constant for which ``|x|^{-delta}`` is invariant.

    Parameters
    ----------
    d : int
        Space dimension.
    alpha : float
        Stability index.
    delta : float
        Exponent in ``[0, (d - alpha)/2]``.  ``delta = 0`` returns 0.

    Returns
    -------
    float
        ``2^a G((a+delta)/2) G((d-delta)/2) / (G(delta/2) G((d-a-delta)/2))``.
    """
    check_alpha(d, alpha)
    top = 0.5 * (d - alpha)
    if delta < 0.0 or delta > top * (1.0 + 1e-14):
        raise DomainError(f"delta must lie in [0, {top}], got {delta}")
    if delta == 0.0:
        return 0.0
    delta = min(delta, top)
    g = math.gamma
    return (
        2.0**alpha
        * g(0.5 * (alpha + delta))
        * g(0.5 * (d - delta))
        / (g(0.5 * delta) * g(0.5 * (d - alpha - delta)))
    )


def kappa_star(d: int, alpha: float) -> float:
    """Critical Hardy constant ``2^a G((d+a)/4)^2 / G((d-a)/4)^2``."""
    check_alpha(d, alpha)
    return 2.0**alpha * (math.gamma(0.25 * (d + alpha)) / math.gamma(0.25 * (d - alpha))) ** 2


def delta_of_kappa(d: int, alpha: float, kappa: float) -> float:
    """Invert :func:`kappa_of_delta` by bisection.

    Raises
    ------
    DomainError
        If ``kappa`` is negative or supercritical.
    """
    ks = kappa_star(d, alpha)
    if kappa < 0.0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    if kappa > ks * (1.0 + 1e-12):
        raise DomainError(f"supercritical coupling: kappa={kappa} > kappa_star={ks}")
    if kappa == 0.0:
        return 0.0
    top = 0.5 * (d - alpha)
    if kappa >= ks:
        return top
    lo, hi = _BISECT_LOWER, top
    if kappa <= kappa_of_delta(d, alpha, lo):
        return lo
    for _ in range(_BISECT_MAXITER):
        mid = 0.5 * (lo + hi)
        if kappa_of_delta(d, alpha, mid) < kappa:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * top:
            break
    return 0.5 * (lo + hi)


def h_factor(t, r, alpha: float, delta: float):
    """Comparison factor ``1 + (t^{-1/alpha} r)^{-delta}``.

    Returns ``inf`` at ``r = 0`` when ``delta > 0``.  Accepts arrays.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        out = 1.0 + (t ** (-1.0 / alpha) * r) ** (-delta)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class HardyCoupling:
    """A coupling ``kappa`` together with its exponent ``delta``."""

    d: int
    alpha: float
    kappa: float
    delta: float

    @classmethod
    def from_kappa(cls, d: int, alpha: float, kappa: float) -> "HardyCoupling":
        return cls(d, alpha, float(kappa), delta_of_kappa(d, alpha, kappa))

    @classmethod
    def from_delta(cls, d: int, alpha: float, delta: float) -> "HardyCoupling":
        return cls(d, alpha, kappa_of_delta(d, alpha, delta), float(delta))

    @property
    def kappa_star(self) -> float:
        return kappa_star(self.d, self.alpha)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "delta": self.delta,
            "kappa_star": self.kappa_star,
        }
