"""Free heat kernels, resolvent kernels and the identities that relate them.

Two independent evaluation routes are provided for every radial kernel:

* ``mixture``: a positive Gaussian-mixture integral (subordination), available
  for the stable and relativistic models.  This is the default route for those
  models because it keeps full relative accuracy in the far field.
* ``fourier``: the radial Fourier inversion integral evaluated with QUADPACK's
  oscillatory (Fourier-weighted) rule.  It is used for the tempered and layered
  models and as a cross-check everywhere else.

A radial ``d = 3`` quantity is related to the one-dimensional quantity with the
same symbol through ``p_3(r) = -p_1'(r) / (2 pi r)``.  The half-line operators
used by :mod:`hardy_kernels.duhamel` and :mod:`hardy_kernels.spectral` are
assembled from the one-dimensional survival function ``S(x) = P(X_1 > x)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import _subordination as sub
from .errors import DomainError, NumericError
from .levy_models import LevyModel, sphere_area
from .report import AuditReport, FAIL, PASS

__all__ = [
    "RadialGrid",
    "KernelTable",
    "Profile1D",
    "heat_profile",
    "resolvent_profile",
    "heat_kernel",
    "fourier_heat_kernel",
    "cauchy_oracle",
    "radial_mass",
    "kernel_mass",
    "heat_table",
    "radial_convolution",
    "chapman_kolmogorov_residual",
    "subordination_relation_check",
    "resolvent",
    "fourier_resolvent",
    "laplace_resolvent",
    "angular_averaged_resolvent",
    "angular_averaged_resolvent_quadrature",
    "resolvent_convolution_check",
    "log_slope",
]


# ---------------------------------------------------------------------------------
# grids and tables


@dataclass(frozen=True)
class RadialGrid:
    """Log-spaced radii and increasing times.

    Parameters
    ----------
    radii : ndarray
        Strictly increasing positive radii.
    times : ndarray
        Strictly increasing positive times.
    """

    radii: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.geomspace(1e-2, 2.0, 64))

    def __post_init__(self) -> None:
        r = np.asarray(self.radii, dtype=float)
        t = np.asarray(self.times, dtype=float)
        if r.ndim != 1 or r.size < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise DomainError("radii must be positive and strictly increasing")
        if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("times must be positive and strictly increasing")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "times", t)

    @classmethod
    def log(cls, n: int = 512, r_min: float = 1e-3, r_max: float = 1e2, m: int = 64,
            t_min: float = 1e-2, t_max: float = 2.0) -> "RadialGrid":
        """Default log grid: ``n`` radii in ``[r_min, r_max]``, ``m`` times in ``[t_min, t_max]``."""
        if not (0 < r_min < r_max) or n < 2:
            raise DomainError("need 0 < r_min < r_max and n >= 2")
        return cls(np.geomspace(r_min, r_max, n), np.geomspace(t_min, t_max, m))

    @property
    def n(self) -> int:
        return self.radii.size

    def edges(self) -> np.ndarray:
        """Cell boundaries: 0, geometric midpoints, and a mirrored last edge."""
        r = self.radii
        mid = np.sqrt(r[:-1] * r[1:])
        return np.concatenate([[0.0], mid, [r[-1] ** 2 / mid[-1]]])

    def widths(self) -> np.ndarray:
        return np.diff(self.edges())

    def describe(self) -> dict:
        return {"n": self.n, "r_min": float(self.radii[0]), "r_max": float(self.radii[-1]),
                "m": int(self.times.size), "t_min": float(self.times[0]), "t_max": float(self.times[-1])}


@dataclass
class KernelTable:
    """Sampled kernel values indexed by (time or lambda, radius)."""

    kind: str
    model: LevyModel
    radii: np.ndarray
    params: np.ndarray
    values: np.ndarray
    coupling: dict | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("heat", "stable_heat", "resolvent", "perturbed"):
            raise DomainError(f"unknown table kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[-1] != np.asarray(self.radii).size:
            raise DomainError("values must end with the radial axis")

    @property
    def times(self) -> np.ndarray:
        return self.params


# ---------------------------------------------------------------------------------
# one-dimensional profiles


class Profile1D:
    """One-dimensional radial profile of a kernel with a given symbol.

    Holds the even density ``p1``, the survival function ``S(x) = int_x^inf p1`` and
    the ``d``-dimensional radial density ``pd``, evaluated exactly from a Gaussian
    mixture or through log-log cubic splines for bulk use.

    Parameters
    ----------
    tau, logw : ndarray
        Mixture nodes and log-weights.
    d : int
        Dimension used by :meth:`pd`.
    mass : float
        Total mass (1 for heat kernels, ``1/lambda`` for resolvents).
    scale : float
        Characteristic length used to place the interpolation grid.
    tail : float
        Survival mass beyond the mixture's largest node, added to :meth:`survival`.
    """

    def __init__(self, tau, logw, d: int, mass: float, scale: float, tail: float = 0.0):
        self.tau = tau
        self.logw = logw
        self.d = d
        self.mass = mass
        self.scale = scale
        self.tail = tail

    # exact evaluation
    def p1(self, x):
        return sub.gaussian_mixture(self.tau, self.logw, np.abs(np.asarray(x, dtype=float)), "density", 1)

    def pd(self, r):
        return sub.gaussian_mixture(self.tau, self.logw, np.abs(np.asarray(r, dtype=float)), "density", self.d)

    def survival(self, x):
        """``int_x^inf p1`` for ``x >= 0``."""
        return sub.gaussian_mixture(self.tau, self.logw, np.asarray(x, dtype=float), "survival") + self.tail

    def moment(self, x):
        """``int_0^x u p1(u) du`` for ``x >= 0``."""
        return sub.gaussian_mixture(self.tau, self.logw, np.asarray(x, dtype=float), "moment")

    def ramp(self, x):
        """``int_0^x (x - u) p1(u) du`` for ``x >= 0``, free of cancellation at small ``x``."""
        return sub.gaussian_mixture(self.tau, self.logw, np.asarray(x, dtype=float), "ramp")

    # interpolated evaluation
    def _table(self):
        if not hasattr(self, "_spl"):
            lx = np.arange(math.log(1e-9 * self.scale), math.log(1e9 * self.scale), 0.02)
            x = np.exp(lx)
            s = self.survival(x)
            p = self.p1(x)
            # exponentially decaying profiles underflow before the end of the range
            keep = (s > 1e-280) & (p > 1e-280)
            lx, s, p = lx[keep], s[keep], p[keep]
            self._spl = (lx, CubicSpline(lx, np.log(s)), CubicSpline(lx, np.log(p)),
                         float(self.survival(0.0)), float(self.p1(0.0)))
        return self._spl

    def survival_fast(self, x):
        """Spline version of :meth:`survival`, accurate to roughly 1e-10 relative."""
        lx, ss, _, _, _ = self._table()
        x = np.abs(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        # below the table the profile may be log- or power-singular: evaluate exactly
        small = x < math.exp(lx[0])
        if np.any(small):
            out[small] = self.survival(x[small])
        big = x > math.exp(lx[-1])
        mid = ~(small | big)
        out[mid] = np.exp(ss(np.log(x[mid])))
        if np.any(big):
            slope = float(ss(lx[-1], 1))
            out[big] = np.exp(ss(lx[-1]) + slope * (np.log(x[big]) - lx[-1]))
        return out

    def cdf_fast(self, x):
        """``int_{-inf}^x p1`` using the spline survival function."""
        x = np.asarray(x, dtype=float)
        s = self.survival_fast(x)
        return np.where(x >= 0, self.mass - s, s)

    def ramp_fast(self, x):
        """Spline version of :meth:`ramp`; exact evaluation outside the table."""
        if not hasattr(self, "_ramp_spl"):
            lx = np.arange(math.log(1e-9 * self.scale), math.log(1e9 * self.scale), 0.02)
            self._ramp_spl = (lx[0], lx[-1], CubicSpline(lx, np.log(self.ramp(np.exp(lx)))))
        lo, hi, spl = self._ramp_spl
        x = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        pos = x > 0
        lxx = np.log(x[pos])
        inside = (lxx >= lo) & (lxx <= hi)
        vals = np.empty_like(lxx)
        vals[inside] = np.exp(spl(lxx[inside]))
        if not np.all(inside):
            vals[~inside] = self.ramp(x[pos][~inside])
        out[pos] = vals
        return out

    def p1_fast(self, x):
        """Spline version of :meth:`p1`; exact below the table, power law above it."""
        lx, _, sp, _, _ = self._table()
        x = np.abs(np.asarray(x, dtype=float))
        lo, hi = lx[0], lx[-1]
        with np.errstate(divide="ignore"):
            lxx = np.log(x)
        inside = np.clip(lxx, lo, hi)
        out = np.exp(sp(inside) + np.where(lxx > hi, float(sp(hi, 1)) * (lxx - hi), 0.0))
        # the singular behaviour at the origin is not a power law when alpha = 1
        small = lxx < lo
        if np.any(small):
            out[small] = self.p1(x[small])
        return out


def _require_mixture(model: LevyModel) -> None:
    if model.kind not in ("stable", "relativistic"):
        raise DomainError("the mixture route covers the stable and relativistic models only")


@lru_cache(maxsize=256)
def _heat_profile_cached(model: LevyModel, t: float) -> Profile1D:
    m = model.m if model.kind == "relativistic" else 0.0
    tau, logw = sub.tau_quadrature(model.alpha, t, m)
    tail = 0.0 if m > 0 else 0.5 * sub.tail_mass(0.5 * model.alpha)
    return Profile1D(tau, logw, model.d, 1.0, t ** (1.0 / model.alpha), tail)


def heat_profile(model: LevyModel, t: float) -> Profile1D:
    """Mixture profile of the heat kernel at time ``t`` (cached)."""
    _require_mixture(model)
    if not t > 0:
        raise DomainError("time must be positive")
    return _heat_profile_cached(model, float(t))


@lru_cache(maxsize=64)
def _resolvent_profile_cached(model: LevyModel, lam: float, power: int) -> Profile1D:
    m = model.m if model.kind == "relativistic" else 0.0
    tau, logw = sub.potential_quadrature(model.alpha, lam, m, power)
    return Profile1D(tau, logw, model.d, lam ** (-(power + 1)), lam ** (-1.0 / model.alpha))


def resolvent_profile(model: LevyModel, lam: float, power: int = 0) -> Profile1D:
    """Mixture profile of ``int t^power/power! e^{-lam t} p_t dt`` (cached)."""
    _require_mixture(model)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    return _resolvent_profile_cached(model, float(lam), int(power))


# ---------------------------------------------------------------------------------
# heat kernels


def cauchy_oracle(t, r, d: int = 3):
    """Closed-form ``alpha = 1`` stable heat kernel.

    ``Gamma((d+1)/2) / pi^{(d+1)/2} * t / (t^2 + r^2)^{(d+1)/2}``.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    c = math.gamma(0.5 * (d + 1)) / math.pi ** (0.5 * (d + 1))
    out = c * t / (t * t + r * r) ** (0.5 * (d + 1))
    return out if out.ndim else float(out)


def _fourier_point(model: LevyModel, t: float, r: float, d: int, which: str = "heat", lam: float = 0.0) -> float:
    """One radial Fourier inversion integral.

    ``which = 'heat'`` uses ``exp(-t psi)``, ``'resolvent'`` uses ``1/(lam + psi)``.
    Small arguments are integrated without oscillatory weights; otherwise QUADPACK's
    Fourier-weighted rule is applied on ``[0, inf)`` with an absolute tolerance that
    is tightened until it sits well below the result.
    """
    if which == "heat":
        def f(x):
            return math.exp(-t * float(model.symbol(x)))
        length = t ** (1.0 / model.alpha)
    else:
        def f(x):
            return 1.0 / (lam + float(model.symbol(x)))
        length = lam ** (-1.0 / model.alpha)
    big = 1.0 / length
    norm = 1.0 / math.pi if d == 1 else 1.0 / (2.0 * math.pi**2)
    if which == "resolvent" and r == 0.0 and (d == 3 or model.alpha <= 1):
        raise DomainError("resolvent is infinite at the origin for this dimension and alpha")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if r == 0.0 or (which == "heat" and r < 4.0 * length):
            if d == 1:
                g = (lambda x: f(x) * math.cos(x * r))
            else:
                g = (lambda x: x * x * f(x) * (1.0 if r == 0 else math.sin(x * r) / (x * r)))
            edges = [0.0, big, 10 * big, 100 * big, 1e3 * big, 1e4 * big, np.inf]
            total = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                total += integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-12, limit=400)[0]
            return norm * total
        h = f if d == 1 else (lambda x: x * f(x))
        weight = "cos" if d == 1 else "sin"
        # plain quadrature up to a few oscillations past the decay scale, weighted rule after
        cut = max(big, 2.0 * math.pi / r) * 4.0
        trig = math.cos if d == 1 else math.sin
        head = integrate.quad(lambda x: h(x) * trig(x * r), 0.0, cut, epsabs=0.0, epsrel=1e-12,
                              limit=1000, points=[min(big, cut / 2)])[0]
        eps = 1e-12 * max(abs(head), 1e-300)
        tail = 0.0
        for _ in range(6):
            tail = integrate.quad(h, cut, np.inf, weight=weight, wvar=r, epsabs=eps, limlst=400, limit=800)[0]
            if abs(head + tail) * 1e-9 >= eps:
                break
            eps = max(abs(head + tail) * 1e-10, 1e-300)
        res = head + tail
        if not math.isfinite(res):
            raise NumericError(f"Fourier inversion failed at t={t}, r={r}")
        return norm * (res if d == 1 else res / r)


def fourier_heat_kernel(model: LevyModel, t: float, r) -> np.ndarray:
    """Heat kernel by radial Fourier inversion.

    ``d = 1``: ``(1/pi) int_0^inf exp(-t psi) cos(rho r) drho``.
    ``d = 3``: ``(1/(2 pi^2 r)) int_0^inf exp(-t psi) rho sin(rho r) drho``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.array([_fourier_point(model, t, float(x), model.d) for x in r])
    return out


def heat_kernel(model: LevyModel, t: float, r, method: str = "auto"):
    """Free heat kernel ``p_t(r)`` of the model in its own dimension.

    Parameters
    ----------
    model : LevyModel
        Lévy model.
    t : float
        Positive time.
    r : array_like
        Radii ``>= 0``; ``r = 0`` gives the analytic limit.
    method : {'auto', 'mixture', 'fourier'}
        Evaluation route.  ``auto`` picks ``mixture`` when available.

    Returns
    -------
    ndarray or float
    """
    if not t > 0:
        raise DomainError("time must be positive")
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise DomainError("radius must be nonnegative")
    if method == "auto":
        method = "mixture" if model.kind in ("stable", "relativistic") else "fourier"
    if method == "mixture":
        out = heat_profile(model, t).pd(ra)
    elif method == "fourier":
        out = fourier_heat_kernel(model, t, ra.reshape(-1)).reshape(ra.shape)
    else:
        raise DomainError(f"unknown method {method!r}")
    return out if np.ndim(out) else float(out)


def radial_mass(values: np.ndarray, radii: np.ndarray, d: int) -> float:
    """``int_{R^d} f`` for a radial profile sampled on a log grid (trapezoid in ``log r``)."""
    r = np.asarray(radii, dtype=float)
    integrand = sphere_area(d) * np.asarray(values) * r**d
    return float(np.trapezoid(integrand, np.log(r)))


def kernel_mass(values_fn: Callable, d: int, scale: float, decades: float = 12.0, per_decade: int = 200) -> float:
    """Total mass of a radial kernel in ``R^d``.

    Trapezoid in ``log r`` over ``scale * [10^-decades, 10^decades]``; the ball
    below the grid uses the first value, and the tail beyond it uses the power law
    fitted to the last two nodes.
    """
    r = scale * np.logspace(-decades, decades, int(2 * decades * per_decade) + 1)
    v = np.asarray(values_fn(r), dtype=float)
    body = radial_mass(v, r, d)
    head = sphere_area(d) * v[0] * r[0] ** d / d
    if v[-1] <= 0.0:
        return body + head
    slope = math.log(v[-1] / v[-2]) / math.log(r[-1] / r[-2])
    tail = sphere_area(d) * v[-1] * r[-1] ** d / -(slope + d) if slope + d < 0 else math.inf
    return body + head + tail


def heat_table(model: LevyModel, grid: RadialGrid, stable: bool = False) -> KernelTable:
    """Tabulate ``p_t(r)`` (or ``p^{(alpha)}_t`` when ``stable``) on the grid."""
    base = model.stable_version() if stable else model
    vals = np.stack([np.asarray(heat_kernel(base, float(t), grid.radii)) for t in grid.times])
    return KernelTable(
        kind="stable_heat" if stable else "heat",
        model=model,
        radii=grid.radii,
        params=grid.times,
        values=vals,
        metadata={"route": "mixture" if base.kind in ("stable", "relativistic") else "fourier"},
    )


# ---------------------------------------------------------------------------------
# convolutions


def _gauss(n: int = 20):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _half_line_nodes(r: float, scale: float, r_far: float = 1e8):
    """Gauss nodes on ``[0, r_far]`` graded toward ``0`` and toward ``r``."""
    lo = 1e-10 * scale
    pts = {0.0, r_far}
    pts.update(np.geomspace(lo, r_far, int(math.log(r_far / lo) / math.log(2.0)) + 1).tolist())
    if r > 0:
        off = np.geomspace(1e-10 * max(scale, r * 1e-3), r, 60)
        pts.update((r - off).tolist())
        pts.update((r + off).tolist())
        pts.add(r)
        pts.add(2 * r)
    edges = np.array(sorted(p for p in pts if 0.0 <= p <= r_far))
    edges = edges[np.concatenate([[True], np.diff(edges) > 0])]
    x, w = _gauss(12)
    a, b = edges[:-1], edges[1:]
    nodes = (a[:, None] + (b - a)[:, None] * x[None, :]).ravel()
    weights = ((b - a)[:, None] * w[None, :]).ravel()
    return nodes, weights


def radial_convolution(f1: Callable, g: Callable, r, d: int, scale: float = 1.0, fd: Callable | None = None):
    """Convolution of two radial functions evaluated at radii ``r``.

    Parameters
    ----------
    f1 : callable
        For ``d = 1`` the first radial function.  For ``d = 3`` the one-dimensional
        profile ``F1`` with ``f(w) = -F1'(w)/(2 pi w)``, so that the angular average
        reduces to ``(F1(|r-rho|) - F1(r+rho)) / (4 pi r rho)``.
    g : callable
        Second radial function (in its own dimension).
    d : int
        Dimension.
    scale : float
        Typical length used to grade the quadrature near the origin.

    Returns
    -------
    ndarray
        ``(f * g)(r)``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    for i, ri in enumerate(r):
        rho, w = _half_line_nodes(ri, scale)
        gv = g(rho)
        if d == 1:
            out[i] = np.sum(w * gv * (f1(np.abs(ri - rho)) + f1(ri + rho)))
        else:
            if ri == 0.0:
                if fd is None:
                    raise DomainError("d = 3 convolution at r = 0 needs the 3-d density")
                out[i] = np.sum(w * gv * fd(rho) * 4.0 * math.pi * rho**2)
            else:
                out[i] = np.sum(w * rho * gv * (f1(np.abs(ri - rho)) - f1(ri + rho))) / ri
    return out


def chapman_kolmogorov_residual(table: KernelTable, s: float, t: float, radii=None) -> float:
    """Max relative deviation of ``p_s * p_t`` from ``p_{s+t}`` over the table radii.

    The convolution uses the exact mixture profiles of the table's model; ``s``,
    ``t`` and ``s + t`` must lie within the table's time range.
    """
    times = table.times
    lo, hi = times[0] * (1 - 1e-12), times[-1] * (1 + 1e-12)
    if not (lo <= s <= hi and lo <= t <= hi and lo <= s + t <= hi):
        raise DomainError("s, t and s+t must lie inside the table time range")
    model = table.model if table.kind == "heat" else table.model.stable_version()
    d = model.d
    ps, pt, pst = heat_profile(model, s), heat_profile(model, t), heat_profile(model, s + t)
    r = table.radii if radii is None else np.asarray(radii, dtype=float)
    scale = min(s, t) ** (1.0 / model.alpha)
    conv = radial_convolution(ps.p1, pt.pd, r, d, scale=scale, fd=ps.pd)
    exact = pst.pd(r)
    return float(np.max(np.abs(conv - exact) / exact))


# ---------------------------------------------------------------------------------
# tabulated radial functions used for convolution powers


class _LogTable:
    """Even radial function on a log grid with log-log cubic interpolation.

    Near the origin the first value is held constant; beyond the last node a
    power law with the final log-log slope is used.
    """

    def __init__(self, r: np.ndarray, v: np.ndarray):
        self.r = r
        self.v = np.maximum(v, 1e-300)
        self.spl = CubicSpline(np.log(r), np.log(self.v))
        self.tail_slope = float(self.spl(math.log(r[-1]), 1))

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        lo = x <= self.r[0]
        hi = x >= self.r[-1]
        mid = ~(lo | hi)
        out[lo] = self.v[0]
        out[mid] = np.exp(self.spl(np.log(x[mid])))
        out[hi] = self.v[-1] * (x[hi] / self.r[-1]) ** self.tail_slope
        return out


def subordination_relation_check(model: LevyModel, t: float, grid: RadialGrid | None = None, k_max: int = 8,
                                 r_check: float = 10.0, slack: float = 1e-8) -> AuditReport:
    """Check ``p^{(alpha)}_t = e^{-|sigma| t} [p_t + sum_k t^k (p_t * sigma^{*k}) / k!]``.

    The convolution powers ``sigma^{*k}`` are built on a log grid by repeated
    one-dimensional radial convolution; the series is truncated at ``k_max`` and the
    tail bound ``e^{-|sigma| t} sum_{k > k_max} (t|sigma|)^k / k! * sup p_t`` is
    reported.  Also counts grid points where ``p_t > e^{|sigma| t} p^{(alpha)}_t``.
    """
    if model.d != 1:
        raise DomainError("convolution powers of sigma are implemented for d = 1")
    if k_max < 3:
        raise DomainError("k_max must be at least 3")
    grid = grid or RadialGrid.log(n=120, r_min=1e-3, r_max=1e2)
    radii = grid.radii
    mass = model.sigma_mass
    p_t = heat_profile(model, t)
    p_a = heat_profile(model.stable_version(), t)
    pt_vals = p_t.pd(radii)
    pa_vals = p_a.pd(radii)
    bound = np.exp(mass * t) * pa_vals
    violations = int(np.sum(pt_vals > bound * (1.0 + slack)))

    if mass == 0.0:
        resid = float(np.max(np.abs(pt_vals - pa_vals) / pa_vals))
        return AuditReport("subordination_relation", model.to_dict(), grid.describe(),
                           {"k_max": k_max}, {"residual": resid, "domination_violations": violations},
                           PASS if resid < 1e-12 and violations == 0 else FAIL, True)

    table_r = np.geomspace(1e-5, 1e5, 301)
    scale = t ** (1.0 / model.alpha)
    sig = _LogTable(table_r, model.sigma_density(table_r))
    check = radii[radii <= r_check]
    total_c = p_t.pd(check)
    powk = sig
    term_sizes = []
    for k in range(1, k_max + 1):
        conv = radial_convolution(powk, p_t.pd, check, 1, scale=scale)
        term = t**k / math.factorial(k) * conv
        total_c = total_c + term
        term_sizes.append(float(np.max(term / p_a.pd(check))))
        if k < k_max:
            nxt = radial_convolution(powk, sig, table_r, 1, scale=1e-3)
            powk = _LogTable(table_r, nxt)
    approx = np.exp(-mass * t) * total_c
    exact = p_a.pd(check)
    resid = float(np.max(np.abs(approx - exact) / exact))
    tail = math.exp(-mass * t) * sum((t * mass) ** k / math.factorial(k) for k in range(k_max + 1, k_max + 40))
    tail_rel = tail * float(p_t.pd(0.0)) / float(exact.min())
    ok = violations == 0 and resid <= 1e-3
    return AuditReport(
        "subordination_relation",
        params={**model.to_dict(), "t": t},
        grid={"n_check": int(check.size), "r_max_check": float(r_check)},
        constants={"k_max": k_max, "sigma_mass": mass},
        residuals={"residual": resid, "tail_bound_relative": tail_rel, "term_sizes": term_sizes,
                   "domination_violations": violations},
        verdict=PASS if ok else FAIL,
        refinement_stable=True,
    )


# ---------------------------------------------------------------------------------
# resolvents


def fourier_resolvent(model: LevyModel, lam: float, r) -> np.ndarray:
    """``g_lambda(r)`` by radial Fourier inversion of ``1/(lambda + psi)``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return np.array([_fourier_point(model, 0.0, float(x), model.d, "resolvent", lam) for x in r])


def laplace_resolvent(model: LevyModel, lam: float, r, power: int = 0) -> np.ndarray:
    """``int_0^inf t^power/power! e^{-lambda t} p_t(r) dt`` by quadrature in ``log t``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    logt = np.arange(math.log(1e-8), math.log(80.0 / lam), 0.05)
    ts = np.exp(logt)
    vals = np.stack([heat_kernel(model, float(t), r) for t in ts])
    w = np.exp(-lam * ts + power * logt - math.lgamma(power + 1.0)) * ts
    # beyond t = 1e-8 the contribution is at most ~ 1e-8 * p(1e-8, r) for r > 0
    return np.trapezoid(w[:, None] * vals, logt, axis=0)


def resolvent(model: LevyModel, lam: float, r, check: bool = False, rtol: float = 1e-3):
    """Resolvent kernel ``g_lambda(r) = int_0^inf e^{-lambda t} p_t(r) dt``.

    Evaluated from the subordinator potential density (mixture route).  With
    ``check=True`` the Fourier form is evaluated as well and a disagreement above
    ``rtol`` raises :class:`NumericError` carrying both values.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("resolvent requires r > 0")
    if model.kind in ("stable", "relativistic"):
        val = resolvent_profile(model, lam).pd(r)
    else:
        val = fourier_resolvent(model, lam, r.reshape(-1)).reshape(r.shape)
    if check:
        other = fourier_resolvent(model, lam, r.reshape(-1)).reshape(r.shape)
        rel = np.abs(other - val) / np.abs(val)
        if np.any(rel > rtol):
            raise NumericError(f"resolvent routes disagree: mixture={val}, fourier={other}")
    return val if np.ndim(val) else float(val)


def angular_averaged_resolvent(model: LevyModel, lam: float, r_x, r_y):
    """Average of ``g_lambda(|x - y|)`` over the sphere ``|y| = r_y`` (``d = 3``).

    Uses ``int_{|a-b|}^{a+b} g_3(w) w dw = (g_1(|a-b|) - g_1(a+b)) / (2 pi)`` with
    the one-dimensional resolvent profile ``g_1`` of the same symbol.
    """
    if model.d != 3:
        raise DomainError("angular averaging is defined for d = 3")
    rx = np.asarray(r_x, dtype=float)
    ry = np.asarray(r_y, dtype=float)
    if np.any(rx <= 0) or np.any(ry <= 0):
        raise DomainError("radii must be positive")
    prof = resolvent_profile(model, lam)
    a, b = np.broadcast_arrays(rx, ry)
    lo, hi = np.abs(a - b), a + b
    # near coincidence g_1 may be singular; the difference stays finite for lo > 0
    diff = np.where(lo > 0, prof.p1(np.where(lo > 0, lo, 1.0)) - prof.p1(hi), np.inf)
    out = diff / (4.0 * math.pi * a * b)
    return out if out.ndim else float(out)


def angular_averaged_resolvent_quadrature(model: LevyModel, lam: float, r_x: float, r_y: float, nodes: int = 32):
    """``(1/2) int_{-1}^{1} g(sqrt(rx^2 + ry^2 - 2 rx ry u)) du`` by Gauss-Legendre.

    When ``rx`` and ``ry`` nearly coincide the integrand peaks at ``u = 1``; the
    interval is then split geometrically toward that end.  At exact coincidence the
    average diverges logarithmically for ``alpha <= 1`` and ``inf`` is returned.
    """
    if r_x <= 0 or r_y <= 0:
        raise DomainError("radii must be positive")
    prof = resolvent_profile(model, lam)
    x, w = np.polynomial.legendre.leggauss(nodes)
    gap = abs(r_x - r_y) / max(r_x, r_y)
    if gap == 0.0:
        if model.alpha <= 1.0:
            return math.inf
        gap = 1e-300
    if gap > 0.5:
        edges = np.array([-1.0, 1.0])
    else:
        k = min(int(math.ceil(math.log2(2.0 / (gap * gap)))) + 1, 60)
        edges = np.concatenate([[-1.0], 1.0 - 2.0 ** -np.arange(0, k + 1), [1.0]])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (a + b) + 0.5 * (b - a) * x
        dist = np.sqrt(np.maximum(r_x * r_x + r_y * r_y - 2 * r_x * r_y * u, 0.0))
        total += 0.5 * (b - a) * np.sum(w * prof.pd(dist))
    if not math.isfinite(total):
        raise NumericError(f"angular quadrature failed at r_x={r_x}, r_y={r_y}")
    return 0.5 * total


def resolvent_convolution_check(model: LevyModel, lam: float, n: int, radii=None) -> AuditReport:
    """Compare the ``n``-fold convolution of ``g_lambda`` with the time-weighted Laplace integral.

    ``g^{*n}`` is built by repeated one-dimensional radial convolution of tabulated
    ``g_lambda``; the reference is ``int t^{n-1}/(n-1)! e^{-lambda t} p_t dt``.
    Reports the max relative residual on the interior radii and the total mass of
    the numerical convolution against ``lambda^{-n}``.
    """
    if model.d != 1:
        raise DomainError("resolvent convolution check is implemented for d = 1")
    if n not in (1, 2, 3):
        raise DomainError("n must be 1, 2 or 3")
    radii = np.geomspace(1e-2, 1e1, 25) if radii is None else np.asarray(radii, dtype=float)
    g = resolvent_profile(model, lam)
    ref = resolvent_profile(model, lam, power=n - 1)
    table_r = np.geomspace(1e-8, 1e6, 421)
    scale = lam ** (-1.0 / model.alpha)
    cur: Callable = g.p1_fast
    for _ in range(n - 2):
        cur = _LogTable(table_r, radial_convolution(cur, g.p1_fast, table_r, 1, scale=1e-6))
    if n == 1:
        num = g.pd(radii)
        num_mass = 2.0 * float(g.survival(0.0))
    else:
        num = radial_convolution(cur, g.p1_fast, radii, 1, scale=scale)
        fine = np.geomspace(1e-6, 1e6, 241)
        vals = radial_convolution(cur, g.p1_fast, fine, 1, scale=scale)
        num_mass = 2.0 * float(np.trapezoid(vals * fine, np.log(fine)))
        # analytic head and tail: g^{*n} is bounded near 0 for n >= 2 and decays exponentially
        num_mass += 2.0 * vals[0] * fine[0]
    exact = ref.pd(radii)
    resid = float(np.max(np.abs(num - exact) / exact))
    mass_err = abs(num_mass * lam**n - 1.0)
    return AuditReport(
        "resolvent_convolution",
        params={**model.to_dict(), "lambda": lam, "n": n},
        grid={"r_min": float(radii[0]), "r_max": float(radii[-1]), "n": int(radii.size)},
        constants={"mass": num_mass},
        residuals={"residual": resid, "mass_relative_error": mass_err},
        verdict=PASS if resid <= 1e-2 and mass_err <= 1e-3 else FAIL,
        refinement_stable=True,
    )


def log_slope(x, y, log_x: bool = False) -> float:
    """Least-squares slope of ``log y`` against ``x`` (or ``log x``)."""
    x = np.asarray(x, dtype=float)
    xx = np.log(x) if log_x else x
    return float(np.polyfit(xx, np.log(np.asarray(y, dtype=float)), 1)[0])
