"""Quadratic forms, the Birman-Schwinger ground-state solver and eigenfunction checks.

Radial forms are reduced to the half-line.  For ``d = 1`` and even ``f``

``E[f] = (1/2) int int (f(r) - f(rho))^2 A(r, rho) dr drho``,
``A(r, rho) = 2 [nu(r - rho) + nu(r + rho)]``,

and for radial ``f`` in ``d = 3`` the angular average gives
``A(r, rho) = 8 pi^2 r rho [N(|r - rho|) - N(r + rho)]`` with
``N(z) = int_z^inf w nu(w) dw``.  The near-diagonal singularity is integrable
and is resolved by inner Gauss panels graded geometrically toward ``rho = r``.

The bound state solves ``phi = G_lambda (V phi)``.  In the s-wave sector with
``u = r phi`` this reads ``u = K (V u)`` on the half-line with the symmetric
kernel ``K(r, rho) = g_1(|r - rho|) - g_1(r + rho)``, where ``g_1`` is the
one-dimensional resolvent profile with the same symbol; for even functions on
the line (``d = 1``) the sign in ``K`` is ``+`` and ``u = phi``.  The symmetric
operator ``sqrt(V) K sqrt(V)`` is discretized by a Galerkin method with
cell-indicator functions.  Cell pairs near the diagonal, and the cell touching
the origin, are integrated exactly on sub-cells through the ramp function
``int_0^z (z - w) g_1(w) dw`` of the mixture.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, linalg, optimize
from scipy.interpolate import CubicSpline

from .duhamel import RadialFunction, perturbed_apply_radial
from .errors import DomainError, NumericError
from .hardy_map import HardyCoupling
from .kernel_engine import RadialGrid, resolvent_profile
from .levy_models import LevyModel
from .report import FAIL, INCONCLUSIVE, PASS, AuditReport

__all__ = [
    "GroundState",
    "form_energy",
    "fourier_form_energy",
    "form_identity_residual",
    "sigma_pairing",
    "hardy_ratio",
    "potential_energy",
    "birman_schwinger_mu",
    "mu_curve",
    "ground_state_solve",
    "eigen_representation_residual",
    "decay_exponent_fits",
    "herbst_check",
    "herbst_lower",
    "schrodinger_form_check",
    "default_radii",
]


# ---------------------------------------------------------------------------------
# radial test functions and quadrature


def _smooth(f: RadialFunction):
    """Cubic interpolant of ``f`` in ``log r``; hinted power law below the grid, 0 beyond."""
    r, v = f.radii, f.values
    spl = CubicSpline(np.log(r), v)
    q = f.exponent_hint or 0.0

    def ev(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        lo = x < r[0]
        mid = (x >= r[0]) & (x <= r[-1])
        out[lo] = v[0] * (x[lo] / r[0]) ** -q
        out[mid] = spl(np.log(x[mid]))
        return out

    return ev


def _check_decay(f: RadialFunction) -> None:
    if abs(f.values[-1]) >= 1e-3 * np.max(np.abs(f.values)):
        raise DomainError("function does not decay at the grid end")


_GL6 = np.polynomial.legendre.leggauss(6)


def _panel_nodes(edges: np.ndarray):
    x, w = _GL6
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x[None, :]).ravel()
    weights = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
    return nodes, weights


def _outer_nodes(f: RadialFunction, per_decade: int, depth: float):
    lo = f.radii[0] * 10.0**-depth
    hi = f.radii[-1]
    k = int(math.ceil(per_decade * math.log10(hi / lo)))
    return _panel_nodes(np.geomspace(lo, hi, k + 1))


def _inner_nodes(r: float, lo: float, hi: float, per_decade: int, depth: float = 10.0):
    """Gauss nodes on ``[lo, hi]`` graded geometrically toward ``r`` from both sides."""
    pts = np.geomspace(lo, hi, int(per_decade * math.log10(hi / lo)) + 2)
    off = r * np.geomspace(10.0**-depth, 1.0, int(per_decade * depth) + 1)
    pts = np.concatenate([pts, r - off[off < r - lo], r + off[r + off < hi], [r]])
    edges = np.unique(pts[(pts >= lo) & (pts <= hi)])
    return _panel_nodes(edges)


@lru_cache(maxsize=32)
def _tail_moment(model: LevyModel, which: str):
    """``z -> int_z^inf w f(w) dw`` for ``f = nu`` or ``sigma`` (``d = 3``).

    Both moments are tabulated directly (no subtraction) up to ``z_top``; beyond it
    the stable closed form or the layered power law takes over.
    """
    a, c = model.alpha, model.c_stable

    def stable_tail(q):
        return c * np.asarray(q, dtype=float) ** (-1.0 - a) / (1.0 + a)

    def layered_tail(q):
        if model.kind != "layered":
            return 0.0 * np.asarray(q, dtype=float)
        return c * np.asarray(q, dtype=float) ** (-1.0 - a - model.gamma) / (1.0 + a + model.gamma)

    def far(q):
        return layered_tail(q) if which == "nu" else stable_tail(q) - layered_tail(q)

    if model.kind == "stable":
        return stable_tail if which == "nu" else (lambda q: 0.0 * np.asarray(q, dtype=float))
    h = 0.005
    lz = np.arange(math.log(1e-12), math.log(1e4) + 0.5 * h, h)
    z = np.exp(lz)
    f = model.density(z) if which == "nu" else model.sigma_density(z)
    cum = integrate.cumulative_simpson((z * z * f)[::-1], dx=h, initial=0.0)[::-1] + float(far(z[-1]))
    keep = cum > 1e-300
    spl = CubicSpline(lz[keep], np.log(cum[keep]))
    l_lo, l_hi = lz[keep][0], lz[keep][-1]
    slope_lo = float(spl(l_lo, 1))

    def ev(q):
        q = np.maximum(np.asarray(q, dtype=float), 1e-300)
        lq = np.log(q)
        out = np.exp(spl(np.clip(lq, l_lo, l_hi)))
        # below the table nu is stable to leading order; sigma grows at most logarithmically
        below = stable_tail(q) if which == "nu" else np.exp(spl(l_lo) + slope_lo * (lq - l_lo))
        out = np.where(lq < l_lo, below, out)
        return np.where(lq > l_hi, far(q), out)

    return ev


class _AngularKernel:
    """Half-line kernel ``A(r, rho)`` of the jump density (``which='nu'``) or of ``sigma``."""

    def __init__(self, model: LevyModel, which: str = "nu"):
        self.model = model
        self.which = which
        if model.d == 3:
            self._tail = _tail_moment(model, which)

    def _rad(self, w):
        w = np.maximum(np.abs(w), 1e-300)
        return self.model.density(w) if self.which == "nu" else self.model.sigma_density(w)

    def __call__(self, r, rho):
        if self.model.d == 1:
            return 2.0 * (self._rad(r - rho) + self._rad(r + rho))
        return 8.0 * math.pi**2 * r * rho * (self._tail(np.abs(r - rho)) - self._tail(r + rho))


def _double_integral(f: RadialFunction, kernel: _AngularKernel, mode: str,
                     per_decade: int = 16, depth: float = 4.0) -> float:
    """``(1/2) int int (f(r)-f(rho))^2 A`` (``mode='energy'``) or ``int int f f A`` (``'pair'``)."""
    fs = _smooth(f)
    rs, wr = _outer_nodes(f, per_decade, depth)
    lo, hi = rs[0] * 1e-6, f.radii[-1]
    fr = fs(rs)
    total = 0.0
    for r, w, fv in zip(rs, wr, fr):
        rho, wrho = _inner_nodes(r, lo, hi, per_decade)
        frho = fs(rho)
        a = kernel(r, rho)
        if mode == "energy":
            total += 0.5 * w * np.sum(wrho * (fv - frho) ** 2 * a)
        else:
            total += w * fv * np.sum(wrho * frho * a)
    if mode == "energy":
        # pairs with one point beyond the grid, where f = 0: int_{r < hi} f(r)^2 int_{rho > hi} A
        total += _outside_energy(kernel, fs, rs, wr, hi)
    return float(total)


def _outside_energy(kernel, fs, rs, wr, hi) -> float:
    rho, wrho = _panel_nodes(hi * np.geomspace(1.0, 1e16, 257))
    vals = fs(rs)
    sel = vals != 0
    return float(sum(wt * v * v * np.sum(wrho * kernel(r, rho)) for r, wt, v in zip(rs[sel], wr[sel], vals[sel])))


def l2_norm_sq(f: RadialFunction, d: int) -> float:
    return f.norm2(d) ** 2


def form_energy(model: LevyModel, f: RadialFunction, per_decade: int = 16) -> float:
    """``E[f] = (1/2) int int (f(x) - f(y))^2 nu(x - y) dx dy`` for radial ``f``.

    Raises
    ------
    DomainError
        If ``f`` does not decay at the grid end.
    """
    _check_decay(f)
    return max(_double_integral(f, _AngularKernel(model, "nu"), "energy", per_decade), 0.0)


def sigma_pairing(model: LevyModel, f: RadialFunction, per_decade: int = 16) -> float:
    """``<sigma f, f> = int int sigma(x - y) f(x) f(y) dx dy`` for radial ``f``."""
    if model.kind == "stable":
        return 0.0
    return _double_integral(f, _AngularKernel(model, "sigma"), "pair", per_decade)


def fourier_form_energy(model: LevyModel, fhat) -> float:
    """``(2 pi)^{-d} int psi |f^|^2`` for a radial Fourier transform ``fhat(rho)``."""
    if model.d == 1:
        def g(x):
            return float(model.symbol(x)) * fhat(x) ** 2 / math.pi
    else:
        def g(x):
            return float(model.symbol(x)) * fhat(x) ** 2 * 4.0 * math.pi * x * x / (2.0 * math.pi) ** 3
    edges = [0.0, 0.1, 1.0, 3.0, 10.0, 30.0, 100.0, np.inf]
    return float(sum(integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-11, limit=400)[0]
                     for a, b in zip(edges[:-1], edges[1:])))


def form_identity_residual(model: LevyModel, f: RadialFunction) -> float:
    """Relative residual of ``E[f] + |sigma| ||f||^2 - <sigma f, f> = E^(alpha)[f]``."""
    e = form_energy(model, f)
    ea = form_energy(model.stable_version(), f)
    if model.kind == "stable":
        return abs(e - ea) / ea
    lhs = e + model.sigma_mass * l2_norm_sq(f, model.d) - sigma_pairing(model, f)
    return abs(lhs - ea) / ea


def potential_energy(f: RadialFunction, d: int, alpha: float, kappa: float = 1.0) -> float:
    """``kappa int f(x)^2 |x|^{-alpha} dx`` with the hinted power law below the grid."""
    r, v = f.radii, f.values
    area = 2.0 if d == 1 else 4.0 * math.pi
    body = np.trapezoid(v * v * r ** (d - alpha), np.log(r))
    expo = d - alpha - 2.0 * (f.exponent_hint or 0.0)
    if expo <= 0:
        raise DomainError("potential energy diverges at the origin for this exponent hint")
    return kappa * area * (body + v[0] ** 2 * r[0] ** (d - alpha) / expo)


def hardy_ratio(alpha: float, d: int, f: RadialFunction) -> float:
    """``int f^2 |x|^{-alpha} / E^(alpha)[f]``; bounded by ``1/kappa*`` for admissible ``f``."""
    return potential_energy(f, d, alpha) / form_energy(LevyModel(d, alpha), f)


# ---------------------------------------------------------------------------------
# Birman-Schwinger operator


def _rect(prof, a, b, c, d):
    """``int_a^b int_c^d g_1(|x - y|) dy dx`` for ``a < b`` and ``c < d`` (vectorized)."""
    return (prof.ramp_fast(b - c) + prof.ramp_fast(a - d)
            - prof.ramp_fast(b - d) - prof.ramp_fast(a - c))


@dataclass
class _BSCells:
    radii: np.ndarray
    edges: np.ndarray
    widths: np.ndarray
    sqrt_v_mean: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    sub_edges: np.ndarray
    sub_sqrt_v: np.ndarray
    origin_nodes: np.ndarray
    origin_weights: np.ndarray
    sector: int


def _sqrt_v_mean(a, b, kappa: float, alpha: float):
    """Mean of ``sqrt(kappa) r^{-alpha/2}`` over ``[a, b]``."""
    p = 1.0 - 0.5 * alpha
    return math.sqrt(kappa) * (b**p - a**p) / (p * (b - a))


def _bs_cells(radii, kappa: float, alpha: float, sector: int = -1, n_sub: int = 8,
              origin_depth: int = 24) -> _BSCells:
    grid = RadialGrid(np.asarray(radii, dtype=float), np.array([1.0]))
    e = grid.edges()
    a, b = e[:-1], e[1:]
    wid = b - a
    x, w = np.polynomial.legendre.leggauss(4)
    nodes = 0.5 * (a + b)[:, None] + 0.5 * wid[:, None] * x[None, :]
    weights = 0.5 * wid[:, None] * w[None, :]
    # geometric sub-cells; the cell at the origin is refined toward 0 with the same number of pieces
    sub = np.empty((a.size, n_sub + 1))
    sub[1:] = np.exp(np.linspace(np.log(a[1:]), np.log(b[1:]), n_sub + 1, axis=1))
    sub[0] = np.concatenate([[0.0], b[0] * np.geomspace(2.0**-origin_depth, 1.0, n_sub)])
    sv = _sqrt_v_mean(sub[:, :-1], sub[:, 1:], kappa, alpha)
    # Gauss nodes on the sub-cells of the origin cell, weighted by sqrt(V)
    sa, sb = sub[0, :-1], sub[0, 1:]
    x0 = (0.5 * (sa + sb)[:, None] + 0.5 * (sb - sa)[:, None] * x[None, :]).ravel()
    w0 = (0.5 * (sb - sa)[:, None] * w[None, :]).ravel() * math.sqrt(kappa) * x0 ** (-0.5 * alpha)
    return _BSCells(grid.radii, e, wid, _sqrt_v_mean(a, b, kappa, alpha), nodes, weights, sub, sv, x0, w0, sector)


def _exact_pairs(prof, cells: _BSCells, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """``int_{c_i} int_{c_j} sqrt(V) K sqrt(V)`` by sub-cell rectangles with sub-cell mean ``sqrt(V)``."""
    se, sv = cells.sub_edges, cells.sub_sqrt_v
    out = np.zeros(i.shape)
    k = sv.shape[1]
    for p in range(k):
        a, b, vp = se[i, p], se[i, p + 1], sv[i, p]
        for q in range(k):
            c, d, vq = se[j, q], se[j, q + 1], sv[j, q]
            out += vp * vq * (_rect(prof, a, b, c, d) + cells.sector * _rect(prof, a, b, -d, -c))
    return out


def _bs_matrix(model: LevyModel, kappa: float, lam: float, cells: _BSCells, band: int = 2) -> np.ndarray:
    """Galerkin matrix of ``sqrt(V) K sqrt(V)`` in the normalized cell basis.

    Far pairs use a 4x4 Gauss rule; near-diagonal pairs and every pair involving the
    cell at the origin use exact rectangle integrals on sub-cells.
    """
    prof = resolvent_profile(model, lam)
    n = cells.radii.size
    xs = cells.nodes.ravel()
    ws = cells.weights.ravel() * math.sqrt(kappa) * xs ** (-0.5 * model.alpha)
    with np.errstate(over="ignore"):
        kx = prof.p1_fast(np.abs(xs[:, None] - xs[None, :])) + cells.sector * prof.p1_fast(xs[:, None] + xs[None, :])
    full = (ws[:, None] * kx * ws[None, :]).reshape(n, 4, n, 4).sum(axis=(1, 3))
    for k in range(0, band + 1):
        i = np.arange(0, n - k)
        full[i, i + k] = full[i + k, i] = _exact_pairs(prof, cells, i, i + k)
    # the origin cell against distant cells: Gauss on its sub-cells (rectangle formulas would cancel)
    x0, w0 = cells.origin_nodes, cells.origin_weights
    k0 = prof.p1_fast(np.abs(xs[:, None] - x0[None, :])) + cells.sector * prof.p1_fast(xs[:, None] + x0[None, :])
    row = (ws * (k0 @ w0)).reshape(n, 4).sum(axis=1)
    full[0, band + 1:] = full[band + 1:, 0] = row[band + 1:]
    scale = 1.0 / np.sqrt(cells.widths)
    return scale[:, None] * full * scale[None, :]


def _power_iteration(mat: np.ndarray, start: np.ndarray | None = None, tol: float = 1e-9,
                     max_iter: int = 10_000) -> tuple[float, np.ndarray, int]:
    """Top eigenpair of a symmetric matrix; stops when the Rayleigh quotient moves < ``tol``."""
    v = np.ones(mat.shape[0]) if start is None else np.abs(start) + 1e-300
    v /= np.linalg.norm(v)
    mu = 0.0
    for it in range(1, max_iter + 1):
        w = mat @ v
        new = float(v @ w)
        v = w / np.linalg.norm(w)
        if abs(new - mu) < tol * max(abs(new), 1e-300):
            return new, v, it
        mu = new
    raise NumericError(f"power iteration did not converge in {max_iter} steps (last mu={mu})")


def _polish(mat: np.ndarray, mu: float, vec: np.ndarray, steps: int = 2) -> np.ndarray:
    """Inverse iteration at the converged eigenvalue; resolves the exponentially small far coefficients."""
    lu = linalg.lu_factor(mat - mu * (1.0 + 1e-12) * np.eye(mat.shape[0]))
    for _ in range(steps):
        vec = linalg.lu_solve(lu, vec)
        vec /= np.linalg.norm(vec)
    return vec if vec.sum() > 0 else -vec


def default_radii(n: int = 512, r_min: float = 1e-5, r_max: float = 40.0) -> np.ndarray:
    """Default s-wave grid of ``n`` log-spaced radii."""
    return np.geomspace(r_min, r_max, n)


def _check_bs(model: LevyModel, coupling: HardyCoupling) -> None:
    if model.kind not in ("stable", "relativistic"):
        raise DomainError("the resolvent mixture is available for stable and relativistic models")
    if model.d != coupling.d or abs(model.alpha - coupling.alpha) > 1e-14:
        raise DomainError("coupling and model must share d and alpha")
    if model.d == 2:
        raise DomainError("the bound-state solver covers d = 1 (even sector) and d = 3 (s-wave)")
    if coupling.kappa >= coupling.kappa_star:
        raise DomainError("the bound-state solver requires kappa < kappa*")


def _sector(model: LevyModel) -> int:
    """``+1`` for even functions on the line, ``-1`` for ``u = r f`` in the s-wave sector."""
    return 1 if model.d == 1 else -1


def birman_schwinger_mu(model: LevyModel, coupling: HardyCoupling, lam: float, radii=None,
                        start: np.ndarray | None = None) -> tuple[float, RadialFunction]:
    """Largest eigenvalue ``mu(lambda)`` of ``sqrt(V) G_lambda sqrt(V)`` and its eigenvector.

    The eigenvector holds the normalized-cell coefficients at the grid radii.

    Raises
    ------
    NumericError
        If power iteration needs more than 10^4 steps.
    """
    _check_bs(model, coupling)
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    cells = _bs_cells(radii, coupling.kappa, model.alpha, _sector(model))
    mu, vec, it = _power_iteration(_bs_matrix(model, coupling.kappa, lam, cells), start)
    return mu, RadialFunction(radii, vec if vec.sum() > 0 else -vec, info={"iterations": it})


def mu_curve(model: LevyModel, coupling: HardyCoupling, lambdas, radii=None) -> np.ndarray:
    """``mu(lambda)`` on a list of ``lambda`` values (warm-started power iterations)."""
    _check_bs(model, coupling)
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    cells = _bs_cells(radii, coupling.kappa, model.alpha, _sector(model))
    out, vec = [], None
    for lam in lambdas:
        mu, vec, _ = _power_iteration(_bs_matrix(model, coupling.kappa, lam, cells), vec)
        out.append(mu)
    return np.array(out)


# ---------------------------------------------------------------------------------
# ground state


@dataclass
class GroundState:
    """Ground state of ``L - kappa |x|^{-alpha}`` in the s-wave sector (energy ``E < 0``)."""

    model: LevyModel
    coupling: HardyCoupling
    E: float
    lambda_star: float
    phi: RadialFunction
    mu_curve: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def E_m(self) -> float:
        """``E + m``, the eigenvalue of the unshifted relativistic operator."""
        return self.E + (self.model.m if self.model.kind == "relativistic" else 0.0)

    def to_dict(self) -> dict:
        try:
            dh, rh = decay_exponent_fits(self)
            fits = {"delta_hat": dh, "rate_hat": rh}
        except DomainError:
            fits = {}
        return {
            "model": self.model.to_dict(),
            "coupling": self.coupling.to_dict(),
            "E": self.E,
            "E_m": self.E_m,
            "lambda_star": self.lambda_star,
            "grid": {"n": int(self.phi.radii.size), "r_min": float(self.phi.radii[0]),
                     "r_max": float(self.phi.radii[-1])},
            "radii": self.phi.radii.tolist(),
            "phi": self.phi.values.tolist(),
            "mu_curve": [[float(x) for x in p] for p in self.mu_curve],
            "fits": fits,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "GroundState":
        model = LevyModel.from_dict(data["model"])
        c = data["coupling"]
        coupling = HardyCoupling(c["d"], c["alpha"], c["kappa"], c["delta"])
        phi = RadialFunction(np.array(data["radii"]), np.array(data["phi"]), coupling.delta)
        return cls(model, coupling, data["E"], data["lambda_star"], phi,
                   [tuple(p) for p in data.get("mu_curve", [])], data.get("diagnostics", {}))


def herbst_lower(m: float, kappa: float) -> float:
    """Lower end ``m sqrt(1 - (kappa pi / 2)^2)`` of the Coulomb spectral interval."""
    x = 1.0 - (0.5 * math.pi * kappa) ** 2
    if x < 0:
        raise DomainError("kappa exceeds 2/pi")
    return m * math.sqrt(x)


def _cell_integral(prof, r, a, b, sector: int):
    """``int_a^b [g_1(|r - y|) + sector g_1(r + y)] dy`` from survival differences."""
    s0 = float(prof.survival(np.zeros(1))[0])
    sa, sb = prof.survival_fast(np.abs(r - a)), prof.survival_fast(np.abs(r - b))
    minus = np.where(a >= r, sa - sb, np.where(b <= r, sb - sa, 2.0 * s0 - sa - sb))
    return minus + sector * (prof.survival_fast(r + a) - prof.survival_fast(r + b))


def _eigenfunction(model: LevyModel, kappa: float, cells: _BSCells, lam: float, coeff: np.ndarray, band: int = 2) -> np.ndarray:
    """``u = K sqrt(V) w`` at the grid radii.

    Distant cells use the 4-point Gauss rule, which keeps relative accuracy in the far
    field; nearby cells and the cell at the origin use exact sub-cell integrals.
    """
    prof = resolvent_profile(model, lam)
    r = cells.radii
    n = r.size
    amp = coeff / np.sqrt(cells.widths)
    xs = cells.nodes.ravel()
    ws = cells.weights.ravel() * np.repeat(amp, 4) * math.sqrt(kappa) * xs ** (-0.5 * model.alpha)
    with np.errstate(over="ignore"):
        kx = prof.p1_fast(np.abs(r[:, None] - xs[None, :])) + cells.sector * prof.p1_fast(r[:, None] + xs[None, :])
    contrib = (kx * ws[None, :]).reshape(n, n, 4).sum(axis=2)
    se, sv = cells.sub_edges, cells.sub_sqrt_v

    def exact(i, j):
        out = np.zeros(i.shape)
        for p in range(sv.shape[1]):
            out += sv[j, p] * _cell_integral(prof, r[i], se[j, p], se[j, p + 1], cells.sector)
        return out * amp[j]

    for k in range(-band, band + 1):
        i = np.arange(max(0, -k), min(n, n - k))
        contrib[i, i + k] = exact(i, i + k)
    x0, w0 = cells.origin_nodes, cells.origin_weights
    k0 = (prof.p1_fast(np.abs(r[band + 1:, None] - x0[None, :]))
          + cells.sector * prof.p1_fast(r[band + 1:, None] + x0[None, :]))
    contrib[band + 1:, 0] = amp[0] * (k0 @ w0)
    return contrib.sum(axis=1)


def ground_state_solve(model: LevyModel, coupling: HardyCoupling, radii=None, n_scan: int = 8) -> GroundState:
    """Solve ``mu(lambda) = 1`` for the binding energy and build the normalized ground state.

    The bracket is ``[1e-4 m, 1.1 (m - m sqrt(1 - (kappa pi/2)^2))]`` for the Coulomb
    model (``alpha = 1``) and ``[1e-4 m, m]`` otherwise.  ``mu`` is first sampled at
    ``n_scan`` log-spaced points (returned as ``mu_curve``), then the root is polished
    by Brent's method inside the sign-change interval.

    Raises
    ------
    DomainError
        For non-relativistic models, ``d != 3`` or ``kappa >= kappa*``.
    NumericError
        If ``mu - 1`` does not change sign on the bracket.
    """
    _check_bs(model, coupling)
    if model.kind != "relativistic":
        raise DomainError("the ground-state solver targets relativistic models")
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    m = model.m
    lam_lo = 1e-4 * m
    lam_hi = m
    if model.alpha == 1.0:
        lam_hi = min(1.1 * (m - herbst_lower(m, coupling.kappa)), m)
    cells = _bs_cells(radii, coupling.kappa, model.alpha, _sector(model))
    state = {"vec": None, "calls": 0}

    def mu_of(lam):
        mu, vec, _ = _power_iteration(_bs_matrix(model, coupling.kappa, lam, cells), state["vec"], tol=1e-11)
        state["vec"] = vec
        state["calls"] += 1
        return mu

    scan = np.geomspace(lam_lo, lam_hi, n_scan)
    values = np.array([mu_of(x) for x in scan])
    curve = list(zip(scan.tolist(), values.tolist()))
    above = np.nonzero(values > 1.0)[0]
    if not (values[0] > 1.0 > values[-1]):
        raise NumericError(f"no sign change: mu({lam_lo:g})={values[0]:g}, mu({lam_hi:g})={values[-1]:g}")
    k = above[-1]
    lam_star = optimize.brentq(lambda x: mu_of(x) - 1.0, scan[k], scan[k + 1], xtol=1e-12, rtol=1e-10)
    mat = _bs_matrix(model, coupling.kappa, lam_star, cells)
    mu, vec, it = _power_iteration(mat, state["vec"], tol=1e-13)
    vec = _polish(mat, mu, vec)
    u = _eigenfunction(model, coupling.kappa, cells, lam_star, vec)
    phi = RadialFunction(radii, u / radii if model.d == 3 else u, coupling.delta)
    phi = RadialFunction(radii, phi.values / phi.norm2(model.d), coupling.delta)
    return GroundState(
        model=model, coupling=coupling, E=-lam_star, lambda_star=lam_star, phi=phi, mu_curve=curve,
        diagnostics={"mu_at_solution": mu, "power_iterations": it, "bracket": [lam_lo, lam_hi],
                     "mu_evaluations": state["calls"], "min_phi": float(phi.values.min()),
                     "min_coefficient": float(vec.min())},
    )


def eigen_representation_residual(gs: GroundState, t: float, n_terms: int = 400, tol: float = 1e-6,
                                  k_steps: int = 32, window=(0.05, 20.0)) -> float:
    """Max over ``r`` in ``window`` of ``|e^{E t} (P~_t phi)(r) / phi(r) - 1|``."""
    out = perturbed_apply_radial(gs.model, gs.coupling, t, gs.phi, n_terms=n_terms, tol=tol, k_steps=k_steps)
    r = gs.phi.radii
    sel = (r >= window[0]) & (r <= window[1])
    ratio = math.exp(gs.E * t) * out.values[sel] / gs.phi.values[sel]
    return float(np.max(np.abs(ratio - 1.0)))


def decay_exponent_fits(gs: GroundState, inner=(1e-3, 1e-1), outer=(8.0, 25.0),
                        max_fit_residual: float = 0.1) -> tuple[float, float]:
    """Least-squares exponents ``delta_hat`` (near the origin) and ``rate_hat`` (far field).

    Sets ``gs.diagnostics['fit_flag']`` to INCONCLUSIVE when a fit's RMS residual
    exceeds ``max_fit_residual``.

    Raises
    ------
    DomainError
        If the grid does not cover both windows.
    """
    r, v = gs.phi.radii, gs.phi.values
    if r[0] > inner[0] * (1 + 1e-9) or r[-1] < outer[1] * (1 - 1e-9):
        raise DomainError("grid must span both fit windows")
    a = (r >= inner[0]) & (r <= inner[1])
    b = (r >= outer[0]) & (r <= outer[1])
    if np.any(v[a | b] <= 0):
        raise DomainError("ground state is not positive on the fit windows")
    pa = np.polyfit(np.log(r[a]), np.log(v[a]), 1)
    pb = np.polyfit(r[b], np.log(v[b]), 1)
    resid = [float(np.sqrt(np.mean((np.polyval(pa, np.log(r[a])) - np.log(v[a])) ** 2))),
             float(np.sqrt(np.mean((np.polyval(pb, r[b]) - np.log(v[b])) ** 2)))]
    gs.diagnostics["fit_residuals"] = resid
    gs.diagnostics["fit_flag"] = INCONCLUSIVE if max(resid) > max_fit_residual else PASS
    return -float(pa[0]), -float(pb[0])


def herbst_check(gs: GroundState) -> AuditReport:
    """PASS iff ``m sqrt(1 - (kappa pi/2)^2) <= E + m < m`` (relativistic, ``d = 3``, ``alpha = 1``)."""
    model = gs.model
    if not (model.kind == "relativistic" and model.d == 3 and model.alpha == 1.0):
        raise DomainError("the spectral interval applies to the relativistic d = 3, alpha = 1 model")
    lower = herbst_lower(model.m, gs.coupling.kappa)
    ok = lower <= gs.E_m < model.m
    return AuditReport(
        "herbst_interval",
        params={**model.to_dict(), **gs.coupling.to_dict()},
        grid={"n": int(gs.phi.radii.size)},
        constants={"lower": lower, "upper": model.m, "E_m": gs.E_m},
        residuals={"margin_lower": gs.E_m - lower, "margin_upper": model.m - gs.E_m},
        verdict=PASS if ok else FAIL,
        refinement_stable=True,
    )


def schrodinger_form_check(gs: GroundState, per_decade: int = 16) -> dict:
    """Compare ``E[phi] - kappa int phi^2 |x|^{-alpha}`` with ``(E_m - m) ||phi||^2``.

    ``E[phi]`` is the form of the shifted operator, so the expected value is ``E ||phi||^2``.
    """
    phi = gs.phi
    kin = form_energy(gs.model, phi, per_decade)
    pot = potential_energy(phi, gs.model.d, gs.model.alpha, gs.coupling.kappa)
    norm = l2_norm_sq(phi, gs.model.d)
    lhs, rhs = kin - pot, gs.E * norm
    return {"kinetic": kin, "potential": pot, "lhs": lhs, "rhs": rhs,
            "relative_error": abs(lhs - rhs) / abs(rhs)}
