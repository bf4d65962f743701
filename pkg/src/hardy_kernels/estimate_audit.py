"""Empirical audits of the kernel, Hardy and ground-state estimates.

Each audit computes empirical constants on a grid, repeats the computation on a
refined grid and reports PASS only when the constants are finite and move by less
than :data:`STABILITY` between the two resolutions.  A PASS is numerical evidence,
not a proof (see :data:`hardy_kernels.report.DISCLAIMER`).
"""

from __future__ import annotations

import math

import numpy as np

from .duhamel import perturbed_kernel_1d
from .errors import DomainError
from .hardy_map import HardyCoupling, h_factor
from .kernel_engine import RadialGrid, heat_kernel, resolvent
from .levy_models import LevyModel
from .report import FAIL, PASS, AuditReport
from .spectral import GroundState, ground_state_solve

__all__ = [
    "STABILITY",
    "kernel_comparability_audit",
    "domination_audit",
    "hardy_upper_audit",
    "hardy_lower_audit",
    "bound_state_envelope_audit",
    "subconvolution_audit",
    "envelope_radius",
]

STABILITY = 0.25


def _moves(a: float, b: float) -> float:
    """Relative change between two constants (``inf`` if either is non-finite or zero)."""
    if not (math.isfinite(a) and math.isfinite(b)) or a == 0 or b == 0:
        return math.inf
    return abs(b - a) / abs(a)


def _refine_grid(grid: RadialGrid) -> RadialGrid:
    r, t = grid.radii, grid.times
    rr = np.geomspace(r[0], r[-1], 2 * r.size - 1)
    tt = np.geomspace(t[0], t[-1], 2 * t.size - 1) if t.size > 1 else t
    return RadialGrid(rr, tt)


# ---------------------------------------------------------------------------------
# free kernels


def _comparability(model: LevyModel, T: float, grid: RadialGrid) -> tuple[float, float]:
    d, a = model.d, model.alpha
    lo, hi = math.inf, 0.0
    for t in grid.times[grid.times <= T * (1 + 1e-12)]:
        p = np.asarray(heat_kernel(model, t, grid.radii))
        ref = np.minimum(t ** (-d / a), t * model.density(grid.radii))
        ratio = p / ref
        lo, hi = min(lo, float(ratio.min())), max(hi, float(ratio.max()))
    return lo, hi


def kernel_comparability_audit(model: LevyModel, T: float = 1.0, grid: RadialGrid | None = None) -> AuditReport:
    """Band ``[c_lower, c_upper]`` of ``p_t(r) / (t^{-d/alpha} min t nu(r))`` over ``t <= T``."""
    if model.kind not in ("stable", "relativistic"):
        raise DomainError("comparability is audited for the stable and relativistic models")
    grid = grid or RadialGrid.log(n=256, r_min=1e-3, r_max=1e2, m=16, t_min=1e-2 * T, t_max=T)
    lo, hi = _comparability(model, T, grid)
    fine = _refine_grid(grid)
    lo2, hi2 = _comparability(model, T, fine)
    move = max(_moves(lo, lo2), _moves(hi, hi2))
    ok = 0 < lo <= hi < math.inf
    return AuditReport(
        "free_kernel_comparability",
        params={**model.to_dict(), "T": T},
        grid={"coarse": grid.describe(), "fine": fine.describe()},
        constants={"c_lower": lo, "c_upper": hi},
        residuals={"band_ratio": hi / lo if lo > 0 else math.inf, "refinement_change": move,
                   "fine_c_lower": lo2, "fine_c_upper": hi2},
        verdict=PASS if ok else FAIL,
        refinement_stable=move < STABILITY,
    )


def subconvolution_audit(model: LevyModel, grid: RadialGrid | None = None) -> AuditReport:
    """``sup nu(x) nu(y) / nu(x - y)`` over collinear signed pairs with ``|x|, |y| >= 1``."""

    def constant(r):
        pts = np.concatenate([-r[::-1], r])
        x, y = np.meshgrid(pts, pts, indexing="ij")
        off = x != y
        ratio = model.density(np.abs(x[off])) * model.density(np.abs(y[off])) / model.density(np.abs(x[off] - y[off]))
        return float(np.max(ratio)), float(np.max(np.abs(ratio - (
            model.density(np.abs(y[off])) * model.density(np.abs(x[off])) / model.density(np.abs(y[off] - x[off]))))))

    radii = grid.radii if grid is not None else np.geomspace(1.0, 50.0, 100)
    radii = radii[radii >= 1.0]
    c, asym = constant(radii)
    c2, _ = constant(np.geomspace(radii[0], radii[-1], 2 * radii.size - 1))
    move = _moves(c, c2)
    return AuditReport(
        "jump_density_subconvolution",
        params=model.to_dict(),
        grid={"r_min": float(radii[0]), "r_max": float(radii[-1]), "n": int(radii.size)},
        constants={"c_upper": c},
        residuals={"refinement_change": move, "fine_c_upper": c2, "symmetry_defect": asym},
        verdict=PASS if math.isfinite(c) else FAIL,
        refinement_stable=move < STABILITY,
    )


# ---------------------------------------------------------------------------------
# perturbed kernels in d = 1


def _default_radii(n: int) -> np.ndarray:
    return np.geomspace(1e-3, 1e2, n)


def _table(model, coupling, radii, T, k_steps, method):
    return perturbed_kernel_1d(model, coupling, radii=radii, T=T, k_steps=k_steps, method=method)


def _upper_stats(tab, interior):
    """``sup p~ / (H H p)`` and the count of cells with ``p~ < p`` (both sectors)."""
    r, hc = tab.radii, tab.hardy
    mask = (r >= interior[0]) & (r <= interior[1])
    sub = np.ix_(mask, mask)
    c_up, below = 0.0, 0
    worst = -math.inf
    for k, t in enumerate(tab.times):
        hh = np.outer(h_factor(t, r, hc.alpha, hc.delta), h_factor(t, r, hc.alpha, hc.delta))
        for pert, free in ((tab.values[k], tab.free[k]), (tab.opposite[k], tab.free_opposite[k])):
            ratio = pert[sub] / (hh[sub] * free[sub])
            c_up = max(c_up, float(np.max(ratio)))
            gap = (free[sub] - pert[sub]) / free[sub]
            below += int(np.sum(gap > 1e-10))
            worst = max(worst, float(np.max(gap)))
    return c_up, below, worst


def hardy_upper_audit(alpha: float, d: int, model: LevyModel, coupling: HardyCoupling, T: float = 1.0,
                      n: int = 256, k_steps: int = 16, method: str = "march",
                      interior: tuple[float, float] = (1e-2, 10.0)) -> AuditReport:
    """``c_upper = sup p~ / (H(t,x) H(t,y) p)`` on an ``n``-point grid and on ``2n`` points.

    Also counts cells where the trivial bound ``p~ >= p`` fails by more than 1e-10.
    """
    if d != 1 or model.d != 1:
        raise DomainError("the upper audit uses full kernel tables, available for d = 1")
    if abs(model.alpha - alpha) > 1e-14:
        raise DomainError("model and alpha disagree")
    if coupling.kappa > coupling.kappa_star * (1 + 1e-12):
        raise DomainError("supercritical coupling")
    out = []
    for size in (n, 2 * n):
        tab = _table(model, coupling, _default_radii(size), T, k_steps, method)
        out.append(_upper_stats(tab, interior))
    (c1, b1, w1), (c2, b2, w2) = out
    move = _moves(c1, c2)
    ok = math.isfinite(c1) and b1 == 0 and b2 == 0
    return AuditReport(
        "perturbed_kernel_upper_bound",
        params={**model.to_dict(), **coupling.to_dict(), "T": T},
        grid={"n": [n, 2 * n], "k_steps": k_steps, "method": method, "interior": list(interior)},
        constants={"c_upper": c1},
        residuals={"fine_c_upper": c2, "refinement_change": move,
                   "cells_below_free": [b1, b2], "max_relative_deficit": max(w1, w2)},
        verdict=PASS if ok else FAIL,
        refinement_stable=move < STABILITY,
    )


def _lower_stats(tab, interior):
    r, hc = tab.radii, tab.hardy
    mask = (r >= interior[0]) & (r <= interior[1])
    c_in, c_out = math.inf, math.inf
    for k, t in enumerate(tab.times):
        h = h_factor(t, r, hc.alpha, hc.delta)
        near = np.minimum.outer(r, r) <= t ** (1.0 / hc.alpha)
        keep = np.outer(mask, mask)
        for pert, free in ((tab.values[k], tab.free[k]), (tab.opposite[k], tab.free_opposite[k])):
            ratio = pert / (np.outer(h, h) * free)
            if np.any(keep & near):
                c_in = min(c_in, float(ratio[keep & near].min()))
            if np.any(keep & ~near):
                c_out = min(c_out, float(ratio[keep & ~near].min()))
    return c_in, c_out


def hardy_lower_audit(alpha: float, d: int, coupling: HardyCoupling, T: float = 1.0, n: int = 128,
                      k_steps: int = 16, method: str = "march",
                      interior: tuple[float, float] = (1e-2, 10.0)) -> AuditReport:
    """``c_lower = inf p~ / (H H p)`` over ``|x| min |y| <= t^{1/alpha}`` for the stable model in ``d = 1``.

    The infimum over the complementary region is reported as well; there it is at
    least ``1/4`` because ``p~ >= p`` and ``H <= 2``.
    """
    if d != 1:
        raise DomainError("the lower audit uses full kernel tables, available for d = 1")
    model = LevyModel(1, alpha)
    out = []
    for size in (n, 2 * n):
        tab = _table(model, coupling, _default_radii(size), T, k_steps, method)
        out.append(_lower_stats(tab, interior))
    (c1, o1), (c2, o2) = out
    move = _moves(c1, c2)
    ok = 0 < c1 < math.inf
    return AuditReport(
        "perturbed_kernel_lower_bound",
        params={**model.to_dict(), **coupling.to_dict(), "T": T},
        grid={"n": [n, 2 * n], "k_steps": k_steps, "method": method, "interior": list(interior)},
        constants={"c_lower": c1},
        residuals={"fine_c_lower": c2, "refinement_change": move, "complement_inf": min(o1, o2)},
        verdict=PASS if ok else FAIL,
        refinement_stable=move < STABILITY,
    )


def domination_audit(alpha: float, d: int, coupling: HardyCoupling, t_list=(0.25, 0.5), n: int = 128,
                     k_steps: int = 16, slack: float = 1e-8, m: float = 1.0) -> AuditReport:
    """Check ``p~(t) <= e^{|sigma| t} p~^(alpha)(t)`` cell by cell (relativistic vs stable, ``d = 1``).

    Violations are counted relative to the stable kernel beyond ``slack``; the count at
    ``1e-12`` is reported separately as a quadrature-noise indicator.
    """
    if d != 1:
        raise DomainError("the domination audit uses full kernel tables, available for d = 1")
    t_list = sorted(float(t) for t in t_list)
    T = t_list[-1]
    rel = LevyModel(1, alpha, "relativistic", m=m)
    counts, noise, worst = [], [], -math.inf
    for size in (n, 2 * n):
        radii = _default_radii(size)
        a = _table(rel, coupling, radii, T, k_steps, "march")
        b = _table(rel.stable_version(), coupling, radii, T, k_steps, "march")
        bad = tiny = 0
        for t in t_list:
            k = int(np.argmin(np.abs(a.times - t)))
            if abs(a.times[k] - t) > 1e-9 * t:
                raise DomainError(f"t = {t} is not a table time")
            for x, y in ((a.values[k], b.values[k]), (a.opposite[k], b.opposite[k])):
                excess = (x - math.exp(rel.sigma_mass * t) * y) / y
                bad += int(np.sum(excess > slack))
                tiny += int(np.sum(excess > 1e-12))
                worst = max(worst, float(excess.max()))
        counts.append(bad)
        noise.append(tiny)
    return AuditReport(
        "perturbed_kernel_domination",
        params={"alpha": alpha, "d": d, "m": m, **coupling.to_dict(), "t": t_list},
        grid={"n": [n, 2 * n], "k_steps": k_steps},
        constants={"violations": counts[0]},
        residuals={"violations_fine": counts[1], "violations_at_1e-12": noise, "max_relative_excess": worst,
                   "slack": slack},
        verdict=PASS if sum(counts) == 0 else FAIL,
        refinement_stable=True,
    )


# ---------------------------------------------------------------------------------
# ground-state envelopes


def envelope_radius(kappa: float, epsilon: float, alpha: float) -> float:
    """``R = max(1, (kappa / epsilon)^{1/alpha})``."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return max(1.0, (kappa / epsilon) ** (1.0 / alpha))


def _envelope_constants(gs: GroundState, epsilon_frac: float, window):
    model, lam = gs.model, gs.lambda_star
    eps = epsilon_frac * lam
    R = envelope_radius(gs.coupling.kappa, eps, model.alpha)
    r = gs.phi.radii
    sel = (r >= window[0]) & (r <= window[1])
    rs, phi = r[sel], gs.phi.values[sel]
    # radial g is decreasing, so the sup over |y| <= R sits at distance max(r - R, 0), the inf at r + 1
    gap = rs - R
    upper_env = np.full(rs.shape, np.inf)
    upper_env[gap > 0] = resolvent(model, lam - eps, gap[gap > 0])
    lower_env = resolvent(model, lam, rs + 1.0)
    c = float(np.max(phi / upper_env))
    c_tilde = float(np.min(phi / lower_env))
    return c, c_tilde, R, eps


def bound_state_envelope_audit(gs: GroundState, epsilon_frac: float = 0.1, window=(5.0, 30.0),
                               reference: GroundState | None = None,
                               slope_window=(8.0, 25.0)) -> AuditReport:
    """Constants ``c`` and ``c~`` in ``c~ inf g_E(x - y) <= phi(x) <= c sup g_{E - eps}(x - y)``.

    ``reference`` is the same ground state on another grid; when omitted it is solved
    on half as many radii.  The far-field log-slopes of ``phi`` and ``g_{lambda*}`` are
    compared as well.
    """
    if gs.phi.radii[-1] < window[1]:
        raise DomainError("ground-state grid must reach the end of the envelope window")
    c, ct, R, eps = _envelope_constants(gs, epsilon_frac, window)
    if reference is None:
        r = gs.phi.radii
        reference = ground_state_solve(gs.model, gs.coupling, radii=np.geomspace(r[0], r[-1], r.size // 2))
    c2, ct2, _, _ = _envelope_constants(reference, epsilon_frac, window)
    move = max(_moves(c, c2) if c > 0 else 0.0, _moves(ct, ct2))
    r = gs.phi.radii
    b = (r >= slope_window[0]) & (r <= slope_window[1])
    s_phi = np.polyfit(r[b], np.log(gs.phi.values[b]), 1)[0]
    s_g = np.polyfit(r[b], np.log(resolvent(gs.model, gs.lambda_star, r[b])), 1)[0]
    ok = math.isfinite(c) and ct > 0
    return AuditReport(
        "ground_state_envelopes",
        params={**gs.model.to_dict(), **gs.coupling.to_dict(), "epsilon_frac": epsilon_frac,
                "epsilon": eps, "R": R, "lambda_star": gs.lambda_star},
        grid={"n": int(gs.phi.radii.size), "window": list(window)},
        constants={"c_upper": c, "c_lower": ct},
        residuals={"refinement_change": move, "reference_c_upper": c2, "reference_c_lower": ct2,
                   "phi_log_slope": float(s_phi), "resolvent_log_slope": float(s_g),
                   "slope_difference": float(s_phi - s_g)},
        verdict=PASS if ok else FAIL,
        refinement_stable=move < STABILITY,
    )
