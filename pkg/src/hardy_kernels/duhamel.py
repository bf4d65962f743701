"""Hardy-potential perturbation of the free semigroup.

The perturbed kernel solves ``p~ = p + int_0^t P_s V p~_{t-s} ds`` with
``V(x) = kappa |x|^{-alpha}``.  Radial problems are reduced to a half-line:

* ``d = 1`` even functions use ``int_0^inf [p(x - y) + p(x + y)] f(y) dy``, odd
  functions the same with a minus sign (both sectors together give the full
  two-sided kernel);
* ``d = 3`` radial functions ``f`` are handled through ``u = r f``, which evolves
  under the odd one-dimensional kernel of the same symbol.

Space is discretized into log cells with exact cell integrals of the free kernel,
computed from differences of the one-dimensional survival function.  Inside a cell
a function is taken proportional to ``r^q`` (``q`` is the near-zero exponent hint),
which makes the singular potential and the cell containing the origin exact for
power-law data.  Time integrals use product integration on a uniform grid: the
free kernel is integrated accurately against the piecewise-linear interpolant of
the unknown, with geometric refinement toward ``s = 0`` where the kernel changes on
the time scale of the smallest cells.

Two solvers share the discrete equation: the perturbation series (terms computed
one layer at a time) and a direct time-marching solve of the Volterra equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericError
from .hardy_map import HardyCoupling, h_factor
from .kernel_engine import KernelTable, RadialGrid, heat_profile
from .levy_models import LevyModel
from .report import AuditReport, FAIL, INCONCLUSIVE, PASS

__all__ = [
    "RadialFunction",
    "CellSemigroup",
    "PerturbedKernelTable",
    "perturbed_kernel_1d",
    "perturbed_apply_radial",
    "duhamel_residual",
    "invariance_check",
    "mass_bound_check",
]

_GAUSS = np.polynomial.legendre.leggauss(4)


@dataclass
class RadialFunction:
    """Radial profile sampled on a log grid.

    Parameters
    ----------
    radii : ndarray
        Strictly increasing positive radii.
    values : ndarray
        Finite samples.
    exponent_hint : float, optional
        ``f(r) ~ c r^{-exponent_hint}`` below the first radius.
    """

    radii: np.ndarray
    values: np.ndarray
    exponent_hint: float | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.radii.shape != self.values.shape or self.radii.ndim != 1:
            raise DomainError("radii and values must be 1-d arrays of equal length")
        if np.any(self.radii <= 0) or np.any(np.diff(self.radii) <= 0):
            raise DomainError("radii must be positive and strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("values must be finite")
        if self.exponent_hint is not None and self.exponent_hint < 0:
            raise DomainError("exponent hint must be nonnegative")

    @classmethod
    def from_callable(cls, radii, fn, exponent_hint: float | None = None) -> "RadialFunction":
        radii = np.asarray(radii, dtype=float)
        return cls(radii, np.asarray(fn(radii), dtype=float), exponent_hint)

    def __call__(self, r):
        """Log-log interpolation for positive data, linear otherwise."""
        r = np.asarray(r, dtype=float)
        v = self.values
        if np.all(v > 0):
            out = np.exp(np.interp(np.log(r), np.log(self.radii), np.log(v)))
        else:
            out = np.interp(r, self.radii, v)
        if self.exponent_hint is not None:
            low = r < self.radii[0]
            out = np.where(low, v[0] * (np.maximum(r, 1e-300) / self.radii[0]) ** -self.exponent_hint, out)
        return out

    def norm2(self, d: int) -> float:
        """``L^2(R^d)`` norm of the radial function (log-trapezoid plus the hinted core)."""
        r, v = self.radii, self.values
        area = 2.0 if d == 1 else 4.0 * math.pi
        body = np.trapezoid(v * v * r**d, np.log(r))
        q = 2.0 * (self.exponent_hint or 0.0)
        head = v[0] ** 2 * r[0] ** d / (d - q)
        return math.sqrt(area * (body + head))

    def to_dict(self) -> dict:
        return {"radii": self.radii.tolist(), "values": self.values.tolist(), "exponent_hint": self.exponent_hint}


# ---------------------------------------------------------------------------------
# cell discretization


def _power_mean(a, b, q):
    """``(1/(b-a)) int_a^b y^q dy`` for arrays ``a < b`` (``a`` may be 0 when ``q > -1``)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if abs(q + 1.0) < 1e-12:
        return (np.log(b) - np.log(a)) / (b - a)
    return (b ** (q + 1.0) - a ** (q + 1.0)) / ((q + 1.0) * (b - a))


class CellSemigroup:
    """Free semigroup acting on cell-wise power-law functions of the half-line.

    Parameters
    ----------
    model : LevyModel
        Stable or relativistic model; its one-dimensional profile is used.
    radii : ndarray
        Cell nodes; cell boundaries are the geometric midpoints, the first is 0.
    sector : {+1, -1}
        Even (``+1``) or odd (``-1``) half-line kernel.
    hint : float
        Exponent ``q`` with ``f(y) ~ f_j (y / r_j)^q`` inside cell ``j``.
    """

    def __init__(self, model: LevyModel, radii, sector: int, hint: float = 0.0):
        if model.kind not in ("stable", "relativistic"):
            raise DomainError("perturbed kernels need the survival function; use a stable or relativistic model")
        if sector not in (1, -1):
            raise DomainError("sector must be +1 or -1")
        if hint <= -1.0 + model.alpha:
            raise DomainError("exponent hint too singular for the potential")
        self.model = model
        self.radii = np.asarray(radii, dtype=float)
        self.grid = RadialGrid(self.radii, np.array([1.0]))
        self.edges = self.grid.edges()
        self.widths = np.diff(self.edges)
        self.sector = sector
        self.hint = hint
        a, b, r = self.edges[:-1], self.edges[1:], self.radii
        self.cell_mean = _power_mean(a, b, hint) * r ** -hint
        self._stable = model.kind == "stable"
        self._base = heat_profile(model, 1.0) if self._stable else None

    @property
    def n(self) -> int:
        return self.radii.size

    def potential_weights(self, kappa: float) -> np.ndarray:
        """``(1/|cell|) int_cell kappa y^{-alpha} (y/r_j)^q dy`` per cell."""
        a, b, r = self.edges[:-1], self.edges[1:], self.radii
        return kappa * _power_mean(a, b, self.hint - self.model.alpha) * r ** -self.hint

    def survival(self, s: float):
        """Callable ``x -> P(X_s > x)`` of the one-dimensional law at time ``s``."""
        if self._stable:
            k = s ** (-1.0 / self.model.alpha)
            base = self._base
            return lambda x: base.survival_fast(x * k)
        prof = heat_profile(self.model, s)
        return prof.survival_fast

    def cell_matrix(self, s: float) -> np.ndarray:
        """``A[i, j] = int_{cell j} [p_s(r_i - y) + sector p_s(r_i + y)] dy``."""
        r, e = self.radii, self.edges
        surv = self.survival(s)
        diff = r[:, None] - e[None, :]
        sx = surv(np.abs(diff))
        left = sx[:, :-1]
        right = sx[:, 1:]
        # cell j lies right of r_i, left of r_i, or contains it
        first = np.where(
            diff[:, :-1] <= 0.0,
            left - right,
            np.where(diff[:, 1:] >= 0.0, right - left, 1.0 - left - right),
        )
        sp = surv(r[:, None] + e[None, :])
        second = sp[:, :-1] - sp[:, 1:]
        return np.maximum(first + self.sector * second, 0.0) if self.sector > 0 else first + self.sector * second

    def apply(self, s: float, values: np.ndarray) -> np.ndarray:
        """Free semigroup on node values (cell-wise power law)."""
        return self.cell_matrix(s) @ (self.cell_mean[:, None] * values if values.ndim == 2 else self.cell_mean * values)

    def far_column(self, s: float, q_far: float, cutoff: float = 1e4) -> np.ndarray:
        """``int_{b_N}^inf [p_s(r_i - y) + sector p_s(r_i + y)] (y / r_N)^{q_far} dy`` for ``q_far <= 0``.

        Integration by parts gives ``S(b - r)(b/r_N)^q + q int_b^inf S(y - r) y^{q-1} dy / r_N^q``;
        the remaining integral uses Gauss panels on ``[b, cutoff * b]`` plus the
        power-law tail of the survival function.
        """
        r, b, rn = self.radii, self.edges[-1], self.radii[-1]
        surv = self.survival(s)
        out = surv(b - r) + self.sector * surv(b + r)
        out = out * (b / rn) ** q_far
        if q_far != 0.0:
            pts = np.geomspace(b, cutoff * b, 41)
            x, w = _GAUSS
            lo, hi = pts[:-1], pts[1:]
            y = (0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]).ravel()
            wy = (0.5 * (hi - lo)[:, None] * w[None, :]).ravel() * y ** (q_far - 1.0)
            s1 = surv(np.abs(y[None, :] - r[:, None]))
            s2 = surv(y[None, :] + r[:, None])
            out = out + q_far * (s1 + self.sector * s2) @ wy / rn**q_far
        return out


def _time_weights(op: CellSemigroup, dt: float, k_steps: int, min_scale: float):
    """Product-integration matrices for ``int A(s) u(t - s) ds``.

    Returns ``B, C`` of shape ``(k_steps, N, N)`` with
    ``B[l] = int_{l dt}^{(l+1) dt} A(s) (1 - theta) ds`` and ``C[l]`` the same with
    ``theta = s/dt - l``, plus the free matrices ``A(k dt)`` for ``k = 1..k_steps``.
    """
    n = op.n
    x, w = _GAUSS
    B = np.zeros((k_steps, n, n))
    C = np.zeros((k_steps, n, n))
    # first interval: geometric panels toward s = 0
    levels = int(min(60, max(2, math.ceil(math.log2(dt / min_scale)))))
    bounds = np.concatenate([[0.0], dt * 2.0 ** -np.arange(levels, -1, -1)])
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        for xi, wi in zip(x, w):
            s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi
            a = op.cell_matrix(s) * (0.5 * (hi - lo) * wi)
            theta = s / dt
            B[0] += (1.0 - theta) * a
            C[0] += theta * a
    for l in range(1, k_steps):
        lo, hi = l * dt, (l + 1) * dt
        for xi, wi in zip(x, w):
            s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi
            a = op.cell_matrix(s) * (0.5 * dt * wi)
            theta = (s - lo) / dt
            B[l] += (1.0 - theta) * a
            C[l] += theta * a
    free = np.stack([op.cell_matrix(k * dt) for k in range(1, k_steps + 1)])
    return B, C, free


def _min_scale(op: CellSemigroup) -> float:
    """Time at which the free kernel spreads over a hundredth of the smallest cell."""
    return (0.01 * float(op.widths.min())) ** op.model.alpha


class _Volterra:
    """Discrete Volterra equation ``U[k] = F[k] + sum_l (B_l W U[k-l] + C_l W U[k-l-1])``."""

    def __init__(self, op: CellSemigroup, kappa: float, t: float, k_steps: int):
        self.op = op
        self.dt = t / k_steps
        self.k = k_steps
        B, C, self.free = _time_weights(op, self.dt, k_steps, _min_scale(op))
        wv = op.potential_weights(kappa)
        self.B = B * wv[None, None, :]
        self.C = C * wv[None, None, :]

    def _history(self, U, k):
        """``sum_{l=1}^{k-1} (B_l U[k-l] + C_l U[k-l-1]) + C_0 U[k-1]``."""
        acc = self.C[0] @ U[k - 1]
        for l in range(1, k):
            acc += self.B[l] @ U[k - l] + self.C[l] @ U[k - l - 1]
        return acc

    def march(self, F):
        """Direct solve: ``(I - B_0) U[k] = F[k] + history``."""
        n = self.op.n
        lu = linalg.lu_factor(np.eye(n) - self.B[0])
        U = [F[0]]
        for k in range(1, self.k + 1):
            U.append(linalg.lu_solve(lu, F[k] + self._history(U, k)))
        return np.stack(U)

    def series(self, F, n_terms: int, tol: float):
        """Perturbation series; returns (sum, number of terms, tail estimate, sizes)."""
        term = np.stack(F)
        total = term.copy()
        sizes = []
        prev = None
        used = 0
        tail = np.zeros_like(total)
        for n in range(1, n_terms + 1):
            new = np.zeros_like(term)
            for k in range(1, self.k + 1):
                acc = self.B[0] @ term[k] + self.C[0] @ term[k - 1]
                for l in range(1, k):
                    acc += self.B[l] @ term[k - l] + self.C[l] @ term[k - l - 1]
                new[k] = acc
            if not np.all(np.isfinite(new)):
                raise NumericError("series term overflow; reduce the time horizon")
            total += new
            used = n
            rel = float(np.max(np.abs(new) / np.maximum(np.abs(total), 1e-300)))
            sizes.append(rel)
            if prev is not None and rel > 1.5 * prev and rel > 1.0:
                raise NumericError("perturbation series terms grow; reduce the time horizon")
            ratio = rel / prev if prev else 0.0
            prev = rel
            term = new
            if rel < tol:
                q = min(ratio, 0.99)
                tail = np.abs(new) * q / (1.0 - q)
                break
        else:
            q = min(sizes[-1] / sizes[-2], 0.99) if len(sizes) > 1 else 0.5
            tail = np.abs(term) * q / (1.0 - q)
        return total, used, tail, sizes


# ---------------------------------------------------------------------------------
# perturbed kernel tables (d = 1)


@dataclass
class PerturbedKernelTable(KernelTable):
    """Perturbed kernel in ``d = 1``.

    ``values[k, i, j]`` is ``p~(t_k, x_i, y_j)`` for ``x, y > 0`` and
    ``opposite[k, i, j]`` is ``p~(t_k, x_i, -y_j)``; ``free`` and
    ``free_opposite`` hold the cell-averaged free kernel on the same cells, and
    ``tail`` the truncation estimate of the series.
    """

    opposite: np.ndarray | None = None
    free: np.ndarray | None = None
    free_opposite: np.ndarray | None = None
    tail: np.ndarray | None = None
    n_terms: int = 0
    hardy: HardyCoupling | None = None
    widths: np.ndarray | None = None
    potential: np.ndarray | None = None
    raw: dict | None = None


def _sym(m: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle (``x <= y``) onto the lower one for every time slice."""
    iu = np.triu(np.ones(m.shape[-2:], dtype=bool))
    return np.where(iu, m, np.swapaxes(m, -1, -2))


def perturbed_kernel_1d(model: LevyModel, coupling: HardyCoupling, radii=None, T: float = 0.5,
                        k_steps: int = 16, n_terms: int = 200, tol: float = 1e-3,
                        method: str = "series") -> PerturbedKernelTable:
    """Perturbed kernel ``p~`` on ``{x, y > 0}`` and ``{x > 0, y < 0}`` for ``d = 1``.

    Parameters
    ----------
    model : LevyModel
        One-dimensional stable or relativistic model with ``alpha < 1``.
    coupling : HardyCoupling
        ``kappa <= kappa*``; ``delta`` is used as the near-zero exponent hint.
    radii : ndarray, optional
        Positive nodes of the half-line grid (default 128 points in ``[1e-3, 1e2]``).
    T : float
        Final time; times ``T k / k_steps`` are stored.
    method : {'series', 'march'}
        Series (truncated at ``tol``) or direct time marching.
    """
    if model.d != 1 or coupling.d != 1 or model.alpha >= 1.0:
        raise DomainError("perturbed_kernel_1d needs d = 1 and alpha < 1")
    if abs(coupling.alpha - model.alpha) > 1e-14:
        raise DomainError("coupling and model must share alpha")
    if coupling.kappa > coupling.kappa_star * (1 + 1e-12):
        raise DomainError("supercritical coupling")
    radii = np.geomspace(1e-3, 1e2, 128) if radii is None else np.asarray(radii, dtype=float)
    n = radii.size
    sectors = {}
    tails = {}
    used = 0
    for sector in (1, -1):
        op = CellSemigroup(model, radii, sector, -coupling.delta)
        vol = _Volterra(op, coupling.kappa, T, k_steps)
        F = [np.eye(n)] + [vol.free[k] for k in range(k_steps)]
        if coupling.kappa == 0.0:
            U, tail, nt = np.stack(F), np.zeros((k_steps + 1, n, n)), 0
        elif method == "series":
            U, nt, tail, _ = vol.series(F, n_terms, tol)
        elif method == "march":
            U, tail, nt = vol.march(F), np.zeros((k_steps + 1, n, n)), 0
        else:
            raise DomainError(f"unknown method {method!r}")
        used = max(used, nt)
        sectors[sector] = (U[1:], np.stack(F[1:]))
        tails[sector] = tail[1:]
        widths = op.widths
        weights = op.potential_weights(coupling.kappa)
    (ue, fe), (uo, fo) = sectors[1], sectors[-1]
    scale = 0.5 / widths[None, None, :]
    same = _sym((ue + uo) * scale)
    opp = _sym((ue - uo) * scale)
    free_same = _sym((fe + fo) * scale)
    free_opp = _sym((fe - fo) * scale)
    tail = (tails[1] + tails[-1]) * scale
    times = T * np.arange(1, k_steps + 1) / k_steps
    return PerturbedKernelTable(
        kind="perturbed", model=model, radii=radii, params=times, values=same,
        coupling=coupling.to_dict(),
        metadata={"method": method, "k_steps": k_steps, "tol": tol, "flagged_cells": int(np.sum(tail > tol * np.abs(same)))},
        opposite=opp, free=free_same, free_opposite=free_opp, tail=tail, n_terms=used,
        hardy=coupling, widths=widths, potential=weights,
        raw={1: ue, -1: uo},
    )


def duhamel_residual(table: PerturbedKernelTable, t: float, interior: tuple[float, float] | None = None) -> float:
    """Max relative residual of ``p~ - p - int_0^t int p(s) V p~(t - s)`` on interior cells.

    The time integral is recomputed with composite Simpson's rule on the table's time
    grid (independent of the product-integration weights used to build the table),
    sector by sector on the unsymmetrized sector kernels; ``interior`` defaults to
    ``[10 r_min, r_max / 10]``.
    """
    times = table.times
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-9 * t:
        raise DomainError("t must be a table time")
    k += 1  # index including the time origin
    if k % 2:
        raise DomainError("Simpson's rule needs an even number of time steps up to t")
    model, hc = table.model, table.hardy
    radii = table.radii
    dt = times[0]
    res_max = 0.0
    lo, hi = interior or (10 * radii[0], radii[-1] / 10)
    mask = (radii >= lo) & (radii <= hi)
    for sector in (1, -1):
        op = CellSemigroup(model, radii, sector, -hc.delta)
        wv = op.potential_weights(hc.kappa)
        # sector kernels in the node-value basis
        U = [np.eye(radii.size)] + [table.raw[sector][j] for j in range(k)]
        A = [np.eye(radii.size)] + [op.cell_matrix(dt * (j + 1)) for j in range(k)]
        simpson = np.ones(k + 1)
        simpson[1:-1:2] = 4.0
        simpson[2:-1:2] = 2.0
        simpson *= dt / 3.0
        integral = sum(simpson[l] * (A[l] * wv[None, :]) @ U[k - l] for l in range(k + 1))
        resid = U[k] - A[k] - integral
        sub = np.ix_(mask, mask)
        res_max = max(res_max, float(np.max(np.abs(resid[sub]) / np.abs(U[k][sub]))))
    return res_max


# ---------------------------------------------------------------------------------
# semigroup action on radial functions


def perturbed_apply_radial(model: LevyModel, coupling: HardyCoupling, t: float, h: RadialFunction,
                           n_terms: int = 400, tol: float = 1e-6, k_steps: int = 32,
                           method: str = "series", t_max: float = 4.0) -> RadialFunction:
    """``P~_t h`` on the grid of ``h`` (``d = 1`` even or ``d = 3`` radial).

    The grid is extended below the first radius by the exponent hint (the cell
    ``[0, b_1]``) and above the last one by a power-law continuation of ``h``
    for the free term.  ``info`` of the result records the contribution of both
    extensions, the number of series terms and the truncation tail.
    """
    if not 0 < t <= t_max:
        raise DomainError(f"t must lie in (0, {t_max}]")
    if model.d != coupling.d or abs(model.alpha - coupling.alpha) > 1e-14:
        raise DomainError("coupling and model must share d and alpha")
    top = 0.5 * (model.d - model.alpha)
    hint = coupling.delta if h.exponent_hint is None else h.exponent_hint
    if hint > top + 1e-12:
        raise DomainError("exponent hint exceeds (d - alpha)/2")
    radii = h.radii
    d = model.d
    if d == 1:
        sector, q, u0 = 1, -hint, h.values.copy()
    else:
        sector, q, u0 = -1, 1.0 - hint, radii * h.values
    op = CellSemigroup(model, radii, sector, q)
    # far-field continuation of u from the last two nodes
    slope = math.log(abs(u0[-1]) / abs(u0[-2])) / math.log(radii[-1] / radii[-2]) if u0[-1] * u0[-2] > 0 else -50.0
    q_far = float(min(max(slope, -50.0), 0.0))
    vol = _Volterra(op, coupling.kappa, t, k_steps)
    mean_u = op.cell_mean * u0
    F = [u0]
    far = []
    for k in range(1, k_steps + 1):
        col = op.far_column(k * vol.dt, q_far) * u0[-1]
        far.append(col)
        F.append(vol.free[k - 1] @ mean_u + col)
    inner = vol.free[-1][:, 0] * mean_u[0]
    if coupling.kappa == 0.0:
        U, used, tail = np.stack(F), 0, np.zeros(radii.size)
    elif method == "series":
        U, used, tails, _ = vol.series(F, n_terms, tol)
        tail = tails[-1]
    elif method == "march":
        U, used, tail = vol.march(F), 0, np.zeros(radii.size)
    else:
        raise DomainError(f"unknown method {method!r}")
    u = U[-1]
    vals = u if d == 1 else u / radii
    scale = 1.0 if d == 1 else 1.0 / radii
    info = {
        "near_zero_contribution": (inner * scale).tolist(),
        "far_field_contribution": (far[-1] * scale).tolist(),
        "n_terms": used,
        "tail": (tail * scale).tolist(),
        "method": method,
        "k_steps": k_steps,
    }
    return RadialFunction(radii, vals, h.exponent_hint, info)


def invariance_check(alpha: float, d: int, coupling: HardyCoupling, t: float, radii=None,
                     k_steps: int = 32, tol: float = 1e-6, budget: float | None = None) -> AuditReport:
    """Check ``P~_t |x|^{-delta} = |x|^{-delta}`` for the stable model on ``r in [0.1, 10]``.

    The default grid spans ``[1e-5, 1e8]`` so that the heavy stable tails are
    captured; the check is repeated with the grid ends moved one decade outward
    and the verdict is INCONCLUSIVE if the deviation moves by more than half the budget.
    """
    model = LevyModel(d, alpha)
    delta = coupling.delta
    if budget is None:
        budget = 1e-4 if delta == 0 else (0.05 if delta >= 0.5 * (d - alpha) * (1 - 1e-9) else 0.02)

    def run(rr):
        h = RadialFunction(rr, rr ** -delta, delta)
        out = perturbed_apply_radial(model, coupling, t, h, tol=tol, k_steps=k_steps)
        sel = (rr >= 0.1 * (1 - 1e-12)) & (rr <= 10.0 * (1 + 1e-12))
        dev = float(np.max(np.abs(out.values[sel] * rr[sel] ** delta - 1.0)))
        return dev, out

    if radii is None:
        radii = np.geomspace(1e-5, 1e8, 391)
    dev, out = run(radii)
    ratio = radii[1] / radii[0]
    wider = np.concatenate([radii[0] / ratio ** np.arange(30, 0, -1), radii, radii[-1] * ratio ** np.arange(1, 31)])
    dev2, _ = run(wider)
    stable = abs(dev - dev2) <= 0.5 * budget
    verdict = (PASS if dev <= budget else FAIL) if stable else INCONCLUSIVE
    sel = (radii >= 0.1) & (radii <= 10.0)
    return AuditReport(
        "invariance",
        params={**coupling.to_dict(), "t": t},
        grid={"n": int(radii.size), "r_min": float(radii[0]), "r_max": float(radii[-1]), "k_steps": k_steps},
        constants={"budget": budget},
        residuals={
            "max_deviation": dev,
            "max_deviation_wider_grid": dev2,
            "near_zero_contribution": float(np.max(np.abs(np.asarray(out.info["near_zero_contribution"])[sel]))),
            "far_field_contribution": float(np.max(np.abs(np.asarray(out.info["far_field_contribution"])[sel]))),
            "n_terms": out.info["n_terms"],
        },
        verdict=verdict,
        refinement_stable=stable,
    )


def mass_bound_check(model: LevyModel, coupling: HardyCoupling, t_list, radii=None,
                     k_steps: int = 32) -> AuditReport:
    """Empirical ``c(t, r) = P~_t 1(r) / (e^{|sigma| t} H(t, r))`` and its refinement stability.

    The supremum is recomputed on a grid with twice the nodes per decade and with
    ``r_min`` lowered one decade; PASS requires it to move by less than 25%.
    """
    if radii is None:
        radii = np.geomspace(1e-4, 1e6, 301)

    def sup_on(rr):
        best = 0.0
        for t in t_list:
            out = perturbed_apply_radial(model, coupling, t, RadialFunction(rr, np.ones_like(rr), 0.0),
                                         k_steps=k_steps, tol=1e-6)
            ratio = out.values / (math.exp(model.sigma_mass * t) * h_factor(t, rr, model.alpha, coupling.delta))
            best = max(best, float(np.max(ratio)))
        return best

    c1 = sup_on(radii)
    fine = np.geomspace(radii[0] / 10, radii[-1], 2 * radii.size + 19)
    c2 = sup_on(fine)
    stable = abs(c2 - c1) <= 0.25 * c1
    ok = math.isfinite(c1) and math.isfinite(c2)
    return AuditReport(
        "mass_bound",
        params={**model.to_dict(), **coupling.to_dict(), "t_list": list(t_list)},
        grid={"n": int(radii.size), "r_min": float(radii[0]), "r_max": float(radii[-1])},
        constants={"c_upper": c1, "c_upper_refined": c2},
        residuals={"relative_change": abs(c2 - c1) / c1},
        verdict=PASS if ok else FAIL,
        refinement_stable=stable,
    )
