"""Moduli of continuity, Holder exponent fits, and barrier-bound checks.

The central objects are the sampled modulus omega(s) = max |u(x) - u(y)|
over node pairs with |x - y| <= s (restricted to an interior or boundary
band), and the log-log least-squares fit omega ~ K * s^alpha.  On top of
those sit the pointwise barrier bound u(y) <= u(x) + w_r(y - x), the dyadic
boundary-chain estimate, and the boundary-data-loss report for generalized
Dirichlet solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .barrier import Barrier, scale_barrier
from .grids import DiscreteField, Grid
from .problem import DirichletBC

__all__ = [
    "ModulusTable",
    "HolderEstimate",
    "modulus_of_continuity",
    "fit_holder_exponent",
    "verify_barrier_bound",
    "BarrierBoundReport",
    "boundary_chain_check",
    "ChainCheckResult",
    "boundary_loss_report",
    "BoundaryLossReport",
]


@dataclass(frozen=True)
class ModulusTable:
    scales: np.ndarray
    omega: np.ndarray
    region: dict
    dx: float


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    K: float
    window: tuple
    residual: float
    n_scales: int
    lipschitz_or_smoother: bool


def _region_mask(grid: Grid, region: dict | None) -> np.ndarray:
    if region is None or region.get("kind", "all") == "all":
        return np.ones(grid.shape, dtype=bool)
    d = grid.boundary_distance()
    kind = region["kind"]
    if kind == "interior":
        return d >= region["delta"]
    if kind == "band":
        return (d >= region.get("lo", 0.0)) & (d <= region["hi"])
    raise ValueError(f"unknown region kind {kind!r}")


def _lag_maxima(vals: np.ndarray, max_lag: int) -> np.ndarray:
    """out[l-1] = max_i |vals[i+l] - vals[i]| for l = 1..max_lag."""
    out = np.zeros(max_lag)
    for lag in range(1, max_lag + 1):
        if lag >= len(vals):
            break
        out[lag - 1] = np.max(np.abs(vals[lag:] - vals[:-lag]))
    return out


def _segments(mask: np.ndarray):
    """Contiguous index runs where a 1D mask is true."""
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return
    breaks = np.flatnonzero(np.diff(idx) > 1)
    start = 0
    for brk in list(breaks) + [len(idx) - 1]:
        yield idx[start], idx[brk]
        start = brk + 1


def modulus_of_continuity(u: DiscreteField, region: dict | None = None,
                          scales=None) -> ModulusTable:
    """Sampled modulus of continuity on a region of the grid.

    1D regions take the exact maximum over all node pairs within each scale.
    2D uses the deterministic line pattern (all axis rows and columns plus
    both diagonal directions through every node), which is dense enough for
    exponent fitting at O(n^3) cost instead of O(n^4) full pairs.
    """
    grid = u.grid
    mask = _region_mask(grid, region)
    if not np.any(mask):
        raise ValueError(f"region {region} contains no grid nodes")
    dx = grid.dx(0)
    if scales is None:
        extent = _region_extent(grid, mask)
        if extent < 4.0 * dx:
            raise ValueError("region too thin for modulus scales")
        scales = np.geomspace(2.0 * dx, extent / 2.0,
                              max(8, int(np.log(extent / (4.0 * dx)) / np.log(np.sqrt(2.0))) + 1))
    scales = np.asarray(scales, dtype=float)
    if np.any(scales < 2.0 * dx):
        raise ValueError("scales must be >= 2 dx")

    lines = []  # (values, step) pairs
    if grid.dim == 1:
        for i0, i1 in _segments(mask):
            lines.append((u.values[i0:i1 + 1], dx))
    else:
        dy = grid.dx(1)
        diag = float(np.hypot(dx, dy))
        vals = u.values
        for i in range(grid.shape[0]):
            for j0, j1 in _segments(mask[i, :]):
                lines.append((vals[i, j0:j1 + 1], dy))
        for j in range(grid.shape[1]):
            for i0, i1 in _segments(mask[:, j]):
                lines.append((vals[i0:i1 + 1, j], dx))
        flipped = vals[:, ::-1]
        fmask = mask[:, ::-1]
        for off in range(-grid.shape[0] + 1, grid.shape[1]):
            dvals = np.diagonal(vals, offset=off)
            dmask = np.diagonal(mask, offset=off)
            for i0, i1 in _segments(dmask):
                lines.append((dvals[i0:i1 + 1], diag))
            avals = np.diagonal(flipped, offset=off)
            amask = np.diagonal(fmask, offset=off)
            for i0, i1 in _segments(amask):
                lines.append((avals[i0:i1 + 1], diag))

    smax = float(np.max(scales))
    omega = np.zeros(len(scales))
    for vals, step in lines:
        max_lag = min(len(vals) - 1, int(smax / step))
        if max_lag < 1:
            continue
        lm = np.maximum.accumulate(_lag_maxima(vals, max_lag))
        lags = np.minimum((scales / step).astype(int), max_lag)
        ok = lags >= 1
        omega[ok] = np.maximum(omega[ok], lm[lags[ok] - 1])
    return ModulusTable(scales=scales, omega=omega,
                        region=dict(region or {"kind": "all"}), dx=dx)


def _region_extent(grid: Grid, mask: np.ndarray) -> float:
    if grid.dim == 1:
        runs = [(i1 - i0) * grid.dx(0) for i0, i1 in _segments(mask)]
        return max(runs)
    best = 0.0
    for i in range(grid.shape[0]):
        for j0, j1 in _segments(mask[i, :]):
            best = max(best, (j1 - j0) * grid.dx(1))
    for j in range(grid.shape[1]):
        for i0, i1 in _segments(mask[:, j]):
            best = max(best, (i1 - i0) * grid.dx(0))
    return best


def fit_holder_exponent(table: ModulusTable, window: tuple | None = None) -> HolderEstimate:
    """Least-squares slope of log omega against log s over a scale window.

    The default window drops the two smallest scales (grid rounding) and
    anything above half the largest tabulated scale (saturation).
    """
    s = table.scales
    w = table.omega
    if window is None:
        lo = s[2] if len(s) > 2 else s[0]
        hi = float(np.max(s)) / 2.0 if len(s) > 6 else float(np.max(s))
        window = (lo, hi)
    sel = (s >= window[0] * (1 - 1e-12)) & (s <= window[1] * (1 + 1e-12)) & (w > 0.0)
    if np.count_nonzero(sel) < 4:
        raise ValueError(
            f"need >= 4 usable scales in window {window}, got {np.count_nonzero(sel)}"
        )
    ls, lw = np.log(s[sel]), np.log(w[sel])
    slope, intercept = np.polyfit(ls, lw, 1)
    resid = float(np.sqrt(np.mean((lw - (slope * ls + intercept)) ** 2)))
    return HolderEstimate(alpha=float(slope), K=float(np.exp(intercept)),
                          window=window, residual=resid,
                          n_scales=int(np.count_nonzero(sel)),
                          lipschitz_or_smoother=slope > 1.0)


# ---------------------------------------------------------------------------
# barrier bound


@dataclass(frozen=True)
class BarrierBoundReport:
    centers: list
    radii: list
    worst_violation: float
    worst_per_center: list
    tol: float
    violations: list

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0


def verify_barrier_bound(u: DiscreteField, b: Barrier, centers, r=None,
                         K_hat: float = 1.0) -> BarrierBoundReport:
    """Check u(y) <= u(x) + w_r(y - x) + 2 K dx^alpha at nodes y in B_r(x).

    `b` is a unit barrier; each center uses its own radius (r = d(x)/2 when
    r is None, matching the geometry that keeps B_r(x) inside the domain
    with room to spare).  The interpolation tolerance 2 K dx^alpha absorbs
    grid rounding of the discrete field.
    """
    grid = u.grid
    pts = grid.points()
    dists = grid.boundary_distance()
    alpha = b.alpha if b.alpha is not None else 1.0
    tol = 2.0 * K_hat * grid.dx(0) ** alpha
    worst = -np.inf
    per_center = []
    violations = []
    radii = []
    for idx in centers:
        idx = tuple(np.atleast_1d(idx)) if grid.dim > 1 else (int(idx),)
        x = pts[idx] if grid.dim > 1 else pts[idx[0]]
        rc = float(dists[idx] / 2.0) if r is None else float(r)
        if dists[idx] < 2.0 * rc - 1e-12:
            raise ValueError(f"center {idx} violates d(x) >= 2r (d={dists[idx]}, r={rc})")
        radii.append(rc)
        wb = scale_barrier(b, min(rc, 1.0)) if rc != b.radius else b
        if grid.dim == 1:
            sep = np.abs(pts - x)
        else:
            sep = np.sqrt(np.sum((pts - x) ** 2, axis=-1))
        ball = sep <= rc
        gap = u.values[ball] - u.values[idx] - wb.W(sep[ball]) - tol
        g = float(np.max(gap))
        per_center.append(g)
        worst = max(worst, g)
        if g > 0.0:
            violations.append((idx, g))
    return BarrierBoundReport(centers=list(centers), radii=radii,
                              worst_violation=worst, worst_per_center=per_center,
                              tol=tol, violations=violations)


# ---------------------------------------------------------------------------
# dyadic boundary chain


@dataclass(frozen=True)
class ChainCheckResult:
    passed: bool
    total: float
    bound: float
    K_max: int
    delta: float


def boundary_chain_check(u: DiscreteField, x_idx, delta: float, alpha: float,
                         K_bar: float) -> ChainCheckResult:
    """Dyadic chain x_k = x - (delta / 2^k) n(x) toward a boundary-adjacent node.

    Sums |u(x_k) - u(x_{k-1})| for k <= ceil(log2(delta / dx)) using monotone
    cubic interpolation along the inward normal line and compares against
    K_bar * delta^alpha.
    """
    grid = u.grid
    if grid.dim == 1:
        coords = grid.axis_coords(0)
        i = int(x_idx)
        x = coords[i]
        normal = -1.0 if abs(x - grid.domain.lo) < abs(x - grid.domain.hi) else 1.0
        line_coords, line_vals = coords, u.values
    else:
        i, j = tuple(x_idx)
        xpt = grid.points()[i, j]
        dists = {
            (0, -1.0): xpt[0] - grid.domain.lo[0],
            (0, 1.0): grid.domain.hi[0] - xpt[0],
            (1, -1.0): xpt[1] - grid.domain.lo[1],
            (1, 1.0): grid.domain.hi[1] - xpt[1],
        }
        (axis, sign), _ = min(dists.items(), key=lambda kv: kv[1])
        normal = sign
        if axis == 0:
            line_coords, line_vals = grid.axis_coords(0), u.values[:, j]
            x = xpt[0]
        else:
            line_coords, line_vals = grid.axis_coords(1), u.values[i, :]
            x = xpt[1]
    dx = grid.dx(0)
    K_max = int(np.ceil(np.log2(delta / dx)))
    ks = np.arange(0, K_max + 1)
    chain = x - (delta / 2.0**ks) * normal
    if np.any(chain < line_coords[0] - 1e-12) or np.any(chain > line_coords[-1] + 1e-12):
        raise ValueError(f"dyadic chain exits the grid (delta={delta})")
    interp = PchipInterpolator(line_coords, line_vals)
    vals = interp(np.clip(chain, line_coords[0], line_coords[-1]))
    total = float(np.sum(np.abs(np.diff(vals))))
    bound = K_bar * delta**alpha
    return ChainCheckResult(passed=total <= bound, total=total, bound=bound,
                            K_max=K_max, delta=delta)


# ---------------------------------------------------------------------------
# boundary data loss


@dataclass(frozen=True)
class BoundaryLossReport:
    loss_nodes: list
    max_overshoot: float
    overshoot_ok: bool
    tol: float


def boundary_loss_report(u: DiscreteField, spec, tol: float | None = None) -> BoundaryLossReport:
    """Loss nodes (u < g - tol) and the worst overshoot above the data.

    Subsolutions of superquadratic generalized Dirichlet problems sit below
    their boundary data, so `overshoot_ok` asserting u <= g + tol is the
    sanity side; loss nodes are where the equation, not the data, is active.
    """
    if not isinstance(spec.boundary, DirichletBC):
        raise ValueError("boundary_loss_report needs a generalized Dirichlet spec")
    grid = u.grid
    g = np.broadcast_to(np.asarray(spec.boundary.g(grid.points()), dtype=float),
                        grid.shape)
    if tol is None:
        tol = 1e-4 * (1.0 + float(np.max(np.abs(g))))
    loss = []
    overshoot = 0.0
    for idx in zip(*np.nonzero(grid.boundary_mask())):
        key = idx if grid.dim > 1 else idx[0]
        gap = u.values[idx] - g[idx]
        overshoot = max(overshoot, gap)
        if gap < -tol:
            loss.append((key, float(-gap)))
    return BoundaryLossReport(loss_nodes=loss, max_overshoot=float(overshoot),
                              overshoot_ok=overshoot <= tol, tol=tol)
