"""Ergodic constants and correctors via the vanishing-discount method.

For a spec with no zeroth-order term, each discount lam > 0 has a unique
stationary solution w_lam of F + lam w = 0 (state constraint or periodic).
As lam decreases, -lam * w_lam(x0) approaches the ergodic constant c and the
normalized corrector w_lam - w_lam(x0) approaches a solution w of F = c.
The sweep records both sequences, declares convergence when they go Cauchy
at the requested tolerances, and Richardson-extrapolates the constant from
the last three members.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .grids import DiscreteField, Grid
from .problem import PeriodicBC, ProblemSpec, StateConstraintBC
from .solver import (
    SchemeParams,
    SolveReport,
    discrete_residual,
    one_sided_equation_residual,
    solve_evolution,
    solve_stationary,
    solve_with_continuation,
)

__all__ = [
    "ErgodicResult",
    "solve_discounted",
    "vanishing_discount",
    "verify_ergodic_pair",
    "ErgodicPairReport",
    "stability_sweep",
    "large_time_ratio",
    "LargeTimeResult",
    "default_discounts",
]


def default_discounts(k_min: int = 3, k_max: int = 12):
    """Geometric discount schedule lam_k = 2^-k."""
    return [2.0**-k for k in range(k_min, k_max + 1)]


@dataclass
class ErgodicResult:
    c: float                      # -lam * w_lam(x0) at the smallest discount
    c_extrapolated: float         # Aitken extrapolation of the last three c_k
    corrector: DiscreteField      # w_lam - w_lam(x0) at the smallest discount
    anchor: object
    sweep: list                   # rows: (lam, c_k, corrector_delta, residual, iters)
    converged: bool
    discount_bound_ok: bool
    discount_bound_margin: float  # min over members of ||F00|| + tol - max|lam w|
    F00_sup: float


def _check_ergodic_spec(spec: ProblemSpec):
    if not isinstance(spec.boundary, (StateConstraintBC, PeriodicBC)):
        raise ValueError("discounted solves need a state-constraint or periodic spec")


def solve_discounted(spec: ProblemSpec, lam: float, grid: Grid,
                     params: SchemeParams | None = None,
                     init: DiscreteField | None = None, shift=None,
                     continuation: bool = True) -> SolveReport:
    """Stationary solve of F + lam w = 0 under state constraints/periodicity."""
    if lam <= 0.0:
        raise ValueError("discount must be positive")
    _check_ergodic_spec(spec)
    if init is None and continuation:
        return solve_with_continuation(spec, grid, params, lam=lam, shift=shift)
    return solve_stationary(spec, grid, params, lam=lam, init=init, shift=shift)


def vanishing_discount(spec: ProblemSpec, lam_list=None, x0=None,
                       grid: Grid | None = None,
                       params: SchemeParams | None = None, shift=None,
                       c_tol: float = 1e-3, w_tol: float = 1e-3) -> ErgodicResult:
    """Discount sweep -> ergodic constant and normalized corrector.

    Requires a strictly decreasing positive discount schedule and a spec
    whose only zeroth-order term is the discount itself.  Each member is
    warm-started from the previous one with the predicted constant-mode
    update, which keeps late (tiny-discount) members cheap.
    """
    params = params or SchemeParams()
    lam_list = list(lam_list) if lam_list is not None else default_discounts()
    if any(l2 >= l1 for l1, l2 in zip(lam_list, lam_list[1:])) or lam_list[-1] <= 0.0:
        raise ValueError("lam_list must be strictly decreasing and positive")
    if grid is None:
        raise ValueError("grid is required")
    zc = np.asarray(spec.zeroth(grid.points()), dtype=float)
    if np.max(np.abs(zc)) > 0.0:
        raise ValueError("vanishing discount needs c == 0 (discount is the only "
                         "zeroth-order term)")
    if x0 is None:
        x0 = (0,) * grid.dim
    x0 = tuple(np.atleast_1d(x0)) if grid.dim > 1 else (int(np.atleast_1d(x0)[0]),)
    x0k = x0 if grid.dim > 1 else x0[0]

    F00 = float(np.max(np.abs(np.asarray(spec.F00(grid.points()), dtype=float))))
    sweep = []
    w_prev = None
    wt_prev = None
    c_prev = None
    bound_ok = True
    bound_margin = np.inf
    for k, lam in enumerate(lam_list):
        if w_prev is None:
            rep = solve_discounted(spec, lam, grid, params, shift=shift)
        else:
            init = w_prev.values - c_prev * (1.0 / lam - 1.0 / lam_list[k - 1])
            rep = solve_stationary(spec, grid, params, lam=lam,
                                   init=DiscreteField(grid, init), shift=shift)
        w = rep.field
        c_k = float(-lam * w.values[x0k])
        wt = w.anchored(x0k)
        delta = float(np.max(np.abs(wt.values - wt_prev.values))) if wt_prev is not None else np.nan
        sweep.append((lam, c_k, delta, rep.residual, rep.iterations))
        lam_w_max = float(lam * np.max(np.abs(w.values)))
        margin = F00 + 10.0 * params.tol - lam_w_max
        bound_margin = min(bound_margin, margin)
        if margin < 0.0:
            bound_ok = False
        w_prev, wt_prev, c_prev = w, wt, c_k
    cs = [row[1] for row in sweep]
    converged = (len(cs) >= 2 and abs(cs[-1] - cs[-2]) <= c_tol
                 and sweep[-1][2] <= w_tol)
    c_ext = _aitken(cs[-3:]) if len(cs) >= 3 else cs[-1]
    return ErgodicResult(c=cs[-1], c_extrapolated=c_ext, corrector=wt_prev,
                         anchor=x0k, sweep=sweep, converged=converged,
                         discount_bound_ok=bound_ok,
                         discount_bound_margin=float(bound_margin), F00_sup=F00)


def _aitken(tail):
    c0, c1, c2 = tail
    denom = (c2 - c1) - (c1 - c0)
    if abs(denom) < 1e-14 * max(1.0, abs(c2)):
        return float(c2)
    return float(c2 - (c2 - c1) ** 2 / denom)


@dataclass(frozen=True)
class ErgodicPairReport:
    interior_gap: float   # max | residual - c | over interior nodes
    boundary_gap: float   # max over boundary of (c - one-sided residual), <= 0 good
    tol: float

    @property
    def passed(self) -> bool:
        return self.interior_gap <= self.tol and self.boundary_gap <= self.tol


def verify_ergodic_pair(spec: ProblemSpec, w: DiscreteField, c: float,
                        tol: float, shift=None) -> ErgodicPairReport:
    """Check F(D^2 w, Dw, x) = c inside and >= c at the boundary, discretely."""
    grid = w.grid
    res = one_sided_equation_residual(spec, grid, w, lam=0.0, shift=shift).values
    bmask = grid.boundary_mask()
    interior = ~bmask
    interior_gap = float(np.max(np.abs(res[interior] - c)))
    if np.any(bmask):
        boundary_gap = float(np.max(c - res[bmask]))
    else:
        boundary_gap = -np.inf
    return ErgodicPairReport(interior_gap=interior_gap, boundary_gap=boundary_gap,
                             tol=tol)


def stability_sweep(members, lam_list=None, grid: Grid | None = None,
                    params: SchemeParams | None = None, x0=None) -> list:
    """Ergodic constants for a family of specs converging to a limit.

    Returns rows (label, c, c_extrapolated, converged); member failures are
    recorded as rows with NaN constants rather than raised.
    """
    rows = []
    for label, spec in members:
        try:
            res = vanishing_discount(spec, lam_list=lam_list, grid=grid,
                                     params=params, x0=x0)
            rows.append((label, res.c, res.c_extrapolated, res.converged))
        except Exception as exc:  # member failures are table entries
            rows.append((label, np.nan, np.nan, f"failed: {exc}"))
    return rows


@dataclass
class LargeTimeResult:
    ratio_error_at_T: float       # max_x |u(x,T)/T + c^+|
    trajectory: list              # rows (t, max_x |u(x,t)/t + c^+|)
    sup_change_last: float        # sup-norm change across the last snapshots
    final_residual: float         # stationary residual of u(., T)
    c_plus: float
    evolution: object


def large_time_ratio(spec: ProblemSpec, u0: DiscreteField, T: float, grid: Grid,
                     c_ref: float, params: SchemeParams | None = None,
                     checkpoints=None, tail_window: float = 10.0) -> LargeTimeResult:
    """March u_t + F = 0 and compare u(x, t)/t against -c^+.

    `c_ref` is the companion state-constraint ergodic constant (measured by
    the ergodic sweep).  Also reports the stabilization metrics used in the
    c < 0 regime: the sup-norm change over the trailing `tail_window` of
    time and the stationary residual of the final field.
    """
    if checkpoints is None:
        k = max(2, int(np.ceil(tail_window / 2.0)))
        tail = list(np.linspace(max(T - tail_window, T / 2.0), T, k + 1))
        head = list(np.linspace(T / 10.0, max(T - tail_window, T / 2.0), 5)[:-1])
        checkpoints = sorted(set(head + tail))
    evo = solve_evolution(spec, grid, u0, T, params=params,
                          snapshot_times=checkpoints)
    cp = max(c_ref, 0.0)
    traj = []
    for t, fld in zip(evo.times, evo.fields):
        if t <= 0.0:
            continue
        traj.append((t, float(np.max(np.abs(fld.values / t + cp)))))
    final = evo.fields[-1]
    tail_fields = [f for t, f in zip(evo.times, evo.fields) if t >= T - tail_window]
    sup_change = 0.0
    for f1, f2 in zip(tail_fields, tail_fields[1:]):
        sup_change = max(sup_change, float(np.max(np.abs(f2.values - f1.values))))
    final_res = discrete_residual(spec, grid, final).sup_norm()
    return LargeTimeResult(ratio_error_at_T=traj[-1][1], trajectory=traj,
                           sup_change_last=sup_change, final_residual=final_res,
                           c_plus=cp, evolution=evo)
