"""Periodic cell problems and the effective Hamiltonian pipeline.

The cell problem at slope p asks for a periodic corrector u1 and a constant
Fbar(p) with F(D^2 u1, D u1 + p, y) = Fbar(p); it is solved by running the
vanishing-discount sweep on the torus with the gradient argument shifted by
p.  Tabulating Fbar over a slope grid (with the certified coercivity lower
bound min_y F(0, p, y)) gives a monotone piecewise-linear effective
Hamiltonian, which drives the homogenized equation Fbar(Du) + u = 0 and the
epsilon-sweep comparison against oscillatory solves.

For first-order 1D cells H(y, q) = b|q|^m - V(y) there is an independent
closed-form oracle: Fbar(p) = -min V on the flat piece, and otherwise the
unique c with  |p| = int_0^1 ((c + V(y))/b)^(1/m) dy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .ergodic import ErgodicResult, default_discounts, vanishing_discount
from .grids import DiscreteField, Grid
from .problem import DirichletBC, PowerHamiltonian, ProblemSpec, Torus
from .solver import (
    SchemeParams,
    SolveReport,
    _assemble,
    discrete_residual,
    one_sided_equation_residual,
)
from . import _kernels

__all__ = [
    "CellSolution",
    "EffectiveHamiltonian",
    "EpsSweepReport",
    "solve_cell",
    "oracle_effective_1d",
    "tabulate_effective",
    "solve_homogenized",
    "epsilon_sweep",
]


@dataclass
class CellSolution:
    p: object
    x_macro: object
    fbar: float
    corrector: DiscreteField
    sweep: ErgodicResult
    seam_mismatch: float


def solve_cell(spec: ProblemSpec, p, torus_grid: Grid, lam_list=None,
               params: SchemeParams | None = None, x_macro=None) -> CellSolution:
    """Vanishing-discount solve of the torus cell problem at slope p.

    The corrector is normalized to vanish at the origin node; the seam
    mismatch is the worst residual over nodes whose stencil wraps around the
    period, certifying that the returned field is genuinely periodic.
    """
    if not isinstance(torus_grid.domain, Torus):
        raise ValueError("cell problems live on a torus grid")
    params = params or SchemeParams()
    res = vanishing_discount(spec, lam_list=lam_list or default_discounts(),
                             grid=torus_grid, params=params, shift=p)
    fbar = res.c_extrapolated if res.converged else res.c
    eq = one_sided_equation_residual(spec, torus_grid, res.corrector, shift=p).values
    if torus_grid.dim == 1:
        seam = float(max(abs(eq[0] - fbar), abs(eq[-1] - fbar)))
    else:
        seam = float(max(np.max(np.abs(eq[0, :] - fbar)), np.max(np.abs(eq[-1, :] - fbar)),
                         np.max(np.abs(eq[:, 0] - fbar)), np.max(np.abs(eq[:, -1] - fbar))))
    return CellSolution(p=p, x_macro=x_macro, fbar=float(fbar),
                        corrector=res.corrector, sweep=res, seam_mismatch=seam)


def oracle_effective_1d(V, m: float, p: float, b: float = 1.0,
                        n_quad: int = 8193, tol: float = 1e-12) -> float:
    """Closed-form effective constant for H(y, q) = b|q|^m - V(y), 1-periodic V.

    Flat piece: Fbar = -min V while |p| <= int ((c0+V)/b)^(1/m); beyond the
    threshold, bisection on the strictly increasing c -> int ((c+V)/b)^(1/m).
    """
    if m <= 2.0:
        raise ValueError("oracle needs the superquadratic exponent m > 2")
    y = np.linspace(0.0, 1.0, n_quad)
    Vy = np.asarray(V(y), dtype=float) if callable(V) else np.asarray(V, dtype=float)
    c0 = float(-np.min(Vy))

    def I(c):
        return float(simpson(np.maximum((c + Vy) / b, 0.0) ** (1.0 / m), x=y))

    if abs(p) <= I(c0) + 1e-14:
        return c0
    lo, hi = c0, c0 + max(1.0, abs(p) ** m * b)
    while I(hi) < abs(p):
        hi = c0 + 2.0 * (hi - c0)
        if hi - c0 > 1e12:
            raise RuntimeError("oracle bisection failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if I(mid) < abs(p):
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


@dataclass
class EffectiveHamiltonian:
    """Tabulated Fbar(p) with monotone piecewise-linear interpolation."""

    p_grid: np.ndarray
    values: np.ndarray
    x_macro: object
    coercivity_rows: list  # (p, fbar, lower_bound, ok)
    cells: list
    builder: object = None  # optional callable p_grid -> EffectiveHamiltonian

    def __call__(self, p):
        return np.interp(np.asarray(p, dtype=float), self.p_grid, self.values)

    @property
    def coercive_ok(self) -> bool:
        return all(row[3] for row in self.coercivity_rows)

    def even_split(self, tol=1e-6):
        """(|p| nodes, values) for even tables; raises if not even."""
        pos = self.p_grid >= 0.0
        pp = self.p_grid[pos]
        vp = self.values[pos]
        vm = np.interp(-pp, self.p_grid, self.values)
        scale = 1.0 + np.max(np.abs(self.values))
        if np.max(np.abs(vp - vm)) > tol * scale:
            raise ValueError("effective Hamiltonian table is not even in p")
        return pp, 0.5 * (vp + vm)


def tabulate_effective(spec: ProblemSpec, p_grid, torus_grid: Grid,
                       lam_list=None, params: SchemeParams | None = None,
                       x_macro=None, tol: float = 1e-6) -> EffectiveHamiltonian:
    """Per-slope cell solves plus the certified coercivity lower bound.

    The lower bound at each p is min over cell nodes of F(0, p, y) (a
    subsolution touching argument); the report also checks growth along the
    grid ends.
    """
    p_grid = np.asarray(sorted(p_grid), dtype=float)
    pts = torus_grid.points()
    ham = spec.hamiltonian
    if not isinstance(ham, PowerHamiltonian):
        raise ValueError("effective tables need the canonical Hamiltonian form")
    bv = np.asarray(ham.b(pts), dtype=float)
    fv = np.asarray(spec.source(pts), dtype=float)
    if ham.shift is not None:
        fv = fv - np.asarray(ham.shift(pts), dtype=float)
    rows = []
    cells = []
    vals = []
    for p in p_grid:
        cell = solve_cell(spec, p, torus_grid, lam_list=lam_list, params=params,
                          x_macro=x_macro)
        cells.append(cell)
        vals.append(cell.fbar)
        shift_mag = abs(p) if torus_grid.dim == 1 else float(np.linalg.norm(p))
        lower = float(np.min(bv * shift_mag ** ham.m - fv))
        rows.append((float(p), cell.fbar, lower,
                     cell.fbar >= lower - 2.0 * tol))
    return EffectiveHamiltonian(p_grid=p_grid, values=np.asarray(vals),
                                x_macro=x_macro, coercivity_rows=rows, cells=cells)


def solve_homogenized(fbar: EffectiveHamiltonian, g, grid: Grid,
                      params: SchemeParams | None = None,
                      slope_cap: float = 1e3) -> SolveReport:
    """Monotone upwind solve of Fbar(Du) + u = 0 with generalized Dirichlet g.

    The table must cover the slopes arising on the grid; when it does not,
    the builder (if the table carries one) extends the slope range by
    doubling, up to the cap.
    """
    if grid.dim != 1:
        raise ValueError("homogenized solves are 1D (registry examples are separable)")
    params = params or SchemeParams()
    while True:
        hp, hv = fbar.even_split()
        rep, qmax = _solve_tabulated(hp, hv, g, grid, params)
        if qmax <= hp[-1] * (1.0 - 1e-9):
            return rep
        if fbar.builder is None or 2.0 * hp[-1] > slope_cap:
            raise RuntimeError(
                f"homogenized slopes reach {qmax:.3g}, beyond the table range "
                f"{hp[-1]:.3g} (cap {slope_cap:g})"
            )
        new_grid = np.unique(np.concatenate([fbar.p_grid, 2.0 * fbar.p_grid]))
        fbar = fbar.builder(new_grid)


def _solve_tabulated(hp, hv, g, grid, params):
    from .fields import make_field

    gfield = make_field(g, 1)
    x = grid.points()
    gl = float(gfield(np.asarray(x[0])))
    gr = float(gfield(np.asarray(x[-1])))
    n = grid.shape[0]
    u = np.zeros(n)
    res = np.zeros(n)
    qcl = np.zeros(n)
    c = np.ones(n)
    f = np.zeros(n)
    lip = float(np.max(np.abs(np.diff(hv) / np.diff(hp))))
    dx = grid.dx(0)
    history = []
    supres, qmax = np.inf, 0.0
    iters = 0
    while iters < params.max_iter:
        nsteps = min(params.chunk, params.max_iter - iters)
        supres, qmax = _kernels.sweep_1d_table(
            u, res, qcl, hp, hv, c, f, gl, gr, 0.0, dx, max(lip, 1e-10),
            1, 1, params.sigma, nsteps, True, 0.0)
        iters += nsteps
        history.append((iters, float(supres)))
        if supres < params.tol:
            break
    field = DiscreteField(grid, u)
    return SolveReport(field=field, residual=float(supres), iterations=iters,
                       converged=supres < params.tol, clamp_bound=False,
                       history=history, activity=None,
                       p_clamp_final=np.inf), float(qmax)


@dataclass
class EpsSweepReport:
    rows: list          # (eps, n_nodes, nodes_per_period, sup_error, runtime, variant)
    fbar: EffectiveHamiltonian
    u_bar: DiscreteField

    @property
    def errors(self):
        return [r[3] for r in self.rows]


def epsilon_sweep(spec_family, eps_list, g, cell_spec: ProblemSpec,
                  torus_n: int = 128, nodes_per_period: int = 32,
                  p_grid=None, lam_list=None,
                  params: SchemeParams | None = None,
                  domain_span: float = 1.0,
                  macro_n: int = 400) -> EpsSweepReport:
    """Oscillatory solves against the homogenized limit over decreasing eps.

    `spec_family(eps)` returns the oscillatory spec (its second-order term,
    if any, is the eps-scaled one; the variant label records whether the
    member carries diffusion).  Each member's grid resolves the oscillation
    period with at least 16 nodes (default rule 32); under-resolved requests
    are rejected.
    """
    eps_list = list(eps_list)
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if nodes_per_period < 16:
        raise ValueError("need at least 16 nodes per oscillation period")
    params = params or SchemeParams()
    torus = Grid.for_domain(cell_spec.domain, torus_n)
    if p_grid is None:
        p_grid = np.linspace(-2.0, 2.0, 17)

    def builder(pg):
        return tabulate_effective(cell_spec, pg, torus, lam_list=lam_list,
                                  params=params)

    fbar = builder(p_grid)
    fbar.builder = builder
    macro_grid = Grid.for_domain(spec_family(eps_list[0]).domain, macro_n)
    ubar = solve_homogenized(fbar, g, macro_grid, params=params).field

    rows = []
    for eps in eps_list:
        spec = spec_family(eps)
        n = int(np.ceil(nodes_per_period * domain_span / eps)) + 1
        grid = Grid.for_domain(spec.domain, n)
        if grid.dx(0) > eps / 16.0:
            raise ValueError(f"grid under-resolves eps={eps}")
        t0 = time.perf_counter()
        rep = _dirichlet_solve(spec, grid, params)
        rt = time.perf_counter() - t0
        ubar_on = np.interp(grid.axis_coords(0), macro_grid.axis_coords(0),
                            ubar.values)
        err = float(np.max(np.abs(rep.field.values - ubar_on)))
        variant = "eps-diffusion" if np.any(
            np.asarray(spec.diffusion.a11(grid.points()), dtype=float) > 0.0
        ) else "first-order"
        rows.append((eps, n, nodes_per_period, err, rt, variant))
    return EpsSweepReport(rows=rows, fbar=fbar, u_bar=ubar)


def _dirichlet_solve(spec, grid, params):
    from .solver import solve_stationary

    if not isinstance(spec.boundary, DirichletBC):
        raise ValueError("oscillatory members carry generalized Dirichlet data")
    return solve_stationary(spec, grid, params, lam=0.0)
