"""Monotone finite-difference solver for the stationary and evolution problems.

The discrete operator follows the kernel convention in `_kernels`: centered
second differences for -Tr(a D^2 u) (7-point monotone cross stencil for
off-diagonal a, subject to a diagonal-dominance check at assembly), Godunov
upwinding for the superquadratic gradient term, and one-sided
interior-facing differences at boundary nodes.  Generalized Dirichlet nodes
carry the residual max(equation, u - g), whose zero set is the viscosity
disjunction: either the data is attained (u = g) or the one-sided equation
holds with u below the data; state-constraint nodes carry the equation
alone.

Stationary problems are driven to steady state by damped pseudo-time
iteration u <- u - dtau * residual(u).  The documented basic step uses the
global CFL rule dtau <= sigma / (2 sup|a| / dx^2 + m b_max P^(m-1) / dx +
lam + sup c+); production solves default to the per-node version of the
same bound (`local_dt`), which removes the penalty the steep boundary
layers would otherwise impose on the whole grid, and to a mean-residual
anchor correction for discounted translation-invariant problems
(`anchor_accel`), which removes the O(1/lam) relaxation of the constant
mode.  Neither changes the fixed point, and one basic step remains a
monotone map.  The superquadratic gradient is clamped at P_max during
transients and the clamp is released (doubled) until inactive before
convergence is declared.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .grids import DiscreteField, Grid
from .problem import (
    DirichletBC,
    PeriodicBC,
    PowerHamiltonian,
    ProblemSpec,
    StateConstraintBC,
    Torus,
)

__all__ = [
    "SchemeParams",
    "SolveReport",
    "EvolutionResult",
    "ConfigurationError",
    "CFLViolationError",
    "discrete_residual",
    "one_sided_equation_residual",
    "cfl_dt",
    "pseudo_time_step",
    "solve_stationary",
    "solve_with_continuation",
    "solve_evolution",
    "verify_discrete_subsolution",
    "boundary_activity",
]


class ConfigurationError(ValueError):
    """Spec/grid combination the scheme cannot discretize monotonically."""


class CFLViolationError(RuntimeError):
    """Residual blow-up detected during explicit marching."""


@dataclass(frozen=True)
class SchemeParams:
    """Pseudo-time iteration knobs.

    sigma        CFL safety factor in (0, 1].
    tol          sup-norm residual tolerance for convergence.
    max_iter     iteration budget.
    p_clamp      initial gradient clamp for the superquadratic term (>= 10);
                 doubled until inactive before convergence is declared.
    local_dt     per-node CFL denominators (default); False selects the
                 single global time step of the documented basic rule.
    anchor_accel mean-residual constant-mode correction for discounted
                 translation-invariant solves.
    imex         implicit tridiagonal diffusion for 1D bounded stationary
                 solves (advective-only CFL); evolution marching is always
                 explicit.
    chunk        kernel steps between convergence checks.
    """

    sigma: float = 0.5
    tol: float = 1e-8
    max_iter: int = 60_000_000
    p_clamp: float = 10.0
    local_dt: bool = True
    anchor_accel: bool = True
    imex: bool = True
    chunk: int = 4000

    def __post_init__(self):
        if not (0.0 < self.sigma <= 1.0):
            raise ValueError(f"sigma must be in (0, 1], got {self.sigma}")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.p_clamp < 10.0:
            raise ValueError(f"p_clamp must be >= 10, got {self.p_clamp}")


@dataclass
class SolveReport:
    field: DiscreteField
    residual: float
    iterations: int
    converged: bool
    clamp_bound: bool
    history: list
    activity: dict | None
    p_clamp_final: float


@dataclass
class EvolutionResult:
    times: list
    fields: list
    dt_final: float
    clamp_events: int


# ---------------------------------------------------------------------------
# assembly


@dataclass
class _Assembled:
    dim: int
    periodic: bool
    bc: int  # 0 state constraint, 1 dirichlet (ignored when periodic)
    dx: float
    dy: float
    m: float
    a11: np.ndarray
    a22: np.ndarray
    a12: np.ndarray
    b: np.ndarray
    c: np.ndarray
    f: np.ndarray
    g: np.ndarray
    gl: float = 0.0
    gr: float = 0.0
    sx: float = 0.0
    sy: float = 0.0
    # state-constraint layer-cap coefficients (negative = one-sided equation)
    scl: float = -1.0
    scr: float = -1.0
    capx: np.ndarray | None = None
    capy: np.ndarray | None = None
    dxax: float = 1.0
    dxay: float = 1.0
    q_wall: float = 0.0  # predicted wall-layer slope (cap coefficient * dx^(alpha-1))


def _layer_cap(a_nn, b, m):
    """Universal first-cell rise coefficient of the d^alpha wall layer.

    The layer u ~ U - K d^alpha of -a u'' + b |u'|^m balances its singular
    terms when (K alpha)^(m-1) = (a/b)(1 - alpha); the wall cell of the
    monotone scheme is pinned to that rise.  Returns -1 where the normal
    diffusion vanishes (first-order problems have Lipschitz state-constraint
    solutions and keep the one-sided equation closure).
    """
    if m <= 2.0:
        return np.full_like(np.asarray(a_nn, dtype=float), -1.0)
    alpha = (m - 2.0) / (m - 1.0)
    a_nn = np.asarray(a_nn, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = ((a_nn / b) * (1.0 - alpha)) ** (1.0 / (m - 1.0)) / alpha
    return np.where(a_nn > 1e-14, K, -1.0)


def _assemble(spec: ProblemSpec, grid: Grid, shift=None,
              sc_closure: str = "cap") -> _Assembled:
    if not isinstance(spec.hamiltonian, PowerHamiltonian):
        raise ConfigurationError(
            "grid solves need the canonical b(x)|p|^m Hamiltonian form "
            f"(got {type(spec.hamiltonian).__name__})"
        )
    if spec.dim != grid.dim:
        raise ConfigurationError(f"spec dim {spec.dim} != grid dim {grid.dim}")
    periodic = grid.periodic
    if isinstance(spec.boundary, PeriodicBC) != periodic:
        raise ConfigurationError("periodic boundary tag requires a torus grid and vice versa")
    pts = grid.points()
    ham = spec.hamiltonian
    m = float(ham.m)
    if m <= 1.0:
        raise ConfigurationError(f"gradient exponent must exceed 1, got {m}")
    b = np.ascontiguousarray(np.broadcast_to(np.asarray(ham.b(pts), dtype=float),
                                             grid.shape).copy())
    if np.min(b) <= 0.0:
        raise ConfigurationError(f"b(x) must be positive on nodes, min {np.min(b):.3e}")
    f = np.asarray(spec.source(pts), dtype=float)
    if ham.shift is not None:
        f = f - np.asarray(ham.shift(pts), dtype=float)
    f = np.ascontiguousarray(np.broadcast_to(f, grid.shape).copy())
    c = np.ascontiguousarray(np.broadcast_to(np.asarray(spec.zeroth(pts), dtype=float),
                                             grid.shape).copy())
    a11, a22, a12 = spec.diffusion.entries(pts, spec.dim)
    a11 = np.ascontiguousarray(np.broadcast_to(np.asarray(a11, dtype=float), grid.shape).copy())
    a22 = np.ascontiguousarray(np.broadcast_to(np.asarray(a22, dtype=float), grid.shape).copy())
    a12 = np.ascontiguousarray(np.broadcast_to(np.asarray(a12, dtype=float), grid.shape).copy())
    if np.min(a11) < -1e-12 or (grid.dim == 2 and np.min(a22) < -1e-12):
        raise ConfigurationError("diagonal diffusion entries must be nonnegative")
    dx = grid.dx(0)
    dy = grid.dx(1) if grid.dim == 2 else dx
    if grid.dim == 2 and np.any(a12 != 0.0):
        dom1 = np.min(a11 * dy - np.abs(a12) * dx)
        dom2 = np.min(a22 * dx - np.abs(a12) * dy)
        if dom1 < -1e-12 or dom2 < -1e-12:
            raise ConfigurationError(
                "off-diagonal diffusion violates the monotone-stencil dominance "
                f"condition (a11*dy - |a12|*dx >= 0 and a22*dx - |a12|*dy >= 0): "
                f"worst slacks {dom1:.3e}, {dom2:.3e}"
            )
    bc = 0
    g = np.zeros(grid.shape)
    gl = gr = 0.0
    if isinstance(spec.boundary, DirichletBC):
        bc = 1
        g = np.ascontiguousarray(
            np.broadcast_to(np.asarray(spec.boundary.g(pts), dtype=float), grid.shape).copy()
        )
        if grid.dim == 1:
            gl, gr = float(g[0]), float(g[-1])
    elif not isinstance(spec.boundary, (StateConstraintBC, PeriodicBC)):
        raise ConfigurationError(f"unsupported boundary tag {spec.boundary!r}")
    sx = sy = 0.0
    if shift is not None:
        sh = np.atleast_1d(np.asarray(shift, dtype=float))
        sx = float(sh[0])
        sy = float(sh[1]) if len(sh) > 1 else 0.0
    scl = scr = -1.0
    capx = np.full(grid.shape, -1.0)
    capy = np.full(grid.shape, -1.0)
    dxax = dx ** ((m - 2.0) / (m - 1.0)) if m > 2.0 else 1.0
    dxay = dy ** ((m - 2.0) / (m - 1.0)) if m > 2.0 else 1.0
    q_wall = 0.0
    if bc == 0 and not periodic and sc_closure == "cap":
        if grid.dim == 1:
            caps = _layer_cap(a11, b, m)
            scl, scr = float(caps[0]), float(caps[-1])
            q_wall = max(scl, scr, 0.0) * dxax / dx
        else:
            capx = np.ascontiguousarray(_layer_cap(a11, b, m))
            capy = np.ascontiguousarray(_layer_cap(a22, b, m))
            q_wall = max(float(np.max(capx)) * dxax / dx,
                         float(np.max(capy)) * dxay / dy, 0.0)
    return _Assembled(dim=grid.dim, periodic=periodic, bc=bc, dx=dx, dy=dy, m=m,
                      a11=a11, a22=a22, a12=a12, b=b, c=c, f=f, g=g,
                      gl=gl, gr=gr, sx=sx, sy=sy, scl=scl, scr=scr,
                      capx=capx, capy=capy, dxax=dxax, dxay=dxay, q_wall=q_wall)


def _run_sweep(asm: _Assembled, u, res, qcl, lam, pclamp, sigma, nsteps,
               use_local, dt_global, anchor_gain):
    if asm.dim == 1:
        if asm.periodic:
            return _kernels.sweep_1d_periodic(
                u, res, qcl, asm.a11, asm.b, asm.c, asm.f, asm.m, lam, asm.dx,
                pclamp, asm.sx, sigma, nsteps, use_local, dt_global, anchor_gain)
        return _kernels.sweep_1d(
            u, res, qcl, asm.a11, asm.b, asm.c, asm.f, asm.gl, asm.gr, asm.m,
            lam, asm.dx, pclamp, asm.sx, asm.bc, asm.bc, asm.scl, asm.scr,
            asm.dxax, sigma, nsteps, use_local, dt_global, anchor_gain)
    if asm.periodic:
        return _kernels.sweep_2d_periodic(
            u, res, qcl, asm.a11, asm.a22, asm.a12, asm.b, asm.c, asm.f, asm.m,
            lam, asm.dx, asm.dy, pclamp, asm.sx, asm.sy, sigma, nsteps,
            use_local, dt_global, anchor_gain)
    return _kernels.sweep_2d(
        u, res, qcl, asm.a11, asm.a22, asm.a12, asm.b, asm.c, asm.f, asm.g,
        asm.m, lam, asm.dx, asm.dy, pclamp, asm.sx, asm.sy, asm.bc,
        asm.capx, asm.capy, asm.dxax, asm.dxay, sigma, nsteps, use_local,
        dt_global, anchor_gain)


# ---------------------------------------------------------------------------
# residual evaluation


def discrete_residual(spec: ProblemSpec, grid: Grid, u: DiscreteField,
                      lam: float = 0.0, p_clamp: float = np.inf,
                      shift=None, sc_closure: str = "cap") -> DiscreteField:
    """Residual of the monotone scheme at every node (unclamped by default)."""
    asm = _assemble(spec, grid, shift, sc_closure=sc_closure)
    uu = u.values.copy()
    res = np.zeros_like(uu)
    qcl = np.zeros_like(uu)
    _run_sweep(asm, uu, res, qcl, lam, p_clamp, 0.0, 1, False, 0.0, 0.0)
    return DiscreteField(grid, res)


def one_sided_equation_residual(spec: ProblemSpec, grid: Grid, u: DiscreteField,
                                lam: float = 0.0, shift=None) -> DiscreteField:
    """The equation part alone (no data branch) at every node."""
    eq_spec = spec if isinstance(spec.boundary, (StateConstraintBC, PeriodicBC)) \
        else dataclasses.replace(spec, boundary=StateConstraintBC())
    return discrete_residual(eq_spec, grid, u, lam=lam, shift=shift,
                             sc_closure="equation")


def cfl_dt(spec: ProblemSpec, grid: Grid, params: SchemeParams,
           lam: float = 0.0, p_clamp: float | None = None) -> float:
    """Global pseudo-time step sigma / (diffusion + gradient + zeroth-order rows)."""
    asm = _assemble(spec, grid)
    p = params.p_clamp if p_clamp is None else p_clamp
    denom = 2.0 * np.max(asm.a11) / asm.dx**2
    grad = 1.0 / asm.dx
    if asm.dim == 2:
        denom += 2.0 * np.max(asm.a22) / asm.dy**2
        denom += 2.0 * np.max(np.abs(asm.a12)) / (asm.dx * asm.dy)
        grad += 1.0 / asm.dy
    denom += asm.m * np.max(asm.b) * p ** (asm.m - 1.0) * grad
    denom += lam + max(0.0, float(np.max(asm.c)))
    if asm.bc == 1 and not asm.periodic:
        denom += 1.0  # unit Lipschitz of the data branch u - g
    return params.sigma / denom


def pseudo_time_step(spec: ProblemSpec, grid: Grid, u: DiscreteField,
                     params: SchemeParams | None = None, lam: float = 0.0,
                     shift=None) -> DiscreteField:
    """One documented basic step: u - dt * residual with the global CFL dt."""
    params = params or SchemeParams()
    asm = _assemble(spec, grid, shift)
    dt = cfl_dt(spec, grid, params, lam, params.p_clamp)
    uu = u.values.copy()
    res = np.zeros_like(uu)
    qcl = np.zeros_like(uu)
    _run_sweep(asm, uu, res, qcl, lam, params.p_clamp, params.sigma, 1,
               False, dt, 0.0)
    return DiscreteField(grid, uu)


# ---------------------------------------------------------------------------
# stationary solves


def _anchor_gain(asm: _Assembled, params: SchemeParams, lam: float) -> float:
    if not params.anchor_accel or lam <= 0.0:
        return 0.0
    if asm.bc == 1 and not asm.periodic:
        return 0.0  # data branch breaks translation covariance
    if np.any(asm.c != 0.0):
        return 0.0
    return 1.0 / lam


def solve_stationary(spec: ProblemSpec, grid: Grid, params: SchemeParams | None = None,
                     lam: float = 0.0, init: DiscreteField | None = None,
                     shift=None) -> SolveReport:
    """Damped pseudo-time iteration to the stationary solution.

    Well-posedness needs lam + min c > 0 unless the problem is driven as an
    ergodic subproblem.  Returns when the sup-norm residual falls below the
    tolerance with the gradient clamp inactive; a still-active clamp or an
    exhausted budget is reported through the flags, not raised.
    """
    params = params or SchemeParams()
    asm = _assemble(spec, grid, shift)
    u = np.ascontiguousarray(init.values.copy()) if init is not None \
        else np.zeros(grid.shape)
    res = np.zeros_like(u)
    qcl = np.zeros_like(u)
    # pre-size the clamp for the known wall-layer slope so releases are rare
    pclamp = max(params.p_clamp, 1.5 * asm.q_wall)
    gain = _anchor_gain(asm, params, lam)
    use_imex = (params.imex and asm.dim == 1 and not asm.periodic
                and bool(np.any(asm.a11 > 0.0)))
    if use_imex:
        low = np.zeros_like(u)
        dia = np.zeros_like(u)
        upp = np.zeros_like(u)
        rhs = np.zeros_like(u)
    # Discounted translation-invariant solves carry a large constant offset
    # ~ c/lam that would put the residual tolerance below the floating-point
    # floor; iterate on the anchored part and fold lam * offset into the
    # source instead (exactly equivalent in exact arithmetic).
    split = gain > 0.0
    offset = 0.0
    f_orig = asm.f
    if split:
        offset = float(np.mean(u))
        u -= offset
        asm.f = f_orig - lam * offset
    history = []
    iters = 0
    converged = False
    clamp_bound = False
    supres, qmax = np.inf, 0.0
    sigma = params.sigma
    best = np.inf
    stall = 0
    while iters < params.max_iter:
        nsteps = min(params.chunk, params.max_iter - iters)
        if use_imex:
            supres, qmax = _kernels.sweep_1d_imex(
                u, res, qcl, low, dia, upp, rhs, asm.a11, asm.b, asm.c, asm.f,
                asm.gl, asm.gr, asm.m, lam, asm.dx, pclamp, asm.sx, asm.bc,
                asm.bc, asm.scl, asm.scr, asm.dxax, sigma, nsteps, gain)
        else:
            dt = 0.0 if params.local_dt else cfl_dt(spec, grid, params, lam, pclamp)
            supres, qmax = _run_sweep(asm, u, res, qcl, lam, pclamp, sigma,
                                      nsteps, params.local_dt, dt, gain)
        if split:
            drift = float(np.mean(u))
            if abs(drift) > 1.0:
                u -= drift
                offset += drift
                asm.f = f_orig - lam * offset
        iters += nsteps
        history.append((iters, float(supres)))
        if not np.isfinite(supres):
            raise CFLViolationError(
                f"pseudo-time iteration diverged after {iters} steps "
                f"(sup residual {supres}); reduce sigma or check the spec"
            )
        if supres < params.tol:
            if qmax >= 0.999 * pclamp:
                pclamp *= 2.0  # release the clamp and keep iterating
                continue
            converged = True
            break
        # extra damping when the steep layer cells flip-flop near convergence
        if supres >= 0.7 * best:
            stall += 1
            if stall >= 3 and sigma > params.sigma / 64.0:
                sigma *= 0.5
                stall = 0
        else:
            stall = 0
        best = min(best, supres)
    else:
        clamp_bound = qmax >= 0.999 * pclamp
    if split:
        # one well-conditioned residual evaluation in the split frame
        _run_sweep(asm, u.copy(), res, qcl, lam, np.inf, 0.0, 1, False, 0.0, 0.0)
        final_res = float(np.max(np.abs(res)))
        u = u + offset
        asm.f = f_orig
        field = DiscreteField(grid, u)
    else:
        field = DiscreteField(grid, u)
        final_res = discrete_residual(spec, grid, field, lam=lam,
                                      shift=shift).sup_norm()
    act = boundary_activity(spec, grid, field, lam=lam, tol=params.tol) \
        if asm.bc == 1 and not asm.periodic else None
    return SolveReport(field=field, residual=final_res, iterations=iters,
                       converged=converged and final_res < 10 * params.tol,
                       clamp_bound=clamp_bound, history=history, activity=act,
                       p_clamp_final=pclamp)


def solve_with_continuation(spec: ProblemSpec, grid: Grid,
                            params: SchemeParams | None = None, lam: float = 0.0,
                            shift=None, levels: int = 3) -> SolveReport:
    """Coarse-to-fine warm-started stationary solve (same fixed point)."""
    params = params or SchemeParams()
    sizes = []
    n = max(grid.shape)
    for k in range(levels, 0, -1):
        nk = max(25, n // 2**k)
        if nk < n and (not sizes or nk > sizes[-1]):
            sizes.append(nk)
    u_prev = None
    grid_prev = None
    for nk in sizes:
        gk = Grid.for_domain(grid.domain, nk)
        init = _interp_field(u_prev, grid_prev, gk) if u_prev is not None else None
        rep = solve_stationary(spec, gk, params, lam, init=init, shift=shift)
        u_prev, grid_prev = rep.field, gk
    init = _interp_field(u_prev, grid_prev, grid) if u_prev is not None else None
    return solve_stationary(spec, grid, params, lam, init=init, shift=shift)


def _interp_field(field: DiscreteField, src: Grid, dst: Grid) -> DiscreteField:
    if src.dim == 1:
        vals = np.interp(dst.axis_coords(0), src.axis_coords(0), field.values)
        return DiscreteField(dst, vals)
    from scipy.interpolate import RegularGridInterpolator

    it = RegularGridInterpolator((src.axis_coords(0), src.axis_coords(1)),
                                 field.values, bounds_error=False, fill_value=None)
    pts = dst.points().reshape(-1, 2)
    return DiscreteField(dst, it(pts).reshape(dst.shape))


# ---------------------------------------------------------------------------
# evolution


def solve_evolution(spec: ProblemSpec, grid: Grid, u0: DiscreteField, T: float,
                    params: SchemeParams | None = None, snapshot_times=None,
                    lam: float = 0.0) -> EvolutionResult:
    """Explicit forward marching of u_t + F(D^2 u, Du, x) (+ lam u) = 0.

    The same monotone spatial operator is used; lateral generalized
    Dirichlet data enters through the max(equation, u - g) boundary
    residual.  The time step follows the global CFL rule with the current
    gradient clamp; if marching gradients hit the clamp it is doubled and
    the step shrunk (clamping never distorts the reported solution).  A
    10x residual blow-up aborts with a CFL diagnostic.
    """
    if T <= 0.0:
        raise ValueError("T must be positive")
    params = params or SchemeParams()
    asm = _assemble(spec, grid)
    targets = sorted(set(float(t) for t in (snapshot_times or [])) | {float(T)})
    if any(t < 0 or t > T for t in targets):
        raise ValueError("snapshot times must lie in [0, T]")
    u = u0.values.copy()
    res = np.zeros_like(u)
    qcl = np.zeros_like(u)
    pclamp = params.p_clamp
    dt = cfl_dt(spec, grid, params, lam, pclamp)
    times, fields = [], []
    if targets and targets[0] == 0.0:
        times.append(0.0)
        fields.append(DiscreteField(grid, u.copy()))
        targets = targets[1:]
    t = 0.0
    ref_res = None
    clamp_events = 0
    for target in targets:
        while t < target - 1e-13:
            span = target - t
            nsteps = int(span / dt)
            if nsteps == 0:
                supres, qmax = _run_sweep(asm, u, res, qcl, lam, pclamp, params.sigma,
                                          1, False, span, 0.0)
                t = target
            else:
                nsteps = min(nsteps, params.chunk)
                supres, qmax = _run_sweep(asm, u, res, qcl, lam, pclamp, params.sigma,
                                          nsteps, False, dt, 0.0)
                t += nsteps * dt
            if ref_res is None:
                ref_res = max(float(supres), 1.0)
            if not np.isfinite(supres) or supres > 10.0 * ref_res:
                raise CFLViolationError(
                    f"residual grew to {supres:.3e} (reference {ref_res:.3e}) at "
                    f"t = {t:.4f}; marching unstable"
                )
            if qmax >= 0.98 * pclamp:
                pclamp *= 2.0
                clamp_events += 1
                dt = cfl_dt(spec, grid, params, lam, pclamp)
        times.append(target)
        fields.append(DiscreteField(grid, u.copy()))
    return EvolutionResult(times=times, fields=fields, dt_final=dt,
                           clamp_events=clamp_events)


# ---------------------------------------------------------------------------
# verification helpers


def verify_discrete_subsolution(u: DiscreteField, spec: ProblemSpec, grid: Grid,
                                tol: float, lam: float = 0.0) -> list:
    """Nodes violating the discrete subsolution inequalities by more than tol.

    Interior (and periodic) nodes: residual <= tol.  Generalized Dirichlet
    boundary nodes: min(equation, u - g) <= tol.  State-constraint boundary
    nodes carry no subsolution-side requirement.
    """
    eq = one_sided_equation_residual(spec, grid, u, lam=lam).values
    bmask = grid.boundary_mask()
    out = []
    it = np.ndindex(*grid.shape)
    if isinstance(spec.boundary, DirichletBC):
        g = np.asarray(spec.boundary.g(grid.points()), dtype=float)
        g = np.broadcast_to(g, grid.shape)
    for idx in it:
        if bmask[idx]:
            if isinstance(spec.boundary, DirichletBC):
                v = min(eq[idx], u.values[idx] - g[idx])
                if v > tol:
                    out.append((idx, float(v)))
        else:
            if eq[idx] > tol:
                out.append((idx, float(eq[idx])))
    return out


def boundary_activity(spec: ProblemSpec, grid: Grid, u: DiscreteField,
                      lam: float = 0.0, tol: float = 1e-8) -> dict:
    """Per boundary node: 'data' (u = g) or 'equation' (one-sided residual = 0)."""
    if not isinstance(spec.boundary, DirichletBC):
        raise ValueError("activity map needs a generalized Dirichlet spec")
    g = np.broadcast_to(np.asarray(spec.boundary.g(grid.points()), dtype=float),
                        grid.shape)
    eq = one_sided_equation_residual(spec, grid, u, lam=lam).values
    act_tol = max(1e-6 * (1.0 + float(np.max(np.abs(g)))), 10.0 * tol)
    out = {}
    for idx in zip(*np.nonzero(grid.boundary_mask())):
        key = idx if len(idx) > 1 else idx[0]
        if u.values[idx] - g[idx] >= -act_tol:
            out[key] = "data"
        elif abs(eq[idx]) <= act_tol:
            out[key] = "equation"
        else:
            out[key] = "unresolved"
    return out
