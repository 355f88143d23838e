"""Degenerate elliptic operator specs and their structural validators.

The model operator is

    F(M, p, u, x) = -Tr(a(x) M) + H(x, p) + c(x) u - f(x)

with a(x) symmetric positive semidefinite, H superquadratic in p (canonical
form b(x)|p|^m with m > 2, optional additive lower-order term), and c, f
continuous coefficient fields.  This module owns the spec type, sampled
ellipticity / growth-bound checks, the quasilinear rewrite, and the class of
admissible growth functions h (convex, h(t)/t^2 nondecreasing past 1, with
finite tail integrals of t/h and t^2 h'/h^2).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fields import Diffusion, Field, make_field
from .quadrature import TailEstimate, TailTable

__all__ = [
    "DomainError",
    "InvalidSpecError",
    "Interval",
    "Box",
    "Ball",
    "Torus",
    "DirichletBC",
    "StateConstraintBC",
    "PeriodicBC",
    "PowerHamiltonian",
    "QuasilinearHamiltonian",
    "ProblemSpec",
    "GrowthFunction",
    "ClassPReport",
    "evaluate_operator",
    "check_ellipticity",
    "check_superquadratic_bound",
    "rewrite_quasilinear",
    "validate_class_p",
    "tail_integral",
    "sample_points",
]

PSD_TOL = 1e-12
ELLIPTICITY_TOL = 1e-10


class DomainError(ValueError):
    """A point lies outside the closed domain of a spec."""


class InvalidSpecError(ValueError):
    """A spec violates its structural invariants."""


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Interval:
    lo: float = -1.0
    hi: float = 1.0

    dim = 1
    periodic = False

    def contains(self, x, tol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        return (x >= self.lo - tol) & (x <= self.hi + tol)

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.lo, self.hi - x)


@dataclass(frozen=True)
class Box:
    lo: tuple = (-1.0, -1.0)
    hi: tuple = (1.0, 1.0)

    dim = 2
    periodic = False

    def contains(self, x, tol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for k in range(2):
            ok &= (x[..., k] >= self.lo[k] - tol) & (x[..., k] <= self.hi[k] + tol)
        return ok

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        d = np.minimum(x[..., 0] - self.lo[0], self.hi[0] - x[..., 0])
        d = np.minimum(d, np.minimum(x[..., 1] - self.lo[1], self.hi[1] - x[..., 1]))
        return d


@dataclass(frozen=True)
class Ball:
    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    ndim: int = 2

    periodic = False

    @property
    def dim(self):
        return self.ndim

    def contains(self, x, tol: float = 1e-12):
        return self._r(x) <= self.radius + tol

    def boundary_distance(self, x):
        return self.radius - self._r(x)

    def _r(self, x):
        x = np.asarray(x, dtype=float)
        if self.ndim == 1:
            return np.abs(x - self.center[0])
        c = np.asarray(self.center[: self.ndim])
        return np.sqrt(np.sum((x - c) ** 2, axis=-1))


@dataclass(frozen=True)
class Torus:
    """Periodic box; opposite faces are identified."""

    lo: tuple = (0.0,)
    hi: tuple = (1.0,)

    periodic = True

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, x, tol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape if self.dim == 1 else x.shape[:-1], dtype=bool)

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape if self.dim == 1 else x.shape[:-1], np.inf)

    @property
    def period(self):
        return tuple(h - l for l, h in zip(self.lo, self.hi))


# ---------------------------------------------------------------------------
# boundary conditions


@dataclass(frozen=True)
class DirichletBC:
    """Generalized (viscosity-sense) Dirichlet data; loss of data is allowed."""

    g: Field

    tag = "dirichlet"


@dataclass(frozen=True)
class StateConstraintBC:
    """Supersolution inequality holds up to the boundary; no data."""

    tag = "state_constraint"


@dataclass(frozen=True)
class PeriodicBC:
    tag = "periodic"


# ---------------------------------------------------------------------------
# Hamiltonians


def _pnorm(p, dim):
    p = np.asarray(p, dtype=float)
    if dim == 1:
        return np.abs(p)
    return np.sqrt(np.sum(p * p, axis=-1))


@dataclass(frozen=True)
class PowerHamiltonian:
    """H(x, p) = b(x) |p|^m + shift(x), with b >= b0 > 0 and m > 2 canonically."""

    b: Field
    m: float
    shift: Field | None = None

    kind = "power"

    @property
    def growth_exponent(self):
        return self.m

    def __call__(self, x, p, u=0.0, dim: int = 1):
        val = np.asarray(self.b(x), dtype=float) * _pnorm(p, dim) ** self.m
        if self.shift is not None:
            val = val + np.asarray(self.shift(x), dtype=float)
        return val


@dataclass(frozen=True)
class QuasilinearHamiltonian:
    """H(x, p, u) = (1 + |p|^k)(|p|^m + c(x) u - f(x)).

    Produced by multiplying  -Laplace(u)/(1+|Du|^k) + |Du|^m + c u = f  by
    1 + |Du|^k; the original zeroth-order and source terms ride along inside
    H, so the containing spec carries c = f = 0.
    """

    k: float
    m: float
    c: Field
    f: Field

    kind = "quasilinear"

    @property
    def growth_exponent(self):
        return self.k + self.m

    def __call__(self, x, p, u=0.0, dim: int = 1):
        q = _pnorm(p, dim)
        w = 1.0 + q**self.k
        return w * (q**self.m + np.asarray(self.c(x), dtype=float) * u
                    - np.asarray(self.f(x), dtype=float))


# ---------------------------------------------------------------------------
# the spec


@dataclass(frozen=True)
class ProblemSpec:
    """A fully specified operator F(M, p, u, x) with domain and boundary tag."""

    dim: int
    domain: object
    diffusion: Diffusion
    hamiltonian: object
    zeroth: Field
    source: Field
    boundary: object
    superquadratic: bool = True
    name: str = ""

    @property
    def growth_exponent(self) -> float:
        return self.hamiltonian.growth_exponent

    def with_source(self, source) -> "ProblemSpec":
        return dataclasses.replace(self, source=make_field(source, self.dim))

    def shifted_source(self, delta: float) -> "ProblemSpec":
        return dataclasses.replace(self, source=self.source.shifted(delta))

    def F00(self, x):
        """F(0, 0, 0, x): the zero-field residual driving discount bounds."""
        return np.asarray(self.hamiltonian(x, np.zeros(self.dim) if self.dim > 1 else 0.0,
                                           0.0, dim=self.dim), dtype=float) \
            - np.asarray(self.source(x), dtype=float)

    def validate(self, samples: int = 200, seed: int = 0) -> None:
        """Check structural invariants on sampled points; raise on failure."""
        rng = np.random.default_rng(seed)
        x = sample_points(self.domain, samples, rng)
        a = self.diffusion.matrix(x, self.dim)
        eigs = np.linalg.eigvalsh(a)
        if np.min(eigs) < -PSD_TOL:
            raise InvalidSpecError(
                f"diffusion matrix not PSD: min eigenvalue {np.min(eigs):.3e}"
            )
        if self.superquadratic and self.growth_exponent <= 2.0:
            raise InvalidSpecError(
                f"declared superquadratic but growth exponent "
                f"{self.growth_exponent} <= 2"
            )
        if isinstance(self.hamiltonian, PowerHamiltonian):
            b = np.asarray(self.hamiltonian.b(x), dtype=float)
            if np.min(b) <= 0.0:
                raise InvalidSpecError(f"b(x) must be positive, min sampled {np.min(b):.3e}")

    def validated(self, samples: int = 200, seed: int = 0) -> "ProblemSpec":
        self.validate(samples, seed)
        return self


def sample_points(domain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample of n points in the closed domain."""
    if isinstance(domain, Interval):
        return rng.uniform(domain.lo, domain.hi, size=n)
    if isinstance(domain, (Box, Torus)):
        lo = np.asarray(domain.lo, dtype=float)
        hi = np.asarray(domain.hi, dtype=float)
        if len(lo) == 1:
            return rng.uniform(lo[0], hi[0], size=n)
        return rng.uniform(lo, hi, size=(n, len(lo)))
    if isinstance(domain, Ball):
        if domain.ndim == 1:
            return domain.center[0] + domain.radius * rng.uniform(-1.0, 1.0, size=n)
        # polar sampling, uniform in the ball
        r = domain.radius * np.sqrt(rng.uniform(0.0, 1.0, size=n))
        th = rng.uniform(0.0, 2.0 * np.pi, size=n)
        c = np.asarray(domain.center[:2])
        return c + np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    raise TypeError(f"cannot sample from {type(domain).__name__}")


# ---------------------------------------------------------------------------
# operator evaluation and sampled checks


def evaluate_operator(spec: ProblemSpec, M, p, u: float, x) -> float:
    """F(M, p, u, x) for a single point x in the closed domain."""
    x = np.asarray(x, dtype=float)
    if not np.all(spec.domain.contains(x)):
        raise DomainError(f"point {x} outside domain {spec.domain}")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (spec.dim, spec.dim):
        raise ValueError(f"M must be {spec.dim}x{spec.dim}, got {M.shape}")
    if not np.allclose(M, M.T, atol=1e-12):
        raise ValueError("M must be symmetric")
    a = spec.diffusion.matrix(x, spec.dim)
    second = -float(np.trace(a @ M))
    ham = float(spec.hamiltonian(x, p, u, dim=spec.dim))
    return second + ham + float(spec.zeroth(x)) * u - float(spec.source(x))


@dataclass(frozen=True)
class EllipticityReport:
    passed: bool
    worst_violation: float
    samples: int
    seed: int
    tol: float = ELLIPTICITY_TOL


def check_ellipticity(spec: ProblemSpec, sample_count: int, seed: int) -> EllipticityReport:
    """Sampled degenerate-ellipticity check: F(Y+P, ...) <= F(Y, ...) for PSD P.

    Violations are report entries, not faults.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    xs = sample_points(spec.domain, sample_count, rng)
    worst = -np.inf
    for i in range(sample_count):
        x = xs[i]
        p = rng.normal(size=spec.dim) * rng.uniform(0.0, 5.0)
        u = rng.normal() * 2.0
        Y = rng.normal(size=(spec.dim, spec.dim))
        Y = 0.5 * (Y + Y.T)
        A = rng.normal(size=(spec.dim, spec.dim))
        P = A @ A.T * rng.uniform(0.0, 2.0)
        gap = evaluate_operator(spec, Y + P, p, u, x) - evaluate_operator(spec, Y, p, u, x)
        worst = max(worst, gap)
    return EllipticityReport(passed=worst <= ELLIPTICITY_TOL, worst_violation=worst,
                             samples=sample_count, seed=seed)


@dataclass(frozen=True)
class SuperquadraticBound:
    certified: bool
    K1: float
    K2: float
    m: float
    worst_gap: float
    message: str = ""


def check_superquadratic_bound(
    spec: ProblemSpec,
    R: float,
    box=None,
    samples: int = 400,
    seed: int = 0,
    p_max: float = 1e3,
) -> SuperquadraticBound:
    """Certify H(x, p) >= K1 |p|^m - K2 on sampled (x, p) with |u| <= R.

    For canonical power Hamiltonians the constants are read off the form
    (K1 = min b, K2 from the additive term) and then verified by sampling;
    otherwise K1 is probed at large |p| against the declared growth exponent.
    A spec flagged non-superquadratic is reported as not certified.
    """
    m = spec.growth_exponent
    if not spec.superquadratic or m <= 2.0:
        return SuperquadraticBound(False, 0.0, 0.0, m,
                                   np.inf, "spec not in the superquadratic regime")
    rng = np.random.default_rng(seed)
    dom = box if box is not None else spec.domain
    xs = sample_points(dom, samples, rng)
    # sample |p| log-uniformly up to p_max with random directions
    radii = np.exp(rng.uniform(np.log(1e-3), np.log(p_max), size=samples))
    if spec.dim == 1:
        ps = radii * rng.choice([-1.0, 1.0], size=samples)
    else:
        th = rng.uniform(0, 2 * np.pi, size=samples)
        ps = radii[:, None] * np.stack([np.cos(th), np.sin(th)], axis=-1)
    us = rng.uniform(-R, R, size=samples)

    if isinstance(spec.hamiltonian, PowerHamiltonian):
        b = np.asarray(spec.hamiltonian.b(xs), dtype=float)
        K1 = float(np.min(b))
        if spec.hamiltonian.shift is None:
            K2 = 0.0
        else:
            K2 = float(max(0.0, np.max(-np.asarray(spec.hamiltonian.shift(xs), dtype=float))))
    else:
        big = radii >= 0.1 * p_max
        if not np.any(big):
            big = radii >= np.median(radii)
        hvals = np.asarray([
            float(spec.hamiltonian(xs[i], ps[i], us[i], dim=spec.dim))
            for i in range(samples)
        ])
        ratio = hvals[big] / radii[big] ** m
        K1 = 0.5 * float(np.min(ratio))
        if K1 <= 1e-10:
            return SuperquadraticBound(False, 0.0, 0.0, m, np.inf,
                                       "no positive K1 fits the declared exponent")
        hall = hvals
        K2 = float(max(0.0, np.max(K1 * radii**m - hall)))
    # verification pass
    worst = -np.inf
    for i in range(samples):
        h = float(spec.hamiltonian(xs[i], ps[i], us[i], dim=spec.dim))
        worst = max(worst, K1 * radii[i] ** m - K2 - h)
    ok = worst <= 1e-9 * max(1.0, K2)
    return SuperquadraticBound(ok, K1, K2, m, worst,
                               "" if ok else "sampled verification failed")


def rewrite_quasilinear(k: float, m: float, c, f, dim: int = 1, domain=None) -> ProblemSpec:
    """Spec for the quasilinear equation multiplied through by 1 + |Du|^k.

    The result has a = Id and H(x, p, u) = (1+|p|^k)(|p|^m + c(x)u - f(x));
    its superquadratic exponent is k + m, so k + m > 2 is required.
    """
    if k <= 0 or m <= 0:
        raise ValueError("need k, m > 0")
    if k + m <= 2.0:
        raise ValueError(f"k + m = {k + m} <= 2: rewrite not superquadratic")
    if domain is None:
        domain = Interval(-1.0, 1.0) if dim == 1 else Ball((0.0, 0.0), 1.0, 2)
    ham = QuasilinearHamiltonian(k=k, m=m, c=make_field(c, dim), f=make_field(f, dim))
    return ProblemSpec(
        dim=dim,
        domain=domain,
        diffusion=Diffusion.isotropic(1.0, dim),
        hamiltonian=ham,
        zeroth=make_field(0.0, dim),
        source=make_field(0.0, dim),
        boundary=StateConstraintBC(),
        superquadratic=True,
        name=f"quasilinear(k={k}, m={m})",
    )


# ---------------------------------------------------------------------------
# growth functions and the admissible class


@dataclass(frozen=True)
class GrowthFunction:
    """Nonnegative growth profile t -> h(t) on [0, inf) with its derivative."""

    fn: Callable
    dfn: Callable
    power: float | None = None
    name: str = "h"

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def deriv(self, t):
        return self.dfn(np.asarray(t, dtype=float))

    @staticmethod
    def power_law(m: float) -> "GrowthFunction":
        return GrowthFunction(
            fn=lambda t: np.asarray(t, dtype=float) ** m,
            dfn=lambda t: m * np.asarray(t, dtype=float) ** (m - 1.0),
            power=m,
            name=f"t^{m:g}",
        )


@dataclass(frozen=True)
class ClassPReport:
    """Outcome of the four admissibility checks for a growth function."""

    convex_ok: bool
    worst_midpoint_gap: float
    ratio_ok: bool
    worst_ratio_drop: float
    integral_iii: TailEstimate
    integral_iv: TailEstimate
    iii_ok: bool
    iv_ok: bool
    t_max: float
    grid_size: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.convex_ok and self.ratio_ok and self.iii_ok and self.iv_ok


def validate_class_p(h: GrowthFunction, t_max: float = 1e6, grid_size: int = 2048,
                     tol: float = 1e-9) -> ClassPReport:
    """Check the four admissibility properties of h on a log-spaced grid.

    (i) convexity by midpoint inequality, (ii) h(t)/t^2 nondecreasing for
    t >= 1 by adjacent pairs, (iii)/(iv) finiteness of the tail integrals of
    t/h and t^2 h'/h^2 by quadrature up to a cutoff plus power-law tail
    extrapolation; divergence shows up as a fitted local decay exponent <= 1.
    Failures are report entries, not exceptions.
    """
    if t_max < 10.0:
        raise ValueError("t_max must be >= 10")
    grid = np.geomspace(1e-3, t_max, grid_size)
    hv = np.asarray(h(grid), dtype=float)
    mids = 0.5 * (grid[:-1] + grid[1:])
    hmid = np.asarray(h(mids), dtype=float)
    scale = np.maximum(np.abs(hv[:-1]) + np.abs(hv[1:]), 1.0)
    midgap = (hmid - 0.5 * (hv[:-1] + hv[1:])) / scale
    worst_mid = float(np.max(midgap))
    convex_ok = worst_mid <= tol

    t1 = grid[grid >= 1.0]
    ratio = np.asarray(h(t1), dtype=float) / t1**2
    drops = np.diff(ratio) / np.maximum(np.abs(ratio[:-1]), 1e-300)
    worst_drop = float(-np.min(drops)) if len(drops) else 0.0
    ratio_ok = worst_drop <= 1e-9

    tab3 = TailTable(lambda s: s / np.asarray(h(s), dtype=float), 1.0, t_max,
                     rtol=1e-9, allow_divergent=True)
    tab4 = TailTable(
        lambda s: s**2 * np.asarray(h.deriv(s), dtype=float)
        / np.asarray(h(s), dtype=float) ** 2,
        1.0, t_max, rtol=1e-9, allow_divergent=True,
    )
    return ClassPReport(
        convex_ok=convex_ok,
        worst_midpoint_gap=worst_mid,
        ratio_ok=ratio_ok,
        worst_ratio_drop=worst_drop,
        integral_iii=tab3.estimate,
        integral_iv=tab4.estimate,
        iii_ok=tab3.estimate.convergent,
        iv_ok=tab4.estimate.convergent,
        t_max=t_max,
        grid_size=grid_size,
        tol=tol,
    )


def tail_integral(h: GrowthFunction, tau: float, tol: float = 1e-9) -> float:
    """int_tau^infty ds / h(s), within relative error tol.

    Strictly decreasing in tau.  Raises DomainError when the integrand is
    singular at tau (h(tau) <= 0).
    """
    if tau <= 0.0:
        raise DomainError("tau must be positive")
    if float(h(tau)) <= 0.0:
        raise DomainError(f"h({tau}) <= 0: integrand singular at tau")
    tab = TailTable(lambda s: 1.0 / np.asarray(h(s), dtype=float),
                    tau, max(10.0 * tau, 100.0), rtol=tol)
    return tab.estimate.value
