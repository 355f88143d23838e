"""Radially symmetric barrier supersolutions on balls.

A barrier w on the ball B_r(0) vanishes at the center, is nonnegative, and
satisfies G(D^2 w, Dw) >= eta > 0 up to the boundary sphere for the
comparison operator

    G(M, p) = -sup_a * sum_i lambda_i^+(M) + K1 * h(|p|) - R ,

with h superquadratic.  Two constructions are provided:

* the power barrier  w1(x) = C1 |x|^alpha + C2 (d^alpha(0) - d^alpha(x))
  for h(t) = t^m, with alpha = (m-2)/(m-1), which scales to radius r as
  r^alpha * w1(x/r);

* the general barrier  w1(x) = C1 chi1(|x|) + C2 (chi2(d(0)) - chi2(d(x)))
  where chi1, chi2 invert the ODEs  h(chi1'(t)) = chi1'(t)/t  and
  chi2'' = -h(chi2'), and the radius-r version r * w1(x/r) needs its
  constants rebuilt for (r K1, r K2).

Here d is the boundary distance 1 - |x| regularized to be smooth across the
origin: d(x) = 1 - phi(|x|) with phi convex, constant on [0, 1/4] and equal
to the identity from 1/2 on.  The plateau makes the distance term vanish
identically near the center, and d^alpha (resp. chi2(d)) gives the infinite
inward normal derivative at the sphere that encodes the state-constraint
boundary condition.

Constants are found by doubling searches (first C2 so the distance-term
contribution is nonnegative where it blows up, then C1 to cover sup_a, R and
the margin) followed by one bisection refinement stage, and every built
barrier is re-certified on a fine radial grid before it is returned.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .problem import DomainError, GrowthFunction
from .quadrature import TailTable

__all__ = [
    "PHI_PLATEAU",
    "phi",
    "phi_prime",
    "phi_second",
    "regularized_distance",
    "BarrierOperator",
    "Barrier",
    "BarrierSearchError",
    "build_power_barrier",
    "build_general_barrier",
    "scale_barrier",
    "verify_supersolution_on_grid",
    "CertificationReport",
    "chi1",
    "chi2",
    "ChiPair",
    "build_chi_pair",
    "subquadratic_counterexample",
    "holder_alpha",
]

# Value of the smoothing profile on its plateau [0, 1/4]; forced to 3/8 by
# the C^2 matching conditions at 1/4 and 1/2 (see phi below).
PHI_PLATEAU = 0.375

SEARCH_CAP = 2.0**60


class BarrierSearchError(RuntimeError):
    """Constant search exceeded its cap; carries the binding inequality."""


def holder_alpha(m: float) -> float:
    """Holder exponent (m-2)/(m-1) of the superquadratic regularity estimate."""
    if m <= 2.0:
        raise ValueError(f"exponent formula needs m > 2, got {m}")
    return (m - 2.0) / (m - 1.0)


# ---------------------------------------------------------------------------
# smoothing profile and regularized distance


def phi(s):
    """Convex C^2 profile: constant 3/8 for s <= 1/4, identity for s >= 1/2.

    The bridge is the quartic whose derivative is the cubic smoothstep, which
    matches value, slope and curvature at both ends; the plateau value 3/8
    is then forced by integrating the slope across the bridge.
    """
    s = np.asarray(s, dtype=float)
    sig = np.clip(4.0 * s - 1.0, 0.0, 1.0)
    bridge = PHI_PLATEAU + 0.25 * (sig**3 - 0.5 * sig**4)
    return np.where(s >= 0.5, s, np.where(s <= 0.25, PHI_PLATEAU, bridge))


def phi_prime(s):
    s = np.asarray(s, dtype=float)
    sig = np.clip(4.0 * s - 1.0, 0.0, 1.0)
    bridge = 3.0 * sig**2 - 2.0 * sig**3
    return np.where(s >= 0.5, 1.0, np.where(s <= 0.25, 0.0, bridge))


def phi_second(s):
    s = np.asarray(s, dtype=float)
    sig = np.clip(4.0 * s - 1.0, 0.0, 1.0)
    bridge = 24.0 * sig * (1.0 - sig)
    return np.where(s >= 0.5, 0.0, np.where(s <= 0.25, 0.0, bridge))


def dist(rho):
    """Regularized boundary distance of the unit ball as a function of |x|."""
    return 1.0 - phi(rho)


D0 = 1.0 - PHI_PLATEAU  # regularized distance at the center


def regularized_distance(x):
    """(d, Dd, D2d) of the regularized unit-ball distance at a point x.

    Exact identity branch d = 1 - |x| for |x| >= 1/2; constant (gradient
    zero) on the plateau |x| <= 1/4.  Raises DomainError outside the closed
    unit ball.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[0]
    rho = float(np.sqrt(np.sum(x * x)))
    if rho > 1.0 + 1e-12:
        raise DomainError(f"|x| = {rho} > 1")
    d = float(dist(rho))
    if rho == 0.0:
        return d, np.zeros(n), np.zeros((n, n))
    xhat = x / rho
    pp = float(phi_prime(rho))
    ps = float(phi_second(rho))
    Dd = -pp * xhat
    outer = np.outer(xhat, xhat)
    D2d = -ps * outer - (pp / rho) * (np.eye(n) - outer)
    return d, Dd, D2d


# ---------------------------------------------------------------------------
# chi functions (general growth)


def _bisect_decreasing(fvals_fn, lo, hi, targets, iters=90):
    """Vectorized log-space bisection of a decreasing function f(tau) = t."""
    lo = np.full_like(targets, np.log(lo), dtype=float)
    hi = np.full_like(targets, np.log(hi), dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fvals_fn(np.exp(mid))
        above = fm > targets
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.exp(0.5 * (lo + hi))


def _inv_h_table(h: GrowthFunction, t_max: float, rtol: float = 1e-10) -> TailTable:
    """Table of F(tau) = int_tau^inf ds/h(s) covering values down from t_max."""
    tau_lo, tau_hi = 0.25, 100.0
    for _ in range(14):
        tab = TailTable(lambda s: 1.0 / np.asarray(h(s), dtype=float),
                        tau_lo, tau_hi, rtol=rtol)
        if tab.at(tab.tau[0]) >= t_max:
            return tab
        tau_lo /= 16.0
    raise ValueError(
        f"no bracket for chi2'(t) at t = {t_max:g}: the tail integral of 1/h "
        f"saturates below it"
    )


def chi2(h: GrowthFunction, t_grid):
    """Tabulated (chi2, chi2') on t_grid in (0, 1].

    chi2'(t) solves int_{chi2'(t)}^inf ds/h(s) = t by bisection (the tail
    integral is strictly decreasing, so the root is unique); chi2 itself
    comes from the convergent normalization chi2(t) = int_{chi2'(t)}^inf
    s/h(s) ds, which pins chi2(0) = 0.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0.0) or np.any(t > 1.0 + 1e-12):
        raise ValueError("t_grid must lie in (0, 1]")
    ftab = _inv_h_table(h, float(np.max(t)))
    dchi = _bisect_decreasing(ftab.at, ftab.tau[0], ftab.tau[-1], t)
    jtab = TailTable(lambda s: s / np.asarray(h(s), dtype=float),
                     float(np.min(dchi)) * 0.999, float(np.max(dchi)) * 1.001,
                     rtol=1e-10)
    return jtab.at(dchi), dchi


def chi1(h: GrowthFunction, t_grid):
    """Tabulated (chi1, chi1') on t_grid in (0, 1].

    chi1'(t) solves tau/h(tau) = t by bisection on the decreasing branch of
    g(tau) = tau/h(tau); chi1 comes from the tail integral of
    tau^2 h'/h^2 - tau/h, which reproduces int_0^t chi1' and pins
    chi1(0) = 0.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0.0) or np.any(t > 1.0 + 1e-12):
        raise ValueError("t_grid must lie in (0, 1]")
    g = lambda tau: tau / np.asarray(h(tau), dtype=float)
    t_max, t_min = float(np.max(t)), float(np.min(t))
    # locate the decreasing branch: scan for the argmax of g
    lo_scan = 1e-6
    for _ in range(10):
        scan = np.geomspace(lo_scan, 1e3, 2400)
        gv = g(scan)
        k = int(np.argmax(gv))
        if gv[k] >= t_max and (k > 0 or gv[0] >= t_max):
            break
        lo_scan *= 1e-3
    else:
        raise ValueError(f"no bracket for chi1'(t) at t = {t_max:g}: max of tau/h(tau) "
                         f"is {gv[k]:.3e}")
    tau_star = scan[k]
    tau_hi = scan[-1]
    while g(np.asarray(tau_hi)) >= t_min:
        tau_hi *= 10.0
        if tau_hi > 1e30:
            raise ValueError(f"no bracket for chi1'(t) at t = {t_min:g}")
    dchi = _bisect_decreasing(g, tau_star, tau_hi, t)
    integrand = lambda s: (
        s**2 * np.asarray(h.deriv(s), dtype=float) / np.asarray(h(s), dtype=float) ** 2
        - s / np.asarray(h(s), dtype=float)
    )
    psi = TailTable(integrand, float(np.min(dchi)) * 0.999,
                    float(np.max(dchi)) * 1.001, rtol=1e-10)
    return psi.at(dchi), dchi


@dataclass(frozen=True)
class ChiPair:
    """Tabulated chi1, chi2 and derivatives with monotone log-log interpolation."""

    h: GrowthFunction
    t: np.ndarray
    chi1: np.ndarray
    dchi1: np.ndarray
    chi2: np.ndarray
    dchi2: np.ndarray

    def __post_init__(self):
        lt = np.log(self.t)
        object.__setattr__(self, "_i_chi1", PchipInterpolator(lt, np.log(self.chi1)))
        object.__setattr__(self, "_i_dchi1", PchipInterpolator(lt, np.log(self.dchi1)))
        object.__setattr__(self, "_i_chi2", PchipInterpolator(lt, np.log(self.chi2)))
        object.__setattr__(self, "_i_dchi2", PchipInterpolator(lt, np.log(self.dchi2)))

    def _eval(self, interp, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] * (1 - 1e-12)) or np.any(t > self.t[-1] * (1 + 1e-12)):
            raise ValueError(f"t outside chi table range [{self.t[0]:g}, {self.t[-1]:g}]")
        return np.exp(interp(np.log(np.clip(t, self.t[0], self.t[-1]))))

    def chi1_at(self, t):
        return self._eval(self._i_chi1, t)

    def chi1p_at(self, t):
        return self._eval(self._i_dchi1, t)

    def chi1pp_at(self, t):
        # differentiate g(chi1') = t:  chi1'' = 1 / g'(chi1')
        tau = self.chi1p_at(t)
        hv = np.asarray(self.h(tau), dtype=float)
        dg = 1.0 / hv - tau * np.asarray(self.h.deriv(tau), dtype=float) / hv**2
        return 1.0 / dg

    def chi2_at(self, t):
        return self._eval(self._i_chi2, t)

    def chi2p_at(self, t):
        return self._eval(self._i_dchi2, t)

    def chi2pp_at(self, t):
        return -np.asarray(self.h(self.chi2p_at(t)), dtype=float)


def build_chi_pair(h: GrowthFunction, t_lo: float = 1e-6, t_hi: float = 1.0,
                   per_decade: int = 512) -> ChiPair:
    """Log-spaced chi tables (default 512 points per decade on [1e-6, 1])."""
    decades = np.log10(t_hi / t_lo)
    n = int(np.ceil(decades * per_decade)) + 1
    t = np.geomspace(t_lo, t_hi, n)
    c1, d1 = chi1(h, t)
    c2, d2 = chi2(h, t)
    return ChiPair(h=h, t=t, chi1=c1, dchi1=d1, chi2=c2, dchi2=d2)


# ---------------------------------------------------------------------------
# barrier profiles


@dataclass(frozen=True)
class BarrierOperator:
    """G(M, p) = -sup_a * sum lambda_i^+(M) + K1 * growth(|p|) - R."""

    dim: int
    sup_a: float
    K1: float
    R: float
    growth: GrowthFunction

    @staticmethod
    def power(dim: int, sup_a: float, K1: float, R: float, m: float) -> "BarrierOperator":
        return BarrierOperator(dim=dim, sup_a=sup_a, K1=K1, R=R,
                               growth=GrowthFunction.power_law(m))

    def radial_value(self, rho, Wp, Wpp):
        """G on a radial profile: eigenvalues are W'' and (dim-1) copies of W'/rho."""
        rho = np.asarray(rho, dtype=float)
        pos = np.maximum(Wpp, 0.0)
        if self.dim > 1:
            pos = pos + (self.dim - 1) * np.maximum(Wp / rho, 0.0)
        return -self.sup_a * pos + self.K1 * np.asarray(self.growth(Wp), dtype=float) - self.R


class _PowerProfile:
    """Unit-ball radial profile of the power barrier."""

    def __init__(self, alpha, C1, C2):
        self.alpha, self.C1, self.C2 = alpha, C1, C2

    def split(self, rho):
        """(W1', W2', W1'', W2'') of the |x|^alpha and distance terms."""
        a, C1, C2 = self.alpha, self.C1, self.C2
        rho = np.asarray(rho, dtype=float)
        d = dist(rho)
        pp, ps = phi_prime(rho), phi_second(rho)
        W1p = a * C1 * rho ** (a - 1.0)
        W1pp = a * (a - 1.0) * C1 * rho ** (a - 2.0)
        with np.errstate(divide="ignore", over="ignore"):
            dpow1 = np.where(pp > 0.0, d ** (a - 1.0), 0.0)
            dpow2 = np.where(pp > 0.0, d ** (a - 2.0), 0.0)
        W2p = a * C2 * dpow1 * pp
        W2pp = a * (1.0 - a) * C2 * dpow2 * pp**2 + a * C2 * dpow1 * ps
        return W1p, W2p, W1pp, W2pp

    def W(self, rho):
        a = self.alpha
        rho = np.asarray(rho, dtype=float)
        return self.C1 * rho**a + self.C2 * (D0**a - dist(rho) ** a)

    def Wp(self, rho):
        W1p, W2p, _, _ = self.split(rho)
        return W1p + W2p

    def Wpp(self, rho):
        _, _, W1pp, W2pp = self.split(rho)
        return W1pp + W2pp

    def boundary_blowup(self):
        return self.C2 > 0.0


class _ChiProfile:
    """Unit-ball radial profile of the general (class-P) barrier."""

    def __init__(self, chi: ChiPair, C1, C2):
        self.chi, self.C1, self.C2 = chi, C1, C2

    def split(self, rho):
        rho = np.asarray(rho, dtype=float)
        c = self.chi
        d = dist(rho)
        pp, ps = phi_prime(rho), phi_second(rho)
        W1p = self.C1 * c.chi1p_at(rho)
        W1pp = self.C1 * c.chi1pp_at(rho)
        mask = pp > 0.0
        dr = np.where(mask, d, c.t[-1])  # dummy argument where the term vanishes
        chi2p = c.chi2p_at(dr)
        hterm = np.asarray(c.h(chi2p), dtype=float)
        W2p = np.where(mask, self.C2 * chi2p * pp, 0.0)
        W2pp = np.where(mask, self.C2 * (hterm * pp**2 + chi2p * ps), 0.0)
        return W1p, W2p, W1pp, W2pp

    def W(self, rho):
        rho = np.asarray(rho, dtype=float)
        c = self.chi
        d = dist(rho)
        term2 = self.C2 * (c.chi2_at(D0) - np.where(d > c.t[0], c.chi2_at(np.maximum(d, c.t[0])), 0.0))
        return self.C1 * c.chi1_at(np.maximum(rho, c.t[0])) * (rho > 0) + term2

    def Wp(self, rho):
        W1p, W2p, _, _ = self.split(rho)
        return W1p + W2p

    def Wpp(self, rho):
        _, _, W1pp, W2pp = self.split(rho)
        return W1pp + W2pp

    def boundary_blowup(self):
        return self.C2 > 0.0


@dataclass(frozen=True)
class Barrier:
    """A certified radial supersolution on the ball of its radius.

    `scale_pow` encodes the homogeneity of the rescaling that produced it:
    w_r(x) = r^scale_pow * W_unit(|x|/r) with scale_pow = alpha in the power
    case and 1 in the general case.
    """

    kind: str  # "power" | "general"
    radius: float
    alpha: float | None
    C1: float
    C2: float
    eta: float
    op: BarrierOperator
    unit_profile: object
    scale_pow: float

    def _scaled(self, rho):
        r = self.radius
        return np.asarray(rho, dtype=float) / r

    def W(self, rho):
        return self.radius**self.scale_pow * self.unit_profile.W(self._scaled(rho))

    def Wp(self, rho):
        return self.radius ** (self.scale_pow - 1.0) * self.unit_profile.Wp(self._scaled(rho))

    def Wpp(self, rho):
        return self.radius ** (self.scale_pow - 2.0) * self.unit_profile.Wpp(self._scaled(rho))

    def w(self, y):
        """Barrier value at points y (last axis = coordinates for dim >= 2)."""
        y = np.asarray(y, dtype=float)
        rho = np.abs(y) if self.op.dim == 1 else np.sqrt(np.sum(y * y, axis=-1))
        return self.W(rho)

    def grad(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        rho = float(np.sqrt(np.sum(y * y)))
        return self.Wp(rho) * (y / rho)

    def hess(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        n = y.shape[0]
        rho = float(np.sqrt(np.sum(y * y)))
        yhat = y / rho
        outer = np.outer(yhat, yhat)
        return self.Wpp(rho) * outer + (self.Wp(rho) / rho) * (np.eye(n) - outer)

    def margin(self, rho):
        """G(D^2 w, Dw) - R margin at radii rho; +inf on the blow-up sphere."""
        rho = np.asarray(rho, dtype=float)
        inner = np.clip(self._scaled(rho), 0.0, 1.0)
        at_sphere = inner >= 1.0 - 1e-15
        if self.unit_profile.boundary_blowup():
            safe = np.where(at_sphere, 0.5, rho)
            vals = self.op.radial_value(safe, self.Wp(safe), self.Wpp(safe))
            return np.where(at_sphere, np.inf, vals)
        return self.op.radial_value(rho, self.Wp(rho), self.Wpp(rho))


# ---------------------------------------------------------------------------
# constant searches


def _build_rho_grid(n_dense: int = 2500):
    """Radii concentrated at both the origin and the boundary sphere."""
    core = np.geomspace(1e-8, 1.0, n_dense)
    edge = 1.0 - np.geomspace(1e-12, 0.999, n_dense)
    rho = np.unique(np.concatenate([core, edge]))
    return rho[(rho > 0.0) & (rho < 1.0)]


def _distance_term_grid():
    """Radii on [1/2, 1) where the distance term must be nonnegative."""
    return 1.0 - np.geomspace(1e-9, 0.5, 1200)


def _distance_term_margin(profile, op):
    """Min over [1/2, 1) of the distance-term-only contribution to G."""
    rho = _distance_term_grid()
    _, W2p, _, W2pp = profile.split(rho)
    pos = np.maximum(W2pp, 0.0)
    if op.dim > 1:
        pos = pos + (op.dim - 1) * np.maximum(W2p / rho, 0.0)
    vals = -op.sup_a * pos + op.K1 * np.asarray(op.growth(W2p), dtype=float)
    k = int(np.argmin(vals))
    return float(vals[k]), float(rho[k])


def _doubling_search(predicate, start=1.0, what="constant"):
    """Smallest power-of-two scale passing `predicate`, then one bisection stage."""
    c = start
    while not predicate(c):
        c *= 2.0
        if c > SEARCH_CAP:
            raise BarrierSearchError(f"{what} search exceeded cap 2^60")
    if c == start:
        return c
    lo, hi = c / 2.0, c
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _certify_dense(make_profile, op, eta, C1, C2, what):
    profile = make_profile(C1, C2)
    rho = _build_rho_grid()
    vals = op.radial_value(rho, profile.Wp(rho), profile.Wpp(rho))
    k = int(np.argmin(vals))
    if vals[k] < eta:
        raise BarrierSearchError(
            f"{what}: refined constants C1={C1:g}, C2={C2:g} fail at rho={rho[k]:.6g} "
            f"with margin {vals[k]:.3e} < eta={eta:g}"
        )
    return profile


def _search_constants(make_profile, op, eta, what):
    """Shared C2-then-C1 doubling search with one bisection refinement each.

    The search targets 1.05 * eta so that the declared margin still holds
    between the nodes of any certification grid finer than the search grid.
    """
    eta_search = 1.05 * eta

    def c2_ok(c2):
        worst, _ = _distance_term_margin(make_profile(1.0, c2), op)
        return worst >= 0.0

    if op.sup_a == 0.0:
        C2 = 1.0
    else:
        try:
            C2 = _doubling_search(c2_ok, 1.0, what=f"{what} C2")
        except BarrierSearchError:
            worst, rho_bad = _distance_term_margin(make_profile(1.0, SEARCH_CAP), op)
            raise BarrierSearchError(
                f"{what}: distance-term margin still {worst:.3e} at rho={rho_bad:.6g} "
                f"with C2 at cap (binding: K1*h(C2*chi2'(d)) vs sup_a curvature terms)"
            )

    rho = _build_rho_grid()

    def c1_ok(c1):
        profile = make_profile(c1, C2)
        vals = op.radial_value(rho, profile.Wp(rho), profile.Wpp(rho))
        return bool(np.min(vals) >= eta_search)

    try:
        C1 = _doubling_search(c1_ok, 1.0, what=f"{what} C1")
    except BarrierSearchError:
        profile = make_profile(SEARCH_CAP, C2)
        vals = op.radial_value(rho, profile.Wp(rho), profile.Wpp(rho))
        k = int(np.argmin(vals))
        raise BarrierSearchError(
            f"{what}: full margin still {vals[k]:.3e} at rho={rho[k]:.6g} with C1 at "
            f"cap (binding: K1*h(|Dw|) vs sup_a positive curvature + R + eta)"
        )
    profile = _certify_dense(make_profile, op, eta, C1, C2, what)
    return C1, C2, profile


def build_power_barrier(m: float, sup_a: float, K1: float, R: float, eta: float,
                        dim: int = 2) -> Barrier:
    """Power barrier C1 |x|^alpha + C2 (d^alpha(0) - d^alpha(x)) on the unit ball.

    alpha = (m-2)/(m-1).  C2 is grown until the distance-term contribution is
    nonnegative on [1/2, 1) (possible because m(alpha-1) = alpha-2 matches the
    blow-up rates), then C1 until the |x|^alpha term dominates sup_a, R and
    the margin eta on a dense radial grid.
    """
    if m <= 2.0:
        raise ValueError(f"power barrier needs m > 2, got {m}")
    if K1 <= 0.0 or sup_a < 0.0 or eta <= 0.0:
        raise ValueError("need K1 > 0, sup_a >= 0, eta > 0")
    alpha = holder_alpha(m)
    op = BarrierOperator.power(dim, sup_a, K1, R, m)
    C1, C2, profile = _search_constants(
        lambda c1, c2: _PowerProfile(alpha, c1, c2), op, eta, what="power barrier"
    )
    return Barrier(kind="power", radius=1.0, alpha=alpha, C1=C1, C2=C2, eta=eta,
                   op=op, unit_profile=profile, scale_pow=alpha)


def build_general_barrier(h: GrowthFunction, lip: float, K1: float, K2: float,
                          eta: float, dim: int = 2,
                          chi: ChiPair | None = None) -> Barrier:
    """General barrier C1 chi1(|x|) + C2 (chi2(d(0)) - chi2(d(x))).

    `lip` scales the positive-curvature part of the comparison operator
    (the Lipschitz scale of the principal part); h must have passed the
    class admissibility checks.  The display's "chi2(0)" is read as
    chi2(d(0)) so that the barrier vanishes at the center and stays
    nonnegative.
    """
    if K1 <= 0.0 or lip < 0.0 or eta <= 0.0:
        raise ValueError("need K1 > 0, lip >= 0, eta > 0")
    if chi is None:
        chi = build_chi_pair(h)
    op = BarrierOperator(dim=dim, sup_a=lip, K1=K1, R=K2, growth=h)
    C1, C2, profile = _search_constants(
        lambda c1, c2: _ChiProfile(chi, c1, c2), op, eta, what="general barrier"
    )
    return Barrier(kind="general", radius=1.0, alpha=None, C1=C1, C2=C2, eta=eta,
                   op=op, unit_profile=profile, scale_pow=1.0)


def scale_barrier(b: Barrier, r: float) -> Barrier:
    """Barrier on B_r from a unit barrier.

    Power case: w_r(x) = r^alpha w_1(x/r) with the same constants (the margin
    even improves, by r^(alpha-2) >= 1).  General case: w_r(x) = r w_1(x/r)
    with constants rebuilt for (r K1, r K2) at margin target r*eta, which
    gives margin eta for w_r against the original operator by the degree-1
    homogeneity of the principal part.
    """
    if not (0.0 < r <= 1.0):
        raise DomainError(f"scale radius must be in (0, 1], got {r}")
    if b.radius != 1.0:
        raise ValueError("scale_barrier expects a unit-radius barrier")
    if r == 1.0:
        return b
    if b.kind == "power":
        return dataclasses.replace(b, radius=r)
    op = b.op
    sub = build_general_barrier(op.growth, op.sup_a, r * op.K1, r * op.R,
                                r * b.eta, dim=op.dim,
                                chi=b.unit_profile.chi)
    return dataclasses.replace(sub, radius=r, eta=b.eta, op=op)


# ---------------------------------------------------------------------------
# grid certification


@dataclass(frozen=True)
class CertificationReport:
    """Margins of a barrier on an annulus grid plus the boundary blow-up proxy."""

    n: int
    delta_excl: float
    radii: np.ndarray
    w_values: np.ndarray
    margins: np.ndarray
    min_margin: float
    argmin_radius: float
    boundary_proxy: float      # one-sided difference of w across the last cell
    proxy_threshold: float | None  # n^(1-alpha) * alpha * C1 / 2 in the power case
    eta: float

    @property
    def passed(self) -> bool:
        return self.min_margin >= self.eta

    def passed_at(self, margin: float) -> bool:
        return self.min_margin >= margin


def verify_supersolution_on_grid(b: Barrier, op: BarrierOperator | None = None,
                                 n: int = 256, delta_excl: float | None = None
                                 ) -> CertificationReport:
    """Evaluate G(D^2 w, Dw) at radii j*r/n on delta_excl <= |x|/r <= 1.

    The annulus excludes the singular origin (delta_excl >= 4/n, in units of
    r); nodes within one cell of the sphere are included, and the margin at
    the sphere itself is +inf whenever the distance term is present (the
    infinite inward normal derivative).  The one-sided difference of w across
    the last cell is reported as the normal-derivative blow-up proxy; under
    refinement it grows like n^(1-alpha).
    """
    op = op if op is not None else b.op
    if delta_excl is None:
        delta_excl = 4.0 / n
    if delta_excl < 4.0 / n:
        raise ValueError(f"delta_excl = {delta_excl} < 4/n = {4.0 / n}")
    r = b.radius
    j0 = int(np.ceil(delta_excl * n))
    radii = np.arange(j0, n + 1, dtype=float) * (r / n)
    inner = radii[:-1]
    vals = op.radial_value(inner, b.Wp(inner), b.Wpp(inner))
    sphere_margin = np.inf if b.unit_profile.boundary_blowup() else float(
        op.radial_value(np.asarray([r]), b.Wp(np.asarray([r])), b.Wpp(np.asarray([r])))[0]
    )
    margins = np.concatenate([vals, [sphere_margin]])
    w_vals = b.W(radii)
    k = int(np.argmin(margins))
    proxy = float((b.W(r) - b.W(r - r / n)) / (r / n))
    thr = None
    if b.kind == "power":
        thr = n ** (1.0 - b.alpha) * b.alpha * b.C1 / 2.0
    return CertificationReport(
        n=n, delta_excl=delta_excl, radii=radii, w_values=w_vals, margins=margins,
        min_margin=float(np.min(margins)), argmin_radius=float(radii[k]),
        boundary_proxy=proxy, proxy_threshold=thr, eta=b.eta,
    )


def export_certificate(report: CertificationReport, barrier: Barrier, path):
    """Flat certificate table (radius, w, margin) plus a summary line."""
    from .tables import write_csv  # local import to avoid a cycle

    write_csv(path, ["radius", "w", "margin"],
              [report.radii, report.w_values, report.margins])
    summary = {
        "kind": barrier.kind,
        "radius": barrier.radius,
        "alpha": barrier.alpha,
        "C1": barrier.C1,
        "C2": barrier.C2,
        "eta": barrier.eta,
        "n": report.n,
        "delta_excl": report.delta_excl,
        "min_margin": report.min_margin,
        "boundary_proxy": report.boundary_proxy,
    }
    return summary


# ---------------------------------------------------------------------------
# the subquadratic obstruction


@dataclass(frozen=True)
class SubquadraticReport:
    """Residual of C|x|^alpha against -Laplace + |D.|^p and the family modulus."""

    N: int
    p: float
    alpha: float
    C: float
    radii: np.ndarray
    residuals: np.ndarray
    max_residual: float
    is_subsolution: bool
    family_modulus_at_half: float  # alpha^-1 * (1/2)^alpha, blows up as alpha -> 0


def subquadratic_counterexample(N: int, p: float, alpha: float, C: float,
                                radii=None) -> SubquadraticReport:
    """Closed-form residual of u = C|x|^alpha for -Laplace(u) + |Du|^p in B_1.

    For N >= 3, 1 <= p <= 2 and C*alpha <= 1 these are subsolutions for every
    small alpha, yet the family alpha^-1 |x|^alpha has no common modulus of
    continuity: superquadratic-style barriers cannot exist in this regime.
    """
    if N < 3:
        raise ValueError(f"need N >= 3, got {N}")
    if not (1.0 <= p <= 2.0):
        raise ValueError(f"need 1 <= p <= 2, got {p}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"need alpha in (0, 1), got {alpha}")
    if C * alpha > 1.0 + 1e-15:
        raise ValueError(f"need C*alpha <= 1, got {C * alpha}")
    if radii is None:
        radii = np.geomspace(1e-3, 1.0, 200)
    radii = np.asarray(radii, dtype=float)
    res = (-C * alpha * (alpha + N - 2.0) * radii ** (alpha - 2.0)
           + (C * alpha) ** p * radii ** ((alpha - 1.0) * p))
    mx = float(np.max(res))
    return SubquadraticReport(
        N=N, p=p, alpha=alpha, C=C, radii=radii, residuals=res, max_residual=mx,
        is_subsolution=mx <= 1e-12,
        family_modulus_at_half=float(0.5**alpha / alpha),
    )
