"""Tail integrals of superquadratically decaying integrands.

Everything here computes integrals of the form

    I(tau) = int_tau^infty phi(s) ds

where phi eventually decays like a power s^(-beta) with beta > 1 (the
integrands that show up are 1/h, s/h and s^2 h'/h^2 for a growth function h
of at-least-quadratic growth).  The recipe is composite Simpson on a
log-spaced grid up to a finite cutoff, plus an analytic power-law tail fitted
from the integrand's local log-slope at the cutoff.  The cutoff is pushed out
until the combined estimate stabilises at the requested relative tolerance,
so for exact power laws the tail term is exact and the total error is the
Simpson error (~1e-11 at the default grid density).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

__all__ = ["TailEstimate", "TailTable", "DivergentIntegralError", "log_grid"]

# Fitted decay exponents closer to 1 than this margin are treated as divergent.
DIVERGENCE_MARGIN = 0.01

# Points used for the local power fit at the cutoff.
_FIT_POINTS = 33


class DivergentIntegralError(ValueError):
    """Raised when a tail integral fails to converge at its cutoff."""


@dataclass(frozen=True)
class TailEstimate:
    """Value of a tail integral together with its extrapolation diagnostics."""

    value: float
    finite_part: float
    tail_part: float
    cutoff: float
    decay_exponent: float  # integrand ~ s^(-decay_exponent) near the cutoff
    convergent: bool


def log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """Log-spaced grid on [lo, hi] with roughly `per_decade` points per decade."""
    if not (0.0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    decades = np.log10(hi / lo)
    n = max(int(np.ceil(decades * per_decade)) + 1, 8)
    return np.geomspace(lo, hi, n)


def _local_decay_exponent(tau: np.ndarray, values: np.ndarray) -> float:
    """Fitted beta with integrand ~ s^-beta over the last _FIT_POINTS samples."""
    k = min(_FIT_POINTS, len(tau))
    t = tau[-k:]
    v = values[-k:]
    if np.any(v <= 0.0):
        # Sign changes near the cutoff: fall back to a crude two-point slope
        # of |values|, which only feeds the convergence heuristic.
        v = np.abs(v) + 1e-300
    slope = np.polyfit(np.log(t), np.log(v), 1)[0]
    return -float(slope)


class TailTable:
    """Tabulated tau -> int_tau^infty phi(s) ds on a log grid.

    Parameters
    ----------
    integrand : callable
        Vectorised phi(s) for s > 0.
    tau_lo, tau_hi : float
        Initial grid range; tau_hi is extended automatically until the
        estimate stabilises (or `allow_divergent` reporting kicks in).
    per_decade : int
        Grid density.
    rtol : float
        Target relative tolerance of the extrapolated value.
    allow_divergent : bool
        If False, a non-convergent tail raises DivergentIntegralError; if
        True the table is still built and `estimate.convergent` is False.
    """

    def __init__(
        self,
        integrand: Callable[[np.ndarray], np.ndarray],
        tau_lo: float,
        tau_hi: float,
        per_decade: int = 512,
        rtol: float = 1e-9,
        allow_divergent: bool = False,
        max_decades: float = 60.0,
    ):
        self.integrand = integrand
        self.rtol = rtol
        tau = log_grid(tau_lo, max(tau_hi, 10.0 * tau_lo), per_decade)
        vals = np.asarray(integrand(tau), dtype=float)
        if vals.shape != tau.shape:
            raise ValueError("integrand must be vectorised over its argument")

        prev_total = None
        while True:
            beta = _local_decay_exponent(tau, vals)
            convergent = beta > 1.0 + DIVERGENCE_MARGIN
            xi = np.log(tau)
            cum = cumulative_simpson(vals * tau, x=xi, initial=0.0)
            finite = float(cum[-1])
            tail = float(tau[-1] * vals[-1] / (beta - 1.0)) if convergent else np.inf
            total = finite + tail
            done_decades = np.log10(tau[-1] / tau[0]) >= max_decades
            if convergent:
                stable = (
                    prev_total is not None
                    and abs(total - prev_total) <= 0.5 * rtol * max(abs(total), 1e-300)
                )
                small_tail = tail <= 0.25 * rtol * max(abs(total), 1e-300)
                if stable or small_tail or done_decades:
                    break
            elif done_decades:
                if not allow_divergent:
                    raise DivergentIntegralError(
                        f"tail integral does not converge: local decay exponent "
                        f"{beta:.4f} <= 1 at cutoff {tau[-1]:.3e}"
                    )
                break
            prev_total = total if convergent else None
            ext = log_grid(tau[-1], tau[-1] * 100.0, per_decade)[1:]
            tau = np.concatenate([tau, ext])
            vals = np.concatenate([vals, np.asarray(integrand(ext), dtype=float)])

        self.tau = tau
        self.values = vals
        self._cum = cum
        self._tail = tail if convergent else 0.0
        self.estimate = TailEstimate(
            value=total if convergent else finite,
            finite_part=finite,
            tail_part=tail if convergent else np.inf,
            cutoff=float(tau[-1]),
            decay_exponent=beta,
            convergent=convergent,
        )
        # I(tau_j) = (full integral) - (cumulative up to tau_j)
        I = (finite + self._tail) - self._cum
        xi = np.log(tau)
        if np.all(I > 0.0) and np.all(np.diff(I) < 0.0):
            # log-log interpolation is exact for power laws
            self._interp = PchipInterpolator(xi, np.log(I), extrapolate=False)
            self._log_interp = True
        else:
            self._interp = PchipInterpolator(xi, I, extrapolate=False)
            self._log_interp = False

    def at(self, tau):
        """I(tau) for tau inside the table range (vectorised)."""
        t = np.asarray(tau, dtype=float)
        if np.any(t < self.tau[0] * (1.0 - 1e-12)) or np.any(t > self.tau[-1] * (1.0 + 1e-12)):
            raise ValueError(
                f"tau outside table range [{self.tau[0]:.3e}, {self.tau[-1]:.3e}]"
            )
        xi = np.log(np.clip(t, self.tau[0], self.tau[-1]))
        out = self._interp(xi)
        if self._log_interp:
            out = np.exp(out)
        return out if out.ndim else float(out)
