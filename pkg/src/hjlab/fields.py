"""Registry of named coefficient fields.

Problem coefficients (diffusion entries, Hamiltonian prefactor, zeroth-order
coefficient, source, boundary data) are drawn from a small set of named,
parameter-driven families so that experiment configs stay declarative and
round-trip through serialization.  A field is evaluated on points arrays:
plain float arrays in 1D, arrays whose last axis is the coordinate axis in
2D.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

__all__ = ["Field", "make_field", "Diffusion", "FAMILIES"]


def _coord(x: np.ndarray, axis: int, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return x
    return x[..., axis]


@dataclass(frozen=True)
class Field:
    """A named coefficient field: `family` selects the formula, `params` fill it.

    Families
    --------
    constant : value
    affine   : c0, grad (sequence, one slope per axis)
    trig     : offset, amp, freq (per axis), phase (per axis), combine
               offset + amp * prod_k sin(2*pi*freq_k*x_k + phase_k)  (combine="product")
               offset + amp * sum_k  sin(2*pi*freq_k*x_k + phase_k)  (combine="sum")
               Axes with freq_k == 0 are skipped.
    piecewise: breaks, values (1D step function, left-closed intervals)
    """

    family: str
    params: dict = dc_field(default_factory=dict)
    dim: int = 1

    def __call__(self, x) -> np.ndarray:
        p = self.params
        if self.family == "constant":
            x = np.asarray(x, dtype=float)
            base = x if self.dim == 1 else x[..., 0]
            return np.full_like(base, float(p["value"]), dtype=float)
        if self.family == "affine":
            grad = np.atleast_1d(np.asarray(p["grad"], dtype=float))
            out = np.full_like(_coord(x, 0, self.dim), float(p["c0"]), dtype=float)
            for k in range(self.dim):
                out = out + grad[k] * _coord(x, k, self.dim)
            return out
        if self.family == "trig":
            freq = np.atleast_1d(np.asarray(p["freq"], dtype=float))
            phase = np.atleast_1d(np.asarray(p.get("phase", np.zeros_like(freq)), dtype=float))
            combine = p.get("combine", "product")
            terms = []
            for k in range(self.dim):
                if freq[k] == 0.0:
                    continue
                xk = _coord(x, k, self.dim)
                terms.append(np.sin(2.0 * np.pi * freq[k] * xk + phase[k]))
            if not terms:
                osc = np.zeros_like(_coord(x, 0, self.dim))
            elif combine == "product":
                osc = terms[0]
                for t in terms[1:]:
                    osc = osc * t
            elif combine == "sum":
                osc = sum(terms)
            else:
                raise ValueError(f"unknown trig combine rule {combine!r}")
            return float(p.get("offset", 0.0)) + float(p["amp"]) * osc
        if self.family == "piecewise":
            if self.dim != 1:
                raise ValueError("piecewise fields are 1D only")
            breaks = np.asarray(p["breaks"], dtype=float)
            values = np.asarray(p["values"], dtype=float)
            if len(values) != len(breaks) + 1:
                raise ValueError("piecewise needs len(values) == len(breaks) + 1")
            idx = np.searchsorted(breaks, np.asarray(x, dtype=float), side="right")
            return values[idx]
        raise ValueError(f"unknown field family {self.family!r}")

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "dim": self.dim}

    def shifted(self, delta: float) -> "Field":
        """The same field plus a constant (used by shift-covariance sweeps)."""
        if self.family == "constant":
            return Field("constant", {"value": self.params["value"] + delta}, self.dim)
        if self.family == "affine":
            q = dict(self.params)
            q["c0"] = q["c0"] + delta
            return Field("affine", q, self.dim)
        if self.family == "trig":
            q = dict(self.params)
            q["offset"] = q.get("offset", 0.0) + delta
            return Field("trig", q, self.dim)
        if self.family == "piecewise":
            q = dict(self.params)
            q["values"] = [v + delta for v in q["values"]]
            return Field("piecewise", q, self.dim)
        raise ValueError(f"cannot shift family {self.family!r}")


FAMILIES = ("constant", "affine", "trig", "piecewise")


def make_field(desc, dim: int = 1) -> Field:
    """Build a Field from a number (constant shorthand) or a {family, params} dict."""
    if isinstance(desc, Field):
        return desc
    if isinstance(desc, (int, float)):
        return Field("constant", {"value": float(desc)}, dim)
    if isinstance(desc, dict):
        family = desc.get("family")
        if family not in FAMILIES:
            raise ValueError(f"unknown field family {family!r} (choose from {FAMILIES})")
        params = desc.get("params", {k: v for k, v in desc.items() if k != "family"})
        return Field(family, dict(params), dim)
    raise TypeError(f"cannot build a field from {desc!r}")


def constant(value: float, dim: int = 1) -> Field:
    return Field("constant", {"value": float(value)}, dim)


@dataclass(frozen=True)
class Diffusion:
    """Symmetric diffusion matrix a(x) with field-valued entries.

    1D stores a11 only; 2D stores a11, a22 and the off-diagonal a12 (which
    must satisfy the monotone-stencil dominance condition checked at solver
    assembly).
    """

    a11: Field
    a22: Field | None = None
    a12: Field | None = None

    @staticmethod
    def isotropic(value, dim: int = 1) -> "Diffusion":
        f = make_field(value, dim)
        return Diffusion(a11=f, a22=f if dim == 2 else None)

    @staticmethod
    def zero(dim: int = 1) -> "Diffusion":
        return Diffusion.isotropic(0.0, dim)

    def matrix(self, x, dim: int) -> np.ndarray:
        """a(x) as an (..., N, N) array."""
        if dim == 1:
            a = np.asarray(self.a11(x), dtype=float)
            return a[..., None, None]
        a11 = np.asarray(self.a11(x), dtype=float)
        a22 = np.asarray(self.a22(x), dtype=float) if self.a22 is not None else np.zeros_like(a11)
        a12 = np.asarray(self.a12(x), dtype=float) if self.a12 is not None else np.zeros_like(a11)
        out = np.zeros(a11.shape + (2, 2))
        out[..., 0, 0] = a11
        out[..., 1, 1] = a22
        out[..., 0, 1] = a12
        out[..., 1, 0] = a12
        return out

    def entries(self, x, dim: int):
        """(a11, a22, a12) arrays; a22/a12 are zeros in 1D."""
        a11 = np.asarray(self.a11(x if dim == 1 else x), dtype=float)
        if dim == 1:
            z = np.zeros_like(a11)
            return a11, z, z
        a22 = np.asarray(self.a22(x), dtype=float) if self.a22 is not None else np.zeros_like(a11)
        a12 = np.asarray(self.a12(x), dtype=float) if self.a12 is not None else np.zeros_like(a11)
        return a11, a22, a12

    def to_dict(self) -> dict:
        d = {"a11": self.a11.to_dict()}
        if self.a22 is not None:
            d["a22"] = self.a22.to_dict()
        if self.a12 is not None:
            d["a12"] = self.a12.to_dict()
        return d
