"""Uniform grids and node-valued fields for the 1D/2D solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Box, Interval, Torus
from .tables import read_csv, write_csv

__all__ = ["Grid", "DiscreteField"]


@dataclass(frozen=True)
class Grid:
    """Uniform node lattice over an interval, box, or torus.

    Bounded domains place nodes on the boundary (spacing (hi-lo)/(n-1));
    periodic domains drop the duplicate seam node (spacing (hi-lo)/n).
    """

    domain: object
    shape: tuple

    def __post_init__(self):
        if any(n < 8 for n in self.shape):
            raise ValueError(f"need >= 8 nodes per axis, got {self.shape}")

    @staticmethod
    def for_domain(domain, n) -> "Grid":
        if isinstance(domain, Interval):
            return Grid(domain, (int(n),))
        if isinstance(domain, (Box, Torus)):
            dim = domain.dim
            if isinstance(n, int):
                shape = (n,) * dim
            else:
                shape = tuple(int(v) for v in n)
            return Grid(domain, shape)
        raise TypeError(f"no lattice construction for {type(domain).__name__}")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def periodic(self) -> bool:
        return getattr(self.domain, "periodic", False)

    def _bounds(self, k):
        if isinstance(self.domain, Interval):
            return self.domain.lo, self.domain.hi
        return self.domain.lo[k], self.domain.hi[k]

    def dx(self, k: int = 0) -> float:
        lo, hi = self._bounds(k)
        n = self.shape[k]
        return (hi - lo) / (n if self.periodic else n - 1)

    def axis_coords(self, k: int = 0) -> np.ndarray:
        lo, _ = self._bounds(k)
        return lo + self.dx(k) * np.arange(self.shape[k])

    def points(self) -> np.ndarray:
        """Node coordinates: (n,) in 1D, (nx, ny, 2) stacked meshgrid in 2D."""
        if self.dim == 1:
            return self.axis_coords(0)
        X, Y = np.meshgrid(self.axis_coords(0), self.axis_coords(1), indexing="ij")
        return np.stack([X, Y], axis=-1)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        if self.periodic:
            return mask
        if self.dim == 1:
            mask[0] = mask[-1] = True
        else:
            mask[0, :] = mask[-1, :] = True
            mask[:, 0] = mask[:, -1] = True
        return mask

    def boundary_distance(self) -> np.ndarray:
        return np.asarray(self.domain.boundary_distance(self.points()), dtype=float)

    def point_at(self, idx):
        pts = self.points()
        return pts[idx] if self.dim > 1 else float(pts[idx])


@dataclass
class DiscreteField:
    """One real value per grid node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @staticmethod
    def zeros(grid: Grid) -> "DiscreteField":
        return DiscreteField(grid, np.zeros(grid.shape))

    @staticmethod
    def from_function(grid: Grid, fn) -> "DiscreteField":
        return DiscreteField(grid, np.asarray(fn(grid.points()), dtype=float))

    def copy(self) -> "DiscreteField":
        return DiscreteField(self.grid, self.values.copy())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def shifted(self, delta: float) -> "DiscreteField":
        return DiscreteField(self.grid, self.values + delta)

    def anchored(self, idx) -> "DiscreteField":
        """Normalized copy with value 0 at the anchor node index."""
        return DiscreteField(self.grid, self.values - self.values[idx])

    def save(self, path) -> None:
        pts = self.grid.points()
        if self.grid.dim == 1:
            write_csv(path, ["x", "value"], [pts, self.values])
        else:
            write_csv(path, ["x", "y", "value"],
                      [pts[..., 0].ravel(), pts[..., 1].ravel(), self.values.ravel()])

    @staticmethod
    def load(path, grid: Grid) -> "DiscreteField":
        _, cols = read_csv(path)
        return DiscreteField(grid, cols[-1].reshape(grid.shape))
