"""Uniform tensor grids on centered boxes, and the fields living on them.

A grid covers the box [-extent/2, extent/2) per axis with an even number of
equally spaced nodes.  Periodic grids place nodes at -extent/2 + i*spacing
(the usual transform layout, with a node at the origin); reflecting grids
use cell centers, -extent/2 + (i + 1/2)*spacing, which is the layout the
cosine transforms diagonalize.  Fields are plain arrays tied to a grid and
are treated as immutable: operations hand back new arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "field_from_function",
    "write_field_csv",
]

_BOUNDARIES = ("periodic", "reflecting")


@dataclass(frozen=True)
class Grid:
    """Axis extents, node counts per axis, and the boundary behaviour."""

    extents: tuple[float, ...]
    points: tuple[int, ...]
    boundary: str

    def __post_init__(self):
        if isinstance(self.extents, (int, float)):
            object.__setattr__(self, "extents", (float(self.extents),))
        else:
            object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        if isinstance(self.points, int):
            object.__setattr__(self, "points", (self.points,))
        else:
            object.__setattr__(self, "points", tuple(int(n) for n in self.points))
        if len(self.extents) not in (1, 2):
            raise ValueError("grids are one- or two-dimensional")
        if len(self.points) != len(self.extents):
            raise ValueError("points and extents must have matching length")
        if self.boundary not in _BOUNDARIES:
            raise ValueError(f"boundary must be one of {_BOUNDARIES}, "
                             f"got {self.boundary!r}")
        for e in self.extents:
            if not (e > 0 and np.isfinite(e)):
                raise ValueError(f"extents must be positive, got {e!r}")
        for n in self.points:
            if n < 16:
                raise ValueError(f"need at least 16 nodes per axis, got {n}")
            if n % 2:
                raise ValueError(f"node counts must be even, got {n}")
        spacings = [e / n for e, n in zip(self.extents, self.points)]
        if len(spacings) == 2:
            if abs(spacings[0] - spacings[1]) > 1e-12 * spacings[0]:
                raise ValueError(
                    f"axes must share one spacing, got {spacings[0]!r} "
                    f"and {spacings[1]!r}")

    @property
    def dims(self) -> int:
        return len(self.extents)

    @property
    def spacing(self) -> float:
        return self.extents[0] / self.points[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dims

    @property
    def half_extents(self) -> tuple[float, ...]:
        return tuple(e / 2.0 for e in self.extents)

    def axis(self, i: int) -> np.ndarray:
        """Node coordinates along axis i."""
        n = self.points[i]
        h = self.spacing
        offset = 0.5 * h if self.boundary == "reflecting" else 0.0
        return -self.extents[i] / 2.0 + offset + h * np.arange(n)

    def axes(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinates shaped for broadcasting (sparse mesh)."""
        out = []
        for i in range(self.dims):
            shape = [1] * self.dims
            shape[i] = self.points[i]
            out.append(self.axis(i).reshape(shape))
        return tuple(out)


@dataclass(frozen=True)
class ScalarField:
    """One sample per grid node.  Arrays are read-only by convention."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid "
                             f"shape {self.grid.shape}")
        object.__setattr__(self, "values", vals)

    def extrema(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def mass(self) -> float:
        """Spacing-weighted sum, the discrete integral over the box."""
        return float(self.values.sum()) * self.grid.cell_volume

    def linf(self) -> float:
        return float(np.abs(self.values).max())

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)


@dataclass(frozen=True)
class VectorField:
    """One sample of each component per grid node."""

    grid: Grid
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) != self.grid.dims:
            raise ValueError("one component per axis required")
        for c in comps:
            if c.shape != self.grid.shape:
                raise ValueError(f"component shape {c.shape} does not match "
                                 f"grid shape {self.grid.shape}")
        object.__setattr__(self, "components", comps)

    def linf(self) -> float:
        """Largest pointwise Euclidean norm over the grid."""
        sq = self.components[0] ** 2
        for c in self.components[1:]:
            sq = sq + c ** 2
        return float(np.sqrt(sq.max()))


def field_from_function(grid: Grid, fn) -> ScalarField:
    """Sample fn on the grid nodes.

    fn receives one coordinate array per axis (broadcastable) and must
    return values for every node.  Non-finite samples abort with the
    offending node location in the message.
    """
    vals = np.broadcast_to(np.asarray(fn(*grid.axes()), dtype=float),
                           grid.shape).copy()
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(k) for k in np.argwhere(bad)[0])
        loc = tuple(float(grid.axis(i)[k]) for i, k in enumerate(idx))
        raise ValueError(f"non-finite sample {vals[idx]!r} at node {idx} "
                         f"(x = {loc})")
    return ScalarField(grid, vals)


def write_field_csv(field: ScalarField, path) -> None:
    """Write one row per node: coordinates then value, row-major order.

    Values carry 17 significant digits so a read-back is lossless.
    """
    grid = field.grid
    header = ("x,value" if grid.dims == 1 else "x,y,value")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        if grid.dims == 1:
            x = grid.axis(0)
            for xi, vi in zip(x, field.values):
                fh.write(f"{xi:.17g},{vi:.17g}\n")
        else:
            x, y = grid.axis(0), grid.axis(1)
            for i in range(grid.points[0]):
                for j in range(grid.points[1]):
                    fh.write(f"{x[i]:.17g},{y[j]:.17g},{field.values[i, j]:.17g}\n")
