"""Sampled fields on a grid, and the multi-valued phase record.

Scalar, vector, and complex fields store one sample per grid point
(vector fields one sample per point per axis).  ``PhaseRecord`` represents
a possibly multi-valued phase as a single-valued base field plus one
integer winding per periodic axis; moving once around a periodic axis
adds ``2*pi*winding_scale*winding`` to the phase, so the multi-valued
part never has to live on the grid itself.

Fields serialize to a CSV body (point index, coordinates, value columns)
plus a JSON header describing the grid.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, NonFiniteFieldError
from .grid import Grid


def _check_values(grid: Grid, values: np.ndarray, expected_shape, dtype) -> np.ndarray:
    values = np.asarray(values, dtype=dtype)
    if values.shape != expected_shape:
        raise ValueError(f"values shape {values.shape} does not match grid {expected_shape}")
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteFieldError(f"non-finite value at grid index {tuple(bad)}")
    return values


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.grid, self.values, self.grid.shape, float)
        )

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        return cls(grid, fn(*grid.meshgrid()))


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    values: np.ndarray  # shape (*grid.shape, ndim)

    def __post_init__(self):
        shape = self.grid.shape + (self.grid.ndim,)
        object.__setattr__(self, "values", _check_values(self.grid, self.values, shape, float))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros(grid.shape + (grid.ndim,)))

    @classmethod
    def constant(cls, grid: Grid, components) -> "VectorField":
        vals = np.empty(grid.shape + (grid.ndim,))
        for a, comp in enumerate(components):
            vals[..., a] = comp
        return cls(grid, vals)

    def component(self, axis: int) -> np.ndarray:
        return self.values[..., axis]


@dataclass(frozen=True)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.grid, self.values, self.grid.shape, complex)
        )

    def density(self) -> ScalarField:
        return ScalarField(self.grid, np.abs(self.values) ** 2)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume)


@dataclass(frozen=True)
class PhaseRecord:
    """Phase field with explicit winding bookkeeping.

    ``base`` is the single-valued part (action units).  ``winding`` holds
    one integer per periodic axis of the grid (empty on open grids); a
    full turn along periodic axis a changes the phase by
    ``2*pi*winding_scale*winding[a]``.  ``winding_scale`` defaults to hbar
    so that integer windings are exactly the single-valued wave-function
    sectors; gauge-angle contributions use scale eta*beta instead.
    """

    base: ScalarField
    winding: tuple[int, ...] = ()
    winding_scale: float = 0.0

    def __post_init__(self):
        n_loops = sum(self.base.grid.periodic)
        winding = tuple(int(w) for w in self.winding)
        if len(winding) == 0:
            winding = (0,) * n_loops
        if len(winding) != n_loops:
            raise ValueError(f"need {n_loops} winding integer(s), got {len(winding)}")
        if any(winding) and self.winding_scale == 0.0:
            raise ValueError("non-zero winding requires a winding_scale")
        object.__setattr__(self, "winding", winding)

    @property
    def grid(self) -> Grid:
        return self.base.grid

    def winding_for_axis(self, axis: int) -> int:
        """Winding integer attached to a periodic axis."""
        loops = [a for a in range(self.grid.ndim) if self.grid.periodic[a]]
        return self.winding[loops.index(axis)]

    def ramp_slope(self, axis: int) -> float:
        """Uniform phase gradient contributed by the winding on one axis."""
        if not self.grid.periodic[axis]:
            return 0.0
        w = self.winding_for_axis(axis)
        return 2.0 * math.pi * self.winding_scale * w / self.grid.extent[axis]

    def loop_increment(self, axis: int) -> float:
        """Total phase gained once around a periodic axis."""
        return self.ramp_slope(axis) * self.grid.extent[axis]

    def total_values(self) -> np.ndarray:
        """Base plus ramps evaluated at the grid points (one branch)."""
        total = self.base.values.copy()
        mesh = self.grid.meshgrid()
        for a in range(self.grid.ndim):
            slope = self.ramp_slope(a)
            if slope:
                total = total + slope * mesh[a]
        return total

    def with_base(self, values: np.ndarray) -> "PhaseRecord":
        return replace(self, base=ScalarField(self.grid, values))

    @classmethod
    def constant(cls, grid: Grid, value: float = 0.0, winding=(), winding_scale: float = 0.0):
        return cls(ScalarField.full(grid, value), tuple(winding), winding_scale)


def same_grid(*fields) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f is not None and f.grid != grid:
            raise GridMismatchError("fields live on different grids")
    return grid


# --- serialization -------------------------------------------------------

def _value_columns(field) -> tuple[list[str], np.ndarray]:
    if isinstance(field, ScalarField):
        return ["value"], field.values.reshape(-1, 1)
    if isinstance(field, VectorField):
        ndim = field.grid.ndim
        return [f"v{a}" for a in range(ndim)], field.values.reshape(-1, ndim)
    if isinstance(field, ComplexField):
        flat = field.values.reshape(-1)
        return ["re", "im"], np.column_stack([flat.real, flat.imag])
    raise TypeError(f"cannot serialize {type(field).__name__}")


def field_to_csv(field) -> str:
    """CSV body: point index, coordinates, then the value column(s)."""
    grid = field.grid
    names, cols = _value_columns(field)
    mesh = [m.reshape(-1) for m in grid.meshgrid()]
    lines = ["index," + ",".join(f"x{a}" for a in range(grid.ndim)) + "," + ",".join(names)]
    for i in range(grid.size):
        coords = ",".join(repr(float(m[i])) for m in mesh)
        vals = ",".join(repr(float(v)) for v in cols[i])
        lines.append(f"{i},{coords},{vals}")
    return "\n".join(lines) + "\n"


def field_kind(field) -> str:
    return {"ScalarField": "scalar", "VectorField": "vector", "ComplexField": "complex"}[
        type(field).__name__
    ]


def save_field(field, path: str | Path) -> None:
    """Write ``path`` (CSV) and ``path.with_suffix('.json')`` (grid header)."""
    path = Path(path)
    path.write_text(field_to_csv(field))
    header = field.grid.header()
    header["kind"] = field_kind(field)
    path.with_suffix(".json").write_text(json.dumps(header, sort_keys=True, indent=1) + "\n")


def load_field(path: str | Path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    grid = Grid.from_header(header)
    kind = header["kind"]
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != grid.size:
        raise ValueError(f"expected {grid.size} rows, found {len(rows)}")
    if kind == "scalar":
        flat = np.array([float(r["value"]) for r in rows])
        return ScalarField(grid, flat.reshape(grid.shape))
    if kind == "vector":
        cols = np.array([[float(r[f"v{a}"]) for a in range(grid.ndim)] for r in rows])
        return VectorField(grid, cols.reshape(grid.shape + (grid.ndim,)))
    if kind == "complex":
        flat = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        return ComplexField(grid, flat.reshape(grid.shape))
    raise ValueError(f"unknown field kind {kind!r}")
