"""Uniform configuration-space grids.

A grid is one or two axes of evenly spaced points.  Periodicity is set by
the topology: ``line`` and ``plane`` have open boundaries, ``ring`` and
``torus`` wrap.  On a periodic axis of extent L with n points the spacing
is L/n (the point at L coincides with the point at 0 and is not stored);
on an open axis it is L/(n-1) and the points span [-L/2, L/2].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOPOLOGIES = {
    "line": (False,),
    "ring": (True,),
    "plane": (False, False),
    "torus": (True, True),
}

MIN_POINTS_PER_AXIS = 8


@dataclass(frozen=True)
class Grid:
    topology: str
    npoints: tuple[int, ...]
    extent: tuple[float, ...]
    periodic: tuple[bool, ...] = field(init=False)

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        periodic = TOPOLOGIES[self.topology]
        npoints = tuple(int(n) for n in self.npoints)
        extent = tuple(float(e) for e in self.extent)
        if len(npoints) != len(periodic) or len(extent) != len(periodic):
            raise ValueError(
                f"topology {self.topology!r} needs {len(periodic)} axis "
                f"size(s) and extent(s)"
            )
        if any(n < MIN_POINTS_PER_AXIS for n in npoints):
            raise ValueError(f"need at least {MIN_POINTS_PER_AXIS} points per axis")
        if any(e <= 0 for e in extent):
            raise ValueError("extents must be positive")
        object.__setattr__(self, "npoints", npoints)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "periodic", periodic)

    @property
    def ndim(self) -> int:
        return len(self.npoints)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.npoints

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            e / n if p else e / (n - 1)
            for e, n, p in zip(self.extent, self.npoints, self.periodic)
        )

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.npoints))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Coordinates of the points along one axis."""
        n = self.npoints[axis]
        h = self.spacing[axis]
        if self.periodic[axis]:
            return np.arange(n) * h
        return np.linspace(-self.extent[axis] / 2, self.extent[axis] / 2, n)

    def meshgrid(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.axis_coords(a) for a in range(self.ndim)), indexing="ij")

    def axis_lower(self, axis: int) -> float:
        return 0.0 if self.periodic[axis] else -self.extent[axis] / 2

    def wrap(self, points: np.ndarray) -> np.ndarray:
        """Wrap coordinates into the fundamental domain on periodic axes."""
        points = np.array(points, dtype=float, copy=True)
        for a in range(self.ndim):
            if self.periodic[a]:
                points[..., a] = np.mod(points[..., a], self.extent[a])
        return points

    def header(self) -> dict:
        """JSON-serializable description used next to CSV field dumps."""
        return {
            "topology": self.topology,
            "points": list(self.npoints),
            "extent": list(self.extent),
            "spacing": list(self.spacing),
            "periodic": list(self.periodic),
        }

    @classmethod
    def from_header(cls, header: dict) -> "Grid":
        return cls(
            topology=header["topology"],
            npoints=tuple(header["points"]),
            extent=tuple(header["extent"]),
        )
