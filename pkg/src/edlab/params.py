"""Physical constants and Lagrange multipliers for a model run."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """Constants of the statistical model.

    ``eta`` sets the action scale of the transition kernel, ``xi`` the
    strength of the quantum (Fisher) potential; Planck's constant is the
    derived quantity hbar = sqrt(8 xi), so hbar**2 == 8 xi holds exactly.
    ``masses`` and ``betas`` carry one entry per particle; ``betas`` are the
    dimensionless gauge-coupling multipliers.  ``c`` converts multipliers to
    charges, ``dt`` is the kernel time step.
    """

    eta: float = 1.0
    xi: float = 0.125
    masses: tuple[float, ...] = (1.0,)
    betas: tuple[float, ...] = (0.0,)
    c: float = 1.0
    dt: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.xi < 0:
            raise ValueError("xi must be non-negative")
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if len(self.betas) != len(self.masses):
            raise ValueError("need one beta per particle")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def hbar(self) -> float:
        return math.sqrt(8.0 * self.xi)

    @property
    def n_particles(self) -> int:
        return len(self.masses)

    def axis_particles(self, ndim: int) -> tuple[int, ...]:
        """Map grid axes to particle indices.

        One particle owns every axis; with as many particles as axes,
        axis i belongs to particle i (two particles on a line).  Other
        combinations are ambiguous and rejected.
        """
        if self.n_particles == 1:
            return (0,) * ndim
        if self.n_particles == ndim:
            return tuple(range(ndim))
        raise ValueError(
            f"cannot assign {ndim} grid axes to {self.n_particles} particles"
        )

    def masses_per_axis(self, ndim: int) -> tuple[float, ...]:
        return tuple(self.masses[p] for p in self.axis_particles(ndim))

    def betas_per_axis(self, ndim: int) -> tuple[float, ...]:
        return tuple(self.betas[p] for p in self.axis_particles(ndim))

    def particle_axes(self, n: int, ndim: int) -> tuple[int, ...]:
        return tuple(a for a, p in enumerate(self.axis_particles(ndim)) if p == n)

    def with_dt(self, dt: float) -> "ModelParams":
        return replace(self, dt=dt)

    @staticmethod
    def xi_for_hbar(hbar: float) -> float:
        return hbar * hbar / 8.0
