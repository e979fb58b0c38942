"""Coupled density/phase field equations and the conserved functional.

The pair (rho, Phi) evolves under Hamilton's equations for the ensemble
functional

    H = integral[ rho/2 * m^{-1} (dPhi - Abar)^2  +  rho V
                  + hbar^2/(8 rho) * m^{-1} (drho)^2 ]

whose Phi-derivative is the continuity (Fokker-Planck) equation and whose
rho-derivative is the quantum Hamilton-Jacobi equation.  Abar_a is
eta*beta_a*A_a.  Time stepping is classical RK4; winding integers are
topological and never change during a step.

The quantum term of the HJ equation, (hbar^2/2m) (d^2 sqrt(rho))/sqrt(rho),
is evaluated through g = ln(sqrt(rho)) as (hbar^2/2m)(g'' + g'^2): the two
are identical in exact arithmetic, but the log form is exact for Gaussian
profiles under second-order stencils, which keeps exponential tails from
poisoning long conservation runs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import FloorRegularizationWarning, NormalizationWarning, StabilityError
from .fields import PhaseRecord, ScalarField, VectorField, same_grid
from .grid import Grid
from .kernel import GaugeInput
from .ops import diff_axis, divergence, integrate, second_diff_axis
from .params import ModelParams

DENSITY_FLOOR_FRACTION = 1e-12
# Explicit RK4 bound: the stiffest linearized mode obeys |lambda| dt <= 2.8
# at lambda ~ 0.77 hbar/(m h^2); STABILITY_COEFF keeps a 7x margin for
# nonlinear terms, giving dt <= STABILITY_COEFF * h^2 * m_min / hbar.
STABILITY_COEFF = 0.5
NORM_GROWTH_ABORT = 10.0


def stability_limit(grid: Grid, params: ModelParams) -> float:
    """Largest dt accepted by step_coupled for this grid and hbar."""
    if params.hbar == 0.0:
        return float("inf")
    h = min(grid.spacing)
    m = min(params.masses)
    return STABILITY_COEFF * h * h * m / params.hbar


@dataclass(frozen=True)
class HamiltonianBreakdown:
    kinetic: float
    potential: float
    quantum: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.quantum


def phase_gradient(Phi: PhaseRecord) -> VectorField:
    """Gradient of the full phase: base gradient plus winding ramps."""
    grid = Phi.grid
    out = np.empty(grid.shape + (grid.ndim,))
    for a in range(grid.ndim):
        out[..., a] = diff_axis(Phi.base.values, grid.spacing[a], grid.periodic[a], a)
        slope = Phi.ramp_slope(a)
        if slope:
            out[..., a] += slope
    return VectorField(grid, out)


def gauge_momentum_shift(grid: Grid, gauge: GaugeInput | None, params: ModelParams) -> np.ndarray:
    """Abar_a = eta * beta_a * A_a sampled on the grid (zero without gauge)."""
    if gauge is None or gauge.A is None:
        return np.zeros(grid.shape + (grid.ndim,))
    betas = params.betas_per_axis(grid.ndim)
    out = np.empty(grid.shape + (grid.ndim,))
    for a in range(grid.ndim):
        out[..., a] = params.eta * betas[a] * gauge.A.values[..., a]
    return out


def current_velocity(
    rho: ScalarField, Phi: PhaseRecord, gauge: GaugeInput | None, params: ModelParams
) -> VectorField:
    """Gauge-invariant probability-flow velocity v_a = (dPhi_a - Abar_a)/m_a."""
    grid = same_grid(rho, Phi.base)
    dphi = phase_gradient(Phi).values
    abar = gauge_momentum_shift(grid, gauge, params)
    masses = params.masses_per_axis(grid.ndim)
    out = np.empty_like(dphi)
    for a in range(grid.ndim):
        out[..., a] = (dphi[..., a] - abar[..., a]) / masses[a]
    return VectorField(grid, out)


def fokker_planck_rhs(
    rho: ScalarField, Phi: PhaseRecord, gauge: GaugeInput | None, params: ModelParams
) -> ScalarField:
    """Continuity equation right-hand side: -div(rho * v)."""
    v = current_velocity(rho, Phi, gauge, params)
    flux = VectorField(rho.grid, rho.values[..., None] * v.values)
    return ScalarField(rho.grid, -divergence(flux).values)


def _log_sqrt_density(rho_values: np.ndarray) -> np.ndarray:
    floor = DENSITY_FLOOR_FRACTION * float(rho_values.max())
    if np.any(rho_values < floor):
        warnings.warn(
            "density below regularization floor; quantum potential clamped there",
            FloorRegularizationWarning,
            stacklevel=3,
        )
    return 0.5 * np.log(np.maximum(rho_values, floor))


def quantum_potential(rho: ScalarField, params: ModelParams) -> ScalarField:
    """The term (hbar^2/2m) (d^2 sqrt(rho))/sqrt(rho) added to dPhi/dt.

    Vanishes identically when xi = 0 (hbar = 0).
    """
    grid = rho.grid
    hbar2 = params.hbar**2
    if hbar2 == 0.0:
        return ScalarField.full(grid, 0.0)
    g = _log_sqrt_density(rho.values)
    masses = params.masses_per_axis(grid.ndim)
    out = np.zeros(grid.shape)
    for a in range(grid.ndim):
        h, per = grid.spacing[a], grid.periodic[a]
        dg = diff_axis(g, h, per, a)
        out += (second_diff_axis(g, h, per, a) + dg * dg) / masses[a]
    return ScalarField(grid, (hbar2 / 2.0) * out)


def hamilton_jacobi_rhs(
    rho: ScalarField,
    Phi: PhaseRecord,
    gauge: GaugeInput | None,
    V: ScalarField,
    params: ModelParams,
) -> ScalarField:
    """dPhi/dt = -(1/2m)(dPhi - Abar)^2 - V + quantum term."""
    grid = same_grid(rho, Phi.base, V)
    dphi = phase_gradient(Phi).values
    abar = gauge_momentum_shift(grid, gauge, params)
    masses = params.masses_per_axis(grid.ndim)
    kin = np.zeros(grid.shape)
    for a in range(grid.ndim):
        w = dphi[..., a] - abar[..., a]
        kin += w * w / (2.0 * masses[a])
    q = quantum_potential(rho, params).values
    return ScalarField(grid, -kin - V.values + q)


def ensemble_hamiltonian(
    rho: ScalarField,
    Phi: PhaseRecord,
    gauge: GaugeInput | None,
    V: ScalarField,
    params: ModelParams,
) -> HamiltonianBreakdown:
    """Kinetic, potential, and quantum (Fisher) integrals of the functional."""
    grid = same_grid(rho, Phi.base, V)
    total_mass = integrate(rho)
    if abs(total_mass - 1.0) > 1e-6:
        warnings.warn(
            f"density integrates to {total_mass:.2e}; Hamiltonian still computed",
            NormalizationWarning,
            stacklevel=2,
        )
    dphi = phase_gradient(Phi).values
    abar = gauge_momentum_shift(grid, gauge, params)
    masses = params.masses_per_axis(grid.ndim)
    kin = np.zeros(grid.shape)
    fisher = np.zeros(grid.shape)
    hbar2 = params.hbar**2
    floor = DENSITY_FLOOR_FRACTION * float(rho.values.max())
    safe_rho = np.maximum(rho.values, floor)
    for a in range(grid.ndim):
        w = dphi[..., a] - abar[..., a]
        kin += 0.5 * rho.values * w * w / masses[a]
        if hbar2:
            drho = diff_axis(rho.values, grid.spacing[a], grid.periodic[a], a)
            fisher += (hbar2 / 8.0) * drho * drho / (safe_rho * masses[a])
    return HamiltonianBreakdown(
        kinetic=integrate(kin, grid),
        potential=integrate(rho.values * V.values, grid),
        quantum=integrate(fisher, grid) if hbar2 else 0.0,
    )


def step_coupled(
    rho: ScalarField,
    Phi: PhaseRecord,
    gauge: GaugeInput | None,
    V: ScalarField,
    params: ModelParams,
    dt: float | None = None,
) -> tuple[ScalarField, PhaseRecord]:
    """One explicit RK4 step of the coupled (rho, Phi) system.

    Requires dt <= stability_limit(grid, params); aborts if the density
    norm grows more than tenfold in a single step.
    """
    grid = same_grid(rho, Phi.base, V)
    dt = params.dt if dt is None else dt
    limit = stability_limit(grid, params)
    if dt > limit:
        raise StabilityError(
            f"dt={dt:.3e} exceeds stability bound {limit:.3e} "
            f"(= {STABILITY_COEFF} * h^2 * m_min / hbar)"
        )

    def rates(rv: np.ndarray, pv: np.ndarray):
        r = ScalarField(grid, rv)
        p = Phi.with_base(pv)
        fr = fokker_planck_rhs(r, p, gauge, params).values
        fp = hamilton_jacobi_rhs(r, p, gauge, V, params).values
        return fr, fp

    r0, p0 = rho.values, Phi.base.values
    k1r, k1p = rates(r0, p0)
    k2r, k2p = rates(r0 + 0.5 * dt * k1r, p0 + 0.5 * dt * k1p)
    k3r, k3p = rates(r0 + 0.5 * dt * k2r, p0 + 0.5 * dt * k2p)
    k4r, k4p = rates(r0 + dt * k3r, p0 + dt * k3p)
    r1 = r0 + (dt / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
    p1 = p0 + (dt / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)

    if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(p1))):
        raise StabilityError("non-finite field values after one step")
    growth = np.abs(r1).max() / max(np.abs(r0).max(), 1e-300)
    if growth > NORM_GROWTH_ABORT:
        raise StabilityError(f"density norm grew {growth:.1f}x in one step; aborting")
    return ScalarField(grid, r1), Phi.with_base(p1)
