"""Walker ensembles: sampling, evolution, and density estimation.

Walkers are passive tracers of a prescribed (rho, Phi) field history;
they never feed back into the fields.  Their drift is the current
velocity plus the osmotic correction (eta/2m) * grad(rho)/rho, which is
exactly the combination that makes the walker density obey the same
continuity equation as the field rho.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatchError, NonFiniteFieldError
from .fields import ScalarField, VectorField, PhaseRecord, same_grid
from .grid import Grid
from .kernel import GaugeInput, STREAM_INIT, STREAM_WALK, fluctuation_variances, stream
from .ops import integrate, interpolate
from .params import ModelParams

DENSITY_FLOOR_FRACTION = 1e-12
NORMALIZATION_TOL = 1e-6
MIN_STATISTICAL_WALKERS = 1000


@dataclass(frozen=True)
class EnsembleState:
    positions: np.ndarray      # (n_walkers, ndim)
    time: float
    seed: int
    step: int = 0

    @property
    def n_walkers(self) -> int:
        return self.positions.shape[0]


@dataclass
class EvolveStats:
    clamped: int = 0


def init_ensemble(rho0: ScalarField, n_walkers: int, seed: int) -> EnsembleState:
    """Draw i.i.d. walker positions from a normalized density.

    1D grids use inverse-CDF sampling of the piecewise-constant cell
    density; 2D grids use rejection sampling against the cell maximum.
    """
    grid = rho0.grid
    if np.any(rho0.values < 0):
        raise ValueError("density must be non-negative")
    total = integrate(rho0)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"density integrates to {total}, expected 1 within {NORMALIZATION_TOL}")
    rng = stream(seed, STREAM_INIT)
    if grid.ndim == 1:
        positions = _sample_inverse_cdf(grid, rho0.values, n_walkers, rng)[:, None]
    else:
        positions = _sample_rejection(grid, rho0.values, n_walkers, rng)
    return EnsembleState(positions=positions, time=0.0, seed=seed, step=0)


def _cell_edges(grid: Grid, axis: int) -> tuple[float, float]:
    # cells are centered on the nodes; the domain for walkers is the cell union
    h = grid.spacing[axis]
    lo = grid.axis_lower(axis) - (0.0 if grid.periodic[axis] else 0.0)
    return lo, h


def _sample_inverse_cdf(grid: Grid, values: np.ndarray, n: int, rng) -> np.ndarray:
    h = grid.spacing[0]
    mass = values * h
    cdf = np.cumsum(mass)
    cdf /= cdf[-1]
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="left")
    lower = np.where(idx > 0, cdf[idx - 1], 0.0)
    gap = np.maximum(cdf[idx] - lower, 1e-300)
    frac = (u - lower) / gap
    x = grid.axis_coords(0)[idx] - h / 2 + frac * h
    if grid.periodic[0]:
        x = np.mod(x, grid.extent[0])
    return x


def _sample_rejection(grid: Grid, values: np.ndarray, n: int, rng) -> np.ndarray:
    vmax = values.max()
    if vmax <= 0:
        raise ValueError("density is identically zero")
    out = np.empty((n, grid.ndim))
    filled = 0
    lows = [grid.axis_lower(a) - (0 if grid.periodic[a] else grid.spacing[a] / 2) for a in range(grid.ndim)]
    spans = [grid.extent[a] + (0 if grid.periodic[a] else grid.spacing[a]) for a in range(grid.ndim)]
    while filled < n:
        batch = max(2 * (n - filled), 1024)
        cand = np.column_stack(
            [lows[a] + spans[a] * rng.random(batch) for a in range(grid.ndim)]
        )
        dens = values[_cell_index(grid, cand)]
        accept = rng.random(batch) * vmax < dens
        got = cand[accept]
        take = min(len(got), n - filled)
        out[filled : filled + take] = got[:take]
        filled += take
    for a in range(grid.ndim):
        if grid.periodic[a]:
            out[:, a] = np.mod(out[:, a], grid.extent[a])
    return out


def _cell_index(grid: Grid, points: np.ndarray):
    idx = []
    for a in range(grid.ndim):
        h = grid.spacing[a]
        t = (points[:, a] - grid.axis_lower(a)) / h
        i = np.round(t).astype(int)
        if grid.periodic[a]:
            i %= grid.npoints[a]
        else:
            i = np.clip(i, 0, grid.npoints[a] - 1)
        idx.append(i)
    return tuple(idx)


def drift_from_fields(
    rho: ScalarField,
    Phi: PhaseRecord,
    gauge: GaugeInput | None,
    params: ModelParams,
) -> VectorField:
    """Walker drift b = v + (eta/2m) grad(rho)/rho on the grid.

    The first term is the gauge-invariant current velocity, the second
    the osmotic correction.  Cells with rho below the floor contribute
    zero osmotic drift.
    """
    from .hamiltonian import current_velocity  # shared definition of v

    grid = same_grid(rho, Phi.base)
    v = current_velocity(rho, Phi, gauge, params).values
    masses = params.masses_per_axis(grid.ndim)
    floor = DENSITY_FLOOR_FRACTION * float(rho.values.max())
    safe = rho.values >= floor
    out = v.copy()
    from .ops import diff_axis

    for a in range(grid.ndim):
        drho = diff_axis(rho.values, grid.spacing[a], grid.periodic[a], a)
        osm = np.where(safe, (params.eta / (2 * masses[a])) * drho / np.where(safe, rho.values, 1.0), 0.0)
        out[..., a] += osm
    return VectorField(grid, out)


def evolve_ensemble(
    state: EnsembleState,
    drifts: VectorField | Callable[[int, float], VectorField],
    params: ModelParams,
    n_steps: int,
    grid: Grid | None = None,
) -> tuple[EnsembleState, EvolveStats]:
    """Advance every walker ``n_steps`` kernel steps.

    ``drifts`` is either a fixed drift field or a callable giving the
    field at (step_index, time); field snapshots are supplied externally
    so walkers never feed back.  Walkers leaving an open boundary are
    clamped to the domain edge and counted.
    """
    if callable(drifts):
        first = drifts(state.step, state.time)
    else:
        first = drifts
    grid = grid or first.grid
    pos = state.positions.copy()
    stats = EvolveStats()
    sigma = np.sqrt(fluctuation_variances(params, grid.ndim))
    for k in range(n_steps):
        step_index = state.step + k
        t = state.time + k * params.dt
        dfield = drifts(step_index, t) if callable(drifts) else drifts
        if dfield.grid != grid:
            raise GridMismatchError("drift field grid changed during evolution")
        b = interpolate(grid, dfield.values, pos)
        rng = stream(state.seed, STREAM_WALK, step_index)
        pos = pos + b * params.dt + rng.standard_normal(pos.shape) * sigma
        for a in range(grid.ndim):
            if grid.periodic[a]:
                pos[:, a] = np.mod(pos[:, a], grid.extent[a])
            else:
                lo = grid.axis_lower(a) - grid.spacing[a] / 2
                hi = lo + grid.extent[a] + grid.spacing[a]
                below = pos[:, a] < lo
                above = pos[:, a] > hi
                stats.clamped += int(below.sum() + above.sum())
                pos[:, a] = np.clip(pos[:, a], lo, hi)
    new = EnsembleState(
        positions=pos,
        time=state.time + n_steps * params.dt,
        seed=state.seed,
        step=state.step + n_steps,
    )
    return new, stats


def estimate_density(state: EnsembleState, grid: Grid) -> ScalarField:
    """Normalized histogram of walker positions on the grid cells."""
    if state.n_walkers < MIN_STATISTICAL_WALKERS:
        raise ValueError(f"need at least {MIN_STATISTICAL_WALKERS} walkers for density estimates")
    idx = _cell_index(grid, state.positions)
    flat = np.ravel_multi_index(idx, grid.shape)
    counts = np.bincount(flat, minlength=grid.size).reshape(grid.shape)
    return ScalarField(grid, counts / (state.n_walkers * grid.cell_volume))


@dataclass(frozen=True)
class DensityDistance:
    l1: float
    linf: float


def compare_densities(r1: ScalarField, r2: ScalarField) -> DensityDistance:
    """L1 and Linf distances between two densities on one grid."""
    same_grid(r1, r2)
    diff = np.abs(r1.values - r2.values)
    return DensityDistance(l1=float(diff.sum() * r1.grid.cell_volume), linf=float(diff.max()))


def dump_trajectories(path: str | Path, rows: Sequence[tuple[int, int, np.ndarray]]) -> None:
    """Write (step, walker id, coordinates) rows to a CSV file."""
    path = Path(path)
    ndim = len(rows[0][2]) if rows else 1
    header = "step,walker," + ",".join(f"x{a}" for a in range(ndim))
    lines = [header]
    for step, wid, coords in rows:
        lines.append(f"{step},{wid}," + ",".join(repr(float(c)) for c in coords))
    path.write_text("\n".join(lines) + "\n")
