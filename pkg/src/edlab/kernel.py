"""Closed-form maximum-entropy transition kernel.

A short step of particle n is Gaussian: mean displacement b*dt set by the
drift velocity, covariance eta*dt/m_n per axis.  The drift is
``b = (eta/m) * [d(S + beta*phi) - beta*A]`` where S is the entropy field
of the unobserved variables and (phi, A) the gauge angle and connection;
the multiplier alpha_n = m_n/(eta*dt) converts constraint strength to a
time step.  Fields are sampled to continuum walker positions by
multilinear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteFieldError
from .fields import ScalarField, VectorField, same_grid
from .grid import Grid
from .ops import diff_axis, interpolate
from .params import ModelParams

# Philox counter layout: words [0, 0, step, context].  Word 3 separates
# independent uses of one master seed; word 2 separates steps, so every
# evolution step draws from its own disjoint stream and walker i always
# consumes row i of the block regardless of scheduling.
STREAM_INIT = 0
STREAM_WALK = 1


def stream(seed: int, context: int, step: int = 0) -> np.random.Generator:
    """Deterministic per-(context, step) random stream from a master seed."""
    bitgen = np.random.Philox(key=np.uint64(seed), counter=[0, 0, step, context])
    return np.random.Generator(bitgen)


@dataclass(frozen=True)
class GaugeInput:
    """Gauge angle field, connection, and optional transformation angle.

    ``phi`` is angle-valued (defined modulo 2*pi); ``A`` has units of
    inverse length.  The per-particle multipliers beta_n are carried by
    ``ModelParams`` and applied per axis.
    """

    phi: ScalarField | None = None
    A: VectorField | None = None
    chi: ScalarField | None = None

    def grid_of(self, default: Grid) -> Grid:
        for f in (self.phi, self.A, self.chi):
            if f is not None:
                return f.grid
        return default


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian one-step kernel: mean displacement and per-axis variance."""

    mean: np.ndarray        # b * dt per axis
    variance: np.ndarray    # eta * dt / m per axis
    dt: float

    def __post_init__(self):
        if np.any(self.variance <= 0):
            raise ValueError("kernel variance must be positive")


def multiplier_alpha(params: ModelParams, n: int) -> float:
    """Lagrange multiplier alpha_n = m_n / (eta * dt)."""
    if params.dt <= 0:
        raise ValueError("dt must be positive")
    return params.masses[n] / (params.eta * params.dt)


def fluctuation_variances(params: ModelParams, ndim: int) -> np.ndarray:
    """Per-axis variance eta*dt/m of the step fluctuation."""
    m = np.array(params.masses_per_axis(ndim))
    return params.eta * params.dt / m


def drift_field(S: ScalarField, gauge: GaugeInput | None, params: ModelParams) -> VectorField:
    """Drift velocity sampled on the grid.

    Ungauged: b_a = (eta/m_a) dS/dx_a.  With gauge input the bracket
    becomes d(S + beta_a phi)/dx_a - beta_a A_a.
    """
    grid = S.grid
    betas = params.betas_per_axis(grid.ndim)
    masses = params.masses_per_axis(grid.ndim)
    out = np.empty(grid.shape + (grid.ndim,))
    for a in range(grid.ndim):
        h, per = grid.spacing[a], grid.periodic[a]
        bracket = diff_axis(S.values, h, per, a)
        if gauge is not None and betas[a] != 0.0:
            if gauge.phi is not None:
                same_grid(S, gauge.phi)
                bracket = bracket + betas[a] * diff_axis(gauge.phi.values, h, per, a)
            if gauge.A is not None:
                same_grid(S, gauge.A)
                bracket = bracket - betas[a] * gauge.A.values[..., a]
        out[..., a] = (params.eta / masses[a]) * bracket
    return VectorField(grid, out)


def drift_velocity(
    S: ScalarField, gauge: GaugeInput | None, params: ModelParams, x: np.ndarray
) -> np.ndarray:
    """Drift velocity at continuum position(s) x."""
    field = drift_field(S, gauge, params)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    b = interpolate(S.grid, field.values, x)
    return b[0] if single else b


def sample_step(
    x: np.ndarray,
    S: ScalarField,
    gauge: GaugeInput | None,
    params: ModelParams,
    rng: np.random.Generator,
    drift: VectorField | None = None,
) -> np.ndarray:
    """One kernel step: x' = x + b*dt + dw, wrapped on periodic axes.

    ``drift`` may carry a precomputed drift field (walker ensembles reuse
    one field per step); otherwise it is derived from S and the gauge.
    """
    grid = S.grid if drift is None else drift.grid
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    field = drift if drift is not None else drift_field(S, gauge, params)
    b = interpolate(grid, field.values, pts)
    sigma = np.sqrt(fluctuation_variances(params, grid.ndim))
    dw = rng.standard_normal(pts.shape) * sigma
    new = grid.wrap(pts + b * params.dt + dw)
    return new[0] if single else new


def kernel_log_density(
    xp: np.ndarray,
    x: np.ndarray,
    S: ScalarField,
    gauge: GaugeInput | None,
    params: ModelParams,
) -> float | np.ndarray:
    """Log of the normalized Gaussian step density P(x'|x).

    On periodic axes the displacement is taken minimal-image, valid in
    the short-step regime sqrt(eta*dt/m) << extent.
    """
    grid = S.grid
    xp = np.asarray(xp, dtype=float)
    x = np.asarray(x, dtype=float)
    single = xp.ndim == 1 and x.ndim == 1
    xp2, x2 = np.atleast_2d(xp), np.atleast_2d(x)
    if not np.all(np.isfinite(xp2)) or not np.all(np.isfinite(x2)):
        raise NonFiniteFieldError("positions must be finite")
    b = interpolate(grid, drift_field(S, gauge, params).values, x2)
    disp = xp2 - (x2 + b * params.dt)
    for a in range(grid.ndim):
        if grid.periodic[a]:
            L = grid.extent[a]
            disp[:, a] = (disp[:, a] + L / 2) % L - L / 2
    var = fluctuation_variances(params, grid.ndim)
    logp = -0.5 * np.sum(disp * disp / var + np.log(2 * np.pi * var), axis=1)
    return float(logp[0]) if single else logp
