"""Gauge transformations, circulation/winding diagnostics, and the
single-valuedness demonstration.

The quantization criterion: the phase picked up once around a closed loop
is 2*pi * (eta*beta/hbar) per turn of the gauge angle, so wave functions
are single-valued exactly when eta*beta/hbar is an integer - equivalently
when the charge q = c*eta*beta is an integer multiple of hbar*c.  The
failure mode is demonstrated by transporting a superposition of ring
states continuously around the loop: for fractional coupling the
magnitude |Psi|^2 fails to close.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CoarsePhaseError,
    GridMismatchError,
    NodePathError,
    OpenLoopError,
)
from .fields import ComplexField, PhaseRecord, ScalarField, VectorField, same_grid
from .grid import Grid
from .kernel import GaugeInput
from .ops import gradient
from .params import ModelParams
from .schrodinger import NODE_FLOOR_FRACTION

DEFAULT_QUANTIZATION_TOL = 1e-9
MAX_WINDING_RESIDUAL = 0.1
MIN_POINTS_PER_TURN = 16


# --- loops ---------------------------------------------------------------

@dataclass(frozen=True)
class LoopPath:
    """Closed path along grid edges, varying one particle's coordinates.

    ``points`` is an ordered sequence of grid index tuples with first ==
    last; consecutive points must be nearest neighbours (periodic wrap
    included).
    """

    grid: Grid
    points: tuple[tuple[int, ...], ...]
    particle: int = 0

    def __post_init__(self):
        pts = tuple(tuple(int(i) for i in p) for p in self.points)
        if len(pts) < 2 or pts[0] != pts[-1]:
            raise OpenLoopError("loop must end where it starts")
        for p, q in zip(pts, pts[1:]):
            self._edge_axis(p, q)
        object.__setattr__(self, "points", pts)

    def _edge_axis(self, p, q) -> tuple[int, int]:
        """Axis and direction (+1/-1) of one edge; raises if not neighbours."""
        diffs = []
        for a in range(self.grid.ndim):
            d = q[a] - p[a]
            n = self.grid.npoints[a]
            if self.grid.periodic[a]:
                if d == n - 1:
                    d = -1
                elif d == -(n - 1):
                    d = 1
            if d:
                diffs.append((a, d))
        if len(diffs) != 1 or abs(diffs[0][1]) != 1:
            raise OpenLoopError(f"{p} -> {q} is not a grid edge")
        return diffs[0]

    def edges(self):
        for p, q in zip(self.points, self.points[1:]):
            yield p, q, *self._edge_axis(p, q)

    @classmethod
    def axis_cycle(cls, grid: Grid, axis: int = 0, fixed: int = 0, particle: int = 0) -> "LoopPath":
        """The full cycle once around a periodic axis (other index fixed)."""
        if not grid.periodic[axis]:
            raise OpenLoopError(f"axis {axis} is not periodic")
        n = grid.npoints[axis]
        pts = []
        for i in list(range(n)) + [0]:
            if grid.ndim == 1:
                pts.append((i,))
            else:
                pts.append((i, fixed) if axis == 0 else (fixed, i))
        return cls(grid=grid, points=tuple(pts), particle=particle)


# --- gauge transformation --------------------------------------------------

@dataclass(frozen=True)
class GaugeTransformResult:
    phi: ScalarField | None
    A: VectorField | None
    Phi: PhaseRecord | None = None
    psi: ComplexField | None = None


def _uniform_beta(params: ModelParams, ndim: int) -> float:
    betas = set(params.betas_per_axis(ndim))
    if len(betas) != 1:
        raise ValueError(
            "gauge transformation of configuration-space fields needs a single "
            "beta (one particle, or equal multipliers)"
        )
    return betas.pop()


def gauge_transform(
    phi: ScalarField | None,
    A: VectorField | None,
    chi: ScalarField,
    params: ModelParams,
    Phi: PhaseRecord | None = None,
    psi: ComplexField | None = None,
) -> GaugeTransformResult:
    """Apply the local angle redefinition chi.

    phi -> phi + chi, A -> A + grad(chi); the phase shifts by
    eta*beta*chi and the wave function picks up exp(i eta beta chi/hbar).
    The corrected derivative d(phi) - A and the current velocity are
    unchanged because the same discrete gradient is used throughout.
    """
    grid = chi.grid
    dchi = gradient(chi)
    new_phi = ScalarField(grid, phi.values + chi.values) if phi is not None else None
    new_A = VectorField(grid, (A.values if A is not None else 0.0) + dchi.values)
    new_Phi = None
    new_psi = None
    if Phi is not None or psi is not None:
        beta = _uniform_beta(params, grid.ndim)
        shift = params.eta * beta * chi.values
        if Phi is not None:
            same_grid(chi, Phi.base)
            new_Phi = Phi.with_base(Phi.base.values + shift)
        if psi is not None:
            same_grid(chi, psi)
            if params.hbar == 0.0:
                raise ValueError("wave-function transform requires hbar > 0")
            new_psi = ComplexField(grid, psi.values * np.exp(1j * shift / params.hbar))
    return GaugeTransformResult(phi=new_phi, A=new_A, Phi=new_Phi, psi=new_psi)


# --- circulation and winding ------------------------------------------------

def circulation(Phi: PhaseRecord, loop: LoopPath, params: ModelParams) -> float:
    """Loop integral of the phase gradient, in units of hbar.

    Base-field differences telescope along the path; each edge along a
    periodic axis also advances the winding ramp, so one full cycle picks
    up the loop increment 2*pi*winding_scale*winding.
    """
    if params.hbar <= 0.0:
        raise ValueError("circulation in units of hbar requires hbar > 0")
    if loop.grid != Phi.grid:
        raise GridMismatchError("loop and phase live on different grids")
    base = Phi.base.values
    total = 0.0
    for p, q, axis, direction in loop.edges():
        total += base[q] - base[p]
        total += Phi.ramp_slope(axis) * direction * Phi.grid.spacing[axis]
    return float(total / params.hbar)


def loop_phase_turns(psi: ComplexField, loop: LoopPath) -> tuple[float, int, float]:
    """(raw turns, rounded winding, rounding residual) around a loop."""
    if loop.grid != psi.grid:
        raise GridMismatchError("loop and field live on different grids")
    mags = np.abs(psi.values) ** 2
    floor = NODE_FLOOR_FRACTION * float(mags.max())
    angles = []
    for p in loop.points:
        if mags[p] < floor:
            raise NodePathError(f"node at grid index {p} lies on the loop")
        angles.append(np.angle(psi.values[p]))
    diffs = np.diff(np.asarray(angles))
    diffs = (diffs + np.pi) % (2 * np.pi) - np.pi
    turns = float(diffs.sum() / (2 * np.pi))
    nu = int(round(turns))
    residual = abs(turns - nu)
    return turns, nu, residual


def winding_number(psi: ComplexField, loop: LoopPath) -> int:
    """Integer phase turns of a complex field around a closed loop."""
    turns, nu, residual = loop_phase_turns(psi, loop)
    if residual > MAX_WINDING_RESIDUAL:
        raise CoarsePhaseError(
            f"winding residual {residual:.3f} too large; refine the loop "
            f"(need >= {MIN_POINTS_PER_TURN} points per 2*pi of phase)"
        )
    return nu


# --- quantization and charges ------------------------------------------------

@dataclass(frozen=True)
class QuantizationVerdict:
    particle: int
    ratio: float            # eta*beta/hbar
    nearest: int
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def quantization_check(
    params: ModelParams, tolerance: float = DEFAULT_QUANTIZATION_TOL
) -> list[QuantizationVerdict]:
    """Check eta*beta_n/hbar against the nearest integer for each particle."""
    if params.hbar <= 0.0:
        raise ValueError("quantization check requires hbar > 0")
    verdicts = []
    for n, beta in enumerate(params.betas):
        ratio = params.eta * beta / params.hbar
        nearest = int(round(ratio))
        verdicts.append(
            QuantizationVerdict(
                particle=n,
                ratio=ratio,
                nearest=nearest,
                deviation=abs(ratio - nearest),
                tolerance=tolerance,
            )
        )
    return verdicts


@dataclass(frozen=True)
class ChargeRelation:
    particle: int
    charge: float           # q_n = c * eta * beta_n
    basic_charge: float     # hbar * c
    ratio: float | None     # q_n/(hbar c), None when hbar = 0
    integer_multiple: int | None


def charge_from_multiplier(params: ModelParams, n: int) -> ChargeRelation:
    """Charge q_n = c*eta*beta_n and its relation to the basic charge hbar*c."""
    q = params.c * params.eta * params.betas[n]
    basic = params.hbar * params.c
    if basic > 0:
        ratio = q / basic
        nearest = int(round(ratio))
        mu = nearest if abs(ratio - nearest) <= DEFAULT_QUANTIZATION_TOL else None
    else:
        ratio, mu = None, None
    return ChargeRelation(particle=n, charge=q, basic_charge=basic, ratio=ratio, integer_multiple=mu)


def rescale_units(q: float, A, lam: float):
    """Move to conventional units: q' = lam*q, A' = A/lam; q'A' = qA."""
    if lam == 0:
        raise ValueError("rescale factor must be non-zero")
    if isinstance(A, VectorField):
        return q * lam, VectorField(A.grid, A.values / lam)
    return q * lam, np.asarray(A) / lam if isinstance(A, np.ndarray) else A / lam


# --- superposition and loop closure ------------------------------------------

def superpose(psi1: ComplexField, psi2: ComplexField, a1: complex, a2: complex) -> ComplexField:
    """Pointwise linear combination a1*psi1 + a2*psi2."""
    same_grid(psi1, psi2)
    return ComplexField(psi1.grid, a1 * psi1.values + a2 * psi2.values)


@dataclass(frozen=True)
class ClosureMismatch:
    jump_psi: float
    jump_rho: float


def ring_mode_sampler(modes: Sequence[tuple[float, complex]], circumference: float):
    """Analytic continuation of sum_k c_k exp(i k * 2*pi*s) around a ring.

    ``modes`` holds (turns-per-cycle, amplitude) pairs; turns may be
    fractional, which is exactly the multi-valued case.  The returned
    callable maps loop fractions s in [0, 1] to Psi, accumulating phase
    continuously instead of reading principal values.
    """
    modes = tuple((float(k), complex(c)) for k, c in modes)
    norm = math.sqrt(circumference)

    def sampler(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex)
        for k, c in modes:
            out += c * np.exp(2j * np.pi * k * s)
        return out / norm

    return sampler


def grid_loop_sampler(psi: ComplexField, loop: LoopPath):
    """Continuation of a grid field along a loop by phase unwrapping.

    Rejects loops passing through nodes (continuation undefined there).
    """
    mags = []
    angles = []
    for p in loop.points:
        v = psi.values[p]
        mags.append(abs(v))
        angles.append(np.angle(v))
    mags = np.asarray(mags)
    floor = math.sqrt(NODE_FLOOR_FRACTION) * float(np.abs(psi.values).max())
    if np.any(mags < floor):
        i = int(np.argmin(mags))
        raise NodePathError(f"node at {loop.points[i]} on continuation path")
    unwrapped = np.unwrap(np.asarray(angles))
    s_nodes = np.linspace(0.0, 1.0, len(loop.points))

    def sampler(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        mag = np.interp(s, s_nodes, mags)
        ang = np.interp(s, s_nodes, unwrapped)
        return mag * np.exp(1j * ang)

    return sampler


def loop_closure_mismatch(
    sampler: Callable[[np.ndarray], np.ndarray], samples: int = 257
) -> ClosureMismatch:
    """Start/end discrepancy of Psi after continuous transport once around.

    ``sampler`` must evaluate Psi by analytic continuation along the loop
    (fraction s in [0, 1]); a single-valued field closes to round-off.
    """
    s = np.linspace(0.0, 1.0, samples)
    values = np.asarray(sampler(s), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ValueError("sampler produced non-finite values")
    start, end = values[0], values[-1]
    return ClosureMismatch(
        jump_psi=float(abs(end - start)),
        jump_rho=float(abs(abs(end) ** 2 - abs(start) ** 2)),
    )
