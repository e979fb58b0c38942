import numpy as np
import pytest
from scipy import stats

from edlab.ensemble import (
    DensityDistance,
    compare_densities,
    drift_from_fields,
    estimate_density,
    evolve_ensemble,
    init_ensemble,
)
from edlab.errors import GridMismatchError
from edlab.fields import PhaseRecord, ScalarField, VectorField
from edlab.grid import Grid
from edlab.kernel import GaugeInput
from edlab.params import ModelParams


def normalized(grid, values):
    vals = np.asarray(values, dtype=float)
    return ScalarField(grid, vals / (vals.sum() * grid.cell_volume))


class TestInitEnsemble:
    def test_point_mass_lands_in_cell(self):
        g = Grid("line", (32,), (8.0,))
        vals = np.zeros(32)
        vals[10] = 1.0
        state = init_ensemble(normalized(g, vals), 5000, seed=1)
        x10 = g.axis_coords(0)[10]
        h = g.spacing[0]
        assert np.all(np.abs(state.positions[:, 0] - x10) <= h / 2 + 1e-12)

    def test_uniform_on_ring_passes_ks(self):
        g = Grid("ring", (64,), (1.0,))
        state = init_ensemble(normalized(g, np.ones(64)), 100_000, seed=7)
        res = stats.kstest(state.positions[:, 0], "uniform")
        assert res.pvalue > 0.01

    def test_gaussian_mean_within_three_se(self):
        g = Grid("line", (256,), (20.0,))
        x = g.axis_coords(0)
        sigma = 1.5
        state = init_ensemble(normalized(g, np.exp(-x**2 / (2 * sigma**2))), 100_000, seed=3)
        se = sigma / np.sqrt(state.n_walkers)
        assert abs(state.positions[:, 0].mean()) < 3 * se

    def test_negative_density_rejected(self):
        g = Grid("line", (32,), (8.0,))
        vals = np.ones(32)
        vals[0] = -0.5
        with pytest.raises(ValueError):
            init_ensemble(ScalarField(g, vals / (vals.sum() * g.cell_volume)), 100, seed=1)

    def test_unnormalized_rejected(self):
        g = Grid("line", (32,), (8.0,))
        with pytest.raises(ValueError):
            init_ensemble(ScalarField.full(g, 1.0), 100, seed=1)

    def test_2d_rejection_sampling_matches_density(self):
        g = Grid("torus", (16, 16), (1.0, 1.0))
        xx, yy = g.meshgrid()
        rho = normalized(g, 1.0 + 0.5 * np.cos(2 * np.pi * xx))
        state = init_ensemble(rho, 50_000, seed=11)
        est = estimate_density(state, g)
        d = compare_densities(est, rho)
        assert d.l1 < 0.06

    def test_determinism(self):
        g = Grid("ring", (64,), (1.0,))
        rho = normalized(g, np.ones(64))
        a = init_ensemble(rho, 2000, seed=42)
        b = init_ensemble(rho, 2000, seed=42)
        np.testing.assert_array_equal(a.positions, b.positions)


class TestDriftFromFields:
    def test_plane_wave_on_ring(self):
        # uniform rho, winding phase: drift is the constant current velocity
        g = Grid("ring", (64,), (2.0,))
        p = ModelParams(eta=1.0, xi=0.125, masses=(1.5,), betas=(0.0,), dt=0.01)
        rho = normalized(g, np.ones(64))
        Phi = PhaseRecord(ScalarField.full(g, 0.0), (3,), winding_scale=p.hbar)
        b = drift_from_fields(rho, Phi, None, p)
        expected = 2 * np.pi * 3 * p.hbar / (2.0 * 1.5)
        np.testing.assert_allclose(b.values[:, 0], expected, atol=1e-10)

    def test_gaussian_osmotic_term(self):
        # oracle: (eta/2m) d(rho)/rho = -eta*x/(2 sigma^2 m) for a gaussian
        g = Grid("line", (256,), (12.0,))
        x = g.axis_coords(0)
        sigma = 1.0
        p = ModelParams(eta=2.0, xi=0.125, masses=(1.0,), betas=(0.0,), dt=0.01)
        rho = normalized(g, np.exp(-x**2 / (2 * sigma**2)))
        Phi = PhaseRecord(ScalarField.full(g, 0.0))
        b = drift_from_fields(rho, Phi, None, p)
        inner = np.abs(x) < 3.0
        # O(h^2) stencil error on d(rho)/rho grows like x^3 at the edge of the window
        np.testing.assert_allclose(
            b.values[inner, 0], -p.eta * x[inner] / (2 * sigma**2), atol=1e-2
        )

    def test_connection_cancels_phase_gradient(self):
        # A set to the (discrete) gradient of Phi/eta: current velocity cancels
        from edlab.ops import gradient

        g = Grid("ring", (64,), (2 * np.pi,))
        x = g.axis_coords(0)
        p = ModelParams(eta=1.0, xi=0.125, masses=(1.0,), betas=(1.0,), dt=0.01)
        rho = normalized(g, np.ones(64))
        base = ScalarField(g, np.sin(x))
        Phi = PhaseRecord(base, (0,), winding_scale=p.hbar)
        gauge = GaugeInput(A=VectorField(g, gradient(base).values / p.eta))
        b = drift_from_fields(rho, Phi, gauge, p)
        np.testing.assert_allclose(b.values[:, 0], 0.0, atol=1e-12)


class TestEvolveEnsemble:
    def test_brownian_diffusion_law(self):
        # oracle: with b = 0, <dx^2> = (eta/m) t
        g = Grid("line", (64,), (80.0,))
        p = ModelParams(eta=1.5, xi=0.125, masses=(0.75,), betas=(0.0,), dt=0.01)
        rho = normalized(g, np.where(np.abs(g.axis_coords(0)) < 0.4, 1.0, 0.0))
        state = init_ensemble(rho, 100_000, seed=9)
        x0 = state.positions.copy()
        steps = 200
        state, stats_ = evolve_ensemble(state, VectorField.zeros(g), p, steps)
        t = steps * p.dt
        msd = np.mean((state.positions - x0) ** 2)
        expected = (p.eta / 0.75) * t
        se = expected * np.sqrt(2.0 / state.n_walkers)
        assert abs(msd - expected) < 3 * se
        assert stats_.clamped == 0

    def test_stationary_ou_density_ks(self):
        # drift from stationary gaussian fields keeps walkers distributed as rho
        g = Grid("line", (128,), (16.0,))
        x = g.axis_coords(0)
        sigma2 = 0.5
        p = ModelParams(eta=1.0, xi=0.125, masses=(1.0,), betas=(0.0,), dt=0.005)
        rho = normalized(g, np.exp(-x**2 / (2 * sigma2)))
        Phi = PhaseRecord(ScalarField.full(g, 0.0))
        drift = drift_from_fields(rho, Phi, None, p)
        state = init_ensemble(rho, 20_000, seed=21)
        before = state.positions[:, 0].copy()
        state, _ = evolve_ensemble(state, drift, p, 400)
        res = stats.ks_2samp(before, state.positions[:, 0])
        assert res.pvalue > 0.01

    def test_single_step_matches_kernel_density(self):
        g = Grid("line", (64,), (40.0,))
        p = ModelParams(eta=1.0, xi=0.125, masses=(1.0,), betas=(0.0,), dt=0.004)
        vals = np.zeros(64)
        vals[32] = 1.0
        state = init_ensemble(normalized(g, vals), 100_000, seed=13)
        x0 = state.positions[:, 0].copy()
        state, _ = evolve_ensemble(state, VectorField.zeros(g), p, 1)
        d = state.positions[:, 0] - x0
        res = stats.kstest(d / np.sqrt(p.eta * p.dt), "norm")
        assert res.pvalue > 0.001

    def test_determinism_bit_exact(self):
        g = Grid("ring", (32,), (1.0,))
        p = ModelParams(dt=0.002)
        rho = normalized(g, np.ones(32))
        runs = []
        for _ in range(2):
            st_ = init_ensemble(rho, 5000, seed=77)
            st_, _ = evolve_ensemble(st_, VectorField.zeros(g), p, 50)
            runs.append(st_.positions)
        np.testing.assert_array_equal(runs[0], runs[1])

    def test_clamping_counted_on_open_grid(self):
        g = Grid("line", (32,), (2.0,))
        p = ModelParams(eta=1.0, masses=(0.01,), betas=(0.0,), dt=0.5)  # huge noise
        vals = np.zeros(32)
        vals[16] = 1.0
        state = init_ensemble(normalized(g, vals), 2000, seed=3)
        state, stats_ = evolve_ensemble(state, VectorField.zeros(g), p, 3)
        assert stats_.clamped > 0
        lo = g.axis_lower(0) - g.spacing[0] / 2
        assert np.all(state.positions >= lo)


class TestEstimateDensity:
    def test_point_mass_cell(self):
        g = Grid("line", (32,), (8.0,))
        vals = np.zeros(32)
        vals[4] = 1.0
        state = init_ensemble(normalized(g, vals), 2000, seed=2)
        est = estimate_density(state, g)
        assert est.values[4] == pytest.approx(1.0 / g.cell_volume)
        assert np.count_nonzero(est.values) == 1

    def test_uniform_multinomial_noise(self):
        g = Grid("ring", (64,), (1.0,))
        n = 100_000
        state = init_ensemble(normalized(g, np.ones(64)), n, seed=5)
        est = estimate_density(state, g)
        p_cell = 1.0 / 64
        sd = np.sqrt(p_cell * (1 - p_cell) / n) / g.cell_volume
        assert np.max(np.abs(est.values - 1.0)) < 5 * sd

    def test_integrates_to_one_exactly(self):
        g = Grid("ring", (64,), (3.0,))
        state = init_ensemble(normalized(g, np.ones(64)), 9999, seed=8)
        est = estimate_density(state, g)
        assert abs(est.values.sum() * g.cell_volume - 1.0) < 1e-12


class TestCompareDensities:
    def test_identical_fields(self):
        g = Grid("ring", (32,), (1.0,))
        r = normalized(g, np.ones(32))
        d = compare_densities(r, r)
        assert d == DensityDistance(0.0, 0.0)

    def test_disjoint_masses_total_variation(self):
        g = Grid("line", (32,), (8.0,))
        a, b = np.zeros(32), np.zeros(32)
        a[4] = b[20] = 1.0
        d = compare_densities(normalized(g, a), normalized(g, b))
        assert d.l1 == pytest.approx(2.0)

    def test_shifted_gaussian_quadrature_oracle(self):
        # frozen oracle (scipy.integrate.quad): L1 = 0.07975522337183387
        # for unit-width gaussians displaced by 0.1
        g = Grid("line", (512,), (24.0,))
        x = g.axis_coords(0)
        f1 = np.exp(-0.5 * x**2) / np.sqrt(2 * np.pi)
        f2 = np.exp(-0.5 * (x - 0.1) ** 2) / np.sqrt(2 * np.pi)
        d = compare_densities(ScalarField(g, f1), ScalarField(g, f2))
        assert d.l1 == pytest.approx(0.07975522337183387, abs=1e-4)

    def test_grid_mismatch_rejected(self):
        r1 = normalized(Grid("ring", (32,), (1.0,)), np.ones(32))
        r2 = normalized(Grid("ring", (64,), (1.0,)), np.ones(64))
        with pytest.raises(GridMismatchError):
            compare_densities(r1, r2)
