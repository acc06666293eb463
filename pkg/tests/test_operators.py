import numpy as np
import pytest

from wavebc.controls import (HelmholtzTarget, dalembert_control,
                             random_admissible_control, sample_control)
from wavebc.grid import SimulationGrid
from wavebc.operators import (DataSourceError, DifferenceQuotientMap,
                              ReplayTraceMap, SimulatedLinearizedMap,
                              apply_connecting, apply_kdot,
                              connecting_symmetry_residual, direct_key,
                              filtered_key, laplacian_pairing_residual,
                              wave_pairing_residual)
from wavebc.traces import (BoundaryTrace, boundary_inner_product, boundary_norm,
                           extend_zero, lowpass, time_reverse)
from wavebc.waves import MediumSpec

T = 5.0


@pytest.fixture(scope="module")
def grid():
    return SimulationGrid.from_ratio(200, T, 0.1)


def _controls(seed):
    return (random_admissible_control(T, seed), random_admissible_control(T, seed + 50))


class TestConnecting:
    def test_zero_in_zero_out(self, grid):
        out = apply_connecting(grid, MediumSpec(), BoundaryTrace.zeros(T, grid.dt))
        assert np.abs(out.left).max() == 0.0

    def test_wave_pairing_identity(self, grid):
        x = grid.nodes()
        medium = MediumSpec(rho_full=1.0 + 0.3 * np.exp(-(x**2)), q=1.0 + x**2)
        fc, hc = _controls(0)
        f, h = sample_control(fc, grid), sample_control(hc, grid)
        lhs, rhs, resid = wave_pairing_residual(grid, medium, f, h)
        assert abs(lhs) > 1e-6  # non-degenerate pairing
        assert resid < 0.01

    def test_symmetry(self, grid):
        fc, hc = _controls(2)
        f, h = sample_control(fc, grid), sample_control(hc, grid)
        assert connecting_symmetry_residual(grid, MediumSpec(), f, h) < 0.01

    @pytest.mark.parametrize("with_potential", [False, True])
    def test_accelerated_pairing_identity(self, grid, with_potential):
        medium = (MediumSpec(q=1.0 + grid.nodes() ** 2) if with_potential
                  else MediumSpec())
        fc, hc = _controls(4)
        lhs, rhs, resid = laplacian_pairing_residual(grid, medium, fc, hc)
        assert abs(lhs) > 1e-6
        assert resid < 0.02


class TestKdot:
    def test_zero_perturbation(self, grid):
        provider = SimulatedLinearizedMap(grid, MediumSpec(), np.zeros(grid.n_nodes))
        h = sample_control(dalembert_control(HelmholtzTarget("cos", 1), T), grid)
        out = apply_kdot(provider, h, key="zero")
        assert np.abs(out.left).max() == 0.0

    def test_linearity_in_data(self, grid):
        rho_dot = np.cos(np.pi * grid.nodes())
        provider = SimulatedLinearizedMap(grid, MediumSpec(), rho_dot)
        h1 = sample_control(dalembert_control(HelmholtzTarget("cos", 1), T), grid)
        h2 = sample_control(dalembert_control(HelmholtzTarget("sin", 2), T), grid)
        combo = BoundaryTrace(T, grid.dt, h1.left + 2 * h2.left,
                              h1.right + 2 * h2.right)
        k1 = apply_kdot(provider, h1, key="h1")
        k2 = apply_kdot(provider, h2, key="h2")
        k12 = apply_kdot(provider, combo, key="h12")
        expected = k1.left + 2 * k2.left
        assert np.abs(k12.left - expected).max() < 1e-8 * np.abs(expected).max()

    def test_linearized_symmetry(self, grid):
        rho_dot = np.cos(np.pi * grid.nodes()) + 0.3
        provider = SimulatedLinearizedMap(grid, MediumSpec(), rho_dot)
        fc = dalembert_control(HelmholtzTarget("cos", 1), T)
        hc = dalembert_control(HelmholtzTarget("cos", 2), T)
        f, h = sample_control(fc, grid), sample_control(hc, grid)
        fkh = boundary_inner_product(f, apply_kdot(provider, h, key=hc.key))
        kfh = boundary_inner_product(apply_kdot(provider, f, key=fc.key), h)
        assert abs(fkh - kfh) / max(abs(fkh), abs(kfh)) < 0.02

    def test_replay_source_reproduces_simulation(self, grid):
        rho_dot = np.cos(np.pi * grid.nodes())
        sim = SimulatedLinearizedMap(grid, MediumSpec(), rho_dot)
        h = sample_control(dalembert_control(HelmholtzTarget("sin", 1), T), grid)
        live = apply_kdot(sim, h, key="ctrl")
        z = extend_zero(h)
        recorded = {
            direct_key("ctrl"): sim.trace(z, direct_key("ctrl")),
            filtered_key("ctrl"): sim.trace(time_reverse(lowpass(z)),
                                            filtered_key("ctrl")),
        }
        replay = apply_kdot(ReplayTraceMap(recorded), h, key="ctrl")
        assert np.array_equal(replay.left, live.left)
        assert np.array_equal(replay.right, live.right)

    def test_replay_source_missing_key(self, grid):
        h = sample_control(dalembert_control(HelmholtzTarget("sin", 1), T), grid)
        with pytest.raises(DataSourceError):
            apply_kdot(ReplayTraceMap({}), h, key="absent")

    def test_difference_quotient_approaches_linearization(self, grid):
        # the quotient's deviation from the true derivative shrinks like eps
        rho_dot = np.cos(np.pi * grid.nodes())
        sim = SimulatedLinearizedMap(grid, MediumSpec(), rho_dot)
        h = sample_control(dalembert_control(HelmholtzTarget("cos", 1), T), grid)
        a = apply_kdot(sim, h, key="x")

        def gap(eps):
            diff = DifferenceQuotientMap(
                grid, MediumSpec(rho_full=1.0 + eps * rho_dot), MediumSpec(), eps)
            b = apply_kdot(diff, h, key="x")
            return boundary_norm(BoundaryTrace(T, grid.dt, a.left - b.left,
                                               a.right - b.right)) / boundary_norm(a)

        g1, g2 = gap(1e-3), gap(5e-4)
        assert g1 < 0.05
        assert 1.5 < g1 / g2 < 2.5
