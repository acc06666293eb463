import numpy as np
import pytest

from wavebc.controls import HelmholtzTarget, dalembert_control, sample_control
from wavebc.grid import SimulationGrid
from wavebc.operators import volume_norm
from wavebc.traces import BoundaryTrace, extend_zero, restrict_half
from wavebc.waves import (MediumSpec, StartupError, field_to_csv,
                          linearized_nd_map, nd_map, second_time_derivative,
                          solve_neumann_wave)


def _zero_trace(grid):
    return BoundaryTrace.zeros(grid.t_final, grid.dt)


def _rel_l2(a, b, grid):
    return volume_norm(a - b, grid) / volume_norm(b, grid)


@pytest.fixture(scope="module")
def grid_fine():
    return SimulationGrid.from_ratio(500, 1.0, 0.1)


class TestSolverBasics:
    def test_zero_data_gives_zero_field(self):
        grid = SimulationGrid.from_ratio(100, 1.0, 0.1)
        u = solve_neumann_wave(grid, MediumSpec(), _zero_trace(grid))
        assert np.abs(u.values).max() == 0.0

    def test_startup_rows_are_zero(self):
        grid = SimulationGrid.from_ratio(100, 2.0, 0.1)
        ctrl = dalembert_control(HelmholtzTarget("cos", 1), 5.0)
        # sample on a [0, 2] window of a T=5 control: still quiet near t=0
        f = sample_control(ctrl, grid)
        u = solve_neumann_wave(grid, MediumSpec(), f)
        assert np.abs(u.values[:5]).max() == 0.0

    def test_loud_start_rejected(self):
        grid = SimulationGrid.from_ratio(100, 1.0, 0.1)
        tr = _zero_trace(grid)
        tr.left[2] = 1.0
        with pytest.raises(StartupError):
            solve_neumann_wave(grid, MediumSpec(), tr)

    def test_manufactured_interior_source(self, grid_fine):
        # u* = t^3 cos(pi x): zero Neumann trace, polynomial-in-time so the
        # leapfrog is exact in time; error is purely spatial
        grid = grid_fine
        x = grid.nodes()
        t = grid.times()
        src = (6 * t[:, None] + np.pi**2 * (t**3)[:, None]) * np.cos(np.pi * x)[None, :]
        u = solve_neumann_wave(grid, MediumSpec(), _zero_trace(grid), source=src)
        exact = t[-1] ** 3 * np.cos(np.pi * x)
        assert _rel_l2(u.values[-1], exact, grid) < 1e-3

    def test_manufactured_boundary_data(self):
        # u* = t^3 x exercises both ghost formulas with nonzero data; the
        # startup hold injects only a tiny velocity error
        grid = SimulationGrid.from_ratio(200, 1.0, 0.1)
        x = grid.nodes()
        t = grid.times()
        f = BoundaryTrace(grid.t_final, grid.dt, -(t**3), t**3)
        src = (6 * t)[:, None] * x[None, :]
        u = solve_neumann_wave(grid, MediumSpec(), f, source=src,
                               check_quiet_start=False)
        assert _rel_l2(u.values[-1], x, grid) < 5e-4

    def test_superposition(self):
        grid = SimulationGrid.from_ratio(100, 2.0, 0.1)
        medium = MediumSpec(q=1.0 + grid.nodes() ** 2)
        c1 = sample_control(dalembert_control(HelmholtzTarget("cos", 1), 5.0), grid)
        c2 = sample_control(dalembert_control(HelmholtzTarget("sin", 2), 5.0), grid)
        rng = np.random.default_rng(0)
        s1 = np.zeros((grid.n_samples, grid.n_nodes))
        s2 = rng.normal(size=(grid.n_samples, grid.n_nodes)) * (grid.times() > 0.1)[:, None]
        u1 = solve_neumann_wave(grid, medium, c1, source=s1)
        u2 = solve_neumann_wave(grid, medium, c2, source=s2)
        combo = BoundaryTrace(grid.t_final, grid.dt,
                              c1.left + 2 * c2.left, c1.right + 2 * c2.right)
        u12 = solve_neumann_wave(grid, medium, combo, source=s1 + 2 * s2)
        expected = u1.values + 2 * u2.values
        scale = np.abs(expected).max()
        assert np.abs(u12.values - expected).max() < 1e-8 * scale


class TestSecondTimeDerivative:
    def test_requires_recording(self):
        grid = SimulationGrid.from_ratio(100, 1.0, 0.1)
        u = solve_neumann_wave(grid, MediumSpec(), _zero_trace(grid))
        with pytest.raises(ValueError):
            second_time_derivative(u)

    def test_zero_field_zero_utt(self):
        grid = SimulationGrid.from_ratio(100, 1.0, 0.1)
        u = solve_neumann_wave(grid, MediumSpec(), _zero_trace(grid), record_utt=True)
        assert np.abs(second_time_derivative(u).values).max() == 0.0

    def test_manufactured_acceleration(self, grid_fine):
        grid = grid_fine
        x = grid.nodes()
        t = grid.times()
        src = (6 * t[:, None] + np.pi**2 * (t**3)[:, None]) * np.cos(np.pi * x)[None, :]
        u = solve_neumann_wave(grid, MediumSpec(), _zero_trace(grid), source=src,
                               record_utt=True)
        utt = second_time_derivative(u)
        exact = 6 * t[-1] * np.cos(np.pi * x)
        assert _rel_l2(utt.values[-1], exact, grid) < 1e-2

    def test_leapfrog_reconstruction_is_exact(self):
        grid = SimulationGrid.from_ratio(100, 2.0, 0.1)
        f = sample_control(dalembert_control(HelmholtzTarget("cos", 2), 5.0), grid)
        u = solve_neumann_wave(grid, MediumSpec(), f, record_utt=True)
        dt2 = grid.dt**2
        for n in (400, 700, grid.n_steps - 1):
            rebuilt = 2 * u.values[n] - u.values[n - 1] + dt2 * u.utt[n]
            assert np.array_equal(rebuilt, u.values[n + 1])


class TestPhysicalProperties:
    def test_energy_conserved_after_control_stops(self):
        # drive on [0, T], then watch [T, 2T]: flux-free, energy must hold
        grid = SimulationGrid.from_ratio(500, 10.0, 0.1)
        ctrl = dalembert_control(HelmholtzTarget("cos", 3), 5.0)
        f = sample_control(ctrl, grid)
        u = solve_neumann_wave(grid, MediumSpec(), f)
        dt, dx = grid.dt, grid.dx
        w = np.full(grid.n_nodes, dx); w[0] = w[-1] = dx / 2

        def energy(n):
            vel = (u.values[n + 1] - u.values[n - 1]) / (2 * dt)
            slope = np.gradient(u.values[n], dx)
            return np.sum(w * (vel**2 + slope**2)) / 2.0

        samples = [energy(round(tq / dt)) for tq in np.linspace(5.5, 9.5, 9)]
        assert (max(samples) - min(samples)) / max(samples) < 5e-3

    def test_finite_propagation_speed(self):
        # a kick at x=+1 supported in t in (1, 1.5) cannot reach x=-1 before
        # t = 3; check quiet to 1e-6 of the peak through t = 2.9
        grid = SimulationGrid.from_ratio(500, 5.0, 0.1)
        t = grid.times()
        s = np.clip((t - 1.0) / 0.5, 0.0, 1.0)
        bump = np.where((t > 1.0) & (t < 1.5), np.sin(np.pi * s) ** 2, 0.0)
        f = BoundaryTrace(grid.t_final, grid.dt, np.zeros_like(t), bump)
        u = solve_neumann_wave(grid, MediumSpec(), f)
        peak = np.abs(u.values).max()
        quiet = np.abs(u.values[t < 2.9, 0]).max()
        assert quiet < 1e-6 * peak

    def test_extension_independence(self):
        # data agreeing on [0, T] produce identical traces there, whatever
        # happens past T
        grid2 = SimulationGrid.from_ratio(100, 10.0, 0.1)
        ctrl = dalembert_control(HelmholtzTarget("sin", 2), 5.0)
        analytic = sample_control(ctrl, grid2)  # supported into (T, T+3)
        grid1 = grid2.with_horizon(5.0)
        zeroext = extend_zero(sample_control(ctrl, grid1))
        tr_a = restrict_half(nd_map(grid2, MediumSpec(), analytic))
        tr_z = restrict_half(nd_map(grid2, MediumSpec(), zeroext))
        scale = np.abs(tr_a.left).max()
        assert np.abs(tr_a.left - tr_z.left).max() < 1e-8 * scale
        assert np.abs(tr_a.right - tr_z.right).max() < 1e-8 * scale


class TestNdMaps:
    def test_zero_data_zero_trace(self):
        grid = SimulationGrid.from_ratio(100, 1.0, 0.1)
        tr = nd_map(grid, MediumSpec(), _zero_trace(grid))
        assert np.abs(tr.left).max() == 0.0

    def test_control_reaches_target_boundary_values(self):
        # cos(pi x / 2) vanishes at both ends; the Dirichlet trace at t = T
        # of the zero-extended control solve must too
        grid = SimulationGrid.from_ratio(500, 10.0, 0.1)
        ctrl = dalembert_control(HelmholtzTarget("cos", 1), 5.0)
        f = extend_zero(sample_control(ctrl, grid.with_horizon(5.0)))
        tr = nd_map(grid, MediumSpec(), f)
        left, right = tr.values_at(5.0)
        assert abs(left) < 1e-2
        assert abs(right) < 1e-2

    def test_reciprocity(self):
        from wavebc.controls import random_admissible_control
        from wavebc.traces import boundary_inner_product, time_reverse
        grid = SimulationGrid.from_ratio(200, 5.0, 0.1)
        medium = MediumSpec(rho_full=1.0 + 0.3 * np.exp(-grid.nodes() ** 2))
        f = sample_control(random_admissible_control(5.0, seed=1), grid)
        h = sample_control(random_admissible_control(5.0, seed=2), grid)
        lam_h = nd_map(grid, medium, h)
        lam_rf = nd_map(grid, medium, time_reverse(f), check_quiet_start=False)
        lhs = boundary_inner_product(f, lam_h)
        rhs = boundary_inner_product(time_reverse(lam_rf), h)
        assert abs(lhs - rhs) / max(abs(lhs), abs(rhs)) < 0.01

    def test_linearized_zero_perturbation(self):
        grid = SimulationGrid.from_ratio(100, 5.0, 0.1)
        f = sample_control(dalembert_control(HelmholtzTarget("cos", 1), 5.0), grid)
        tr = linearized_nd_map(grid, MediumSpec(), np.zeros(grid.n_nodes), f)
        assert np.abs(tr.left).max() == 0.0

    def test_linearized_superposition(self):
        grid = SimulationGrid.from_ratio(100, 5.0, 0.1)
        rho_dot = np.cos(np.pi * grid.nodes())
        f1 = sample_control(dalembert_control(HelmholtzTarget("cos", 1), 5.0), grid)
        f2 = sample_control(dalembert_control(HelmholtzTarget("sin", 1), 5.0), grid)
        combo = BoundaryTrace(grid.t_final, grid.dt,
                              f1.left + 2 * f2.left, f1.right + 2 * f2.right)
        t1 = linearized_nd_map(grid, MediumSpec(), rho_dot, f1)
        t2 = linearized_nd_map(grid, MediumSpec(), rho_dot, f2)
        t12 = linearized_nd_map(grid, MediumSpec(), rho_dot, combo)
        expected = t1.left + 2 * t2.left
        assert np.abs(t12.left - expected).max() < 1e-8 * np.abs(expected).max()


def test_field_csv_dump(tmp_path):
    grid = SimulationGrid.from_ratio(64, 0.5, 0.1)
    u = solve_neumann_wave(grid, MediumSpec(), BoundaryTrace.zeros(0.5, grid.dt))
    path = tmp_path / "field.csv"
    field_to_csv(u, path)
    header = path.read_text().splitlines()[0]
    assert "dx=" in header and "dt=" in header and "horizon=" in header
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (grid.n_samples, grid.n_nodes)
