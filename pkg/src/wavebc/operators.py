"""Connecting operators and the identities they satisfy.

``K h = J L P* h - R L_T R J P* h`` pairs boundary data against boundary
data yet reproduces interior inner products of wave states at the final
time (the Blagoveshchenskii identity); its derivative ``Kdot`` does the same
for the linearized problem.  The linearized map enters only through traces,
so everything here runs identically on simulated, replayed, or noisy data:
a trace provider abstracts where the traces come from.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .grid import SimulationGrid
from .traces import (BoundaryTrace, boundary_inner_product, extend_zero,
                     lowpass, time_reverse)
from .waves import MediumSpec, linearized_nd_map, nd_map, solve_neumann_wave


class DataSourceError(KeyError):
    """A replayed data source has no trace for a requested control."""


def volume_inner_product(a: np.ndarray, b: np.ndarray, grid: SimulationGrid,
                         weight: np.ndarray | None = None) -> float:
    """Trapezoid L2(-1, 1) pairing of nodal samples, optionally rho-weighted."""
    w = np.full(grid.n_nodes, grid.dx)
    w[0] = w[-1] = grid.dx / 2.0
    v = a * b if weight is None else a * b * weight
    return float(np.sum(w * v))


def volume_norm(a: np.ndarray, grid: SimulationGrid) -> float:
    return float(np.sqrt(volume_inner_product(a, a, grid)))


def apply_connecting(grid: SimulationGrid, medium: MediumSpec,
                     h: BoundaryTrace) -> BoundaryTrace:
    """K h for a trace h on [0, T]: one solve on [0, 2T], one on [0, T].

    The second term drives the equation with R J P* h, which vanishes at
    t = 0 but not to higher order, so that inner solve skips the quiet-start
    check (the held startup rows contribute O(dt^2)).
    """
    grid2 = grid.with_horizon(2.0 * grid.t_final)
    z = extend_zero(h)
    term1 = lowpass(nd_map(grid2, medium, z))
    w = time_reverse(lowpass(z))
    inner = nd_map(grid, medium, w, check_quiet_start=False)
    term2 = time_reverse(inner)
    return BoundaryTrace(h.horizon, h.dt,
                         term1.left - term2.left, term1.right - term2.right)


class LinearizedTraceMap(Protocol):
    """Supplier of linearized Neumann-to-Dirichlet traces.

    ``key`` identifies the request (control id plus variant); providers may
    use it for caching, replay lookup, or per-trace noise seeding.
    """

    def trace(self, neumann: BoundaryTrace, key: str,
              check_quiet_start: bool = True) -> BoundaryTrace: ...


class SimulatedLinearizedMap:
    """Clean linearized traces from the forward solver, cached per key."""

    def __init__(self, grid: SimulationGrid, background: MediumSpec,
                 rho_dot: np.ndarray):
        self.grid = grid
        self.background = background
        self.rho_dot = rho_dot
        self._cache: dict[str, BoundaryTrace] = {}

    def trace(self, neumann: BoundaryTrace, key: str,
              check_quiet_start: bool = True) -> BoundaryTrace:
        if key not in self._cache:
            g = self.grid.with_horizon(neumann.horizon)
            self._cache[key] = linearized_nd_map(
                g, self.background, self.rho_dot, neumann,
                check_quiet_start=check_quiet_start)
        return self._cache[key]


class DifferenceQuotientMap:
    """Linearized-trace surrogate from two nonlinear solves.

    Returns (L_rho f - L_rho0 f) / eps.  Optionally runs each difference
    trace through ``perturb`` (e.g. noise injection) before the 1/eps
    scaling, matching measurement pipelines that corrupt the difference.
    """

    def __init__(self, grid: SimulationGrid, full_medium: MediumSpec,
                 background: MediumSpec, eps: float, perturb=None):
        self.grid = grid
        self.full_medium = full_medium
        self.background = background
        self.eps = eps
        self.perturb = perturb
        self._cache: dict[str, BoundaryTrace] = {}

    def trace(self, neumann: BoundaryTrace, key: str,
              check_quiet_start: bool = True) -> BoundaryTrace:
        if key not in self._cache:
            g = self.grid.with_horizon(neumann.horizon)
            full = nd_map(g, self.full_medium, neumann,
                          check_quiet_start=check_quiet_start)
            base = nd_map(g, self.background, neumann,
                          check_quiet_start=check_quiet_start)
            diff = BoundaryTrace(full.horizon, full.dt,
                                 full.left - base.left, full.right - base.right)
            if self.perturb is not None:
                diff = self.perturb(key, diff)
            self._cache[key] = BoundaryTrace(diff.horizon, diff.dt,
                                             diff.left / self.eps,
                                             diff.right / self.eps)
        return self._cache[key]


class ReplayTraceMap:
    """Serves precomputed traces keyed by request id (measurement replay)."""

    def __init__(self, traces: dict[str, BoundaryTrace]):
        self._traces = dict(traces)

    def trace(self, neumann: BoundaryTrace, key: str,
              check_quiet_start: bool = True) -> BoundaryTrace:
        try:
            return self._traces[key]
        except KeyError:
            raise DataSourceError(
                f"replay source has no trace for {key!r}; "
                f"available: {sorted(self._traces)}") from None


def direct_key(control_key: str) -> str:
    return f"{control_key}:direct"


def filtered_key(control_key: str) -> str:
    return f"{control_key}:filtered"


def apply_kdot(provider: LinearizedTraceMap, h: BoundaryTrace,
               key: str) -> BoundaryTrace:
    """Kdot h on [0, T] from linearized traces.

    Requests the provider twice: the zero extension of h on [0, 2T]
    ('direct') and R J P* h on [0, T] ('filtered').
    """
    z = extend_zero(h)
    direct = provider.trace(z, direct_key(key))
    w = time_reverse(lowpass(z))
    filt = provider.trace(w, filtered_key(key), check_quiet_start=False)
    term1 = lowpass(direct)
    term2 = time_reverse(filt)
    return BoundaryTrace(h.horizon, h.dt,
                         term1.left - term2.left, term1.right - term2.right)


def wave_pairing_residual(grid: SimulationGrid, medium: MediumSpec,
                          f: BoundaryTrace, h: BoundaryTrace
                          ) -> tuple[float, float, float]:
    """Blagoveshchenskii check: (rho u^f(T), u^h(T)) vs (f, K h).

    Returns (volume side, boundary side, relative residual).
    """
    rho = medium.density(grid)
    uf = solve_neumann_wave(grid, medium, f)
    uh = solve_neumann_wave(grid, medium, h)
    lhs = volume_inner_product(uf.final_snapshot(), uh.final_snapshot(), grid,
                               weight=rho)
    rhs = boundary_inner_product(f, apply_connecting(grid, medium, h))
    scale = max(abs(lhs), abs(rhs))
    return lhs, rhs, abs(lhs - rhs) / scale if scale > 0 else 0.0


def connecting_symmetry_residual(grid: SimulationGrid, medium: MediumSpec,
                                 f: BoundaryTrace, h: BoundaryTrace) -> float:
    """|(f, Kh) - (Kf, h)| relative to their magnitude."""
    fkh = boundary_inner_product(f, apply_connecting(grid, medium, h))
    kfh = boundary_inner_product(apply_connecting(grid, medium, f), h)
    scale = max(abs(fkh), abs(kfh))
    return abs(fkh - kfh) / scale if scale > 0 else 0.0


def laplacian_pairing_residual(grid: SimulationGrid, medium: MediumSpec,
                               f_control, h_control) -> tuple[float, float, float]:
    """Accelerated-data check: ((Lap - q) u^f(T), u^h(T)) vs (f_tt, K h).

    Needs controls with analytic second time derivatives; the left side
    evaluates the spatial operator on the final snapshot with ghosts
    populated from the Neumann data at the final time.
    """
    from .controls import sample_control
    from .stencils import apply_spatial_operator, populate_ghosts

    f = sample_control(f_control, grid)
    h = sample_control(h_control, grid)
    q = medium.potential(grid)
    uf = solve_neumann_wave(grid, medium, f)
    uh = solve_neumann_wave(grid, medium, h)
    snap = uf.final_snapshot()
    w = np.empty(grid.n_nodes + 2)
    w[1:-1] = snap
    w[0], w[-1] = populate_ghosts(snap, f.left[-1], f.right[-1], grid.dx)
    lap_f = apply_spatial_operator(w, q, grid.dx)
    lhs = volume_inner_product(lap_f, uh.final_snapshot(), grid)
    ftt = sample_control(f_control, grid, second_derivative=True)
    rhs = boundary_inner_product(ftt, apply_connecting(grid, medium, h))
    scale = max(abs(lhs), abs(rhs))
    return lhs, rhs, abs(lhs - rhs) / scale if scale > 0 else 0.0
