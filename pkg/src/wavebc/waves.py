"""Explicit FDTD solver for rho u_tt - u_xx + q u = s on [-1, 1] with Neumann
boundary data, and the Neumann-to-Dirichlet maps built on it.

Space is discretized with the fourth-order stencils (one-sided at the
boundary nodes, ghost nodes enforcing the Neumann condition); time uses the
leapfrog update u^{n+1} = 2 u^n - u^{n-1} + dt^2 u_tt^n.  The first five time
rows are held at zero, so the scheme starts at the sixth step; this is exact
whenever the boundary data and source vanish on that window, which the solver
checks unless told otherwise.

The linearized map reuses the background solve's recorded discrete u_tt as
the source, which makes the discrete linearization the exact derivative of
the discrete forward map (no secondary differencing error).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import CflError, SimulationGrid, check_cfl
from .stencils import fourth_order_stencils, populate_ghosts
from .traces import BoundaryTrace, HorizonError

STARTUP_ROWS = 5


class StartupError(ValueError):
    """Neumann data does not vanish on the held startup window."""


class MediumError(ValueError):
    """Medium arrays are inconsistent with the grid or not positive."""


@dataclass(frozen=True)
class MediumSpec:
    """Coefficients of the wave equation on the grid nodes.

    ``rho0`` is the constant background density; ``rho_full`` (when given)
    overrides it with a sampled, strictly positive density for nonlinear
    runs.  ``q`` is the potential (defaults to zero) and ``rho_dot`` an
    optional density perturbation used by the linearized solves.
    """

    rho0: float = 1.0
    rho_full: np.ndarray | None = None
    q: np.ndarray | None = None
    rho_dot: np.ndarray | None = None

    def __post_init__(self):
        if self.rho0 <= 0.0:
            raise MediumError("rho0 must be positive")
        if self.rho_full is not None and np.any(self.rho_full <= 0.0):
            raise MediumError("rho_full must be strictly positive at every node")

    def density(self, grid: SimulationGrid) -> np.ndarray:
        rho = self.rho_full if self.rho_full is not None else np.full(grid.n_nodes, self.rho0)
        if rho.shape != (grid.n_nodes,):
            raise MediumError(f"density has shape {rho.shape}, grid has {grid.n_nodes} nodes")
        return rho

    def potential(self, grid: SimulationGrid) -> np.ndarray:
        q = self.q if self.q is not None else np.zeros(grid.n_nodes)
        if q.shape != (grid.n_nodes,):
            raise MediumError(f"potential has shape {q.shape}, grid has {grid.n_nodes} nodes")
        return q


@dataclass(frozen=True)
class SpaceTimeField:
    """Full space-time solution of one solve: values[i, j] = u(t_i, x_j).

    ``utt`` holds the per-step discrete second time derivative recorded
    inside the leapfrog loop (not re-differenced afterwards) when the solve
    was asked to keep it.
    """

    grid: SimulationGrid
    values: np.ndarray
    utt: np.ndarray | None = None

    def boundary_trace(self) -> BoundaryTrace:
        return BoundaryTrace(self.grid.t_final, self.grid.dt,
                             self.values[:, 0].copy(), self.values[:, -1].copy())

    def final_snapshot(self) -> np.ndarray:
        return self.values[-1].copy()


_INTERIOR = np.asarray(fourth_order_stencils()["second_interior"].coeffs)
_SECOND_LEFT = np.asarray(fourth_order_stencils()["second_left"].coeffs)
_SECOND_RIGHT = np.asarray(fourth_order_stencils()["second_right"].coeffs)


def _laplacian_matrix(grid: SimulationGrid) -> sp.csr_matrix:
    """Sparse map from a ghost-extended row (n_nodes + 2) to Lap u at the nodes."""
    nn = grid.n_nodes
    scale = 1.0 / grid.dx**2
    rows, cols, vals = [], [], []

    def put(r: int, offsets: range, coeffs: np.ndarray):
        for o, v in zip(offsets, coeffs):
            rows.append(r)
            cols.append(r + 1 + o)
            vals.append(v * scale)

    put(0, range(-1, 5), _SECOND_LEFT)
    for i in range(1, nn - 1):
        put(i, range(-2, 3), _INTERIOR)
    put(nn - 1, range(-4, 2), _SECOND_RIGHT)
    return sp.csr_matrix((vals, (rows, cols)), shape=(nn, nn + 2))


_LAP_CACHE: dict[tuple[int, float], sp.csr_matrix] = {}


def _laplacian_for(grid: SimulationGrid) -> sp.csr_matrix:
    key = (grid.nx, grid.dx)
    if key not in _LAP_CACHE:
        _LAP_CACHE[key] = _laplacian_matrix(grid)
    return _LAP_CACHE[key]


def _check_startup(neumann: BoundaryTrace):
    window = np.concatenate([neumann.left[:STARTUP_ROWS], neumann.right[:STARTUP_ROWS]])
    scale = max(np.abs(neumann.left).max(), np.abs(neumann.right).max(), 1.0)
    if np.abs(window).max() > 1e-9 * scale:
        raise StartupError(
            "Neumann data must vanish on the first five time steps "
            f"(max {np.abs(window).max():.3g} vs scale {scale:.3g})"
        )


def solve_neumann_wave(grid: SimulationGrid, medium: MediumSpec,
                       neumann: BoundaryTrace, source: np.ndarray | None = None,
                       record_utt: bool = False,
                       check_quiet_start: bool = True) -> SpaceTimeField:
    """March the wave equation with Neumann data and zero initial state.

    ``source`` (optional) is sampled on the full space-time grid,
    shape (n_samples, n_nodes).  With ``check_quiet_start`` the solver
    verifies the boundary data vanish on the held startup window; callers
    feeding filtered data with w(0) = 0 but w'(0) != 0 disable the check and
    accept an O(dt^2) startup error.
    """
    ok, ratio = check_cfl(grid)
    if not ok:
        raise CflError(f"dt/dx = {ratio:.4g} exceeds cfl_max = {grid.cfl_max}")
    nt = grid.n_samples
    nn = grid.n_nodes
    if neumann.n_steps != grid.n_steps or abs(neumann.dt - grid.dt) > 1e-12 * grid.dt:
        raise HorizonError("Neumann trace horizon does not match the grid")
    if source is not None and source.shape != (nt, nn):
        raise ValueError(f"source must have shape {(nt, nn)}, got {source.shape}")
    if check_quiet_start:
        _check_startup(neumann)

    rho = medium.density(grid)
    q = medium.potential(grid)
    inv_rho = 1.0 / rho
    lap_op = _laplacian_for(grid)
    dx, dt = grid.dx, grid.dt
    dt2 = dt * dt
    gl, gr = neumann.left, neumann.right

    u = np.zeros((nt, nn))
    utt = np.zeros((nt, nn)) if record_utt else None
    w = np.zeros(nn + 2)
    acc = np.zeros(nn)

    def acceleration(n: int, row: np.ndarray) -> np.ndarray:
        w[1:-1] = row
        w[0], w[-1] = populate_ghosts(row, gl[n], gr[n], dx)
        out = lap_op @ w
        np.multiply(q, row, out=acc)
        np.subtract(out, acc, out=out)
        if source is not None:
            out += source[n]
        out *= inv_rho
        return out

    for n in range(STARTUP_ROWS - 1, nt - 1):
        a = acceleration(n, u[n])
        unew = u[n + 1]
        np.multiply(2.0, u[n], out=unew)
        unew -= u[n - 1]
        unew += dt2 * a
        if record_utt:
            utt[n] = a
    if record_utt and nt >= STARTUP_ROWS:
        utt[nt - 1] = acceleration(nt - 1, u[nt - 1])
    return SpaceTimeField(grid, u, utt)


def second_time_derivative(field: SpaceTimeField) -> SpaceTimeField:
    """The u_tt sequence recorded during the solve, as a field of its own."""
    if field.utt is None:
        raise ValueError("field was solved without record_utt=True")
    return SpaceTimeField(field.grid, field.utt)


def nd_map(grid: SimulationGrid, medium: MediumSpec,
           f: BoundaryTrace, **solve_kwargs) -> BoundaryTrace:
    """Neumann-to-Dirichlet map: boundary values of the solution driven by f."""
    return solve_neumann_wave(grid, medium, f, **solve_kwargs).boundary_trace()


def linearized_nd_map(grid: SimulationGrid, background: MediumSpec,
                      rho_dot: np.ndarray | None, f: BoundaryTrace,
                      **solve_kwargs) -> BoundaryTrace:
    """Derivative of the ND map at the background along a density perturbation.

    Solves the background problem driven by f, then the linearized problem
    with homogeneous Neumann data and source -rho_dot * u_tt of the
    background (the recorded discrete u_tt).
    """
    if rho_dot is None:
        rho_dot = background.rho_dot
    if rho_dot is None:
        raise MediumError("no rho_dot given and the background has none")
    if rho_dot.shape != (grid.n_nodes,):
        raise MediumError(f"rho_dot has shape {rho_dot.shape}, grid has {grid.n_nodes} nodes")
    u0 = solve_neumann_wave(grid, background, f, record_utt=True, **solve_kwargs)
    src = -rho_dot[None, :] * u0.utt
    zero = BoundaryTrace.zeros(grid.t_final, grid.dt)
    udot = solve_neumann_wave(grid, background, zero, source=src)
    return udot.boundary_trace()


def field_to_csv(field: SpaceTimeField, path) -> None:
    """Debug dump: one row per time sample, one column per node."""
    g = field.grid
    with open(path, "w") as fh:
        fh.write(f"# dx={g.dx!r} dt={g.dt!r} horizon={g.t_final!r}\n")
        np.savetxt(fh, field.values, delimiter=",")
