"""Spectral machinery for nonzero potentials.

For q != 0 the d'Alembert construction no longer steers states exactly, but
the identity checks still need final states annihilated by Lap - q + lam.
This module supplies them: a fine-grid symmetric eigensolve of -d2/dx2 + q
with Neumann conditions gives eigenpairs (mu_k, e_k), and a small
moment-matching problem synthesizes a windowed-tone boundary control whose
final state is e_k.

The synthesis uses the eigen-expansion of the driven equation: with
c_j(t) = (u(t), e_j), the boundary data enters through
c_j'' + mu_j c_j = f(t, 1) e_j(1) + f(t, -1) e_j(-1), so by Duhamel the
final coefficients are linear in the control.  Matching c_j(T) = delta_jk
for j up to a cutoff is a tiny least-squares problem; coefficients above the
cutoff are negligible because the control is smooth in time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .controls import WindowedToneControl, _smoother
from .grid import SimulationGrid


class SpectralError(ValueError):
    """Eigensolve or synthesis preconditions violated."""


@dataclass(frozen=True)
class NeumannEigenpairs:
    """Lowest eigenpairs of -u'' + q u = mu u with zero Neumann data.

    Eigenfunctions are L2(-1, 1)-orthonormal (trapezoid quadrature on the
    fine grid) with e_k(-1) > 0, sampled at ``nodes``.
    """

    nodes: np.ndarray
    values: np.ndarray      # (n_modes,)
    functions: np.ndarray   # (n_modes, len(nodes))

    def restrict(self, grid: SimulationGrid) -> np.ndarray:
        """Eigenfunctions sampled at the simulation nodes (grids must nest)."""
        stride = (self.nodes.shape[0] - 1) // grid.nx
        if stride * grid.nx != self.nodes.shape[0] - 1:
            raise SpectralError("fine grid does not nest the simulation grid")
        return self.functions[:, ::stride]


def neumann_eigenpairs(q_fn, n_modes: int, n_intervals: int = 8000) -> NeumannEigenpairs:
    """Symmetric tridiagonal eigensolve with reflected-ghost Neumann closure.

    The boundary rows (2 u_0 - 2 u_1)/h^2 are symmetrized by the similarity
    diag(1/sqrt(2), 1, ..., 1, 1/sqrt(2)); eigenvalues are unchanged and
    eigenvectors are mapped back afterwards.
    """
    h = 2.0 / n_intervals
    x = np.linspace(-1.0, 1.0, n_intervals + 1)
    q = np.asarray(q_fn(x), dtype=float)
    diag = np.full(n_intervals + 1, 2.0 / h**2) + q
    off = np.full(n_intervals, -1.0 / h**2)
    off[0] *= np.sqrt(2.0)
    off[-1] *= np.sqrt(2.0)
    vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                  select_range=(0, n_modes - 1))
    d_inv = np.ones(n_intervals + 1)
    d_inv[0] = d_inv[-1] = np.sqrt(2.0)
    funcs = (vecs * d_inv[:, None]).T
    w = np.full(n_intervals + 1, h)
    w[0] = w[-1] = h / 2.0
    for k in range(n_modes):
        funcs[k] /= np.sqrt(np.sum(w * funcs[k] ** 2))
        if funcs[k, 0] < 0.0:
            funcs[k] = -funcs[k]
    return NeumannEigenpairs(x, vals, funcs)


def synthesize_eigenstate_control(grid: SimulationGrid, q_fn, mode: int,
                                  n_constraints: int = 15,
                                  ramp: tuple[float, float] = (0.5, 1.5),
                                  label: str | None = None
                                  ) -> tuple[WindowedToneControl, float, np.ndarray]:
    """Control whose final state (under potential q) is the ``mode``-th
    Neumann eigenfunction.

    Returns (control, eigenvalue, eigenfunction at the simulation nodes).
    Requires all matched eigenvalues strictly positive (true for q > 0).
    """
    t_final = grid.t_final
    n = max(n_constraints, mode + 6)
    eig = neumann_eigenpairs(q_fn, n, n_intervals=16 * grid.nx)
    if eig.values[0] <= 1e-10:
        raise SpectralError("synthesis requires strictly positive eigenvalues")
    omegas = np.sqrt(eig.values)
    e_at = eig.functions[:, [0, -1]]          # e_j at x=-1, x=+1

    t = grid.times()
    wts = np.full(t.shape[0], grid.dt)
    wts[0] = wts[-1] = grid.dt / 2.0
    width = ramp[1] - ramp[0]
    window = _smoother((t - ramp[0]) / width, 0)
    phases = omegas[:, None] * (t_final - t)[None, :]
    sines = np.sin(phases)
    # overlap[j, m] = integral sin(omega_j (T-s)) window(s) sin(omega_m (T-s)) ds
    overlap = (sines * (wts * window)) @ sines.T
    # G maps tone amplitudes (left block, right block) to final coefficients
    g_left = (e_at[:, 0] / omegas)[:, None] * overlap
    g_right = (e_at[:, 1] / omegas)[:, None] * overlap
    g = np.hstack([g_left, g_right])
    rhs = np.zeros(n)
    rhs[mode] = 1.0
    beta, *_ = np.linalg.lstsq(g, rhs, rcond=None)
    left = tuple((float(omegas[m]), float(beta[m])) for m in range(n))
    right = tuple((float(omegas[m]), float(beta[n + m])) for m in range(n))
    control = WindowedToneControl(t_final, ramp[0], ramp[1], left, right,
                                  label=label or f"eig{mode}")
    return control, float(eig.values[mode]), eig.restrict(grid)[mode]
