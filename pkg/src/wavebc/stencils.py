"""Finite-difference stencils: derivation, the fixed fourth-order table, and
application of the spatial operator (Laplacian minus potential) with ghost
nodes closing Neumann boundaries.

Weights for a k-th derivative on offsets h_1..h_m come from the moment
conditions sum_i c_i h_i^p = k! * delta_{p,k} for p = 0..m-1, i.e. the
Vandermonde system A c = k! e_k with A[p, i] = h_i^p.  The system is solved
in exact rational arithmetic so that the classical /12 tables are reproduced
to the last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class StencilError(ValueError):
    """Offsets are unusable (duplicates, or too few for the derivative order)."""


@dataclass(frozen=True)
class StencilSpec:
    """A one-dimensional difference stencil.

    ``coeffs`` are the raw weights; dividing by dx**order yields the
    derivative approximation.  ``offsets`` are signed node offsets in units
    of dx.
    """

    offsets: tuple[float, ...]
    order: int
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.offsets) != len(self.coeffs):
            raise StencilError("offsets and coeffs must have equal length")
        if len(set(self.offsets)) != len(self.offsets):
            raise StencilError("offsets must be distinct")

    def moment_defects(self) -> np.ndarray:
        """sum_i c_i h_i^p - k! delta_{p,k} for p = 0..m-1; all ~0 for a valid stencil."""
        m = len(self.offsets)
        h = np.asarray(self.offsets, dtype=float)
        c = np.asarray(self.coeffs, dtype=float)
        out = np.empty(m)
        for p in range(m):
            out[p] = float(np.sum(c * h**p)) - (math.factorial(self.order) if p == self.order else 0.0)
        return out

    def apply(self, values: np.ndarray, dx: float) -> float:
        """Evaluate the derivative from samples aligned with ``offsets``."""
        c = np.asarray(self.coeffs)
        return float(np.dot(c, values)) / dx**self.order


def vandermonde_coeffs(offsets: Sequence[float], k: int) -> list[float]:
    """Solve the moment conditions for a k-th derivative on the given offsets.

    Exact Gaussian elimination over rationals; each float offset is taken at
    its exact binary value.  Raises :class:`StencilError` on duplicate
    offsets (singular system) or ``k > len(offsets) - 1``.
    """
    m = len(offsets)
    if k < 0 or k > m - 1:
        raise StencilError(f"derivative order {k} needs at least {k + 1} offsets, got {m}")
    if len(set(offsets)) != m:
        raise StencilError("offsets must be distinct")
    h = [Fraction(o) for o in offsets]
    rows = [[hj**p for hj in h] for p in range(m)]
    rhs = [Fraction(math.factorial(k)) if p == k else Fraction(0) for p in range(m)]
    # forward elimination with partial pivoting (exact, so pivoting is for zeros only)
    for col in range(m):
        piv = next((r for r in range(col, m) if rows[r][col] != 0), None)
        if piv is None:
            raise StencilError("singular moment system (duplicate offsets?)")
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        rhs[col] *= inv
        for r in range(m):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
                rhs[r] -= f * rhs[col]
    return [float(v) for v in rhs]


def fourth_order_stencils() -> dict[str, StencilSpec]:
    """The five fixed fourth-order stencils used by the wave solver.

    Keys: ``first_left``/``first_right`` (one-sided first derivatives at the
    boundary nodes, each reaching one ghost), ``second_left``/``second_right``
    (one-sided second derivatives at the boundary nodes), and
    ``second_interior`` (the classical five-point second derivative).
    """
    return {
        "first_left": StencilSpec(
            offsets=(-1, 0, 1, 2, 3),
            order=1,
            coeffs=tuple(v / 12.0 for v in (-3, -10, 18, -6, 1)),
        ),
        "first_right": StencilSpec(
            offsets=(-3, -2, -1, 0, 1),
            order=1,
            coeffs=tuple(v / 12.0 for v in (-1, 6, -18, 10, 3)),
        ),
        "second_left": StencilSpec(
            offsets=(-1, 0, 1, 2, 3, 4),
            order=2,
            coeffs=tuple(v / 12.0 for v in (10, -15, -4, 14, -6, 1)),
        ),
        "second_interior": StencilSpec(
            offsets=(-2, -1, 0, 1, 2),
            order=2,
            coeffs=tuple(v / 12.0 for v in (-1, 16, -30, 16, -1)),
        ),
        "second_right": StencilSpec(
            offsets=(-4, -3, -2, -1, 0, 1),
            order=2,
            coeffs=tuple(v / 12.0 for v in (1, -6, 14, -4, -15, 10)),
        ),
    }


# Ghost closure, derived from the boundary first-derivative stencils: the
# ghost enters each with weight -+3/12, so the stencil equation
# f'(boundary) = datum is linear in the single unknown ghost value.
#   left:  (-3 g - 10 u0 + 18 u1 - 6 u2 + u3) / (12 dx) = u_x(x0)
#   right: ( 3 g + 10 uN - 18 uN-1 + 6 uN-2 - uN-3) / (12 dx) = u_x(xN)
# In outward-normal convention, u_x(x0) = -neumann_left, u_x(xN) = +neumann_right.

def populate_ghosts(field_row: np.ndarray, neumann_left: float,
                    neumann_right: float, dx: float) -> tuple[float, float]:
    """Ghost values at x_{-1} and x_{N+1} enforcing the Neumann data.

    ``field_row`` holds the interior nodes x_0..x_N.  The data are
    outward-normal derivatives per side.
    """
    u = field_row
    if u.shape[0] < 4:
        raise StencilError("need at least 4 interior nodes to close the boundary")
    g_left = (12.0 * dx * neumann_left - 10.0 * u[0] + 18.0 * u[1]
              - 6.0 * u[2] + u[3]) / 3.0
    g_right = (12.0 * dx * neumann_right - 10.0 * u[-1] + 18.0 * u[-2]
               - 6.0 * u[-3] + u[-4]) / 3.0
    return g_left, g_right


def apply_spatial_operator(row_with_ghosts: np.ndarray, q: np.ndarray | None,
                           dx: float, out: np.ndarray | None = None) -> np.ndarray:
    """(Lap - q) u at the nodes x_0..x_N from a row including both ghosts.

    ``row_with_ghosts`` has length n_nodes + 2 with the ghosts at the ends.
    Interior nodes use the five-point stencil (which reaches the ghosts at
    the first and last interior node); the two boundary nodes use the
    one-sided stencils.
    """
    w = row_with_ghosts
    nn = w.shape[0] - 2
    if nn < 6:
        raise StencilError("row too short for the one-sided boundary stencils")
    c = 1.0 / (12.0 * dx * dx)
    if out is None:
        out = np.empty(nn)
    out[1:-1] = (-w[0:nn - 2] + 16.0 * w[1:nn - 1] - 30.0 * w[2:nn]
                 + 16.0 * w[3:nn + 1] - w[4:nn + 2]) * c
    out[0] = (10.0 * w[0] - 15.0 * w[1] - 4.0 * w[2] + 14.0 * w[3]
              - 6.0 * w[4] + w[5]) * c
    out[-1] = (w[nn - 4] - 6.0 * w[nn - 3] + 14.0 * w[nn - 2] - 4.0 * w[nn - 1]
               - 15.0 * w[nn] + 10.0 * w[nn + 1]) * c
    if q is not None:
        out -= q * w[1:-1]
    return out
