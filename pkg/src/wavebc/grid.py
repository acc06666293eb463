"""Uniform space-time grid for the interval [-1, 1] and CFL bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

X_MIN = -1.0
X_MAX = 1.0


class InvalidGridError(ValueError):
    """Grid parameters are inconsistent (non-positive steps, horizon mismatch)."""


class CflError(ValueError):
    """Time step too large relative to the spatial step."""


@dataclass(frozen=True)
class SimulationGrid:
    """Uniform nodes on [-1, 1] plus a uniform time grid on [0, t_final].

    ``nx`` counts intervals, so there are ``nx + 1`` nodes.  ``t_final`` must
    be an integer multiple of ``dt`` (to one part in 1e9); the solver relies
    on time samples landing exactly on the horizon.  The CFL ratio is not
    enforced here but by the solver, which refuses grids failing
    :func:`check_cfl`.
    """

    nx: int
    t_final: float
    dt: float
    cfl_max: float = 0.1
    dx: float = field(init=False)
    n_steps: int = field(init=False)

    def __post_init__(self):
        if self.nx < 8:
            raise InvalidGridError(f"need at least 8 intervals, got {self.nx}")
        if self.dt <= 0.0 or self.t_final <= 0.0:
            raise InvalidGridError("dt and t_final must be positive")
        dx = (X_MAX - X_MIN) / self.nx
        object.__setattr__(self, "dx", dx)
        n_steps = round(self.t_final / self.dt)
        if abs(n_steps * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise InvalidGridError(
                f"t_final={self.t_final} is not a multiple of dt={self.dt}"
            )
        object.__setattr__(self, "n_steps", n_steps)

    @classmethod
    def from_ratio(cls, nx: int = 500, t_final: float = 5.0,
                   dt_ratio: float = 0.1, cfl_max: float = 0.1) -> "SimulationGrid":
        """Build a grid with dt tied to dx (the usual operating point is 0.1 dx)."""
        dx = (X_MAX - X_MIN) / nx
        return cls(nx=nx, t_final=t_final, dt=dt_ratio * dx, cfl_max=cfl_max)

    @property
    def n_nodes(self) -> int:
        return self.nx + 1

    @property
    def n_samples(self) -> int:
        return self.n_steps + 1

    def nodes(self) -> np.ndarray:
        return np.linspace(X_MIN, X_MAX, self.n_nodes)

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    def with_horizon(self, t_final: float) -> "SimulationGrid":
        """Same spatial grid and dt, different time horizon."""
        return replace(self, t_final=t_final)

    def time_index(self, t: float) -> int:
        """Index of the sample at time ``t``; raises if t is off the grid."""
        i = round(t / self.dt)
        if i < 0 or i > self.n_steps or abs(i * self.dt - t) > 1e-9 * max(t, self.dt):
            raise InvalidGridError(f"t={t} is not a grid time of {self}")
        return i


def check_cfl(grid: SimulationGrid) -> tuple[bool, float]:
    """Return (passes, dt/dx).  Fails iff the ratio exceeds ``grid.cfl_max``.

    A tiny relative slack absorbs roundoff in dt = ratio * dx products.
    """
    if grid.dt <= 0.0 or grid.dx <= 0.0:
        raise InvalidGridError("check_cfl needs positive dt and dx")
    ratio = grid.dt / grid.dx
    return ratio <= grid.cfl_max * (1.0 + 1e-12), ratio
