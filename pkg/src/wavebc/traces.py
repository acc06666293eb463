"""Boundary traces on the two endpoints of [-1, 1] and the operator algebra
acting on them: time reversal, the half-horizon low-pass filter, restriction
and zero extension, and the L2 pairings used throughout the inversion."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


class HorizonError(ValueError):
    """Trace horizons or time steps do not match the operation's contract."""


@dataclass(frozen=True)
class BoundaryTrace:
    """Time series at x = -1 (``left``) and x = +1 (``right``) on [0, horizon].

    Sampled uniformly with step ``dt``; both arrays have n_steps + 1 entries
    with samples at t = 0 and t = horizon included.
    """

    horizon: float
    dt: float
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        n = round(self.horizon / self.dt)
        if abs(n * self.dt - self.horizon) > 1e-9 * self.horizon:
            raise HorizonError(f"horizon {self.horizon} not a multiple of dt {self.dt}")
        if self.left.shape != (n + 1,) or self.right.shape != (n + 1,):
            raise HorizonError(
                f"trace arrays must have length {n + 1}, got {self.left.shape} / {self.right.shape}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def values_at(self, t: float) -> tuple[float, float]:
        """(left, right) at grid time t."""
        i = round(t / self.dt)
        if i < 0 or i > self.n_steps or abs(i * self.dt - t) > 1e-9 * max(t, self.dt):
            raise HorizonError(f"t={t} is not a sample time of this trace")
        return float(self.left[i]), float(self.right[i])

    @classmethod
    def zeros(cls, horizon: float, dt: float) -> "BoundaryTrace":
        n = round(horizon / dt) + 1
        return cls(horizon, dt, np.zeros(n), np.zeros(n))


def _check_same_grid(a: BoundaryTrace, b: BoundaryTrace):
    if abs(a.dt - b.dt) > 1e-12 * a.dt or a.n_steps != b.n_steps:
        raise HorizonError("traces live on different time grids")


def time_reverse(trace: BoundaryTrace) -> BoundaryTrace:
    """t -> horizon - t, realized as exact index reversal per side."""
    return BoundaryTrace(trace.horizon, trace.dt,
                         trace.left[::-1].copy(), trace.right[::-1].copy())


def lowpass(trace: BoundaryTrace) -> BoundaryTrace:
    """Half-horizon smoothing filter: out(t) = (1/2) * integral_t^{2T-t} in.

    Input lives on [0, 2T]; output on [0, T].  Composite trapezoid on the
    existing time grid, via the cumulative integral.
    """
    n2 = trace.n_steps
    if n2 % 2 != 0:
        raise HorizonError("lowpass needs an even number of steps (horizon 2T)")
    n = n2 // 2
    idx = np.arange(n + 1)
    out = []
    for side in (trace.left, trace.right):
        cum = np.concatenate([[0.0], np.cumsum((side[1:] + side[:-1]) * trace.dt / 2.0)])
        out.append(0.5 * (cum[n2 - idx] - cum[idx]))
    return BoundaryTrace(trace.horizon / 2.0, trace.dt, out[0], out[1])


def restrict_half(trace: BoundaryTrace) -> BoundaryTrace:
    """Orthogonal projection onto [0, T] by restriction of a [0, 2T] trace."""
    n2 = trace.n_steps
    if n2 % 2 != 0:
        raise HorizonError("restrict_half needs an even number of steps")
    n = n2 // 2
    return BoundaryTrace(trace.horizon / 2.0, trace.dt,
                         trace.left[:n + 1].copy(), trace.right[:n + 1].copy())


def extend_zero(trace: BoundaryTrace) -> BoundaryTrace:
    """Adjoint of restriction: extend a [0, T] trace by zero onto [0, 2T].

    The shared sample at t = T keeps its value.
    """
    n = trace.n_steps
    z = np.zeros(2 * n + 1)
    left = z.copy(); left[:n + 1] = trace.left
    right = z.copy(); right[:n + 1] = trace.right
    return BoundaryTrace(2.0 * trace.horizon, trace.dt, left, right)


def trapezoid_weights(n_samples: int, dt: float) -> np.ndarray:
    w = np.full(n_samples, dt)
    w[0] = w[-1] = dt / 2.0
    return w


def boundary_inner_product(a: BoundaryTrace, b: BoundaryTrace) -> float:
    """L2 pairing over (0, T) x {-1, +1}: trapezoid in time, summed over sides."""
    _check_same_grid(a, b)
    w = trapezoid_weights(a.n_steps + 1, a.dt)
    return float(np.sum(w * (a.left * b.left + a.right * b.right)))


def boundary_norm(a: BoundaryTrace) -> float:
    return float(np.sqrt(boundary_inner_product(a, a)))


def boundary_pairing_at(a: BoundaryTrace, b: BoundaryTrace, t: float) -> float:
    """Pointwise-in-time pairing a(t,-1) b(t,-1) + a(t,+1) b(t,+1)."""
    al, ar = a.values_at(t)
    bl, br = b.values_at(t)
    return al * bl + ar * br


def trace_to_csv(trace: BoundaryTrace, path) -> None:
    """Columns t, left, right; header records dt and horizon."""
    t = trace.times()
    with open(path, "w") as fh:
        fh.write(f"# dt={trace.dt!r} horizon={trace.horizon!r}\n")
        fh.write("t,left,right\n")
        for i in range(t.shape[0]):
            fh.write(f"{float(t[i])!r},{float(trace.left[i])!r},{float(trace.right[i])!r}\n")


def trace_from_csv(path) -> BoundaryTrace:
    with open(path) as fh:
        header = fh.readline()
        meta = dict(kv.split("=") for kv in header.lstrip("# ").split())
        body = fh.read()
    data = np.loadtxt(io.StringIO(body), delimiter=",", skiprows=1)
    return BoundaryTrace(float(meta["horizon"]), float(meta["dt"]),
                         data[:, 1].copy(), data[:, 2].copy())
