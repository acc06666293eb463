"""Analytic boundary controls.

A control is a pair of Neumann time series at x = -1 and x = +1 with a
closed-form second time derivative.  Two families live here:

* :class:`DalembertControl` back-propagates a Helmholtz target through the
  constant-speed wave equation: the target is extended to a compactly
  supported C^3 function on (-2, 2) with quartic-exponent bump flanks, and
  the control is the Neumann trace of the explicit d'Alembert solution.
  Driving the unit-density, zero-potential equation with it steers the state
  to the target at the chosen time.

* :class:`WindowedToneControl` sums smoothly windowed tones per side.  It is
  the building block for synthesized controls (spectral moment matching) and
  for randomized admissible data in identity checks.

Everything is evaluated analytically; the solver samples controls at grid
times and nothing in the primary path differentiates tabulated data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import SimulationGrid
from .traces import BoundaryTrace

SIDES = ("left", "right")


class SupportError(ValueError):
    """Control horizon too short for the back-propagated support to clear."""


@dataclass(frozen=True)
class HelmholtzTarget:
    """cos(j pi x / 2) or sin(j pi x / 2) with spectral parameter (j pi / 2)^2."""

    kind: str
    mode: int

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise ValueError(f"kind must be 'cos' or 'sin', got {self.kind!r}")
        if self.mode < 1:
            raise ValueError("mode must be a positive integer")

    @property
    def lam(self) -> float:
        return (self.mode * np.pi / 2.0) ** 2

    def phi(self, x, derivative: int = 0) -> np.ndarray:
        """d-th derivative of the target, valid on all of R (entire function)."""
        k = self.mode * np.pi / 2.0
        x = np.asarray(x, dtype=float)
        if self.kind == "cos":
            cycle = (np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin)
        else:
            cycle = (np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))
        return k**derivative * cycle[derivative % 4](k * x)

    @property
    def key(self) -> str:
        return f"{self.kind}{self.mode}"


def _bump(s: np.ndarray, derivative: int) -> np.ndarray:
    """exp(1 - 1/(1 - s^4)) on (-1, 1), zero outside, and its derivatives.

    g = 1 - 1/(1 - s^4); derivatives of exp(g) via Faa di Bruno up to order 3.
    """
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0 - 1e-14
    sm = s[m]
    p = 1.0 - sm**4
    b = np.exp(1.0 - 1.0 / p)
    if derivative == 0:
        out[m] = b
        return out
    g1 = -4.0 * sm**3 / p**2
    if derivative == 1:
        out[m] = g1 * b
        return out
    g2 = -12.0 * sm**2 / p**2 - 32.0 * sm**6 / p**3
    if derivative == 2:
        out[m] = (g2 + g1**2) * b
        return out
    g3 = -24.0 * sm / p**2 - 288.0 * sm**5 / p**3 - 384.0 * sm**9 / p**4
    if derivative == 3:
        out[m] = (g3 + 3.0 * g1 * g2 + g1**3) * b
        return out
    raise ValueError("bump derivatives implemented up to order 3")


@dataclass(frozen=True)
class C3Extension:
    """Compactly supported C^3 extension of a Helmholtz target.

    Equal to the target on [-1, 1], target times the quartic-exponent bump on
    the flanks (-2, -1) and (1, 2), zero outside (-2, 2).  Derivatives up to
    order 3 are continuous across all four junctions; the fourth derivative
    jumps at x = +-1, which is what the quartic exponent buys exactly.
    """

    target: HelmholtzTarget

    def __call__(self, x, derivative: int = 0) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        core = np.abs(x) <= 1.0
        out[core] = self.target.phi(x[core], derivative)
        for sign in (-1.0, 1.0):
            m = (sign * x > 1.0) & (sign * x < 2.0)
            if not m.any():
                continue
            xm = x[m]
            s = xm - sign
            val = np.zeros_like(xm)
            for k in range(derivative + 1):
                val += (math.comb(derivative, k)
                        * self.target.phi(xm, derivative - k) * _bump(s, k))
            out[m] = val
        return out


def c3_extension(target: HelmholtzTarget) -> C3Extension:
    return C3Extension(target)


@dataclass(frozen=True)
class DalembertControl:
    """Neumann control steering the constant medium to ``target`` at time T.

    f(t, +-1) = +-(1/2) [ext'(x + t - T) + ext'(x - t + T)] at x = +-1, with
    the outward-normal sign convention (left normal derivative is -u_x).
    The second time derivative replaces ext' by ext''' in the same formula.
    Support starts at T - 3: both shifted arguments stay outside (-2, 2) for
    earlier times.
    """

    target: HelmholtzTarget
    t_final: float
    extension: C3Extension = field(init=False)

    def __post_init__(self):
        if self.t_final < 3.0:
            raise SupportError(
                f"T = {self.t_final} < 3: back-propagated support does not clear [-1, 1]"
            )
        object.__setattr__(self, "extension", C3Extension(self.target))

    @property
    def lam(self) -> float:
        return self.target.lam

    @property
    def support_start(self) -> float:
        return self.t_final - 3.0

    @property
    def key(self) -> str:
        return f"dal:{self.target.key}"

    def _dalembert(self, t: np.ndarray, side: str, derivative: int) -> np.ndarray:
        x = 1.0 if side == "right" else -1.0
        val = 0.5 * (self.extension(x + t - self.t_final, derivative)
                     + self.extension(x - t + self.t_final, derivative))
        return val if side == "right" else -val

    def value(self, t, side: str) -> np.ndarray:
        return self._dalembert(np.asarray(t, dtype=float), side, 1)

    def second_derivative(self, t, side: str) -> np.ndarray:
        return self._dalembert(np.asarray(t, dtype=float), side, 3)


def dalembert_control(target: HelmholtzTarget, t_final: float = 5.0) -> DalembertControl:
    return DalembertControl(target, t_final)


def _smoother(u: np.ndarray, derivative: int) -> np.ndarray:
    """C^3 ramp on [0, 1]: 35u^4 - 84u^5 + 70u^6 - 20u^7 and derivatives."""
    uu = np.clip(u, 0.0, 1.0)
    inside = (u > 0.0) & (u < 1.0)
    if derivative == 0:
        val = uu**4 * (35.0 - 84.0 * uu + 70.0 * uu**2 - 20.0 * uu**3)
        return np.where(u >= 1.0, 1.0, np.where(u <= 0.0, 0.0, val))
    if derivative == 1:
        val = 140.0 * uu**3 * (1.0 - uu) ** 3
    elif derivative == 2:
        val = 420.0 * uu**2 * (1.0 - uu) ** 2 * (1.0 - 2.0 * uu)
    else:
        raise ValueError("ramp derivatives implemented up to order 2")
    return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class WindowedToneControl:
    """Sum of tones a sin(omega (T - t)) per side under a C^3 onset window.

    The window ramps from 0 on [ramp_start, ramp_end] and stays 1 through T,
    so the control vanishes identically near t = 0 (startup safe) and its
    value at t = T is zero (each tone vanishes there).
    """

    t_final: float
    ramp_start: float
    ramp_end: float
    left_tones: tuple[tuple[float, float], ...]   # (omega, amplitude)
    right_tones: tuple[tuple[float, float], ...]
    label: str = "tones"

    def __post_init__(self):
        if not 0.0 <= self.ramp_start < self.ramp_end <= self.t_final:
            raise SupportError("need 0 <= ramp_start < ramp_end <= t_final")

    @property
    def support_start(self) -> float:
        return self.ramp_start

    @property
    def key(self) -> str:
        return f"tone:{self.label}"

    def _window(self, t: np.ndarray, derivative: int) -> np.ndarray:
        width = self.ramp_end - self.ramp_start
        return _smoother((t - self.ramp_start) / width, derivative) / width**derivative

    def _tones(self, side: str) -> tuple[tuple[float, float], ...]:
        return self.right_tones if side == "right" else self.left_tones

    def value(self, t, side: str) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w = self._window(t, 0)
        out = np.zeros_like(t)
        for omega, amp in self._tones(side):
            out += amp * np.sin(omega * (self.t_final - t))
        return w * out

    def second_derivative(self, t, side: str) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w0 = self._window(t, 0)
        w1 = self._window(t, 1)
        w2 = self._window(t, 2)
        out = np.zeros_like(t)
        for omega, amp in self._tones(side):
            phase = omega * (self.t_final - t)
            g0 = amp * np.sin(phase)
            g1 = -amp * omega * np.cos(phase)
            g2 = -amp * omega**2 * np.sin(phase)
            out += w2 * g0 + 2.0 * w1 * g1 + w0 * g2
        return out


def random_admissible_control(t_final: float, seed: int, n_tones: int = 4,
                              ramp: tuple[float, float] = (0.5, 1.5)) -> WindowedToneControl:
    """Seeded smooth control vanishing near t = 0, for identity checks."""
    rng = np.random.default_rng(seed)
    def draw():
        return tuple((float(rng.uniform(0.6, 7.0)), float(rng.normal(0.0, 1.0)))
                     for _ in range(n_tones))
    return WindowedToneControl(t_final, ramp[0], ramp[1], draw(), draw(),
                               label=f"rand{seed}")


def sample_control(control, grid: SimulationGrid,
                   second_derivative: bool = False) -> BoundaryTrace:
    """Sample a control (or its second time derivative) at the grid times.

    Beyond the control's own horizon the samples are zero: the zero
    extension is what all operator definitions use past T.
    """
    t = grid.times()
    live = t <= control.t_final + 1e-12
    fn = control.second_derivative if second_derivative else control.value
    left = np.zeros_like(t)
    right = np.zeros_like(t)
    left[live] = fn(t[live], "left")
    right[live] = fn(t[live], "right")
    return BoundaryTrace(grid.t_final, grid.dt, left, right)


def control_probe(control, lam: float, grid: SimulationGrid) -> BoundaryTrace:
    """f_tt + lam * f sampled on the grid (the pairing probe)."""
    f = sample_control(control, grid)
    ftt = sample_control(control, grid, second_derivative=True)
    return BoundaryTrace(grid.t_final, grid.dt,
                         ftt.left + lam * f.left, ftt.right + lam * f.right)


def verify_control(grid: SimulationGrid, control: DalembertControl,
                   medium=None) -> float:
    """Relative L2 error of the steered final state against the target.

    Solves the background problem (unit density, zero potential unless a
    medium is given) on [0, T] with the sampled control.
    """
    from .waves import MediumSpec, solve_neumann_wave  # local import, avoids cycle

    if medium is None:
        medium = MediumSpec()
    if abs(grid.t_final - control.t_final) > 1e-12:
        grid = grid.with_horizon(control.t_final)
    f = sample_control(control, grid)
    u = solve_neumann_wave(grid, medium, f)
    x = grid.nodes()
    target = control.target.phi(x)
    w = np.full(grid.n_nodes, grid.dx)
    w[0] = w[-1] = grid.dx / 2.0
    num = np.sqrt(np.sum(w * (u.final_snapshot() - target) ** 2))
    den = np.sqrt(np.sum(w * target**2))
    return float(num / den)
