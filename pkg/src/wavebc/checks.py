"""Verification checks with structured pass/fail results.

Each check runs a family of numerical assertions (identity residuals,
control fidelity, derivative consistency, operator properties) at explicit
thresholds and returns a :class:`CheckReport`.  The CLI and the service
expose these directly; the acceptance test suite asserts on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .controls import (HelmholtzTarget, dalembert_control,
                       random_admissible_control, sample_control, verify_control)
from .grid import SimulationGrid
from .operators import (SimulatedLinearizedMap, apply_connecting, apply_kdot,
                        connecting_symmetry_residual, laplacian_pairing_residual,
                        volume_inner_product, wave_pairing_residual)
from .recon import pairing_value
from .spectral import synthesize_eigenstate_control
from .traces import BoundaryTrace, boundary_norm, time_reverse
from .waves import MediumSpec, nd_map, solve_neumann_wave


@dataclass(frozen=True)
class CheckItem:
    name: str
    value: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.value <= self.upper

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "lower": self.lower,
                "upper": self.upper, "passed": self.passed}


@dataclass(frozen=True)
class CheckReport:
    name: str
    items: tuple[CheckItem, ...]

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "items": [item.to_dict() for item in self.items]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "CheckReport":
        return cls(str(d["name"]), tuple(
            CheckItem(i["name"], float(i["value"]), float(i["lower"]),
                      float(i["upper"])) for i in d["items"]))


def _residual_item(name: str, value: float, tol: float) -> CheckItem:
    return CheckItem(name, value, 0.0, tol)


def _media_suite(grid: SimulationGrid) -> list[tuple[str, MediumSpec]]:
    x = grid.nodes()
    rho_var = 1.0 + 0.3 * np.exp(-(x**2))
    q_var = 1.0 + x**2
    return [
        ("rho=1,q=0", MediumSpec()),
        ("rho=var,q=0", MediumSpec(rho_full=rho_var)),
        ("rho=1,q=1+x^2", MediumSpec(q=q_var)),
        ("rho=var,q=1+x^2", MediumSpec(rho_full=rho_var, q=q_var)),
    ]


def _gaussian_bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-4.0 * x**2)


def _keyid_case(grid: SimulationGrid, medium: MediumSpec, rho_dot: np.ndarray,
                f_ctrl, h_ctrl, lam: float) -> float:
    """Two-sided residual of the free-parameter identity.

    The interior side uses the solved final states, so synthesis error in the
    controls is charged to the residual rather than hidden.
    """
    provider = SimulatedLinearizedMap(grid, medium, rho_dot)
    estimate = pairing_value(f_ctrl, h_ctrl, lam, provider, grid)
    uf = solve_neumann_wave(grid, medium, sample_control(f_ctrl, grid))
    uh = (uf if h_ctrl is f_ctrl
          else solve_neumann_wave(grid, medium, sample_control(h_ctrl, grid)))
    direct = volume_inner_product(uf.final_snapshot() * rho_dot,
                                  uh.final_snapshot(), grid)
    return abs(estimate - direct) / max(abs(estimate), abs(direct))


def identity_check(nx: int = 500, t_final: float = 5.0, dt_ratio: float = 0.1,
                   n_pairs: int = 5, seed: int = 0) -> CheckReport:
    """Wave pairing, accelerated-data, and free-parameter identity residuals."""
    grid = SimulationGrid.from_ratio(nx, t_final, dt_ratio)
    x = grid.nodes()
    items = []

    pairs = [(random_admissible_control(t_final, seed + 2 * i),
              random_admissible_control(t_final, seed + 2 * i + 1))
             for i in range(n_pairs)]
    for label, medium in _media_suite(grid):
        for i, (fc, hc) in enumerate(pairs):
            f = sample_control(fc, grid)
            h = sample_control(hc, grid)
            _, _, resid = wave_pairing_residual(grid, medium, f, h)
            items.append(_residual_item(f"wave-pairing[{label}][{i}]", resid, 0.01))

    for label, medium in [("q=0", MediumSpec()),
                          ("q=1+x^2", MediumSpec(q=1.0 + x**2))]:
        fc = random_admissible_control(t_final, seed + 101)
        hc = random_admissible_control(t_final, seed + 102)
        _, _, resid = laplacian_pairing_residual(grid, medium, fc, hc)
        items.append(_residual_item(f"accelerated-pairing[{label}]", resid, 0.02))

    perturbations = [("cos(pi x)", np.cos(np.pi * x)),
                     ("gaussian", _gaussian_bump(x))]
    for pname, rho_dot in perturbations:
        for kind, j in (("cos", 2), ("sin", 3)):
            ctrl = dalembert_control(HelmholtzTarget(kind, j), t_final)
            resid = _keyid_case(grid, MediumSpec(), rho_dot, ctrl, ctrl, ctrl.lam)
            items.append(_residual_item(
                f"free-parameter[q=0][{pname}][{kind}{j}]", resid, 0.02))

    q_fn = lambda xs: 1.0 + xs**2
    medium_q = MediumSpec(q=q_fn(x))
    for mode in (1, 2):
        ctrl, lam, _ = synthesize_eigenstate_control(grid, q_fn, mode)
        for pname, rho_dot in perturbations:
            resid = _keyid_case(grid, medium_q, rho_dot, ctrl, ctrl, lam)
            items.append(_residual_item(
                f"free-parameter[q=1+x^2][{pname}][mode{mode}]", resid, 0.02))

    return CheckReport("identity", tuple(items))


def control_check(nx: int = 500, t_final: float = 5.0, dt_ratio: float = 0.1,
                  n_modes: int = 10) -> CheckReport:
    """Steered final state against its target for every mode and kind."""
    grid = SimulationGrid.from_ratio(nx, t_final, dt_ratio)
    items = []
    for j in range(1, n_modes + 1):
        for kind in ("cos", "sin"):
            ctrl = dalembert_control(HelmholtzTarget(kind, j), t_final)
            err = verify_control(grid, ctrl)
            items.append(_residual_item(f"control[{kind}{j}]", err, 0.01))
    return CheckReport("control", tuple(items))


def _trace_norm_2t(a: BoundaryTrace, b: BoundaryTrace) -> float:
    return boundary_norm(BoundaryTrace(a.horizon, a.dt,
                                       a.left - b.left, a.right - b.right))


def frechet_check(nx: int = 500, t_final: float = 5.0, dt_ratio: float = 0.1,
                  eps: float = 0.01) -> CheckReport:
    """Quadratic remainder of the linearization: r(eps)/r(eps/2) near 4.

    r(eps) = || L_{rho0 + eps rho_dot} f - L_{rho0} f - eps Ldot f || on
    [0, 2T].  The recorded-u_tt construction makes the linearized solve the
    exact derivative of the discrete forward map, so the ratio is clean for
    data smooth on all of [0, 2T] (the regularity the differentiability
    statement assumes; a data jump, like a zero extension at T, pushes the
    asymptotic regime to much smaller eps).
    """
    from .experiments import experiment1_perturbation

    grid2 = SimulationGrid.from_ratio(nx, 2.0 * t_final, dt_ratio)
    x = grid2.nodes()
    rho_dot = experiment1_perturbation(x)
    background = MediumSpec()
    ctrl = random_admissible_control(2.0 * t_final, seed=4)
    f = sample_control(ctrl, grid2)
    base = nd_map(grid2, background, f)
    provider = SimulatedLinearizedMap(grid2, background, rho_dot)
    lin = provider.trace(f, "frechet:direct")

    def remainder(e: float) -> float:
        full = nd_map(grid2, MediumSpec(rho_full=1.0 + e * rho_dot), f)
        pred = BoundaryTrace(f.horizon, f.dt,
                             base.left + e * lin.left, base.right + e * lin.right)
        return _trace_norm_2t(full, pred)

    ratio = remainder(eps) / remainder(eps / 2.0)
    return CheckReport("frechet", (CheckItem("remainder-ratio", ratio, 3.2, 4.8),))


def operator_check(nx: int = 500, t_final: float = 5.0, dt_ratio: float = 0.1,
                   seed: int = 0, n_traces: int = 100,
                   n_pairs: int = 3) -> CheckReport:
    """Time-reversal involution, filter norm bound, symmetry of the
    connecting operator, and agreement of its derivative with the
    finite-difference surrogate."""
    grid = SimulationGrid.from_ratio(nx, t_final, dt_ratio)
    grid2 = grid.with_horizon(2.0 * t_final)
    x = grid.nodes()
    rng = np.random.default_rng(seed)
    items = []

    n2 = grid2.n_steps + 1
    worst_invol = 0.0
    worst_bound = -np.inf
    for _ in range(n_traces):
        tr = BoundaryTrace(grid2.t_final, grid2.dt,
                           rng.normal(size=n2), rng.normal(size=n2))
        rr = time_reverse(time_reverse(tr))
        worst_invol = max(worst_invol,
                          float(np.abs(rr.left - tr.left).max()),
                          float(np.abs(rr.right - tr.right).max()))
        from .traces import lowpass
        jf = lowpass(tr)
        margin = (t_final**2 / 2.0) * boundary_norm(tr) ** 2 - boundary_norm(jf) ** 2
        worst_bound = max(worst_bound, -margin)
    items.append(CheckItem("time-reversal-involution", worst_invol, 0.0, 0.0))
    items.append(CheckItem("lowpass-norm-bound-defect", max(worst_bound, 0.0), 0.0, 0.0))

    medium = MediumSpec()
    for i in range(n_pairs):
        f = sample_control(random_admissible_control(t_final, seed + 300 + 2 * i), grid)
        h = sample_control(random_admissible_control(t_final, seed + 301 + 2 * i), grid)
        items.append(_residual_item(
            f"connecting-symmetry[{i}]",
            connecting_symmetry_residual(grid, medium, f, h), 0.01))

    rho_dot = np.cos(np.pi * x) + 0.5
    h = sample_control(dalembert_control(HelmholtzTarget("cos", 1), t_final), grid)
    provider = SimulatedLinearizedMap(grid, medium, rho_dot)
    kdot_h = apply_kdot(provider, h, key="surrogate")
    k0_h = apply_connecting(grid, medium, h)

    def surrogate_gap(e: float) -> float:
        k_eps = apply_connecting(grid, MediumSpec(rho_full=1.0 + e * rho_dot), h)
        gap = BoundaryTrace(h.horizon, h.dt,
                            (k_eps.left - k0_h.left) / e - kdot_h.left,
                            (k_eps.right - k0_h.right) / e - kdot_h.right)
        return boundary_norm(gap) / boundary_norm(kdot_h)

    # eps small enough that the quotient sits in its linear regime
    eps = 2e-3
    ratio = surrogate_gap(eps) / surrogate_gap(eps / 2.0)
    items.append(CheckItem("kdot-surrogate-ratio", ratio, 1.5, 2.5))
    return CheckReport("operators", tuple(items))
