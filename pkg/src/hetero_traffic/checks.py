"""
Property suite behind `hetero-traffic check`.

Each check returns a CheckResult(name, passed, detail). The suite covers the
Roe linearization (hyperbolicity, consistency, wave reconstruction,
conservation residual scaling, exact mass rows at gamma = 1), the Jacobian
against finite differences, mass conservation on the periodic road, the
growth-rate roots against the closed-form verdicts, and the equilibrium
flow / jam density orderings.
"""

from __future__ import annotations
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List

import numpy as np

from hetero_traffic.integrator.runner import run_scenario
from hetero_traffic.model.constitutive import equilibrium_flow, jam_density, pressure_law
from hetero_traffic.model.state import primitive_to_conserved
from hetero_traffic.model.types import CAR, CLASS_IDS, MOTORCYCLE, MixSpec, PressureLaw
from hetero_traffic.riemann.flux import eigenstructure, jacobian, physical_flux
from hetero_traffic.riemann.properties import verify_roe_properties
from hetero_traffic.scenario.config import ScenarioConfig
from hetero_traffic.stability.analysis import (
    DEFAULT_K_GRID,
    PerturbationSpec,
    block_roots,
    class_block,
    class_stability_condition,
    root_residual,
    subcharacteristic_condition,
)

log = logging.getLogger(__name__)

RHO_RANGE = (1e-3, 0.9)
V_RANGE = (0.0, 14.0)
# Conservation-residual scaling is measured on jumps shrunk to this relative size.
SCALING_JUMP = 0.02
MIN_SCALING_RATIO = 3.5
STABILITY_DELTAS = (0.2, 0.9)
FLOW_DELTAS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class CheckReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def random_states(rng: np.random.Generator, count: int, law: PressureLaw) -> np.ndarray:
    """Conserved states with rho_i in [1e-3, 0.9] and v_i in [0, 14]."""
    prim = np.empty((count, 4))
    prim[:, 0::2] = rng.uniform(*RHO_RANGE, size=(count, 2))
    prim[:, 1::2] = rng.uniform(*V_RANGE, size=(count, 2))
    return primitive_to_conserved(prim, law)


def shrink_jump(U_l: np.ndarray, U_r: np.ndarray, size: float = SCALING_JUMP) -> np.ndarray:
    """Right state whose jump from U_l points the same way but is at most `size` relative to U_l."""
    dU = U_r - U_l
    rho = U_l[0::2]
    rel = max(
        float(np.max(np.abs(dU[0::2]) / rho)),
        float(np.max(np.abs(dU[1::2]) / (np.abs(U_l[1::2]) + rho))),
    )
    factor = 1.0 if rel <= size else size / rel
    return U_l + factor * dU


def check_roe_properties(law: PressureLaw, trials: int, rng: np.random.Generator) -> List[CheckResult]:
    left = random_states(rng, trials, law)
    right = random_states(rng, trials, law)
    worst_consistency = worst_reconstruction = 0.0
    min_ratio = math.inf
    hyperbolic = True
    for U_l, U_r in zip(left, right):
        rep = verify_roe_properties(U_l, U_r, law)
        hyperbolic &= rep.hyperbolic
        worst_consistency = max(worst_consistency, rep.consistency_error)
        worst_reconstruction = max(worst_reconstruction, rep.reconstruction_error)
        small = verify_roe_properties(U_l, shrink_jump(U_l, U_r), law)
        if small.conservation_ratio is not None:
            min_ratio = min(min_ratio, small.conservation_ratio)

    quad = PressureLaw(psi=law.psi, gamma=(1.0, 1.0))
    worst_mass = 0.0
    for U_l, U_r in zip(left[: min(trials, 100)], right[: min(trials, 100)]):
        worst_mass = max(worst_mass, verify_roe_properties(U_l, U_r, quad).mass_residual)

    return [
        CheckResult("roe.hyperbolicity", hyperbolic, f"{trials} pairs, real eigenvalues and per-class det > 1e-12"),
        CheckResult("roe.consistency", worst_consistency <= 1e-12, f"max |A(U,U) - B(U)| = {worst_consistency:.3g}"),
        CheckResult(
            "roe.reconstruction", worst_reconstruction <= 1e-10, f"max |dU - sum s r| = {worst_reconstruction:.3g}"
        ),
        CheckResult(
            "roe.conservation_scaling",
            min_ratio >= MIN_SCALING_RATIO,
            f"min halving ratio {min_ratio:.3g} (order {math.log2(min_ratio):.2f})"
            if math.isfinite(min_ratio)
            else "all residuals at round-off",
        ),
        CheckResult("roe.gamma_one_mass_rows", worst_mass <= 1e-10, f"max mass-row residual = {worst_mass:.3g}"),
    ]


def finite_difference_jacobian(U: np.ndarray, law: PressureLaw, rel_step: float = 1e-6) -> np.ndarray:
    J = np.zeros((4, 4))
    for j in range(4):
        h = rel_step * max(abs(U[j]), 1e-6)
        up = U.copy()
        down = U.copy()
        up[j] += h
        down[j] -= h
        J[:, j] = (physical_flux(up, law) - physical_flux(down, law)) / (2.0 * h)
    return J


def check_jacobian(law: PressureLaw, count: int, rng: np.random.Generator) -> List[CheckResult]:
    worst_fd = worst_eig = 0.0
    for U in random_states(rng, count, law):
        B = jacobian(U, law)
        worst_fd = max(worst_fd, float(np.max(np.abs(B - finite_difference_jacobian(U, law))) / np.max(np.abs(B))))
        lam, R = eigenstructure(U, law)
        for k in range(4):
            r = R[:, k]
            worst_eig = max(worst_eig, float(np.linalg.norm(B @ r - lam[k] * r) / np.linalg.norm(r)))
    return [
        CheckResult("jacobian.finite_difference", worst_fd <= 1e-6, f"max relative error {worst_fd:.3g} over {count} states"),
        CheckResult("jacobian.eigenpairs", worst_eig <= 1e-10, f"max |B r - lambda r| / |r| = {worst_eig:.3g}"),
    ]


def _class_mass(config: ScenarioConfig) -> tuple:
    trace = run_scenario(config)
    first, last = trace.snapshots[0], trace.snapshots[-1]
    drift = []
    for col in (0, 2):
        start = float(np.sum(first.primitive[:, col]))
        end = float(np.sum(last.primitive[:, col]))
        drift.append(abs(end - start) / start if start > 0 else abs(end))
    cfl = max((d.cfl for d in trace.diagnostics), default=0.0)
    return tuple(drift), cfl


def check_conservation(config: ScenarioConfig) -> List[CheckResult]:
    if config.time.duration == 0:
        return [CheckResult("conservation", True, "duration is 0; nothing to integrate")]
    base = replace(config, snapshots=(0.0, config.time.duration))
    results = []
    for enabled in (False, True):
        cfg = replace(base, solver=replace(base.solver, source_enabled=enabled))
        drift, cfl = _class_mass(cfg)
        label = "on" if enabled else "off"
        results.append(
            CheckResult(
                f"conservation.source_{label}",
                max(drift) <= 1e-12,
                f"relative density drift m={drift[0]:.3g} c={drift[1]:.3g}; max CFL {cfl:.4g}",
            )
        )
    return results


def check_stability(config: ScenarioConfig, k_grid=DEFAULT_K_GRID) -> List[CheckResult]:
    classes = config.classes
    rho_grid = np.linspace(0.05, 0.9, 10)
    agree = True
    worst_residual = 0.0
    printed_disagreements = 0
    points = 0
    for delta in STABILITY_DELTAS:
        mix = MixSpec(delta=delta, road_width=config.road.width)
        for rho0 in rho_grid:
            for class_id in CLASS_IDS:
                points += 1
                worst = -math.inf
                for k in k_grid:
                    spec = PerturbationSpec.at_equilibrium(k, float(rho0), classes, mix)
                    block = class_block(spec, class_id, classes, mix)
                    roots = block_roots(block)
                    worst = max(worst, max(r.real for r in roots))
                    worst_residual = max(worst_residual, max(root_residual(r, block) for r in roots))
                spectral = worst <= 1e-12
                agree &= spectral == subcharacteristic_condition(class_id, float(rho0), mix, classes).stable
                printed_disagreements += spectral != class_stability_condition(class_id, float(rho0), mix, classes).stable
    if printed_disagreements:
        log.warning("closed-form condition disagrees with growth rates at %d of %d points", printed_disagreements, points)
    return [
        CheckResult("stability.root_residual", worst_residual <= 1e-10, f"max scaled |det(r)| = {worst_residual:.3g}"),
        CheckResult(
            "stability.spectral_vs_subcharacteristic",
            agree,
            f"{points} points; closed-form condition disagrees with the growth rates at {printed_disagreements}",
        ),
    ]


def check_equilibrium_orderings(config: ScenarioConfig) -> List[CheckResult]:
    classes, width = config.classes, config.road.width
    flows = [equilibrium_flow(0.4, classes, MixSpec(delta=d, road_width=width)) for d in FLOW_DELTAS]
    increasing = all(b > a for a, b in zip(flows, flows[1:]))
    mix = MixSpec(delta=0.9, road_width=width)
    jam_c, jam_m = jam_density(CAR, classes, mix), jam_density(MOTORCYCLE, classes, mix)
    return [
        CheckResult("equilibrium.flow_increases_with_delta", increasing, "flows " + ", ".join(f"{q:.4f}" for q in flows)),
        CheckResult("equilibrium.cars_jam_first", jam_c < jam_m, f"jam density car={jam_c:.4f} motorcycle={jam_m:.4f}"),
    ]


def run_checks(config: ScenarioConfig, trials: int = 1000, seed: int = 0) -> CheckReport:
    """Run every check against the scenario's classes and mix."""
    rng = np.random.default_rng(seed)
    law = pressure_law(config.classes, config.mix)
    report = CheckReport()
    suites: List[Callable[[], List[CheckResult]]] = [
        lambda: check_roe_properties(law, trials, rng),
        lambda: check_jacobian(law, 100, rng),
        lambda: check_conservation(config),
        lambda: check_stability(config),
        lambda: check_equilibrium_orderings(config),
    ]
    for suite in suites:
        started = time.perf_counter()
        results = suite()
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        for r in results:
            level = logging.INFO if r.passed else logging.WARNING
            log.log(level, "check=%s passed=%s duration_ms=%.0f detail=%s", r.name, r.passed, elapsed_ms, r.detail)
        report.results.extend(results)
    return report


def summarize(report: CheckReport) -> str:
    """One line per check, PASS/FAIL first."""
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}" for r in report.results]
    lines.append(f"{sum(r.passed for r in report.results)}/{len(report.results)} checks passed")
    return "\n".join(lines)
