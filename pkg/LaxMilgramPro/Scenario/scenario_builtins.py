from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape
from LaxMilgramPro.errors import ScenarioParseError
from LaxMilgramPro.Forms.forms_coercivity import certify_by_witnesses, certify_inner_product, falsify_uniform
from LaxMilgramPro.Forms.forms_models import SesquilinearForm
from LaxMilgramPro.Module.module_models import DualFunctional, ModuleElement, ModuleSpace, Submodule
from LaxMilgramPro.Module.module_space import abs_module
from LaxMilgramPro.Scenario.scenario_config import ScenarioConfig
from LaxMilgramPro.Scenario.scenario_models import (
    BuiltinInfo,
    CounterexampleDemo,
    CounterexampleLevel,
    GapViolation,
    M2GapDemo,
    OscillationWindow,
)
from LaxMilgramPro.Solver.solver import directed_family_solve
from LaxMilgramPro.States.state_models import PureState, SamplingStrategy
from LaxMilgramPro.States.state_space import evaluate, evaluate_real, sample_pure_states
from LaxMilgramPro.utils.serialization import encode_module_element, encode_state

logger = logging.getLogger(__name__)

COUNTEREXAMPLE_NOTE = (
    "Cada nível finito é resolúvel; a obstrução é a continuidade: a oscilação da solução "
    "perto de t = 0 não decai com o refinamento da malha, logo não há extensão contínua."
)


def builtin_path(name: str) -> Path:
    path = ScenarioConfig.load().builtin_dir() / f"{name}.yaml"
    if not path.is_file():
        known = ", ".join(info.name for info in list_builtins())
        raise ScenarioParseError(f"unknown builtin scenario '{name}' (available: {known})")
    return path


def list_builtins() -> list[BuiltinInfo]:
    """Builtin scenarios shipped with the active template profile, sorted by name."""
    infos = []
    for path in sorted(ScenarioConfig.load().builtin_dir().glob("*.yaml")):
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        infos.append(
            BuiltinInfo(
                name=data.get("name", path.stem),
                description=data.get("description", ""),
                action=data["action"],
            )
        )
    return infos


# ---------------------------------------------------------------------------
# M₂ gap: witnesses exist, the uniform inequality fails
# ---------------------------------------------------------------------------


def m2_gap_tuple() -> tuple[SesquilinearForm, PureState, ModuleElement, ModuleElement]:
    """Inner product on M₂, f(a) = a₁₁, x = ½[[1,1],[1,1]], y = ½[[1,−1],[−1,1]]."""
    shape = AlgebraShape.of(2)
    space = ModuleSpace(shape, 1)
    x = ModuleElement.of(AlgebraElement.from_blocks([0.5 * np.array([[1, 1], [1, 1]])]))
    y = ModuleElement.of(AlgebraElement.from_blocks([0.5 * np.array([[1, -1], [-1, 1]])]))
    return SesquilinearForm.inner_product_form(space), PureState.basis(shape, 0), x, y


def demo_m2_gap(
    samples: int = 32,
    probes: int = 4,
    seed: int = 0,
    c_values: Sequence[float] | None = None,
    workers: int | None = None,
) -> M2GapDemo:
    """Witness certificate with c = k = 1 next to explicit uniform violations."""
    c_values = list(ScenarioConfig.load().falsify_c_values if c_values is None else c_values)
    B, f, x, y = m2_gap_tuple()

    lhs = abs(evaluate(f, B(x, y)))
    fx = evaluate_real(f, abs_module(x))
    fy = evaluate_real(f, abs_module(y))
    violations = [GapViolation(c=c, lhs=lhs, rhs=c * fx * fy, violated=lhs < c * fx * fy) for c in c_values]

    certificate = certify_inner_product(B)
    sample = sample_pure_states(B.domain.shape, SamplingStrategy.RANDOM, samples, seed)
    witnesses = certify_by_witnesses(B, certificate.c, certificate.k, sample, probes=probes, seed=seed, workers=workers)
    main_pairs = [record for record in witnesses.witnesses if record.condition == "main"]
    min_slack = min((record.slack for record in witnesses.witnesses), default=0.0)

    search = []
    for c in c_values:
        found = falsify_uniform(B, c, sample, probes=probes, seed=seed, workers=workers)
        search.extend(violation.model_dump(mode="json") for violation in found.violations)

    logger.info(
        "Gap em M₂: %d pares com testemunha (c = k = 1); f(B(x,y)) = %.3g, f(|x|) = %.3g, f(|y|) = %.3g",
        len(main_pairs),
        lhs,
        fx,
        fy,
    )
    return M2GapDemo(
        state=encode_state(f),
        x=encode_module_element(x),
        y=encode_module_element(y),
        lhs=lhs,
        f_abs_x=fx,
        f_abs_y=fy,
        witness_c=certificate.c,
        witness_k=certificate.k,
        witness_pairs=len(main_pairs),
        witness_min_slack=min_slack,
        inconclusive=witnesses.inconclusive,
        violations=violations,
        search_violations=search,
    )


# ---------------------------------------------------------------------------
# sin(1/t): solvable on every grid, never continuous at 0
# ---------------------------------------------------------------------------


def _grid_problem(n: int) -> tuple[SesquilinearForm, DualFunctional, Submodule, np.ndarray]:
    """A = ℂ^{n+1} over tⱼ = j/n, Y = functions vanishing at t₀ = 0, τ = ⟨sin(1/t), ·⟩."""
    shape = AlgebraShape(tuple([1] * (n + 1)))
    space = ModuleSpace(shape, 1)
    grid = np.arange(n + 1) / n
    values = np.zeros(n + 1)
    values[1:] = np.sin(1.0 / grid[1:])

    representer = ModuleElement.of(AlgebraElement(shape, tuple(np.array([[v]], dtype=complex) for v in values)))
    vanishing = np.ones(n + 1)
    vanishing[0] = 0.0
    generator = ModuleElement.of(AlgebraElement(shape, tuple(np.array([[v]], dtype=complex) for v in vanishing)))
    B = SesquilinearForm.inner_product_form(space)
    return B, DualFunctional.hat(representer, name="sin(1/t)"), Submodule(space, (generator,)), grid


def _windows(grid: np.ndarray, values: np.ndarray, n: int, min_points: int) -> list[OscillationWindow]:
    windows = []
    delta = 0.25
    while delta * n >= min_points:
        mask = (grid > 0.0) & (grid < delta)
        inside = values[mask]
        windows.append(
            OscillationWindow(delta=delta, points=int(mask.sum()), oscillation=float(inside.max() - inside.min()))
        )
        delta /= 2.0
    return windows


def demo_counterexample(
    n: int | Sequence[int] | None = None,
    probes: int | None = None,
) -> CounterexampleDemo:
    """Solve B(u, v) = ū·v against sin(1/t) on nested grids and measure the oscillation near 0."""
    cfg = ScenarioConfig.load()
    sizes = list(cfg.demo_grid_sizes if n is None else ([n] if isinstance(n, int) else n))
    if any(size < 8 for size in sizes):
        raise ValueError("grid size must be at least 8")
    probes = cfg.demo_probes if probes is None else probes

    levels = []
    for size in sizes:
        B, tau, Y, grid = _grid_problem(size)
        certificate = certify_inner_product(B)
        result = directed_family_solve(B, tau, [Y], [Y], certificate, probes=probes)
        values = np.array([block[0, 0] for block in result.solution.components[0].blocks])
        error = float(np.max(np.abs(values[1:] - np.sin(1.0 / grid[1:]))))
        windows = _windows(grid, values.real, size, cfg.demo_min_points)
        levels.append(CounterexampleLevel(n=size, max_error=error, residual=result.residual, windows=windows))
        logger.info("Malha n = %d: oscilação em (0, ¼) = %.4f", size, windows[0].oscillation)

    trend = [level.windows[0].oscillation for level in levels]
    non_decreasing = all(b >= a - 1e-12 for a, b in zip(trend, trend[1:]))
    return CounterexampleDemo(levels=levels, oscillation_trend=trend, non_decreasing=non_decreasing, note=COUNTEREXAMPLE_NOTE)
