from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import ValidationError

from LaxMilgramPro.Algebra.algebra_models import AlgebraShape
from LaxMilgramPro.context import RunContext
from LaxMilgramPro.errors import (
    LaxMilgramError,
    NotPositiveOperator,
    ScenarioParseError,
    ScenarioValidationError,
    ShapeMismatch,
    Singular,
)
from LaxMilgramPro.Forms.forms_coercivity import (
    bounded_below_constant,
    certify_by_witnesses,
    certify_inner_product,
    certify_positive_invertible,
    falsify_uniform,
)
from LaxMilgramPro.Forms.forms_models import CertificationRoute, CoercivityCertificate, SesquilinearForm
from LaxMilgramPro.Localization.localization import localize_space, verify_paschke
from LaxMilgramPro.Module.module_models import DualFunctional, ModuleElement, ModuleSpace, Submodule
from LaxMilgramPro.Scenario.scenario_builtins import builtin_path, demo_counterexample, demo_m2_gap
from LaxMilgramPro.Scenario.scenario_config import ScenarioConfig
from LaxMilgramPro.Scenario.scenario_models import (
    EXIT_CODES,
    DemoKind,
    FamilyKind,
    FamilySpec,
    FormKind,
    FormSpec,
    FunctionalKind,
    FunctionalSpec,
    Outcome,
    Report,
    Scenario,
    ScenarioAction,
)
from LaxMilgramPro.Solver.solver import directed_family_solve, hilbert_space_solve, lax_milgram_solve
from LaxMilgramPro.Solver.solver_models import SolveResult, SolveStatus
from LaxMilgramPro.States.state_models import StateSample
from LaxMilgramPro.States.state_space import sample_pure_states
from LaxMilgramPro.utils.serialization import (
    decode_element,
    decode_module_element,
    dumps_report,
    encode_state,
    serialize_output,
)

logger = logging.getLogger(__name__)

SAMPLED_NOTE = "Certificado obtido por amostragem: vale para os estados e sondas testados, não para todo o espaço de estados."


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _field_path(error: ValidationError) -> str:
    first = error.errors()[0]
    return ".".join(str(part) for part in first["loc"]) or "<root>"


def parse_scenario(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioParseError("a scenario must be a mapping at the top level")
    try:
        return Scenario.model_validate(data)
    except ValidationError as error:
        raise ScenarioValidationError(_field_path(error), error.errors()[0]["msg"]) from error


def load_scenario(path: Path | str) -> Scenario:
    """Read a YAML (or JSON) scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise ScenarioParseError(f"cannot read scenario {path}: {error}") from error
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ScenarioParseError(f"invalid YAML in {path}: {error}") from error
    return parse_scenario(data)


def load_builtin(name: str) -> Scenario:
    return load_scenario(builtin_path(name))


# ---------------------------------------------------------------------------
# Building the problem
# ---------------------------------------------------------------------------


def _spaces(scenario: Scenario) -> tuple[ModuleSpace, ModuleSpace]:
    shape = AlgebraShape(tuple(scenario.shape))
    p, q = scenario.ranks
    return ModuleSpace(shape, p), ModuleSpace(shape, q)


def build_form(spec: FormSpec, domain: ModuleSpace, codomain: ModuleSpace, seed: int) -> SesquilinearForm:
    if spec.kind is FormKind.OPERATOR:
        operator = tuple(tuple(decode_element(entry, domain.shape) for entry in row) for row in spec.operator)
        return SesquilinearForm(domain, codomain, operator, name="operator")
    if domain != codomain:
        raise ShapeMismatch(f"form '{spec.kind.value}' needs p = q")
    if spec.kind is FormKind.INNER_PRODUCT:
        return SesquilinearForm.inner_product_form(domain)
    if spec.kind is FormKind.SCALED_IDENTITY:
        return SesquilinearForm.scaled_identity(domain, spec.scale)
    if spec.kind is FormKind.LEFT_MULTIPLICATION:
        return SesquilinearForm.left_multiplication(domain, decode_element(spec.element, domain.shape))
    rng = np.random.default_rng(seed if spec.seed is None else spec.seed)
    return SesquilinearForm.random_positive(domain, rng, floor=spec.floor)


def build_functional(spec: FunctionalSpec, space: ModuleSpace, seed: int) -> DualFunctional:
    if spec.kind is FunctionalKind.ZERO:
        return DualFunctional.zero(space)
    if spec.kind is FunctionalKind.REPRESENTER:
        z = decode_module_element(spec.representer, space.shape)
        if z.space != space:
            raise ShapeMismatch(f"representer has rank {z.space.rank}, the codomain has rank {space.rank}")
        return DualFunctional.hat(z, name="representer")
    # offset keeps the functional independent of a random form drawn from the same seed
    rng = np.random.default_rng((seed if spec.seed is None else spec.seed) + 1)
    return DualFunctional.hat(ModuleElement.random(space, rng), name="random")


def _explicit_levels(levels: list[list[dict[str, Any]]], space: ModuleSpace) -> list[Submodule]:
    return [
        Submodule(space, tuple(decode_module_element(g, space.shape) for g in generators)) for generators in levels
    ]


def _chain(space: ModuleSpace, length: int) -> list[Submodule]:
    return [
        Submodule(space, tuple(ModuleElement.basis(space, k) for k in range(min(level, space.rank))))
        for level in range(1, length + 1)
    ]


def build_families(
    spec: FamilySpec, domain: ModuleSpace, codomain: ModuleSpace
) -> tuple[list[Submodule], list[Submodule]]:
    if spec.kind is FamilyKind.CONSTANT:
        return [Submodule.whole(domain)], [Submodule.whole(codomain)]
    if spec.kind is FamilyKind.CHAIN:
        Y_family = _chain(codomain, codomain.rank)
        X_family = [Submodule.whole(domain)] * len(Y_family) if spec.x_whole else _chain(domain, codomain.rank)
        return X_family, Y_family
    Y_family = _explicit_levels(spec.y_levels, codomain)
    if spec.x_levels is not None:
        X_family = _explicit_levels(spec.x_levels, domain)
    elif spec.x_whole:
        X_family = [Submodule.whole(domain)] * len(Y_family)
    else:
        X_family = _explicit_levels(spec.y_levels, domain)
    return X_family, Y_family


def _sample(scenario: Scenario, B: SesquilinearForm) -> StateSample:
    count = scenario.sampling.count or ScenarioConfig.load().default_samples
    elements = [entry for row in B.operator for entry in row]
    return sample_pure_states(B.domain.shape, scenario.sampling.strategy, count, scenario.seed, elements)


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


def certify(scenario: Scenario, B: SesquilinearForm, workers: int | None = None) -> CoercivityCertificate:
    """Choose a route: analytic when the form allows it, witness search otherwise."""
    route = scenario.route
    if route in (None, CertificationRoute.INNER_PRODUCT):
        if B.domain == B.codomain and B.allclose(SesquilinearForm.inner_product_form(B.domain)):
            return certify_inner_product(B)
        if route is CertificationRoute.INNER_PRODUCT:
            raise ValueError("route 'inner_product' requested for a form that is not the inner product")
    if route in (None, CertificationRoute.POSITIVE_INVERTIBLE):
        try:
            return certify_positive_invertible(B)
        except (NotPositiveOperator, Singular, ShapeMismatch):
            if route is CertificationRoute.POSITIVE_INVERTIBLE:
                raise
            logger.info("Forma não é positiva invertível; recorrendo à busca de testemunhas")
    if scenario.c is None:
        raise ScenarioValidationError("c", "witness search needs an explicit constant c")
    return certify_by_witnesses(
        B,
        scenario.c,
        scenario.k or 1.0,
        _sample(scenario, B),
        probes=scenario.sampling.probes,
        seed=scenario.seed,
        workers=workers,
    )


def _flat_oracle_c(B: SesquilinearForm) -> float | None:
    """‖T⁻¹‖⁻¹ from the dense flattened matrix."""
    matrix = B.flat_matrix()
    if matrix.shape[0] != matrix.shape[1]:
        return None
    return float(np.linalg.svd(matrix, compute_uv=False)[-1])


def _certificate_entry(certificate: CoercivityCertificate, B: SesquilinearForm) -> dict[str, Any]:
    entry = certificate.summary()
    entry.update(
        form=B.name,
        form_norm=certificate.form_norm,
        witness_pairs=len(certificate.witnesses),
        inconclusive=certificate.inconclusive,
        vacuous=certificate.vacuous,
        min_witness_slack=min((record.slack for record in certificate.witnesses), default=None),
        bounded_below=bounded_below_constant(B, certificate.c, certificate.k).model_dump(),
        oracle_c=_flat_oracle_c(B),
    )
    return entry


def _solve_entry(result: SolveResult) -> dict[str, Any]:
    return serialize_output(result)


# a solution whose LU and QR paths disagree is not refuted, only unconfirmed
STATUS_OUTCOMES: dict[SolveStatus, Outcome] = {
    SolveStatus.SUCCESS: Outcome.SUCCESS,
    SolveStatus.BOUND_VIOLATED: Outcome.FALSIFIED,
    SolveStatus.NOT_UNIQUE: Outcome.INCONCLUSIVE,
}


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------


def _run_certify(scenario: Scenario, report: dict[str, Any], workers: int | None, context: RunContext) -> Outcome:
    domain, codomain = _spaces(scenario)
    B = build_form(scenario.form, domain, codomain, scenario.seed)
    certificate = certify(scenario, B, workers)
    report["certificates"].append(_certificate_entry(certificate, B))
    return Outcome.INCONCLUSIVE if certificate.inconclusive else Outcome.SUCCESS


def _run_solve(scenario: Scenario, report: dict[str, Any], workers: int | None, context: RunContext) -> Outcome:
    domain, codomain = _spaces(scenario)
    B = build_form(scenario.form, domain, codomain, scenario.seed)
    tau = build_functional(scenario.functional, codomain, scenario.seed)
    certificate = certify(scenario, B, workers)
    report["certificates"].append(_certificate_entry(certificate, B))
    if certificate.inconclusive:
        return Outcome.INCONCLUSIVE
    result = lax_milgram_solve(B, tau, certificate, tol=scenario.tol, seed=scenario.seed)
    report["solve"] = _solve_entry(result)
    return STATUS_OUTCOMES[result.status]


def _run_falsify(scenario: Scenario, report: dict[str, Any], workers: int | None, context: RunContext) -> Outcome:
    domain, codomain = _spaces(scenario)
    B = build_form(scenario.form, domain, codomain, scenario.seed)
    sample = _sample(scenario, B)
    c_values = scenario.falsify_c or ([scenario.c] if scenario.c else ScenarioConfig.load().falsify_c_values)
    found = False
    for c in c_values:
        result = falsify_uniform(
            B, c, sample, probes=scenario.sampling.probes, seed=scenario.seed, k=scenario.k or 1.0, workers=workers
        )
        entry = result.summary()
        entry["states"] = len(sample)
        report["falsification"].append(entry)
        found = found or not result.holds
    return Outcome.FALSIFIED if found else Outcome.SUCCESS


def _run_family_solve(scenario: Scenario, report: dict[str, Any], workers: int | None, context: RunContext) -> Outcome:
    domain, codomain = _spaces(scenario)
    B = build_form(scenario.form, domain, codomain, scenario.seed)
    tau = build_functional(scenario.functional, codomain, scenario.seed)
    X_family, Y_family = build_families(scenario.family, domain, codomain)

    if domain.shape == AlgebraShape((1,)) and scenario.route in (None, CertificationRoute.INF_SUP):
        result = hilbert_space_solve(
            B, tau, X_family, Y_family, c=scenario.c, tol=scenario.tol, seed=scenario.seed, workers=workers
        )
        report["certificates"].append({"c": result.c, "k": 1.0, "route": result.route.value, "sampled": False})
    else:
        certificate = certify(scenario, B, workers)
        report["certificates"].append(_certificate_entry(certificate, B))
        if certificate.inconclusive:
            return Outcome.INCONCLUSIVE
        result = directed_family_solve(
            B, tau, X_family, Y_family, certificate, tol=scenario.tol, seed=scenario.seed, workers=workers
        )

    entry = _solve_entry(result)
    exhaustive = (
        X_family[-1].flat_dimension == domain.flat_dimension
        and Y_family[-1].flat_dimension == codomain.flat_dimension
        and domain.rank == codomain.rank
    )
    if exhaustive:
        full = lax_milgram_solve(
            B,
            tau,
            CoercivityCertificate(c=result.c, k=1.0, route=result.route, sampled=False),
            tol=scenario.tol,
            seed=scenario.seed,
        )
        entry["unrestricted_gap"] = float(np.linalg.norm(result.solution.flatten() - full.solution.flatten()))
    report["solve"] = entry
    return STATUS_OUTCOMES[result.status]


def _run_demo(scenario: Scenario, report: dict[str, Any], workers: int | None, context: RunContext) -> Outcome:
    if scenario.demo.kind is DemoKind.M2_GAP:
        demo = demo_m2_gap(
            samples=scenario.sampling.count or ScenarioConfig.load().default_samples,
            probes=scenario.sampling.probes,
            seed=scenario.seed,
            c_values=scenario.falsify_c,
            workers=workers,
        )
        report["demo"] = demo.model_dump(mode="json")
        return Outcome.FALSIFIED if any(v.violated for v in demo.violations) else Outcome.SUCCESS
    demo = demo_counterexample(scenario.demo.grid_sizes)
    report["demo"] = demo.model_dump(mode="json")
    return Outcome.SUCCESS


def _run_paschke(scenario: Scenario, report: dict[str, Any], workers: int | None, context: RunContext) -> Outcome:
    """Localize the domain at each sampled state and check the pairing and inner-product identities.

    τ comes from the scenario's functional; ρ is an independent random
    functional hidden behind a callable, so its representer is recovered
    from values only.
    """
    domain, _ = _spaces(scenario)
    tau = build_functional(scenario.functional, domain, scenario.seed)
    hidden = build_functional(FunctionalSpec(seed=scenario.seed + 1), domain, scenario.seed)
    rho = DualFunctional.from_callable(domain, hidden, name="black-box")
    count = scenario.sampling.count or ScenarioConfig.load().default_samples
    sample = sample_pure_states(domain.shape, scenario.sampling.strategy, count, scenario.seed)
    tol = scenario.tol or ScenarioConfig.load().localization_tol

    failed = 0
    for index, f in enumerate(sample):
        L = localize_space(domain, f, context=context)
        check = verify_paschke(
            L, tau, rho, probes=scenario.sampling.probes, seed=scenario.seed + index, context=context
        )
        entry = check.model_dump(mode="json")
        entry.update(state=encode_state(f), holds=check.holds(tol))
        report["localization"].append(entry)
        failed += not entry["holds"]
    if failed:
        logger.error("Identidades de localização falharam em %d de %d estados", failed, len(sample))
        return Outcome.FALSIFIED
    return Outcome.SUCCESS


ACTIONS = {
    ScenarioAction.CERTIFY: _run_certify,
    ScenarioAction.SOLVE: _run_solve,
    ScenarioAction.FALSIFY: _run_falsify,
    ScenarioAction.FAMILY_SOLVE: _run_family_solve,
    ScenarioAction.DEMO: _run_demo,
    ScenarioAction.PASCHKE: _run_paschke,
}


def run_scenario(
    source: Path | str | Scenario,
    *,
    action: ScenarioAction | str | None = None,
    seed: int | None = None,
    samples: int | None = None,
    tol: float | None = None,
    report_path: Path | str | None = None,
    workers: int | None = None,
    context: RunContext | None = None,
) -> Report:
    """Run one scenario and return its report.

    Parse and validation problems raise; failures inside the computation become
    an ``error`` outcome (exit code 1).
    """
    cfg = ScenarioConfig.load()
    scenario = source if isinstance(source, Scenario) else load_scenario(source)
    updates: dict[str, Any] = {}
    if action is not None:
        updates["action"] = ScenarioAction(action)
    if seed is not None:
        updates["seed"] = seed
    if tol is not None:
        updates["tol"] = tol
    if samples is not None:
        updates["sampling"] = scenario.sampling.model_copy(update={"count": samples})
    if updates:
        scenario = parse_scenario({**scenario.model_dump(mode="json"), **serialize_output(updates)})
    context = context or RunContext()

    logger.info("Executando cenário '%s' (%s, seed=%d)", scenario.name, scenario.action.value, scenario.seed)
    data: dict[str, Any] = {
        "certificates": [],
        "solve": None,
        "falsification": [],
        "localization": [],
        "demo": None,
        "error": None,
    }
    start = time.perf_counter()
    try:
        outcome = ACTIONS[scenario.action](scenario, data, workers, context)
    except (LaxMilgramError, ValueError) as error:
        logger.error("Cenário '%s' falhou: %s", scenario.name, error)
        data["error"] = {"type": type(error).__name__, "message": str(error)}
        outcome = Outcome.ERROR
    elapsed = time.perf_counter() - start
    if any(entry.get("sampled") for entry in data["certificates"]):
        context.note_once("sampled-certificate", SAMPLED_NOTE)

    report = Report(
        scenario=scenario.name,
        action=scenario.action,
        outcome=outcome,
        exit_code=EXIT_CODES[outcome],
        tool=cfg.tool_name,
        version=cfg.tool_version,
        seed=scenario.seed,
        notes=dict(context.notes),
        timing={"seconds": elapsed},
        **data,
    )
    logger.info("Cenário '%s': %s (código %d)", scenario.name, outcome.value, report.exit_code)
    if report_path is not None:
        write_report(report, report_path)
    return report


def canonical_json(report: Report) -> str:
    """Report JSON without timing; identical across runs with the same scenario and seed."""
    return dumps_report(report.canonical(), indent=ScenarioConfig.load().report_indent)


def write_report(report: Report, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        dumps_report(report.model_dump(mode="json"), indent=ScenarioConfig.load().report_indent) + "\n",
        encoding="utf-8",
    )
    logger.info("Relatório gravado em %s", path)
    return path
