from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from scipy.linalg import eigvalsh, svd
from tqdm import tqdm

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_core import is_positive, polar_decompose
from LaxMilgramPro.Algebra.algebra_models import AlgebraElement
from LaxMilgramPro.errors import NotPositiveOperator, NotSesquilinear, NoWitnessFound, ShapeMismatch, Singular
from LaxMilgramPro.Forms.forms_config import FormsConfig
from LaxMilgramPro.Forms.forms_models import (
    BoundedBelow,
    CertificationRoute,
    CoercivityCertificate,
    SesquilinearForm,
    Violation,
    Witness,
    WitnessRecord,
    WitnessRoute,
)
from LaxMilgramPro.Module.module_models import DualFunctional, ModuleElement, ModuleSpace
from LaxMilgramPro.Module.module_space import (
    abs_module,
    fullness_witnesses,
    inner_product,
    module_norm,
    random_unit,
    relative_defect,
    represent_functional,
)
from LaxMilgramPro.States.state_models import PureState, StateSample
from LaxMilgramPro.States.state_space import evaluate, evaluate_real
from LaxMilgramPro.utils.serialization import encode_module_element, encode_state

logger = logging.getLogger(__name__)

BlackBoxForm = Callable[[ModuleElement, ModuleElement], AlgebraElement]


def _cfg() -> FormsConfig:
    return FormsConfig.load()


def evaluate_form(B: SesquilinearForm, x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """B(x, y) = ⟨Tx, y⟩."""
    if y.space != B.codomain:
        raise ShapeMismatch(f"form codomain is {B.codomain}, got element of {y.space}")
    return B(x, y)


def form_norm(B: SesquilinearForm) -> float:
    return B.norm()


def is_invertible(B: SesquilinearForm, rank_tol: float | None = None) -> bool:
    rank_tol = AlgebraConfig.load().rank_tol if rank_tol is None else rank_tol
    if B.domain.rank != B.codomain.rank:
        return False
    scale = B.norm()
    return scale > 0.0 and all(s[-1] > rank_tol * scale for s in B.block_singular_values())


# ---------------------------------------------------------------------------
# Operator recovery
# ---------------------------------------------------------------------------


def check_sesquilinear(
    black_box: BlackBoxForm,
    domain: ModuleSpace,
    codomain: ModuleSpace,
    probes: int | None = None,
    seed: int = 0,
    tol: float | None = None,
) -> None:
    cfg = _cfg()
    probes = cfg.linearity_probes if probes is None else probes
    tol = cfg.sesquilinear_tol if tol is None else tol
    rng = np.random.default_rng(seed)
    for probe in range(probes):
        x, x2 = ModuleElement.random(domain, rng), ModuleElement.random(domain, rng)
        y, y2 = ModuleElement.random(codomain, rng), ModuleElement.random(codomain, rng)
        a = AlgebraElement.random(domain.shape, rng)
        b = AlgebraElement.random(domain.shape, rng)
        base = black_box(x, y)
        checks = {
            "right": (black_box(x, y @ b), base @ b),
            "left": (black_box(x @ a, y), a.adjoint() @ base),
            "additive_x": (black_box(x + x2, y), base + black_box(x2, y)),
            "additive_y": (black_box(x, y + y2), base + black_box(x, y2)),
        }
        for check, (lhs, rhs) in checks.items():
            defect = relative_defect(lhs, rhs)
            if defect > tol:
                raise NotSesquilinear({"probe": probe, "check": check, "defect": defect})


def operator_of_form(
    black_box: BlackBoxForm,
    domain: ModuleSpace,
    codomain: ModuleSpace,
    probes: int | None = None,
    seed: int = 0,
    tol: float | None = None,
) -> SesquilinearForm:
    """Recover T with B(x, y) = ⟨Tx, y⟩ column by column: T(eₖ) represents y ↦ B(eₖ, y)."""
    cfg = _cfg()
    probes = cfg.probes if probes is None else probes
    tol = cfg.sesquilinear_tol if tol is None else tol
    check_sesquilinear(black_box, domain, codomain, seed=seed, tol=tol)

    columns = []
    for k in range(domain.rank):
        e_k = ModuleElement.basis(domain, k)
        tau = DualFunctional.from_callable(codomain, lambda y, e_k=e_k: black_box(e_k, y), name=f"B(e{k}, ·)")
        columns.append(represent_functional(tau, probes=cfg.linearity_probes, seed=seed + k, tol=tol))
    operator = tuple(
        tuple(columns[c].components[r] for c in range(domain.rank)) for r in range(codomain.rank)
    )
    form = SesquilinearForm(domain, codomain, operator, name="recovered")

    rng = np.random.default_rng(seed + domain.rank + 1)
    for probe in range(probes):
        x = ModuleElement.random(domain, rng)
        y = ModuleElement.random(codomain, rng)
        defect = relative_defect(black_box(x, y), form(x, y))
        if defect > tol:
            raise NotSesquilinear({"probe": probe, "check": "reconstruction", "defect": defect})

    logger.info(
        "Operador recuperado (%d×%d sobre A): ‖T‖ = %.6g, invertível = %s",
        codomain.rank,
        domain.rank,
        form.norm(),
        is_invertible(form),
    )
    return form


# ---------------------------------------------------------------------------
# Analytic certificates
# ---------------------------------------------------------------------------


def _fullness_k(space: ModuleSpace) -> float:
    """k = 1/m for a fullness witness family of size m."""
    return 1.0 / len(fullness_witnesses(space, [ModuleElement.basis(space, 0)]))


def certify_positive_invertible(B: SesquilinearForm) -> CoercivityCertificate:
    """c = ‖T⁻¹‖⁻¹ for positive invertible T, i.e. the smallest eigenvalue of the flattened operator."""
    if B.domain != B.codomain:
        raise ShapeMismatch("positive operators act on a single module")
    alg = AlgebraConfig.load()
    scale = B.norm()

    lowest, lowest_block = math.inf, 0
    for i, block in enumerate(B.block_operators()):
        hermitian_part = 0.5 * (block + block.conj().T)
        spectrum = eigvalsh(hermitian_part)
        if np.linalg.norm(block - block.conj().T) > alg.hermitian_tol * max(scale, 1.0):
            raise NotPositiveOperator(float(spectrum[0]))
        if spectrum[0] < lowest:
            lowest, lowest_block = float(spectrum[0]), i

    if lowest < -alg.positivity_tol * scale:
        raise NotPositiveOperator(lowest)
    if scale == 0.0 or lowest <= alg.rank_tol * scale:
        raise Singular(lowest_block, max(lowest, 0.0))

    certificate = CoercivityCertificate(
        c=lowest,
        k=_fullness_k(B.domain),
        route=CertificationRoute.POSITIVE_INVERTIBLE,
        sampled=False,
        form_norm=scale,
    )
    logger.info("Certificado positivo-invertível: c = %.6g, k = %.3g, ‖B‖ = %.6g", certificate.c, certificate.k, scale)
    return certificate


def certify_inner_product(B: SesquilinearForm, tol: float = 1e-10) -> CoercivityCertificate:
    """B = ⟨·,·⟩: the witness y = z + z′ gives c = 1 for every (f, x)."""
    if B.domain != B.codomain:
        raise ShapeMismatch("the inner product form acts on a single module")
    if not B.allclose(SesquilinearForm.inner_product_form(B.domain), atol=tol):
        raise ValueError(f"form '{B.name}' is not the module inner product")
    return CoercivityCertificate(
        c=1.0,
        k=_fullness_k(B.domain),
        route=CertificationRoute.INNER_PRODUCT,
        sampled=False,
        form_norm=1.0,
    )


def bounded_below_constant(B: SesquilinearForm, c: float, k: float = 1.0, tol: float = 1e-9) -> BoundedBelow:
    """inf ‖Tx‖/‖x‖, compared with c·k."""
    if B.codomain.rank < B.domain.rank:
        constant = 0.0
    else:
        constant = float(min(s[-1] for s in B.block_singular_values()))
    required = c * k
    return BoundedBelow(constant=constant, required=required, holds=constant >= required - tol)


def remark_inequality_margin(B: SesquilinearForm, x: ModuleElement, c: float) -> float:
    """Smallest eigenvalue of ⟨Tx, Tx⟩ − c²⟨x, x⟩."""
    tx = B.apply(x)
    return is_positive(inner_product(tx, tx) - inner_product(x, x) * (c * c)).margin


# ---------------------------------------------------------------------------
# Witness search
# ---------------------------------------------------------------------------


def _score(
    B: SesquilinearForm, f: PureState, x: ModuleElement, y: ModuleElement, fx: float, c: float, route: WitnessRoute
) -> Witness:
    k_value = evaluate_real(f, abs_module(y))
    lhs = abs(evaluate(f, B(x, y)))
    return Witness(y=y, lhs=lhs, rhs=c * fx * k_value, k_value=k_value, route=route)


def _polar_candidate(tx: ModuleElement) -> ModuleElement | None:
    """y = u from Tx = u·h; then ⟨Tx, y⟩ = h."""
    if tx.space.rank != 1:
        return None
    return ModuleElement(tx.space, (polar_decompose(tx.components[0]).unitary,))


def _inner_product_candidate(tx: ModuleElement) -> ModuleElement:
    """y = z + z′ with z = Tx·|Tx|⁺, ⟨z, z⟩ = p and ⟨z′, z′⟩ = 1 − p, so ⟨Tx, y⟩ = |Tx|.

    Per block this is W·V* from the thin SVD Tx = W Σ V*.
    """
    stacked = []
    for i in range(tx.space.shape.num_blocks):
        left, _, right_h = svd(tx.stacked(i), full_matrices=False)
        stacked.append(left @ right_h)
    return ModuleElement.from_stacked(tx.space, stacked)


def _state_direction(tx: ModuleElement, f: PureState) -> np.ndarray:
    """Flat a with f(⟨Tx, y⟩) = vdot(a, flat(y)); a = Tx·vv* in the state's block."""
    stacked = [np.zeros_like(tx.stacked(i)) for i in range(tx.space.shape.num_blocks)]
    stacked[f.block] = tx.stacked(f.block) @ np.outer(f.vector, f.vector.conj())
    return ModuleElement.from_stacked(tx.space, stacked).flatten()


def _normalised(space: ModuleSpace, flat: np.ndarray) -> ModuleElement | None:
    y = ModuleElement.unflatten(space, flat)
    norm = module_norm(y)
    if norm <= 1e-12 * max(float(np.linalg.norm(flat)), 1.0):
        return None
    return y / norm


def _better(candidate: Witness, best: Witness | None, k: float, tol: float) -> bool:
    if best is None:
        return True
    feasible, best_feasible = candidate.k_value >= k - tol, best.k_value >= k - tol
    if feasible != best_feasible:
        return feasible
    return candidate.slack > best.slack


def _ascent(
    B: SesquilinearForm,
    f: PureState,
    x: ModuleElement,
    fx: float,
    k: float,
    c: float,
    steps: int,
    restarts: int,
    step: float,
    seed: int,
    tol: float,
) -> Witness:
    """Projected ascent on |f(B(x, y))| over the unit sphere of the codomain."""
    space = B.codomain
    a = _state_direction(B.apply(x), f)
    best: Witness | None = None
    if not np.any(a):
        raise NoWitnessFound(best)

    for restart, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        start = a if restart == 0 else ModuleElement.random(space, rng).flatten()
        y = _normalised(space, start)
        if y is None:
            continue
        for _ in range(steps):
            candidate = _score(B, f, x, y, fx, c, WitnessRoute.ASCENT)
            if candidate.k_value >= k - tol and candidate.slack >= -tol:
                return candidate
            if _better(candidate, best, k, tol):
                best = candidate
            flat = y.flatten()
            phi = np.vdot(a, flat)
            phase = phi / abs(phi) if abs(phi) > 0.0 else 1.0
            moved = _normalised(space, flat + step * phase * a / np.linalg.norm(a))
            if moved is None:
                break
            y = moved
    raise NoWitnessFound(best)


def witness_for_state(
    B: SesquilinearForm,
    f: PureState,
    x: ModuleElement,
    k: float = 1.0,
    c: float = 1.0,
    steps: int | None = None,
    restarts: int | None = None,
    seed: int = 0,
) -> Witness:
    """Find y with ‖y‖ = 1, f(|y|) ≥ k and |f(B(x, y))| ≥ c·f(|x|)·f(|y|).

    Tries the polar route (rank-one codomain), then the inner-product route,
    then seeded projected ascent. NoWitnessFound means inconclusive.
    """
    cfg = _cfg()
    tol = cfg.witness_slack_tol
    steps = cfg.ascent_steps if steps is None else steps
    restarts = cfg.ascent_restarts if restarts is None else restarts

    fx = evaluate_real(f, abs_module(x))
    if fx <= tol:
        y = ModuleElement.basis(B.codomain, 0)
        return Witness(y=y, lhs=abs(evaluate(f, B(x, y))), rhs=0.0, k_value=1.0, route=WitnessRoute.VACUOUS)

    tx = B.apply(x)
    candidates = (
        (WitnessRoute.POLAR, lambda: _polar_candidate(tx)),
        (WitnessRoute.INNER_PRODUCT, lambda: _inner_product_candidate(tx)),
    )
    for route, build in candidates:
        y = build()
        if y is None:
            continue
        witness = _score(B, f, x, y, fx, c, route)
        if witness.k_value >= k - tol and witness.slack >= -tol:
            return witness

    logger.debug("Rotas analíticas falharam para o estado no bloco %d; iniciando subida", f.block)
    return _ascent(B, f, x, fx, k, c, steps, restarts, cfg.ascent_step, seed, tol)


def witness_for_state_dual(
    B: SesquilinearForm,
    f: PureState,
    y: ModuleElement,
    k: float = 1.0,
    c: float = 1.0,
    steps: int | None = None,
    restarts: int | None = None,
    seed: int = 0,
) -> Witness:
    """Second condition: x with ‖x‖ = 1, f(|x|) ≥ k and |f(B(x, y))| ≥ c·f(|x|)·f(|y|).

    |f(B(x, y))| = |f(B*(y, x))|, so this is the first condition for the adjoint form.
    """
    return witness_for_state(B.adjoint(), f, y, k=k, c=c, steps=steps, restarts=restarts, seed=seed)


def _record(condition: str, f: PureState, given: ModuleElement, witness: Witness) -> WitnessRecord:
    return WitnessRecord(
        condition=condition,
        state=encode_state(f),
        given=encode_module_element(given),
        witness=encode_module_element(witness.y),
        lhs=witness.lhs,
        rhs=witness.rhs,
        k_value=witness.k_value,
        route=witness.route,
    )


def certify_by_witnesses(
    B: SesquilinearForm,
    c: float,
    k: float,
    sample: StateSample,
    probes: int = 10,
    seed: int = 0,
    workers: int | None = None,
    progress: bool = False,
) -> CoercivityCertificate:
    """Check both witness conditions on sampled (f, x) and (f, y) pairs; the result is marked sampled."""
    workers = _cfg().workers if workers is None else workers
    children = np.random.SeedSequence(seed).spawn(len(sample))

    def scan(index: int) -> tuple[list[WitnessRecord], int]:
        f = sample[index]
        rng = np.random.default_rng(children[index])
        records, inconclusive = [], 0
        for probe in range(probes):
            x = random_unit(B.domain, rng)
            y = random_unit(B.codomain, rng)
            search_seed = int(rng.integers(2**31))
            for condition, given, search in (
                ("main", x, witness_for_state),
                ("main2", y, witness_for_state_dual),
            ):
                try:
                    witness = search(B, f, given, k=k, c=c, seed=search_seed)
                except NoWitnessFound:
                    inconclusive += 1
                    continue
                records.append(_record(condition, f, given, witness))
        return records, inconclusive

    indices = tqdm(range(len(sample)), disable=not progress, desc="testemunhas")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan, indices))
    else:
        results = [scan(index) for index in indices]

    records = [record for batch, _ in results for record in batch]
    inconclusive = sum(count for _, count in results)
    vacuous = sum(record.route is WitnessRoute.VACUOUS for record in records)
    if inconclusive:
        logger.warning("Busca de testemunhas inconclusiva em %d pares", inconclusive)
    return CoercivityCertificate(
        c=c,
        k=k,
        route=CertificationRoute.SEARCH,
        sampled=True,
        seed=seed,
        form_norm=B.norm(),
        witnesses=records,
        inconclusive=inconclusive,
        vacuous=vacuous,
    )


# ---------------------------------------------------------------------------
# Uniform falsification
# ---------------------------------------------------------------------------


def _orthogonal_unit(v: np.ndarray) -> np.ndarray:
    j = int(np.argmin(np.abs(v)))
    e = np.zeros_like(v)
    e[j] = 1.0
    w = e - v * np.vdot(v, e)
    return w / np.linalg.norm(w)


def _embedded(space: ModuleSpace, block: int, matrix: np.ndarray) -> ModuleElement:
    components = [AlgebraElement.zeros(space.shape) for _ in range(space.rank)]
    components[0] = AlgebraElement.embed(space.shape, block, matrix)
    return ModuleElement(space, tuple(components))


def _projection_pair(B: SesquilinearForm, f: PureState) -> tuple[ModuleElement, ModuleElement] | None:
    """x = u₊u₊*, y = u₋u₋* with u± = (v ± w)/√2: x*y = 0 while f(|x|) = f(|y|) = ½."""
    if f.block_dim < 2:
        return None
    v = f.vector
    w = _orthogonal_unit(v)
    plus = (v + w) / math.sqrt(2.0)
    minus = (v - w) / math.sqrt(2.0)
    x = _embedded(B.domain, f.block, np.outer(plus, plus.conj()))
    y = _embedded(B.codomain, f.block, np.outer(minus, minus.conj()))
    return x, y


def _kernel_candidate(B: SesquilinearForm, f: PureState, x: ModuleElement, rng: np.random.Generator):
    a = _state_direction(B.apply(x), f)
    r = ModuleElement.random(B.codomain, rng).flatten()
    weight = np.vdot(a, a)
    flat = r - a * (np.vdot(a, r) / weight) if weight.real > 0.0 else r
    return _normalised(B.codomain, flat)


def _scan_state(
    B: SesquilinearForm,
    c: float,
    f: PureState,
    index: int,
    probes: int,
    rng: np.random.Generator,
    tol: float,
) -> Violation | None:
    for probe in range(probes):
        x = random_unit(B.domain, rng)
        candidates: list[tuple[str, ModuleElement, ModuleElement | None]] = []
        if probe == 0:
            pair = _projection_pair(B, f)
            if pair is not None:
                candidates.append(("projection-pair", *pair))
        candidates.append(("random", x, random_unit(B.codomain, rng)))
        candidates.append(("kernel", x, _kernel_candidate(B, f, x, rng)))
        if B.domain == B.codomain:
            candidates.append(("self", x, x))

        for name, xx, yy in candidates:
            if yy is None:
                continue
            lhs = abs(evaluate(f, B(xx, yy)))
            rhs = c * evaluate_real(f, abs_module(xx)) * evaluate_real(f, abs_module(yy))
            if lhs < rhs - tol:
                return Violation(
                    state_index=index,
                    probe=probe,
                    candidate=name,
                    state=encode_state(f),
                    x=encode_module_element(xx),
                    y=encode_module_element(yy),
                    lhs=lhs,
                    rhs=rhs,
                    c=c,
                )
    return None


def falsify_uniform(
    B: SesquilinearForm,
    c: float,
    sample: StateSample,
    probes: int | None = None,
    seed: int = 0,
    k: float = 1.0,
    workers: int | None = None,
    progress: bool = False,
) -> CoercivityCertificate:
    """Search (f, x, y) with |f(B(x, y))| < c·f(|x|)·f(|y|) − tol; the first hit in index order wins."""
    if c <= 0.0:
        raise ValueError("c must be positive")
    cfg = _cfg()
    probes = cfg.probes if probes is None else probes
    workers = cfg.workers if workers is None else workers
    children = np.random.SeedSequence(seed).spawn(len(sample))

    def scan(index: int) -> Violation | None:
        rng = np.random.default_rng(children[index])
        return _scan_state(B, c, sample[index], index, probes, rng, cfg.violation_tol)

    indices = tqdm(range(len(sample)), disable=not progress, desc="falsificação")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan, indices))
    else:
        results = []
        for index in indices:
            results.append(scan(index))
            if results[-1] is not None:
                break

    first = next((result for result in results if result is not None), None)
    if first is not None:
        logger.info(
            "Violação uniforme: estado %d, sonda %d (%s): lhs = %.3g < rhs = %.3g",
            first.state_index,
            first.probe,
            first.candidate,
            first.lhs,
            first.rhs,
        )
    return CoercivityCertificate(
        c=c,
        k=k,
        route=CertificationRoute.SEARCH,
        sampled=True,
        seed=seed,
        form_norm=B.norm(),
        violations=[first] if first is not None else [],
    )
