from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
from scipy.linalg import lstsq, lu_factor, lu_solve, qr, solve_triangular, svdvals

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_core import operator_norm
from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape
from LaxMilgramPro.errors import (
    LevelCertificateFailed,
    NotNested,
    ResidualTooLarge,
    ShapeMismatch,
    SingularOperator,
)
from LaxMilgramPro.Forms.forms_models import CertificationRoute, CoercivityCertificate, SesquilinearForm
from LaxMilgramPro.Module.module_models import DualFunctional, ModuleElement, Submodule
from LaxMilgramPro.Module.module_space import functional_norm, module_norm, represent_functional
from LaxMilgramPro.Solver.solver_config import SolverConfig
from LaxMilgramPro.Solver.solver_models import FlattenedSystem, LevelResult, SolveResult, SolveStatus

logger = logging.getLogger(__name__)


def _cfg() -> SolverConfig:
    return SolverConfig.load()


def flatten(B: SesquilinearForm, probes: int = 5, seed: int = 0) -> FlattenedSystem:
    """Scalar matrix of T; A-linearity of the matrix action is re-checked on random probes."""
    matrix = B.flat_matrix()
    rng = np.random.default_rng(seed)
    defect = 0.0
    for _ in range(probes):
        x = ModuleElement.random(B.domain, rng)
        a = AlgebraElement.random(B.domain.shape, rng)
        direct = (B.apply(x) @ a).flatten()
        through_matrix = matrix @ (x @ a).flatten()
        scale = max(float(np.linalg.norm(direct)), 1.0)
        defect = max(defect, float(np.linalg.norm(direct - through_matrix)) / scale)
    if defect > 1e-9:
        logger.warning("Matriz achatada não comuta com a ação de A (defeito %.3e)", defect)
    return FlattenedSystem(B.domain, B.codomain, matrix, linearity_defect=defect)


def first_variable_nondegenerate(B: SesquilinearForm, rank_tol: float | None = None) -> bool:
    """B(x, ·) = 0 forces x = 0, i.e. T is injective."""
    rank_tol = AlgebraConfig.load().rank_tol if rank_tol is None else rank_tol
    scale = B.norm()
    if scale == 0.0:
        return False
    for block in B.block_operators():
        sigma = svdvals(block)
        if block.shape[0] < block.shape[1] or sigma[-1] <= rank_tol * scale:
            return False
    return True


def _probe_residual(
    B: SesquilinearForm,
    tau: DualFunctional,
    x: ModuleElement,
    probes: int,
    rng: np.random.Generator,
    subspace: Submodule | None = None,
) -> float:
    """sup over probe y of ‖B(x, y) − τ(y)‖ / ‖y‖."""
    worst = 0.0
    for _ in range(probes):
        y = ModuleElement.random(B.codomain, rng)
        if subspace is not None:
            y = subspace.project(y)
        norm = module_norm(y)
        if norm <= 1e-14:
            continue
        worst = max(worst, operator_norm(B(x, y) - tau(y)) / norm)
    return worst


def _bound(tau: DualFunctional, x: ModuleElement, c: float, seed: int) -> tuple[float, bool, float, float]:
    norm_tau = functional_norm(tau, seed=seed)
    x_norm = module_norm(x)
    slack = norm_tau.value / c - x_norm
    if norm_tau.sampled:
        logger.warning("Cota ‖x‖ ≤ ‖τ‖/c testada com ‖τ‖ amostrado (limite inferior)")
    return slack, norm_tau.sampled, norm_tau.value, x_norm


def _lu_path(matrix: np.ndarray, rhs: np.ndarray, refinement_steps: int, rank_tol: float) -> np.ndarray:
    lu, piv = lu_factor(matrix, check_finite=False)
    pivots = np.abs(np.diag(lu))
    smallest = float(pivots.min()) if pivots.size else 0.0
    if pivots.size == 0 or smallest <= rank_tol * float(pivots.max()):
        raise SingularOperator(smallest)
    solution = lu_solve((lu, piv), rhs, check_finite=False)
    for _ in range(refinement_steps):
        solution = solution + lu_solve((lu, piv), rhs - matrix @ solution, check_finite=False)
    return solution


def _qr_path(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Independent solve through QR with column pivoting."""
    q, r, perm = qr(matrix, pivoting=True, check_finite=False)
    solution = np.empty_like(rhs)
    solution[perm] = solve_triangular(r, q.conj().T @ rhs, check_finite=False)
    return solution


def _require_certificate(cert: CoercivityCertificate | None) -> None:
    if cert is None:
        raise ValueError("a coercivity certificate is required")
    if not cert.holds:
        raise ValueError(
            f"certificate for c={cert.c:g} is refuted by {len(cert.violations)} violation(s); it cannot back a solve"
        )


def lax_milgram_solve(
    B: SesquilinearForm,
    tau: DualFunctional,
    cert: CoercivityCertificate,
    tol: float | None = None,
    probes: int | None = None,
    seed: int = 0,
) -> SolveResult:
    """The unique x with B(x, y) = τ(y) for all y, from T x = z_τ."""
    cfg = _cfg()
    tol = cfg.solver_tol if tol is None else tol
    probes = cfg.probes if probes is None else probes
    _require_certificate(cert)
    if tau.space != B.codomain:
        raise ShapeMismatch(f"functional lives on {tau.space}, form codomain is {B.codomain}")

    system = flatten(B, seed=seed)
    if not system.square:
        raise SingularOperator(0.0)
    z = represent_functional(tau, seed=seed).flatten()
    rank_tol = AlgebraConfig.load().rank_tol
    primary = _lu_path(system.matrix, z, cfg.refinement_steps, rank_tol)
    secondary = _qr_path(system.matrix, z)
    gap = float(np.linalg.norm(primary - secondary)) / max(float(np.linalg.norm(primary)), 1.0)
    unique = gap <= cfg.uniqueness_tol
    if not unique:
        logger.error("Caminhos LU e QR divergem (%.3e > %.1e): unicidade não confirmada", gap, cfg.uniqueness_tol)

    x = system.unflatten(primary)
    residual = _probe_residual(B, tau, x, probes, np.random.default_rng(seed))
    slack, sampled, norm_tau, x_norm = _bound(tau, x, cert.c, seed)
    if residual > tol * max(1.0, norm_tau):
        raise ResidualTooLarge(residual, tol)

    ok = slack >= -cfg.bound_slack_tol
    if not ok:
        logger.error("Cota de Lax–Milgram violada: ‖x‖ = %.6g > ‖τ‖/c = %.6g", x_norm, norm_tau / cert.c)
    logger.info("Solução obtida: resíduo %.3e, folga da cota %.3e", residual, slack)
    if not ok:
        status = SolveStatus.BOUND_VIOLATED
    elif not unique:
        status = SolveStatus.NOT_UNIQUE
    else:
        status = SolveStatus.SUCCESS
    return SolveResult(
        solution=x,
        residual=residual,
        norm_bound_ok=ok,
        bound_slack=slack,
        solution_norm=x_norm,
        functional_norm=norm_tau,
        functional_norm_sampled=sampled,
        c=cert.c,
        route=cert.route,
        status=status,
        uniqueness_gap=gap,
        nondegenerate=first_variable_nondegenerate(B),
    )


# ---------------------------------------------------------------------------
# Directed families
# ---------------------------------------------------------------------------


def _check_nested(family: Sequence[Submodule], tol: float) -> None:
    for level in range(len(family) - 1):
        if not family[level + 1].contains_submodule(family[level], atol=tol):
            raise NotNested(level)


def _compress(matrix: np.ndarray, X_level: Submodule, Y_level: Submodule) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s_x = X_level.flat_basis
    s_y = Y_level.flat_basis
    return s_y.conj().T @ matrix @ s_x, s_x, s_y


def inf_sup_constant(B: SesquilinearForm, X_level: Submodule, Y_level: Submodule) -> float:
    """σ_min of B restricted to X_level × Y_level; zero when Y_level is larger than X_level."""
    k_matrix, _, _ = _compress(B.flat_matrix(), X_level, Y_level)
    if k_matrix.size == 0 or k_matrix.shape[0] > k_matrix.shape[1]:
        return 0.0
    return float(svdvals(k_matrix)[-1])


def directed_family_solve(
    B: SesquilinearForm,
    tau: DualFunctional,
    X_family: Sequence[Submodule],
    Y_family: Sequence[Submodule],
    cert: CoercivityCertificate,
    tol: float | None = None,
    probes: int | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> SolveResult:
    """Solve B_λ(x_λ, v) = τ(v) on X_λ × Y_λ for every level and return the last level's solution.

    Y_family must increase. Each level uses the compressed operator
    K_λ = S_Yᴴ F S_X, whose smallest singular value must reach c.
    """
    cfg = _cfg()
    tol = cfg.solver_tol if tol is None else tol
    probes = cfg.probes if probes is None else probes
    workers = cfg.workers if workers is None else workers
    _require_certificate(cert)
    if len(X_family) != len(Y_family) or not X_family:
        raise ValueError("X_family and Y_family must be non-empty and of equal length")
    for Y_level in Y_family:
        if Y_level.ambient != B.codomain:
            raise ShapeMismatch("Y family lives outside the form codomain")
    for X_level in X_family:
        if X_level.ambient != B.domain:
            raise ShapeMismatch("X family lives outside the form domain")
    _check_nested(Y_family, cfg.nesting_tol)

    matrix = flatten(B, seed=seed).matrix
    z = represent_functional(tau, seed=seed).flatten()
    rank_tol = AlgebraConfig.load().rank_tol

    def solve_level(level: int) -> tuple[ModuleElement, LevelResult]:
        X_level, Y_level = X_family[level], Y_family[level]
        k_matrix, s_x, s_y = _compress(matrix, X_level, Y_level)
        rows, cols = k_matrix.shape
        if rows > cols or k_matrix.size == 0:
            raise LevelCertificateFailed(level, 0.0, cert.c)
        constant = float(svdvals(k_matrix)[-1])
        if constant < cert.c - cfg.level_tol:
            raise LevelCertificateFailed(level, constant, cert.c)
        rhs = s_y.conj().T @ z
        if rows == cols:
            coefficients = _lu_path(k_matrix, rhs, cfg.refinement_steps, rank_tol)
        else:
            coefficients = lstsq(k_matrix, rhs)[0]
        x_level = ModuleElement.unflatten(B.domain, s_x @ coefficients)
        residual = _probe_residual(B, tau, x_level, probes, np.random.default_rng(seed + level), Y_level)
        return x_level, LevelResult(
            level=level,
            dimension_x=cols,
            dimension_y=rows,
            constant=constant,
            residual=residual,
            solution_norm=module_norm(x_level),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(solve_level, range(len(Y_family))))
    else:
        outcomes = [solve_level(level) for level in range(len(Y_family))]

    solutions = [solution for solution, _ in outcomes]
    levels = [result for _, result in outcomes]
    final = solutions[-1]

    residual = 0.0
    rng = np.random.default_rng(seed + len(Y_family))
    for Y_level in Y_family:
        residual = max(residual, _probe_residual(B, tau, final, probes, rng, Y_level))
    slack, sampled, norm_tau, x_norm = _bound(tau, final, cert.c, seed)
    worst_level = max(level.residual for level in levels)
    if max(residual, worst_level) > tol * max(1.0, norm_tau):
        raise ResidualTooLarge(max(residual, worst_level), tol)

    cauchy = [module_norm(solutions[i] - solutions[i + 1]) for i in range(len(solutions) - 1)]
    distance = [module_norm(solution - final) for solution in solutions]
    ok = slack >= -cfg.bound_slack_tol
    logger.info("Família dirigida com %d níveis resolvida (resíduo %.3e)", len(levels), residual)
    return SolveResult(
        solution=final,
        residual=residual,
        norm_bound_ok=ok,
        bound_slack=slack,
        solution_norm=x_norm,
        functional_norm=norm_tau,
        functional_norm_sampled=sampled,
        c=cert.c,
        route=cert.route,
        status=SolveStatus.SUCCESS if ok else SolveStatus.BOUND_VIOLATED,
        levels=levels,
        cauchy_profile=cauchy,
        distance_to_final=distance,
    )


def hilbert_space_solve(
    B: SesquilinearForm,
    tau: DualFunctional,
    X_family: Sequence[Submodule] | None = None,
    Y_family: Sequence[Submodule] | None = None,
    c: float | None = None,
    **kwargs,
) -> SolveResult:
    """Scalar case A = ℂ, certified by |B(x, y)| ≥ c‖x‖‖y‖ level by level."""
    if B.domain.shape != AlgebraShape((1,)):
        raise ShapeMismatch(f"hilbert_space_solve needs A = ℂ, got shape {B.domain.shape.block_dims}")
    X_family = list(X_family) if X_family else [Submodule.whole(B.domain)]
    Y_family = list(Y_family) if Y_family else [Submodule.whole(B.codomain)]
    if c is None:
        c = min(inf_sup_constant(B, X, Y) for X, Y in zip(X_family, Y_family))
    if c <= 0.0:
        raise LevelCertificateFailed(0, c, 0.0)
    cert = CoercivityCertificate(c=c, k=1.0, route=CertificationRoute.INF_SUP, sampled=False, form_norm=B.norm())
    return directed_family_solve(B, tau, X_family, Y_family, cert, **kwargs)
