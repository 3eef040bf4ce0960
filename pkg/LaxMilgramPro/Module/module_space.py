from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_core import hermitian_eigensystem, operator_norm, positive_sqrt
from LaxMilgramPro.Algebra.algebra_models import AlgebraElement
from LaxMilgramPro.errors import NotFull, NotLinear, ShapeMismatch
from LaxMilgramPro.Module.module_models import (
    ComplementationCheck,
    DualFunctional,
    FunctionalNorm,
    ModuleElement,
    ModuleSpace,
    Submodule,
)

logger = logging.getLogger(__name__)


def inner_product(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """⟨x, y⟩ = Σₖ xₖ* yₖ, A-linear in y."""
    if x.space != y.space:
        raise ShapeMismatch(f"inner product across different spaces: {x.space} vs {y.space}")
    total = AlgebraElement.zeros(x.space.shape)
    for xk, yk in zip(x.components, y.components):
        total = total + xk.adjoint() @ yk
    return total


def module_norm(x: ModuleElement) -> float:
    """‖x‖ = ‖⟨x, x⟩‖^{1/2}."""
    return float(np.sqrt(operator_norm(inner_product(x, x))))


def abs_module(x: ModuleElement) -> AlgebraElement:
    """|x| = ⟨x, x⟩^{1/2}."""
    return positive_sqrt(inner_product(x, x))


def random_unit(space: ModuleSpace, rng: np.random.Generator) -> ModuleElement:
    x = ModuleElement.random(space, rng)
    return x / module_norm(x)


def relative_defect(left: AlgebraElement, right: AlgebraElement) -> float:
    scale = max(left.frobenius_norm(), right.frobenius_norm(), 1.0)
    return (left - right).frobenius_norm() / scale


def _linearity_budget(probes: int | None, tol: float | None) -> tuple[int, float]:
    cfg = AlgebraConfig.load()
    return (
        cfg.linearity_probes if probes is None else probes,
        cfg.linearity_tol if tol is None else tol,
    )


def check_linearity(
    tau: DualFunctional, probes: int | None = None, seed: int = 0, tol: float | None = None
) -> None:
    """Check τ(y·b) = τ(y)·b and additivity on random inputs."""
    probes, tol = _linearity_budget(probes, tol)
    rng = np.random.default_rng(seed)
    space = tau.space
    for probe in range(probes):
        y = ModuleElement.random(space, rng)
        y2 = ModuleElement.random(space, rng)
        b = AlgebraElement.random(space.shape, rng)
        value = tau(y)
        defect = max(
            relative_defect(tau(y @ b), value @ b),
            relative_defect(tau(y + y2), value + tau(y2)),
        )
        if defect > tol:
            raise NotLinear(defect, probe)


def represent_functional(
    tau: DualFunctional, probes: int | None = None, seed: int = 0, tol: float | None = None
) -> ModuleElement:
    """z with τ(y) = ⟨z, y⟩; read off the standard generators as zₖ = τ(eₖ)*."""
    if tau.representer is not None:
        return tau.representer
    probes, tol = _linearity_budget(probes, tol)
    check_linearity(tau, probes=probes, seed=seed, tol=tol)
    space = tau.space
    z = ModuleElement(
        space, tuple(tau(ModuleElement.basis(space, k)).adjoint() for k in range(space.rank))
    )

    rng = np.random.default_rng(seed + 1)
    for probe in range(probes):
        y = ModuleElement.random(space, rng)
        defect = relative_defect(tau(y), inner_product(z, y))
        if defect > tol:
            raise NotLinear(defect, probe)
    return z


def functional_norm(tau: DualFunctional, samples: int = 1000, seed: int = 0) -> FunctionalNorm:
    """‖τ‖: exact for representer functionals, a sampled lower bound otherwise."""
    if tau.representer is not None:
        return FunctionalNorm(value=module_norm(tau.representer), sampled=False)

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        best = max(best, operator_norm(tau(random_unit(tau.space, rng))))

    z = represent_functional(tau, seed=seed)
    z_norm = module_norm(z)
    if z_norm > 0.0:
        best = max(best, operator_norm(tau(z / z_norm)))
    logger.warning("‖τ‖ estimado por amostragem (%d amostras): %.6g", samples, best)
    return FunctionalNorm(value=best, sampled=True, samples=samples)


# ---------------------------------------------------------------------------
# Submodules
# ---------------------------------------------------------------------------


def project_onto(Y: Submodule, x: ModuleElement) -> ModuleElement:
    """y₀ ∈ Y with x − y₀ ⊥ Y."""
    return Y.project(x)


def orthogonal_complement(Y: Submodule) -> Submodule:
    """Y^⊥, generated by w·e₁ᵀ for each basis vector w of Wᵢ^⊥ in each block."""
    space = Y.ambient
    generators = []
    for i, (n, basis) in enumerate(zip(space.shape.block_dims, Y.complement_bases)):
        for j in range(basis.shape[1]):
            stacked = [np.zeros((space.rank * m, m), dtype=complex) for m in space.shape.block_dims]
            stacked[i][:, 0] = basis[:, j]
            generators.append(ModuleElement.from_stacked(space, stacked))
    return Submodule(space, tuple(generators), rank_tol=Y.rank_tol)


def is_self_dual(Y: Submodule, tol: float = 1e-9) -> ComplementationCheck:
    """Y ⊕ Y^⊥ = X, measured as ‖P_Y + P_{Y^⊥} − 1‖ per block."""
    complement = orthogonal_complement(Y)
    defect = 0.0
    for p, p_perp in zip(Y.projections, complement.projections):
        defect = max(defect, float(np.linalg.norm(p + p_perp - np.eye(p.shape[0]), 2)))
    return ComplementationCheck(complemented=defect <= tol, defect=defect)


def represent_on_submodule(Y: Submodule, tau: DualFunctional) -> ModuleElement:
    """Representer inside Y of a functional restricted to Y.

    τ is extended to X by τ∘P_Y; the representer of the extension is orthogonal
    to Y^⊥ and therefore lies in Y.
    """
    extended = DualFunctional.from_callable(Y.ambient, lambda y: tau(Y.project(y)), name=f"{tau.name}|Y")
    return Y.project(represent_functional(extended))


# ---------------------------------------------------------------------------
# Fullness
# ---------------------------------------------------------------------------


def _inverse_sqrt(s: AlgebraElement) -> AlgebraElement:
    return hermitian_eigensystem(s).apply(lambda w: 1.0 / np.sqrt(w))


def fullness_witnesses(
    X: ModuleSpace, generators: Sequence[ModuleElement], rank_tol: float | None = None
) -> list[ModuleElement]:
    """Elements w₁,…,w_m of the module generated by ``generators`` with Σ⟨wᵢ, wᵢ⟩ = 1.

    When s = Σ⟨xᵢ, xᵢ⟩ is invertible the witnesses are xᵢ·s^{-1/2}. Otherwise
    each block i needs a unit vector qᵢ in the joint column space Wᵢ, and
    wⱼ = ⊕ᵢ qᵢ eⱼᵀ for j < max nᵢ.
    """
    rank_tol = AlgebraConfig.load().rank_tol if rank_tol is None else rank_tol
    for g in generators:
        if g.space != X:
            raise ShapeMismatch("generator lives in a different module space")

    if generators:
        s = AlgebraElement.zeros(X.shape)
        for g in generators:
            s = s + inner_product(g, g)
        system = hermitian_eigensystem(s)
        scale = system.max_eigenvalue
        if scale > 0.0 and system.min_eigenvalue > rank_tol * scale:
            root = _inverse_sqrt(s)
            return [g @ root for g in generators]

    Y = Submodule(X, tuple(generators), rank_tol=rank_tol)
    missed = [i for i, r in enumerate(Y.block_ranks) if r == 0]
    if missed:
        dimension = sum(X.shape.block_dims[i] ** 2 for i in missed)
        raise NotFull(dimension, missed)

    witnesses = []
    for j in range(max(X.shape.block_dims)):
        stacked = []
        for q, n in zip(Y.bases, X.shape.block_dims):
            block = np.zeros((X.rank * n, n), dtype=complex)
            if j < n:
                block[:, j] = q[:, 0]
            stacked.append(block)
        witnesses.append(ModuleElement.from_stacked(X, stacked))
    logger.debug("Testemunhas de plenitude via espaço de colunas (m = %d)", len(witnesses))
    return witnesses


def is_full(X: ModuleSpace, generators: Sequence[ModuleElement]) -> bool:
    try:
        fullness_witnesses(X, generators)
    except NotFull:
        return False
    return True
