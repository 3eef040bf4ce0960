from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import lapack, null_space, solve

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.context import RunContext
from LaxMilgramPro.errors import ShapeMismatch
from LaxMilgramPro.Localization.localization_models import (
    SLOT_CONVENTION,
    LocalizedSpace,
    LocalizedVector,
    PaschkeCheck,
)
from LaxMilgramPro.Module.module_models import DualFunctional, ModuleElement, ModuleSpace
from LaxMilgramPro.Module.module_space import inner_product, module_norm, represent_functional
from LaxMilgramPro.States.state_models import PureState
from LaxMilgramPro.States.state_space import evaluate

logger = logging.getLogger(__name__)


def evaluation_matrix(X: ModuleSpace, f: PureState) -> np.ndarray:
    """Matrix E with E·flat(x) = Xᵢ v, so that f(⟨y, x⟩) = e(y)* e(x)."""
    if f.shape != X.shape:
        raise ShapeMismatch(f"state on {f.shape.block_dims} does not match module over {X.shape.block_dims}")
    n = f.block_dim
    rows = X.rank * n
    matrix = np.zeros((rows, X.flat_dimension), dtype=complex)
    offset = X.block_offsets()[f.block]
    matrix[:, offset : offset + rows * n] = np.kron(np.eye(rows), f.vector[None, :])
    return matrix


def _evaluate_vector(L: LocalizedSpace, x: ModuleElement) -> np.ndarray:
    if x.space != L.source:
        raise ShapeMismatch("element lives in a different module space")
    return x.stacked(L.state.block) @ L.state.vector


def localize_space(
    X: ModuleSpace, f: PureState, rank_tol: float | None = None, context: RunContext | None = None
) -> LocalizedSpace:
    """Coset representatives of X / N_f chosen by pivoted Cholesky on f(⟨·,·⟩).

    Candidates are the flattened coordinate elements of X; the pivots give the
    basis, so the result is deterministic for a fixed input.
    """
    rank_tol = AlgebraConfig.load().rank_tol if rank_tol is None else rank_tol
    if context is not None:
        context.note_once("localization-slots", SLOT_CONVENTION)

    E = evaluation_matrix(X, f)
    gram_full = (E.conj().T @ E).T
    scale = float(np.max(np.real(np.diag(gram_full))))
    _, piv, rank, info = lapack.zpstrf(gram_full, tol=rank_tol * scale, lower=0)
    if info < 0:
        raise ValueError(f"zpstrf rejected argument {-info}")
    pivots = tuple(int(p) - 1 for p in piv[:rank])

    basis = []
    for t in pivots:
        coordinates = np.zeros(X.flat_dimension, dtype=complex)
        coordinates[t] = 1.0
        basis.append(ModuleElement.unflatten(X, coordinates))
    gram = gram_full[np.ix_(pivots, pivots)]
    logger.debug("H_f de dimensão %d (bloco %d, posto %d)", rank, f.block, X.rank)
    return LocalizedSpace(
        source=X,
        state=f,
        basis=tuple(basis),
        gram=gram,
        evaluation=E[:, list(pivots)],
        pivots=pivots,
    )


def localize_vector(L: LocalizedSpace, x: ModuleElement) -> LocalizedVector:
    """Coordinates of x + N_f in the chosen basis."""
    e_b = L.evaluation
    metric = e_b.conj().T @ e_b
    coordinates = solve(metric, e_b.conj().T @ _evaluate_vector(L, x), assume_a="her")
    return LocalizedVector(L, coordinates)


def localized_inner(xi: LocalizedVector, eta: LocalizedVector) -> complex:
    """(ξ, η)_f, linear in ξ."""
    if xi.space is not eta.space:
        raise ShapeMismatch("localized vectors come from different spaces")
    return complex(xi.coordinates @ xi.space.gram @ eta.coordinates.conj())


def localize_functional(L: LocalizedSpace, tau: DualFunctional) -> LocalizedVector:
    """τ_f with (b + N_f, τ_f)_f = f(τ(b)) on every basis element b."""
    if tau.space != L.source:
        raise ShapeMismatch("functional lives on a different module space")
    phi = np.array([evaluate(L.state, tau(b)) for b in L.basis], dtype=complex)
    if L.dimension == 0:
        return LocalizedVector(L, phi)
    conj_coordinates = solve(L.gram, phi, assume_a="her")
    return LocalizedVector(L, conj_coordinates.conj())


def kernel_basis(L: LocalizedSpace) -> list[ModuleElement]:
    """Explicit basis of N_f = {x : f(⟨x, x⟩) = 0}."""
    E = evaluation_matrix(L.source, L.state)
    return [ModuleElement.unflatten(L.source, column) for column in null_space(E).T]


def verify_paschke(
    L: LocalizedSpace,
    tau: DualFunctional,
    rho: DualFunctional,
    probes: int = 20,
    seed: int = 0,
    context: RunContext | None = None,
) -> PaschkeCheck:
    if context is not None:
        context.note_once("localization-slots", SLOT_CONVENTION)
    rng = np.random.default_rng(seed)
    f = L.state
    X = L.source

    tau_f = localize_functional(L, tau)
    rho_f = localize_functional(L, rho)
    z_tau = represent_functional(tau, seed=seed)
    z_rho = represent_functional(rho, seed=seed)

    samples = list(L.basis) + [ModuleElement.random(X, rng) for _ in range(probes)]
    pairing = 0.0
    representer = 0.0
    for x in samples:
        lhs = localized_inner(localize_vector(L, x), tau_f)
        pairing = max(pairing, abs(lhs - evaluate(f, tau(x))))
        representer = max(representer, (tau(x) - inner_product(z_tau, x)).frobenius_norm())

    value = evaluate(f, inner_product(z_tau, z_rho))
    inner = abs(value - localized_inner(rho_f, tau_f))
    inner_unswapped = abs(value - localized_inner(tau_f, rho_f))

    return PaschkeCheck(
        dimension=L.dimension,
        pairing_residual=float(pairing),
        representer_residual=float(representer),
        inner_residual=float(inner),
        inner_unswapped_residual=float(inner_unswapped),
        norm_excess=float(tau_f.norm() - module_norm(z_tau)),
    )
