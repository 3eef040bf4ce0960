from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_core import hermitian_eigensystem
from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape
from LaxMilgramPro.errors import ShapeMismatch, ZeroElement
from LaxMilgramPro.States.state_models import PureState, SamplingStrategy, StateSample

logger = logging.getLogger(__name__)


def evaluate(f: PureState, a: AlgebraElement) -> complex:
    """f(a) = v* a_block v."""
    if f.shape != a.shape:
        raise ShapeMismatch(f"state on {f.shape.block_dims} cannot evaluate element of {a.shape.block_dims}")
    block = a.blocks[f.block]
    return complex(np.vdot(f.vector, block @ f.vector))


def evaluate_real(f: PureState, a: AlgebraElement) -> float:
    """Real part of f(a), for positive arguments such as |x|."""
    return float(evaluate(f, a).real)


def norm_attaining_state(a: AlgebraElement, tol: float | None = None) -> PureState:
    """Eigenvector state of the top eigenvalue of a positive element, so f(a) = ‖a‖."""
    tol = AlgebraConfig.load().eig_tol if tol is None else tol
    system = hermitian_eigensystem(a)
    tops = [float(w[0]) for w in system.eigenvalues]
    best = int(np.argmax(tops))
    if tops[best] <= tol:
        raise ZeroElement(f"cannot attain the norm of an element with ‖a‖ = {tops[best]:.3e}")
    return PureState.from_vector(a.shape, best, system.eigenvectors[best][:, 0])


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _haar_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def _bloch_grid(count: int) -> list[np.ndarray]:
    """Fibonacci lattice on the Bloch sphere mapped to qubit vectors."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    vectors = []
    for j in range(count):
        z = 1.0 - 2.0 * (j + 0.5) / count
        polar = math.acos(max(-1.0, min(1.0, z)))
        azimuth = golden * j
        vectors.append(np.array([math.cos(polar / 2.0), np.exp(1j * azimuth) * math.sin(polar / 2.0)]))
    return vectors


def _block_grid(n: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    if n == 2:
        return _bloch_grid(count)
    vectors: list[np.ndarray] = list(np.eye(n, dtype=complex))
    for i in range(n):
        for j in range(i + 1, n):
            for phase in (1.0, 1j, -1.0, -1j):
                v = np.zeros(n, dtype=complex)
                v[i], v[j] = 1.0, phase
                vectors.append(v / math.sqrt(2.0))
    while len(vectors) < count:
        vectors.append(_haar_vector(n, rng))
    return vectors[:count]


def _round_robin(shape: AlgebraShape, count: int) -> tuple[list[int], list[int]]:
    """Split ``count`` into trivial-block states followed by a round-robin over blocks with n ≥ 2."""
    trivial = [i for i, n in enumerate(shape.block_dims) if n == 1][:count]
    wide = [i for i, n in enumerate(shape.block_dims) if n >= 2]
    remaining = count - len(trivial)
    order = [wide[t % len(wide)] for t in range(remaining)] if wide else []
    return trivial, order


def _eigen_states(shape: AlgebraShape, elements: Iterable[AlgebraElement]) -> list[PureState]:
    states = []
    for element in elements:
        if element.shape != shape:
            raise ShapeMismatch(f"element shape {element.shape.block_dims} differs from {shape.block_dims}")
        system = hermitian_eigensystem(element.adjoint() @ element)
        for block, vectors in enumerate(system.eigenvectors):
            states.extend(PureState.from_vector(shape, block, vectors[:, j]) for j in range(vectors.shape[1]))
    return states


def sample_pure_states(
    shape: AlgebraShape,
    strategy: SamplingStrategy | str = SamplingStrategy.RANDOM,
    count: int = 32,
    seed: int | None = 0,
    elements: Sequence[AlgebraElement] = (),
) -> StateSample:
    """Deterministic sample of pure states.

    One-dimensional blocks carry a single state and contribute it once; the rest
    of ``count`` is dealt round-robin to the blocks with n ≥ 2. Random samples
    are drawn sequentially from one generator, so a larger ``count`` extends a
    smaller one. The eigen-directed strategy appends the eigenvector states of
    ``elements`` (right singular vectors) to a random sample.
    """
    strategy = SamplingStrategy(strategy)
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    trivial, order = _round_robin(shape, count)

    states = [PureState.basis(shape, block) for block in trivial]
    if strategy is SamplingStrategy.GRID:
        per_block = {block: order.count(block) for block in set(order)}
        grids = {block: iter(_block_grid(shape.block_dims[block], k, rng)) for block, k in sorted(per_block.items())}
        states.extend(PureState.from_vector(shape, block, next(grids[block])) for block in order)
    else:
        states.extend(PureState(shape, block, _haar_vector(shape.block_dims[block], rng)) for block in order)

    if strategy is SamplingStrategy.EIGEN_DIRECTED:
        states.extend(_eigen_states(shape, elements))

    logger.debug("Amostra de %d estados puros (%s, seed=%s)", len(states), strategy.value, seed)
    return StateSample(shape=shape, states=tuple(states), strategy=strategy, seed=seed, count=count)
