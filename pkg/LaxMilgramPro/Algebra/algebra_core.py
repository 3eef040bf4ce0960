### ALGEBRA CORE

from __future__ import annotations

import logging
import math
from itertools import combinations

import numpy as np
from scipy.linalg import svd, svdvals

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_models import (
    AlgebraElement,
    HermitianEigensystem,
    Inverse,
    PolarDecomposition,
    PositivityCheck,
)
from LaxMilgramPro.errors import NotHermitian, NotPositive, ShapeMismatch, Singular

logger = logging.getLogger(__name__)


def _cfg() -> AlgebraConfig:
    return AlgebraConfig.load()


# ---------------------------------------------------------------------------
# Cyclic Jacobi
# ---------------------------------------------------------------------------


def _off_norm(matrix: np.ndarray) -> float:
    total = float(np.sum(np.abs(matrix) ** 2))
    diagonal = float(np.sum(np.abs(np.diag(matrix)) ** 2))
    return math.sqrt(max(total - diagonal, 0.0))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a complex Givens rotation, in place."""
    apq = a[p, q]
    magnitude = abs(apq)
    if magnitude == 0.0:
        return
    phase = apq / magnitude
    theta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
    sign = 1.0 if theta >= 0.0 else -1.0
    t = sign / (abs(theta) + math.hypot(theta, 1.0))
    c = 1.0 / math.hypot(t, 1.0)
    s = t * c
    g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)

    pair = [p, q]
    a[:, pair] = a[:, pair] @ g
    a[pair, :] = g.conj().T @ a[pair, :]
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, pair] = v[:, pair] @ g


def jacobi_eigh(
    matrix: np.ndarray,
    tol: float | None = None,
    max_sweeps: int | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvalues sorted in
    descending order (stable for ties) and eigenvectors as the columns of a
    unitary matrix. Only the Hermitian part of ``matrix`` is used.
    """
    cfg = _cfg()
    tol = cfg.eig_tol if tol is None else tol
    max_sweeps = cfg.jacobi_max_sweeps if max_sweeps is None else max_sweeps

    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"jacobi_eigh expects a square matrix, got shape {a.shape}")
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)

    scale = float(np.linalg.norm(a))
    sweeps = 0
    while n > 1 and scale > 0.0 and _off_norm(a) > tol * scale:
        if sweeps >= max_sweeps:
            logger.warning(
                "Jacobi não convergiu em %d varreduras (off = %.3e, n = %d)", max_sweeps, _off_norm(a), n
            )
            break
        sweeps += 1
        for p, q in combinations(range(n), 2):
            _rotate(a, v, p, q)

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order], sweeps


# ---------------------------------------------------------------------------
# Spectral helpers
# ---------------------------------------------------------------------------


def hermitian_defect(a: AlgebraElement) -> tuple[float, float]:
    """Return (max block ‖b − b*‖_F, max block ‖b‖_F)."""
    defect = max(float(np.linalg.norm(b - b.conj().T)) for b in a.blocks)
    scale = max(float(np.linalg.norm(b)) for b in a.blocks)
    return defect, scale


def hermitian_eigensystem(a: AlgebraElement, tol: float | None = None) -> HermitianEigensystem:
    tol = _cfg().hermitian_tol if tol is None else tol
    defect, scale = hermitian_defect(a)
    if defect > tol * scale:
        raise NotHermitian(defect / scale if scale else defect, tol)

    values, vectors, sweeps = [], [], []
    for block in a.blocks:
        w, u, count = jacobi_eigh(block)
        values.append(w)
        vectors.append(u)
        sweeps.append(count)
    return HermitianEigensystem(a.shape, tuple(values), tuple(vectors), tuple(sweeps))


def _gram(a: AlgebraElement) -> AlgebraElement:
    return a.adjoint() @ a


def singular_values(a: AlgebraElement) -> tuple[np.ndarray, ...]:
    """Per-block singular values, descending."""
    return tuple(svdvals(block) for block in a.blocks)


def operator_norm(a: AlgebraElement) -> float:
    return float(max(s[0] for s in singular_values(a)))


def _positive_system(a: AlgebraElement, tol: float | None) -> HermitianEigensystem:
    tol = _cfg().positivity_tol if tol is None else tol
    system = hermitian_eigensystem(a)
    scale = max(float(np.max(np.abs(w))) for w in system.eigenvalues)
    lowest = system.min_eigenvalue
    if lowest < -tol * scale:
        raise NotPositive(lowest, tol)
    return system


def positive_sqrt(a: AlgebraElement, tol: float | None = None) -> AlgebraElement:
    system = _positive_system(a, tol)
    return system.apply(lambda w: np.sqrt(np.clip(w, 0.0, None)))


def abs_element(b: AlgebraElement) -> AlgebraElement:
    """|b| = (b*b)^{1/2}."""
    return positive_sqrt(_gram(b))


def range_projection(
    a: AlgebraElement, rank_tol: float | None = None, tol: float | None = None
) -> AlgebraElement:
    rank_tol = _cfg().rank_tol if rank_tol is None else rank_tol
    system = _positive_system(a, tol)
    scale = system.max_eigenvalue
    return system.apply(lambda w: (w > rank_tol * scale).astype(float))


def rank_per_block(a: AlgebraElement, rank_tol: float | None = None) -> tuple[int, ...]:
    rank_tol = _cfg().rank_tol if rank_tol is None else rank_tol
    sigma = singular_values(a)
    scale = max(float(s[0]) for s in sigma)
    return tuple(int(np.sum(s > rank_tol * scale)) for s in sigma)


def polar_decompose(a: AlgebraElement, rank_tol: float | None = None) -> PolarDecomposition:
    """a = u·h with h = |a|.

    For singular blocks ``u`` is the partial isometry whose initial projection is
    the range projection of ``h``; ``unitary`` extends it to a unitary that still
    satisfies a = unitary·h.
    """
    rank_tol = _cfg().rank_tol if rank_tol is None else rank_tol
    factors = [svd(block) for block in a.blocks]
    scale = max(float(sigma[0]) for _, sigma, _ in factors)

    u_blocks, h_blocks, unitary_blocks, singular_blocks = [], [], [], []
    for index, (left, sigma, right_h) in enumerate(factors):
        n = sigma.shape[0]
        rank = int(np.sum(sigma > rank_tol * scale)) if scale > 0.0 else 0
        right = right_h.conj().T
        h_blocks.append((right * sigma) @ right_h)
        u_blocks.append(left[:, :rank] @ right_h[:rank, :])
        unitary_blocks.append(left @ right_h)
        if rank < n:
            singular_blocks.append(index)

    if singular_blocks:
        logger.warning(
            "Decomposição polar singular nos blocos %s: u é isometria parcial", singular_blocks
        )
    return PolarDecomposition(
        u=AlgebraElement(a.shape, tuple(u_blocks)),
        h=AlgebraElement(a.shape, tuple(h_blocks)),
        unitary=AlgebraElement(a.shape, tuple(unitary_blocks)),
        singular=bool(singular_blocks),
        singular_blocks=tuple(singular_blocks),
    )


def invert(a: AlgebraElement, rank_tol: float | None = None) -> Inverse:
    rank_tol = _cfg().rank_tol if rank_tol is None else rank_tol
    sigmas = singular_values(a)
    scale = max(float(s[0]) for s in sigmas)
    for index, sigma in enumerate(sigmas):
        smallest = float(sigma[-1])
        if scale == 0.0 or smallest <= rank_tol * scale:
            raise Singular(index, smallest)
    inverse = AlgebraElement(a.shape, tuple(np.linalg.inv(block) for block in a.blocks))
    return Inverse(element=inverse, inverse_norm=1.0 / min(float(s[-1]) for s in sigmas))


def is_positive(a: AlgebraElement, tol: float | None = None) -> PositivityCheck:
    cfg = _cfg()
    tol = cfg.positivity_tol if tol is None else tol
    defect, scale = hermitian_defect(a)
    hermitian_part = (a + a.adjoint()) * 0.5
    system = hermitian_eigensystem(hermitian_part)
    margin = system.min_eigenvalue
    if defect > cfg.hermitian_tol * scale:
        return PositivityCheck(positive=False, margin=margin, hermitian=False)
    spectral_scale = max(float(np.max(np.abs(w))) for w in system.eigenvalues)
    return PositivityCheck(positive=margin >= -tol * spectral_scale, margin=margin)
