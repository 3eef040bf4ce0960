"""Testes para formas sesquilineares e certificados de coercividade."""

from __future__ import annotations

import sys
from pathlib import Path

# Ensure project and package roots are on sys.path for absolute imports
PROJECT_ROOT = Path(__file__).resolve().parents[2]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.append(str(PROJECT_ROOT))

PACKAGE_ROOT = PROJECT_ROOT / "LaxMilgramPro"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.append(str(PACKAGE_ROOT))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape  # noqa: E402
from LaxMilgramPro.errors import (  # noqa: E402
    NotPositiveOperator,
    NotSesquilinear,
    ShapeMismatch,
    Singular,
)
from LaxMilgramPro.Forms.forms_coercivity import (  # noqa: E402
    bounded_below_constant,
    certify_by_witnesses,
    certify_inner_product,
    certify_positive_invertible,
    evaluate_form,
    falsify_uniform,
    is_invertible,
    operator_of_form,
    remark_inequality_margin,
    witness_for_state,
    witness_for_state_dual,
)
from LaxMilgramPro.Forms.forms_models import (  # noqa: E402
    CertificationRoute,
    CoercivityCertificate,
    SesquilinearForm,
    WitnessRecord,
    WitnessRoute,
)
from LaxMilgramPro.Module.module_models import ModuleElement, ModuleSpace  # noqa: E402
from LaxMilgramPro.Module.module_space import abs_module, inner_product, module_norm, random_unit  # noqa: E402
from LaxMilgramPro.States.state_models import PureState, SamplingStrategy, StateSample  # noqa: E402
from LaxMilgramPro.States.state_space import evaluate_real, sample_pure_states  # noqa: E402

M2 = AlgebraShape.of(2)
X_GAP = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
Y_GAP = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])


def single(*elements: AlgebraElement) -> ModuleElement:
    return ModuleElement.of(*elements)


def one_state(f: PureState) -> StateSample:
    return StateSample(shape=f.shape, states=(f,), strategy=SamplingStrategy.GRID, seed=None, count=1)


def random_form(domain: ModuleSpace, codomain: ModuleSpace, rng: np.random.Generator) -> SesquilinearForm:
    operator = tuple(
        tuple(AlgebraElement.random(domain.shape, rng) for _ in range(domain.rank)) for _ in range(codomain.rank)
    )
    return SesquilinearForm(domain, codomain, operator, name="random")


# ---------------------------------------------------------------------------
# Avaliação e estrutura
# ---------------------------------------------------------------------------


def test_evaluate_inner_product_form():
    """Testa B = ⟨·,·⟩ e o par do gap em M₂."""
    space = ModuleSpace(AlgebraShape.of(2, 1), 2)
    rng = np.random.default_rng(0)
    x, y = ModuleElement.random(space, rng), ModuleElement.random(space, rng)
    B = SesquilinearForm.inner_product_form(space)
    assert evaluate_form(B, x, y).allclose(inner_product(x, y), atol=1e-12)

    gap = SesquilinearForm.inner_product_form(ModuleSpace(M2, 1))
    value = evaluate_form(gap, single(AlgebraElement.from_blocks([X_GAP])), single(AlgebraElement.from_blocks([Y_GAP])))
    assert value.allclose(AlgebraElement.zeros(M2), atol=1e-15)

    assert evaluate_form(B, ModuleElement.zeros(space), y).allclose(AlgebraElement.zeros(space.shape))


def test_evaluate_form_rejects_foreign_argument():
    """Testa ShapeMismatch para y fora do contradomínio."""
    B = SesquilinearForm.inner_product_form(ModuleSpace(M2, 1))
    with pytest.raises(ShapeMismatch):
        evaluate_form(B, ModuleElement.zeros(ModuleSpace(M2, 1)), ModuleElement.zeros(ModuleSpace(M2, 2)))


def test_form_is_sesquilinear_and_bounded():
    """Testa B(x·a, y·b) = a*·B(x, y)·b e ‖B(x, y)‖ ≤ ‖T‖·‖x‖·‖y‖."""
    rng = np.random.default_rng(1)
    domain, codomain = ModuleSpace(AlgebraShape.of(2, 1), 2), ModuleSpace(AlgebraShape.of(2, 1), 3)
    B = random_form(domain, codomain, rng)
    x, y = ModuleElement.random(domain, rng), ModuleElement.random(codomain, rng)
    a, b = AlgebraElement.random(domain.shape, rng), AlgebraElement.random(domain.shape, rng)
    assert B(x @ a, y @ b).allclose(a.adjoint() @ B(x, y) @ b, atol=1e-9)
    value = B(x, y).blocks
    norm = max(np.linalg.norm(block, 2) for block in value)
    assert norm <= B.norm() * module_norm(x) * module_norm(y) * (1.0 + 1e-12)


def test_flat_matrix_matches_apply():
    """Testa o operador achatado blockdiag(Tᵢ ⊗ I)."""
    rng = np.random.default_rng(2)
    space = ModuleSpace(AlgebraShape.of(2, 3), 2)
    B = random_form(space, space, rng)
    x = ModuleElement.random(space, rng)
    np.testing.assert_allclose(B.flat_matrix() @ x.flatten(), B.apply(x).flatten(), atol=1e-10)


def test_adjoint_form_swaps_arguments():
    """Testa B*(y, x) = B(x, y)*."""
    rng = np.random.default_rng(3)
    domain, codomain = ModuleSpace(M2, 2), ModuleSpace(M2, 1)
    B = random_form(domain, codomain, rng)
    x, y = ModuleElement.random(domain, rng), ModuleElement.random(codomain, rng)
    assert B.adjoint()(y, x).allclose(B(x, y).adjoint(), atol=1e-10)


# ---------------------------------------------------------------------------
# Recuperação do operador
# ---------------------------------------------------------------------------


def test_operator_of_inner_product_is_identity():
    """Testa a recuperação T = 1 e T = 2·1."""
    space = ModuleSpace(AlgebraShape.of(2, 1), 2)
    recovered = operator_of_form(inner_product, space, space)
    assert recovered.allclose(SesquilinearForm.inner_product_form(space), atol=1e-12)
    assert is_invertible(recovered)

    doubled = operator_of_form(lambda x, y: inner_product(x * 2.0, y), space, space)
    assert doubled.allclose(SesquilinearForm.scaled_identity(space, 2.0), atol=1e-12)


def test_operator_of_random_form_round_trip():
    """Testa que T aleatório é recuperado de ⟨Tx, y⟩."""
    rng = np.random.default_rng(4)
    domain, codomain = ModuleSpace(AlgebraShape.of(2, 1), 2), ModuleSpace(AlgebraShape.of(2, 1), 3)
    B = random_form(domain, codomain, rng)
    recovered = operator_of_form(B, domain, codomain, probes=20)
    assert recovered.allclose(B, atol=1e-10)
    assert not is_invertible(recovered)


def test_operator_of_form_rejects_swapped_slots():
    """Testa NotSesquilinear para (x, y) ↦ ⟨y, x⟩."""
    space = ModuleSpace(M2, 1)
    with pytest.raises(NotSesquilinear) as info:
        operator_of_form(lambda x, y: inner_product(y, x), space, space)
    assert info.value.probe["probe"] == 0


# ---------------------------------------------------------------------------
# Certificados analíticos
# ---------------------------------------------------------------------------


def test_certify_positive_invertible_examples():
    """Testa c = ‖T⁻¹‖⁻¹ nos exemplos de referência."""
    space = ModuleSpace(M2, 1)
    identity = certify_positive_invertible(SesquilinearForm.inner_product_form(space))
    assert identity.c == pytest.approx(1.0)
    assert identity.k == pytest.approx(1.0)
    assert identity.route is CertificationRoute.POSITIVE_INVERTIBLE
    assert not identity.sampled

    assert certify_positive_invertible(SesquilinearForm.scaled_identity(space, 2.0)).c == pytest.approx(2.0)

    half = SesquilinearForm.left_multiplication(space, AlgebraElement.from_blocks([np.diag([1.0, 0.5])]))
    certificate = certify_positive_invertible(half)
    assert certificate.c == pytest.approx(0.5)
    assert certificate.form_norm == pytest.approx(1.0)


def test_certify_positive_invertible_matches_flat_oracle():
    """Testa c contra o menor autovalor do operador achatado."""
    rng = np.random.default_rng(5)
    space = ModuleSpace(AlgebraShape.of(2, 1), 2)
    B = SesquilinearForm.random_positive(space, rng)
    certificate = certify_positive_invertible(B)
    assert certificate.c == pytest.approx(float(np.linalg.eigvalsh(B.flat_matrix())[0]), rel=1e-10)

    x = random_unit(space, rng)
    assert remark_inequality_margin(B, x, certificate.c) >= -1e-9
    assert bounded_below_constant(B, certificate.c, certificate.k).holds


def test_certify_positive_invertible_rejects_bad_operators():
    """Testa NotPositiveOperator e Singular."""
    space = ModuleSpace(M2, 1)
    indefinite = SesquilinearForm.left_multiplication(space, AlgebraElement.from_blocks([np.diag([1.0, -1.0])]))
    with pytest.raises(NotPositiveOperator):
        certify_positive_invertible(indefinite)

    projection = SesquilinearForm.left_multiplication(space, AlgebraElement.from_blocks([X_GAP]))
    with pytest.raises(Singular):
        certify_positive_invertible(projection)


def test_certify_inner_product():
    """Testa c = 1 pela rota do produto interno."""
    space = ModuleSpace(AlgebraShape.of(2, 1), 3)
    certificate = certify_inner_product(SesquilinearForm.inner_product_form(space))
    assert certificate.c == 1.0
    assert certificate.route is CertificationRoute.INNER_PRODUCT
    assert certificate.holds
    with pytest.raises(ValueError):
        certify_inner_product(SesquilinearForm.scaled_identity(space, 2.0))


def test_bounded_below_fails_for_wide_operator():
    """Testa que T: A² → A¹ não é limitado inferiormente."""
    rng = np.random.default_rng(6)
    B = random_form(ModuleSpace(M2, 2), ModuleSpace(M2, 1), rng)
    result = bounded_below_constant(B, c=0.1)
    assert result.constant == 0.0
    assert not result.holds


def test_certificate_rejects_negative_witness_slack():
    """Testa a invariante de folga das testemunhas registradas."""
    record = WitnessRecord(
        condition="main", state={}, given={}, witness={}, lhs=0.0, rhs=1.0, k_value=1.0, route=WitnessRoute.ASCENT
    )
    with pytest.raises(ValueError):
        CoercivityCertificate(c=1.0, k=1.0, route=CertificationRoute.SEARCH, sampled=True, witnesses=[record])


# ---------------------------------------------------------------------------
# Testemunhas
# ---------------------------------------------------------------------------


def test_polar_witness_for_invertible_x():
    """Testa y = u para x = u·h invertível em M₂."""
    rng = np.random.default_rng(7)
    space = ModuleSpace(M2, 1)
    B = SesquilinearForm.inner_product_form(space)
    x = random_unit(space, rng)
    f = PureState.basis(M2, 0)
    witness = witness_for_state(B, f, x, k=1.0, c=1.0)
    assert witness.route is WitnessRoute.POLAR
    assert witness.k_value == pytest.approx(1.0)
    assert witness.lhs == pytest.approx(evaluate_real(f, abs_module(x)), rel=1e-10)
    assert witness.slack >= -1e-9
    assert module_norm(witness.y) == pytest.approx(1.0)


def test_inner_product_witness_returns_abs():
    """Testa B(x, z + z′) = |x| em posto 2."""
    rng = np.random.default_rng(8)
    space = ModuleSpace(AlgebraShape.of(2, 1), 2)
    B = SesquilinearForm.inner_product_form(space)
    x = random_unit(space, rng)
    witness = witness_for_state(B, PureState.basis(space.shape, 0), x, k=1.0, c=1.0)
    assert witness.route is WitnessRoute.INNER_PRODUCT
    assert B(x, witness.y).allclose(abs_module(x), atol=1e-10)


def test_trivial_witness_is_the_generator():
    """Testa y = e₁·1 para x = e₁·1."""
    space = ModuleSpace(M2, 1)
    x = ModuleElement.basis(space, 0)
    y, lhs, rhs = witness_for_state(SesquilinearForm.inner_product_form(space), PureState.basis(M2, 1), x)
    assert y.allclose(x, atol=1e-12)
    assert lhs == pytest.approx(rhs)


def test_vacuous_witness_when_state_misses_x():
    """Testa a condição vazia quando f(|x|) = 0."""
    space = ModuleSpace(M2, 1)
    x = single(AlgebraElement.from_blocks([np.diag([0.0, 1.0])]))
    witness = witness_for_state(SesquilinearForm.inner_product_form(space), PureState.basis(M2, 0), x)
    assert witness.vacuous
    assert witness.rhs == 0.0


def test_dual_witness_uses_adjoint_form():
    """Testa a segunda condição com B positivo."""
    rng = np.random.default_rng(9)
    space = ModuleSpace(M2, 2)
    B = SesquilinearForm.random_positive(space, rng, floor=0.5)
    c = certify_positive_invertible(B).c
    y = random_unit(space, rng)
    witness = witness_for_state_dual(B, PureState.basis(M2, 0), y, k=1.0, c=c)
    assert witness.slack >= -1e-9
    assert witness.k_value >= 1.0 - 1e-9


# ---------------------------------------------------------------------------
# Falsificação uniforme
# ---------------------------------------------------------------------------


def test_falsify_gap_pair_on_m2():
    """Testa a violação lhs = 0 < rhs = ¼ no par de projeções."""
    B = SesquilinearForm.inner_product_form(ModuleSpace(M2, 1))
    certificate = falsify_uniform(B, 1.0, one_state(PureState.basis(M2, 0)), probes=1)
    assert not certificate.holds
    violation = certificate.violations[0]
    assert violation.candidate == "projection-pair"
    assert violation.lhs == pytest.approx(0.0, abs=1e-15)
    assert violation.rhs == pytest.approx(0.25)


def test_no_violation_on_scalar_hilbert_space():
    """Testa |x̄y| ≥ c·|x|·|y| sobre ℂ para c ≤ 1."""
    B = SesquilinearForm.inner_product_form(ModuleSpace(AlgebraShape.of(1), 1))
    sample = sample_pure_states(AlgebraShape.of(1), count=1)
    for c in (0.5, 1.0):
        assert falsify_uniform(B, c, sample, probes=50, seed=2).holds


def test_falsify_positive_invertible_above_its_constant():
    """Testa a violação para c = ‖T⁻¹‖⁻¹ + 0.1."""
    rng = np.random.default_rng(10)
    space = ModuleSpace(M2, 1)
    B = SesquilinearForm.random_positive(space, rng)
    c = certify_positive_invertible(B).c + 0.1
    sample = sample_pure_states(M2, SamplingStrategy.EIGEN_DIRECTED, count=4, seed=0)
    assert not falsify_uniform(B, c, sample, probes=10).holds


def test_falsify_rejects_nonpositive_c():
    """Testa c > 0."""
    B = SesquilinearForm.inner_product_form(ModuleSpace(M2, 1))
    with pytest.raises(ValueError):
        falsify_uniform(B, 0.0, sample_pure_states(M2, count=2))


def test_falsify_is_deterministic_across_workers():
    """Testa que o primeiro contraexemplo não depende do número de threads."""
    B = SesquilinearForm.inner_product_form(ModuleSpace(M2, 1))
    sample = sample_pure_states(M2, count=6, seed=4)
    serial = falsify_uniform(B, 0.1, sample, probes=3, seed=1, workers=1)
    threaded = falsify_uniform(B, 0.1, sample, probes=3, seed=1, workers=3)
    assert serial.violations[0].model_dump() == threaded.violations[0].model_dump()


def test_pointwise_condition_holds_while_uniform_fails():
    """Testa a dicotomia em M₂: testemunhas com c = k = 1 e violação para todo c."""
    B = SesquilinearForm.inner_product_form(ModuleSpace(M2, 1))
    sample = sample_pure_states(M2, count=8, seed=0)

    certificate = certify_by_witnesses(B, c=1.0, k=1.0, sample=sample, probes=3, seed=0)
    assert certificate.holds
    assert certificate.sampled
    assert certificate.inconclusive == 0
    assert len(certificate.witnesses) == 2 * 3 * len(sample)
    assert min(record.slack for record in certificate.witnesses) >= -1e-9

    for c in (0.01, 0.1, 1.0):
        assert not falsify_uniform(B, c, sample, probes=2, seed=0).holds
