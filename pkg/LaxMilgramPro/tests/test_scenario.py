"""Testes para cenários, relatórios, demos e o CLI."""

from __future__ import annotations

import json
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
import yaml  # noqa: E402

from LaxMilgramPro.context import RunContext  # noqa: E402
from LaxMilgramPro.errors import ScenarioParseError, ScenarioValidationError  # noqa: E402
from LaxMilgramPro.run_env.run import main  # noqa: E402
from LaxMilgramPro.Scenario.scenario_builtins import (  # noqa: E402
    builtin_path,
    demo_counterexample,
    demo_m2_gap,
    list_builtins,
)
from LaxMilgramPro.Scenario.scenario_models import Outcome, ScenarioAction  # noqa: E402
from LaxMilgramPro.Scenario.scenario_runner import (  # noqa: E402
    canonical_json,
    load_builtin,
    load_scenario,
    parse_scenario,
    run_scenario,
)
from LaxMilgramPro.Solver import solver as solver_module  # noqa: E402

EXPECTED_BUILTINS = {
    "m2-gap",
    "riesz-identity",
    "positive-T",
    "nested-family",
    "hilbert-classic",
    "sin-counterexample",
    "localization-identities",
}

BUILTIN_OUTCOMES = [
    ("m2-gap", Outcome.FALSIFIED, 2),
    ("riesz-identity", Outcome.SUCCESS, 0),
    ("positive-T", Outcome.SUCCESS, 0),
    ("nested-family", Outcome.SUCCESS, 0),
    ("hilbert-classic", Outcome.SUCCESS, 0),
    ("localization-identities", Outcome.SUCCESS, 0),
    pytest.param("sin-counterexample", Outcome.SUCCESS, 0, marks=pytest.mark.slow),
]


def scenario_data(**overrides) -> dict:
    data = {"name": "teste", "action": "certify", "shape": [2]}
    data.update(overrides)
    return data


# ---------------------------------------------------------------------------
# Cenários embutidos
# ---------------------------------------------------------------------------


def test_list_builtins_registry():
    """Testa o registro estático de cenários embutidos."""
    infos = list_builtins()
    names = [info.name for info in infos]
    assert len(infos) >= 6
    assert EXPECTED_BUILTINS <= set(names)
    assert names == sorted(names)
    assert all(info.description for info in infos)


def test_unknown_builtin():
    """Testa ScenarioParseError para um nome desconhecido."""
    with pytest.raises(ScenarioParseError):
        builtin_path("inexistente")


@pytest.mark.parametrize("name", sorted(EXPECTED_BUILTINS))
def test_builtins_parse_round_trip(name):
    """Testa que cada cenário embutido valida e é estável na ida e volta."""
    scenario = load_builtin(name)
    assert scenario.name == name
    assert parse_scenario(scenario.model_dump(mode="json")) == scenario


@pytest.mark.parametrize("name, outcome, exit_code", BUILTIN_OUTCOMES)
def test_builtin_exit_codes(name, outcome, exit_code):
    """Testa o contrato de códigos de saída por cenário embutido."""
    report = run_scenario(builtin_path(name))
    assert report.error is None
    assert report.outcome is outcome
    assert report.exit_code == exit_code
    assert report.tool == "LaxMilgramPro"


def test_m2_gap_report():
    """Testa testemunhas com c = k = 1 e violações lhs = 0 < c/4."""
    report = run_scenario(builtin_path("m2-gap"))
    demo = report.demo
    assert demo["witness_c"] == 1.0
    assert demo["witness_k"] == 1.0
    assert demo["inconclusive"] == 0
    assert demo["witness_pairs"] == 32 * 4
    assert demo["witness_min_slack"] >= -1e-9
    assert demo["lhs"] == 0.0
    for violation in demo["violations"]:
        assert violation["violated"]
        assert violation["rhs"] == pytest.approx(violation["c"] / 4.0)
    assert {violation["c"] for violation in demo["search_violations"]} == {0.01, 0.1, 1.0}


def test_riesz_identity_report():
    """Testa x = z e resíduo nulo."""
    report = run_scenario(builtin_path("riesz-identity"))
    solve = report.solve
    assert solve["residual"] < 1e-12
    assert solve["norm_bound_ok"]
    blocks = solve["solution"]["components"][0]["blocks"][0]
    np.testing.assert_allclose(np.array(blocks)[..., 0], [[1.0, 0.0], [0.0, -1.0]], atol=1e-12)
    np.testing.assert_allclose(np.array(blocks)[..., 1], [[0.0, 1.0], [0.0, 0.0]], atol=1e-12)
    assert report.certificates[0]["route"] == "inner_product"


def test_positive_t_report_matches_flat_oracle():
    """Testa c = ‖T⁻¹‖⁻¹ contra o oráculo achatado e a cota da solução."""
    report = run_scenario(builtin_path("positive-T"))
    certificate = report.certificates[0]
    assert certificate["route"] == "positive_invertible"
    assert certificate["c"] == pytest.approx(certificate["oracle_c"], rel=1e-10)
    assert certificate["bounded_below"]["holds"]
    assert report.solve["norm_bound_ok"]
    assert report.solve["bound_slack"] >= -1e-9


@pytest.mark.parametrize("name", ["nested-family", "hilbert-classic"])
def test_family_reports_reach_the_unrestricted_solution(name):
    """Testa que o último nível reproduz a solução irrestrita."""
    report = run_scenario(builtin_path(name))
    assert report.solve["unrestricted_gap"] < 1e-8
    assert len(report.solve["levels"]) == len(report.solve["cauchy_profile"]) + 1


def test_reports_are_deterministic():
    """Testa relatórios idênticos, a menos do tempo, para a mesma semente."""
    for name in ("m2-gap", "positive-T", "nested-family"):
        first = run_scenario(builtin_path(name), seed=5)
        second = run_scenario(builtin_path(name), seed=5)
        assert canonical_json(first) == canonical_json(second)
        assert "timing" not in json.loads(canonical_json(first))


def test_seed_changes_random_problems():
    """Testa que a semente alimenta o problema aleatório."""
    first = run_scenario(builtin_path("positive-T"), seed=1)
    second = run_scenario(builtin_path("positive-T"), seed=2)
    assert first.seed == 1
    assert first.certificates[0]["c"] != second.certificates[0]["c"]


# ---------------------------------------------------------------------------
# Ações e sobrescritas
# ---------------------------------------------------------------------------


def test_falsify_action_override():
    """Testa a ação falsify sobre o cenário do gap em M₂."""
    report = run_scenario(builtin_path("m2-gap"), action="falsify", samples=4)
    assert report.action is ScenarioAction.FALSIFY
    assert report.exit_code == 2
    assert [entry["c"] for entry in report.falsification] == [0.01, 0.1, 1.0]
    assert all(entry["violations"] for entry in report.falsification)
    assert all(entry["states"] == 4 for entry in report.falsification)


def test_certify_action_uses_analytic_route():
    """Testa a rota analítica no certify."""
    report = run_scenario(builtin_path("riesz-identity"), action="certify")
    assert report.exit_code == 0
    assert report.certificates[0]["sampled"] is False
    assert "sampled-certificate" not in report.notes


def test_search_route_records_sampled_note():
    """Testa a busca de testemunhas e a nota de certificado amostrado."""
    scenario = parse_scenario(
        scenario_data(route="search", c=1.0, k=1.0, sampling={"count": 4, "probes": 2})
    )
    context = RunContext()
    report = run_scenario(scenario, context=context)
    assert report.exit_code == 0
    certificate = report.certificates[0]
    assert certificate["sampled"] is True
    assert certificate["witness_pairs"] == 4 * 2 * 2
    assert certificate["inconclusive"] == 0
    assert "sampled-certificate" in report.notes
    assert "sampled-certificate" in context.notes


def test_failed_certificate_becomes_error_outcome():
    """Testa que falhas de cálculo viram outcome 'error' com código 1."""
    scenario = parse_scenario(
        scenario_data(
            action="solve",
            route="positive_invertible",
            form={"kind": "left-multiplication", "element": {"shape": [2], "blocks": [[[1, 0], [0, -1]]]}},
            functional={"kind": "zero"},
        )
    )
    report = run_scenario(scenario)
    assert report.outcome is Outcome.ERROR
    assert report.exit_code == 1
    assert report.error["type"] == "NotPositiveOperator"


def test_failed_witness_search_is_inconclusive():
    """Testa o código 1 quando a busca não encontra testemunhas para c grande."""
    scenario = parse_scenario(scenario_data(route="search", c=10.0, sampling={"count": 2, "probes": 1}))
    report = run_scenario(scenario)
    assert report.outcome is Outcome.INCONCLUSIVE
    assert report.exit_code == 1
    assert report.certificates[0]["inconclusive"] > 0


def test_non_unique_solution_is_inconclusive(monkeypatch):
    """Testa que a divergência entre LU e QR vira outcome 'inconclusive' com código 1."""
    monkeypatch.setattr(solver_module, "_qr_path", lambda matrix, rhs: np.linalg.solve(matrix, rhs) + 1e-3)
    report = run_scenario(builtin_path("riesz-identity"))
    assert report.error is None
    assert report.solve["status"] == "not_unique"
    assert report.solve["uniqueness_gap"] > 1e-9
    assert report.outcome is Outcome.INCONCLUSIVE
    assert report.exit_code == 1


def test_localization_report_records_checks_per_state():
    """Testa a ação paschke: uma checagem por estado, resíduos abaixo de 1e-9 e a nota de convenção."""
    context = RunContext()
    report = run_scenario(builtin_path("localization-identities"), context=context)
    assert report.action is ScenarioAction.PASCHKE
    assert report.exit_code == 0
    assert len(report.localization) == 6
    blocks = {entry["state"]["block"] for entry in report.localization}
    assert blocks == {0, 1}
    for entry in report.localization:
        assert entry["holds"]
        assert entry["dimension"] == 2 * len(entry["state"]["vector"])
        for key in ("pairing_residual", "representer_residual", "inner_residual"):
            assert entry[key] <= 1e-9
        assert entry["norm_excess"] <= 1e-9
        assert entry["convention"] == report.notes["localization-slots"]
    assert "localization-slots" in context.notes
    assert "sampled-certificate" not in report.notes


def test_localization_action_override_on_other_scenarios():
    """Testa a ação paschke aplicada a um cenário de outra ação, com τ dado pelo representante."""
    report = run_scenario(builtin_path("riesz-identity"), action="paschke", samples=3)
    assert report.outcome is Outcome.SUCCESS
    assert len(report.localization) == 3
    assert report.solve is None
    assert report.certificates == []


def test_write_report(tmp_path):
    """Testa o relatório JSON gravado em disco."""
    path = tmp_path / "relatorios" / "riesz.json"
    report = run_scenario(builtin_path("riesz-identity"), report_path=path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["scenario"] == "riesz-identity"
    assert data["exit_code"] == report.exit_code
    assert list(data) == sorted(data)


# ---------------------------------------------------------------------------
# Erros de leitura e validação
# ---------------------------------------------------------------------------


def test_parse_rejects_non_mapping():
    """Testa ScenarioParseError para YAML que não é um mapa."""
    with pytest.raises(ScenarioParseError):
        parse_scenario(["não", "é", "mapa"])


def test_load_rejects_missing_and_broken_files(tmp_path):
    """Testa arquivos ausentes e YAML inválido."""
    with pytest.raises(ScenarioParseError):
        load_scenario(tmp_path / "ausente.yaml")
    broken = tmp_path / "quebrado.yaml"
    broken.write_text("name: [sem fechamento\n", encoding="utf-8")
    with pytest.raises(ScenarioParseError):
        load_scenario(broken)


@pytest.mark.parametrize(
    "data, field_path",
    [
        (scenario_data(bogus=1), "bogus"),
        (scenario_data(sampling={"count": 0}), "sampling.count"),
        ({"name": "teste", "shape": [2]}, "action"),
        (scenario_data(action="demo"), "<root>"),
        (scenario_data(form={"kind": "operator"}), "form"),
    ],
)
def test_validation_error_carries_field_path(data, field_path):
    """Testa ScenarioValidationError com o caminho do campo."""
    with pytest.raises(ScenarioValidationError) as info:
        parse_scenario(data)
    assert info.value.field_path == field_path


def test_load_scenario_from_file(tmp_path):
    """Testa a leitura de um cenário escrito em disco."""
    path = tmp_path / "cenario.yaml"
    path.write_text(yaml.safe_dump(scenario_data(ranks=[2, 2])), encoding="utf-8")
    scenario = load_scenario(path)
    assert scenario.ranks == (2, 2)
    assert run_scenario(path).exit_code == 0


# ---------------------------------------------------------------------------
# Demos
# ---------------------------------------------------------------------------


def test_m2_gap_demo_with_small_sample():
    """Testa o demo do gap em M₂ com poucas amostras."""
    demo = demo_m2_gap(samples=4, probes=2, c_values=[0.5])
    assert demo.f_abs_x == pytest.approx(0.5)
    assert demo.f_abs_y == pytest.approx(0.5)
    assert demo.violations[0].rhs == pytest.approx(0.125)
    assert demo.witness_pairs == 8


def test_counterexample_small_grid_matches_sin():
    """Testa que a solução em n = 8 coincide com sin(1/tⱼ)."""
    demo = demo_counterexample(8)
    level = demo.levels[0]
    assert level.n == 8
    assert level.max_error < 1e-10
    assert [window.delta for window in level.windows] == [0.25]
    assert level.windows[0].points == 1


def test_counterexample_rejects_coarse_grid():
    """Testa n ≥ 8."""
    with pytest.raises(ValueError):
        demo_counterexample(4)


@pytest.mark.slow
def test_counterexample_oscillation_does_not_decay():
    """Testa oscilação ≥ 1,9 em (0, ¼) para n = 1024 e tendência não decrescente."""
    demo = demo_counterexample([64, 256, 1024])
    assert demo.non_decreasing
    assert demo.oscillation_trend[-1] >= 1.9
    assert all(level.max_error < 1e-10 for level in demo.levels)
    assert demo.note


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_list():
    """Testa o subcomando list."""
    assert main(["list"]) == 0


def test_cli_solve_and_demo(tmp_path):
    """Testa os códigos de saída devolvidos pelo CLI."""
    assert main(["solve", "--builtin", "riesz-identity", "--report", str(tmp_path / "r.json")]) == 0
    assert (tmp_path / "r.json").is_file()
    assert main(["demo", "--builtin", "m2-gap", "--samples", "4", "--report", str(tmp_path / "g.json")]) == 2


def test_cli_invalid_scenario(tmp_path):
    """Testa código 1 para cenário inválido."""
    assert main(["solve", "--builtin", "inexistente"]) == 1
    path = tmp_path / "ruim.yaml"
    path.write_text("name: ruim\nshape: [2]\n", encoding="utf-8")
    assert main(["certify", "--scenario", str(path), "--report", str(tmp_path / "x.json")]) == 1
