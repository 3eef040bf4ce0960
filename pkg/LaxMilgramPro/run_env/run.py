from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import coloredlogs
from rich.console import Console
from rich.table import Table

if __package__ is None or __package__ == "":
    package_root = Path(__file__).resolve().parents[1]
    if str(package_root.parent) not in sys.path:
        sys.path.append(str(package_root.parent))
    from LaxMilgramPro import config  # type: ignore
    from LaxMilgramPro.errors import ScenarioParseError, ScenarioValidationError  # type: ignore
    from LaxMilgramPro.Scenario.scenario_builtins import builtin_path, list_builtins  # type: ignore
    from LaxMilgramPro.Scenario.scenario_models import Report, ScenarioAction  # type: ignore
    from LaxMilgramPro.Scenario.scenario_runner import run_scenario  # type: ignore
else:
    from LaxMilgramPro import config
    from LaxMilgramPro.errors import ScenarioParseError, ScenarioValidationError
    from LaxMilgramPro.Scenario.scenario_builtins import builtin_path, list_builtins
    from LaxMilgramPro.Scenario.scenario_models import Report, ScenarioAction
    from LaxMilgramPro.Scenario.scenario_runner import run_scenario

logger = logging.getLogger("LaxMilgramPro.run")

COMMANDS = [action.value for action in ScenarioAction] + ["list"]


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Certificação e solução de problemas de Lax–Milgram sobre ⊕ M_n(ℂ).")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"executa a ação '{command}'")
        if command == "list":
            continue
        source = sub.add_mutually_exclusive_group(required=True)
        source.add_argument("--scenario", type=Path, help="Arquivo YAML do cenário")
        source.add_argument("--builtin", help="Nome de um cenário embutido (veja 'list')")
        sub.add_argument("--seed", type=int, default=None, help="Semente (sobrescreve a do cenário)")
        sub.add_argument("--samples", type=int, default=None, help="Número de estados amostrados")
        sub.add_argument("--tol", type=float, default=None, help="Tolerância do resíduo do solver")
        sub.add_argument("--report", type=Path, default=None, help="Caminho do relatório JSON")
        sub.add_argument("--workers", type=int, default=config.WORKERS, help="Threads nas buscas (default: LMP_WORKERS)")
    return parser.parse_args(argv)


def print_builtins(console: Console) -> None:
    table = Table(title="Cenários embutidos")
    table.add_column("nome", style="bold")
    table.add_column("ação")
    table.add_column("descrição")
    for info in list_builtins():
        table.add_row(info.name, info.action.value, info.description)
    console.print(table)


def print_report(console: Console, report: Report) -> None:
    table = Table(title=f"{report.scenario} ({report.action.value})")
    table.add_column("campo", style="bold")
    table.add_column("valor")
    table.add_row("resultado", report.outcome.value)
    table.add_row("código de saída", str(report.exit_code))
    for certificate in report.certificates:
        table.add_row("certificado", f"c = {certificate['c']:.6g}, k = {certificate['k']:.3g} ({certificate['route']})")
    if report.solve is not None:
        table.add_row("resíduo", f"{report.solve['residual']:.3e}")
        table.add_row("folga ‖τ‖/c − ‖x‖", f"{report.solve['bound_slack']:.3e}")
    for entry in report.falsification:
        table.add_row(f"violações (c = {entry['c']:g})", str(len(entry["violations"])))
    if report.error is not None:
        table.add_row("erro", f"{report.error['type']}: {report.error['message']}")
    table.add_row("tempo (s)", f"{report.timing.get('seconds', 0.0):.2f}")
    console.print(table)


def main(argv: list[str] | None = None) -> int:
    coloredlogs.install(level=config.LOG_LEVEL, fmt="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = parse_args(argv)
    console = Console()

    if args.command == "list":
        print_builtins(console)
        return 0

    try:
        source = args.scenario if args.scenario is not None else builtin_path(args.builtin)
        report_path = args.report
        if report_path is None:
            report_path = Path(config.REPORT_DIR) / f"{Path(source).stem}-{args.command}.json"
        report = run_scenario(
            source,
            action=args.command,
            seed=args.seed,
            samples=args.samples,
            tol=args.tol,
            report_path=report_path,
            workers=args.workers,
        )
    except (ScenarioParseError, ScenarioValidationError) as error:
        logger.error("Cenário inválido: %s", error)
        return 1

    print_report(console, report)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
