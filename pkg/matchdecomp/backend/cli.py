"""cli.py
Interface de linha de comando do harness de benchmark.

Subcomandos: generate | run | report | compare.
Códigos de saída: 0 sucesso, 1 falhas parciais (ou regressão no compare),
2 erro de configuração.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

import pandas as pd
from rich.console import Console as RichConsole
from rich.table import Table as RichTable

from . import config_manager, data_analysis, report_generator, services

logger = logging.getLogger("matchdecomp.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
SUMMARY_FILE = "summary.csv"


def _fixed_params(text: str) -> Tuple[float, float]:
    try:
        gamma, beta = (float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--fixed-params espera 'gamma,beta' (recebido {text!r})") from e
    return gamma, beta


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchdecomp",
        description="Decomposição esparsa de grafos ponderados em matchings (FCFW / E-FCFW).",
    )
    parser.add_argument('--config', type=Path, default=None, help="arquivo YAML de configuração (padrão: decomp_config.yaml)")
    sub = parser.add_subparsers(dest='command', required=True)

    def _common(p: argparse.ArgumentParser) -> None:
        p.add_argument('--profile', type=Path, default=None, help="perfil de experimento (YAML)")
        p.add_argument('--out', type=Path, default=None, help="diretório de saída")
        p.add_argument('--seed', type=int, default=None, help="semente do amostrador")

    gen = sub.add_parser('generate', help="gera o corpus de instâncias")
    _common(gen)

    run = sub.add_parser('run', help="executa todos os métodos em todas as instâncias")
    _common(run)
    run.add_argument('--jobs', type=int, default=None, help="execuções em paralelo")
    run.add_argument('--method', type=str, default=None,
                     help="métodos separados por vírgula (fcfw, efcfw+random, efcfw+anneal, efcfw+qaoa)")
    run.add_argument('--epsilon', type=float, default=None, help="erro alvo")
    run.add_argument('--d', type=int, default=None, help="matchings amostrados por iteração (0 = FCFW)")
    run.add_argument('--shots', type=int, default=None, help="amostras por iteração")
    run.add_argument('--fixed-params', type=_fixed_params, default=None, dest='fixed_params',
                     help="QAOA sem otimização, com 'gamma,beta'")

    rep = sub.add_parser('report', help="relatórios e dados para gráficos a partir dos resultados")
    _common(rep)
    rep.add_argument('--pdf', action='store_true', help="também gera bench_report.pdf")

    cmp_ = sub.add_parser('compare', help="compara duas tabelas resumo")
    cmp_.add_argument('summary_a', type=Path)
    cmp_.add_argument('summary_b', type=Path)
    cmp_.add_argument('--out', type=Path, default=None, help="grava a tabela de diferenças neste diretório")
    return parser


def _configure_logging(config) -> None:
    log_cfg = config.get('logging', {})
    logging.basicConfig(
        level=getattr(logging, str(log_cfg.get('level', 'INFO')).upper(), logging.INFO),
        format=log_cfg.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s'),
    )


def _print_frame(console: RichConsole, df: pd.DataFrame, title: str) -> None:
    table = RichTable(title=title, show_lines=False, border_style="blue")
    for col in df.columns:
        table.add_column(str(col), justify="right" if pd.api.types.is_numeric_dtype(df[col]) else "left")
    for row in df.itertuples(index=False):
        table.add_row(*("" if pd.isna(v) else (f"{v:.3e}" if isinstance(v, float) and abs(v) < 1e-2 and v else str(v)) for v in row))
    console.print(table)


def cmd_generate(args, config, console: RichConsole) -> int:
    profile = services.load_experiment(args.profile, {'out': args.out, 'seed': args.seed}, config)
    written = services.generate_corpus(profile)
    console.print(f"[green]{len(written)} instâncias gravadas em {profile.instances_dir}[/]")
    return EXIT_OK


def cmd_run(args, config, console: RichConsole) -> int:
    overrides = {
        'out': args.out, 'jobs': args.jobs, 'seed': args.seed, 'method': args.method,
        'epsilon': args.epsilon, 'd': args.d, 'shots': args.shots, 'fixed_params': args.fixed_params,
    }
    profile = services.load_experiment(args.profile, overrides, config)
    outcome = services.run_sweep(profile)

    results = data_analysis.results_frame(outcome.rows)
    summary = data_analysis.summary_table(results)
    path = data_analysis.write_summary(summary, profile.output_dir / SUMMARY_FILE)
    _print_frame(console, summary.drop(columns=[c for c in summary.columns if c.endswith((" reached", " ok"))]), "Resumo")
    console.print(f"Tabela resumo: {path}")

    for row in outcome.rows:
        if row['status'] != 'ok':
            console.print(f"[red]FALHA[/] {row['instance']} / {row['method']}: {row.get('message')}")
    return EXIT_OK if outcome.ok else EXIT_FAILED


def cmd_report(args, config, console: RichConsole) -> int:
    profile = services.load_experiment(args.profile, {'out': args.out, 'seed': args.seed}, config)
    written = report_generator.write_report(
        profile.results_dir, profile.instances_dir, profile.output_dir, profile.config, pdf=args.pdf,
    )
    console.print(f"[green]{len(written)} arquivos de relatório gravados em {profile.output_dir}[/]")
    return EXIT_OK


def cmd_compare(args, config, console: RichConsole) -> int:
    bench = config.get('bench', {})
    diff, regression = data_analysis.compare_tables(
        data_analysis.read_summary(args.summary_a),
        data_analysis.read_summary(args.summary_b),
        length_tol=float(bench.get('compare_length_tol', 0)),
        error_tol=float(bench.get('compare_error_tol', 1e-12)),
    )
    if args.out is not None:
        data_analysis.write_summary(diff, Path(args.out) / "compare.csv")
    if diff.empty:
        console.print("[green]Tabelas idênticas.[/]")
    else:
        _print_frame(console, diff, "Diferenças")
    if regression:
        console.print("[red]Regressão ou entrada não comparável encontrada.[/]")
        return EXIT_FAILED
    return EXIT_OK


COMMANDS = {
    'generate': cmd_generate,
    'run': cmd_run,
    'report': cmd_report,
    'compare': cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None, console: Optional[RichConsole] = None) -> int:
    args = build_parser().parse_args(argv)
    console = console or RichConsole()
    config = config_manager.get_config(args.config)
    _configure_logging(config)
    try:
        return COMMANDS[args.command](args, config, console)
    except RuntimeError as e:
        # arquivos de resultado ausentes e afins
        logger.error(str(e))
        console.print(f"[red]{e}[/]")
        return EXIT_FAILED
    except (ValueError, KeyError, TypeError) as e:
        logger.error(f"Erro de configuração: {e}")
        console.print(f"[red]Erro de configuração:[/] {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
