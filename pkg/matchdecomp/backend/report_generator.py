"""report_generator.py
Relatórios de benchmark: um BenchReport por execução (YAML sempre, PDF com
``--pdf``), arquivos de dados para gráficos (erro × comprimento, matrizes de
sobreposição, distribuição de pesos) e comparação de matchings entre
amostradores.
"""

from __future__ import annotations

import datetime
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.platypus import PageBreak, Paragraph, SimpleDocTemplate, Spacer
from reportlab.platypus import Table as PDFTable
from reportlab.platypus import TableStyle as PDFTableStyle

from . import store
from .data_analysis import FLOAT_FORMAT, METHOD_LABELS
from .efcfw_engine import overlap_matrix
from .graph_core import WeightedGraph, matching_weight
from .matching_exact import max_weight_matching
from .samplers import SamplerConfig, sample_bitstrings, select_top_d, valid_rows

logger = logging.getLogger("matchdecomp.report")

REPORTS_DIR = "reports"
PLOTS_DIR = "plots"
OVERLAP_DIR = "overlap"


# ---------------------------------------------------------------------------
# BenchReport
# ---------------------------------------------------------------------------
def _variable_counts(doc: Mapping[str, Any]) -> List[Dict[str, int]]:
    """Variáveis por iteração: binárias = arestas do QUBO, contínuas = pesos de 𝕄."""
    uses_qubo = doc['method'] in ("efcfw+anneal", "efcfw+qaoa")
    binary = int(doc.get('instance_edges') or 0) if uses_qubo else 0
    counts = []
    atoms = 0
    for k, added in enumerate(doc.get('added_per_iteration') or []):
        atoms += int(added)
        counts.append({'iteration': k, 'decision': binary + atoms, 'binary': binary, 'continuous': atoms})
    return counts


def _coefficients(doc: Mapping[str, Any]) -> Dict[str, Any]:
    lambdas = [s['lambda'] for s in doc.get('sampler') or [] if 'lambda' in s]
    sampler_cfg = (doc.get('config') or {}).get('sampler') or {}
    meta: Dict[str, Any] = {'type': 'real', 'penalty_factor': sampler_cfg.get('penalty_factor')}
    if lambdas:
        meta.update({'lambda_min': float(min(lambdas)), 'lambda_max': float(max(lambdas))})
    zz = [s['zz_terms'] for s in doc.get('sampler') or [] if 'zz_terms' in s]
    if zz:
        meta['zz_terms'] = int(max(zz))
        meta['z_terms'] = int(doc.get('instance_edges') or 0)
    return meta


def _workflow(method: str) -> List[str]:
    steps = ["matching de peso máximo (Blossom) sobre o resíduo da trajetória FCFW"]
    if method == "efcfw+random":
        steps.insert(0, "amostragem uniforme de bitstrings e pós-seleção dos d melhores matchings")
    elif method == "efcfw+anneal":
        steps.insert(0, "QUBO penalizado + simulated annealing e pós-seleção dos d melhores matchings")
    elif method == "efcfw+qaoa":
        steps.insert(0, "QUBO penalizado + QAOA (uma camada, statevector) e pós-seleção dos d melhores matchings")
    steps.append("mínimos quadrados com limite de cardinalidade k+1 sobre todos os matchings")
    return steps


def bench_report(result_doc: Mapping[str, Any], config: Mapping[str, Any],
                 date: Optional[str] = None) -> Dict[str, Any]:
    """Campos de desempenho de uma execução no formato das diretrizes de benchmarking."""
    report_cfg = config.get('report', {})
    run_cfg = result_doc.get('config') or {}
    epsilon = float(run_cfg.get('epsilon', config['engine']['epsilon']))
    error = float(result_doc['error'])
    timings = result_doc.get('timings') or {}
    method = result_doc['method']
    successful = int(result_doc['terminated'] == "converged" and error <= epsilon)
    return {
        'schema_version': store.SCHEMA_VERSION,
        'problem': result_doc['instance']['id'],
        'method': method,
        'label': METHOD_LABELS.get(method, method),
        'submitter': report_cfg.get('submitter'),
        'date': date or datetime.date.today().isoformat(),
        'reference': report_cfg.get('reference'),
        'best_objective': int(result_doc['length']),
        'final_error': error,
        'optimality_bound': None,
        'modeling_approach': (
            "QUBO sobre arestas (penalidade λ) + mínimos quadrados com cardinalidade"
            if method in ("efcfw+anneal", "efcfw+qaoa")
            else "matching de peso máximo + mínimos quadrados com cardinalidade"
        ),
        'variables': _variable_counts(result_doc),
        'coefficients': _coefficients(result_doc),
        'workflow': _workflow(method),
        'algorithm_type': 'stochastic' if method != "fcfw" else 'deterministic',
        'runs': {'runs': 1, 'feasible': 1, 'successful': successful},
        'success_threshold': epsilon,
        'terminated': result_doc['terminated'],
        'hardware': report_cfg.get('hardware'),
        'runtimes': {
            'total': float(timings.get('total', 0.0)),
            'cpu': float(timings.get('cpu', 0.0)),
            'sampler': float(timings.get('sampler', 0.0)),
        },
    }


# ---------------------------------------------------------------------------
# Dados para gráficos
# ---------------------------------------------------------------------------
def error_curves(result_docs: Sequence[Mapping[str, Any]]) -> pd.DataFrame:
    """Uma linha por iteração: instância, método, iteração, comprimento, erro."""
    rows = []
    for doc in result_docs:
        for k, length, error in doc['error_trace']:
            rows.append({
                'instance': doc['instance']['id'],
                'method': doc['method'],
                'iteration': int(k),
                'length': int(length),
                'error': float(error),
            })
    return pd.DataFrame(rows, columns=['instance', 'method', 'iteration', 'length', 'error'])


def overlap_frame(result_doc: Mapping[str, Any]) -> pd.DataFrame:
    mat = overlap_matrix(result_doc['matchings'])
    names = [f"m{i}" for i in range(mat.shape[0])]
    return pd.DataFrame(mat, index=names, columns=names)


def weight_frame(result_doc: Mapping[str, Any], graph: WeightedGraph) -> pd.DataFrame:
    """Peso de cada matching da decomposição final sob D*, com o α correspondente."""
    rows = [
        {
            'instance': result_doc['instance']['id'],
            'method': result_doc['method'],
            'index': i,
            'alpha': float(alpha),
            'weight': matching_weight(m, graph),
        }
        for i, (m, alpha) in enumerate(zip(result_doc['matchings'], result_doc['weights']))
    ]
    return pd.DataFrame(rows, columns=['instance', 'method', 'index', 'alpha', 'weight'])


# ---------------------------------------------------------------------------
# Comparação de matchings entre amostradores
# ---------------------------------------------------------------------------
def compare_matchings(graph: WeightedGraph, sampler_cfgs: Sequence[SamplerConfig],
                      top: int = 5) -> pd.DataFrame:
    """Top-*top* matchings válidos distintos por amostrador, ao lado do matching exato.

    A coluna ``valid_fraction`` traz a fração de bitstrings válidos de cada
    amostrador (1 para a linha exata).
    """
    columns = ['source', 'rank', 'matching', 'weight', 'valid_fraction']
    exact = max_weight_matching(graph)
    rows = [{'source': 'exact', 'rank': 0, 'matching': str(exact.matching.to_list()),
             'weight': exact.weight, 'valid_fraction': 1.0}]
    for cfg in sampler_cfgs:
        bits = sample_bitstrings(cfg, graph, np.random.default_rng(cfg.seed))
        valid = valid_rows(bits, graph)
        fraction = float(valid.mean()) if valid.size else 0.0
        for rank, m in enumerate(select_top_d(bits[valid], graph, top)):
            rows.append({'source': cfg.method, 'rank': rank, 'matching': str(m.to_list()),
                         'weight': matching_weight(m, graph), 'valid_fraction': fraction})
        logger.debug(f"Comparação de matchings: {cfg.method} com {fraction:.4f} válidos")
    return pd.DataFrame(rows, columns=columns)


# ---------------------------------------------------------------------------
# PDF
# ---------------------------------------------------------------------------
def _df_to_pdf_table(df: pd.DataFrame, styles) -> Any:
    if df is None or df.empty:
        return Paragraph("Dados não disponíveis.", styles['Normal'])
    data = [[str(item) for item in row] for row in [list(df.columns)] + df.values.tolist()]
    pdf_table = PDFTable(data)
    pdf_table.setStyle(PDFTableStyle([
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor("#34495E")),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
        ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, -1), 8),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.grey),
    ]))
    return pdf_table


def _report_rows(report: Mapping[str, Any]) -> pd.DataFrame:
    rows = []
    for key, value in report.items():
        if key in ('schema_version', 'variables'):
            continue
        if isinstance(value, dict):
            value = ", ".join(f"{k}={v}" for k, v in value.items())
        elif isinstance(value, list):
            value = "; ".join(str(v) for v in value)
        rows.append({'Campo': key, 'Valor': value})
    variables = report.get('variables') or []
    if variables:
        last = variables[-1]
        rows.append({'Campo': 'variables (última iteração)',
                     'Valor': f"decisão={last['decision']}, binárias={last['binary']}, contínuas={last['continuous']}"})
    return pd.DataFrame(rows)


def gerar_relatorio_pdf(reports: Sequence[Mapping[str, Any]], destino: str | Path = "bench_report.pdf") -> Path:
    """Um PDF com uma tabela de campos por execução."""
    destino = Path(destino)
    destino.parent.mkdir(parents=True, exist_ok=True)
    doc = SimpleDocTemplate(str(destino), pagesize=A4, leftMargin=2 * cm, rightMargin=2 * cm,
                            topMargin=2 * cm, bottomMargin=2 * cm)
    styles = getSampleStyleSheet()
    story: List[Any] = [Paragraph("Relatório de benchmark matchdecomp", styles['h1']), Spacer(1, 12)]
    for i, report in enumerate(reports):
        story.append(Paragraph(f"{report['problem']} / {report['method']}", styles['h2']))
        story.append(_df_to_pdf_table(_report_rows(report), styles))
        story.append(Spacer(1, 12))
        if i % 2 == 1 and i + 1 < len(reports):
            story.append(PageBreak())
    doc.build(story)
    return destino


# ---------------------------------------------------------------------------
# Orquestração do comando report
# ---------------------------------------------------------------------------
def _write_csv(df: pd.DataFrame, path: Path, index: bool = False) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_report(results_dir: str | Path, instances_dir: str | Path, out_dir: str | Path,
                 config: Mapping[str, Any], pdf: bool = False,
                 date: Optional[str] = None) -> List[Path]:
    """Lê todos os resultados de *results_dir* e escreve relatórios e dados de gráficos em *out_dir*."""
    results_dir, instances_dir, out_dir = Path(results_dir), Path(instances_dir), Path(out_dir)
    paths = store.list_files(results_dir, ".result")
    if not paths:
        raise RuntimeError(f"Nenhum arquivo de resultado encontrado em {results_dir}")

    written: List[Path] = []
    docs = []
    reports = []
    weights: List[pd.DataFrame] = []
    graphs: Dict[str, WeightedGraph] = {}
    for path in paths:
        doc = store.load_result(path)
        docs.append(doc)
        report = bench_report(doc, config, date)
        reports.append(report)
        target = out_dir / REPORTS_DIR / f"{path.stem}.report.yaml"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(store.dump_yaml(report), encoding="utf-8")
        written.append(target)

        written.append(_write_csv(overlap_frame(doc), out_dir / PLOTS_DIR / OVERLAP_DIR / f"{path.stem}.csv", index=True))
        ref = doc['instance']
        instance_path = instances_dir / ref.get('file', f"{ref['id']}.instance")
        if ref['id'] not in graphs:
            if not instance_path.exists():
                logger.warning(f"Instância {instance_path} ausente; distribuição de pesos omitida para {path.name}")
                continue
            graphs[ref['id']] = store.load_instance(instance_path).graph
        weights.append(weight_frame(doc, graphs[ref['id']]))

    written.append(_write_csv(error_curves(docs), out_dir / PLOTS_DIR / "error_vs_length.csv"))
    if weights:
        written.append(_write_csv(pd.concat(weights, ignore_index=True), out_dir / PLOTS_DIR / "weight_distribution.csv"))

    report_cfg = config.get('report', {})
    max_edges = int(report_cfg.get('compare_max_edges', 12))
    methods = [m.split("+", 1)[1] for m in sorted({d['method'] for d in docs}) if m.startswith("efcfw+")]
    if methods:
        for instance_id, graph in sorted(graphs.items()):
            if len(graph.edges) > max_edges:
                continue
            cfgs = [SamplerConfig.from_config(config, method, d=1) for method in methods]
            table = compare_matchings(graph, cfgs, int(report_cfg.get('compare_top', 5)))
            written.append(_write_csv(table, out_dir / PLOTS_DIR / "matching_comparison" / f"{instance_id}.csv"))

    if pdf:
        written.append(gerar_relatorio_pdf(reports, out_dir / "bench_report.pdf"))
    logger.info(f"Relatório: {len(reports)} execuções, {len(written)} arquivos em {out_dir}")
    return written
