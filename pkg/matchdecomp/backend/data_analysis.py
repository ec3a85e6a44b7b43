"""data_analysis.py
Tabelas de resultados em pandas: tabela resumo por instância e método
(comprimento e erro final, médias e medianas por tamanho) e comparação
entre duas tabelas resumo.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Tuple

import numpy as np
import pandas as pd

METHOD_LABELS = {
    'fcfw': 'MW',
    'efcfw+random': 'Rand',
    'efcfw+qaoa': 'QAOA',
    'efcfw+anneal': 'SA',
}
LABEL_ORDER = ['MW', 'Rand', 'QAOA', 'SA']
AGGREGATE_IDS = ('Average', 'Median')
FAILED = "failed"
FLOAT_FORMAT = "%.17g"
_ID_RE = re.compile(r"_id(\d+)$")
_NAME_RE = re.compile(r"^(?P<kind>.+)_n(?P<n>\d+)_id\d+$")


def instance_index(instance: str) -> int:
    match = _ID_RE.search(instance)
    return int(match.group(1)) if match else -1


def _from_name(instance: str, group: str) -> Any:
    match = _NAME_RE.match(instance)
    if not match:
        return np.nan
    return int(match.group(group)) if group == 'n' else match.group(group)


def results_frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """Uma linha por execução (ok ou falha), ordenada por (topologia, n, id, método).

    Execuções que falharam antes de ler a instância recebem topologia e n
    a partir do nome do arquivo.
    """
    df = pd.DataFrame(list(rows))
    if df.empty:
        return pd.DataFrame(columns=['topology', 'n', 'id', 'edges', 'method', 'label', 'length', 'error', 'reached', 'status'])
    df = df.rename(columns={'kind': 'topology'})
    for col in ('topology', 'n', 'edges', 'length', 'error', 'reached'):
        if col not in df:
            df[col] = np.nan
    if 'status' not in df:
        df['status'] = 'ok'
    missing = df['topology'].isna()
    df.loc[missing, 'topology'] = df.loc[missing, 'instance'].map(lambda name: _from_name(name, 'kind'))
    missing = df['n'].isna()
    df.loc[missing, 'n'] = df.loc[missing, 'instance'].map(lambda name: _from_name(name, 'n'))
    df = df.dropna(subset=['topology', 'n'])
    df['n'] = df['n'].astype(int)
    df['id'] = df['instance'].map(instance_index)
    df['label'] = df['method'].map(METHOD_LABELS)
    df['order'] = df['label'].map({label: i for i, label in enumerate(LABEL_ORDER)})
    df = df.sort_values(['topology', 'n', 'id', 'order'], kind="stable").drop(columns='order')
    return df.reset_index(drop=True)


def _reached_cell(status: Any, reached: Any) -> str:
    if isinstance(status, float) and np.isnan(status):
        return ""
    if status != 'ok':
        return FAILED
    return "yes" if bool(reached) else "no"


def summary_table(results: pd.DataFrame) -> pd.DataFrame:
    """Tabela larga: por instância, '<método> length', '<método> error', '<método> reached'
    ('yes', 'no' ou 'failed') e '<método> ok'; ao final de cada (topologia, n), linhas
    Average e Median.

    Médias e medianas usam só as execuções ok; nas linhas agregadas 'reached' é
    'alcançaram/ok' e 'ok' é 'ok/instâncias'.
    """
    if results.empty:
        return pd.DataFrame(columns=['topology', 'n', 'id', 'edges'])
    labels = [label for label in LABEL_ORDER if label in set(results['label'])]
    keys = ['topology', 'n', 'id']
    base = results.groupby(keys, sort=True)['edges'].max().reset_index()

    wide = base.copy()
    key = pd.MultiIndex.from_frame(wide[keys])
    for label in labels:
        sub = results[results['label'] == label].set_index(keys)
        ok = sub['status'] == 'ok'
        wide[f"{label} length"] = sub['length'].where(ok).reindex(key).to_numpy(dtype=float)
        wide[f"{label} error"] = sub['error'].where(ok).reindex(key).to_numpy(dtype=float)
        status = sub['status'].reindex(key).to_numpy()
        reached = sub['reached'].reindex(key).to_numpy()
        wide[f"{label} reached"] = [_reached_cell(s, r) for s, r in zip(status, reached)]
        wide[f"{label} ok"] = ["" if cell == "" else ("no" if cell == FAILED else "yes")
                               for cell in wide[f"{label} reached"]]

    blocks: List[pd.DataFrame] = []
    for (topology, n), group in wide.groupby(['topology', 'n'], sort=True):
        group = group.sort_values('id', kind="stable")
        blocks.append(group.astype({'id': object}))
        for agg in AGGREGATE_IDS:
            row: Dict[str, Any] = {'topology': topology, 'n': n, 'id': agg,
                                   'edges': _aggregate(group['edges'], agg)}
            for label in labels:
                row[f"{label} length"] = _aggregate(group[f"{label} length"], agg)
                row[f"{label} error"] = _aggregate(group[f"{label} error"], agg)
                ok = int((group[f"{label} ok"] == "yes").sum())
                hits = int((group[f"{label} reached"] == "yes").sum())
                row[f"{label} reached"] = f"{hits}/{ok}"
                row[f"{label} ok"] = f"{ok}/{len(group)}"
            blocks.append(pd.DataFrame([row]))
    return pd.concat(blocks, ignore_index=True)


def _aggregate(values: pd.Series, agg: str) -> float:
    values = pd.to_numeric(values, errors="coerce").dropna()
    if values.empty:
        return float("nan")
    return float(values.mean() if agg == 'Average' else values.median())


def write_summary(table: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_summary(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise RuntimeError(f"Tabela resumo não encontrada: {path}")
    return pd.read_csv(path, dtype={'id': str, 'topology': str}, keep_default_na=True)


def summary_labels(table: pd.DataFrame) -> List[str]:
    return [label for label in LABEL_ORDER if f"{label} length" in table.columns]


def check_aggregates(table: pd.DataFrame, tol: float = 1e-12) -> bool:
    """Recalcula médias e medianas a partir das linhas por instância."""
    labels = summary_labels(table)
    ids = table['id'].astype(str)
    for (topology, n), group in table.groupby(['topology', 'n'], sort=False):
        per_instance = group[~ids.loc[group.index].isin(AGGREGATE_IDS)]
        for agg in AGGREGATE_IDS:
            printed = group[ids.loc[group.index] == agg]
            if printed.empty:
                return False
            for label in labels:
                for metric in ('length', 'error'):
                    col = f"{label} {metric}"
                    expected = _aggregate(per_instance[col], agg)
                    got = float(printed[col].iloc[0])
                    if np.isnan(expected) and np.isnan(got):
                        continue
                    if not abs(expected - got) <= tol * max(1.0, abs(expected)):
                        return False
    return True


def compare_tables(table_a: pd.DataFrame, table_b: pd.DataFrame,
                   length_tol: float = 0.0, error_tol: float = 1e-12) -> Tuple[pd.DataFrame, bool]:
    """Alinha por (topologia, n, id, método) e lista as diferenças.

    Devolve (tabela de diferenças, houve_regressão). Métodos ausentes em uma
    das tabelas geram uma linha 'not comparable', tratada como regressão.
    """
    columns = ['topology', 'n', 'id', 'method', 'length_a', 'length_b', 'delta_length',
               'error_a', 'error_b', 'delta_error', 'status']
    rows: List[Dict[str, Any]] = []
    labels_a, labels_b = summary_labels(table_a), summary_labels(table_b)
    for label in LABEL_ORDER:
        if (label in labels_a) != (label in labels_b):
            rows.append({'topology': '*', 'n': np.nan, 'id': '*', 'method': label, 'status': 'not comparable'})

    def _per_instance(table: pd.DataFrame) -> pd.DataFrame:
        table = table[~table['id'].astype(str).isin(AGGREGATE_IDS)].copy()
        table['id'] = table['id'].astype(str)
        table['topology'] = table['topology'].astype(str)
        return table.set_index(['topology', 'n', 'id'])

    a, b = _per_instance(table_a), _per_instance(table_b)
    keys = sorted(set(a.index) | set(b.index), key=lambda k: (k[0], k[1], int(k[2]) if k[2].isdigit() else k[2]))
    for label in [lbl for lbl in LABEL_ORDER if lbl in labels_a and lbl in labels_b]:
        for key in keys:
            if key not in a.index or key not in b.index:
                rows.append({'topology': key[0], 'n': key[1], 'id': key[2], 'method': label, 'status': 'not comparable'})
                continue
            la, lb = float(a.loc[key, f"{label} length"]), float(b.loc[key, f"{label} length"])
            ea, eb = float(a.loc[key, f"{label} error"]), float(b.loc[key, f"{label} error"])
            same_length = (la == lb) or (np.isnan(la) and np.isnan(lb))
            same_error = (ea == eb) or (np.isnan(ea) and np.isnan(eb))
            if same_length and same_error:
                continue
            regressed = (
                np.isnan(lb) and not np.isnan(la)
                or lb - la > length_tol
                or eb - ea > error_tol
            )
            rows.append({
                'topology': key[0], 'n': key[1], 'id': key[2], 'method': label,
                'length_a': la, 'length_b': lb, 'delta_length': lb - la,
                'error_a': ea, 'error_b': eb, 'delta_error': eb - ea,
                'status': 'regression' if regressed else 'changed',
            })
    diff = pd.DataFrame(rows, columns=columns)
    regression = bool((diff['status'] != 'changed').any()) if not diff.empty else False
    return diff, regression
