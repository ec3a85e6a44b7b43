"""config_manager.py
Centraliza a leitura de configurações YAML do matchdecomp.
Carrega o arquivo decomp_config.yaml na raiz do pacote e o mescla sobre os
valores padrão definidos aqui, para que chaves ausentes nunca quebrem o código.
"""
from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger("matchdecomp.config")

CONFIG_FILENAME = "decomp_config.yaml"

DEFAULT_CONFIG: Dict[str, Any] = {
    'engine': {
        'epsilon': 1e-6,
        'd': 5,
        'max_iterations_factor': 4,
        'sum_mode': 'le',
        'nonzero_threshold': 1e-9,
        'cardinality_budget': 1_000_000,
        'greedy_screen': 8,
        'stall_tol': 1e-15,
    },
    'sampler': {
        'method': 'qaoa',
        'd': 5,
        'seed': 0,
        'shots': {
            'random': 10000,
            'qaoa': 10000,
            'anneal': 1000,
        },
    },
    'anneal': {
        'sweeps': 100,
        't1_ratio': 1e-3,
        't0': None,
    },
    'qaoa': {
        'qubit_cap': 26,
        'layers': 1,
        'optimize': True,
        'start': [0.5, -0.5],
        'fixed_params': [-0.5, 0.5],
        'param_order': 'beta_gamma',
        'maxiter': 200,
        'rhobeg': 0.5,
        'tol': 1e-4,
    },
    'qubo': {
        'penalty_factor': 0.2,
    },
    'matching': {
        'enumeration_cap': 24,
    },
    'tolerances': {
        'substochastic_tol': 1e-12,
        'weight_sum_tol': 1e-9,
        'equal_tol': 1e-12,
    },
    'bench': {
        'jobs': 1,
        'output_dir': 'bench_out',
        'compare_length_tol': 0,
        'compare_error_tol': 1e-12,
    },
    'logging': {
        'level': 'INFO',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    },
    'report': {
        'submitter': 'matchdecomp bench',
        'reference': 'E-FCFW sparse matching decomposition',
        'hardware': 'CPU (statevector simulation)',
        'compare_max_edges': 12,
        'compare_top': 5,
    },
}


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Mescla *override* sobre uma cópia de *base*, recursivamente nos dicts."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def default_config_path() -> Path:
    return Path(__file__).parent.parent / CONFIG_FILENAME


def get_config(path: Optional[str | Path] = None) -> Dict[str, Any]:
    """Retorna o dicionário de configuração carregado do decomp_config.yaml."""
    config_path = Path(path) if path else default_config_path()

    try:
        if config_path.exists():
            with open(config_path, 'r', encoding='utf-8') as f:
                loaded = yaml.safe_load(f)
            return _deep_merge(DEFAULT_CONFIG, loaded or {})
        # Criar arquivo de configuração se não existir
        with open(config_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(DEFAULT_CONFIG, f, default_flow_style=False, sort_keys=False)
        return copy.deepcopy(DEFAULT_CONFIG)
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"Erro ao carregar configuração {config_path}: {e}")
        return copy.deepcopy(DEFAULT_CONFIG)


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Versão pública do merge, usada para sobrepor perfis e flags da CLI."""
    return _deep_merge(base, override)
