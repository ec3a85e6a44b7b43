"""services.py
Camada de serviços do matchdecomp.
Agrupa a orquestração usada pela CLI: leitura de perfis de experimento,
geração do corpus de instâncias e execução das varreduras método × instância.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import joblib

from . import config_manager, store
from .efcfw_engine import EngineConfig, run
from .instances import generate_family, instance_file_name
from .samplers import run_seed
from .store import SCHEMA_VERSION, SchemaVersionError

logger = logging.getLogger("matchdecomp.services")

METHODS = ("fcfw", "efcfw+random", "efcfw+anneal", "efcfw+qaoa")
INSTANCES_DIR = "instances"
RESULTS_DIR = "results"


@dataclass(frozen=True)
class Family:
    kind: str
    sizes: Tuple[int, ...]
    count: int = 10
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentProfile:
    families: Tuple[Family, ...]
    methods: Tuple[str, ...]
    config: Mapping[str, Any]
    output_dir: Path
    jobs: int = 1
    base_seed: int = 0

    @property
    def instances_dir(self) -> Path:
        return self.output_dir / INSTANCES_DIR

    @property
    def results_dir(self) -> Path:
        return self.output_dir / RESULTS_DIR

    def instance_paths(self) -> List[Tuple[Family, int, int, Path]]:
        """(família, n, k, caminho) em ordem (tipo, n, k)."""
        out = []
        for fam in self.families:
            for n in fam.sizes:
                for k in range(fam.count):
                    out.append((fam, n, k, self.instances_dir / instance_file_name(fam.kind, n, k)))
        return out


@dataclass
class SweepOutcome:
    rows: List[Dict[str, Any]]
    failures: int = 0

    @property
    def ok(self) -> bool:
        return self.failures == 0


def build_profile(document: Optional[Mapping[str, Any]] = None,
                  config: Optional[Mapping[str, Any]] = None,
                  overrides: Optional[Mapping[str, Any]] = None) -> ExperimentProfile:
    """Monta o perfil a partir do documento YAML, da configuração base e das flags da CLI.

    Flags reconhecidas em *overrides*: out, jobs, seed, method, epsilon, d,
    shots, fixed_params (tupla gamma, beta).
    """
    document = dict(document or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if document and str(document.get('schema_version', SCHEMA_VERSION)).split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise SchemaVersionError(f"Perfil com schema_version {document.get('schema_version')!r} não suportado.")

    cfg = config_manager.merge_config(config or config_manager.get_config(), {
        key: document[key] for key in ('engine', 'sampler', 'anneal', 'qaoa', 'qubo', 'bench') if key in document
    })
    if 'epsilon' in overrides:
        cfg['engine']['epsilon'] = float(overrides['epsilon'])
    if 'd' in overrides:
        cfg['engine']['d'] = int(overrides['d'])
    if 'seed' in overrides:
        cfg['sampler']['seed'] = int(overrides['seed'])
    if 'shots' in overrides:
        cfg['sampler']['shots'] = {m: int(overrides['shots']) for m in cfg['sampler']['shots']}
    if 'fixed_params' in overrides:
        gamma, beta = overrides['fixed_params']
        cfg['qaoa'].update({'optimize': False, 'fixed_params': [float(gamma), float(beta)], 'param_order': 'gamma_beta'})

    corpus = document.get('corpus', {})
    families = tuple(
        Family(
            kind=fam['kind'],
            sizes=tuple(int(n) for n in fam.get('sizes', [fam.get('n')])),
            count=int(fam.get('count', 10)),
            params=dict(fam.get('params') or {}),
        )
        for fam in corpus.get('families', [{'kind': 'complete', 'sizes': [6], 'count': 10}])
    )
    methods = tuple(overrides['method'].split(",")) if 'method' in overrides else tuple(document.get('methods', METHODS))
    if int(cfg['engine']['d']) == 0:
        methods = ("fcfw",)
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"Método desconhecido no perfil: {method!r} (use {', '.join(METHODS)}).")

    output_dir = Path(overrides.get('out') or document.get('output_dir') or cfg['bench']['output_dir'])
    jobs = int(overrides.get('jobs') or document.get('jobs') or cfg['bench']['jobs'])
    return ExperimentProfile(
        families=families,
        methods=methods,
        config=cfg,
        output_dir=output_dir,
        jobs=jobs,
        base_seed=int(corpus.get('base_seed', 0)),
    )


def load_experiment(path: Optional[str | Path], overrides: Optional[Mapping[str, Any]] = None,
                    config: Optional[Mapping[str, Any]] = None) -> ExperimentProfile:
    document = store.load_profile(path) if path else {}
    return build_profile(document, config, overrides)


# --------------------------- CORPUS -----------------------------------

def generate_corpus(profile: ExperimentProfile) -> List[Path]:
    """Escreve o corpus de forma determinística; regravar produz os mesmos bytes."""
    written: List[Path] = []
    for fam in profile.families:
        for n in fam.sizes:
            for k, instance in enumerate(generate_family(fam.kind, n, fam.count, profile.base_seed, fam.params)):
                path = profile.instances_dir / instance_file_name(fam.kind, n, k)
                store.save_instance(instance, path)
                written.append(path)
        logger.info(f"Família {fam.kind} {list(fam.sizes)}: {fam.count} instâncias por tamanho")
    return written


def ensure_corpus(profile: ExperimentProfile) -> List[Path]:
    if all(path.exists() for *_, path in profile.instance_paths()):
        return [path for *_, path in profile.instance_paths()]
    logger.info(f"Corpus incompleto em {profile.instances_dir}; gerando.")
    return generate_corpus(profile)


# --------------------------- VARREDURA --------------------------------

def _run_one(instance_path: Path, method: str, config: Mapping[str, Any], results_dir: Path) -> Dict[str, Any]:
    """Executa um método em uma instância e grava o arquivo de resultado."""
    row: Dict[str, Any] = {'instance': instance_path.stem, 'method': method}
    try:
        instance = store.load_instance(instance_path)
        row.update({'kind': instance.topology.kind, 'n': instance.n, 'edges': len(instance.graph.edges)})
        seed = run_seed(int(config.get('sampler', {}).get('seed', 0)), instance.id, method)
        engine_cfg = EngineConfig.from_config(config, method, seed=seed)
        result = run(instance, engine_cfg)
        ref = {'id': instance.id, 'file': instance_path.name, 'sha256': store.instance_hash(instance)}
        store.save_result(result, ref, results_dir / store.result_file_name(instance.id, method))
        row.update({
            'length': result.length,
            'error': float(result.error),
            'terminated': result.terminated,
            'seed': seed,
            'reached': bool(result.error <= engine_cfg.epsilon),
            'status': 'ok',
        })
    except Exception as e:
        logger.error(f"Falha em {instance_path.name} / {method}: {e}", exc_info=True)
        row.update({'status': 'failed', 'message': str(e)})
    return row


def run_sweep(profile: ExperimentProfile) -> SweepOutcome:
    """Roda todos os métodos em todas as instâncias; falhas individuais não interrompem a varredura."""
    paths = ensure_corpus(profile)
    profile.results_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(path, method) for path in paths for method in profile.methods]
    logger.info(f"Varredura: {len(paths)} instâncias x {len(profile.methods)} métodos, jobs={profile.jobs}")

    rows = joblib.Parallel(n_jobs=profile.jobs)(
        joblib.delayed(_run_one)(path, method, dict(profile.config), profile.results_dir)
        for path, method in tasks
    )
    failures = sum(1 for row in rows if row['status'] != 'ok')
    if failures:
        logger.error(f"{failures} de {len(rows)} execuções falharam.")
    return SweepOutcome(rows=list(rows), failures=failures)


def result_paths(profile: ExperimentProfile) -> List[Path]:
    return list(store.list_files(profile.results_dir, ".result"))

