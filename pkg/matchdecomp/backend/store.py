"""store.py
Persistência em YAML de instâncias, resultados de execução e perfis.

Floats são escritos com 17 dígitos significativos, o que garante leitura
bit-a-bit idêntica. Todo documento carrega ``schema_version``; versões com
outra versão maior são recusadas.
"""
from __future__ import annotations

import hashlib
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import yaml

from .efcfw_engine import DecompositionResult
from .graph_core import DemandMatrix, Matching, WeightedGraph
from .instances import GeneratorRecord, Instance, Topology, make_topology

logger = logging.getLogger("matchdecomp.store")

SCHEMA_VERSION = "1.0"


class InstanceFormatError(ValueError):
    """Arquivo malformado; indica linha (1-based) e campo quando conhecidos."""

    def __init__(self, message: str, path: Optional[Path] = None,
                 line: Optional[int] = None, field: Optional[str] = None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"linha {line}")
        if field is not None:
            where.append(f"campo '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SchemaVersionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# YAML
# ---------------------------------------------------------------------------
class _Dumper(yaml.SafeDumper):
    pass


def _represent_float(dumper: yaml.SafeDumper, value: float):
    if math.isnan(value):
        text = ".nan"
    elif math.isinf(value):
        text = ".inf" if value > 0 else "-.inf"
    else:
        text = "%.17g" % value
        mantissa, _, exponent = text.partition("e")
        if "." not in mantissa:
            mantissa += ".0"
        text = f"{mantissa}e{exponent}" if exponent else mantissa
    return dumper.represent_scalar("tag:yaml.org,2002:float", text)


_Dumper.add_representer(float, _represent_float)


def dump_yaml(document: Mapping[str, Any]) -> str:
    return yaml.dump(dict(document), Dumper=_Dumper, sort_keys=False, default_flow_style=None,
                     allow_unicode=True, width=120)


def check_schema(document: Mapping[str, Any], path: Optional[Path] = None) -> None:
    version = str(document.get('schema_version', ''))
    if not version:
        raise InstanceFormatError("schema_version ausente.", path, field='schema_version')
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise SchemaVersionError(
            f"{path or 'documento'}: schema_version {version!r} incompatível com {SCHEMA_VERSION!r}."
        )


def _read_document(path: Path):
    """Lê o YAML e devolve (dados, nó raiz com marcas de linha)."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceFormatError(f"não foi possível ler o arquivo ({e}).", path) from e
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise InstanceFormatError(
            f"YAML inválido: {getattr(e, 'problem', e)}", path,
            line=mark.line + 1 if mark is not None else None,
        ) from e
    if not isinstance(data, dict):
        raise InstanceFormatError("o documento deve ser um mapeamento chave/valor.", path, line=1)
    return data, root


def _line_of(root, *keys) -> Optional[int]:
    """Linha (1-based) do valor em root[keys[0]][keys[1]]...; None se não encontrado."""
    node = root
    line = None
    for key in keys:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            match = node.value[key]
        else:
            match = None
        if match is None:
            return line
        node = match
        line = node.start_mark.line + 1
    return line


# ---------------------------------------------------------------------------
# Instâncias
# ---------------------------------------------------------------------------
def instance_to_document(instance: Instance) -> Dict[str, Any]:
    gen = instance.generator
    generator = None
    if not gen.empty:
        generator = {
            'procedure': gen.procedure,
            'seed': gen.seed,
            'weights': [float(a) for a in gen.weights],
            'matchings': [m.to_list() for m in gen.matchings],
        }
    return {
        'schema_version': SCHEMA_VERSION,
        'id': instance.id,
        'topology': {
            'kind': instance.topology.kind,
            'n': instance.topology.n,
            'params': dict(instance.topology.params),
        },
        'edges': [[u, v, float(w)] for u, v, w in instance.graph.edges],
        'generator': generator,
    }


def save_instance(instance: Instance, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_yaml(instance_to_document(instance)), encoding="utf-8")
    return path


def instance_hash(instance: Instance) -> str:
    """sha256 do documento canônico da instância."""
    return hashlib.sha256(dump_yaml(instance_to_document(instance)).encode("utf-8")).hexdigest()


def _require(data: Mapping[str, Any], key: str, root, path: Path):
    if key not in data or data[key] is None:
        raise InstanceFormatError("campo obrigatório ausente.", path, line=_line_of(root, key), field=key)
    return data[key]


def _parse_edges(raw, root, path: Path) -> List[tuple]:
    if not isinstance(raw, list):
        raise InstanceFormatError("esperada lista de [u, v, w].", path, _line_of(root, 'edges'), 'edges')
    edges = []
    for i, item in enumerate(raw):
        line = _line_of(root, 'edges', i)
        if not isinstance(item, list) or len(item) != 3:
            raise InstanceFormatError(f"aresta {i} deve ter a forma [u, v, w].", path, line, f"edges[{i}]")
        u, v, w = item
        if not isinstance(u, int) or not isinstance(v, int) or not isinstance(w, (int, float)):
            raise InstanceFormatError(f"aresta {i} com tipos inválidos: {item!r}.", path, line, f"edges[{i}]")
        edges.append((u, v, float(w)))
    return edges


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    data, root = _read_document(path)
    check_schema(data, path)

    inst_id = str(_require(data, 'id', root, path))
    topo_raw = _require(data, 'topology', root, path)
    if not isinstance(topo_raw, dict) or 'n' not in topo_raw:
        raise InstanceFormatError("topologia deve conter 'kind' e 'n'.", path, _line_of(root, 'topology'), 'topology')
    n = topo_raw['n']
    if not isinstance(n, int) or n <= 0:
        raise InstanceFormatError(f"n inválido: {n!r}.", path, _line_of(root, 'topology', 'n'), 'topology.n')

    edges = _parse_edges(_require(data, 'edges', root, path), root, path)
    try:
        graph = WeightedGraph.from_edges(n, edges)
        demand = DemandMatrix(graph)
    except ValueError as e:
        raise InstanceFormatError(str(e), path, _line_of(root, 'edges'), 'edges') from e

    kind = topo_raw.get('kind')
    params = dict(topo_raw.get('params') or {})
    try:
        topology = make_topology(kind, n, params) if kind not in (None, "external") else None
    except ValueError as e:
        raise InstanceFormatError(str(e), path, _line_of(root, 'topology'), 'topology') from e
    if topology is None:
        # instâncias externas: a topologia é o próprio suporte de D*
        topology = Topology(kind="external", n=n, edges=tuple((u, v) for u, v, _ in graph.edges), params=params)

    generator = GeneratorRecord()
    gen_raw = data.get('generator')
    if gen_raw:
        try:
            generator = GeneratorRecord(
                matchings=tuple(Matching.of(m) for m in gen_raw.get('matchings', [])),
                weights=tuple(float(a) for a in gen_raw.get('weights', [])),
                seed=gen_raw.get('seed'),
                procedure=gen_raw.get('procedure', GeneratorRecord.procedure),
            )
        except (TypeError, ValueError) as e:
            raise InstanceFormatError(str(e), path, _line_of(root, 'generator'), 'generator') from e
    else:
        logger.debug(f"{path}: sem proveniência do gerador")
    return Instance(id=inst_id, topology=topology, demand=demand, generator=generator)


# ---------------------------------------------------------------------------
# Resultados
# ---------------------------------------------------------------------------
def result_to_document(result: DecompositionResult, instance_ref: Mapping[str, Any]) -> Dict[str, Any]:
    decomp = result.decomposition
    return {
        'schema_version': SCHEMA_VERSION,
        'instance': dict(instance_ref),
        'method': result.provenance.get('method'),
        'terminated': result.terminated,
        'length': decomp.length,
        'error': float(result.error),
        'iterations': result.iterations,
        'config': result.provenance.get('config'),
        'seeds': {'seed': result.provenance.get('seed')},
        'matchings': [m.to_list() for m in decomp.matchings],
        'weights': [float(a) for a in decomp.weights],
        'error_trace': [[int(k), int(length), float(err)] for k, length, err in decomp.error_trace],
        'fw_error_trace': [float(r.fw_error) for r in result.records],
        'added_per_iteration': [len(r.added) for r in result.records],
        'exact_weights': [bool(r.exact_weights) for r in result.records],
        'instance_edges': result.provenance.get('edges'),
        'sampler': [_plain(r.sampler_stats) for r in result.records],
        'timings': {k: float(v) for k, v in decomp.timings.items()},
    }


def _plain(stats: Mapping[str, Any]) -> Dict[str, Any]:
    out = {}
    for key, value in stats.items():
        if hasattr(value, 'item'):
            value = value.item()
        out[key] = value
    return out


def save_result(result: DecompositionResult, instance_ref: Mapping[str, Any], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_yaml(result_to_document(result, instance_ref)), encoding="utf-8")
    return path


def load_result(path: str | Path) -> Dict[str, Any]:
    """Lê um arquivo de resultado; os matchings voltam como objetos Matching."""
    path = Path(path)
    if not path.exists():
        raise RuntimeError(f"Arquivo de resultado não encontrado: {path}")
    data, root = _read_document(path)
    check_schema(data, path)
    for key in ('instance', 'method', 'terminated', 'weights', 'error_trace'):
        _require(data, key, root, path)
    data['matchings'] = [Matching.of(m) for m in data.get('matchings') or []]
    return data


def result_file_name(instance_id: str, method: str) -> str:
    return f"{instance_id}__{method.replace('+', '-')}.result"


# ---------------------------------------------------------------------------
# Perfis de experimento
# ---------------------------------------------------------------------------
def load_profile(path: str | Path) -> Dict[str, Any]:
    path = Path(path)
    data, _ = _read_document(path)
    check_schema(data, path)
    return data


def list_files(directory: str | Path, suffix: str) -> Sequence[Path]:
    return sorted(Path(directory).glob(f"*{suffix}"))
