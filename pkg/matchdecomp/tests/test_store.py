import pytest

from backend.efcfw_engine import EngineConfig, run
from backend.instances import generate_instance, make_topology
from backend.store import (
    InstanceFormatError,
    SchemaVersionError,
    instance_hash,
    load_instance,
    load_profile,
    load_result,
    result_file_name,
    save_instance,
    save_result,
)

import numpy as np

GOOD = """schema_version: '1.0'
id: tiny
topology: {kind: complete, n: 3, params: {}}
edges:
- [0, 1, 0.5]
- [1, 2, 0.25]
"""


def _instance():
    return generate_instance(make_topology("complete", 6), np.random.default_rng(1), "complete_n6_id0", 1)


def test_instance_roundtrip_is_exact(tmp_path):
    inst = _instance()
    path = save_instance(inst, tmp_path / "a.instance")
    loaded = load_instance(path)
    assert loaded.graph == inst.graph
    assert loaded.generator.weights == inst.generator.weights
    assert loaded.generator.matchings == inst.generator.matchings
    assert instance_hash(loaded) == instance_hash(inst)


def test_rewriting_is_idempotent(tmp_path):
    inst = _instance()
    first = save_instance(inst, tmp_path / "a.instance").read_bytes()
    second = save_instance(load_instance(tmp_path / "a.instance"), tmp_path / "b.instance").read_bytes()
    assert first == second


def test_external_instance(tmp_path):
    path = tmp_path / "ext.instance"
    path.write_text(GOOD.replace("kind: complete", "kind: external"))
    inst = load_instance(path)
    assert inst.topology.kind == "external"
    assert inst.graph.weight(2, 1) == 0.25


def test_bad_edge_reports_line_and_field(tmp_path):
    path = tmp_path / "bad.instance"
    path.write_text(GOOD + "- [0, 2]\n")
    with pytest.raises(InstanceFormatError) as info:
        load_instance(path)
    assert info.value.line == 7
    assert info.value.field == "edges[2]"


def test_missing_field(tmp_path):
    path = tmp_path / "bad.instance"
    path.write_text(GOOD.split("edges:")[0])
    with pytest.raises(InstanceFormatError) as info:
        load_instance(path)
    assert info.value.field == "edges"


def test_not_substochastic(tmp_path):
    path = tmp_path / "bad.instance"
    path.write_text(GOOD.replace("0.25", "0.75"))
    with pytest.raises(InstanceFormatError) as info:
        load_instance(path)
    assert info.value.field == "edges"
    # nó 1 recebe 0.5 + 0.75; os nós 0 e 2 ficam dentro do limite
    assert "Nó 1:" in str(info.value)
    assert "Nó 0:" not in str(info.value) and "Nó 2:" not in str(info.value)


def test_unknown_major_version(tmp_path):
    path = tmp_path / "future.instance"
    path.write_text(GOOD.replace("'1.0'", "'2.0'"))
    with pytest.raises(SchemaVersionError):
        load_instance(path)
    profile = tmp_path / "p.yaml"
    profile.write_text("schema_version: '2.1'\n")
    with pytest.raises(SchemaVersionError):
        load_profile(profile)


def test_result_roundtrip(tmp_path, six_node_demand):
    result = run(six_node_demand, EngineConfig(d=0), instance_id="six")
    path = save_result(result, {'id': 'six', 'file': 'six.instance', 'sha256': 'x'},
                       tmp_path / result_file_name("six", "fcfw"))
    doc = load_result(path)
    assert doc['method'] == "fcfw"
    assert doc['matchings'] == result.decomposition.matchings
    assert doc['weights'] == result.decomposition.weights
    assert doc['error'] == result.error
    assert len(doc['error_trace']) == len(result.decomposition.error_trace)


def test_missing_result_names_the_file(tmp_path):
    with pytest.raises(RuntimeError, match="nada.result"):
        load_result(tmp_path / "nada.result")
    assert result_file_name("complete_n6_id0", "efcfw+qaoa") == "complete_n6_id0__efcfw-qaoa.result"
