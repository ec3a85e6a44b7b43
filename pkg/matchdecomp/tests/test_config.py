import yaml

from backend.config_manager import DEFAULT_CONFIG, get_config, merge_config


def test_missing_file_is_created_with_defaults(tmp_path):
    path = tmp_path / "decomp_config.yaml"
    config = get_config(path)
    assert path.exists()
    assert config == DEFAULT_CONFIG


def test_partial_file_is_merged(tmp_path):
    path = tmp_path / "decomp_config.yaml"
    path.write_text(yaml.safe_dump({'engine': {'epsilon': 1e-4}}))
    config = get_config(path)
    assert config['engine']['epsilon'] == 1e-4
    assert config['engine']['d'] == DEFAULT_CONFIG['engine']['d']
    assert config['qaoa']['qubit_cap'] == 26


def test_invalid_yaml_falls_back(tmp_path):
    path = tmp_path / "decomp_config.yaml"
    path.write_text("engine: [unclosed\n")
    assert get_config(path) == DEFAULT_CONFIG


def test_merge_does_not_mutate_base():
    merged = merge_config(DEFAULT_CONFIG, {'sampler': {'shots': {'qaoa': 5}}})
    assert merged['sampler']['shots']['qaoa'] == 5
    assert DEFAULT_CONFIG['sampler']['shots']['qaoa'] == 10000
    assert merged['sampler']['shots']['random'] == 10000
