"""
Tests for the configuration manager.
"""

import io
import json
import os

import pytest

from config import ConfigManager
from utils import ConfigError


REPO_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config.json')


def write_config(tmp_path, data):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding='utf-8')
    return str(path)


def test_defaults_without_file(tmp_path):
    config = ConfigManager(str(tmp_path / 'missing.json'))
    assert config.get('runtime.seed') == 20240101
    assert config.get('defaults.delta') == 0.05
    assert config.get('experiments') == {}
    assert config.validate_runtime_config()


def test_workers_default_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv('WWLAB_WORKERS', '3')
    assert ConfigManager(str(tmp_path / 'missing.json')).get('runtime.workers') == 3
    monkeypatch.setenv('WWLAB_WORKERS', 'many')
    assert ConfigManager(str(tmp_path / 'missing.json')).get('runtime.workers') == 1


def test_file_merges_recursively(tmp_path):
    path = write_config(tmp_path, {'runtime': {'seed': 7}, 'experiments': {'variation': {'r': 3}}})
    config = ConfigManager(path)
    assert config.get('runtime.seed') == 7
    assert config.get('runtime.fft_chunk') == 1 << 22
    assert config.get_experiment_config('variation') == {'r': 3}
    assert config.get_experiment_config('ghk') == {}


def test_experiment_section_is_a_copy(tmp_path):
    config = ConfigManager(write_config(tmp_path, {'experiments': {'badc': {'q_min': 10}}}))
    section = config.get_experiment_config('badc')
    section['q_min'] = 99
    assert config.get('experiments.badc.q_min') == 10


@pytest.mark.parametrize("content", ['{not json', '[1, 2]'])
def test_invalid_file_raises(tmp_path, content):
    with pytest.raises(ConfigError):
        ConfigManager(write_config(tmp_path, content))


def test_non_object_experiment_section(tmp_path):
    config = ConfigManager(write_config(tmp_path, {'experiments': {'atoms': 5}}))
    with pytest.raises(ConfigError) as info:
        config.get_experiment_config('atoms')
    assert info.value.key == 'experiments.atoms'
    assert info.value.exit_code == 2


@pytest.mark.parametrize("key, value", [
    ('fft_chunk', 1000),
    ('grid_cap', 1),
    ('workers', 0),
    ('seed', 'abc'),
])
def test_runtime_validation(tmp_path, key, value):
    config = ConfigManager(write_config(tmp_path, {'runtime': {key: value}}))
    assert not config.validate_runtime_config()


def test_dot_notation(tmp_path):
    config = ConfigManager(write_config(tmp_path, {'experiments': {'weyl-scan': {'theta': '1/3'}}}))
    assert config.get('experiments.weyl-scan.theta') == '1/3'
    assert config.get('experiments.weyl-scan.poly', 'n^2') == 'n^2'
    assert config.get('no.such.key') is None


def test_summary_goes_to_stream(tmp_path):
    stream = io.StringIO()
    ConfigManager(str(tmp_path / 'missing.json')).print_config_summary(stream)
    assert 'WIENER-WINTNER LAB CONFIGURATION' in stream.getvalue()


def test_repository_config_is_valid():
    config = ConfigManager(REPO_CONFIG)
    assert config.validate_runtime_config()
    assert 'weyl-scan' in config.get('experiments')
