"""
Tests for the command-line runner: provenance, precedence and exit codes.
"""

import json

import pytest
from click.testing import CliRunner

from property_suites import CheckResult
from run_experiment import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def missing_config(tmp_path):
    return str(tmp_path / 'no-config.json')


def invoke(runner, config, *args):
    return runner.invoke(main, ['--config', config, '--workers', '1', *args])


def test_help_lists_subcommands(runner):
    result = runner.invoke(main, ['--help'])
    assert result.exit_code == 0
    for name in ('weyl-scan', 'hardy-class', 'ntheta', 'variation', 'selftest'):
        assert name in result.output


def test_subcommand_help_shows_schema_flags(runner):
    result = runner.invoke(main, ['weyl-scan', '--help'])
    assert result.exit_code == 0
    assert '--abs-err' in result.output
    assert '--n-min' in result.output


def test_csv_starts_with_provenance(runner, missing_config, tmp_path):
    out = tmp_path / 'avg.csv'
    result = invoke(runner, missing_config, '--seed', '5', '--output', str(out),
                    'twisted-avg', '--theta', '1/3', '--n', '2^2..2^3')
    assert result.exit_code == 0
    lines = out.read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('# config: ')
    provenance = json.loads(lines[0][len('# config: '):])
    assert provenance['seed'] == 5
    assert provenance['experiment'] == 'twisted-avg'
    assert provenance['params']['theta'] == '1/3'
    assert lines[1] == 'N,re,im,abs,error_bound'
    assert [line.split(',')[0] for line in lines[2:]] == ['4', '8']


def test_reruns_are_byte_identical(runner, missing_config, tmp_path):
    outputs = []
    for name in ('a.csv', 'b.csv'):
        out = tmp_path / name
        result = invoke(runner, missing_config, '--seed', '9', '--output', str(out),
                        'vdc-check', '--trials', '5', '--n-max', '16')
        assert result.exit_code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_flag_overrides_config_section(runner, tmp_path):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'experiments': {'twisted-avg': {'n': '2^2..2^3', 'theta': '0'}}}),
                      encoding='utf-8')
    from_config = tmp_path / 'config.csv'
    from_flag = tmp_path / 'flag.csv'
    assert invoke(runner, str(config), '--output', str(from_config), 'twisted-avg').exit_code == 0
    assert invoke(runner, str(config), '--output', str(from_flag), 'twisted-avg', '--n', '32').exit_code == 0
    assert [line.split(',')[0] for line in from_config.read_text().splitlines()[2:]] == ['4', '8']
    assert [line.split(',')[0] for line in from_flag.read_text().splitlines()[2:]] == ['32']


def test_json_report(runner, missing_config, tmp_path):
    out = tmp_path / 'class.json'
    result = invoke(runner, missing_config, '--output', str(out), 'hardy-class', '--expr', 's^0.5')
    assert result.exit_code == 0
    body = json.loads(out.read_text(encoding='utf-8'))
    assert body['experiment'] == 'hardy-class'
    assert body['result']['passed'] is True


def test_bad_parameter_exits_2(runner, missing_config, tmp_path):
    result = invoke(runner, missing_config, '--output', str(tmp_path / 'x.csv'),
                    'twisted-avg', '--poly', 'banana')
    assert result.exit_code == 2
    assert not (tmp_path / 'x.csv').exists()


def test_invalid_config_file_exits_2(runner, tmp_path):
    config = tmp_path / 'config.json'
    config.write_text('{broken', encoding='utf-8')
    assert invoke(runner, str(config), 'dirichlet').exit_code == 2


def test_budget_exceeded_exits_3(runner, missing_config, tmp_path):
    result = invoke(runner, missing_config, '--output', str(tmp_path / 'scan.csv'),
                    'weyl-scan', '--mode', 'certified', '--abs-err', '1e-12',
                    '--n-min', '4096', '--n-max', '4096')
    assert result.exit_code == 3


def test_failed_selftest_exits_4_after_writing(runner, missing_config, tmp_path, mocker):
    mocker.patch('experiments.selftest.run_suites',
                 return_value=[CheckResult('vdc.fake', True, 'ok'), CheckResult('gowers.fake', False, 'boom')])
    out = tmp_path / 'selftest.csv'
    result = invoke(runner, missing_config, '--output', str(out), 'selftest', '--suites', 'vdc,gowers')
    assert result.exit_code == 4
    lines = out.read_text(encoding='utf-8').splitlines()
    assert lines[1] == 'check,passed,detail'
    assert lines[2:] == ['vdc.fake,true,ok', 'gowers.fake,false,boom']


def test_unknown_suite_exits_2(runner, missing_config):
    assert invoke(runner, missing_config, 'selftest', '--suites', 'nope').exit_code == 2
