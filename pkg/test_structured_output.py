"""
Tests for CSV tables, JSON reports and value serialization.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from structured_output import Report, ResultTable, format_cell, render, to_jsonable


@pytest.mark.parametrize("value, text", [
    (None, ''),
    (True, 'true'),
    (np.bool_(False), 'false'),
    (3, '3'),
    (np.int64(7), '7'),
    (Fraction(1, 3), '1/3'),
    (0.1, '0.1'),
    (float('nan'), 'nan'),
    ('golden', 'golden'),
])
def test_format_cell(value, text):
    assert format_cell(value) == text


def test_format_cell_rejects_complex():
    with pytest.raises(TypeError):
        format_cell(1 + 2j)


def test_to_jsonable():
    data = to_jsonable({'z': 1 - 2j, 'q': Fraction(2, 4), 'inf': math.inf,
                        'arr': np.array([1, 2]), 1: (np.float64(0.5),)})
    assert data == {'z': {'re': 1.0, 'im': -2.0}, 'q': '1/2', 'inf': 'inf', 'arr': [1, 2], '1': [0.5]}


def test_table_rows_follow_column_order():
    table = ResultTable(name='demo', columns=['N', 'value'])
    table.add_row({'value': 0.25, 'N': 4, 'extra': 'ignored'})
    assert table.rows == [[4, 0.25]]
    assert table.column('value') == [0.25]


def test_table_missing_column():
    table = ResultTable(name='demo', columns=['N', 'value'])
    with pytest.raises(ValueError):
        table.add_row({'N': 4})


def test_table_columns_validated():
    with pytest.raises(ValidationError):
        ResultTable(name='demo', columns=['N', 'N'])
    with pytest.raises(ValidationError):
        ResultTable(name='demo', columns=[])


def test_csv_has_provenance_line_then_header():
    table = ResultTable(name='demo', columns=['N', 'holds'], provenance={'seed': 1, 'experiment': 'demo'})
    table.add_row({'N': 8, 'holds': True})
    table.add_row({'N': 16, 'holds': None})
    lines = table.render_csv().split('\n')
    assert lines[0] == '# config: {"experiment": "demo", "seed": 1}'
    assert lines[1:] == ['N,holds', '8,true', '16,', '']


def test_report_json_layout():
    report = Report(name='hardy-class', payload={'passed': True, 'ratio': Fraction(1, 2)},
                    provenance={'seed': 3})
    text = report.render_json()
    assert text.endswith('\n')
    body = json.loads(text)
    assert body == {'experiment': 'hardy-class', 'config': {'seed': 3},
                    'result': {'passed': True, 'ratio': '1/2'}}


def test_render_dispatch():
    table = ResultTable(name='demo', columns=['N'])
    assert render(table).startswith('# config: ')
    assert render(Report(name='demo')).startswith('{')
    with pytest.raises(TypeError):
        render({'not': 'an artifact'})


def test_rendering_is_deterministic():
    def build():
        table = ResultTable(name='demo', columns=['x'], provenance={'b': 2, 'a': [1.5, 2.5]})
        for x in (0.1, 0.2, 1 / 3):
            table.add_row({'x': x})
        return table.render_csv()
    assert build() == build()
