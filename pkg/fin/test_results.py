"""
Tests for result CSV and JSON files
"""
import json

import pytest

from fin.experiments import sweep
from fin.results import COLUMNS, ResultRow, read_results_csv, write_json, write_results_csv


def _row(algorithm, value, gamma=None, feasible=True):
    return ResultRow(algorithm, 'a', gamma, None, 'delta', value, feasible,
                     2 if feasible else None,
                     2.4 if feasible else None, 90.0 if feasible else None,
                     2.001 if feasible else None, 0.001 if feasible else None,
                     2.0 if feasible else None, 1, 1, 0, 0.0)


def test_header_and_order(tmp_path):
    """Test the fixed header and the canonical row order"""
    path = tmp_path / 'out.csv'
    rows = [_row('opt', 9.0), _row('fin_exact', 9.0, 10), _row('mcp', 3.0, feasible=False)]
    assert write_results_csv(rows, path) == 3

    lines = path.read_text().splitlines()
    assert lines[0] == ','.join(COLUMNS)
    assert [line.split(',')[0] for line in lines[1:]] == ['mcp', 'fin_exact', 'opt']


def test_read_back(tmp_path):
    """Test rows survive a write and read, missing values included"""
    path = tmp_path / 'out.csv'
    rows = [_row('fin_exact', 9.0, 10), _row('mcp', 3.0, feasible=False)]
    write_results_csv(rows, path)

    back = {row.algorithm: row for row in read_results_csv(path)}
    assert back['fin_exact'].gamma == 10
    assert back['fin_exact'].lam is None
    assert back['fin_exact'].total_mJ == pytest.approx(2.001)
    assert back['fin_exact'].feasible is True
    assert back['mcp'].feasible is False
    assert back['mcp'].exit is None
    assert back['mcp'].total_mJ is None


def test_bad_header(tmp_path):
    """Test a CSV with foreign columns is rejected"""
    path = tmp_path / 'bad.csv'
    path.write_text('name,quantity\nresistor,3\n')
    with pytest.raises(ValueError):
        read_results_csv(path)


def test_sweep_csv_is_byte_identical(tiny, tmp_path):
    """Test two identical sweeps write identical files"""
    first, second = tmp_path / 'first.csv', tmp_path / 'second.csv'
    for path in (first, second):
        rows = sweep(tiny, 'a', ['fin_exact', 'fin_greedy', 'mcp', 'opt'], 'delta', [3, 9, 20])
        write_results_csv(rows, path)
    assert first.read_bytes() == second.read_bytes()
    assert len(first.read_text().splitlines()) == 1 + 4 * 3


def test_write_json_handles_infinity(tmp_path):
    """Test infinite slack is written as a string and keys are sorted"""
    path = tmp_path / 'report.json'
    write_json({'zeta': 1, 'alpha': {'slack': float('inf'), 'gap': float('nan')}}, path)

    text = path.read_text()
    assert text.index('"alpha"') < text.index('"zeta"')
    data = json.loads(text)
    assert data['alpha'] == {'slack': 'inf', 'gap': None}
