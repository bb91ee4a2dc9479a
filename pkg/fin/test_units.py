"""
Tests for unit parsing
"""
import math

import pytest

from fin.errors import UnitError
from fin.units import format_quantity, parse_quantity


@pytest.mark.parametrize('text, kind, expected', [
    ('0.1 Gbps', 'bitrate', 1e8),
    ('560 Gbps', 'bitrate', 5.6e11),
    ('11 TOPS', 'oprate', 1.1e13),
    ('153.4 TOPS', 'oprate', 1.534e14),
    ('22.579 MOPs', 'ops', 2.2579e7),
    ('6 W', 'power', 6.0),
    ('30 nJ/bit', 'energy_per_bit', 3e-8),
    ('5 ms', 'time', 5e-3),
    ('0.1 ms', 'time', 1e-4),
    ('55 %', 'fraction', 0.55),
    ('1 /s', 'rate', 1.0),
])
def test_parse_quantity_suffixes(text, kind, expected):
    """Test suffixed quantities normalize to base units"""
    assert parse_quantity(text, kind) == pytest.approx(expected, rel=1e-12)


def test_parse_quantity_bare_number_is_base_unit():
    """Test numbers pass through unchanged"""
    assert parse_quantity(42, 'ops') == 42.0
    assert parse_quantity('0.25', 'fraction') == 0.25


def test_parse_quantity_infinity():
    """Test infinity is accepted only where allowed"""
    assert math.isinf(parse_quantity('inf', 'bitrate', allow_infinite=True))
    assert math.isinf(parse_quantity('∞', 'bitrate', allow_infinite=True))

    with pytest.raises(UnitError):
        parse_quantity('inf', 'oprate')


def test_parse_quantity_wrong_suffix():
    """Test a suffix of another kind is rejected"""
    with pytest.raises(UnitError) as exc:
        parse_quantity('5 Gbps', 'time')
    assert 'Gbps' in exc.value.message
    assert exc.value.exit_code == 3


def test_parse_quantity_malformed():
    """Test malformed values are rejected"""
    with pytest.raises(UnitError):
        parse_quantity('fast', 'time')
    with pytest.raises(UnitError):
        parse_quantity(True, 'ops')
    with pytest.raises(UnitError):
        parse_quantity([1], 'ops')


def test_format_quantity():
    """Test infinity renders as a string"""
    assert format_quantity(math.inf) == 'inf'
    assert format_quantity(3.5) == 3.5
