"""
Unit parsing for scenario files
Quantities are written with an explicit suffix ("0.1 Gbps", "11 TOPS", "5 ms")
and normalized to base SI at load time
"""
import math
import re

from fin.errors import UnitError

# Quantity kinds and their accepted suffixes (lower-cased) -> multiplier to base unit
UNIT_TABLES = {
    'bitrate': {
        'bps': 1.0, 'bit/s': 1.0,
        'kbps': 1e3, 'mbps': 1e6, 'gbps': 1e9, 'tbps': 1e12,
    },
    'oprate': {
        'ops/s': 1.0, 'kops': 1e3, 'mops/s': 1e6, 'gops': 1e9, 'tops': 1e12,
        'gops/s': 1e9, 'tops/s': 1e12,
    },
    'ops': {
        'ops': 1.0, 'op': 1.0, 'kops': 1e3, 'mops': 1e6, 'gops': 1e9, 'tops': 1e12,
    },
    'power': {
        'w': 1.0, 'mw': 1e-3, 'kw': 1e3,
    },
    'energy_per_bit': {
        'j/bit': 1.0, 'mj/bit': 1e-3, 'uj/bit': 1e-6, 'µj/bit': 1e-6,
        'nj/bit': 1e-9, 'pj/bit': 1e-12,
    },
    'time': {
        's': 1.0, 'ms': 1e-3, 'us': 1e-6, 'µs': 1e-6, 'ns': 1e-9,
    },
    'rate': {
        '/s': 1.0, 'hz': 1.0, 'inf/s': 1.0,
    },
    'fraction': {
        '%': 1e-2,
    },
    'bits': {
        'bit': 1.0, 'bits': 1.0,
    },
}

# "11 TOPS" (rate) and "11 TOPs" (count) differ only by case, so the
# op-rate table is matched against the original spelling first
_CASE_SENSITIVE = {
    'oprate': {'TOPS': 1e12, 'GOPS': 1e9, 'MOPS': 1e6, 'KOPS': 1e3, 'OPS': 1.0},
}

_QUANTITY = re.compile(r'^\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$')

_INFINITY = ('inf', 'infinity', '∞')


def parse_quantity(value, kind, allow_infinite=False):
    """
    Parse a quantity into its base SI value

    Args:
        value: Number (already in base units) or string with a unit suffix
        kind: Quantity kind, a key of UNIT_TABLES
        allow_infinite: Accept "inf" / "∞"

    Returns:
        float: The value in base units

    Raises:
        UnitError: If the suffix is unknown for this kind or the value is malformed
    """
    if kind not in UNIT_TABLES:
        raise UnitError(f"Unknown quantity kind: {kind}")

    if isinstance(value, bool):
        raise UnitError(f"Expected a {kind} quantity, got a boolean")

    if isinstance(value, (int, float)):
        number = float(value)
        if math.isinf(number) and not allow_infinite:
            raise UnitError(f"Infinite {kind} not permitted")
        return number

    if not isinstance(value, str):
        raise UnitError(f"Expected a {kind} quantity, got {type(value).__name__}")

    text = value.strip()
    if text.lower() in _INFINITY:
        if not allow_infinite:
            raise UnitError(f"Infinite {kind} not permitted: {value!r}")
        return math.inf

    match = _QUANTITY.match(text)
    if not match:
        raise UnitError(f"Malformed {kind} quantity: {value!r}")

    number = float(match.group(1))
    suffix = match.group(2)
    if suffix == '':
        return number

    exact = _CASE_SENSITIVE.get(kind, {})
    if suffix in exact:
        return number * exact[suffix]

    multiplier = UNIT_TABLES[kind].get(suffix.lower())
    if multiplier is None:
        raise UnitError(f"Unknown unit suffix {suffix!r} for {kind} quantity {value!r}")

    return number * multiplier


def format_quantity(value):
    """Render a base-unit value for serialization ("inf" for infinity)"""
    if math.isinf(value):
        return 'inf'
    return value
