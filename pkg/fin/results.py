"""
Result files
Fixed-layout CSV tables of solved rows and JSON documents with sorted keys
"""
import json
import logging
import math
from dataclasses import dataclass
from typing import Optional

import pandas as pd

logger = logging.getLogger(__name__)

COLUMNS = [
    'algorithm', 'app', 'gamma', 'lambda', 'axis', 'value', 'feasible', 'exit',
    'latency_ms', 'accuracy_pct', 'total_mJ', 'comm_mJ', 'compute_mJ',
    'blocks_mobile', 'blocks_edge', 'blocks_cloud', 'wall_ms'
]

SORT_COLUMNS = ['axis', 'value', 'app', 'algorithm', 'gamma', 'lambda']

INTEGER_COLUMNS = {'gamma': 'Int64', 'lambda': 'Int64', 'exit': 'Int64',
                   'blocks_mobile': 'int64', 'blocks_edge': 'int64', 'blocks_cloud': 'int64'}


@dataclass(frozen=True)
class ResultRow:
    """One solved (algorithm, application, axis value) row; energies are per inference"""
    algorithm: str
    app: str
    gamma: Optional[int]
    lam: Optional[int]
    axis: str
    value: float
    feasible: bool
    exit: Optional[int]
    latency_ms: Optional[float]
    accuracy_pct: Optional[float]
    total_mJ: Optional[float]
    comm_mJ: Optional[float]
    compute_mJ: Optional[float]
    blocks_mobile: int = 0
    blocks_edge: int = 0
    blocks_cloud: int = 0
    wall_ms: float = 0.0

    @classmethod
    def from_outcome(cls, outcome, axis, value):
        """Build a row from a solve outcome"""
        report = outcome.report
        tiers = report.tiers if report else {}
        return cls(
            algorithm=outcome.algorithm.value,
            app=outcome.application,
            gamma=outcome.gamma,
            lam=outcome.lam,
            axis=axis,
            value=float(value),
            feasible=outcome.feasible,
            exit=report.exit_index if report else None,
            latency_ms=report.latency * 1e3 if report else None,
            accuracy_pct=report.accuracy * 100 if report else None,
            total_mJ=report.energy_per_inference * 1e3 if report else None,
            comm_mJ=report.comm_per_inference * 1e3 if report else None,
            compute_mJ=report.compute_per_inference * 1e3 if report else None,
            blocks_mobile=tiers.get('mobile', 0),
            blocks_edge=tiers.get('edge', 0),
            blocks_cloud=tiers.get('cloud', 0),
            wall_ms=outcome.wall_ms
        )

    def to_record(self):
        """Row as a dictionary keyed by CSV column"""
        return {
            'algorithm': self.algorithm,
            'app': self.app,
            'gamma': self.gamma,
            'lambda': self.lam,
            'axis': self.axis,
            'value': self.value,
            'feasible': self.feasible,
            'exit': self.exit,
            'latency_ms': self.latency_ms,
            'accuracy_pct': self.accuracy_pct,
            'total_mJ': self.total_mJ,
            'comm_mJ': self.comm_mJ,
            'compute_mJ': self.compute_mJ,
            'blocks_mobile': self.blocks_mobile,
            'blocks_edge': self.blocks_edge,
            'blocks_cloud': self.blocks_cloud,
            'wall_ms': self.wall_ms
        }


def rows_to_frame(rows):
    """Rows as a DataFrame in canonical order"""
    frame = pd.DataFrame([row.to_record() for row in rows], columns=COLUMNS)
    frame = frame.astype(INTEGER_COLUMNS)
    frame = frame.sort_values(SORT_COLUMNS, kind='mergesort', na_position='first')
    return frame.reset_index(drop=True)


def write_results_csv(rows, path):
    """
    Write rows as CSV with the fixed column layout

    Args:
        rows: Iterable of ResultRow
        path: Output file path

    Returns:
        Number of data rows written
    """
    frame = rows_to_frame(list(rows))
    frame.to_csv(path, index=False, float_format='%.9g', lineterminator='\n')
    logger.info("Wrote %d rows to %s", len(frame), path)
    return len(frame)


def _optional(value, cast):
    if pd.isna(value):
        return None
    return cast(value)


def read_results_csv(path):
    """
    Parse a result CSV back into rows

    Raises:
        ValueError: If the header differs from the fixed layout
    """
    frame = pd.read_csv(path, dtype={'algorithm': str, 'app': str, 'axis': str,
                                     'gamma': 'Int64', 'lambda': 'Int64', 'exit': 'Int64'})
    if list(frame.columns) != COLUMNS:
        raise ValueError(f"Unexpected result columns in {path}: {list(frame.columns)}")

    rows = []
    for record in frame.to_dict(orient='records'):
        rows.append(ResultRow(
            algorithm=record['algorithm'],
            app=record['app'],
            gamma=_optional(record['gamma'], int),
            lam=_optional(record['lambda'], int),
            axis=record['axis'],
            value=float(record['value']),
            feasible=bool(record['feasible']),
            exit=_optional(record['exit'], int),
            latency_ms=_optional(record['latency_ms'], float),
            accuracy_pct=_optional(record['accuracy_pct'], float),
            total_mJ=_optional(record['total_mJ'], float),
            comm_mJ=_optional(record['comm_mJ'], float),
            compute_mJ=_optional(record['compute_mJ'], float),
            blocks_mobile=int(record['blocks_mobile']),
            blocks_edge=int(record['blocks_edge']),
            blocks_cloud=int(record['blocks_cloud']),
            wall_ms=float(record['wall_ms'])
        ))
    return rows


def _plain(value):
    """JSON-safe copy: infinities become 'inf'/'-inf', NaN becomes null"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
    return value


def write_json(data, path):
    """Write a JSON document with sorted keys"""
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(_plain(data), handle, indent=2, sort_keys=True)
        handle.write('\n')
    logger.info("Wrote %s", path)
    return path
