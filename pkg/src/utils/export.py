"""CSV and JSON writers for reports, orbits, trajectories and field dumps."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import numpy as np
import pandas as pd

FLOAT_FORMAT = '%.17g'


def _default(obj: Any):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dumps(payload: Dict[str, Any]) -> str:
    """Canonical report text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, default=_default) + '\n'


def write_json(path, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload), encoding='utf-8')
    return path


def write_csv(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def orbit_frame(orbit: Iterable) -> pd.DataFrame:
    """Exact orbit points as numerator/denominator columns."""
    rows = [
        {'iterate': k, 'x_num': p.x.numerator, 'x_den': p.x.denominator,
         'y_num': p.y.numerator, 'y_den': p.y.denominator}
        for k, p in enumerate(orbit)
    ]
    return pd.DataFrame(rows, columns=['iterate', 'x_num', 'x_den', 'y_num', 'y_den'])


def trajectory_frame(rows: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame(np.asarray(rows), columns=['time', 'x', 'y', 't'])


def disk_map_frame(seeds: np.ndarray, images: np.ndarray, determinants: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({
        'x': seeds[:, 0], 'y': seeds[:, 1],
        'fx': images[:, 0], 'fy': images[:, 1],
        'det': determinants,
    })


def return_map_frame(seeds: np.ndarray, hits: np.ndarray, times: np.ndarray,
                     expected: Optional[np.ndarray] = None) -> pd.DataFrame:
    frame = pd.DataFrame({
        'x': seeds[:, 0], 'y': seeds[:, 1],
        'rx': hits[:, 0], 'ry': hits[:, 1],
        'return_time': times,
    })
    if expected is not None:
        frame['error'] = np.linalg.norm(hits - expected, axis=1)
    return frame
