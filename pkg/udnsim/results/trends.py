"""
Rank-correlation summaries of a sweep: how a KPI moves along one grid axis.

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""
import math
from typing import NamedTuple, List, Optional

import numpy as np
from scipy import stats

from udnsim.exp.batch import SweepResult
from udnsim.results.tables import cells_frame

AXES = ('ttt_tics', 'den_gnb', 'velocity_kmh')


class Trend(NamedTuple):
    case: str
    axis: str
    value: str
    fixed: tuple
    points: int
    rho: float


def spearman(x, y) -> float:
    """ Spearman's rho over the defined pairs; NaN with fewer than 3 pairs or a constant series. """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.isfinite(x) & np.isfinite(y)
    x, y = x[mask], y[mask]
    if len(x) < 3 or np.all(x == x[0]) or np.all(y == y[0]):
        return math.nan
    rho, _p_value = stats.spearmanr(x, y)
    return float(rho)


def trends(result: SweepResult, axis: str, value: str = 'mean_ho_rate') -> List[Trend]:
    """ One trend per (case, other axes) line of the grid that has at least 3 points along `axis`. """
    if axis not in AXES:
        raise ValueError(f"Unknown axis '{axis}'. Expected one of {AXES}.")
    df = cells_frame(result)
    if df.empty:
        return []
    others = [a for a in AXES if a != axis]
    ret = []
    for key, sub_df in df.groupby(['case', *others], sort=True):
        sub_df = sub_df.sort_values(axis)
        rho = spearman(sub_df[axis], sub_df[value])
        if not math.isnan(rho):
            ret.append(Trend(key[0], axis, value, tuple(zip(others, key[1:])), len(sub_df), rho))
    return ret


def trend_of(result: SweepResult, case: str, axis: str, value: str = 'mean_ho_rate', **fixed) -> Optional[float]:
    """ rho of a single grid line, e.g. trend_of(r, 'A', 'ttt_tics', den_gnb=10, velocity_kmh=50). """
    for t in trends(result, axis, value):
        if t.case == case and all(dict(t.fixed)[k] == v for k, v in fixed.items()):
            return t.rho
    return None
