"""
Average handover geometry tables: TTT rows by density (or velocity) columns, one block per case.

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
from typing import Dict, Optional

import pandas as pd

from udnsim.exp.batch import SweepResult
from udnsim.results.output import format_ttt, NAN_REP, Sink

DENSITY = 'den_gnb'
VELOCITY = 'velocity_kmh'


def cells_frame(result: SweepResult) -> pd.DataFrame:
    """ Numeric view of the cells (TTT as a number, undefined geometry as NaN). """
    return pd.DataFrame([dict(
        case=c.case_label,
        ttt_tics=float(c.ttt_tics),
        den_gnb=c.den_gnb,
        velocity_kmh=float(c.velocity_kmh),
        mean_ho_rate=c.mean_ho_rate,
        ho_avg_geo_db=c.ho_avg_geo_db,
        failure=c.failure,
    ) for c in result.cells], columns=['case', 'ttt_tics', DENSITY, VELOCITY, 'mean_ho_rate', 'ho_avg_geo_db',
                                       'failure']).astype({'ho_avg_geo_db': float})


def table_axis(df: pd.DataFrame) -> str:
    """ Densities make the columns, unless the sweep varies only the velocity. """
    if df[DENSITY].nunique() == 1 and df[VELOCITY].nunique() > 1:
        return VELOCITY
    return DENSITY


def group_frame_by(df: pd.DataFrame, group_by: str) -> Dict[str, pd.DataFrame]:
    ret = {}
    for group, sub_df in df.groupby(group_by, sort=True):
        ret[group] = sub_df.drop(columns=[group_by])
    return ret


def pivot_tables(result: SweepResult, value: str = 'ho_avg_geo_db',
                 columns: Optional[str] = None) -> Dict[str, pd.DataFrame]:
    """ One TTT x columns table of `value` per case. Missing or undefined cells are NaN. """
    df = cells_frame(result)
    if df.empty:
        return {}
    if columns is None:
        columns = table_axis(df)
    ret = {}
    for case, sub_df in group_frame_by(df, 'case').items():
        table = sub_df.groupby(['ttt_tics', columns])[value].first().unstack(columns)
        table = table.sort_index().sort_index(axis=1)
        table.index = [format_ttt(t) for t in table.index]
        table.index.name = 'ttt_tics'
        table.columns = [f"{columns}={c:g}" for c in table.columns]
        ret[case] = table
    return ret


def write_tables(result: SweepResult, sink: Sink, value: str = 'ho_avg_geo_db'):
    """ All the case tables stacked in one CSV, keyed by (case, ttt_tics). """
    tables = pivot_tables(result, value)
    if not tables:
        df = pd.DataFrame(columns=['case', 'ttt_tics'])
    else:
        df = pd.concat(tables, names=['case', 'ttt_tics']).reset_index()
    df.to_csv(sink, index=False, na_rep=NAN_REP)
