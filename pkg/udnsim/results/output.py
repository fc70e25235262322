"""
Result emitters: one CSV/JSON row per grid cell, and per-tic traces.

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
import os
import json
import math
from typing import Union, TextIO, Any, List, Optional

import pandas as pd

from udnsim.exp.batch import SweepResult
from udnsim.kpi import KpiCell
from udnsim.logged_object import LoggedObject
from udnsim.util.data_logger import DataLogger

OUTPUT_COLUMNS = ('case', 'ttt_tics', 'den_gnb', 'velocity_kmh', 'iterations', 'mean_ho_rate', 'ho_avg_geo_db',
                  'pooled_ho_avg_geo_db', 'failure', 'connection_losses_mean')

TRACE_COLUMNS = ('iteration', 'tic', 'x_m', 'y_m', 'serving', 'best', 'serving_geo_db', 'best_geo_db', 'ho_timer',
                 'event')
# Site ids are empty when detached or in a dead zone
TRACE_ID_DTYPES = {'serving': 'Int64', 'best': 'Int64'}

NAN_REP = 'nan'

# Read back as text so that integers and 'inf' are written again as they were read
CSV_TEXT_COLUMNS = {'case': str, 'ttt_tics': str}

Sink = Union[str, TextIO]


def format_ttt(ttt_tics) -> str:
    return 'inf' if math.isinf(ttt_tics) else str(int(ttt_tics))


def _optional(value: Optional[float]) -> float:
    return math.nan if value is None else value


def cell_record(cell: KpiCell) -> dict:
    return dict(
        case=cell.case_label,
        ttt_tics=format_ttt(cell.ttt_tics),
        den_gnb=cell.den_gnb,
        velocity_kmh=float(cell.velocity_kmh),
        iterations=cell.iterations,
        mean_ho_rate=float(cell.mean_ho_rate),
        ho_avg_geo_db=_optional(cell.ho_avg_geo_db),
        pooled_ho_avg_geo_db=_optional(cell.pooled_ho_avg_geo_db),
        failure=bool(cell.failure),
        connection_losses_mean=float(cell.connection_losses_mean),
    )


def result_frame(result: SweepResult) -> pd.DataFrame:
    return pd.DataFrame([cell_record(c) for c in result.cells], columns=list(OUTPUT_COLUMNS))


def write_csv(result: Union[SweepResult, pd.DataFrame], sink: Sink):
    """ Write one row per cell. Undefined geometry is written as 'nan'. """
    df = result if isinstance(result, pd.DataFrame) else result_frame(result)
    df.to_csv(sink, columns=list(OUTPUT_COLUMNS), index=False, na_rep=NAN_REP)


def read_csv(source: Sink) -> pd.DataFrame:
    return pd.read_csv(source, dtype=CSV_TEXT_COLUMNS, float_precision='round_trip')


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
    return value


def json_document(result: SweepResult) -> dict:
    return dict(
        provenance=_jsonable(result.provenance),
        columns=list(OUTPUT_COLUMNS),
        rows=[_jsonable(cell_record(c)) for c in result.cells],
    )


def write_json(result: SweepResult, sink: Sink):
    """ The CSV rows plus a provenance block. Undefined values are null. """
    text = json.dumps(json_document(result), indent=2) + "\n"
    if isinstance(sink, str):
        with open(sink, 'w') as f:
            f.write(text)
    else:
        sink.write(text)


def write_result(result: SweepResult, sink: Sink, fmt: str = 'csv'):
    if fmt == 'csv':
        write_csv(result, sink)
    elif fmt == 'json':
        write_json(result, sink)
    else:
        raise ValueError(f"Unknown output format '{fmt}'.")


class TraceRecorder(LoggedObject):
    """
    Collects per-tic trace rows.
    A '.csv' path gets a CSV file on close(); any other path gets a msgpack record per row as it arrives.
    """

    def __init__(self, path: str):
        LoggedObject.__init__(self, os.path.basename(path))
        self.path = path
        self.is_csv = os.path.splitext(path)[1].lower() == '.csv'
        self.rows: List[dict] = []
        self._stream = None
        self._data_logger = None
        if not self.is_csv:
            self._stream = open(path, 'wb')
            self._data_logger = DataLogger(self._stream)

    def __call__(self, row: dict):
        if self.is_csv:
            self.rows.append(row)
        else:
            self._data_logger.append_data(row)

    @property
    def count(self) -> int:
        return len(self.rows) if self.is_csv else self._data_logger.count

    def close(self):
        if self.is_csv:
            df = pd.DataFrame(self.rows, columns=list(TRACE_COLUMNS)).astype(TRACE_ID_DTYPES)
            df.to_csv(self.path, index=False, na_rep='')
        elif self._stream is not None:
            self._stream.close()
            self._stream = None
        self.logger.info("Wrote %s trace row(s) to: %s", self.count, self.path)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
