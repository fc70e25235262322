"""
Handover KPIs: per-run handover count and average handover geometry, and their
aggregation over the iterations of one grid point.

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
from dataclasses import dataclass, field
from typing import Tuple, Optional, Iterable, List, Union, Any

FAILURE_RATE_THRESHOLD = 1.


@dataclass(frozen=True, order=True)
class GridPoint:
    """ One cell of an experiment grid. Ordering is the canonical output order. """
    case: str
    ttt_tics: Union[int, float]
    den_gnb: int
    velocity_kmh: float


@dataclass(frozen=True)
class RunResult:
    ho_times: int
    ho_best_geos: Tuple[float, ...]
    connection_losses: int = 0
    seed: int = 0
    reattaches: int = 0
    events: Tuple[Any, ...] = ()

    def __post_init__(self):
        if len(self.ho_best_geos) != self.ho_times:
            raise ValueError(f"{self.ho_times} handover(s) but {len(self.ho_best_geos)} geometry sample(s).")

    @classmethod
    def from_events(cls, events: Iterable, seed: int = 0) -> 'RunResult':
        events = tuple(events)
        geos = tuple(e.best_geo_db for e in events if e.kind == 'Handover')
        return cls(
            ho_times=len(geos),
            ho_best_geos=geos,
            connection_losses=sum(1 for e in events if e.kind == 'ConnectionLoss'),
            seed=seed,
            reattaches=sum(1 for e in events if e.kind == 'Reattach'),
            events=events,
        )


def mean(values) -> Optional[float]:
    values = list(values)
    if not values:
        return None
    return math.fsum(values) / len(values)


def ho_avg_geo(run: RunResult) -> Optional[float]:
    """ Mean (in dB) of the best geometry sampled at each handover; None when the run had no handover. """
    return mean(run.ho_best_geos)


@dataclass(frozen=True)
class KpiCell:
    case_label: str
    ttt_tics: Union[int, float]
    den_gnb: int
    velocity_kmh: float
    iterations: int
    mean_ho_rate: float
    ho_avg_geo_db: Optional[float]
    pooled_ho_avg_geo_db: Optional[float]
    failure: bool
    iterations_with_handover: int
    connection_losses_mean: float

    @property
    def point(self) -> GridPoint:
        return GridPoint(self.case_label, self.ttt_tics, self.den_gnb, self.velocity_kmh)


@dataclass
class KpiAccumulator:
    """
    Partial sums of a cell. merge() is associative and order independent, so
    partial results of any split of the iterations may be combined in any order.
    """
    ho_times: List[int] = field(default_factory=list)
    run_geo_means: List[float] = field(default_factory=list)
    all_geos: List[float] = field(default_factory=list)
    connection_losses: List[int] = field(default_factory=list)

    def add(self, run: RunResult) -> 'KpiAccumulator':
        self.ho_times.append(run.ho_times)
        self.connection_losses.append(run.connection_losses)
        run_mean = ho_avg_geo(run)
        if run_mean is not None:
            self.run_geo_means.append(run_mean)
        self.all_geos.extend(run.ho_best_geos)
        return self

    def merge(self, other: 'KpiAccumulator') -> 'KpiAccumulator':
        return KpiAccumulator(
            ho_times=self.ho_times + other.ho_times,
            run_geo_means=self.run_geo_means + other.run_geo_means,
            all_geos=self.all_geos + other.all_geos,
            connection_losses=self.connection_losses + other.connection_losses,
        )

    @property
    def count(self) -> int:
        return len(self.ho_times)

    def finalize(self, point: GridPoint) -> KpiCell:
        if self.count == 0:
            raise ValueError("Cannot aggregate an empty set of runs.")
        rate = mean(self.ho_times)
        return KpiCell(
            case_label=point.case,
            ttt_tics=point.ttt_tics,
            den_gnb=point.den_gnb,
            velocity_kmh=point.velocity_kmh,
            iterations=self.count,
            mean_ho_rate=rate,
            ho_avg_geo_db=mean(self.run_geo_means),
            pooled_ho_avg_geo_db=mean(self.all_geos),
            failure=rate < FAILURE_RATE_THRESHOLD,
            iterations_with_handover=len(self.run_geo_means),
            connection_losses_mean=mean(self.connection_losses),
        )


def aggregate(runs: Iterable[RunResult], point: GridPoint) -> KpiCell:
    acc = KpiAccumulator()
    for r in runs:
        acc.add(r)
    return acc.finalize(point)
