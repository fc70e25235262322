"""
A3 event + time-to-trigger handover state machine.

Per tic, in order:
  1. A detached TU re-attaches to the best cell once its geometry reaches sinr_min.
  2. During the execution window no A3 evaluation takes place; the serving geometry is still sampled.
  3. A serving geometry below sinr_min (or out of coverage) is a connection loss.
  4. The serving geometry is appended to the rolling window; A3 waits for a full window.
  5. The A3 entry condition
        target != serving and best_geo > sinr_min and best_geo - avg_geo + best_cio - current_cio > ho_hys
     must hold for the same target on consecutive tics; any break resets the timer.
  6. When the timer reaches TTT the handover executes.

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
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, List, Union, Deque, Callable, Sequence, Tuple, TYPE_CHECKING

import numpy as np

from udnsim.kpi import RunResult
from udnsim.logged_object import LoggedObject
from udnsim.mobility import trajectory_positions
from udnsim.radio import GeometryReport, GeometryTrace, LinkConfig, NO_GNB

if TYPE_CHECKING:
    from udnsim.scenario import ScenarioConfig, GnbSite

HANDOVER = 'Handover'
CONNECTION_LOSS = 'ConnectionLoss'
REATTACH = 'Reattach'

A3_AVG = 'avg'
A3_INSTANT = 'instant'
A3_REFERENCES = (A3_AVG, A3_INSTANT)

NEVER = math.inf


@dataclass(frozen=True)
class HandoverParams:
    ttt_tics: Union[int, float] = 1
    ho_hys_db: float = 3.
    ho_exec_time_tics: int = 25
    best_cio_db: float = 0.
    current_cio_db: float = 0.
    avg_window: int = 10
    sinr_min_db: float = -7.
    a3_reference: str = A3_AVG


@dataclass(frozen=True)
class HandoverEvent:
    kind: str
    tic: int
    source: Optional[int]
    target: Optional[int]
    best_geo_db: Optional[float]


@dataclass
class HandoverState:
    serving_gnb: Optional[int] = None
    ho_timer: int = 0
    ho_trigger: int = 0
    armed_target: Optional[int] = None
    exec_remaining: int = 0
    geo_window: Deque[float] = field(default_factory=deque)
    ho_times: int = 0
    events: List[HandoverEvent] = field(default_factory=list)
    tic: int = 0

    @property
    def is_detached(self) -> bool:
        return self.serving_gnb is None

    @property
    def avg_geo(self) -> Optional[float]:
        if not self.geo_window:
            return None
        return math.fsum(self.geo_window) / len(self.geo_window)

    def clear_timer(self):
        self.ho_timer = 0
        self.ho_trigger = 0
        self.armed_target = None


class HandoverMachine(LoggedObject):
    """ Runs the triggering rules over one TU's measurement stream. """

    def __init__(self, params: HandoverParams = HandoverParams(), name=None):
        LoggedObject.__init__(self, name)
        self.params = params
        self.state = HandoverState(geo_window=deque(maxlen=params.avg_window))

    def attach(self, report: GeometryReport) -> HandoverState:
        """ Connect to the best cell of the first report (or stay detached in a dead zone). """
        self.state = HandoverState(serving_gnb=report.best_gnb, geo_window=deque(maxlen=self.params.avg_window),
                                   tic=report.tic)
        return self.state

    def step(self, report: GeometryReport, tic: int) -> List[HandoverEvent]:
        if report.tic != tic:
            raise ValueError(f"Report of tic {report.tic} fed at tic {tic}.")
        return self.advance(tic, report.serving_geo_db, report.best_gnb, report.best_geo_db)

    def advance(self, tic: int, serving_geo: Optional[float], best_gnb: Optional[int],
                best_geo: Optional[float]) -> List[HandoverEvent]:
        """
        Apply one tic.
        :param serving_geo: geometry w.r.t. the current serving cell, None if it does not cover the TU
        :return: The events emitted on this tic
        """
        s = self.state
        p = self.params
        if tic != s.tic + 1:
            raise ValueError(f"Tic {tic} does not follow tic {s.tic}.")
        s.tic = tic

        if s.serving_gnb is None:
            if best_gnb is not None and best_geo >= p.sinr_min_db:
                s.serving_gnb = best_gnb
                s.geo_window.clear()
                s.clear_timer()
                return [self._emit(REATTACH, None, best_gnb, best_geo)]
            return []

        if s.exec_remaining > 0:
            s.exec_remaining -= 1
            if serving_geo is None or serving_geo < p.sinr_min_db:
                return [self._lose_connection(best_geo)]
            s.geo_window.append(serving_geo)
            return []

        if serving_geo is None or serving_geo < p.sinr_min_db:
            return [self._lose_connection(best_geo)]

        s.geo_window.append(serving_geo)
        if p.a3_reference == A3_AVG:
            if len(s.geo_window) < p.avg_window:
                return []
            reference = s.avg_geo
        else:
            reference = serving_geo

        entry = (best_gnb is not None and best_gnb != s.serving_gnb and best_geo > p.sinr_min_db
                 and best_geo - reference + p.best_cio_db - p.current_cio_db > p.ho_hys_db)
        if entry and (s.ho_timer == 0 or best_gnb == s.armed_target):
            s.ho_trigger = 1
            s.armed_target = best_gnb
            s.ho_timer += 1
        else:
            s.clear_timer()

        if s.ho_timer != p.ttt_tics:
            return []

        event = self._emit(HANDOVER, s.serving_gnb, s.armed_target, best_geo)
        s.serving_gnb = s.armed_target
        s.exec_remaining = p.ho_exec_time_tics
        s.ho_times += 1
        s.clear_timer()
        s.geo_window.clear()
        return [event]

    def hold(self, tic: int, serving_geo: Sequence[float] = ()):
        """
        Skip ahead to `tic` over quiet tics: the serving cell is the best cell and stays at sinr_min
        (or a detached TU sees no cell at sinr_min). The result equals advancing tic by tic.
        :param serving_geo: the serving geometry of the skipped tics, at least the last avg_window of them
        """
        s = self.state
        skipped = tic - s.tic
        if skipped < 0:
            raise ValueError(f"Tic {tic} is behind tic {s.tic}.")
        s.tic = tic
        if skipped == 0 or s.serving_gnb is None:
            return
        s.exec_remaining = max(0, s.exec_remaining - skipped)
        s.geo_window.extend(serving_geo[-self.params.avg_window:])
        s.clear_timer()

    def _emit(self, kind: str, source: Optional[int], target: Optional[int],
              best_geo: Optional[float]) -> HandoverEvent:
        event = HandoverEvent(kind, self.state.tic, source, target, best_geo)
        self.state.events.append(event)
        return event

    def _lose_connection(self, best_geo: Optional[float]) -> HandoverEvent:
        s = self.state
        self.logger.debug("Tic %s: connection to gNB %s lost", s.tic, s.serving_gnb)
        event = self._emit(CONNECTION_LOSS, s.serving_gnb, None, best_geo)
        s.serving_gnb = None
        s.exec_remaining = 0
        s.clear_timer()
        s.geo_window.clear()
        return event


def initial_attach(report: GeometryReport, params: HandoverParams = HandoverParams()) -> HandoverState:
    return HandoverMachine(params).attach(report)


def step(state: HandoverState, report: GeometryReport, params: HandoverParams,
         tic: int) -> Tuple[HandoverState, List[HandoverEvent]]:
    """ Functional form of HandoverMachine.step(); the state is updated in place and returned. """
    machine = HandoverMachine(params)
    if state.geo_window.maxlen != params.avg_window:
        state.geo_window = deque(state.geo_window, maxlen=params.avg_window)
    machine.state = state
    events = machine.step(report, tic)
    return state, events


########################################################################################################################
# Full run
########################################################################################################################

TicObserver = Callable[[dict], None]


def _optional(value: float) -> Optional[float]:
    return None if value != value else value


class ServingColumns:
    """
    Per-cell views of a GeometryTrace, built on first use of each serving cell:
    the cell's geometry as a plain list, and the tics on which the machine has work to do.
    A tic is quiet when the serving cell is the best cell and stays at sinr_min, or when a
    detached TU has no cell at sinr_min; nothing can trigger on a quiet tic.
    """

    def __init__(self, trace: GeometryTrace, sinr_min_db: float):
        self.trace = trace
        self.sinr_min_db = sinr_min_db
        self._geo = {}
        self._busy = {}

    def geo(self, serving: int) -> List[float]:
        ret = self._geo.get(serving)
        if ret is None:
            ret = self._geo[serving] = self.trace.geo_db[:, serving].tolist()
        return ret

    def busy_tics(self, serving: Optional[int]) -> List[int]:
        ret = self._busy.get(serving)
        if ret is None:
            with np.errstate(invalid='ignore'):
                if serving is None:
                    quiet = ~(self.trace.best_geo_db >= self.sinr_min_db)
                else:
                    quiet = (self.trace.best_gnb == serving) & (self.trace.geo_db[:, serving] >= self.sinr_min_db)
            ret = self._busy[serving] = np.flatnonzero(~quiet).tolist()
        return ret

    def next_busy(self, serving: Optional[int], tic: int) -> int:
        busy = self.busy_tics(serving)
        i = bisect_left(busy, tic)
        return busy[i] if i < len(busy) else len(self.trace)

    def serving_geo(self, serving: Optional[int], tic: int) -> Optional[float]:
        return None if serving is None else _optional(self.geo(serving)[tic])


def run_tu(scenario: 'ScenarioConfig', sites: Sequence['GnbSite'], params: HandoverParams, cfg: LinkConfig,
           rng: Optional[np.random.Generator], seed: int = 0, on_tic: Optional[TicObserver] = None) -> RunResult:
    """
    Replay one TU over the whole run: measure every tic, attach at tic 0 and step tics 1..N.
    Without an observer, runs of quiet tics are skipped in one go.
    :param on_tic: optional observer receiving one trace row per tic
    """
    positions = trajectory_positions(scenario.route, scenario.velocity_mps, scenario.run_time_ms, scenario.tic_ms)
    trace = GeometryTrace(positions, sites, cfg, rng)
    best = [None if b == NO_GNB else b for b in trace.best_gnb.tolist()]
    best_geo = [_optional(g) for g in trace.best_geo_db.tolist()]
    columns = ServingColumns(trace, params.sinr_min_db)

    machine = HandoverMachine(params)
    state = machine.attach(trace.report(0, None))
    tics = len(trace)

    if on_tic is None:
        tic = 1
        while tic < tics:
            serving = state.serving_gnb
            busy = columns.next_busy(serving, tic)
            if busy > tic:
                samples = () if serving is None else columns.geo(serving)[max(tic, busy - params.avg_window):busy]
                machine.hold(busy - 1, samples)
                tic = busy
                if tic >= tics:
                    break
            machine.advance(tic, columns.serving_geo(serving, tic), best[tic], best_geo[tic])
            tic += 1
        return RunResult.from_events(state.events, seed=seed)

    on_tic(_trace_row(0, positions[0], state, columns.serving_geo(state.serving_gnb, 0), best[0], best_geo[0], ()))
    for tic in range(1, tics):
        events = machine.advance(tic, columns.serving_geo(state.serving_gnb, tic), best[tic], best_geo[tic])
        on_tic(_trace_row(tic, positions[tic], state, columns.serving_geo(state.serving_gnb, tic), best[tic],
                          best_geo[tic], events))
    return RunResult.from_events(state.events, seed=seed)


def _trace_row(tic, position, state: HandoverState, serving_geo, best, best_geo, events) -> dict:
    return dict(
        tic=tic,
        x_m=float(position[0]),
        y_m=float(position[1]),
        serving=state.serving_gnb,
        best=best,
        serving_geo_db=serving_geo,
        best_geo_db=best_geo,
        ho_timer=state.ho_timer,
        event=';'.join(e.kind for e in events),
    )
