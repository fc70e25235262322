"""
Parameter sweeps over (case, TTT, density, velocity) grids.

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
import time
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Tuple, Optional, Dict, Any, List, Union

from udnsim import settings
from udnsim.config import ConfigError
from udnsim.exp.single import run_cell
from udnsim.kpi import GridPoint, KpiCell
from udnsim.logged_object import LoggedObject
from udnsim.scenario import ScenarioConfig, CASE_A, CASE_B, ROUTE_LABELS, build_config, config_values
from udnsim.util import logs
from udnsim.util.timeformat import time_delta

DEFAULT_TTT_LIST = tuple(range(1, 13))
DEFAULT_DENSITY_LIST = (10, 20, 30, 40, 50)
DEFAULT_VELOCITY_LIST = (50.,)
VELOCITY_SWEEP_LIST = (10., 20., 30., 40., 50.)
VELOCITY_SWEEP_DENSITY = 10


@dataclass(frozen=True)
class SweepSpec:
    case_labels: Tuple[str, ...] = (CASE_A,)
    ttt_list: Tuple[Union[int, float], ...] = DEFAULT_TTT_LIST
    density_list: Tuple[int, ...] = DEFAULT_DENSITY_LIST
    velocity_list: Tuple[float, ...] = DEFAULT_VELOCITY_LIST
    iterations: int = 100
    master_seed: int = 0
    crn: bool = False
    preset: Optional[str] = None

    def validate(self) -> 'SweepSpec':
        errors = []
        lists = dict(case_labels=self.case_labels, ttt_list=self.ttt_list, density_list=self.density_list,
                     velocity_list=self.velocity_list)
        for name, values in lists.items():
            if not values:
                errors.append((name, "must not be empty"))
        errors.extend(('case_labels', f"unknown case '{c}'") for c in self.case_labels if c not in ROUTE_LABELS)
        errors.extend(('ttt_list', f"TTT must be at least 1 tic, got {t}") for t in self.ttt_list
                      if not (t == math.inf or (isinstance(t, int) and t >= 1)))
        errors.extend(('density_list', f"density must be a positive integer, got {d}")
                      for d in self.density_list if not (isinstance(d, int) and d > 0))
        errors.extend(('velocity_list', f"velocity must be positive, got {v}") for v in self.velocity_list if not v > 0)
        if self.iterations < 1:
            errors.append(('iterations', "at least one iteration is required"))
        if errors:
            raise ConfigError(errors)
        return self

    def points(self) -> List[GridPoint]:
        """ Every grid point, in canonical (case, ttt, density, velocity) order. """
        return sorted(set(GridPoint(c, t, d, float(v)) for c, t, d, v in itertools.product(
            self.case_labels, self.ttt_list, self.density_list, self.velocity_list)))

    def grid(self) -> Dict[str, list]:
        return dict(case_labels=list(self.case_labels), ttt_list=list(self.ttt_list),
                    density_list=list(self.density_list), velocity_list=list(self.velocity_list))


PRESETS: Dict[str, Dict[str, Any]] = {
    # Handover rate over TTT x density, both routes
    'fig4': dict(case_labels=(CASE_A, CASE_B)),
    # Same grid, reported as average handover geometry tables
    'tables': dict(case_labels=(CASE_A, CASE_B)),
    'fig5': dict(case_labels=(CASE_B,), density_list=(VELOCITY_SWEEP_DENSITY,), velocity_list=VELOCITY_SWEEP_LIST),
}


def preset_spec(name: str, **overrides) -> SweepSpec:
    try:
        kwargs = dict(PRESETS[name])
    except KeyError:
        raise ConfigError.single('preset', f"unknown preset '{name}', expected one of {'|'.join(PRESETS)}")
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec(preset=name, **kwargs).validate()


@dataclass(frozen=True)
class SweepResult:
    cells: Tuple[KpiCell, ...]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __len__(self):
        return len(self.cells)

    def cell(self, point: GridPoint) -> KpiCell:
        for c in self.cells:
            if c.point == point:
                return c
        raise KeyError(point)


def provenance(spec: SweepSpec, base_config: ScenarioConfig) -> Dict[str, Any]:
    return dict(
        tool=settings.NAME,
        version=settings.VERSION,
        master_seed=spec.master_seed,
        preset=spec.preset,
        crn=spec.crn,
        iterations=spec.iterations,
        grid=spec.grid(),
        config=config_values(base_config),
    )


def _run_cell_job(args) -> KpiCell:
    point, base_config, iterations, master_seed, crn = args
    return run_cell(point, base_config, iterations, master_seed, crn)


class SweepRunner(LoggedObject):
    """ Runs the cells of a sweep, sequentially or on a process pool. The result is the same either way. """

    def __init__(self, spec: SweepSpec, base_config: ScenarioConfig, workers: Optional[int] = None):
        LoggedObject.__init__(self, spec.preset)
        self.spec = spec.validate()
        self.base_config = base_config
        self.workers = settings.default_workers() if workers is None else max(1, int(workers))

    def provenance(self) -> Dict[str, Any]:
        return provenance(self.spec, self.base_config)

    def run(self) -> SweepResult:
        points = self.spec.points()
        jobs = [(p, self.base_config, self.spec.iterations, self.spec.master_seed, self.spec.crn) for p in points]
        self.logger.info("Running %s cell(s) x %s iteration(s) on %s worker(s)", len(points), self.spec.iterations,
                         min(self.workers, max(len(points), 1)))
        start = time.time()
        try:
            if self.workers <= 1 or len(jobs) <= 1:
                cells = [_run_cell_job(j) for j in jobs]
            else:
                with ProcessPoolExecutor(max_workers=self.workers, initializer=logs.restore_logging,
                                         initargs=(logs.handler_levels(),)) as e:
                    cells = list(e.map(_run_cell_job, jobs))
        except Exception as ex:
            self.logger.exception("Sweep failed: %s", ex)
            raise

        self.logger.info("Finished %s cell(s) in %s", len(cells), time_delta(time.time() - start))
        return SweepResult(tuple(cells), self.provenance())


def run_sweep(spec: SweepSpec, base_config: Optional[ScenarioConfig] = None,
              workers: Optional[int] = None) -> SweepResult:
    if base_config is None:
        base_config = build_config({})
    return SweepRunner(spec, base_config, workers).run()
