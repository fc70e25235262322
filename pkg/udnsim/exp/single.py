"""
One grid cell: independent iterations, each with its own deployment and random stream.

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
import time
import logging
from typing import Optional, Callable

from udnsim.exp import point_config, iteration_seed
from udnsim.handover import run_tu
from udnsim.kpi import GridPoint, KpiCell, KpiAccumulator, RunResult
from udnsim.scenario import ScenarioConfig, make_rng, place_gnbs
from udnsim.util.timeformat import time_delta

TraceObserver = Callable[[dict], None]


def run_iteration(cfg: ScenarioConfig, seed: int, on_tic: Optional[TraceObserver] = None) -> RunResult:
    """ Deploy the sites and replay the TU with a single random stream seeded by `seed`. """
    rng = make_rng(seed)
    sites = place_gnbs(cfg.area, cfg.site_count, rng, cfg.gnb)
    return run_tu(cfg, sites, cfg.handover, cfg.link, rng, seed=seed, on_tic=on_tic)


def run_cell(point: GridPoint, base_config: ScenarioConfig, iterations: Optional[int] = None,
             master_seed: Optional[int] = None, crn: bool = False,
             on_tic: Optional[TraceObserver] = None) -> KpiCell:
    """
    Run all the iterations of a grid point and aggregate them.
    :param iterations: defaults to the config's iteration count
    :param master_seed: defaults to the config's seed
    :param on_tic: receives every trace row, tagged with its iteration
    """
    logger = logging.getLogger("cell-runner")
    cfg = point_config(base_config, point)
    if iterations is None:
        iterations = cfg.iterations
    if master_seed is None:
        master_seed = cfg.seed
    if iterations < 1:
        raise ValueError(f"At least one iteration is required. Got {iterations}.")

    start = time.time()
    acc = KpiAccumulator()
    for i in range(iterations):
        observer = None
        if on_tic is not None:
            def observer(row, _iteration=i):
                on_tic(dict(iteration=_iteration, **row))

        result = run_iteration(cfg, iteration_seed(master_seed, point, i, crn), observer)
        acc.add(result)
        logger.debug("%s iteration %s: %s handover(s), %s connection loss(es)", point, i,
                     result.ho_times, result.connection_losses)

    cell = acc.finalize(point)
    logger.info("%s: rate %.3f over %s iteration(s) in %s", point, cell.mean_ho_rate, iterations,
                time_delta(time.time() - start))
    return cell
