"""
Experiment grid points and their random streams.

A cell's seeds are derived from the master seed and the grid point itself (never its
position in a sweep), so reshaping a sweep does not change the cells it shares with
another sweep.

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
import dataclasses
from typing import Tuple

from udnsim.kpi import GridPoint
from udnsim.scenario import ScenarioConfig, Route, CASE_A, CASE_B, CUSTOM, derive_seed, validate_config

CASE_CODES = {CASE_A: 0, CASE_B: 1, CUSTOM: 2}

# Valid TTTs start at 1 tic
NEVER_TTT_KEY = 0
VELOCITY_KEY_SCALE = 1000


def ttt_key(ttt_tics) -> int:
    return NEVER_TTT_KEY if math.isinf(ttt_tics) else int(ttt_tics)


def cell_key(point: GridPoint, crn: bool = False) -> Tuple[int, ...]:
    """
    Seed key of a grid point. In common-random-numbers mode the TTT is left out, so every
    TTT of the same (case, density, velocity) replays the same deployments.
    """
    velocity = int(round(point.velocity_kmh * VELOCITY_KEY_SCALE))
    if crn:
        return CASE_CODES[point.case], point.den_gnb, velocity
    return CASE_CODES[point.case], ttt_key(point.ttt_tics), point.den_gnb, velocity


def iteration_seed(master_seed: int, point: GridPoint, iteration: int, crn: bool = False) -> int:
    return derive_seed(master_seed, *cell_key(point, crn), iteration)


def base_point(cfg: ScenarioConfig) -> GridPoint:
    return GridPoint(cfg.route.label, cfg.handover.ttt_tics, cfg.den_gnb, cfg.velocity_kmh)


def point_config(base: ScenarioConfig, point: GridPoint) -> ScenarioConfig:
    """
    The base config moved to a grid point.
    An explicit site count in the base config is kept only while the density is unchanged.
    """
    if point.case == CUSTOM:
        if base.route.label != CUSTOM:
            raise ValueError("A custom grid point requires a custom route in the base config.")
        route = base.route
    elif point.case == base.route.label:
        route = base.route
    else:
        route = Route.case(point.case)

    gnb_count = base.gnb_count if point.den_gnb == base.den_gnb else None
    cfg = base.replace(
        route=route,
        den_gnb=point.den_gnb,
        gnb_count=gnb_count,
        velocity_kmh=float(point.velocity_kmh),
        handover=dataclasses.replace(base.handover, ttt_tics=point.ttt_tics),
    )
    return validate_config(cfg)
