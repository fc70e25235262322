"""
Straight-line constant-velocity TU mobility, sampled once per tic.

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
from typing import List, NamedTuple, TYPE_CHECKING

import numpy as np

from udnsim.util.timeformat import tics_in, MS_PER_SECOND

if TYPE_CHECKING:
    from udnsim.scenario import Route, Point


class TrajectorySample(NamedTuple):
    tic: int
    position: 'Point'


def travelled_m(velocity_mps: float, tic, tic_ms: float):
    return velocity_mps * (tic * tic_ms / MS_PER_SECOND)


def position_at(route: 'Route', velocity_mps: float, tic: int, tic_ms: float) -> 'Point':
    """ Position after `tic` tics; the TU stops at the end point once it gets there. """
    if tic < 0:
        raise ValueError(f"Tic must not be negative. Got {tic}.")
    d = min(travelled_m(velocity_mps, tic, tic_ms), route.length)
    ux, uy = route.unit
    return route.start[0] + d * ux, route.start[1] + d * uy


def trajectory_positions(route: 'Route', velocity_mps: float, run_time_ms: int, tic_ms: int) -> np.ndarray:
    """ Positions for tics 0..N (inclusive) as an array of shape (N + 1, 2). """
    tics = np.arange(tics_in(run_time_ms, tic_ms) + 1)
    d = np.minimum(travelled_m(velocity_mps, tics, tic_ms), route.length)
    ux, uy = route.unit
    return np.column_stack([route.start[0] + d * ux, route.start[1] + d * uy])


def trajectory(route: 'Route', velocity_mps: float, run_time_ms: int, tic_ms: int) -> List[TrajectorySample]:
    positions = trajectory_positions(route, velocity_mps, run_time_ms, tic_ms)
    return [TrajectorySample(tic, (float(x), float(y))) for tic, (x, y) in enumerate(positions)]
