"""
Simulation time units and human readable wall-clock durations.

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
from typing import Union

Number = Union[int, float]

KMH_PER_MPS = 3.6
MS_PER_SECOND = 1000


def kmh_to_mps(velocity_kmh: Number) -> float:
    return velocity_kmh / KMH_PER_MPS


def tics_in(run_time_ms: int, tic_ms: int) -> int:
    """ Number of tic intervals in a run (the run has one more sample than that). """
    return run_time_ms // tic_ms


def time_delta(seconds: Number) -> str:
    """ Short wall-clock representation, e.g., '950ms', '12.3s', '4:05m', '1:02:03h'. """
    sign = '-' if seconds < 0 else ''
    seconds = abs(seconds)
    if seconds < 1:
        return f"{sign}{seconds * MS_PER_SECOND:.0f}ms"
    elif seconds < 60:
        return f"{sign}{seconds:.3g}s"
    # Whole seconds first, so 119.7 renders as 2:00m
    minutes, secs = divmod(int(round(seconds)), 60)
    if minutes < 60:
        return f"{sign}{minutes}:{secs:02d}m"
    hours, minutes = divmod(minutes, 60)
    return f"{sign}{hours}:{minutes:02d}:{secs:02d}h"
