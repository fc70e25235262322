"""
Default simulation parameters.

The defaults are written in the same flat grammar the config files use, so this
text is itself a valid config file (see `udnsim validate`).

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
from functools import lru_cache
from typing import Dict, Tuple

import psutil

from udnsim import __version__
from udnsim.config import read_flat_config

NAME = "udnsim"
VERSION = __version__

DEFAULT_CONFIG = """
# udnsim: downlink UDN handover simulation parameters.

# Scenario: city in a square area (meters), gNB count per km^2
area_m = 1000
den_gnb = 10
# Absolute site count; empty means den_gnb x area in km^2
gnb_count =

# Route: A ([1000,0] -> [0,1000]), B ([1000,500] -> [0,500]) or custom.
# Endpoints are required for custom routes only.
route = A
start_x_m =
start_y_m =
end_x_m =
end_y_m =
velocity_kmh = 50

# Timing
run_time_ms = 70000
tic_ms = 10
iterations = 100
seed = 0

# Radio
carrier_ghz = 6
bandwidth_hz = 10000000
noise_figure_db = 7
tx_power_dbm = 30
gnb_antenna_gain_dbi = 15
rx_antenna_gain_dbi = 0
gnb_coverage_m = 300
gnb_height_m = 15
sinr_min_db = -7
shadowing_sigma_db = 0
# Meters of travel over which shadowing decorrelates: 0 redraws every tic, inf never
shadowing_decorrelation_m = 50
fast_fading = 0
min_distance_m = 1

# Handover triggering
ttt_tics = 1
ho_hys_db = 3
ho_exec_time_tics = 25
best_cio_db = 0
current_cio_db = 0
avg_window = 10
a3_reference = avg
"""

# Keys that may appear in a config file without a default value line
OPTIONAL_KEYS = ('heading_deg',)

ROUTE_ENDPOINTS: Dict[str, Tuple[Tuple[float, float], Tuple[float, float]]] = {
    'A': ((1000., 0.), (0., 1000.)),
    'B': ((1000., 500.), (0., 500.)),
}


@lru_cache(maxsize=1)
def default_values() -> Dict[str, str]:
    return read_flat_config(DEFAULT_CONFIG, source='defaults')


def config_keys() -> Tuple[str, ...]:
    return (*default_values().keys(), *OPTIONAL_KEYS)


def default_workers() -> int:
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or os.cpu_count() or 1
    return max(1, int(cores))
