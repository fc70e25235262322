"""
Scenario assembly: area, routes, gNB deployment, run timing and seeding.

A ScenarioConfig is built from flat key=value layers (built-in defaults, config file,
command-line flags) and validated as a whole; every invalid field is reported at once.

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
from dataclasses import dataclass, field
from typing import Tuple, List, Optional, Mapping, Dict, Any, Callable

import numpy as np

from udnsim import settings
from udnsim.config import ConfigError, DictConfig, read_flat_config, read_flat_config_file
from udnsim.radio import LinkConfig
from udnsim.handover import HandoverParams, A3_REFERENCES
from udnsim.util import parsers
from udnsim.util.timeformat import kmh_to_mps, tics_in

Point = Tuple[float, float]

CASE_A = 'A'
CASE_B = 'B'
CUSTOM = 'custom'
ROUTE_LABELS = (CASE_A, CASE_B, CUSTOM)

HEADING_TOLERANCE_DEG = 1e-6
SQUARE_METERS_PER_KM2 = 1e6


@dataclass(frozen=True)
class AreaSpec:
    width: float = 1000.
    height: float = 1000.

    @property
    def km2(self) -> float:
        return self.width * self.height / SQUARE_METERS_PER_KM2

    def contains(self, p: Point) -> bool:
        return 0 <= p[0] <= self.width and 0 <= p[1] <= self.height


@dataclass(frozen=True)
class GnbProfile:
    """ Radio parameters shared by every deployed site (all gNBs are identical). """
    height_m: float = 15.
    tx_power_dbm: float = 30.
    antenna_gain_dbi: float = 15.
    coverage_m: float = 300.


@dataclass(frozen=True)
class GnbSite:
    id: int
    position: Point
    height: float = 15.
    tx_power: float = 30.
    antenna_gain: float = 15.
    coverage: float = 300.

    @classmethod
    def from_profile(cls, site_id: int, position: Point, profile: GnbProfile) -> 'GnbSite':
        return cls(site_id, position, profile.height_m, profile.tx_power_dbm, profile.antenna_gain_dbi,
                   profile.coverage_m)


def heading_of(start: Point, end: Point) -> float:
    """ Heading in degrees, counter-clockwise from the +x axis, in [0, 360). """
    return math.degrees(math.atan2(end[1] - start[1], end[0] - start[0])) % 360.


def heading_difference(a: float, b: float) -> float:
    return abs((a - b + 180.) % 360. - 180.)


@dataclass(frozen=True)
class Route:
    label: str
    start: Point
    end: Point
    heading_deg: float

    @classmethod
    def between(cls, start: Point, end: Point, label: str = CUSTOM) -> 'Route':
        start = (float(start[0]), float(start[1]))
        end = (float(end[0]), float(end[1]))
        return cls(label, start, end, heading_of(start, end))

    @classmethod
    def case(cls, label: str) -> 'Route':
        start, end = settings.ROUTE_ENDPOINTS[label]
        return cls.between(start, end, label)

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def unit(self) -> Point:
        length = self.length
        return (self.end[0] - self.start[0]) / length, (self.end[1] - self.start[1]) / length

    def reversed(self) -> 'Route':
        return Route.between(self.end, self.start, self.label)


@dataclass(frozen=True)
class ScenarioConfig:
    area: AreaSpec = AreaSpec()
    den_gnb: int = 10
    route: Route = field(default_factory=lambda: Route.case(CASE_A))
    velocity_kmh: float = 50.
    run_time_ms: int = 70000
    tic_ms: int = 10
    iterations: int = 100
    seed: int = 0
    gnb_count: Optional[int] = None
    gnb: GnbProfile = GnbProfile()
    link: LinkConfig = LinkConfig()
    handover: HandoverParams = HandoverParams()

    @property
    def velocity_mps(self) -> float:
        return kmh_to_mps(self.velocity_kmh)

    @property
    def site_count(self) -> int:
        if self.gnb_count is not None:
            return self.gnb_count
        return int(round(self.den_gnb * self.area.km2))

    @property
    def tic_count(self) -> int:
        return tics_in(self.run_time_ms, self.tic_ms)

    def replace(self, **changes) -> 'ScenarioConfig':
        return dataclasses.replace(self, **changes)


########################################################################################################################
# Deployment and seeding
########################################################################################################################

def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def place_gnbs(area: AreaSpec, count: int, rng: np.random.Generator,
               profile: GnbProfile = GnbProfile()) -> List[GnbSite]:
    """
    Drop `count` sites uniformly over the area (a PPP conditioned on its count).
    The x and y coordinates of each site are drawn together, site after site.
    """
    if count <= 0:
        return []
    xy = rng.uniform(0., 1., size=(count, 2)) * (area.width, area.height)
    return [GnbSite.from_profile(i, (float(x), float(y)), profile) for i, (x, y) in enumerate(xy)]


def derive_seed(master_seed: int, *key: int) -> int:
    """ Hash (master_seed, *key) into an independent 64-bit seed. Stable across runs and platforms. """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def derive_iteration_seed(master_seed: int, iteration: int) -> int:
    return derive_seed(master_seed, iteration)


########################################################################################################################
# Config parsing and validation
########################################################################################################################

def _area_value(param, default=None):
    if isinstance(param, AreaSpec):
        return param
    text = parsers.parameter_str(param, '')
    parts = text.lower().split('x')
    values = [parsers.parameter_float(p) for p in parts]
    if len(values) not in (1, 2) or any(v is None for v in values):
        return default
    return AreaSpec(values[0], values[-1])


def _optional_int(param, default=None):
    if param is None or parsers.parameter_str(param) == '':
        return None
    return parsers.parameter_int(param, default)


def _optional_float(param, default=None):
    if param is None or parsers.parameter_str(param) == '':
        return None
    return parsers.parameter_float(param, default)


def parse_route_label(param, default=None):
    text = parsers.parameter_str(param, '')
    for label in ROUTE_LABELS:
        if text.lower() == label.lower():
            return label
    return default


def _a3_reference(param, default=None):
    text = parsers.parameter_str(param, '').lower()
    return text if text in A3_REFERENCES else default


FIELD_PARSERS: Dict[str, Tuple[Callable, str]] = {
    'area_m': (_area_value, "expected a side length or WIDTHxHEIGHT in meters"),
    'den_gnb': (parsers.parameter_int, "expected an integer count per km^2"),
    'gnb_count': (_optional_int, "expected an integer or empty"),
    'route': (parse_route_label, f"expected one of {'|'.join(ROUTE_LABELS)}"),
    'start_x_m': (_optional_float, "expected meters"),
    'start_y_m': (_optional_float, "expected meters"),
    'end_x_m': (_optional_float, "expected meters"),
    'end_y_m': (_optional_float, "expected meters"),
    'heading_deg': (_optional_float, "expected degrees"),
    'velocity_kmh': (parsers.parameter_float, "expected km/h"),
    'run_time_ms': (parsers.parameter_int, "expected an integer number of ms"),
    'tic_ms': (parsers.parameter_int, "expected an integer number of ms"),
    'iterations': (parsers.parameter_int, "expected an integer"),
    'seed': (parsers.parameter_u64, "expected an unsigned 64-bit integer"),
    'carrier_ghz': (parsers.parameter_float, "expected GHz"),
    'bandwidth_hz': (parsers.parameter_float, "expected Hz"),
    'noise_figure_db': (parsers.parameter_float, "expected dB"),
    'tx_power_dbm': (parsers.parameter_float, "expected dBm"),
    'gnb_antenna_gain_dbi': (parsers.parameter_float, "expected dBi"),
    'rx_antenna_gain_dbi': (parsers.parameter_float, "expected dBi"),
    'gnb_coverage_m': (parsers.parameter_float, "expected meters"),
    'gnb_height_m': (parsers.parameter_float, "expected meters"),
    'sinr_min_db': (parsers.parameter_float, "expected dB"),
    'shadowing_sigma_db': (parsers.parameter_float, "expected dB"),
    'shadowing_decorrelation_m': (parsers.parameter_float, "expected meters or 'inf'"),
    'fast_fading': (parsers.parameter_bool, "expected 0 or 1"),
    'min_distance_m': (parsers.parameter_float, "expected meters"),
    'ttt_tics': (parsers.parameter_ttt, "expected an integer number of tics or 'inf'"),
    'ho_hys_db': (parsers.parameter_float, "expected dB"),
    'ho_exec_time_tics': (parsers.parameter_int, "expected an integer number of tics"),
    'best_cio_db': (parsers.parameter_float, "expected dB"),
    'current_cio_db': (parsers.parameter_float, "expected dB"),
    'avg_window': (parsers.parameter_int, "expected an integer number of samples"),
    'a3_reference': (_a3_reference, "expected avg or instant"),
}

FAIL = parsers.FAIL


def parse_values(values: Mapping[str, Any]) -> Dict[str, Any]:
    """ Convert raw values into typed values. Unknown keys and unparsable values are reported together. """
    errors = []
    ret = {}
    known = set(settings.config_keys())
    for key, raw in values.items():
        if key not in known:
            errors.append((key, "unknown key"))
            continue
        func, message = FIELD_PARSERS[key]
        value = func(raw, FAIL)
        if value is FAIL:
            errors.append((key, f"{message}, got '{raw}'"))
        else:
            ret[key] = value
    if errors:
        raise ConfigError(errors)
    return ret


def _build_route(v: Dict[str, Any], errors: list) -> Optional[Route]:
    label = v['route']
    endpoint_keys = ('start_x_m', 'start_y_m', 'end_x_m', 'end_y_m')
    given = {k: v.get(k) for k in endpoint_keys if v.get(k) is not None}

    if label == CUSTOM:
        missing = [k for k in endpoint_keys if k not in given]
        if missing:
            errors.extend((k, "required when route = custom") for k in missing)
            return None
        start = (given['start_x_m'], given['start_y_m'])
        end = (given['end_x_m'], given['end_y_m'])
    else:
        start, end = settings.ROUTE_ENDPOINTS[label]
        table = dict(zip(endpoint_keys, (*start, *end)))
        for k, value in given.items():
            if not math.isclose(value, table[k], abs_tol=1e-9):
                errors.append((k, f"route {label} fixes this endpoint coordinate to {table[k]:g}, got {value:g}"))

    if start == end:
        errors.append(('route', "start and end points must differ"))
        return None

    route = Route.between(start, end, label)
    heading = v.get('heading_deg')
    if heading is not None:
        route = Route(label, route.start, route.end, heading)
    return route


def build_config(values: Mapping[str, Any]) -> ScenarioConfig:
    """
    Build a ScenarioConfig from a mapping of (raw or typed) values layered over the built-in defaults.
    :raises ConfigError: on unknown keys, unparsable values or invalid fields
    """
    v = parse_values(DictConfig(settings.default_values(), dict(values)).items())
    errors = []
    route = _build_route(v, errors)
    if route is None:
        raise ConfigError(errors)

    cfg = ScenarioConfig(
        area=v['area_m'],
        den_gnb=v['den_gnb'],
        route=route,
        velocity_kmh=v['velocity_kmh'],
        run_time_ms=v['run_time_ms'],
        tic_ms=v['tic_ms'],
        iterations=v['iterations'],
        seed=v['seed'],
        gnb_count=v['gnb_count'],
        gnb=GnbProfile(
            height_m=v['gnb_height_m'],
            tx_power_dbm=v['tx_power_dbm'],
            antenna_gain_dbi=v['gnb_antenna_gain_dbi'],
            coverage_m=v['gnb_coverage_m'],
        ),
        link=LinkConfig(
            carrier_ghz=v['carrier_ghz'],
            bandwidth_hz=v['bandwidth_hz'],
            noise_figure_db=v['noise_figure_db'],
            rx_antenna_gain_dbi=v['rx_antenna_gain_dbi'],
            sinr_min_db=v['sinr_min_db'],
            min_distance_m=v['min_distance_m'],
            shadowing_sigma_db=v['shadowing_sigma_db'],
            shadowing_decorrelation_m=v['shadowing_decorrelation_m'],
            fast_fading=v['fast_fading'],
        ),
        handover=HandoverParams(
            ttt_tics=v['ttt_tics'],
            ho_hys_db=v['ho_hys_db'],
            ho_exec_time_tics=v['ho_exec_time_tics'],
            best_cio_db=v['best_cio_db'],
            current_cio_db=v['current_cio_db'],
            avg_window=v['avg_window'],
            sinr_min_db=v['sinr_min_db'],
            a3_reference=v['a3_reference'],
        ),
    )
    return validate_config(cfg, errors)


def validate_config(cfg: ScenarioConfig, errors: Optional[list] = None) -> ScenarioConfig:
    """
    Check every field invariant of a config.
    :return: The same config, if valid
    :raises ConfigError: listing every invalid field
    """
    errors = list(errors or ())

    def check(condition, key, message):
        if not condition:
            errors.append((key, message))

    check(cfg.area.width > 0 and cfg.area.height > 0, 'area_m', "area sides must be positive")
    check(cfg.den_gnb > 0, 'den_gnb', f"density must be a positive integer, got {cfg.den_gnb}")
    check(cfg.gnb_count is None or cfg.gnb_count >= 0, 'gnb_count', "site count must not be negative")
    check(cfg.velocity_kmh > 0, 'velocity_kmh', f"velocity must be positive, got {cfg.velocity_kmh:g}")
    check(cfg.tic_ms > 0, 'tic_ms', "tic must be positive")
    check(cfg.run_time_ms > 0, 'run_time_ms', "run time must be positive")
    if cfg.tic_ms > 0:
        check(cfg.run_time_ms % cfg.tic_ms == 0, 'run_time_ms',
              f"run time {cfg.run_time_ms} ms is not divisible by the tic ({cfg.tic_ms} ms)")
    check(cfg.iterations >= 1, 'iterations', "at least one iteration is required")
    check(0 <= cfg.seed < 2 ** 64, 'seed', "seed must be an unsigned 64-bit integer")

    route = cfg.route
    check(route.label in ROUTE_LABELS, 'route', f"unknown route label '{route.label}'")
    if route.start == route.end:
        check(False, 'route', "start and end points must differ")
    else:
        expected = heading_of(route.start, route.end)
        check(heading_difference(route.heading_deg, expected) <= HEADING_TOLERANCE_DEG, 'heading_deg',
              f"heading {route.heading_deg:g} deg does not match the endpoints ({expected:g} deg)")
    check(cfg.area.contains(route.start), 'start_x_m', "route start lies outside the area")
    check(cfg.area.contains(route.end), 'end_x_m', "route end lies outside the area")

    check(cfg.gnb.coverage_m > 0, 'gnb_coverage_m', "coverage must be positive")
    check(cfg.link.bandwidth_hz > 0, 'bandwidth_hz', "bandwidth must be positive")
    check(cfg.link.min_distance_m > 0, 'min_distance_m', "distance floor must be positive")
    check(cfg.link.shadowing_sigma_db >= 0, 'shadowing_sigma_db', "sigma must not be negative")
    check(cfg.link.shadowing_decorrelation_m >= 0, 'shadowing_decorrelation_m',
          "decorrelation distance must not be negative")

    ho = cfg.handover
    check(ho.ttt_tics == math.inf or (isinstance(ho.ttt_tics, int) and ho.ttt_tics >= 1), 'ttt_tics',
          f"TTT must be at least 1 tic, got {ho.ttt_tics}")
    check(ho.avg_window >= 1, 'avg_window', "averaging window must hold at least one sample")
    check(ho.ho_exec_time_tics >= 0, 'ho_exec_time_tics', "execution time must not be negative")
    check(ho.a3_reference in A3_REFERENCES, 'a3_reference', f"expected one of {A3_REFERENCES}")
    check(ho.sinr_min_db == cfg.link.sinr_min_db, 'sinr_min_db', "handover and link thresholds differ")

    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config_text(text: str, source: str = '<string>') -> ScenarioConfig:
    return build_config(read_flat_config(text, source))


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    """ Defaults, then the config file (if any), then the overrides. """
    file_values = read_flat_config_file(path) if path else {}
    return build_config(DictConfig(file_values, dict(overrides or {})).items())


########################################################################################################################
# Serialization
########################################################################################################################

def _format_value(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf'
        return repr(value)
    return str(value)


def config_values(cfg: ScenarioConfig) -> Dict[str, Any]:
    """ The config as flat typed key/value pairs, in the order of the defaults file. """
    area = cfg.area
    area_value = area.width if area.width == area.height else f"{area.width!r}x{area.height!r}"
    route = cfg.route
    return {
        'area_m': area_value,
        'den_gnb': cfg.den_gnb,
        'gnb_count': cfg.gnb_count,
        'route': route.label,
        'start_x_m': route.start[0],
        'start_y_m': route.start[1],
        'end_x_m': route.end[0],
        'end_y_m': route.end[1],
        'velocity_kmh': cfg.velocity_kmh,
        'run_time_ms': cfg.run_time_ms,
        'tic_ms': cfg.tic_ms,
        'iterations': cfg.iterations,
        'seed': cfg.seed,
        'carrier_ghz': cfg.link.carrier_ghz,
        'bandwidth_hz': cfg.link.bandwidth_hz,
        'noise_figure_db': cfg.link.noise_figure_db,
        'tx_power_dbm': cfg.gnb.tx_power_dbm,
        'gnb_antenna_gain_dbi': cfg.gnb.antenna_gain_dbi,
        'rx_antenna_gain_dbi': cfg.link.rx_antenna_gain_dbi,
        'gnb_coverage_m': cfg.gnb.coverage_m,
        'gnb_height_m': cfg.gnb.height_m,
        'sinr_min_db': cfg.link.sinr_min_db,
        'shadowing_sigma_db': cfg.link.shadowing_sigma_db,
        'shadowing_decorrelation_m': cfg.link.shadowing_decorrelation_m,
        'fast_fading': cfg.link.fast_fading,
        'min_distance_m': cfg.link.min_distance_m,
        'ttt_tics': cfg.handover.ttt_tics,
        'ho_hys_db': cfg.handover.ho_hys_db,
        'ho_exec_time_tics': cfg.handover.ho_exec_time_tics,
        'best_cio_db': cfg.handover.best_cio_db,
        'current_cio_db': cfg.handover.current_cio_db,
        'avg_window': cfg.handover.avg_window,
        'a3_reference': cfg.handover.a3_reference,
        'heading_deg': route.heading_deg,
    }


def format_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {_format_value(v)}\n" for k, v in config_values(cfg).items())
