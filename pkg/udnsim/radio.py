"""
Downlink link budget: pathloss, noise, received power, geometry (SINR) and best-cell selection.

All per-site math runs on numpy arrays of shape (tics, sites); the single-position
functions are the one-row case of the same code. Powers are summed in milliwatts.
Only sites whose coverage radius reaches the TU take part, both as serving candidates
and as interferers.

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
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Sequence, TYPE_CHECKING, Union

import numpy as np
from scipy.signal import lfilter

if TYPE_CHECKING:
    from udnsim.scenario import GnbSite, Point

PATHLOSS_CONSTANT_DB = 128.1
PATHLOSS_SLOPE_DB = 37.6
METERS_PER_KM = 1000.

NO_GNB = -1

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class LinkConfig:
    carrier_ghz: float = 6.
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 7.
    thermal_noise_dbm_per_hz: float = -174.
    rx_antenna_gain_dbi: float = 0.
    sinr_min_db: float = -7.
    min_distance_m: float = 1.
    shadowing_sigma_db: float = 0.
    shadowing_decorrelation_m: float = 50.
    fast_fading: bool = False

    @property
    def is_deterministic(self) -> bool:
        return self.shadowing_sigma_db == 0 and not self.fast_fading


def db_to_mw(dbm: ArrayLike) -> ArrayLike:
    return np.power(10., np.asarray(dbm, dtype=float) / 10.)


def mw_to_db(mw: ArrayLike) -> ArrayLike:
    with np.errstate(divide='ignore'):
        return 10. * np.log10(mw)


def pathloss_db(distance_m: ArrayLike, cfg: LinkConfig = LinkConfig()) -> ArrayLike:
    """ 128.1 + 37.6 log10(d[km]), with d floored at cfg.min_distance_m. """
    d = np.maximum(np.asarray(distance_m, dtype=float), cfg.min_distance_m)
    ret = PATHLOSS_CONSTANT_DB + PATHLOSS_SLOPE_DB * np.log10(d / METERS_PER_KM)
    return float(ret) if np.ndim(ret) == 0 else ret


def noise_power_dbm(cfg: LinkConfig = LinkConfig()) -> float:
    return float(cfg.thermal_noise_dbm_per_hz + 10. * np.log10(cfg.bandwidth_hz) + cfg.noise_figure_db)


class SiteArrays:
    """ Column view of a deployment: one entry per site, indexed by site id. """

    def __init__(self, sites: Sequence['GnbSite']):
        self.ids = np.array([s.id for s in sites], dtype=int)
        if len(sites) and not np.array_equal(self.ids, np.arange(len(sites))):
            raise ValueError("Site ids must be contiguous from 0 and ordered.")
        self.positions = np.array([s.position for s in sites], dtype=float).reshape(len(sites), 2)
        self.eirp_dbm = np.array([s.tx_power + s.antenna_gain for s in sites], dtype=float)
        self.coverage = np.array([s.coverage for s in sites], dtype=float)

    def __len__(self):
        return len(self.ids)

    def distances(self, tu_positions: np.ndarray) -> np.ndarray:
        """ 2-D distances of shape (tics, sites). """
        tu_positions = np.asarray(tu_positions, dtype=float).reshape(-1, 2)
        delta = tu_positions[:, np.newaxis, :] - self.positions[np.newaxis, :, :]
        return np.hypot(delta[..., 0], delta[..., 1])


def shadowing_correlation(step_m: float, decorrelation_m: float) -> float:
    """ Correlation of two shadowing samples of one link taken step_m meters of travel apart. """
    if decorrelation_m == 0:
        return 0.
    return math.exp(-step_m / decorrelation_m)


def draw_shadowing_db(tu_positions: np.ndarray, site_count: int, cfg: LinkConfig,
                      rng: np.random.Generator) -> np.ndarray:
    """
    Log-normal shadowing (dB) of every link along a trajectory, shape (tics, sites).
    Each link is a first order autoregressive process over the distance travelled:
    samples d meters apart correlate as exp(-d / cfg.shadowing_decorrelation_m).
    A decorrelation distance of 0 redraws every tic; inf keeps one value per link.
    Tics on which the TU does not move repeat the previous value.
    """
    positions = np.asarray(tu_positions, dtype=float).reshape(-1, 2)
    if site_count == 0:
        return np.zeros((positions.shape[0], 0))
    steps = np.hypot(*np.diff(positions, axis=0).T)
    moved = steps > 0
    # Row of the distinct position each tic samples
    sample = np.concatenate([[0], np.cumsum(moved)])
    draws = rng.standard_normal(size=(sample[-1] + 1, site_count))

    # The nominal step; a shorter last step before the route end uses it as well
    step = float(steps[moved][0]) if moved.any() else 0.
    rho = shadowing_correlation(step, cfg.shadowing_decorrelation_m)
    if rho >= 1.:
        shadow = np.broadcast_to(draws[:1], draws.shape)
    elif rho > 0.:
        scale = math.sqrt(1. - rho * rho)
        # Stationary start: the first sample keeps unit variance
        draws[0] /= scale
        shadow = lfilter([scale], [1., -rho], draws, axis=0)
    else:
        shadow = draws
    return cfg.shadowing_sigma_db * shadow[sample]


def draw_channel_loss_db(tu_positions: np.ndarray, site_count: int, cfg: LinkConfig,
                         rng: Optional[np.random.Generator]) -> Optional[np.ndarray]:
    """
    Random loss (dB) to subtract from the received power of every link, shape (tics, sites):
    correlated log-normal shadowing plus i.i.d. Rayleigh fast fading per tic when enabled.
    Returns None on the deterministic path.
    """
    if cfg.is_deterministic:
        return None
    if rng is None:
        raise ValueError("A random stream is required when shadowing or fast fading is enabled.")
    tics = np.asarray(tu_positions).reshape(-1, 2).shape[0]
    loss = np.zeros((tics, site_count))
    if cfg.shadowing_sigma_db > 0:
        loss += draw_shadowing_db(tu_positions, site_count, cfg, rng)
    if cfg.fast_fading:
        # Rayleigh: exponential power gain with unit mean
        loss -= mw_to_db(rng.exponential(1., size=(tics, site_count)))
    return loss


def received_power_matrix(tu_positions: np.ndarray, sites: SiteArrays, cfg: LinkConfig,
                          rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    :return: (received power in dBm, coverage mask), both of shape (tics, sites)
    """
    d = sites.distances(tu_positions)
    rx = sites.eirp_dbm[np.newaxis, :] + cfg.rx_antenna_gain_dbi - pathloss_db(d, cfg)
    loss = draw_channel_loss_db(tu_positions, len(sites), cfg, rng)
    if loss is not None:
        rx = rx - loss
    return rx, d <= sites.coverage[np.newaxis, :]


def _exclusive_row_sums(mw: np.ndarray) -> np.ndarray:
    """ For every entry, the sum of the other entries of its row (no cancellation against itself). """
    zeros = np.zeros((mw.shape[0], 1))
    left = np.concatenate([zeros, np.cumsum(mw, axis=1)[:, :-1]], axis=1)
    suffix = np.cumsum(mw[:, ::-1], axis=1)[:, ::-1]
    right = np.concatenate([suffix[:, 1:], zeros], axis=1)
    return left + right


def geometry_matrix(rx_dbm: np.ndarray, covering: np.ndarray, noise_dbm: float) -> np.ndarray:
    """
    Geometry (dB) of every site treated as serving, shape (tics, sites).
    NaN where the site does not cover the TU.
    """
    if rx_dbm.shape[1] == 0:
        return np.empty(rx_dbm.shape)
    mw = np.where(covering, db_to_mw(rx_dbm), 0.)
    interference = _exclusive_row_sums(mw)
    with np.errstate(divide='ignore', invalid='ignore'):
        geo = mw_to_db(mw / (interference + db_to_mw(noise_dbm)))
    return np.where(covering, geo, np.nan)


def best_of(geo: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Best site per row; the lowest id wins ties.
    :return: (best id or NO_GNB, best geometry or NaN), each of shape (tics,)
    """
    tics = geo.shape[0]
    if geo.shape[1] == 0:
        return np.full(tics, NO_GNB, dtype=int), np.full(tics, np.nan)
    has_cover = ~np.all(np.isnan(geo), axis=1)
    best = np.argmax(np.where(np.isnan(geo), -np.inf, geo), axis=1)
    best = np.where(has_cover, best, NO_GNB)
    best_geo = np.where(has_cover, geo[np.arange(tics), np.maximum(best, 0)], np.nan)
    return best, best_geo


########################################################################################################################
# Single position API
########################################################################################################################

@dataclass(frozen=True)
class GeometryReport:
    """
    One tic of measurements.
    per_gnb lists (gnb_id, received_power_dbm) of the covering sites only.
    serving_geo_db is None when the serving site does not cover the TU (or there is no serving site).
    """
    tic: int
    per_gnb: Tuple[Tuple[int, float], ...]
    serving_geo_db: Optional[float]
    best_gnb: Optional[int]
    best_geo_db: Optional[float]

    @property
    def is_dead_zone(self) -> bool:
        return self.best_gnb is None


def _as_optional(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


def received_power_dbm(site: 'GnbSite', tu_pos: 'Point', cfg: LinkConfig = LinkConfig(),
                       rng: Optional[np.random.Generator] = None) -> float:
    rx, _covering = received_power_matrix(np.asarray([tu_pos]), SiteArrays([_reindexed(site)]), cfg, rng)
    return float(rx[0, 0])


def _reindexed(site: 'GnbSite') -> 'GnbSite':
    return replace(site, id=0)


def _measure_row(tu_pos: 'Point', sites: Sequence['GnbSite'], cfg: LinkConfig,
                 rng: Optional[np.random.Generator]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    arrays = SiteArrays(sites)
    rx, covering = received_power_matrix(np.asarray([tu_pos]), arrays, cfg, rng)
    geo = geometry_matrix(rx, covering, noise_power_dbm(cfg))
    return rx[0], covering[0], geo[0]


def geometry_db(tu_pos: 'Point', serving_id: int, sites: Sequence['GnbSite'], cfg: LinkConfig = LinkConfig(),
                rng: Optional[np.random.Generator] = None) -> Optional[float]:
    """
    Geometry of the TU w.r.t. the serving site.
    :return: dB, or None when the serving site does not cover the TU
    :raises KeyError: if serving_id is not a site id
    """
    if not 0 <= serving_id < len(sites):
        raise KeyError(f"No site with id {serving_id}.")
    _rx, _covering, geo = _measure_row(tu_pos, sites, cfg, rng)
    return _as_optional(geo[serving_id])


def best_geometry(tu_pos: 'Point', sites: Sequence['GnbSite'], cfg: LinkConfig = LinkConfig(),
                  rng: Optional[np.random.Generator] = None) -> Optional[Tuple[int, float]]:
    """ The covering site with the highest geometry and that geometry, or None in a dead zone. """
    _rx, _covering, geo = _measure_row(tu_pos, sites, cfg, rng)
    best, best_geo = best_of(geo[np.newaxis, :])
    if best[0] == NO_GNB:
        return None
    return int(best[0]), float(best_geo[0])


def measure(tu_pos: 'Point', sites: Sequence['GnbSite'], serving_id: Optional[int], cfg: LinkConfig = LinkConfig(),
            rng: Optional[np.random.Generator] = None, tic: int = 0) -> GeometryReport:
    """ All measurements of one tic, drawn from a single channel realization. """
    rx, covering, geo = _measure_row(tu_pos, sites, cfg, rng)
    best, best_geo = best_of(geo[np.newaxis, :])
    serving_geo = None
    if serving_id is not None:
        if not 0 <= serving_id < len(sites):
            raise KeyError(f"No site with id {serving_id}.")
        serving_geo = _as_optional(geo[serving_id])
    return GeometryReport(
        tic=tic,
        per_gnb=tuple((int(i), float(rx[i])) for i in np.flatnonzero(covering)),
        serving_geo_db=serving_geo,
        best_gnb=None if best[0] == NO_GNB else int(best[0]),
        best_geo_db=_as_optional(best_geo[0]),
    )


########################################################################################################################
# Whole trajectory
########################################################################################################################

class GeometryTrace:
    """
    Measurements of a full trajectory: every site's geometry at every tic, plus the best cell.
    The serving geometry is looked up per tic since it depends on the handover state.
    """

    def __init__(self, tu_positions: np.ndarray, sites: Sequence['GnbSite'], cfg: LinkConfig = LinkConfig(),
                 rng: Optional[np.random.Generator] = None):
        self.positions = np.asarray(tu_positions, dtype=float).reshape(-1, 2)
        arrays = SiteArrays(sites)
        self.rx_dbm, self.covering = received_power_matrix(self.positions, arrays, cfg, rng)
        self.geo_db = geometry_matrix(self.rx_dbm, self.covering, noise_power_dbm(cfg))
        self.best_gnb, self.best_geo_db = best_of(self.geo_db)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def site_count(self) -> int:
        return self.geo_db.shape[1]

    def report(self, tic: int, serving_id: Optional[int]) -> GeometryReport:
        serving_geo = None
        if serving_id is not None:
            serving_geo = _as_optional(self.geo_db[tic, serving_id])
        best = int(self.best_gnb[tic])
        return GeometryReport(
            tic=tic,
            per_gnb=tuple((int(i), float(self.rx_dbm[tic, i])) for i in np.flatnonzero(self.covering[tic])),
            serving_geo_db=serving_geo,
            best_gnb=None if best == NO_GNB else best,
            best_geo_db=_as_optional(self.best_geo_db[tic]),
        )
