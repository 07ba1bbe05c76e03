"""Indoor-hotspot link budget and Ricean planar-array channel synthesis.

Conventions: the BS array lies in the horizontal ceiling plane with its
boresight pointing straight down. A direction is given by its azimuth in
the floor plane and its ``elevation`` measured off boresight, so
``elevation=0`` is the point directly below the BS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig, place_bs


@dataclass(frozen=True)
class LinkState:
    d3d_m: float
    is_los: bool
    pl_db: float
    shadow_db: float
    k_factor_db: float
    elem_gain_db: float
    ue_gain_db: float = 0.0

    @property
    def slow_gain_db(self) -> float:
        return self.elem_gain_db + self.ue_gain_db - self.pl_db + self.shadow_db


@dataclass
class ChannelSet:
    """Channels of one drop.

    ``h[i, b]`` is the length-``n_ant`` vector between UE ``i`` and BS ``b``.
    """

    h: np.ndarray
    slow_gain_db: np.ndarray
    is_los: np.ndarray
    d3d_m: np.ndarray

    @property
    def n_ue(self) -> int:
        return self.h.shape[0]

    @property
    def n_bs(self) -> int:
        return self.h.shape[1]

    @property
    def n_ant(self) -> int:
        return self.h.shape[2]

    def stacked(self, ues) -> np.ndarray:
        """Whole-network channels of ``ues`` as columns, BS blocks stacked."""
        h = self.h[np.asarray(ues, dtype=int)]
        return h.reshape(h.shape[0], -1).T

    def at_bs(self, b: int, ues) -> np.ndarray:
        """``n_ant x len(ues)`` matrix of the channels from BS ``b``."""
        return self.h[np.asarray(ues, dtype=int), b, :].T


def los_probability(d3d_m):
    """Indoor LoS probability versus 3D distance in meters."""
    d = np.asarray(d3d_m, dtype=float)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise ValueError("distance must be non-negative")
    p = np.where(d <= 18.0, 1.0,
                 np.where(d <= 37.0, np.exp(-(d - 18.0) / 27.0), 0.5))
    return p if p.ndim else float(p)


def path_loss_db(d3d_m, is_los, carrier_ghz: float = 4.0):
    """InH-office path loss; distances below 1 m are clamped to 1 m."""
    d = np.maximum(np.asarray(d3d_m, dtype=float), 1.0)
    lf = math.log10(carrier_ghz)
    pl_los = 32.4 + 17.3 * np.log10(d) + 20.0 * lf
    pl_nlos = np.maximum(pl_los, 17.3 + 38.3 * np.log10(d) + 24.9 * lf)
    pl = np.where(is_los, pl_los, pl_nlos)
    return pl if pl.ndim else float(pl)


def element_gain_db(theta_deg, peak_dbi: float = 5.0, hpbw_deg: float = 90.0,
                    max_atten_db: float = 25.0):
    """Parabolic-in-dB element pattern versus off-boresight angle."""
    theta = np.asarray(theta_deg, dtype=float)
    g = peak_dbi - np.minimum(12.0 * (theta / hpbw_deg) ** 2, max_atten_db)
    return g if g.ndim else float(g)


def _array_side(n_ant: int) -> int:
    side = math.isqrt(n_ant)
    if n_ant < 1 or side * side != n_ant:
        raise ValueError(f"square planar array needs a perfect square, "
                         f"got n_ant={n_ant}")
    return side


def steering_vector(azimuth, elevation, n_ant: int) -> np.ndarray:
    """Half-wavelength square planar array response, unit-modulus entries.

    Angles in radians; broadcasting over leading dimensions is supported,
    the array axis is last. Element ``m * side + n`` sits at grid
    position ``(m, n)`` along the (x, y) axes.
    """
    side = _array_side(n_ant)
    az = np.asarray(azimuth, dtype=float)[..., None]
    el = np.asarray(elevation, dtype=float)[..., None]
    m, n = np.divmod(np.arange(n_ant), side)
    ux = np.sin(el) * np.cos(az)
    uy = np.sin(el) * np.sin(az)
    return np.exp(1j * np.pi * (m * ux + n * uy))


def _ricean(gain_lin, k_lin, a, w):
    k_lin = np.asarray(k_lin, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        los_share = np.where(np.isinf(k_lin), 1.0, k_lin / (k_lin + 1.0))
    los_share = los_share[..., None]
    return np.sqrt(np.asarray(gain_lin)[..., None]) * (
        np.sqrt(los_share) * a + np.sqrt(1.0 - los_share) * w)


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal((*shape, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def draw_channel(link: LinkState, geometry: tuple[float, float], n_ant: int,
                 rng: np.random.Generator) -> np.ndarray:
    """One Ricean channel vector; NLoS links are pure Rayleigh.

    ``geometry`` is ``(azimuth, elevation)`` in radians. Passing
    ``k_factor_db=inf`` on a LoS link returns the scaled steering vector.
    """
    a = steering_vector(geometry[0], geometry[1], n_ant)
    w = _cn(rng, (n_ant,))
    k = 10.0 ** (link.k_factor_db / 10.0) if link.is_los else 0.0
    g = 10.0 ** (link.slow_gain_db / 10.0)
    return _ricean(g, k, a, w)


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float,
                    psd_dbm_hz: float = -174.0) -> float:
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def slow_rss_dbm(p_bs_dbm, link: LinkState) -> float:
    return p_bs_dbm + link.slow_gain_db


def link_geometry(bs_pos: np.ndarray, ue_pos: np.ndarray):
    """Distance, azimuth and off-boresight angle for every (UE, BS) pair."""
    v = ue_pos[:, None, :] - bs_pos[None, :, :]
    d3d = np.linalg.norm(v, axis=-1)
    az = np.arctan2(v[..., 1], v[..., 0])
    el = np.arccos(np.clip(-v[..., 2] / np.maximum(d3d, 1e-12), -1.0, 1.0))
    return d3d, az, el


def draw_channel_set(config: ScenarioConfig, bs_pos: np.ndarray,
                     ue_pos: np.ndarray, rng: np.random.Generator) -> ChannelSet:
    """Draw LoS states, shadowing, K factors and fading for a whole drop."""
    d3d, az, el = link_geometry(bs_pos, ue_pos)
    shape = d3d.shape
    is_los = rng.uniform(size=shape) < los_probability(d3d)
    shadow = rng.standard_normal(shape) * np.where(
        is_los, config.shadow_std_los_db, config.shadow_std_nlos_db)
    k_db = config.k_factor_mean_db + config.k_factor_std_db * \
        rng.standard_normal(shape)
    w = _cn(rng, (*shape, config.n_ant))

    gain_db = (element_gain_db(np.degrees(el), config.bs_elem_gain_dbi,
                               config.bs_hpbw_deg, config.bs_max_atten_db)
               + config.ue_gain_dbi
               - path_loss_db(d3d, is_los, config.carrier_ghz) + shadow)
    k_lin = np.where(is_los, 10.0 ** (k_db / 10.0), 0.0)
    a = steering_vector(az, el, config.n_ant)
    h = _ricean(10.0 ** (gain_db / 10.0), k_lin, a, w)
    return ChannelSet(h=h, slow_gain_db=gain_db, is_los=is_los, d3d_m=d3d)


def edge_points(config: ScenarioConfig, spacing_m: float = 0.5) -> np.ndarray:
    """Points along the floor perimeter at UE height."""
    w, l = config.floor_w_m, config.floor_l_m
    xs = np.linspace(0.0, w, int(round(w / spacing_m)) + 1)
    ys = np.linspace(0.0, l, int(round(l / spacing_m)) + 1)
    pts = np.concatenate([
        np.column_stack([xs, np.zeros_like(xs)]),
        np.column_stack([xs, np.full_like(xs, l)]),
        np.column_stack([np.zeros_like(ys), ys]),
        np.column_stack([np.full_like(ys, w), ys]),
    ])
    return np.column_stack([pts, np.full(len(pts), config.ue_height_m)])


def edge_rss_dbm(config: ScenarioConfig, is_los: bool = False,
                 spacing_m: float = 0.5) -> np.ndarray:
    """Shadowing-free slow RSS from every BS at every floor-edge point."""
    d3d, _, el = link_geometry(place_bs(config), edge_points(config, spacing_m))
    gain = (element_gain_db(np.degrees(el), config.bs_elem_gain_dbi,
                            config.bs_hpbw_deg, config.bs_max_atten_db)
            + config.ue_gain_dbi
            - path_loss_db(d3d, is_los, config.carrier_ghz))
    return config.p_bs_dbm + gain
