"""Large-scale radio channel: RMa pathloss, stochastic LOS, correlated shadow
fading, RSRP/SINR derivation and the SINR-to-rate mapping.

Propagation follows the 3GPP TR 38.901 Rural Macro (RMa) scenario; the
numeric coefficients live in ``rma_constants.json`` next to this module.
Fast fading is deliberately not modelled: layer-3 measurements average over
long windows, so the handover dynamics of interest are driven by the
large-scale terms only.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.signal import lfilter


def _load_rma_constants() -> dict:
    with resources.files(__package__).joinpath("rma_constants.json").open() as fh:
        return json.load(fh)


RMA = _load_rma_constants()

BOLTZMANN_NOISE_DBM_HZ = -174.0  # thermal noise density at 290 K


@dataclass(frozen=True)
class RadioParams:
    """Channel-model knobs. Defaults follow TR 38.901 RMa where the standard
    provides a value; the rest are simulator calibration choices."""

    avg_building_height_m: float = 5.0
    street_width_m: float = 20.0
    sf_sigma_los_db: float = RMA["sf_sigma_los_db"]
    sf_sigma_nlos_db: float = RMA["sf_sigma_nlos_db"]
    sf_correlation_distance_m: float = RMA["sf_correlation_distance_nlos_m"]
    los_persistence_distance_m: float = 50.0
    interference_mode: str = "noise_only"  # or "full_buffer_neighbors"
    max_spectral_efficiency_bps_hz: float = 14.0
    n_subcarriers: int = 180  # 15 PRBs at 15 kHz SCS in 3 MHz


@dataclass
class LinkState:
    """Large-scale state of one (UE, site) link at one instant."""

    ue_id: int
    site_id: int
    los: bool
    pathloss_db: float
    shadow_db: float
    rsrp_dbm: float
    sinr_db: float = float("nan")


def los_probability(d2d_m):
    """RMa LOS probability (TR 38.901 Table 7.4.2-1).

    1.0 within 10 m, exp(-(d-10)/1000) beyond. Accepts scalars or arrays.
    """
    d = np.asarray(d2d_m, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    p = np.where(d <= RMA["always_los_distance_m"],
                 1.0,
                 np.exp(-(d - RMA["always_los_distance_m"]) / RMA["los_decay_distance_m"]))
    return float(p) if np.isscalar(d2d_m) else p


def breakpoint_distance_m(fc_hz: float, h_bs_m: float, h_ut_m: float) -> float:
    return 2.0 * np.pi * h_bs_m * h_ut_m * fc_hz / RMA["speed_of_light_mps"]


def _pl1_los_db(d3d_m, fc_ghz: float, h_m: float):
    """First-slope RMa LOS pathloss (valid up to the breakpoint distance)."""
    a = min(0.03 * h_m ** 1.72, 10.0)
    b = min(0.044 * h_m ** 1.72, 14.77)
    return (20.0 * np.log10(40.0 * np.pi * d3d_m * fc_ghz / 3.0)
            + a * np.log10(d3d_m) - b + 0.002 * np.log10(h_m) * d3d_m)


def _nlos_prime_db(d3d_m, fc_ghz: float, h_m: float, w_m: float,
                   h_bs_m: float, h_ut_m: float):
    return (161.04 - 7.1 * np.log10(w_m) + 7.5 * np.log10(h_m)
            - (24.37 - 3.7 * (h_m / h_bs_m) ** 2) * np.log10(h_bs_m)
            + (43.42 - 3.1 * np.log10(h_bs_m)) * (np.log10(d3d_m) - 3.0)
            + 20.0 * np.log10(fc_ghz)
            - (3.2 * np.log10(11.75 * h_ut_m) ** 2 - 4.97))


def pathloss_db(d3d_m, los, params: RadioParams, fc_hz: float,
                h_bs_m: float, h_ut_m: float):
    """RMa pathloss in dB (TR 38.901 Table 7.4.1-1).

    LOS uses the dual-slope PL1/PL2 model around the breakpoint distance;
    NLOS is max(PL_LOS, PL'_NLOS). Distances below the 10 m model validity
    bound are clamped (with a warning). Scalar or array ``d3d_m``/``los``.
    """
    d = np.asarray(d3d_m, dtype=float)
    scalar = d.ndim == 0
    d = np.atleast_1d(d)
    if np.any(d < RMA["min_valid_distance_m"]):
        warnings.warn("distance below RMa validity range, clamped to 10 m",
                      stacklevel=2)
        d = np.maximum(d, RMA["min_valid_distance_m"])

    fc_ghz = fc_hz / 1e9
    h = params.avg_building_height_m
    dbp = breakpoint_distance_m(fc_hz, h_bs_m, h_ut_m)
    pl_los = np.where(d <= dbp,
                      _pl1_los_db(d, fc_ghz, h),
                      _pl1_los_db(dbp, fc_ghz, h) + 40.0 * np.log10(d / dbp))
    pl_nlos = np.maximum(pl_los, _nlos_prime_db(d, fc_ghz, h,
                                                params.street_width_m,
                                                h_bs_m, h_ut_m))
    out = np.where(np.atleast_1d(los), pl_los, pl_nlos)
    return float(out[0]) if scalar else out


class ShadowFading:
    """Log-normal shadow fading with exponential spatial autocorrelation
    exp(-delta_d / d_corr), one process per (UE, site) link.

    A unit-variance AR(1) process is materialized on a fixed spatial grid
    (``grid_m`` of travelled distance per node) and scaled by the LOS- or
    NLOS-state sigma at sampling time. Queries hold the most recent grid
    node, so the sample path depends only on the travelled distance, not
    on the caller's time step; refining the simulation step leaves the
    realization unchanged. Deterministic given the seed stream.
    """

    def __init__(self, sigma_los_db: float, sigma_nlos_db: float,
                 correlation_distance_m: float, rng: np.random.Generator,
                 grid_m: float = 1.0):
        if correlation_distance_m <= 0:
            raise ValueError("correlation distance must be positive")
        if grid_m <= 0:
            raise ValueError("grid spacing must be positive")
        self.sigma_los = sigma_los_db
        self.sigma_nlos = sigma_nlos_db
        self.d_corr = correlation_distance_m
        self.grid_m = grid_m
        self.rng = rng
        self._rho = float(np.exp(-grid_m / correlation_distance_m))
        self._gain = float(np.sqrt(1.0 - self._rho ** 2))
        self._node: int | None = None  # last materialized grid node
        self._x = 0.0                  # its normalized process value
        self._last_pos: float | None = None  # for the positional scalar API
        self._arc = 0.0

    def _advance_to_node(self, node: int) -> float:
        if self._node is None:
            self._x = float(self.rng.standard_normal())
            self._node = 0
        while self._node < node:  # scalar path; series() vectorizes this
            self._x = self._rho * self._x + self._gain * float(self.rng.standard_normal())
            self._node += 1
        return self._x

    def sample(self, position_m: float, los: bool) -> float:
        """Scalar query; travel is accumulated from |position deltas|."""
        if self._last_pos is None:
            arc = 0.0
        else:
            arc = self._arc + abs(position_m - self._last_pos)
        self._last_pos = float(position_m)
        self._arc = arc
        value = self._advance_to_node(int(arc / self.grid_m))
        sigma = self.sigma_los if los else self.sigma_nlos
        return sigma * value

    def series(self, travel_m: np.ndarray, los_flags: np.ndarray) -> np.ndarray:
        """Vectorized query at a monotone cumulative-travel array."""
        travel_m = np.asarray(travel_m, dtype=float)
        if travel_m.size == 0:
            return np.array([])
        if np.any(np.diff(travel_m) < 0):
            raise ValueError("travel must be non-decreasing")
        nodes = (travel_m / self.grid_m).astype(np.int64)
        first = self._advance_to_node(int(nodes[0]))
        n_new = int(nodes[-1]) - self._node
        if n_new > 0:
            z = self.rng.standard_normal(n_new)
            seg, _ = lfilter([self._gain], [1.0, -self._rho], z, zi=[self._rho * self._x])
            x_nodes = np.concatenate(([first], seg))
            self._x = float(seg[-1])
        else:
            x_nodes = np.array([first])
        base = self._node
        self._node = int(nodes[-1])
        x = x_nodes[nodes - base]
        sigma = np.where(np.asarray(los_flags, dtype=bool),
                         self.sigma_los, self.sigma_nlos)
        return sigma * x


def sample_los_states(d2d_at_draws_m, rng: np.random.Generator) -> np.ndarray:
    """One stochastic LOS draw per persistence segment.

    ``d2d_at_draws_m`` holds the 2D site distance at each draw point (every
    ``los_persistence_distance_m`` of travel); the state is held between
    draws. Returns one boolean per segment.
    """
    p = los_probability(np.asarray(d2d_at_draws_m, dtype=float))
    return rng.random(np.shape(p)) < p


def thermal_noise_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    return BOLTZMANN_NOISE_DBM_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def eirp_per_subcarrier_dbm(eirp_dbm: float, n_subcarriers: int) -> float:
    return eirp_dbm - 10.0 * np.log10(n_subcarriers)


def measure_rsrp(eirp_dbm: float, n_subcarriers: int, pathloss_db, shadow_db):
    """Per-subcarrier RSRP in dBm given total EIRP and the large-scale losses."""
    return eirp_per_subcarrier_dbm(eirp_dbm, n_subcarriers) - pathloss_db - shadow_db


def sinr_db(rsrp_serving_dbm, rsrp_neighbors_dbm, noise_dbm: float,
            interference_mode: str = "noise_only"):
    """Per-subcarrier SINR of the serving link.

    ``noise_only`` ignores co-channel cells; ``full_buffer_neighbors`` adds
    every neighbor's RSRP as always-on interference. ``rsrp_neighbors_dbm``
    stacks neighbors on the last axis.
    """
    serving_mw = 10.0 ** (np.asarray(rsrp_serving_dbm, dtype=float) / 10.0)
    denom_mw = 10.0 ** (noise_dbm / 10.0)
    if interference_mode == "full_buffer_neighbors":
        nb = np.asarray(rsrp_neighbors_dbm, dtype=float)
        denom_mw = denom_mw + np.sum(10.0 ** (nb / 10.0), axis=-1)
    elif interference_mode != "noise_only":
        raise ValueError(f"unknown interference mode: {interference_mode!r}")
    return 10.0 * np.log10(serving_mw / denom_mw)


def link_rate_bps(sinr_db_value, bandwidth_hz: float,
                  max_spectral_efficiency_bps_hz: float = 14.0):
    """Shannon-style achievable rate, capped at a maximum spectral efficiency."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    sinr_lin = 10.0 ** (np.asarray(sinr_db_value, dtype=float) / 10.0)
    se = np.minimum(np.log2(1.0 + sinr_lin), max_spectral_efficiency_bps_hz)
    out = bandwidth_hz * se
    return float(out) if np.isscalar(sinr_db_value) else out
