"""Deployment geometry, UE drops, RSS association and round-robin scheduling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np

DENSITIES = ("sparse", "intermediate", "dense")

# (n_bs, n_ant, p_bs_dbm, grid rows, grid cols)
_PRESETS = {
    "sparse": (2, 64, 24.0, 1, 2),
    "intermediate": (8, 16, 18.0, 2, 4),
    "dense": (32, 4, 12.0, 4, 8),
}

NO_INTERFERENCE = float("-inf")


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


def _as_tuple(value, cast):
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(cast(v) for v in value)
    return (cast(value),)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce a campaign.

    ``outdoor_interference_dbm`` and ``nulls_sweep`` may hold several values;
    the engine evaluates every combination. An interference level of
    ``-inf`` dBm means no outdoor interference.
    """

    density: str = "sparse"
    n_bs: int = 2
    n_ant: int = 64
    p_bs_dbm: float = 24.0
    max_sched_per_bs: int = 16
    n_ue: int = 80
    floor_w_m: float = 120.0
    floor_l_m: float = 50.0
    bs_height_m: float = 3.0
    ue_height_m: float = 1.5
    n_nulls: int = 16
    nulls_sweep: tuple[int, ...] = ()
    outdoor_interference_dbm: tuple[float, ...] = (NO_INTERFERENCE,)
    n_drops: int = 200
    seed: int = 0
    # sparse BS x-positions; None places them at the 1x2 cell centers
    sparse_bs_x_m: tuple[float, ...] | None = None
    # radio constants
    carrier_ghz: float = 4.0
    bandwidth_hz: float = 20e6
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    bs_elem_gain_dbi: float = 5.0
    bs_hpbw_deg: float = 90.0
    bs_max_atten_db: float = 25.0
    ue_gain_dbi: float = 0.0
    shadow_std_los_db: float = 3.0
    shadow_std_nlos_db: float = 4.0
    k_factor_mean_db: float = 7.0
    k_factor_std_db: float = 4.0

    def __post_init__(self):
        object.__setattr__(
            self, "outdoor_interference_dbm",
            _as_tuple(self.outdoor_interference_dbm, float))
        object.__setattr__(self, "nulls_sweep",
                           _as_tuple(self.nulls_sweep, int))
        if self.sparse_bs_x_m is not None:
            object.__setattr__(self, "sparse_bs_x_m",
                               _as_tuple(self.sparse_bs_x_m, float))
        self.validate()

    @classmethod
    def preset(cls, density: str, **overrides) -> "ScenarioConfig":
        """Canonical sparse / intermediate / dense deployment."""
        if density not in _PRESETS:
            raise ConfigError(f"unknown density {density!r}; "
                              f"expected one of {DENSITIES}")
        n_bs, n_ant, p_bs, _, _ = _PRESETS[density]
        base = dict(density=density, n_bs=n_bs, n_ant=n_ant, p_bs_dbm=p_bs,
                    max_sched_per_bs=n_ant // 4, n_nulls=n_ant // 4)
        base.update(overrides)
        return cls(**base)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def validate(self) -> None:
        if self.density not in _PRESETS:
            raise ConfigError(f"unknown density {self.density!r}")
        rows, cols = _PRESETS[self.density][3:]
        if self.n_bs != rows * cols:
            raise ConfigError(f"{self.density} grid has {rows * cols} BSs, "
                              f"got n_bs={self.n_bs}")
        side = math.isqrt(self.n_ant)
        if self.n_ant < 1 or side * side != self.n_ant:
            raise ConfigError(f"n_ant={self.n_ant} is not a perfect square")
        if not 1 <= self.max_sched_per_bs <= self.n_ant:
            raise ConfigError("max_sched_per_bs must lie in [1, n_ant]")
        for n in (self.n_nulls, *self.nulls_sweep):
            if n < 0 or n + self.max_sched_per_bs > self.n_ant:
                raise ConfigError(
                    f"n_nulls={n} exceeds n_ant - max_sched_per_bs = "
                    f"{self.n_ant - self.max_sched_per_bs}")
        if self.n_ue < 1:
            raise ConfigError("n_ue must be positive")
        if self.n_drops < 1:
            raise ConfigError("n_drops must be at least 1")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be positive")
        if self.floor_w_m <= 0 or self.floor_l_m <= 0:
            raise ConfigError("floor dimensions must be positive")

    @property
    def null_counts(self) -> tuple[int, ...]:
        """EDA-ZF null counts to evaluate: the default first, then the sweep."""
        out = [self.n_nulls]
        out += [n for n in self.nulls_sweep if n not in out]
        return tuple(out)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class Topology:
    """Positions, association and the per-slot scheduled sets of one drop.

    ``slots[s][b]`` holds the UE indices BS ``b`` serves in slot ``s``.
    """

    bs_pos: np.ndarray
    ue_pos: np.ndarray
    assoc: np.ndarray
    slots: list[list[np.ndarray]]
    time_fraction: np.ndarray = field(repr=False)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    def scheduled(self, slot: int) -> np.ndarray:
        """All UEs scheduled network-wide in ``slot``, in BS order."""
        groups = self.slots[slot]
        if not groups:
            return np.zeros(0, dtype=int)
        return np.concatenate(groups).astype(int)


def place_bs(config: ScenarioConfig) -> np.ndarray:
    """BS positions at the centers of an equal rows x cols partition of the floor."""
    if config.density not in _PRESETS:
        raise ConfigError(f"unknown density {config.density!r}")
    rows, cols = _PRESETS[config.density][3:]
    dx = config.floor_w_m / cols
    dy = config.floor_l_m / rows
    xs = dx * (np.arange(cols) + 0.5)
    if config.density == "sparse" and config.sparse_bs_x_m is not None:
        xs = np.asarray(config.sparse_bs_x_m, dtype=float)
        if xs.shape != (cols,):
            raise ConfigError(f"sparse_bs_x_m needs {cols} values")
    ys = dy * (np.arange(rows) + 0.5)
    gx, gy = np.meshgrid(xs, ys)
    pos = np.column_stack([gx.ravel(), gy.ravel(),
                           np.full(rows * cols, config.bs_height_m)])
    return pos


def drop_ues(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """``n_ue`` i.i.d. uniform positions over the floor at UE height."""
    xy = rng.uniform(size=(config.n_ue, 2)) * [config.floor_w_m,
                                              config.floor_l_m]
    return np.column_stack([xy, np.full(config.n_ue, config.ue_height_m)])


def associate(rss_dbm: np.ndarray) -> np.ndarray:
    """Strongest-RSS BS per UE; ties go to the lowest BS index."""
    rss_dbm = np.asarray(rss_dbm, dtype=float)
    if not np.all(np.isfinite(rss_dbm)):
        raise ValueError("RSS matrix must be finite")
    return np.argmax(rss_dbm, axis=1)


def schedule_round_robin(assoc: np.ndarray, config: ScenarioConfig,
                         ) -> tuple[list[list[np.ndarray]], np.ndarray]:
    """Split each BS's UEs into balanced groups and cycle them on a shared clock.

    BS ``b`` with ``n_b`` UEs forms ``G_b = ceil(n_b / cap)`` contiguous groups
    whose sizes differ by at most one. All BSs run against a common counter of
    ``S = max_b G_b`` slots and serve group ``s mod G_b`` in slot ``s``.

    Returns ``(slots, time_fraction)`` where ``time_fraction[u]`` is the share
    of the ``S`` slots in which UE ``u`` is served.
    """
    assoc = np.asarray(assoc, dtype=int)
    cap = config.max_sched_per_bs
    groups: list[list[np.ndarray]] = []
    for b in range(config.n_bs):
        members = np.flatnonzero(assoc == b)
        n_groups = -(-members.size // cap)
        groups.append(np.array_split(members, n_groups) if n_groups else [])
    n_slots = max(1, max(len(g) for g in groups))
    slots = []
    counts = np.zeros(assoc.size, dtype=int)
    for s in range(n_slots):
        per_bs = []
        for g in groups:
            served = g[s % len(g)] if g else np.zeros(0, dtype=int)
            counts[served] += 1
            per_bs.append(served)
        slots.append(per_bs)
    return slots, counts / n_slots


def build_topology(config: ScenarioConfig, ue_pos: np.ndarray,
                   rss_dbm: np.ndarray) -> Topology:
    assoc = associate(rss_dbm)
    slots, frac = schedule_round_robin(assoc, config)
    return Topology(bs_pos=place_bs(config), ue_pos=ue_pos, assoc=assoc,
                    slots=slots, time_fraction=frac)


def scenario_configs(densities: Sequence[str] = DENSITIES, **overrides
                     ) -> list[ScenarioConfig]:
    return [ScenarioConfig.preset(d, **overrides) for d in densities]
