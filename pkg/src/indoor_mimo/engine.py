"""Monte-Carlo drops, campaign sweeps and the statistics reported on them."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import draw_channel_set, noise_power_dbm
from .link import DEFAULT_MCS, McsTable, dbm_to_w, link_powers, mcs_rate_mbps
from .precoding import SCHEMES, SingularChannelError, build_precoders
from .scenario import ScenarioConfig, Topology, build_topology, drop_ues, place_bs

log = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.01


class CampaignError(RuntimeError):
    pass


@dataclass(frozen=True)
class UeRecord:
    drop_id: int
    ue_id: int
    scheme: str
    sinr_db: float
    rate_mbps: float
    throughput_mbps: float
    time_fraction: float
    assoc_bs: int
    signal_w: float = 0.0
    intercell_w: float = 0.0
    n_nulls: int = 0


@dataclass
class SlotSamples:
    """One entry per (scheduled UE, slot) pair of a drop."""

    ue: np.ndarray
    slot: np.ndarray
    signal_w: np.ndarray
    intercell_w: np.ndarray


@dataclass
class DropResult:
    drop_id: int
    topology: Topology
    samples: dict[tuple[str, int], SlotSamples]
    failed: dict[tuple[str, int], str] = field(default_factory=dict)


def drop_stream(seed: int, drop_index: int, attempt: int = 0) -> np.random.SeedSequence:
    """Independent stream per drop; schemes share it so they see one channel."""
    return np.random.SeedSequence([int(seed), int(drop_index), int(attempt)])


def variants_for(config: ScenarioConfig, schemes: Sequence[str] = SCHEMES
                 ) -> list[tuple[str, int]]:
    out = []
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        if scheme == "edazf":
            out += [("edazf", n) for n in config.null_counts]
        else:
            out.append((scheme, 0))
    return out


def simulate_drop(config: ScenarioConfig, seed, variants: Iterable[tuple[str, int]],
                  drop_id: int = 0) -> DropResult:
    """Draw one drop and evaluate every (scheme, n_nulls) variant on it."""
    rng = np.random.default_rng(seed)
    bs_pos = place_bs(config)
    ue_pos = drop_ues(config, rng)
    channels = draw_channel_set(config, bs_pos, ue_pos, rng)
    topo = build_topology(config, ue_pos, config.p_bs_dbm + channels.slow_gain_db)
    p_bs_w = float(dbm_to_w(config.p_bs_dbm))

    result = DropResult(drop_id, topo, {})
    for scheme, n_nulls in variants:
        parts = []
        try:
            for s, groups in enumerate(topo.slots):
                pre = build_precoders(scheme, channels, groups, p_bs_w, n_nulls)
                ues, _, sig, inter = link_powers(channels, pre)
                parts.append((ues, np.full(ues.size, s), sig, inter))
        except SingularChannelError as e:
            result.failed[(scheme, n_nulls)] = f"drop {drop_id}: {e}"
            continue
        result.samples[(scheme, n_nulls)] = SlotSamples(
            *(np.concatenate(col) for col in zip(*parts)))
    return result


def _campaign_drop(args) -> DropResult:
    config, variants, drop_index = args
    first = simulate_drop(config, drop_stream(config.seed, drop_index),
                          variants, drop_index)
    if first.failed:
        # a measure-zero event; redraw once before counting it
        retry = simulate_drop(config, drop_stream(config.seed, drop_index, 1),
                              list(first.failed), drop_index)
        for key in list(first.failed):
            if key in retry.samples:
                first.samples[key] = retry.samples[key]
                del first.failed[key]
            else:
                first.failed[key] = retry.failed[key]
    return first


def per_ue(samples: SlotSamples, time_fraction: np.ndarray, outdoor_w: float,
           noise_w: float, mcs: McsTable = DEFAULT_MCS):
    """Reduce slot samples to per-UE SINR (dB-averaged), rate and throughput.

    Also returns the per-slot rates.
    """
    n_ue = time_fraction.size
    sinr_slot = samples.signal_w / (samples.intercell_w + outdoor_w + noise_w)
    with np.errstate(divide="ignore"):
        sinr_slot_db = 10.0 * np.log10(sinr_slot)
    rate_slot = mcs_rate_mbps(sinr_slot_db, mcs)
    count = np.bincount(samples.ue, minlength=n_ue)
    if np.any(count == 0):
        raise CampaignError("a deployed UE was never scheduled")
    sinr_db = np.bincount(samples.ue, sinr_slot_db, n_ue) / count
    rate = np.bincount(samples.ue, rate_slot, n_ue) / count
    return sinr_db, rate, rate * time_fraction, rate_slot


def drop_records(result: DropResult, scheme: str, n_nulls: int,
                 outdoor_w: float, noise_w: float,
                 mcs: McsTable = DEFAULT_MCS) -> list[UeRecord]:
    samples = result.samples[(scheme, n_nulls)]
    topo = result.topology
    sinr_db, rate, thr, _ = per_ue(samples, topo.time_fraction, outdoor_w,
                                   noise_w, mcs)
    count = np.bincount(samples.ue, minlength=topo.assoc.size)
    sig = np.bincount(samples.ue, samples.signal_w, topo.assoc.size) / count
    inter = np.bincount(samples.ue, samples.intercell_w, topo.assoc.size) / count
    return [UeRecord(result.drop_id, u, scheme, float(sinr_db[u]),
                     float(rate[u]), float(thr[u]),
                     float(topo.time_fraction[u]), int(topo.assoc[u]),
                     float(sig[u]), float(inter[u]), n_nulls)
            for u in range(topo.assoc.size)]


def noise_w_of(config: ScenarioConfig) -> float:
    return float(dbm_to_w(noise_power_dbm(config.bandwidth_hz,
                                          config.noise_figure_db,
                                          config.noise_psd_dbm_hz)))


def run_drop(config: ScenarioConfig, scheme: str, drop_seed,
             n_nulls: int | None = None, i_outdoor_dbm: float | None = None,
             mcs: McsTable = DEFAULT_MCS) -> list[UeRecord]:
    """Records of every deployed UE for one scheme on one drop.

    Defaults to the configured null count and first interference level.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    n = (config.n_nulls if n_nulls is None else n_nulls) if scheme == "edazf" else 0
    i_dbm = config.outdoor_interference_dbm[0] if i_outdoor_dbm is None \
        else i_outdoor_dbm
    result = simulate_drop(config, drop_seed, [(scheme, n)])
    if result.failed:
        raise SingularChannelError(result.failed[(scheme, n)])
    return drop_records(result, scheme, n, float(dbm_to_w(i_dbm)),
                        noise_w_of(config), mcs)


def empirical_cdf(samples) -> np.ndarray:
    """Rows ``(value, (i + 1) / n)`` over the sorted samples."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    return np.column_stack([x, np.arange(1, x.size + 1) / x.size])


def percentile(samples, p: float) -> float:
    """Lower empirical quantile: sorted value at index ``ceil(p n / 100) - 1``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("percentile of an empty sample")
    if not 0 < p < 100:
        raise ValueError("p must lie in (0, 100)")
    return float(x[max(math.ceil(p * x.size / 100.0) - 1, 0)])


@dataclass(frozen=True)
class CellKey:
    scenario: str
    scheme: str
    i_outdoor_dbm: float
    n_nulls: int


@dataclass
class Cell:
    """Samples and statistics of one sweep cell.

    ``throughput_mbps`` and ``sinr_db`` hold one value per UE and drop,
    ``slot_rate_mbps`` one value per scheduled slot.
    """

    key: CellKey
    sinr_db: np.ndarray
    throughput_mbps: np.ndarray
    slot_rate_mbps: np.ndarray
    n_drops: int
    n_failed: int = 0

    @property
    def mean_mbps(self) -> float:
        return float(np.mean(self.throughput_mbps))

    @property
    def p5_mbps(self) -> float:
        return percentile(self.throughput_mbps, 5)

    @property
    def aborted(self) -> bool:
        return self.n_failed > MAX_FAILURE_RATE * self.n_drops


@dataclass
class CampaignSummary:
    cells: dict[CellKey, Cell]
    configs: list[ScenarioConfig]
    mcs: McsTable = DEFAULT_MCS

    def cell(self, scenario: str, scheme: str, i_outdoor_dbm: float = float("-inf"),
             n_nulls: int | None = None) -> Cell:
        if n_nulls is None:
            n_nulls = next(c.n_nulls for c in self.configs
                           if c.density == scenario) if scheme == "edazf" else 0
        return self.cells[CellKey(scenario, scheme, float(i_outdoor_dbm), n_nulls)]

    @property
    def ok(self) -> bool:
        return not any(c.aborted for c in self.cells.values())

    @property
    def interference_levels(self) -> list[float]:
        return sorted({k.i_outdoor_dbm for k in self.cells})

    @property
    def null_levels(self) -> list[int]:
        return sorted({k.n_nulls for k in self.cells if k.scheme == "edazf"})


def _check_cell(cell: Cell) -> None:
    if cell.aborted:
        log.error("aborting %s: %d of %d drops failed", cell.key,
                  cell.n_failed, cell.n_drops)
    elif cell.throughput_mbps.size and cell.p5_mbps > cell.mean_mbps:
        warnings.warn(f"{cell.key}: 5%-worst rate exceeds the mean",
                      RuntimeWarning)


def _collect(config: ScenarioConfig, variants, results: Iterable[DropResult],
             mcs: McsTable) -> dict[CellKey, Cell]:
    noise_w = noise_w_of(config)
    levels = config.outdoor_interference_dbm
    acc: dict[CellKey, list] = {}
    n_failed: dict[CellKey, int] = {}
    for res in results:
        for scheme, n in variants:
            for i_dbm in levels:
                key = CellKey(config.density, scheme, float(i_dbm), n)
                bucket = acc.setdefault(key, [[], [], []])
                if (scheme, n) in res.failed:
                    n_failed[key] = n_failed.get(key, 0) + 1
                    log.warning(res.failed[(scheme, n)])
                    continue
                sinr_db, _, thr, rate_slot = per_ue(
                    res.samples[(scheme, n)], res.topology.time_fraction,
                    float(dbm_to_w(i_dbm)), noise_w, mcs)
                bucket[0].append(sinr_db)
                bucket[1].append(thr)
                bucket[2].append(rate_slot)
    cells = {}
    for key, (s, t, r) in acc.items():
        cell = Cell(key, np.concatenate(s) if s else np.zeros(0),
                    np.concatenate(t) if t else np.zeros(0),
                    np.concatenate(r) if r else np.zeros(0),
                    config.n_drops, n_failed.get(key, 0))
        _check_cell(cell)
        cells[key] = cell
    return cells


def run_campaign(configs: ScenarioConfig | Sequence[ScenarioConfig],
                 schemes: Sequence[str] = SCHEMES, mcs: McsTable = DEFAULT_MCS,
                 workers: int = 1) -> CampaignSummary:
    """Run every drop of every scenario and reduce to sweep cells.

    Cells span scenario x scheme x outdoor interference x null count (EDA-ZF
    only). Drop ``d`` of a scenario uses the stream ``drop_stream(seed, d)``
    regardless of ``workers``, and reduction follows drop order, so results
    do not depend on the degree of parallelism.
    """
    if isinstance(configs, ScenarioConfig):
        configs = [configs]
    cells: dict[CellKey, Cell] = {}
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for config in configs:
            if config.seed < 0:
                raise ValueError("seed must be non-negative")
            variants = variants_for(config, schemes)
            tasks = [(config, variants, d) for d in range(config.n_drops)]
            results = (pool.map(_campaign_drop, tasks,
                                chunksize=max(1, len(tasks) // (4 * workers)))
                       if pool else map(_campaign_drop, tasks))
            cells.update(_collect(config, variants, results, mcs))
    finally:
        if pool:
            pool.shutdown()
    return CampaignSummary(cells, list(configs), mcs)
