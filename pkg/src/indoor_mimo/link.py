"""Per-UE downlink SINR, MCS link adaptation and time-shared throughput."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelSet
from .precoding import PrecoderSet

NETWORK = -1
MAX_RATE_MBPS = 86.3


def dbm_to_w(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def w_to_dbm(w):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(w, dtype=float)) + 30.0


@dataclass(frozen=True)
class SinrRecord:
    ue_id: int
    bs_id: int  # NETWORK for NeMIMO
    signal_w: float
    intercell_w: float
    outdoor_w: float
    noise_w: float

    @property
    def sinr_linear(self) -> float:
        return self.signal_w / (self.intercell_w + self.outdoor_w + self.noise_w)

    @property
    def sinr_db(self) -> float:
        return float(10.0 * np.log10(self.sinr_linear))


# 4-bit CQI ladder with 256-QAM (QPSK 78/1024 up to 256-QAM 948/1024).
# Thresholds approximate 10% BLER on AWGN.
_CQI_EFFICIENCY = (0.1523, 0.3770, 0.8770, 1.4766, 1.9141, 2.4063, 2.7305,
                   3.3223, 3.9023, 4.5234, 5.1152, 5.5547, 6.2266, 6.9141,
                   7.4063)
_CQI_THRESHOLD_DB = (-6.7, -2.3, 2.4, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7,
                     21.0, 22.7, 24.9, 27.1, 28.8)


@dataclass(frozen=True)
class McsTable:
    """Step mapping from SINR to rate.

    Rates are the spectral efficiencies scaled so that the top entry gives
    ``cap_mbps``.
    """

    thresholds_db: tuple[float, ...] = _CQI_THRESHOLD_DB
    efficiency: tuple[float, ...] = _CQI_EFFICIENCY
    cap_mbps: float = MAX_RATE_MBPS

    def __post_init__(self):
        th = np.asarray(self.thresholds_db, dtype=float)
        eff = np.asarray(self.efficiency, dtype=float)
        if th.ndim != 1 or th.size == 0 or th.shape != eff.shape:
            raise ValueError("thresholds and efficiencies must be equal-length, "
                             "non-empty sequences")
        if np.any(np.diff(th) <= 0) or np.any(np.diff(eff) <= 0):
            raise ValueError("MCS thresholds and efficiencies must be "
                             "strictly increasing")
        if eff[0] <= 0 or self.cap_mbps <= 0:
            raise ValueError("efficiencies and cap must be positive")
        object.__setattr__(self, "thresholds_db", tuple(map(float, th)))
        object.__setattr__(self, "efficiency", tuple(map(float, eff)))

    @property
    def rate_scale(self) -> float:
        """Mbps per bit/s/Hz."""
        return self.cap_mbps / self.efficiency[-1]

    @property
    def rates_mbps(self) -> np.ndarray:
        return np.asarray(self.efficiency) * self.rate_scale

    @classmethod
    def from_csv(cls, path, cap_mbps: float = MAX_RATE_MBPS) -> "McsTable":
        """Read ``min_sinr_db,spectral_efficiency`` rows (header required)."""
        with open(Path(path), newline="") as f:
            rows = list(csv.DictReader(f))
        if not rows:
            raise ValueError(f"{path}: empty MCS table")
        try:
            th = [float(r["min_sinr_db"]) for r in rows]
            eff = [float(r["spectral_efficiency"]) for r in rows]
        except KeyError as e:
            raise ValueError(f"{path}: missing column {e}") from None
        return cls(tuple(th), tuple(eff), cap_mbps)


DEFAULT_MCS = McsTable()


def mcs_rate_mbps(sinr_db, table: McsTable = DEFAULT_MCS):
    """Rate of the highest entry whose threshold is at or below ``sinr_db``.

    Zero below the lowest threshold.
    """
    x = np.asarray(sinr_db, dtype=float)
    idx = np.searchsorted(np.asarray(table.thresholds_db), x, side="right") - 1
    rates = np.concatenate([[0.0], table.rates_mbps])
    out = rates[idx + 1]
    return out if out.ndim else float(out)


def ue_throughput_mbps(rate_mbps, time_fraction):
    f = np.asarray(time_fraction, dtype=float)
    if np.any(f <= 0) or np.any(f > 1):
        raise ValueError("time fraction must lie in (0, 1]")
    out = np.asarray(rate_mbps, dtype=float) * f
    return out if out.ndim else float(out)


def link_powers(channels: ChannelSet, precoders: PrecoderSet):
    """Received useful and inter-cell power of every UE the precoders serve.

    Returns ``(ues, bs, signal_w, intercell_w)``; ``bs`` is ``NETWORK`` for
    NeMIMO, whose inter-cell term is zero.
    """
    if precoders.scheme == "nemimo":
        ues = precoders.ues[0]
        w = precoders.w[0]
        if ues.size == 0:
            z = np.zeros(0)
            return ues, ues.copy(), z, z.copy()
        # h_i^H w_i for every served UE i
        g = np.einsum("nk,nk->k", channels.stacked(ues).conj(), w)
        return (ues, np.full(ues.size, NETWORK), np.abs(g) ** 2,
                np.zeros(ues.size))

    groups = precoders.ues
    ues = np.concatenate(groups).astype(int)
    bs = np.concatenate([np.full(g.size, b) for b, g in enumerate(groups)])
    signal = np.zeros(ues.size)
    received = np.zeros((ues.size, len(groups)))
    offset = 0
    for b, (g, w) in enumerate(zip(groups, precoders.w)):
        if g.size == 0:
            continue
        # rows: every scheduled UE, cols: streams of BS b
        gain = np.abs(channels.h[ues, b, :].conj() @ w) ** 2
        received[:, b] = gain.sum(axis=1)
        own = np.arange(offset, offset + g.size)
        signal[own] = gain[own, np.arange(g.size)]
        offset += g.size
    received[np.arange(ues.size), bs] = 0.0
    return ues, bs, signal, received.sum(axis=1)


def sinr(ue: int, channels: ChannelSet, precoders: PrecoderSet,
         i_outdoor_w: float, noise_w: float) -> SinrRecord:
    """SINR record of one UE served by ``precoders``."""
    ues, bs, sig, inter = link_powers(channels, precoders)
    hit = np.flatnonzero(ues == ue)
    if hit.size == 0:
        raise ValueError(f"UE {ue} is not scheduled in this slot")
    k = hit[0]
    return SinrRecord(int(ue), int(bs[k]), float(sig[k]), float(inter[k]),
                      float(i_outdoor_w), float(noise_w))
