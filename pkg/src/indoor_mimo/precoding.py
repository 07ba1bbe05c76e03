"""ZF, network-MIMO and eigen-direction-aware ZF precoders.

All precoders are the right pseudo-inverse ``H (H^H H)^{-1}`` of some channel
matrix with its columns rescaled. Column scaling is shared by the three
schemes: every UE gets the same transmit power, and a common factor sets
the most loaded BS antenna block to exactly ``p_bs``. For a single block
this is the usual ``p_bs / N_U`` per column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SCHEMES = ("zf", "nemimo", "edazf")


class SingularChannelError(np.linalg.LinAlgError):
    """Channel matrix without full column rank."""

    def __init__(self, message: str, bs: int | None = None):
        if bs is not None:
            message = f"BS {bs}: {message}"
        super().__init__(message)
        self.bs = bs


@dataclass
class InterferenceSubspace:
    directions: np.ndarray
    singular_values: np.ndarray
    n_nulls: int


@dataclass
class PrecoderSet:
    """Precoders of one slot.

    ``ues[k]`` are the UEs served by ``w[k]``. For ZF and EDA-ZF there is one
    entry per BS; NeMIMO has a single network-wide matrix.
    """

    scheme: str
    ues: list[np.ndarray]
    w: list[np.ndarray]
    n_nulls: int = 0


def _pinv_h(h: np.ndarray, bs: int | None = None) -> np.ndarray:
    """``H (H^H H)^{-1}`` through the SVD of ``H``."""
    n_rows, n_cols = h.shape
    if n_cols > n_rows:
        raise SingularChannelError(
            f"{n_cols} columns exceed {n_rows} antennas", bs)
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    if n_cols and (s[-1] <= max(n_rows, n_cols) * np.finfo(float).eps * s[0]
                   or s[0] == 0.0):
        raise SingularChannelError(
            f"channel matrix is rank deficient (condition "
            f"{s[0] / s[-1] if s[-1] else np.inf:.3g})", bs)
    return (u / s) @ vh


def _equal_power(w0: np.ndarray, p_bs: float, n_ant: int) -> np.ndarray:
    w = w0 / np.linalg.norm(w0, axis=0)
    block_power = (np.abs(w) ** 2).reshape(-1, n_ant, w.shape[1]).sum(axis=(1, 2))
    return w * np.sqrt(p_bs / block_power.max())


def zf_precoder(h_b: np.ndarray, p_bs: float, bs: int | None = None
                ) -> np.ndarray:
    """Per-cell zero forcing with ``p_bs / N_U,b`` on every column."""
    h_b = np.asarray(h_b, dtype=complex)
    return _equal_power(_pinv_h(h_b, bs), p_bs, h_b.shape[0])


def nemimo_precoder(h_bar: np.ndarray, p_bs: float, n_ant: int, n_bs: int
                    ) -> np.ndarray:
    """Joint zero forcing over all BSs under a per-BS power constraint.

    Columns carry equal power; the BS block with the largest load transmits
    exactly ``p_bs`` and every other block transmits less.
    """
    h_bar = np.asarray(h_bar, dtype=complex)
    if h_bar.shape[0] != n_ant * n_bs:
        raise ValueError(f"stacked channel has {h_bar.shape[0]} rows, "
                         f"expected {n_bs} x {n_ant}")
    return _equal_power(_pinv_h(h_bar), p_bs, n_ant)


def interference_subspace(sigma_b: np.ndarray, n_nulls: int
                          ) -> InterferenceSubspace:
    """Leading ``n_nulls`` left singular vectors of the other-cell channels.

    ``sigma_b`` is ``n_ant x (N_U - N_U,b)``. Beyond its rank the remaining
    left singular vectors fill in; with no other-cell UEs at all the
    canonical basis does.
    """
    sigma_b = np.asarray(sigma_b, dtype=complex)
    if sigma_b.ndim != 2:
        raise ValueError("sigma_b must be a 2-D matrix")
    n_ant = sigma_b.shape[0]
    if not 0 <= n_nulls <= n_ant:
        raise ValueError(f"n_nulls={n_nulls} outside [0, {n_ant}]")
    if sigma_b.shape[1] == 0:
        u = np.eye(n_ant, dtype=complex)
        s = np.zeros(0)
    else:
        u, s, _ = np.linalg.svd(sigma_b, full_matrices=True)
    return InterferenceSubspace(directions=u[:, :n_nulls], singular_values=s,
                                n_nulls=n_nulls)


def eda_zf_precoder(h_b: np.ndarray, subspace: InterferenceSubspace,
                    p_bs: float, bs: int | None = None) -> np.ndarray:
    """Zero forcing toward the own UEs and the nulled eigen-directions.

    Only the first ``N_U,b`` columns of the augmented pseudo-inverse are kept.
    """
    h_b = np.asarray(h_b, dtype=complex)
    n_ub = h_b.shape[1]
    h_aug = h_b if subspace.n_nulls == 0 else np.hstack(
        [h_b, subspace.directions])
    w0 = _pinv_h(h_aug, bs)[:, :n_ub]
    return _equal_power(w0, p_bs, h_b.shape[0])


def build_precoders(scheme: str, channels, groups: Sequence[np.ndarray],
                    p_bs_w: float, n_nulls: int = 0) -> PrecoderSet:
    """Precoders for one slot; ``groups[b]`` are the UEs scheduled by BS ``b``."""
    n_ant = channels.n_ant
    groups = [np.asarray(g, dtype=int) for g in groups]
    if scheme == "nemimo":
        ues = np.concatenate(groups) if groups else np.zeros(0, dtype=int)
        w = nemimo_precoder(channels.stacked(ues), p_bs_w, n_ant,
                            channels.n_bs) if ues.size else np.zeros(
                                (n_ant * channels.n_bs, 0), dtype=complex)
        return PrecoderSet(scheme, [ues], [w])
    if scheme not in ("zf", "edazf"):
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    all_ues = np.concatenate(groups)
    ws = []
    for b, ues in enumerate(groups):
        if ues.size == 0:
            ws.append(np.zeros((n_ant, 0), dtype=complex))
            continue
        h_b = channels.at_bs(b, ues)
        if scheme == "zf":
            ws.append(zf_precoder(h_b, p_bs_w, bs=b))
            continue
        if n_nulls == 0:
            sub = InterferenceSubspace(np.zeros((n_ant, 0), dtype=complex),
                                       np.zeros(0), 0)
        else:
            others = all_ues[~np.isin(all_ues, ues)]
            sub = interference_subspace(channels.at_bs(b, others), n_nulls)
        ws.append(eda_zf_precoder(h_b, sub, p_bs_w, bs=b))
    return PrecoderSet(scheme, groups, ws,
                       n_nulls=n_nulls if scheme == "edazf" else 0)
