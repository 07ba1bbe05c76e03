"""
Three precoders on one random channel
=====================================

Per-cell zero forcing, network MIMO and zero forcing with extra radiation
nulls towards the neighboring cells' dominant directions.
"""

# %%
import numpy as np

from indoor_mimo import (eda_zf_precoder, interference_subspace,
                         nemimo_precoder, zf_precoder)

rng = np.random.default_rng(0)


def cn(*shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


n_ant, n_users, p_bs = 16, 4, 0.063
own = cn(n_ant, n_users)        # UEs served by this BS
victims = cn(n_ant, 12)         # UEs of the other cells, seen from this BS

# %% [markdown]
# Zero forcing removes intra-cell crosstalk but leaks into other cells.

# %%
w_zf = zf_precoder(own, p_bs)
gains = np.abs(own.conj().T @ w_zf)
print("ZF crosstalk   ", (gains - np.diag(np.diag(gains))).max())
print("ZF leakage     ", np.sum(np.abs(victims.conj().T @ w_zf) ** 2))

# %% [markdown]
# Spending the remaining degrees of freedom on nulls cuts the leakage. The
# nulls point along the leading left singular vectors of the victims' channel.

# %%
for n_nulls in (0, 4, 8, 12):
    w = eda_zf_precoder(own, interference_subspace(victims, n_nulls), p_bs)
    print(f"{n_nulls:2d} nulls leakage {np.sum(np.abs(victims.conj().T @ w) ** 2):.3e}")

# %% [markdown]
# Network MIMO treats two BSs as one array. Each BS block stays within its
# own power budget and the binding block meets it exactly.

# %%
h_net = cn(2 * n_ant, 6)
w_net = nemimo_precoder(h_net, p_bs, n_ant, 2)
print("block powers   ", (np.abs(w_net) ** 2).reshape(2, n_ant, 6).sum(axis=(1, 2)))
