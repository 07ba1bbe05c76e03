"""
Link budget of a ceiling deployment
===================================

Path loss, line-of-sight odds and the element pattern combine into the slow
received power a UE sees from each BS.
"""

# %%
import numpy as np

from indoor_mimo import (ScenarioConfig, element_gain_db, los_probability,
                         noise_power_dbm, path_loss_db)
from indoor_mimo.channel import edge_rss_dbm

# %% [markdown]
# Line of sight is certain up to 18 m and decays towards one half beyond.

# %%
for d in (5.0, 18.0, 27.0, 37.0, 60.0):
    print(f"d = {d:5.1f} m  P(LoS) = {los_probability(d):.3f}  "
          f"PL LoS {path_loss_db(d, True):6.2f} dB  "
          f"NLoS {path_loss_db(d, False):6.2f} dB")

# %% [markdown]
# Downward-facing elements lose gain quickly off boresight.

# %%
theta = np.array([0, 30, 60, 90, 120, 150, 180])
print(dict(zip(theta.tolist(), np.round(element_gain_db(theta), 2).tolist())))

# %% [markdown]
# The weakest floor-edge point of the sparse layout stays close to the noise
# floor, with no shadowing and every link NLoS.

# %%
sparse = ScenarioConfig.preset("sparse")
rss = edge_rss_dbm(sparse, is_los=False)
print(f"min edge RSS   {rss.min():7.2f} dBm")
print(f"best server    {rss.max(axis=1).min():7.2f} dBm")
print(f"noise floor    {noise_power_dbm(sparse.bandwidth_hz, sparse.noise_figure_db):7.2f} dBm")
