"""
One Monte-Carlo drop
====================

Place UEs, draw channels, schedule round robin and compare the schemes on the
same realization.
"""

# %%
import numpy as np

from indoor_mimo import ScenarioConfig, run_drop
from indoor_mimo.engine import drop_stream

config = ScenarioConfig.preset("intermediate")
seed = drop_stream(config.seed, 0)

# %%
for scheme in ("zf", "nemimo", "edazf"):
    recs = run_drop(config, scheme, seed)
    thr = np.array([r.throughput_mbps for r in recs])
    sinr = np.array([r.sinr_db for r in recs])
    print(f"{scheme:7s} median SINR {np.median(sinr):6.1f} dB  "
          f"mean rate {thr.mean():6.2f} Mbps  worst {thr.min():6.2f} Mbps")

# %% [markdown]
# Association and time fractions are shared by every scheme.

# %%
recs = run_drop(config, "zf", seed)
loads = np.bincount([r.assoc_bs for r in recs], minlength=config.n_bs)
print("UEs per BS     ", loads.tolist())
print("time fractions ", sorted({round(r.time_fraction, 3) for r in recs}))
