"""
A small campaign
================

Means and 5%-worst rates across deployments, outdoor interference levels and
null counts. The CLI runs the same campaign at full size and writes the
result tables (``indoor-mimo --out-dir results``).
"""

# %%
import os

from indoor_mimo import run_campaign
from indoor_mimo.scenario import scenario_configs

n_drops = int(os.environ.get("NOTEBOOK_DROPS", 20))
configs = scenario_configs(n_drops=n_drops, nulls_sweep=(0,),
                           outdoor_interference_dbm=(float("-inf"), -80.0, -60.0))
summary = run_campaign(configs)

# %%
print(f"{'scenario':13s}{'scheme':8s}{'I dBm':>7s}{'mean':>8s}{'p5':>8s}")
for d in ("sparse", "intermediate", "dense"):
    for scheme in ("zf", "nemimo", "edazf"):
        for level in summary.interference_levels:
            c = summary.cell(d, scheme, level)
            print(f"{d:13s}{scheme:8s}{level:7.0f}{c.mean_mbps:8.2f}{c.p5_mbps:8.2f}")

# %% [markdown]
# Null sweep in the sparse deployment: the 5%-worst rate climbs once the
# other cell's scheduled UEs are all nulled.

# %%
sweep = run_campaign(configs[0].with_(nulls_sweep=tuple(range(0, 17, 4)),
                                      outdoor_interference_dbm=(float("-inf"),)),
                     schemes=("edazf",))
for n in sweep.null_levels:
    c = sweep.cell("sparse", "edazf", n_nulls=n)
    print(f"{n:2d} nulls  mean {c.mean_mbps:6.2f}  p5 {c.p5_mbps:6.2f} Mbps")
