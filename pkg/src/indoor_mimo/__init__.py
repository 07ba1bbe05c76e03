"""Monte-Carlo simulator for indoor multi-cell MIMO downlink.

Compares per-cell zero forcing, network MIMO and eigen-direction-aware
zero forcing over sparse, intermediate and dense ceiling deployments.
"""

from .channel import (ChannelSet, LinkState, draw_channel, draw_channel_set,
                      element_gain_db, los_probability, noise_power_dbm,
                      path_loss_db, slow_rss_dbm, steering_vector)
from .engine import (CampaignSummary, Cell, CellKey, UeRecord, empirical_cdf,
                     percentile, run_campaign, run_drop, simulate_drop)
from .link import (DEFAULT_MCS, McsTable, SinrRecord, mcs_rate_mbps, sinr,
                   ue_throughput_mbps)
from .precoding import (SCHEMES, InterferenceSubspace, PrecoderSet,
                        SingularChannelError, build_precoders, eda_zf_precoder,
                        interference_subspace, nemimo_precoder, zf_precoder)
from .scenario import (DENSITIES, ConfigError, ScenarioConfig, Topology,
                       associate, drop_ues, place_bs, schedule_round_robin)

__version__ = "0.1.0"
