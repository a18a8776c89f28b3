# coding: utf-8

# # Random noise covariances
#
# Each realization draws per-sensor variances uniformly from [1, 30].
# A full sweep then runs against that profile, and the RMSE curves are
# averaged over realizations.

# In[1]:

from dataclasses import replace

import numpy as np

from nudoa import example2_config, random_q_experiment
from nudoa.array_model import wnpr

cfg = example2_config(k_trials=50, snr_db_list=[0, 10, 20])
cfg = replace(cfg, noise=replace(cfg.noise, realizations=4))
averaged, profiles = random_q_experiment(cfg)


# In[2]:

for i, p in enumerate(profiles):
    print(i, np.round(p.variances, 1), "WNPR", round(wnpr(p), 1))


# In[3]:

for r in averaged:
    spread = [rr.rmse_deg for rr in r.realizations]
    print(f"{r.snr_db:5g} dB  {str(r.method):9s}  mean RMSE {r.rmse_deg:8.4f}"
          f"   per-realization {np.round(spread, 3)}")
