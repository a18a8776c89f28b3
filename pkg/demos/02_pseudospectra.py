# coding: utf-8

# # One snapshot batch, three pseudospectra
#
# A single draw of 500 snapshots at 5 dB, noise profile
# `diag(1, 1, 1, 1, 1, 20, 30, 50)`. We look at the spectrum around the two
# sources for each method. The plot is ASCII so the script runs anywhere;
# swap in matplotlib if you have it.

# In[1]:

import numpy as np

from nudoa import ArrayGeometry, NoiseProfile, RngSeed, GridSpec, estimate_doa
from nudoa import generate_snapshots, sample_covariance
from nudoa.array_model import SourceSet, signal_power_for_snr

g = ArrayGeometry(8)
noise = NoiseProfile([1, 1, 1, 1, 1, 20, 30, 50])
src = SourceSet([-3.0, 6.0], signal_power_for_snr(5.0, noise))
X = generate_snapshots(g, src, noise, 500, RngSeed(3))
Rhat = sample_covariance(X)


# In[2]:

grid = GridSpec(-30, 30, 0.1)
spectra = {}
for mode in ("phase1", "phase2", "classical"):
    est, qcov = estimate_doa(Rhat, 2, g, grid, mode)
    spectra[mode] = est.spectrum
    print(f"{mode:9s} DOAs {np.round(est.doas_deg, 3)}  fallback={est.fallback}")
    if qcov is not None:
        print("          Q-hat", np.round(qcov.q_hat, 2))


# In[3]:

def ascii_plot(spec, width=60, rows=12):
    """Crude dB-scale plot, normalized to the spectrum's own peak."""
    db = 10 * np.log10(spec.values / spec.values.max())
    db = np.maximum(db, -30)
    cols = np.array_split(np.arange(db.size), width)
    col_db = np.array([db[c].max() for c in cols])
    lines = []
    for r in range(rows):
        level = -30 * r / (rows - 1)
        lines.append("".join("#" if v >= level else " " for v in col_db))
    return "\n".join(lines)

for mode, spec in spectra.items():
    print(f"\n{mode}  (-30 .. 30 deg, 0 .. -30 dB)")
    print(ascii_plot(spec))
