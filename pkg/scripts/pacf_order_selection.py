# Choosing the autoregressive lag from the partial autocorrelation of b.
#
#   python3 scripts/pacf_order_selection.py [scale]
import sys

import numpy as np

from l96varx import pacf, preset, simulate_full

scale = int(sys.argv[1]) if len(sys.argv) > 1 else 20

for regime in ("unimodal", "trimodal"):
    cfg = preset(regime).scaled(scale)
    series = simulate_full(cfg, seed=1)
    # pooled over gridpoints: the PACF of each column, averaged
    values = np.mean([pacf(series.B[:, k], 40) for k in range(cfg.K)], axis=0)
    band = 2 / np.sqrt(series.N)
    print(f"\n{regime}: PACF of b, lags 1..40 (band +-{band:.4f})")
    for lag in range(1, 41):
        bar = "#" * int(round(abs(values[lag - 1]) * 40))
        print(f"  {lag:3d} {values[lag - 1]:7.3f} {bar}")
    # beyond the first two lags the PACF oscillates in lobes; their peaks
    # mark the candidate lag orders
    mag = np.abs(values)
    peaks = [lag for lag in range(4, 40) if mag[lag - 1] > max(mag[lag - 2], mag[lag], band)]
    print("lobe peaks outside the band at lags", peaks)
