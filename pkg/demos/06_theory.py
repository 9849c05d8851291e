"""
Why power-balanced NOMA needs something other than SIC
======================================================

The NOMA rate gain over OMA for two equal-power users shrinks as SNR grows,
so the gain is largest exactly where SIC, which must decode one user while
the other is noise, is weakest.
"""
import numpy as np

from ncma.analysis import rate_gain, sic_sinr

for snr_db in (0.0, 5.0, 8.5, 15.0, 25.0, 40.0):
    p = 10 ** (snr_db / 10)
    print(f"P = {snr_db:4.1f} dB   rate gain {rate_gain(p):.3f}   "
          f"SIC first-user SINR {10 * np.log10(sic_sinr(p, 1.0)):+.2f} dB")
