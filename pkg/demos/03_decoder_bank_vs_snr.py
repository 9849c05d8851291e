"""
Which equations survive as user C gets stronger
===============================================

Two BPSK users at 8 dB and one symbol-splitting QPSK user whose SNR varies.
For each SNR we count how often each of the eleven scheduled decoders
passes its CRC, and how many native stream packets PHY bridging yields.
"""
import numpy as np

from ncma.bridge import phy_bridge
from ncma.channel import draw_channel, transmit_slot
from ncma.detect import run_decoder_bank_batch
from ncma.profiles import encode_slot, get_profile

rng = np.random.default_rng(3)
profile = get_profile("sr-ncma")
labels = [lab for dec in profile.decoders for lab in dec.labels]
names = [lab.describe(profile.streams) for lab in labels]
n_slots = 300

print(f"{'C snr':>6} " + " ".join(f"{n:>9}" for n in names) + "  natives/slot")
for snr_c in (8.0, 11.0, 14.0, 20.0):
    obs = []
    for slot in range(n_slots):
        packets = {s: rng.integers(0, 2, 64, dtype=np.uint8) for s in profile.streams}
        ch = draw_channel([("A", 8.0), ("B", 8.0), ("C", snr_c)], rng)
        obs.append(transmit_slot(encode_slot(profile, packets), ch, rng, slot=slot))
    decoded = run_decoder_bank_batch(obs, profile)
    rate = {lab: np.mean([any(e.label == lab for e in eqs) for eqs in decoded]) for lab in labels}
    natives = np.mean([len(phy_bridge(eqs, 4)[0]) if eqs else 0 for eqs in decoded])
    print(f"{snr_c:>6.1f} " + " ".join(f"{rate[lab]:>9.2f}" for lab in labels) + f"  {natives:>12.2f}")
