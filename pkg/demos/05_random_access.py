"""
Random access with Zadoff-Chu preambles and SNR grouping
========================================================

Users pick one of twelve cyclic shifts of a length-257 root sequence. The
base station correlates the superposition against the root and finds one
peak per used shift; users that picked the same shift collide and retry.
Admitted users are then grouped by measured SNR.
"""
import numpy as np

from ncma.rag import (circular_correlation, detect_preambles, expected_rounds, admission_rounds,
                      group_users, run_rag, zc_generate, zc_root)

rng = np.random.default_rng(5)

# Ten users, three shifts used twice
shifts = [0, 20, 60, 100, 100, 140, 140, 200, 200, 220]
y = sum(np.exp(2j * np.pi * rng.random()) * zc_generate(1, 257, s, 20).samples for s in shifts)
y = y + 0.1 * (rng.standard_normal(257) + 1j * rng.standard_normal(257))
energy = np.abs(circular_correlation(y, zc_root(1, 257))) ** 2
print("strongest lags:", sorted(np.argsort(energy)[-7:].tolist()))
print("detected shifts:", sorted(detect_preambles(y)))

# Rounds needed until everyone is admitted
print("\nusers  simulated  analytic")
for k in (2, 4, 6, 8, 10):
    print(f"{k:>5} {admission_rounds(k, 12, 20_000, rng).mean():>10.3f} {expected_rounds(k):>9.3f}")

# Grouping policies
users = [("s1", 24.0), ("w1", 7.5), ("w2", 8.5), ("w3", 6.0)]
print("\nstrong-weak pairs first:", group_users(users).describe())
print("weak users first:       ", group_users(users, weak_first=True).describe())

res = run_rag([(f"u{i}", float(s)) for i, s in enumerate(rng.uniform(5, 25, 8))], rng)
print(f"\nsignal-level run: {res.rounds} rounds, plan {res.plan.describe()}")
