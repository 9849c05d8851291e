"""Closed-form NOMA/OMA rate gain, SIC effective SINR and normalized throughput."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .macode import MacCodeSpec


def rate_gain(p) -> np.ndarray | float:
    """Fractional rate gain of two-user NOMA over OMA at per-user power ``p``.

    eta = (log(1+2P) - log(1+P)) / log(1+P), noise normalized to 1.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any(~(p_arr > 0)):
        raise ValueError("power must be positive")
    eta = (np.log1p(2 * p_arr) - np.log1p(p_arr)) / np.log1p(p_arr)
    return float(eta) if eta.ndim == 0 else eta


def sic_sinr(p, sigma2) -> np.ndarray | float:
    """SINR of the first SIC user when one equal-power interferer is treated as noise."""
    p_arr = np.asarray(p, dtype=np.float64)
    s_arr = np.asarray(sigma2, dtype=np.float64)
    if np.any(~(p_arr > 0)) or np.any(~(s_arr > 0)):
        raise ValueError("power and noise variance must be positive")
    out = p_arr / (p_arr + s_arr)
    return float(out) if out.ndim == 0 else out


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0)


@dataclass
class ThroughputRecord:
    n_slots: int
    recovered: dict[str, int]
    packets_per_message: dict[str, int]
    per_user: dict[str, float] = field(init=False)

    def __post_init__(self):
        self.per_user = {u: self.packets_per_message[u] * n / self.n_slots
                         for u, n in self.recovered.items()}

    @property
    def system(self) -> float:
        return float(sum(self.per_user.values()))


def tally_throughput(recovered: Mapping[str, int], n_slots: int,
                     specs: Mapping[str, MacCodeSpec]) -> ThroughputRecord:
    """Th^s = L_s * N_s / N_slot in normalized BPSK packets per slot."""
    if n_slots <= 0:
        raise ValueError(f"n_slots must be positive, got {n_slots}")
    missing = set(recovered) - set(specs)
    if missing:
        raise KeyError(f"no MAC code spec for users {sorted(missing)}")
    counts = {u: int(recovered.get(u, 0)) for u in specs}
    return ThroughputRecord(n_slots, counts, {u: s.data_packets for u, s in specs.items()})


def theory_table(snr_db) -> list[tuple[float, float, float]]:
    """(SNR dB, rate gain, SIC SINR in dB) rows at unit noise."""
    rows = []
    for s in np.atleast_1d(snr_db):
        p = float(db_to_linear(s))
        rows.append((float(s), rate_gain(p), 10 * np.log10(sic_sinr(p, 1.0))))
    return rows
