"""Block-fading AWGN uplink into a two-antenna base station.

Gains are scaled so that ``E|h|^2 / sigma^2`` equals each user's target SNR,
with transmitted symbols normalized to unit average power. The receiver is
given the true gains.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .modem import SymbolBlock

FADING_MODELS = ("rayleigh", "phase", "unit")


@dataclass
class ChannelRealization:
    users: tuple[str, ...]
    snr_db: tuple[float, ...]
    gains: np.ndarray  # (users, antennas) or (users, antennas, samples)
    model: str = "rayleigh"

    @property
    def n_antennas(self) -> int:
        return self.gains.shape[1]


@dataclass
class SlotObservation:
    y: np.ndarray  # (antennas, samples)
    gains: np.ndarray
    sigma2: float
    users: tuple[str, ...]
    realization: ChannelRealization | None = field(default=None, repr=False)
    slot: int = 0

    @property
    def n_samples(self) -> int:
        return self.y.shape[-1]


def draw_channel(users: Sequence[tuple[str, float]], rng_seed=None, model: str = "rayleigh",
                 n_antennas: int = 2, sigma2: float = 1.0,
                 n_samples: int | None = None) -> ChannelRealization:
    """Draw one slot's gains for ``users`` given as (id, snr_dB) pairs.

    ``model`` is "rayleigh" (CN(0,1) scaled), "phase" (unit magnitude,
    uniform phase) or "unit" (real, deterministic). Passing ``n_samples``
    draws i.i.d. per-sample gains instead of block-constant ones.
    """
    if not 1 <= len(users) <= 3:
        raise ValueError(f"expected 1-3 users, got {len(users)}")
    if model not in FADING_MODELS:
        raise ValueError(f"unknown fading model {model!r}; choose from {FADING_MODELS}")
    rng = np.random.default_rng(rng_seed)
    ids = tuple(u for u, _ in users)
    snr = tuple(float(s) for _, s in users)
    shape = (len(users), n_antennas) + (() if n_samples is None else (n_samples,))
    if model == "rayleigh":
        g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    elif model == "phase":
        g = np.exp(2j * np.pi * rng.random(shape))
    else:
        g = np.ones(shape, dtype=np.complex128)
    amp = np.sqrt(sigma2 * 10.0 ** (np.asarray(snr) / 10.0))
    g = g * amp.reshape((-1,) + (1,) * (len(shape) - 1))
    return ChannelRealization(ids, snr, g, model)


def transmit_slot(blocks: Mapping[str, SymbolBlock], realization: ChannelRealization,
                  rng_seed=None, sigma2: float = 1.0, slot: int = 0) -> SlotObservation:
    """Superimpose power-normalized blocks through ``realization`` and add noise."""
    lengths = {len(b) for b in blocks.values()}
    if len(lengths) != 1:
        raise ValueError(f"symbol blocks differ in length: {sorted(lengths)}")
    missing = set(blocks) - set(realization.users)
    if missing:
        raise ValueError(f"no channel drawn for users {sorted(missing)}")
    (k,) = lengths
    rng = np.random.default_rng(rng_seed)
    n_ant = realization.n_antennas
    y = np.zeros((n_ant, k), dtype=np.complex128)
    for idx, user in enumerate(realization.users):
        if user not in blocks:
            continue
        h = realization.gains[idx]
        h = h if h.ndim == 2 else h[:, None]
        y += h * blocks[user].normalized()[None, :]
    if sigma2 > 0:
        w = rng.standard_normal((n_ant, k)) + 1j * rng.standard_normal((n_ant, k))
        y += np.sqrt(sigma2 / 2.0) * w
    return SlotObservation(y, realization.gains, sigma2, realization.users, realization, slot)
