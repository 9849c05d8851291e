"""Rate-1/2, constraint-length-7 convolutional code ([133, 171] octal).

Encoding is zero-tail terminated so every packet decodes on its own. The
Viterbi decoder works on soft values (LLRs, positive means bit 0) and is
vectorized over a leading batch axis, which is how the decoder bank pushes
a whole slot's worth of equations through in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class ConvCodeSpec:
    generator_a: int = 0o133
    generator_b: int = 0o171
    constraint_length: int = 7
    llr_clip: float = 50.0

    @property
    def termination(self) -> int:
        """Number of zero flush bits appended by the encoder."""
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.termination

    def codeword_length(self, payload_length: int) -> int:
        return 2 * (payload_length + self.termination)

    def payload_length(self, codeword_length: int) -> int:
        n, rem = divmod(codeword_length, 2)
        n -= self.termination
        if rem or n < 1:
            raise ValueError(
                f"codeword length {codeword_length} is not 2*(payload+{self.termination})"
            )
        return n

    def taps(self) -> tuple[np.ndarray, np.ndarray]:
        """Generator taps, index 0 multiplying the newest input bit."""
        k = self.constraint_length
        shifts = np.arange(k - 1, -1, -1)
        return ((self.generator_a >> shifts) & 1).astype(np.uint8), (
            (self.generator_b >> shifts) & 1
        ).astype(np.uint8)


DEFAULT_CODE = ConvCodeSpec()


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x >>= 1
    return out


@lru_cache(maxsize=8)
def _trellis(spec: ConvCodeSpec):
    # State holds the last K-1 inputs, newest in the MSB. Entering state `ns`
    # from predecessor `(r & mask)` where r = (ns << 1) | dropped_bit.
    mask = spec.n_states - 1
    ns = np.arange(spec.n_states)
    reg = (ns[:, None] << 1) | np.array([0, 1])[None, :]
    prev = reg & mask
    out_a = _parity(reg & spec.generator_a)
    out_b = _parity(reg & spec.generator_b)
    # +1 for coded bit 0, -1 for coded bit 1, matching the LLR sign convention
    return prev, (1 - 2 * out_a).astype(np.float64), (1 - 2 * out_b).astype(np.float64)


def _shift_register_encode(u: np.ndarray, spec: ConvCodeSpec) -> np.ndarray:
    k = spec.constraint_length
    lead = np.zeros(u.shape[:-1] + (k - 1,), dtype=np.uint8)
    tail = np.zeros(u.shape[:-1] + (spec.termination,), dtype=np.uint8)
    padded = np.concatenate([lead, u, tail], axis=-1)
    # windows[..., t, :] = (u[t-6], ..., u[t]); taps are newest-first
    windows = np.lib.stride_tricks.sliding_window_view(padded, k, axis=-1)[..., ::-1]
    ta, tb = spec.taps()
    a = (windows.astype(np.int64) @ ta) & 1
    b = (windows.astype(np.int64) @ tb) & 1
    out = np.empty(u.shape[:-1] + (2 * a.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = a
    out[..., 1::2] = b
    return out


@lru_cache(maxsize=32)
def _generator_matrix(spec: ConvCodeSpec, n: int) -> np.ndarray:
    """Row i is the codeword of the unit payload e_i."""
    return _shift_register_encode(np.eye(n, dtype=np.uint8), spec).astype(np.float64)


def conv_encode(payload, spec: ConvCodeSpec = DEFAULT_CODE) -> np.ndarray:
    """Encode bits (last axis) into an interleaved a/b codeword of length 2*(n+6)."""
    u = np.asarray(payload, dtype=np.uint8)
    if u.shape[-1] == 0:
        raise ValueError("payload must be nonempty")
    # the code is linear, so the codeword is u G over GF(2)
    g = _generator_matrix(spec, u.shape[-1])
    return ((u @ g).astype(np.int64) & 1).astype(np.uint8)


def viterbi_decode(soft, spec: ConvCodeSpec = DEFAULT_CODE, payload_length: int | None = None,
                   clip: float | None = None) -> np.ndarray:
    """Maximum-likelihood payload for a terminated codeword.

    ``soft`` holds one LLR per coded bit (positive favours 0) on the last
    axis; any leading axes are decoded independently. LLRs are clipped to
    ``clip`` (default ``spec.llr_clip``) before metric accumulation. On a
    metric tie the survivor coming from the predecessor whose shifted-out
    bit is 0 is kept.
    """
    llr = np.asarray(soft, dtype=np.float64)
    if np.isnan(llr).any():
        raise ValueError("LLRs must not be NaN")
    n = spec.payload_length(llr.shape[-1])
    if payload_length is not None and payload_length != n:
        raise ValueError(
            f"soft length {llr.shape[-1]} does not match payload length {payload_length}"
        )
    lead_shape = llr.shape[:-1]
    bound = spec.llr_clip if clip is None else clip
    llr = np.clip(llr.reshape(-1, llr.shape[-1]), -bound, bound)
    batch = llr.shape[0]
    steps = llr.shape[1] // 2

    prev, sa, sb = _trellis(spec)
    # four possible branch metrics per step, indexed by the coded-bit pair
    branch = ((sa < 0) * 2 + (sb < 0)).ravel()
    prev_flat = prev.ravel()
    la, lb = llr[:, 0::2], llr[:, 1::2]
    bm = np.stack([la + lb, la - lb, lb - la, -la - lb], axis=-1).transpose(1, 0, 2)
    bm = bm.astype(np.float32)
    pm = np.full((batch, spec.n_states), -np.inf, dtype=np.float32)
    pm[:, 0] = 0.0
    decisions = np.empty((steps, batch, spec.n_states), dtype=bool)
    for t in range(steps):
        cand = (pm[:, prev_flat] + bm[t][:, branch]).reshape(batch, spec.n_states, 2)
        decisions[t] = cand[..., 1] > cand[..., 0]
        pm = np.maximum(cand[..., 0], cand[..., 1])
        pm -= pm.max(axis=1, keepdims=True)

    top = spec.termination - 1
    mask = spec.n_states - 1
    rows = np.arange(batch)
    state = np.zeros(batch, dtype=np.int64)
    bits = np.empty((batch, steps), dtype=np.uint8)
    for t in range(steps - 1, -1, -1):
        bits[:, t] = state >> top
        dropped = decisions[t, rows, state]
        state = ((state << 1) | dropped) & mask
    return bits[:, :n].reshape(lead_shape + (n,))


def hard_llr(codeword, magnitude: float = 1.0) -> np.ndarray:
    """Noiseless LLRs for a known codeword."""
    return magnitude * (1.0 - 2.0 * np.asarray(codeword, dtype=np.float64))
