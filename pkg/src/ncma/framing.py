"""CRC-32 framing of MAC packets.

Every MAC packet is protected by the standard reflected CRC-32 (polynomial
0x04C11DB7, init all-ones, as in zlib) before convolutional encoding. The
CRC field is additionally XORed with a mask that identifies the packet's
stream in the slot, so a decoder that locks onto another stream's packet
fails the check (the usual identity-scrambled CRC).

The CRC is affine rather than linear, so a frame obtained as the XOR of ``w``
frames carries ``crc(xor) ^ crc(0)`` when ``w`` is even, plus the XOR of the
members' masks. ``crc_ok`` takes the combination weight and the combined
mask to undo both offsets. Because the stream masks are linearly
independent, the all-zero frame never checks for any combination.
"""
from __future__ import annotations

import zlib
from functools import lru_cache
from typing import Sequence

import numpy as np

CRC_BITS = 32
_SHIFTS = np.arange(CRC_BITS - 1, -1, -1, dtype=np.uint64)


def _crc_value(bits: np.ndarray) -> int:
    if bits.shape[-1] % 8:
        raise ValueError(f"payload length {bits.shape[-1]} is not a whole number of bytes")
    return zlib.crc32(np.packbits(bits).tobytes())


@lru_cache(maxsize=32)
def _zero_crc(n_bits: int) -> int:
    return _crc_value(np.zeros(n_bits, dtype=np.uint8))


_MAX_STREAMS = 8


@lru_cache(maxsize=_MAX_STREAMS)
def stream_mask(index: int) -> int:
    """CRC mask of stream ``index`` (0-based position in the slot's stream basis).

    The low byte is the unit vector of ``index``, which keeps the masks of
    different streams linearly independent; the upper bits are a fixed hash
    that spreads the difference over the whole field.
    """
    if not 0 <= index < _MAX_STREAMS:
        raise ValueError(f"stream index must lie in [0, {_MAX_STREAMS}), got {index}")
    return (zlib.crc32(f"stream-{index}".encode()) & ~0xFF) | (1 << index)


def label_mask(coeffs: Sequence[int]) -> int:
    """Combined mask of an XOR combination given its 0/1 stream coefficients."""
    out = 0
    for i, c in enumerate(coeffs):
        if c:
            out ^= stream_mask(i)
    return out


def crc_bits(payload, mask: int = 0) -> np.ndarray:
    value = np.uint64(_crc_value(np.asarray(payload, dtype=np.uint8)) ^ mask)
    return ((value >> _SHIFTS) & np.uint64(1)).astype(np.uint8)


def append_crc(payload, mask: int = 0) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8)
    return np.concatenate([payload, crc_bits(payload, mask)])


def crc_ok(frame, weight: int = 1, mask: int = 0) -> bool:
    """True if ``frame`` (payload + 32 CRC bits) checks for a ``weight``-fold XOR
    whose members' masks combine to ``mask``."""
    frame = np.asarray(frame, dtype=np.uint8)
    payload, field = frame[:-CRC_BITS], frame[-CRC_BITS:]
    got = int((field.astype(np.uint64) << _SHIFTS).sum())
    want = _crc_value(payload) ^ mask
    if weight % 2 == 0:
        want ^= _zero_crc(payload.shape[-1])
    return got == want


def frame_length(payload_bits: int) -> int:
    return payload_bits + CRC_BITS
