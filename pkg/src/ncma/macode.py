"""MAC-layer Reed-Solomon erasure code over GF(256).

A message of ``L`` packets is read as ``packet_bytes`` parallel RS codewords:
byte ``j`` of packet ``i`` is the value at evaluation point ``i`` of the
unique polynomial of degree < L through (0, m_0[j]), ..., (L-1, m_{L-1}[j]).
The first ``L`` packets are therefore the message fragments themselves, and
any ``L`` distinct packets interpolate the polynomial back.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

_PRIM = 0x11D


def _tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(512, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= _PRIM
    exp[255:510] = exp[:255]
    return exp, log


GF_EXP, GF_LOG = _tables()


def _mul_table() -> np.ndarray:
    a = np.arange(256)
    prod = GF_EXP[GF_LOG[a][:, None] + GF_LOG[a][None, :]]
    prod[0, :] = 0
    prod[:, 0] = 0
    return prod.astype(np.uint8)


GF_MUL = _mul_table()


def gf_mul(a, b) -> np.ndarray:
    return GF_MUL[np.asarray(a, dtype=np.intp), np.asarray(b, dtype=np.intp)]


def gf_inv(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if np.any(a == 0):
        raise ZeroDivisionError("zero has no inverse in GF(256)")
    return GF_EXP[255 - GF_LOG[a]]


def gf_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    prod = GF_MUL[np.asarray(a, dtype=np.intp)[:, :, None], np.asarray(b, dtype=np.intp)[None, :, :]]
    return np.bitwise_xor.reduce(prod, axis=1)


def gf_solve_matrix(a: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix over GF(256) by Gauss-Jordan elimination."""
    n = a.shape[0]
    aug = np.concatenate([a.astype(np.int64), np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if pivots.size == 0:
            raise np.linalg.LinAlgError("singular matrix over GF(256)")
        p = col + pivots[0]
        aug[[col, p]] = aug[[p, col]]
        aug[col] = gf_mul(aug[col], gf_inv(aug[col, col]))
        others = np.nonzero(aug[:, col])[0]
        others = others[others != col]
        if others.size:
            aug[others] ^= gf_mul(aug[others, col][:, None], aug[col][None, :])
    return aug[:, n:]


@dataclass(frozen=True)
class MacCodeSpec:
    data_packets: int
    total_packets: int | None = None
    packet_payload_bits: int = 64

    def __post_init__(self):
        if self.total_packets is None:
            object.__setattr__(self, "total_packets", 2 * self.data_packets)
        if not 1 <= self.data_packets <= self.total_packets <= 255:
            raise ValueError(
                f"need 1 <= data_packets ({self.data_packets}) <= total_packets "
                f"({self.total_packets}) <= 255"
            )
        if self.packet_payload_bits <= 0 or self.packet_payload_bits % 8:
            raise ValueError(f"packet_payload_bits must be a positive multiple of 8, "
                             f"got {self.packet_payload_bits}")

    @property
    def message_bits(self) -> int:
        return self.data_packets * self.packet_payload_bits


@dataclass
class Message:
    user: str
    payload: np.ndarray
    msg_id: int = 0

    def __eq__(self, other):
        return (isinstance(other, Message) and self.user == other.user
                and np.array_equal(self.payload, other.payload))


@lru_cache(maxsize=64)
def _generator(data_packets: int, total_packets: int) -> np.ndarray:
    """Row i holds the Lagrange basis values at point i for nodes 0..L-1."""
    nodes = np.arange(data_packets)
    g = np.zeros((total_packets, data_packets), dtype=np.int64)
    for i in range(total_packets):
        for j in range(data_packets):
            num, den = 1, 1
            for m in nodes:
                if m == j:
                    continue
                num = int(gf_mul(num, i ^ m))
                den = int(gf_mul(den, j ^ m))
            g[i, j] = int(gf_mul(num, gf_inv(den)))
    return g


@lru_cache(maxsize=4096)
def _interpolation_matrix(points: tuple[int, ...]) -> np.ndarray:
    """Maps the values at ``points`` to the values at 0..L-1 (L = len(points)).

    Lagrange coefficients computed in the log domain; targets that are
    among the points are read off directly.
    """
    x = np.asarray(points, dtype=np.int64)
    n = x.size
    out = np.zeros((n, n), dtype=np.int64)
    diff = x[:, None] ^ x[None, :]
    np.fill_diagonal(diff, 1)
    log_den = GF_LOG[diff].sum(axis=1)
    for j in range(n):
        hit = np.flatnonzero(x == j)
        if hit.size:
            out[j, hit[0]] = 1
            continue
        log_d = GF_LOG[j ^ x]
        out[j] = GF_EXP[(log_d.sum() - log_d - log_den) % 255]
    return out


def _fragments(msg: Message, spec: MacCodeSpec) -> np.ndarray:
    bits = np.asarray(msg.payload, dtype=np.uint8)
    if bits.shape != (spec.message_bits,):
        raise ValueError(f"message payload has {bits.size} bits, spec needs {spec.message_bits}")
    return np.packbits(bits.reshape(spec.data_packets, spec.packet_payload_bits), axis=1)


def mac_encode(msg: Message, spec: MacCodeSpec) -> list[tuple[int, np.ndarray]]:
    """All ``total_packets`` coded packets as (index, bits); the first L are systematic."""
    coded = gf_matmul(_generator(spec.data_packets, spec.total_packets), _fragments(msg, spec))
    bits = np.unpackbits(coded, axis=1)
    return [(i, bits[i]) for i in range(spec.total_packets)]


def mac_reencode(msg: Message, index: int, spec: MacCodeSpec) -> np.ndarray:
    if not 0 <= index < spec.total_packets:
        raise IndexError(f"packet index {index} outside 0..{spec.total_packets - 1}")
    row = _generator(spec.data_packets, spec.total_packets)[index:index + 1]
    return np.unpackbits(gf_matmul(row, _fragments(msg, spec)), axis=1)[0]


def mac_decode(packets: Mapping[int, np.ndarray] | Iterable[tuple[int, np.ndarray]],
               spec: MacCodeSpec, user: str = "", msg_id: int = 0) -> Message | None:
    """Recover the message from any L distinct packets; None if fewer are given."""
    items = list(packets.items()) if isinstance(packets, Mapping) else list(packets)
    idx = [int(i) for i, _ in items]
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate packet indices in {sorted(idx)}")
    bad = [i for i in idx if not 0 <= i < spec.total_packets]
    if bad:
        raise IndexError(f"packet indices {bad} outside 0..{spec.total_packets - 1}")
    if len(items) < spec.data_packets:
        return None
    items = sorted(items, key=lambda t: t[0])[: spec.data_packets]
    rows = [i for i, _ in items]
    received = np.packbits(np.stack([np.asarray(b, dtype=np.uint8) for _, b in items]), axis=1)
    if rows == list(range(spec.data_packets)):
        fragments = received
    else:
        fragments = gf_matmul(_interpolation_matrix(tuple(rows)), received)
    return Message(user, np.unpackbits(fragments, axis=1).reshape(-1), msg_id)


def random_message(rng: np.random.Generator, user: str, spec: MacCodeSpec, msg_id: int = 0) -> Message:
    return Message(user, rng.integers(0, 2, spec.message_bits, dtype=np.uint8), msg_id)
