"""Random access and grouping: Zadoff-Chu preambles, correlation detection,
the four-step contention procedure and SNR-based user grouping.

Contention model: every pending user picks one of ``n_preambles`` cyclic
shifts uniformly at random. A preamble picked by exactly one user admits that
user; users sharing a preamble collide in the request step and retry in the
next round. The number of rounds until everyone is admitted has an exact
Markov-chain expectation, computed by ``expected_rounds``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Sequence

import numpy as np

DEFAULT_NZC = 257
DEFAULT_NCS = 20
DEFAULT_THRESHOLD = 20.0


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class ZcSequence:
    root: int
    length: int
    shift: int
    samples: np.ndarray = field(compare=False, repr=False)


def zc_root(u: int, n_zc: int = DEFAULT_NZC) -> np.ndarray:
    m = np.arange(n_zc, dtype=np.int64)
    # reduce the exponent mod 2*N exactly before going to floating point
    phase = (u * m * (m + 1)) % (2 * n_zc)
    return np.exp(-1j * np.pi * phase / n_zc)


def zc_generate(u: int, n_zc: int = DEFAULT_NZC, shift: int = 0,
                n_cs: int | None = None) -> ZcSequence:
    """Root-``u`` Zadoff-Chu sequence, cyclically advanced by ``shift`` samples."""
    if not _is_prime(n_zc):
        raise ValueError(f"N_ZC must be prime, got {n_zc}")
    if not 1 <= u < n_zc:
        raise ValueError(f"root must satisfy 1 <= u < {n_zc}, got {u}")
    if not 0 <= shift < n_zc:
        raise ValueError(f"shift must lie in [0, {n_zc}), got {shift}")
    if n_cs is not None and shift % n_cs:
        raise ValueError(f"shift {shift} is not a multiple of N_CS={n_cs}")
    return ZcSequence(u, n_zc, shift, np.roll(zc_root(u, n_zc), -shift))


def circular_correlation(received: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """c[l] = sum_m reference[(m + l) mod N] * conj(received[m]), so a copy of
    ``reference`` advanced by s samples peaks at lag s."""
    return np.fft.ifft(np.fft.fft(reference) * np.conj(np.fft.fft(received)))


def detect_preambles(received, u: int = 1, n_cs: int = DEFAULT_NCS,
                     threshold: float = DEFAULT_THRESHOLD) -> set[int]:
    """Cyclic shifts whose correlation peak exceeds ``threshold`` x median lag energy.

    Each shift ``b * n_cs`` owns the lag window ``[b*n_cs, (b+1)*n_cs)``.
    The median is floored at 1e-12 of the largest energy so a noiseless
    input is not judged against round-off.
    """
    received = np.asarray(received, dtype=np.complex128)
    n_zc = received.shape[-1]
    energy = np.abs(circular_correlation(received, zc_root(u, n_zc))) ** 2
    ref = max(float(np.median(energy)), 1e-12 * float(energy.max()))
    n_bins = n_zc // n_cs
    peaks = energy[: n_bins * n_cs].reshape(n_bins, n_cs).max(axis=1)
    return {int(b * n_cs) for b in np.nonzero(peaks > threshold * ref)[0]}


# -- grouping -------------------------------------------------------------

@dataclass(frozen=True)
class Group:
    members: tuple[str, ...]

    @property
    def role(self) -> str:
        return "ncma" if len(self.members) > 1 else "tdma"


@dataclass
class GroupPlan:
    groups: list[Group]
    snr_db: dict[str, float]

    def validate(self) -> None:
        seen = [u for g in self.groups for u in g.members]
        if len(seen) != len(set(seen)) or set(seen) != set(self.snr_db):
            raise AssertionError("every admitted user must appear in exactly one group")
        if any(not 1 <= len(g.members) <= 3 for g in self.groups):
            raise AssertionError("groups hold one (TDMA) to three (NCMA) users")

    def describe(self) -> str:
        return "; ".join(f"{g.role}:{'+'.join(g.members)}" for g in self.groups)


def _chunk_weak(weak: list[str]) -> tuple[list[tuple[str, ...]], list[str]]:
    """Triples first, then a pair; a final lone user is returned separately."""
    groups, rest = [], list(weak)
    while len(rest) >= 3:
        groups.append(tuple(rest[:3]))
        rest = rest[3:]
    if len(rest) == 2:
        groups.append(tuple(rest))
        rest = []
    return groups, rest


def group_users(admitted: Sequence[tuple[str, float]], strong_threshold_db: float = 15.0,
                weak_first: bool = False) -> GroupPlan:
    """Group users by measured SNR.

    Default order pairs the strongest remaining strong user with the weakest
    remaining weak user while both kinds remain; leftover strong users go
    TDMA and leftover weak users form NCMA triples, then a pair, with a lone
    weak user left as a singleton. ``weak_first`` groups weak users among
    themselves first and only pairs a leftover weak user with a strong one.
    """
    snr = {u: float(s) for u, s in admitted}
    strong = sorted((u for u in snr if snr[u] >= strong_threshold_db), key=lambda u: (-snr[u], u))
    weak = sorted((u for u in snr if snr[u] < strong_threshold_db), key=lambda u: (snr[u], u))
    groups: list[tuple[str, ...]] = []
    if weak_first:
        weak_groups, lone = _chunk_weak(weak)
        groups += weak_groups
        if lone and strong:
            groups.append((strong.pop(0), lone.pop()))
        groups += [(u,) for u in strong + lone]
    else:
        n_pairs = min(len(strong), len(weak))
        groups += [(strong[i], weak[i]) for i in range(n_pairs)]
        groups += [(u,) for u in strong[n_pairs:]]
        weak_groups, lone = _chunk_weak(weak[n_pairs:])
        groups += weak_groups + [(u,) for u in lone]
    plan = GroupPlan([Group(g) for g in groups], snr)
    plan.validate()
    return plan


# -- contention -----------------------------------------------------------

def contention_round(choices: np.ndarray, pending: np.ndarray, n_preambles: int) -> np.ndarray:
    """Which pending users are admitted given their preamble choices.

    ``choices`` and ``pending`` are (trials, users); returns a boolean mask
    of users whose preamble nobody else picked.
    """
    trials = choices.shape[0]
    keys = np.where(pending, choices + n_preambles * np.arange(trials)[:, None], -1)
    counts = np.bincount(keys[pending], minlength=trials * n_preambles)
    return pending & (counts[np.where(pending, keys, 0)] == 1)


def admission_rounds(n_users: int, n_preambles: int = DEFAULT_NZC // DEFAULT_NCS,
                     trials: int = 1, rng=None, max_rounds: int = 10_000) -> np.ndarray:
    """Rounds until every one of ``n_users`` is admitted, for many independent trials."""
    if n_users < 1 or n_preambles < 1:
        raise ValueError("need at least one user and one preamble")
    rng = np.random.default_rng(rng)
    pending = np.ones((trials, n_users), dtype=bool)
    rounds = np.zeros(trials, dtype=np.int64)
    for r in range(1, max_rounds + 1):
        active = pending.any(axis=1)
        if not active.any():
            break
        rounds[active] = r
        choices = rng.integers(0, n_preambles, size=pending.shape)
        pending &= ~contention_round(choices, pending, n_preambles)
    else:
        raise RuntimeError(f"contention did not resolve within {max_rounds} rounds")
    return rounds


@lru_cache(maxsize=None)
def _no_singleton_ways(balls: int, boxes: int) -> int:
    """Ways to put labeled balls into labeled boxes with no box holding exactly one."""
    if boxes == 0:
        return int(balls == 0)
    total = _no_singleton_ways(balls, boxes - 1)
    for j in range(2, balls + 1):
        total += comb(balls, j) * _no_singleton_ways(balls - j, boxes - 1)
    return total


def singleton_distribution(n_users: int, n_preambles: int) -> np.ndarray:
    """P(exactly s users pick a preamble nobody else picked), s = 0..n_users."""
    out = np.zeros(n_users + 1)
    total = n_preambles ** n_users
    for s in range(min(n_users, n_preambles) + 1):
        ways = (comb(n_preambles, s) * comb(n_users, s) * factorial(s)
                * _no_singleton_ways(n_users - s, n_preambles - s))
        out[s] = ways / total
    return out


def expected_rounds(n_users: int, n_preambles: int = DEFAULT_NZC // DEFAULT_NCS) -> float:
    """Exact mean number of rounds for the contention Markov chain."""
    e = [0.0] * (n_users + 1)
    for n in range(1, n_users + 1):
        p = singleton_distribution(n, n_preambles)
        if p[0] >= 1.0:
            raise ValueError("contention never resolves with these parameters")
        e[n] = (1.0 + sum(p[s] * e[n - s] for s in range(1, n + 1))) / (1.0 - p[0])
    return e[n_users]


@dataclass
class RagResult:
    plan: GroupPlan
    rounds: int
    admitted_round: dict[str, int]
    collisions: list[int]        # users lost to request collisions, per round
    missed: list[int]            # users whose preamble went undetected, per round
    false_alarms: list[int]      # detected preambles nobody sent, per round


def run_rag(active_users: Sequence[tuple[str, float]], rng=None, n_zc: int = DEFAULT_NZC,
            u: int = 1, n_cs: int = DEFAULT_NCS, threshold: float = DEFAULT_THRESHOLD,
            snr_error_db: float = 0.5, strong_threshold_db: float = 15.0,
            weak_first: bool = False, max_rounds: int = 1000) -> RagResult:
    """Simulate the four-step access procedure at signal level, then group users.

    Each round the pending users' shifted preambles pass through independent
    Rayleigh gains at their SNR (unit noise) and the base station detects
    shifts by correlation. Detected preambles chosen by a single user admit
    it with its SNR measured as truth plus Gaussian error.
    """
    if not active_users:
        raise ValueError("need at least one active user")
    rng = np.random.default_rng(rng)
    n_pre = n_zc // n_cs
    root = zc_root(u, n_zc)
    snr = {uid: float(s) for uid, s in active_users}
    pending = [uid for uid, _ in active_users]
    admitted: dict[str, int] = {}
    measured: list[tuple[str, float]] = []
    collisions, missed, false_alarms = [], [], []
    for r in range(1, max_rounds + 1):
        if not pending:
            break
        picks = rng.integers(0, n_pre, size=len(pending))
        y = (rng.standard_normal(n_zc) + 1j * rng.standard_normal(n_zc)) / np.sqrt(2.0)
        gains = (rng.standard_normal(len(pending)) + 1j * rng.standard_normal(len(pending))) / np.sqrt(2.0)
        for uid, p, g in zip(pending, picks, gains):
            y = y + g * np.sqrt(10 ** (snr[uid] / 10)) * np.roll(root, -int(p) * n_cs)
        detected = {s // n_cs for s in detect_preambles(y, u, n_cs, threshold)}
        counts = np.bincount(picks, minlength=n_pre)
        false_alarms.append(sum(1 for d in detected if counts[d] == 0))
        still, n_col, n_miss = [], 0, 0
        for uid, p in zip(pending, picks):
            if p not in detected:
                n_miss += 1
                still.append(uid)
            elif counts[p] > 1:
                n_col += 1
                still.append(uid)
            else:
                admitted[uid] = r
                measured.append((uid, snr[uid] + snr_error_db * rng.standard_normal()))
        collisions.append(n_col)
        missed.append(n_miss)
        pending = still
    if pending:
        raise RuntimeError(f"{len(pending)} users still pending after {max_rounds} rounds")
    plan = group_users(measured, strong_threshold_db, weak_first)
    return RagResult(plan, len(collisions), admitted, collisions, missed, false_alarms)
