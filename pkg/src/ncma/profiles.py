"""Modulation profiles: which users transmit what, the stream basis each slot
is described in, and which PHY decoders the base station runs.

Every stream carries exactly one MAC packet per slot. A standard-QPSK user
therefore owns two streams (its packet is two framed MAC packets back to
back), and a symbol-splitting QPSK user owns its I and Q rail packets.

A ``Decoder`` names the rail products whose XOR bits form its codeword. A
single group gives a BPSK-shaped codeword (one LLR per symbol); two groups
are interleaved like standard QPSK (I rail -> even coded bits, Q rail -> odd
coded bits). Each payload segment of the decoded codeword maps to one
``EquationLabel`` over the stream basis.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .fec import DEFAULT_CODE, ConvCodeSpec, conv_encode
from .framing import append_crc, stream_mask
from .modem import (BPSK, QPSK_SPLIT, QPSK_STANDARD, ModulationScheme, SymbolBlock,
                    bpsk_modulate, qpsk_split_modulate, qpsk_standard_modulate)


@dataclass(frozen=True)
class EquationLabel:
    """GF(2) coefficients of a decoded packet over the slot's stream basis."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if any(c not in (0, 1) for c in coeffs):
            raise ValueError(f"label coefficients must be 0/1: {coeffs}")
        if not any(coeffs):
            raise ValueError("label needs at least one nonzero coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def of(cls, streams, *members: str) -> "EquationLabel":
        unknown = set(members) - set(streams)
        if unknown:
            raise KeyError(f"unknown streams {sorted(unknown)}")
        return cls(tuple(int(s in members) for s in streams))

    @property
    def weight(self) -> int:
        return sum(self.coeffs)

    @property
    def is_native(self) -> bool:
        return self.weight == 1

    @property
    def native_index(self) -> int:
        if not self.is_native:
            raise ValueError(f"{self.coeffs} is not a native label")
        return self.coeffs.index(1)

    def describe(self, streams) -> str:
        return "+".join(s for s, c in zip(streams, self.coeffs) if c)


@dataclass(frozen=True)
class Decoder:
    name: str
    groups: tuple[tuple[int, ...], ...]
    labels: tuple[EquationLabel, ...]

    @property
    def equivalent_bpsk_packets(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class Profile:
    name: str
    users: tuple[str, ...]
    schemes: tuple[ModulationScheme, ...]
    streams: tuple[str, ...]
    stream_owner: tuple[tuple[str, int], ...]
    decoders: tuple[Decoder, ...]
    native_decoders: tuple[tuple[Decoder, ...], ...]
    uses_sic: bool = False

    def scheme(self, user: str) -> ModulationScheme:
        return self.schemes[self.users.index(user)]

    def user_streams(self, user: str) -> tuple[str, ...]:
        return tuple(s for s, (u, _) in zip(self.streams, self.stream_owner) if u == user)

    def packets_per_slot(self, user: str) -> int:
        return len(self.user_streams(user))

    def stream_index(self, stream: str) -> int:
        return self.streams.index(stream)

    def label(self, *members: str) -> EquationLabel:
        return EquationLabel.of(self.streams, *members)

    @property
    def equivalent_bpsk_decodes(self) -> int:
        return sum(d.equivalent_bpsk_packets for d in self.decoders)

    @cached_property
    def rails(self) -> tuple[str, ...]:
        out = []
        for user, scheme in zip(self.users, self.schemes):
            out += [user] if scheme is BPSK else [f"{user}.I", f"{user}.Q"]
        return tuple(out)

    @cached_property
    def constellation(self) -> tuple[np.ndarray, np.ndarray]:
        """Joint points: (rail signs (P, rails), unit-power symbols (P, users))."""
        per_user = []
        for scheme in self.schemes:
            if scheme is BPSK:
                per_user.append([((1,), 1.0 + 0j), ((-1,), -1.0 + 0j)])
            else:
                per_user.append([((i, q), complex(i, q) / np.sqrt(2.0))
                                 for i in (1, -1) for q in (1, -1)])
        rails, symbols = [], []
        for combo in itertools.product(*per_user):
            rails.append(sum((r for r, _ in combo), ()))
            symbols.append([s for _, s in combo])
        return np.array(rails, dtype=np.int8), np.array(symbols, dtype=np.complex128)

    @cached_property
    def parity_masks(self) -> dict[tuple[int, ...], np.ndarray]:
        """For each rail group, the boolean mask of points whose product is +1."""
        rails, _ = self.constellation
        masks = {}
        for dec in self.decoders + sum(self.native_decoders, ()):
            for group in dec.groups:
                plus = np.prod(rails[:, list(group)], axis=1) > 0
                if plus.all() or not plus.any():
                    raise AssertionError(f"rail group {group} does not split the constellation")
                masks[group] = plus
        return masks


def _bpsk_like(name, users, schemes, streams, owners, stream_rails, excluded=()):
    rail_of = dict(stream_rails)
    decoders = []
    for size in range(1, len(streams) + 1):
        for members in itertools.combinations(streams, size):
            if any(set(pair) <= set(members) for pair in excluded):
                continue
            decoders.append(Decoder("+".join(members), (tuple(rail_of[m] for m in members),),
                                    (EquationLabel.of(streams, *members),)))
    natives = tuple(tuple(d for d in decoders if d.labels[0].is_native
                          and owners[d.labels[0].native_index][0] == u) for u in users)
    return Profile(name, users, schemes, streams, owners, tuple(decoders), natives)


def _three_bpsk(name="bpsk-ncma", sic=False) -> Profile:
    users = ("A", "B", "C")
    p = _bpsk_like(name, users, (BPSK,) * 3, users, tuple((u, 0) for u in users),
                   [(u, i) for i, u in enumerate(users)])
    if sic:
        p = Profile(name, p.users, p.schemes, p.streams, p.stream_owner, (), p.native_decoders, True)
    return p


def _three_qpsk() -> Profile:
    users = ("A", "B", "C")
    streams = tuple(f"{u}{j}" for u in users for j in (1, 2))
    owners = tuple((u, j) for u in users for j in (0, 1))
    decoders = []
    for size in (1, 2, 3):
        for members in itertools.combinations(range(3), size):
            groups = (tuple(2 * m for m in members), tuple(2 * m + 1 for m in members))
            labels = tuple(EquationLabel.of(streams, *(f"{users[m]}{j}" for m in members))
                           for j in (1, 2))
            decoders.append(Decoder("+".join(users[m] for m in members), groups, labels))
    natives = tuple((decoders[i],) for i in range(3))
    return Profile("qpsk-ncma", users, (QPSK_STANDARD,) * 3, streams, owners,
                   tuple(decoders), natives)


def _two_bpsk_one_qpsk(split: bool) -> Profile:
    users = ("A", "B", "C")
    streams = ("A", "B", "C_I", "C_Q")
    owners = (("A", 0), ("B", 0), ("C", 0), ("C", 1))
    if split:
        # rail order: A, B, C.I, C.Q; C_I xor C_Q combinations are not scheduled
        p = _bpsk_like("sr-ncma", users, (BPSK, BPSK, QPSK_SPLIT), streams, owners,
                       [("A", 0), ("B", 1), ("C_I", 2), ("C_Q", 3)],
                       excluded=[("C_I", "C_Q")])
        return p
    whole_c = Decoder("C", ((2,), (3,)), (EquationLabel.of(streams, "C_I"),
                                          EquationLabel.of(streams, "C_Q")))
    dec = {n: Decoder(n.replace(" ", ""), (r,), (EquationLabel.of(streams, *n.split("+")),))
           for n, r in (("A", (0,)), ("B", (1,)), ("A+B", (0, 1)))}
    decoders = (dec["A"], dec["B"], whole_c, dec["A+B"])
    natives = ((dec["A"],), (dec["B"],), (whole_c,))
    return Profile("dr-ncma", users, (BPSK, BPSK, QPSK_STANDARD), streams, owners,
                   decoders, natives)


PROFILES: dict[str, Profile] = {
    p.name: p for p in (
        _three_bpsk("sic-noma", sic=True),
        _three_bpsk(),
        _three_qpsk(),
        _two_bpsk_one_qpsk(split=False),
        _two_bpsk_one_qpsk(split=True),
    )
}


def get_profile(name: str | Profile) -> Profile:
    if isinstance(name, Profile):
        return name
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def encode_user(profile: Profile, user: str, packets: Mapping[str, np.ndarray],
                code: ConvCodeSpec = DEFAULT_CODE) -> SymbolBlock:
    """Frame, convolutionally encode and modulate one user's packets for a slot."""
    scheme = profile.scheme(user)
    frames = [append_crc(packets[s], stream_mask(profile.stream_index(s)))
              for s in profile.user_streams(user)]
    if scheme is BPSK:
        return bpsk_modulate(conv_encode(frames[0], code))
    if scheme is QPSK_SPLIT:
        return qpsk_split_modulate(conv_encode(frames[0], code), conv_encode(frames[1], code))
    # zero pad keeps the QPSK symbol count equal to a BPSK packet's
    pad = np.zeros(code.termination, dtype=np.uint8)
    return qpsk_standard_modulate(conv_encode(np.concatenate(frames + [pad]), code))


def encode_slot(profile: Profile | str, packets: Mapping[str, np.ndarray],
                code: ConvCodeSpec = DEFAULT_CODE, users=None) -> dict[str, SymbolBlock]:
    profile = get_profile(profile)
    users = profile.users if users is None else users
    return {u: encode_user(profile, u, packets, code) for u in users}
