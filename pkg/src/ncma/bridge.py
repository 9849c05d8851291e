"""PHY-layer and MAC-layer bridging.

PHY-layer bridging is Gaussian elimination over GF(2) on one slot's decoded
equations, carrying packets along as augmented columns. MAC-layer bridging
runs a fixed point across slots: RS-decode any message with enough natives,
re-encode it into every slot it was sent in, substitute those packets into
the stored unresolved equations and eliminate again.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .channel import SlotObservation
from .detect import DecodedEquation, run_decoder_bank, sic_decode
from .macode import MacCodeSpec, Message, mac_decode, mac_encode
from .profiles import EquationLabel, Profile, get_profile

STAGES = ("mud", "phy", "mac")


class IntegrityError(RuntimeError):
    """Two derivations of the same combination disagree bit-wise."""


def gf2_eliminate(labels: np.ndarray, packets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form of ``[labels | packets]`` over GF(2).

    Returns the nonzero label rows with their packets. A row whose label
    reduces to zero while its packet does not raises ``IntegrityError``.
    """
    a = np.array(labels, dtype=np.uint8, copy=True)
    p = np.array(packets, dtype=np.uint8, copy=True)
    n_rows, n_cols = a.shape
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        piv = r + hits[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
            p[[r, piv]] = p[[piv, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        p[others] ^= p[r]
        r += 1
    if p[r:].any():
        raise IntegrityError("decoded equations are inconsistent")
    return a[:r], p[:r]


def phy_bridge(equations: Sequence[DecodedEquation], n_streams: int | None = None
               ) -> tuple[dict[int, np.ndarray], list[DecodedEquation]]:
    """Resolve one slot's equations into native packets plus a reduced residual.

    Natives are keyed by stream index; the residual holds the remaining
    independent rows, none of which touches a resolved stream.
    """
    if not equations:
        return {}, []
    if n_streams is None:
        n_streams = len(equations[0].label.coeffs)
    slot = equations[0].slot
    labels = np.array([e.label.coeffs for e in equations], dtype=np.uint8)
    if labels.shape[1] != n_streams:
        raise ValueError("equations are not over a common stream basis")
    rows, packets = gf2_eliminate(labels, np.stack([e.packet for e in equations]))
    natives, residual = {}, []
    for row, pkt in zip(rows, packets):
        if row.sum() == 1:
            natives[int(np.argmax(row))] = pkt
        else:
            residual.append(DecodedEquation(EquationLabel(tuple(row)), pkt, slot))
    return natives, residual


@dataclass
class SlotLedger:
    slot: int
    streams: tuple[str, ...]
    manifest: dict[str, tuple[str, int, int]]  # stream -> (user, message id, packet index)
    natives: dict[str, np.ndarray] = field(default_factory=dict)
    residual: list[DecodedEquation] = field(default_factory=list)
    n_decoded: int = 0


@dataclass
class MessageState:
    user: str
    msg_id: int
    natives: dict[int, np.ndarray] = field(default_factory=dict)
    message: Message | None = None
    slots: set[int] = field(default_factory=set)


class MacLedger:
    """Everything the base station has learned, per slot and per message."""

    def __init__(self, specs: Mapping[str, MacCodeSpec], stage: str = "mac", trace: bool = False):
        if stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}, got {stage!r}")
        self.specs = dict(specs)
        self.stage = stage
        self.slots: dict[int, SlotLedger] = {}
        self.messages: dict[tuple[str, int], MessageState] = {}
        self._dirty: set[int] = set()
        self._touched: set[tuple[str, int]] = set()
        # with trace=True: ("native", slot, stream) and ("message", user, msg_id) in discovery order
        self.events: list[tuple] | None = [] if trace else None

    def open_slot(self, slot: int, streams: Sequence[str],
                  manifest: Mapping[str, tuple[str, int, int]]) -> SlotLedger:
        if slot in self.slots:
            raise ValueError(f"slot {slot} already opened")
        led = SlotLedger(slot, tuple(streams), dict(manifest))
        self.slots[slot] = led
        for user, msg_id, _ in led.manifest.values():
            self._state(user, msg_id).slots.add(slot)
        return led

    def _state(self, user: str, msg_id: int) -> MessageState:
        key = (user, msg_id)
        if key not in self.messages:
            self.messages[key] = MessageState(user, msg_id)
        return self.messages[key]

    def is_recovered(self, user: str, msg_id: int) -> bool:
        st = self.messages.get((user, msg_id))
        return st is not None and st.message is not None

    def recovered(self, user: str | None = None) -> list[Message]:
        return [st.message for (u, _), st in sorted(self.messages.items())
                if st.message is not None and (user is None or u == user)]

    def n_recovered(self, user: str) -> int:
        return sum(1 for (u, _), st in self.messages.items() if u == user and st.message is not None)

    def n_natives(self) -> int:
        return sum(len(st.natives) for st in self.messages.values())

    def add_native(self, slot: int, stream: str, packet: np.ndarray) -> bool:
        """Record a resolved stream packet; returns True if it was new."""
        led = self.slots[slot]
        if stream in led.natives:
            if not np.array_equal(led.natives[stream], packet):
                raise IntegrityError(f"slot {slot} stream {stream}: conflicting packets")
            return False
        led.natives[stream] = np.asarray(packet, dtype=np.uint8)
        user, msg_id, index = led.manifest[stream]
        st = self._state(user, msg_id)
        if index in st.natives and not np.array_equal(st.natives[index], packet):
            raise IntegrityError(f"{user} message {msg_id} packet {index}: conflicting packets")
        st.natives[index] = led.natives[stream]
        if self.events is not None:
            self.events.append(("native", slot, stream))
        if st.message is None:
            self._touched.add((user, msg_id))
        if led.residual:
            self._dirty.add(slot)
        return True

    def ingest(self, slot: int, equations: Sequence[DecodedEquation]) -> None:
        """PHY-layer processing of one slot's decoded equations, per the ledger's stage."""
        if self.stage == "mud":
            natives = {e.label.native_index: e.packet for e in equations if e.label.is_native}
            residual = []
        else:
            natives, residual = phy_bridge(equations, len(self.slots[slot].streams))
        self.ingest_resolved(slot, natives, residual, len(equations))

    def ingest_resolved(self, slot: int, natives: Mapping[int, np.ndarray],
                        residual: Sequence[DecodedEquation], n_decoded: int = 0) -> None:
        """Store an already-eliminated slot; MUD-only ledgers must be given MUD natives."""
        led = self.slots[slot]
        led.n_decoded = n_decoded
        for idx, pkt in natives.items():
            self.add_native(slot, led.streams[idx], pkt)
        if self.stage == "mac" and residual:
            led.residual = led.residual + list(residual)
            known = [led.streams.index(s) for s in led.natives]
            if len(led.residual) > len(residual) or any(
                    eq.label.coeffs[j] for eq in residual for j in known):
                self._dirty.add(slot)


def _resolve_slot(ledger: MacLedger, led: SlotLedger) -> bool:
    if not led.residual:
        return False
    known = [led.streams.index(s) for s in led.natives]
    eqs = []
    for eq in led.residual:
        coeffs = list(eq.label.coeffs)
        pkt = eq.packet.copy()
        for j in known:
            if coeffs[j]:
                coeffs[j] = 0
                pkt ^= led.natives[led.streams[j]]
        if any(coeffs):
            eqs.append(DecodedEquation(EquationLabel(tuple(coeffs)), pkt, led.slot))
        elif pkt.any():
            raise IntegrityError(f"slot {led.slot}: stored equation contradicts resolved packets")
    natives, led.residual = phy_bridge(eqs, len(led.streams)) if eqs else ({}, [])
    new = False
    for idx, pkt in natives.items():
        new |= ledger.add_native(led.slot, led.streams[idx], pkt)
    return new


def mac_bridge(ledger: MacLedger, specs: Mapping[str, MacCodeSpec] | None = None,
               order: Sequence[str] | None = None) -> MacLedger:
    """Run MAC-layer decoding and bridging to a fixed point (in place).

    Only messages that gained packets since the last pass are retried, so
    the cost per call tracks what changed rather than the ledger size.
    ``order`` fixes the user order in which messages are decoded; the
    fixed point does not depend on it.
    """
    specs = ledger.specs if specs is None else specs
    rank = {u: i for i, u in enumerate(order or ())}
    while True:
        while ledger._dirty:
            slot = min(ledger._dirty)
            ledger._dirty.discard(slot)
            _resolve_slot(ledger, ledger.slots[slot])
        if not ledger._touched:
            return ledger
        pending = sorted(ledger._touched, key=lambda k: (rank.get(k[0], len(rank)), k))
        ledger._touched.clear()
        for key in pending:
            st = ledger.messages[key]
            spec = specs[st.user]
            if st.message is not None or len(st.natives) < spec.data_packets:
                continue
            st.message = mac_decode(st.natives, spec, st.user, st.msg_id)
            if ledger.events is not None:
                ledger.events.append(("message", st.user, st.msg_id))
            coded = mac_encode(st.message, spec)
            for slot in sorted(st.slots):
                led = ledger.slots[slot]
                for stream, (user, msg_id, index) in led.manifest.items():
                    if (user, msg_id) == key:
                        ledger.add_native(slot, stream, coded[index][1])
                if led.residual and all(ledger.is_recovered(u, m) for u, m, _ in led.manifest.values()):
                    led.residual = []


def ingest_slot(ledger: MacLedger, slot: int, equations: Sequence[DecodedEquation]) -> MacLedger:
    """PHY processing for one slot followed by MAC decoding/bridging."""
    ledger.ingest(slot, equations)
    return mac_bridge(ledger)


def slot_manifest(profile: Profile, slot_packets: Mapping[str, tuple[int, int]]
                  ) -> dict[str, tuple[str, int, int]]:
    """Per-stream (user, message id, packet index) for users' current positions.

    ``slot_packets`` maps user -> (message id, first packet index this slot).
    """
    out = {}
    for stream, (user, sub) in zip(profile.streams, profile.stream_owner):
        msg_id, first = slot_packets[user]
        out[stream] = (user, msg_id, first + sub)
    return out


def run_slot_pipeline(obs: SlotObservation, profile: Profile | str, ledger: MacLedger,
                      manifest: Mapping[str, tuple[str, int, int]] | None = None,
                      sic_order: Sequence[str] | None = None) -> MacLedger:
    """Decode one slot, bridge at the PHY layer and run MAC bridging.

    The slot must already be open in ``ledger`` unless ``manifest`` is given.
    """
    profile = get_profile(profile)
    if manifest is not None:
        ledger.open_slot(obs.slot, profile.streams, manifest)
    if profile.uses_sic:
        eqs = sic_decode(obs, sic_order or profile.users[::-1], profile)
    else:
        eqs = run_decoder_bank(obs, profile)
    return ingest_slot(ledger, obs.slot, eqs)


def transmitted_equations(profile: Profile, packets: Mapping[str, np.ndarray], slot: int,
                          combos: Iterable[Iterable[str]]) -> list[DecodedEquation]:
    """Equations a genie decoder would output for the given stream combinations."""
    out = []
    for members in combos:
        members = tuple(members)
        pkt = np.bitwise_xor.reduce(np.stack([packets[m] for m in members]), axis=0)
        out.append(DecodedEquation(profile.label(*members), pkt, slot))
    return out
