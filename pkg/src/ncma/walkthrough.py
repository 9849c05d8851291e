"""Hand-built decoding outcomes that exercise PHY- and MAC-layer bridging.

``two_user_mac_bridging`` replays five slots of a two-user system with L=3:

    slot 1: A            slot 4: A, A+B
    slot 2: A+B (lone)   slot 5: A
    slot 3: B

A is recovered from slots 1, 4, 5; PHY bridging in slot 4 gives B's slot-4
packet, but B then holds only two natives. Re-encoding M^A yields A's slot-2
packet, which resolves the lone A+B of slot 2 and completes M^B.

``three_user_phy_bridging`` is a single three-user slot where only A+B and
A+B+C decode; their XOR is C's native packet.
"""
from __future__ import annotations

import numpy as np

from .bridge import MacLedger, mac_bridge, phy_bridge
from .detect import DecodedEquation
from .macode import MacCodeSpec, mac_encode, random_message
from .profiles import EquationLabel

TWO_USER_PATTERN = {1: ("A",), 2: ("A+B",), 3: ("B",), 4: ("A", "A+B"), 5: ("A",)}


def _xor(packets, members):
    return np.bitwise_xor.reduce(np.stack([packets[m] for m in members]), axis=0)


def two_user_mac_bridging(seed: int = 0, payload_bits: int = 64):
    """Run the five-slot replay; returns (ledger, messages sent, event trace)."""
    rng = np.random.default_rng(seed)
    streams = ("A", "B")
    spec = MacCodeSpec(3, 5, payload_bits)
    sent = {u: random_message(rng, u, spec) for u in streams}
    coded = {u: mac_encode(sent[u], spec) for u in streams}
    ledger = MacLedger({u: spec for u in streams}, "mac", trace=True)
    for slot, outcome in TWO_USER_PATTERN.items():
        index = slot - 1
        ledger.open_slot(slot, streams, {u: (u, 0, index) for u in streams})
        packets = {u: coded[u][index][1] for u in streams}
        eqs = [DecodedEquation(EquationLabel.of(streams, *o.split("+")),
                               _xor(packets, o.split("+")), slot) for o in outcome]
        ledger.ingest(slot, eqs)
        mac_bridge(ledger)
    return ledger, sent, ledger.events


def three_user_phy_bridging(seed: int = 0, payload_bits: int = 64):
    """Returns (natives, residual, transmitted packets) for the {A+B, A+B+C} slot."""
    rng = np.random.default_rng(seed)
    streams = ("A", "B", "C")
    packets = {u: rng.integers(0, 2, payload_bits, dtype=np.uint8) for u in streams}
    eqs = [DecodedEquation(EquationLabel.of(streams, *m), _xor(packets, m), 4)
           for m in (("A", "B"), ("A", "B", "C"))]
    natives, residual = phy_bridge(eqs)
    return {streams[i]: p for i, p in natives.items()}, residual, packets
