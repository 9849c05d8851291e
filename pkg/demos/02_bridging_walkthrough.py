"""
PHY-layer and MAC-layer bridging, step by step
==============================================

PHY-layer bridging combines equations decoded in the same slot. MAC-layer
bridging uses a message recovered through the erasure code to re-encode the
packets of other slots, which can turn a stored XOR equation into a native
packet of another user.
"""
from ncma.walkthrough import TWO_USER_PATTERN, three_user_phy_bridging, two_user_mac_bridging

# Three users, one slot: A+B and A+B+C decode, neither A nor B alone.
natives, residual, packets = three_user_phy_bridging()
print("natives from {A+B, A+B+C}:", sorted(natives))
print("still unresolved:", [r.label.describe(("A", "B", "C")) for r in residual])

# Two users, messages of L=3 packets, five slots.
print("\nper-slot decoder outcomes:")
for slot, outcome in TWO_USER_PATTERN.items():
    print(f"  slot {slot}: {', '.join(outcome)}")

ledger, sent, events = two_user_mac_bridging()
print("\ndiscovery order:")
for ev in events:
    if ev[0] == "message":
        print(f"  message of user {ev[1]} recovered")
    else:
        print(f"  native packet of stream {ev[2]} in slot {ev[1]}")
print("both messages recovered intact:", ledger.recovered() == [sent["A"], sent["B"]])
