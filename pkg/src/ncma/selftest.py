"""Quick oracle checks, runnable without pytest (``ncma selftest``)."""
from __future__ import annotations

import itertools
import time
from typing import Callable

import numpy as np

from .analysis import rate_gain, sic_sinr
from .bridge import phy_bridge
from .channel import draw_channel, transmit_slot
from .detect import DecodedEquation, joint_llr
from .fec import conv_encode, hard_llr, viterbi_decode
from .macode import MacCodeSpec, mac_decode, mac_encode, random_message
from .profiles import EquationLabel, encode_slot, get_profile
from .rag import admission_rounds, detect_preambles, zc_generate, zc_root
from .walkthrough import three_user_phy_bridging, two_user_mac_bridging

CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = []


def check(name):
    def wrap(fn):
        CHECKS.append((name, fn))
        return fn
    return wrap


@check("encoder impulse response")
def _impulse():
    got = conv_encode(np.array([1, 0, 0, 0, 0, 0, 0], dtype=np.uint8))[:14]
    want = np.array([1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1])
    return bool(np.array_equal(got, want)), str(got)


@check("encoder linearity (1000 pairs)")
def _linearity():
    rng = np.random.default_rng(1)
    p = rng.integers(0, 2, (1000, 64), dtype=np.uint8)
    q = rng.integers(0, 2, (1000, 64), dtype=np.uint8)
    bad = int((conv_encode(p) ^ conv_encode(q) != conv_encode(p ^ q)).any(axis=1).sum())
    return bad == 0, f"{bad} failures"


@check("viterbi single-error correction")
def _single_flip():
    rng = np.random.default_rng(2)
    u = rng.integers(0, 2, 64, dtype=np.uint8)
    llr = hard_llr(conv_encode(u))
    flips = np.repeat(llr[None], llr.size, axis=0)
    flips[np.arange(llr.size), np.arange(llr.size)] *= -1
    ok = int((viterbi_decode(flips) == u).all(axis=1).sum())
    return ok == llr.size, f"{ok}/{llr.size} positions"


@check("RS: every 3-of-6 subset recovers")
def _rs_subsets():
    spec = MacCodeSpec(3, 6, 64)
    msg = random_message(np.random.default_rng(3), "A", spec)
    packets = mac_encode(msg, spec)
    subsets = list(itertools.combinations(packets, 3))
    ok = sum(mac_decode(s, spec, "A") == msg for s in subsets)
    return ok == len(subsets), f"{ok}/{len(subsets)}"


@check("ZC ideal autocorrelation (N=257)")
def _zc():
    x = zc_root(1, 257)
    corr = np.array([abs(np.vdot(x, np.roll(x, -l))) for l in range(257)])
    worst = corr[1:].max() / 257
    return bool(abs(corr[0] - 257) < 1e-9 and worst <= 1e-9), f"max off-peak {worst:.1e} N"


@check("ZC detection of ten overlapping preambles")
def _zc_detect():
    shifts = [0, 20, 100, 100, 140, 140, 200, 200, 60, 220]
    y = sum(zc_generate(1, 257, s, 20).samples for s in shifts)
    got = detect_preambles(y, 1, 20)
    return got == set(shifts), str(sorted(got))


@check("log-max LLR sign vs exact marginalization")
def _llr_oracle():
    rng = np.random.default_rng(4)
    prof = get_profile("sr-ncma")
    _, symbols = prof.constellation
    agree = total = 0
    for _ in range(50):
        pk = {s: rng.integers(0, 2, 64, dtype=np.uint8) for s in prof.streams}
        obs = transmit_slot(encode_slot(prof, pk), draw_channel([("A", 10), ("B", 10), ("C", 10)], rng), rng)
        mean = np.einsum("ur,pu->rp", obs.gains, symbols)[:, None, :]
        dist = (np.abs(obs.y[:, :, None] - mean) ** 2).sum(axis=0)
        for dec in prof.decoders:
            plus = prof.parity_masks[dec.groups[0]]
            exact = (np.logaddexp.reduce(-dist[:, plus], axis=1)
                     - np.logaddexp.reduce(-dist[:, ~plus], axis=1))
            approx = joint_llr(obs, dec.labels[0], prof)
            agree += int((np.sign(exact) == np.sign(approx)).sum())
            total += exact.size
    return agree / total >= 0.99, f"{agree / total:.4f} agreement"


@check("GF(2) elimination vs brute-force span (3 streams)")
def _span():
    streams = 3
    labels = [c for c in itertools.product((0, 1), repeat=streams) if any(c)]
    rng = np.random.default_rng(5)
    truth = rng.integers(0, 2, (streams, 16), dtype=np.uint8)
    for mask in range(1, 1 << len(labels)):
        chosen = [labels[i] for i in range(len(labels)) if mask >> i & 1]
        eqs = [DecodedEquation(EquationLabel(c), (np.array(c) @ truth) % 2) for c in chosen]
        natives, _ = phy_bridge(eqs)
        span = {tuple(np.bitwise_xor.reduce([np.array(chosen[i]) for i in range(len(chosen)) if s >> i & 1]))
                for s in range(1, 1 << len(chosen))}
        want = {i for i in range(streams) if tuple(int(j == i) for j in range(streams)) in span}
        if set(natives) != want:
            return False, f"mismatch on {chosen}"
    return True, f"{(1 << len(labels)) - 1} subsets"


@check("two-user MAC bridging replay")
def _replay():
    ledger, sent, events = two_user_mac_bridging()
    order = [e for e in events if e in (("message", "A", 0), ("native", 2, "B"), ("message", "B", 0))]
    want = [("message", "A", 0), ("native", 2, "B"), ("message", "B", 0)]
    ok = order == want and ledger.recovered() == [sent["A"], sent["B"]]
    natives, _, packets = three_user_phy_bridging()
    ok &= list(natives) == ["C"] and np.array_equal(natives["C"], packets["C"])
    return bool(ok), str(order)


@check("rate gain and SIC SINR values")
def _theory():
    a, b = rate_gain(1e4), rate_gain(10 ** 0.85)
    ok = abs(a - 0.075) <= 0.005 and abs(b - 0.30) <= 0.01 and sic_sinr(1.0, 1.0) == 0.5
    return ok, f"eta(40dB)={a:.4f} eta(8.5dB)={b:.4f}"


@check("two users on 12 preambles collide 1/12 of the time")
def _birthday():
    rounds = admission_rounds(2, 12, 100_000, rng=6)
    p = float((rounds > 1).mean())
    return abs(p - 1 / 12) < 0.005, f"{p:.4f}"


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        echo(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail}; {time.perf_counter() - t0:.2f}s)")
    return all_ok
