"""PHY decoder bank: reduced-constellation MUD and XOR-CD PNC decoding, plus the
successive interference cancellation baseline.

Per-bit LLRs use the log-max rule over the joint constellation of all users
and both antennas:

    LLR = min_{points with parity -1} d - min_{points with parity +1} d,
    d(x) = sum_r |y_r - sum_s h_{s,r} x_s|^2

which is the exact LLR with each log-sum-exp replaced by its largest term,
scaled by sigma^2. The bank divides by sigma^2 before Viterbi decoding so the
decoder's LLR clip keeps its usual meaning.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import SlotObservation
from .fec import DEFAULT_CODE, ConvCodeSpec, viterbi_decode
from .framing import CRC_BITS, crc_ok, label_mask
from .modem import BPSK, QPSK_SPLIT
from .profiles import Decoder, EquationLabel, Profile, encode_user, get_profile


@dataclass
class DecodedEquation:
    label: EquationLabel
    packet: np.ndarray
    slot: int = 0

    def __eq__(self, other):
        return (isinstance(other, DecodedEquation) and self.label == other.label
                and self.slot == other.slot and np.array_equal(self.packet, other.packet))


def _stack(observations: Sequence[SlotObservation]):
    y = np.stack([o.y for o in observations])
    gains = np.stack([o.gains for o in observations])
    sigma2 = np.array([o.sigma2 for o in observations], dtype=np.float64)
    return y, gains, sigma2


def constellation_distances(y: np.ndarray, gains: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """Two-antenna squared distances, shape (batch, samples, points).

    ``y`` is (batch, antennas, samples); ``gains`` is (batch, users, antennas)
    or per-sample (batch, users, antennas, samples); ``symbols`` (points, users).
    The result is a view of a points-major array, which keeps the subset
    minima in ``decoder_llr`` on contiguous memory.
    """
    if gains.ndim == 3:
        mean = np.einsum("bur,pu->pbr", gains, symbols)[..., None]
    else:
        mean = np.einsum("burk,pu->pbrk", gains, symbols)
    diff = y[None] - mean
    dist = (diff.real ** 2 + diff.imag ** 2).sum(axis=2)
    return np.moveaxis(dist, 0, -1)


def _subset_min(dist_pm: np.ndarray, idx: np.ndarray) -> np.ndarray:
    out = dist_pm[idx[0]].copy()
    for i in idx[1:]:
        np.minimum(out, dist_pm[i], out=out)
    return out


def decoder_llr(dist: np.ndarray, decoder: Decoder, profile: Profile) -> np.ndarray:
    """Log-max LLRs of a decoder's codeword from precomputed distances."""
    dist_pm = np.moveaxis(dist, -1, 0)
    parts = []
    for group in decoder.groups:
        plus = profile.parity_masks[group]
        parts.append(_subset_min(dist_pm, np.flatnonzero(~plus))
                     - _subset_min(dist_pm, np.flatnonzero(plus)))
    if len(parts) == 1:
        return parts[0]
    return np.stack(parts, axis=-1).reshape(dist.shape[:-2] + (-1,))


def _find_decoder(profile: Profile, target) -> Decoder:
    if isinstance(target, Decoder):
        return target
    for dec in profile.decoders + sum(profile.native_decoders, ()):
        if target in dec.labels:
            return dec
    raise ValueError(f"label {target} is not scheduled in profile {profile.name}")


def joint_llr(obs: SlotObservation, label, profile: Profile | str, k: int | None = None):
    """Log-max LLR(s) for the codeword that carries ``label``.

    Returns the full vector (one entry per coded bit) or entry ``k``. The
    noise variance is not used: the value is the distance difference.
    """
    profile = get_profile(profile)
    dec = _find_decoder(profile, label)
    _, symbols = profile.constellation
    dist = constellation_distances(obs.y[None], obs.gains[None], symbols)
    llr = decoder_llr(dist, dec, profile)[0]
    return llr if k is None else float(llr[k])


def rmud_llr(obs: SlotObservation, stream: str, profile: Profile | str) -> np.ndarray:
    """Native-stream LLRs read straight off the stream's rail sign.

    Kept as a separate path from the parity-product rule in ``joint_llr`` so
    the two can be checked against each other.
    """
    profile = get_profile(profile)
    rails, symbols = profile.constellation
    user, sub = profile.stream_owner[profile.stream_index(stream)]
    scheme = profile.scheme(user)
    dist = constellation_distances(obs.y[None], obs.gains[None], symbols)[0]

    def rail_llr(name):
        col = profile.rails.index(name)
        return dist[:, rails[:, col] < 0].min(axis=1) - dist[:, rails[:, col] > 0].min(axis=1)

    if scheme is BPSK:
        return rail_llr(user)
    if scheme is QPSK_SPLIT:
        return rail_llr(f"{user}.{'IQ'[sub]}")
    out = np.empty(2 * dist.shape[0])
    out[0::2] = rail_llr(f"{user}.I")
    out[1::2] = rail_llr(f"{user}.Q")
    return out


def _llr_scale(sigma2: np.ndarray) -> np.ndarray:
    return np.where(sigma2 > 0, 1.0 / np.where(sigma2 > 0, sigma2, 1.0), 1.0)


def _frame_len(n_samples: int, code: ConvCodeSpec) -> int:
    frame = n_samples // 2 - code.termination
    if 2 * (frame + code.termination) != n_samples or frame <= CRC_BITS:
        raise ValueError(f"{n_samples} samples do not hold a framed, encoded packet")
    return frame


def _segments(payloads: np.ndarray, decoder: Decoder, frame: int, slots, out) -> None:
    """CRC-check decoded payloads and append the validated equations to ``out``."""
    for b, payload in enumerate(payloads):
        frames = [payload[i * frame:(i + 1) * frame] for i in range(len(decoder.labels))]
        if all(crc_ok(f, lab.weight, label_mask(lab.coeffs))
               for f, lab in zip(frames, decoder.labels)):
            for f, lab in zip(frames, decoder.labels):
                out[b].append(DecodedEquation(lab, f[:-CRC_BITS].copy(), slots[b]))


def _decode_llrs(llrs: list[np.ndarray], decoders: Sequence[Decoder], frame: int, slots,
                 code: ConvCodeSpec, out) -> None:
    by_len: dict[int, list[int]] = {}
    for i, llr in enumerate(llrs):
        by_len.setdefault(llr.shape[-1], []).append(i)
    for idx in by_len.values():
        payloads = viterbi_decode(np.stack([llrs[i] for i in idx]), code)
        for j, i in enumerate(idx):
            _segments(payloads[j], decoders[i], frame, slots, out)


def run_decoder_bank_batch(observations: Sequence[SlotObservation], profile: Profile | str,
                           code: ConvCodeSpec = DEFAULT_CODE) -> list[list[DecodedEquation]]:
    """Decoder bank over many slots at once (they may come from independent runs)."""
    profile = get_profile(profile)
    out: list[list[DecodedEquation]] = [[] for _ in observations]
    if not observations or not profile.decoders:
        return out
    y, gains, sigma2 = _stack(observations)
    frame = _frame_len(y.shape[-1], code)
    _, symbols = profile.constellation
    dist = constellation_distances(y, gains, symbols)
    scale = _llr_scale(sigma2)[:, None]
    llrs = [decoder_llr(dist, dec, profile) * scale for dec in profile.decoders]
    _decode_llrs(llrs, profile.decoders, frame, [o.slot for o in observations], code, out)
    # keep the bank's decoder order regardless of how lengths were grouped
    order = {lab: i for i, d in enumerate(profile.decoders) for lab in d.labels}
    for eqs in out:
        eqs.sort(key=lambda e: order[e.label])
    return out


def run_decoder_bank(obs: SlotObservation, profile: Profile | str,
                     code: ConvCodeSpec = DEFAULT_CODE) -> list[DecodedEquation]:
    """All CRC-validated equations the profile's decoders recover from one slot."""
    return run_decoder_bank_batch([obs], profile, code)[0]


def _single_user_llr(y, gains, user_idx, remaining, sigma2, decoder, rails_of_user, amp):
    # Interference from undecoded users is treated as circular Gaussian noise
    # with power sum |h|^2 (unit-power symbols) on each antenna.
    power = np.abs(gains) ** 2
    others = [i for i in remaining if i != user_idx]
    var = sigma2.reshape((-1,) + (1,) * (power.ndim - 2))
    if others:
        var = var + power[:, others].sum(axis=1)
    var = np.maximum(var, 1e-12)  # noiseless last stage
    h = gains[:, user_idx]
    h = h if h.ndim == 3 else h[..., None]
    var = var if np.ndim(var) == 3 else var[..., None]
    z = np.conj(h) * y / var
    parts = []
    for group in decoder.groups:
        (rail,) = group
        comp = z.real if rails_of_user[rail] in ("", "I") else z.imag
        parts.append(4.0 * amp * comp.sum(axis=1))
    if len(parts) == 1:
        return parts[0]
    return np.stack(parts, axis=-1).reshape(y.shape[0], -1)


def sic_decode_batch(observations: Sequence[SlotObservation], order: Sequence[str],
                     profile: Profile | str, code: ConvCodeSpec = DEFAULT_CODE
                     ) -> list[list[DecodedEquation]]:
    """Successive interference cancellation over many slots at once."""
    profile = get_profile(profile)
    if sorted(order) != sorted(profile.users):
        raise ValueError(f"SIC order {list(order)} must cover users {list(profile.users)}")
    out: list[list[DecodedEquation]] = [[] for _ in observations]
    if not observations:
        return out
    y, gains, sigma2 = _stack(observations)
    y = y.copy()
    frame = _frame_len(y.shape[-1], code)
    slots = [o.slot for o in observations]
    alive = np.arange(len(observations))
    remaining = list(range(len(profile.users)))
    rail_names = []
    for u, scheme in zip(profile.users, profile.schemes):
        rail_names += [""] if scheme is BPSK else ["I", "Q"]

    for user in order:
        if alive.size == 0:
            break
        ui = profile.users.index(user)
        amp = 1.0 / np.sqrt(profile.scheme(user).average_power)
        got: list[list[DecodedEquation]] = [[] for _ in alive]
        for dec in profile.native_decoders[ui]:
            llr = _single_user_llr(y[alive], gains[alive], ui, remaining, sigma2[alive],
                                   dec, rail_names, amp)
            part: list[list[DecodedEquation]] = [[] for _ in alive]
            _decode_llrs([llr], [dec], frame, [slots[a] for a in alive], code, part)
            for b in range(alive.size):
                got[b] += part[b]
        n_streams = len(profile.user_streams(user))
        keep = []
        for b, a in enumerate(alive):
            if len(got[b]) != n_streams:
                continue
            out[a] += got[b]
            packets = {profile.streams[e.label.native_index]: e.packet for e in got[b]}
            x = encode_user(profile, user, packets, code).normalized()
            h = gains[a, ui]
            y[a] -= (h if h.ndim == 2 else h[:, None]) * x[None, :]
            keep.append(a)
        alive = np.array(keep, dtype=int)
        remaining.remove(ui)
    return out


def sic_decode(obs: SlotObservation, order: Sequence[str], profile: Profile | str = "sic-noma",
               code: ConvCodeSpec = DEFAULT_CODE) -> list[DecodedEquation]:
    """Decode users strongest-first, cancelling each success; stop at the first failure."""
    return sic_decode_batch([obs], order, profile, code)[0]
