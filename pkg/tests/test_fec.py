import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncma.fec import DEFAULT_CODE, ConvCodeSpec, conv_encode, hard_llr, viterbi_decode

G_A, G_B = 0o133, 0o171


def reference_encode(bits):
    """Bit-serial shift register, written independently of the library."""
    state = 0
    out = []
    for b in list(bits) + [0] * 6:
        reg = (int(b) << 6) | state  # newest bit in the MSB of a 7-bit register
        out.append(bin(reg & G_A).count("1") & 1)
        out.append(bin(reg & G_B).count("1") & 1)
        state = reg >> 1
    return np.array(out, dtype=np.uint8)


payloads = st.lists(st.integers(0, 1), min_size=1, max_size=96).map(
    lambda v: np.array(v, dtype=np.uint8))


def test_impulse_response_matches_generators():
    code = conv_encode(np.array([1, 0, 0, 0, 0, 0, 0], dtype=np.uint8))
    a, b = code[0::2][:7], code[1::2][:7]
    assert a.tolist() == [1, 0, 1, 1, 0, 1, 1]  # 133 octal = 1011011
    assert b.tolist() == [1, 1, 1, 1, 0, 0, 1]  # 171 octal = 1111001


def test_zero_payload_gives_zero_codeword():
    assert not conv_encode(np.zeros(64, dtype=np.uint8)).any()


def test_codeword_length_and_termination():
    u = np.ones(10, dtype=np.uint8)
    assert conv_encode(u).shape == (2 * (10 + 6),)
    assert DEFAULT_CODE.payload_length(32) == 10
    with pytest.raises(ValueError):
        DEFAULT_CODE.payload_length(33)
    with pytest.raises(ValueError):
        conv_encode(np.zeros(0, dtype=np.uint8))


@settings(max_examples=200, deadline=None)
@given(payloads)
def test_encoder_matches_bit_serial_reference(u):
    assert np.array_equal(conv_encode(u), reference_encode(u))


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 96).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n))))
def test_encoder_is_linear(pair):
    p, q = (np.array(v, dtype=np.uint8) for v in pair)
    assert np.array_equal(conv_encode(p) ^ conv_encode(q), conv_encode(p ^ q))


def test_batched_encode_equals_rowwise(rng):
    u = rng.integers(0, 2, (5, 3, 40), dtype=np.uint8)
    out = conv_encode(u)
    assert out.shape == (5, 3, 92)
    for idx in np.ndindex(5, 3):
        assert np.array_equal(out[idx], reference_encode(u[idx]))


def test_noiseless_round_trip(rng):
    u = rng.integers(0, 2, (500, 64), dtype=np.uint8)
    assert np.array_equal(viterbi_decode(hard_llr(conv_encode(u))), u)


def test_every_single_flip_is_corrected(rng):
    u = rng.integers(0, 2, 64, dtype=np.uint8)
    llr = hard_llr(conv_encode(u))
    flips = np.repeat(llr[None], llr.size, axis=0)
    flips[np.arange(llr.size), np.arange(llr.size)] *= -1
    assert (viterbi_decode(flips) == u).all()


def test_viterbi_is_maximum_likelihood_on_short_payloads(rng):
    # exhaustive oracle: the decoded codeword maximizes correlation with the LLRs
    n = 6
    book = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)
    signs = 1.0 - 2.0 * conv_encode(book)
    llr = rng.normal(0, 1.5, (300, 2 * (n + 6)))
    got = viterbi_decode(llr)
    corr = llr @ signs.T
    best = corr.max(axis=1)
    got_corr = np.einsum("bk,bk->b", llr, 1.0 - 2.0 * conv_encode(got))
    assert np.allclose(got_corr, best, atol=1e-4)


def test_llr_scale_invariance(rng):
    u = rng.integers(0, 2, (200, 64), dtype=np.uint8)
    llr = hard_llr(conv_encode(u)) + rng.normal(0, 0.9, (200, 140))
    base = viterbi_decode(llr, clip=np.inf)
    for c in (0.25, 3.0, 17.0):
        assert np.array_equal(viterbi_decode(c * llr, clip=np.inf), base)


def test_all_zero_llrs_tie_break_to_zero():
    assert not viterbi_decode(np.zeros(2 * (32 + 6))).any()


def test_clipping_bounds_a_single_huge_llr(rng):
    u = rng.integers(0, 2, 64, dtype=np.uint8)
    llr = hard_llr(conv_encode(u), 20.0)  # free distance 10: 9 x 20 > clip 50
    llr[10] = -1e9 * np.sign(llr[10])
    assert np.array_equal(viterbi_decode(llr), u)


def test_decoder_input_validation():
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(33))
    with pytest.raises(ValueError):
        viterbi_decode(np.full(2 * 20, np.nan))
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(2 * 20), payload_length=15)


def test_other_code_spec_round_trips(rng):
    spec = ConvCodeSpec(0o5, 0o7, 3)
    u = rng.integers(0, 2, (20, 30), dtype=np.uint8)
    assert conv_encode(u, spec).shape == (20, 64)
    assert np.array_equal(viterbi_decode(hard_llr(conv_encode(u, spec)), spec), u)
