import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncma.modem import (BPSK, QPSK_SPLIT, QPSK_STANDARD, bpsk_modulate, hard_demodulate,
                        pnc_bit_map, qpsk_split_modulate, qpsk_standard_modulate)

bits = st.lists(st.integers(0, 1), min_size=2, max_size=64).map(
    lambda v: np.array(v[: len(v) // 2 * 2], dtype=np.uint8))


def test_bpsk_mapping():
    blk = bpsk_modulate([0, 1, 1, 0])
    assert blk.symbols.tolist() == [1, -1, -1, 1]
    assert blk.scheme is BPSK and len(blk) == 4


def test_qpsk_standard_mapping_uses_consecutive_pairs():
    blk = qpsk_standard_modulate([0, 0, 0, 1, 1, 0, 1, 1])
    assert blk.symbols.tolist() == [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]
    with pytest.raises(ValueError):
        qpsk_standard_modulate([0, 1, 1])


def test_split_qpsk_rails_carry_separate_codewords():
    blk = qpsk_split_modulate([0, 1, 1], [1, 1, 0])
    assert np.array_equal(blk.symbols.real, [1, -1, -1])
    assert np.array_equal(blk.symbols.imag, [-1, -1, 1])
    with pytest.raises(ValueError):
        qpsk_split_modulate([0, 1], [1, 1, 0])


def test_normalized_power(rng):
    v = rng.integers(0, 2, 4000, dtype=np.uint8)
    for blk in (bpsk_modulate(v), qpsk_standard_modulate(v), qpsk_split_modulate(v[:2000], v[2000:])):
        assert np.mean(np.abs(blk.normalized()) ** 2) == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(bits)
def test_hard_demodulation_round_trips(v):
    assert np.array_equal(hard_demodulate(bpsk_modulate(v)), v)
    assert np.array_equal(hard_demodulate(qpsk_standard_modulate(v)), v)
    half = v.size // 2
    i, q = hard_demodulate(qpsk_split_modulate(v[:half], v[half:]))
    assert np.array_equal(i, v[:half]) and np.array_equal(q, v[half:])


@settings(max_examples=200, deadline=None)
@given(bits, st.integers(0, 2 ** 32 - 1))
def test_pnc_map_of_symbol_product_is_xor(v, seed):
    w = np.random.default_rng(seed).integers(0, 2, v.size, dtype=np.uint8)
    prod = (bpsk_modulate(v).symbols * bpsk_modulate(w).symbols).real.astype(int)
    assert np.array_equal(pnc_bit_map(prod), v ^ w)


def test_pnc_map_scalar_and_domain():
    assert pnc_bit_map(1) == 0 and pnc_bit_map(-1) == 1
    with pytest.raises(ValueError):
        pnc_bit_map([1, 0])


def test_split_rails_xor_with_bpsk_rail():
    # I rail of a split-QPSK user times a BPSK user's symbol is their XOR
    rng = np.random.default_rng(3)
    a, ci, cq = (rng.integers(0, 2, 50, dtype=np.uint8) for _ in range(3))
    s = qpsk_split_modulate(ci, cq).symbols
    prod = (bpsk_modulate(a).symbols.real * s.real).astype(int)
    assert np.array_equal(pnc_bit_map(prod), a ^ ci)
    assert QPSK_SPLIT.average_power == QPSK_STANDARD.average_power == 2.0
