import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncma.rag import (DEFAULT_THRESHOLD, admission_rounds, circular_correlation, contention_round,
                      detect_preambles, expected_rounds, group_users, run_rag,
                      singleton_distribution, zc_generate, zc_root)

N_ZC, N_CS = 257, 20
SHIFTS = list(range(0, 12 * N_CS, N_CS))


def test_root_sequence_values():
    seq = zc_generate(1, N_ZC, 0)
    assert seq.samples[0] == 1 + 0j
    assert np.allclose(np.abs(seq.samples), 1.0)
    m = np.arange(N_ZC)
    assert np.allclose(zc_root(5, N_ZC), np.exp(-1j * np.pi * 5 * m * (m + 1) / N_ZC))


def test_cyclic_shift_is_a_rotation():
    seq = zc_generate(1, N_ZC, 40, N_CS)
    assert np.allclose(seq.samples, np.roll(zc_root(1, N_ZC), -40))
    assert seq.shift == 40


def test_ideal_autocorrelation_brute_force():
    x = zc_root(1, N_ZC)
    corr = np.array([abs(np.sum(x * np.conj(np.roll(x, -lag)))) for lag in range(N_ZC)])
    assert corr[0] == pytest.approx(N_ZC)
    assert corr[1:].max() <= 1e-9 * N_ZC


def test_fft_correlation_matches_direct_sum(rng):
    y = rng.standard_normal(N_ZC) + 1j * rng.standard_normal(N_ZC)
    ref = zc_root(1, N_ZC)
    direct = [np.sum(np.roll(ref, -lag) * np.conj(y)) for lag in range(N_ZC)]
    assert np.allclose(circular_correlation(y, ref), direct)


@pytest.mark.parametrize("args", [(1, 256, 0), (0, 257, 0), (257, 257, 0), (1, 257, 257),
                                  (1, 257, -20)])
def test_invalid_parameters(args):
    with pytest.raises(ValueError):
        zc_generate(*args)
    with pytest.raises(ValueError):
        zc_generate(1, 257, 30, N_CS)


def test_single_noiseless_preamble():
    assert detect_preambles(zc_generate(1, N_ZC, 100, N_CS).samples) == {100}


def test_ten_users_with_duplicate_shifts(rng):
    shifts = [0, 20, 60, 100, 100, 140, 140, 200, 200, 220]
    for _ in range(100):
        phases = np.exp(2j * np.pi * rng.random(len(shifts)))
        y = sum(p * zc_generate(1, N_ZC, s).samples for p, s in zip(phases, shifts))
        assert detect_preambles(y, 1, N_CS) == set(shifts)


def test_any_noiseless_distinct_shift_set_is_detected_exactly(rng):
    for k in range(1, 13):
        for _ in range(10):
            used = rng.choice(SHIFTS, k, replace=False)
            gains = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * 3
            y = sum(g * zc_generate(1, N_ZC, int(s)).samples for g, s in zip(gains, used))
            assert detect_preambles(y) == set(int(s) for s in used)


def test_pure_noise_false_alarm_rate():
    rng = np.random.default_rng(8)
    trials = 3000
    hits = sum(bool(detect_preambles(rng.standard_normal(N_ZC) + 1j * rng.standard_normal(N_ZC)))
               for _ in range(trials))
    assert hits / trials <= 0.01
    assert DEFAULT_THRESHOLD == 20.0


# -- contention ---------------------------------------------------------------

def test_distinct_choices_admit_everyone():
    choices = np.array([[0, 1, 2, 3], [5, 5, 2, 3]])
    got = contention_round(choices, np.ones_like(choices, dtype=bool), 12)
    assert got.tolist() == [[True] * 4, [False, False, True, True]]


def test_pending_mask_is_respected():
    choices = np.array([[4, 4, 7]])
    pending = np.array([[True, False, True]])
    assert contention_round(choices, pending, 12).tolist() == [[True, False, True]]


def test_two_users_collide_one_time_in_twelve():
    rounds = admission_rounds(2, 12, 100_000, rng=3)
    assert abs((rounds > 1).mean() - 1 / 12) < 0.004


@pytest.mark.parametrize("n,m", [(3, 4), (4, 3), (5, 5)])
def test_singleton_distribution_against_enumeration(n, m):
    counts = np.zeros(n + 1)
    for picks in itertools.product(range(m), repeat=n):
        c = np.bincount(picks, minlength=m)
        counts[int((c == 1).sum())] += 1
    assert np.allclose(singleton_distribution(n, m), counts / m ** n)


def test_expected_rounds_edge_cases():
    assert expected_rounds(1, 12) == pytest.approx(1.0)
    assert expected_rounds(2, 12) == pytest.approx(12 / 11)
    with pytest.raises(ValueError):
        expected_rounds(2, 1)
    with pytest.raises(ValueError):
        admission_rounds(0, 12)


def test_simulated_rounds_match_analytic_for_small_k():
    for k in (3, 6):
        sim = admission_rounds(k, 12, 40_000, rng=k).mean()
        assert sim == pytest.approx(expected_rounds(k, 12), rel=0.02)


def test_run_rag_single_user():
    res = run_rag([("u0", 30.0)], rng=1)
    assert res.rounds == 1 and res.admitted_round == {"u0": 1}
    assert [g.members for g in res.plan.groups] == [("u0",)]


def test_run_rag_admits_everyone_and_groups(rng):
    users = [(f"u{i}", s) for i, s in enumerate([25, 22, 18, 9, 7, 6, 5, 8])]
    res = run_rag(users, rng)
    assert set(res.admitted_round) == {u for u, _ in users}
    res.plan.validate()
    assert len(res.collisions) == res.rounds == max(res.admitted_round.values())
    with pytest.raises(ValueError):
        run_rag([], rng)


# -- grouping -----------------------------------------------------------------

def members(plan):
    return [g.members for g in plan.groups]


def test_three_strong_one_weak():
    plan = group_users([("s1", 25), ("s2", 22), ("s3", 20), ("w1", 8)])
    assert members(plan) == [("s1", "w1"), ("s2",), ("s3",)]
    assert [g.role for g in plan.groups] == ["ncma", "tdma", "tdma"]


def test_one_strong_three_weak_both_policies():
    users = [("s1", 25), ("w1", 8), ("w2", 7), ("w3", 9)]
    assert members(group_users(users)) == [("s1", "w2"), ("w1", "w3")]
    assert members(group_users(users, weak_first=True)) == [("w2", "w1", "w3"), ("s1",)]


def test_six_weak_users_form_two_triples():
    plan = group_users([(f"w{i}", 5 + i) for i in range(6)])
    assert [len(g) for g in members(plan)] == [3, 3]


def test_four_weak_users_leave_a_singleton():
    plan = group_users([(f"w{i}", 5 + i) for i in range(4)])
    assert [len(g) for g in members(plan)] == [3, 1]


def test_threshold_is_configurable():
    users = [("a", 12), ("b", 8)]
    assert members(group_users(users)) == [("b", "a")]
    assert members(group_users(users, strong_threshold_db=10)) == [("a", "b")]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-5, 40, allow_nan=False), max_size=15), st.booleans())
def test_every_user_lands_in_exactly_one_group(snrs, weak_first):
    users = [(f"u{i}", s) for i, s in enumerate(snrs)]
    plan = group_users(users, weak_first=weak_first)
    flat = [u for g in plan.groups for u in g.members]
    assert sorted(flat) == sorted(u for u, _ in users)
    assert all(1 <= len(g.members) <= 3 for g in plan.groups)
    strong = {u for u, s in users if s >= 15}
    # strong users never share a group with each other
    assert all(len(set(g.members) & strong) <= 1 for g in plan.groups)
