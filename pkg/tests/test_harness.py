import json

import numpy as np
import pytest

from ncma.harness import (CSV_HEADER, ConfigError, ResultRow, ScenarioConfig, _Run, emit_results,
                          load_config, manifest_path, parse_config, read_results, rows_to_csv,
                          run_scenario, run_seed, sic_order, simulate_runs)
from ncma.profiles import get_profile


def small(**kw):
    base = dict(snr_c=(8.0, 12.0), slots=60, trials=2, payload_bits=64)
    base.update(kw)
    return ScenarioConfig(**base).validate()


def test_defaults_follow_the_experiment_design():
    cfg = ScenarioConfig()
    assert cfg.snr_a == cfg.snr_b == 8.0
    assert min(cfg.snr_c) == 8.0 and max(cfg.snr_c) == 14.0
    assert cfg.slots == 1000 and cfg.trials == 10
    assert (cfg.l_a, cfg.l_b, cfg.l_c) == (8, 16, 32)


def test_parse_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep\nprofiles = bpsk-ncma, sr-ncma\nsnr_c = 8, 10\nslots = 50  # short\n"
                    "seed = 0x10\nfading = phase\n")
    cfg = load_config(path, {"slots": "70", "out": None})
    assert cfg.profiles == ("bpsk-ncma", "sr-ncma")
    assert cfg.snr_c == (8.0, 10.0)
    assert cfg.slots == 70 and cfg.seed == 16 and cfg.fading == "phase"
    assert load_config(None).slots == 1000


@pytest.mark.parametrize("text,field", [
    ("colour = red", "colour"),
    ("slots = many", "slots"),
    ("slots = 0", "slots"),
    ("trials = 0", "trials"),
    ("profiles = turbo", "profiles"),
    ("snr_c = ", "snr_c"),
    ("payload_bits = 12", "payload_bits"),
    ("l_c = 200", "l_c"),
    ("fading = rician", "fading"),
    ("seed = -1", "seed"),
    ("slots", "line 1"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_content_hash_tracks_the_config():
    a, b = small(), small()
    assert a.content_hash() == b.content_hash()
    assert small(out="x.csv").content_hash() == a.content_hash()
    for change in ({"seed": 1}, {"slots": 61}, {"snr_c": (8.0, 13.0)}, {"antennas": 1}):
        assert small(**change).content_hash() != a.content_hash()


def test_seed_rule_is_documented_xor():
    assert run_seed(0, 0, 0) ^ run_seed(5, 0, 0) == 5
    assert len({run_seed(0, i, t) for i in range(5) for t in range(10)}) == 50


def test_csv_round_trip_and_format(tmp_path):
    rows = [ResultRow("sr-ncma", 8.0, 0.1, 1 / 3, 0.7, 1.1333333333333333, "mac", 100, 7),
            ResultRow("bpsk-ncma", 14.0, 0.0, 0.2, 0.96, 1.16, "mud", 100, 7)]
    path, mpath = emit_results(rows, tmp_path / "out" / "r.csv")
    raw = path.read_bytes()
    assert raw.startswith(",".join(CSV_HEADER).encode() + b"\n")
    assert b"\r" not in raw
    assert read_results(path) == rows
    assert mpath == manifest_path(path) and mpath.name == "r.manifest.json"


def test_empty_rows_give_header_only(tmp_path):
    assert rows_to_csv([]) == ",".join(CSV_HEADER) + "\n"
    path, _ = emit_results([], tmp_path / "e.csv")
    assert read_results(path) == []


def test_manifest_contents(tmp_path):
    cfg = small(profiles=("bpsk-ncma",), slots=20)
    rows = run_scenario(cfg)
    _, mpath = emit_results(rows, tmp_path / "m.csv", cfg)
    man = json.loads(mpath.read_text())
    assert man["config_sha256"] == cfg.content_hash()
    assert man["config"]["slots"] == 20
    assert man["run_seeds"]["1:1"] == run_seed(cfg.seed, 1, 1)
    assert len(man["stderr"]) == len(rows)


def test_same_seed_gives_identical_csv(tmp_path):
    cfg = small(profiles=("sic-noma", "sr-ncma"), slots=40)
    a = rows_to_csv(run_scenario(cfg))
    b = rows_to_csv(run_scenario(cfg))
    assert a == b
    assert rows_to_csv(run_scenario(small(profiles=("sic-noma", "sr-ncma"), slots=40, seed=1))) != a


def test_rows_cover_every_profile_point_and_stage():
    cfg = small(slots=100)
    rows = run_scenario(cfg)
    assert len(rows) == len(cfg.profiles) * len(cfg.snr_c) * 3
    by = {(r.profile, r.snr_c_db, r.stage): r for r in rows}
    for p in cfg.profiles:
        for s in cfg.snr_c:
            mud, phy, mac = (by[(p, s, st)] for st in ("mud", "phy", "mac"))
            for col in ("th_a", "th_b", "th_c", "th_sys"):
                assert getattr(mud, col) <= getattr(phy, col) <= getattr(mac, col)
            if p in ("sic-noma", "bpsk-ncma"):
                assert mac.th_c <= 1.0 and mac.th_sys <= 3.0
            if p in ("dr-ncma", "sr-ncma"):
                assert mac.th_sys <= 4.0
            assert mac.th_sys == pytest.approx(mac.th_a + mac.th_b + mac.th_c)


def test_recovered_messages_are_the_ones_sent():
    cfg = small(slots=150, trials=2)
    for name in cfg.profiles:
        runs = [_Run(cfg, get_profile(name), i, s, t)
                for i, s in enumerate(cfg.snr_c) for t in range(cfg.trials)]
        simulate_runs(runs, cfg.slots)
        assert all(r.wrong_recoveries(st) == 0 for r in runs for st in ("mud", "phy", "mac"))


def test_near_noiseless_ceiling():
    cfg = ScenarioConfig(profiles=("sr-ncma",), snr_a=30.0, snr_b=30.0, snr_c=(30.0,),
                         slots=1000, trials=1)
    (row,) = [r for r in run_scenario(cfg) if r.stage == "mac"]
    assert row.th_sys == pytest.approx(4.0, rel=0.02)


def test_sic_below_ncma_for_user_c():
    cfg = ScenarioConfig(profiles=("sic-noma", "bpsk-ncma"), snr_c=(8.0,), slots=300, trials=3)
    rows = {r.profile: r for r in run_scenario(cfg) if r.stage == "mac"}
    assert rows["sic-noma"].th_c < rows["bpsk-ncma"].th_c


def test_sic_order_descending_snr_ties_to_later_user():
    p = get_profile("sic-noma")
    assert sic_order(p, [("A", 8), ("B", 8), ("C", 8)]) == ["C", "B", "A"]
    assert sic_order(p, [("A", 8), ("B", 12), ("C", 10)]) == ["B", "C", "A"]


def test_profiles_share_channel_draws():
    cfg = small()
    r1 = _Run(cfg, get_profile("bpsk-ncma"), 1, 12.0, 1)
    r2 = _Run(cfg, get_profile("sr-ncma"), 1, 12.0, 1)
    assert np.array_equal(r1.transmit(0).gains, r2.transmit(0).gains)
