"""Seeded Monte Carlo throughput sweeps over user C's SNR.

Each (profile, SNR point, trial) is one run of ``slots`` time slots. A run
keeps three receivers fed by the same transmissions: MUD decoders only,
MUD plus PHY-layer bridging, and everything plus MAC-layer bridging. Users
move to their next message when the full receiver has recovered the current
one (or after sending all ``total_packets`` of it); the two reduced
receivers observe the same slots, so their recovered sets are subsets of
the full receiver's and the stage decomposition is monotone by construction.

Runs of one profile advance in lockstep so every slot's decoder bank is one
batched call over all runs.

Seed splitting: run (point index i, trial t) uses
``master_seed XOR blake2b("i:t")`` (64 bits) as the root of a SeedSequence
whose three children drive message data, channel gains and noise. The
profile is deliberately not part of the hash, so profiles see common
channel draws at the same point and trial.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .analysis import tally_throughput
from .bridge import STAGES, MacLedger, mac_bridge, phy_bridge
from .channel import FADING_MODELS, draw_channel, transmit_slot
from .detect import run_decoder_bank_batch, sic_decode_batch
from .fec import DEFAULT_CODE
from .macode import MacCodeSpec, Message, mac_encode, random_message
from .profiles import PROFILES, Profile, encode_slot, get_profile

CSV_HEADER = ("profile", "snr_c_db", "th_a", "th_b", "th_c", "th_sys", "stage", "slots", "seed")
USERS = ("A", "B", "C")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ScenarioConfig:
    profiles: tuple[str, ...] = ("sic-noma", "bpsk-ncma", "qpsk-ncma", "dr-ncma", "sr-ncma")
    snr_a: float = 8.0
    snr_b: float = 8.0
    snr_c: tuple[float, ...] = (8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0)
    payload_bits: int = 64
    l_a: int = 8
    l_b: int = 16
    l_c: int = 32
    window_factor: int = 2
    slots: int = 1000
    trials: int = 10
    seed: int = 0
    fading: str = "rayleigh"
    antennas: int = 2
    out: str | None = None

    def validate(self) -> "ScenarioConfig":
        if not self.profiles:
            raise ConfigError("profiles", "at least one profile is required")
        for p in self.profiles:
            if p not in PROFILES:
                raise ConfigError("profiles", f"unknown profile {p!r}; choose from {sorted(PROFILES)}")
        if not self.snr_c:
            raise ConfigError("snr_c", "sweep needs at least one SNR point")
        for name in ("slots", "trials", "antennas", "window_factor"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(name, f"must be >= 1, got {getattr(self, name)}")
        if self.payload_bits < 8 or self.payload_bits % 8:
            raise ConfigError("payload_bits", "must be a positive multiple of 8")
        for name in ("l_a", "l_b", "l_c"):
            value = getattr(self, name)
            if value < 1 or value * self.window_factor > 255:
                raise ConfigError(name, f"need 1 <= {name} and {name} * window_factor <= 255")
        if self.fading not in FADING_MODELS:
            raise ConfigError("fading", f"choose from {FADING_MODELS}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")
        return self

    def mac_specs(self) -> dict[str, MacCodeSpec]:
        return {u: MacCodeSpec(l, l * self.window_factor, self.payload_bits)
                for u, l in zip(USERS, (self.l_a, self.l_b, self.l_c))}

    def snrs(self, snr_c: float) -> tuple[float, float, float]:
        return (self.snr_a, self.snr_b, float(snr_c))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["profiles"] = list(self.profiles)
        d["snr_c"] = list(self.snr_c)
        return d

    def content_hash(self) -> str:
        """sha256 over the canonical JSON of every field except the output path."""
        d = self.to_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


_LIST_KEYS = {"profiles": str, "snr_c": float}


def _coerce(key: str, raw: str):
    types = {f.name: f.type for f in fields(ScenarioConfig)}
    if key not in types:
        raise ConfigError(key, "unknown configuration key")
    try:
        if key in _LIST_KEYS:
            return tuple(_LIST_KEYS[key](v.strip()) for v in raw.split(",") if v.strip())
        default = getattr(ScenarioConfig, key)
        if key == "out":
            return raw or None
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, int):
            return int(raw, 0)
        return raw
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r}: {exc}") from None


def parse_config(text: str, overrides: dict | None = None) -> ScenarioConfig:
    """Flat ``key = value`` lines (``#`` comments); list values are comma separated."""
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        if raw is not None:
            values[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    return ScenarioConfig(**values).validate()


def load_config(path: str | Path | None, overrides: dict | None = None) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8") if path else ""
    return parse_config(text, overrides)


def run_seed(master: int, point: int, trial: int) -> int:
    digest = hashlib.blake2b(f"{point}:{trial}".encode(), digest_size=8).digest()
    return int(master) ^ int.from_bytes(digest, "little")


@dataclass
class ResultRow:
    profile: str
    snr_c_db: float
    th_a: float
    th_b: float
    th_c: float
    th_sys: float
    stage: str
    slots: int
    seed: int
    stderr: dict[str, float] = field(default_factory=dict, compare=False)

    def csv_fields(self) -> list[str]:
        return [self.profile, repr(float(self.snr_c_db)), repr(float(self.th_a)),
                repr(float(self.th_b)), repr(float(self.th_c)), repr(float(self.th_sys)),
                self.stage, str(self.slots), str(self.seed)]


class _UserTx:
    """One user's position in its current message."""

    def __init__(self, user: str, spec: MacCodeSpec):
        self.user = user
        self.spec = spec
        self.msg_id = -1
        self.sent = spec.total_packets
        self.coded: list[np.ndarray] = []
        self.messages: dict[int, Message] = {}

    def next_packets(self, count: int, rng, acked: bool) -> tuple[int, int, list[np.ndarray]]:
        if acked or self.sent + count > self.spec.total_packets:
            self.msg_id += 1
            self.sent = 0
            msg = random_message(rng, self.user, self.spec, self.msg_id)
            self.messages[self.msg_id] = msg
            self.coded = [bits for _, bits in mac_encode(msg, self.spec)]
        first = self.sent
        self.sent += count
        return self.msg_id, first, self.coded[first:first + count]


class _Run:
    def __init__(self, cfg: ScenarioConfig, profile: Profile, point: int, snr_c: float, trial: int):
        self.profile = profile
        self.point, self.trial = point, trial
        self.snr = list(zip(USERS, cfg.snrs(snr_c)))
        self.fading, self.antennas = cfg.fading, cfg.antennas
        self.seed = run_seed(cfg.seed, point, trial)
        data, chan, noise = np.random.SeedSequence(self.seed).spawn(3)
        self.rng_data = np.random.default_rng(data)
        self.rng_chan = np.random.default_rng(chan)
        self.rng_noise = np.random.default_rng(noise)
        specs = cfg.mac_specs()
        self.tx = {u: _UserTx(u, specs[u]) for u in USERS}
        self.ledgers = {stage: MacLedger(specs, stage) for stage in STAGES}

    def transmit(self, slot: int):
        full = self.ledgers["mac"]
        packets, manifest = {}, {}
        for user in self.profile.users:
            tx = self.tx[user]
            streams = self.profile.user_streams(user)
            acked = tx.msg_id >= 0 and full.is_recovered(user, tx.msg_id)
            msg_id, first, bits = tx.next_packets(len(streams), self.rng_data, acked)
            for j, (stream, pkt) in enumerate(zip(streams, bits)):
                packets[stream] = pkt
                manifest[stream] = (user, msg_id, first + j)
        for ledger in self.ledgers.values():
            ledger.open_slot(slot, self.profile.streams, manifest)
        blocks = encode_slot(self.profile, packets, DEFAULT_CODE)
        realization = draw_channel(self.snr, self.rng_chan, self.fading, self.antennas)
        return transmit_slot(blocks, realization, self.rng_noise, slot=slot)

    def receive(self, slot: int, equations) -> None:
        n = len(equations)
        mud = {e.label.native_index: e.packet for e in equations if e.label.is_native}
        natives, residual = phy_bridge(equations, len(self.profile.streams)) if equations else ({}, [])
        self.ledgers["mud"].ingest_resolved(slot, mud, [], n)
        self.ledgers["phy"].ingest_resolved(slot, natives, [], n)
        self.ledgers["mac"].ingest_resolved(slot, natives, residual, n)
        for ledger in self.ledgers.values():
            mac_bridge(ledger)

    def wrong_recoveries(self, stage: str) -> int:
        """Recovered messages that differ from what the user actually sent."""
        ledger = self.ledgers[stage]
        return sum(1 for (u, m), st in ledger.messages.items()
                   if st.message is not None and st.message != self.tx[u].messages[m])

    def throughput(self, stage: str, n_slots: int) -> dict[str, float]:
        ledger = self.ledgers[stage]
        counts = {u: ledger.n_recovered(u) for u in USERS}
        rec = tally_throughput(counts, n_slots, ledger.specs)
        return {**{u: rec.per_user[u] for u in USERS}, "sys": rec.system}


def sic_order(profile: Profile, snrs: Sequence[tuple[str, float]]) -> list[str]:
    """Users by descending configured SNR; ties go to the later user id."""
    snr = dict(snrs)
    return sorted(profile.users, key=lambda u: (-snr[u], -profile.users.index(u)))


def simulate_runs(runs: Sequence[_Run], n_slots: int,
                  progress: Callable[[int], None] | None = None) -> None:
    """Advance runs of a single profile through ``n_slots`` slots in lockstep."""
    if not runs:
        return
    profile = runs[0].profile
    groups: dict[tuple, list[int]] = {}
    for i, r in enumerate(runs):
        groups.setdefault(tuple(sic_order(profile, r.snr)), []).append(i)
    for slot in range(n_slots):
        obs = [r.transmit(slot) for r in runs]
        decoded = [None] * len(runs)
        if profile.uses_sic:
            for order, idx in groups.items():
                for i, eqs in zip(idx, sic_decode_batch([obs[i] for i in idx], order, profile)):
                    decoded[i] = eqs
        else:
            decoded = run_decoder_bank_batch(obs, profile)
        for r, eqs in zip(runs, decoded):
            r.receive(slot, eqs)
        if progress is not None:
            progress(slot)


def run_scenario(cfg: ScenarioConfig, log: Callable[[str], None] | None = None) -> list[ResultRow]:
    """Throughput rows for every profile, SNR point and stage (mean over trials)."""
    cfg.validate()
    rows = []
    for name in cfg.profiles:
        profile = get_profile(name)
        t0 = time.perf_counter()
        runs = [_Run(cfg, profile, i, s, t) for i, s in enumerate(cfg.snr_c) for t in range(cfg.trials)]
        simulate_runs(runs, cfg.slots)
        for i, snr_c in enumerate(cfg.snr_c):
            point_runs = [r for r in runs if r.point == i]
            for stage in STAGES:
                th = [r.throughput(stage, cfg.slots) for r in point_runs]
                mean = {k: float(np.mean([t[k] for t in th])) for k in th[0]}
                se = ({k: float(np.std([t[k] for t in th], ddof=1) / np.sqrt(len(th))) for k in th[0]}
                      if len(th) > 1 else {k: 0.0 for k in th[0]})
                rows.append(ResultRow(name, float(snr_c), mean["A"], mean["B"], mean["C"],
                                      mean["sys"], stage, cfg.slots, cfg.seed, se))
        if log is not None:
            log(f"{name}: {len(runs)} runs x {cfg.slots} slots in {time.perf_counter() - t0:.1f}s")
    return rows


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def manifest_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def emit_results(rows: Sequence[ResultRow], path: str | Path,
                 cfg: ScenarioConfig | None = None) -> tuple[Path, Path]:
    """Write the CSV and a JSON run manifest (config, hash, seeds, standard errors)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(rows_to_csv(rows).encode("utf-8"))
    manifest = {
        "csv": path.name,
        "columns": list(CSV_HEADER),
        "rows": len(rows),
        "stderr": [{"profile": r.profile, "snr_c_db": r.snr_c_db, "stage": r.stage, **r.stderr}
                   for r in rows],
    }
    if cfg is not None:
        manifest["config"] = cfg.to_dict()
        manifest["config_sha256"] = cfg.content_hash()
        manifest["seed_rule"] = "master_seed XOR blake2b-64('point:trial'), little endian"
        manifest["run_seeds"] = {f"{i}:{t}": run_seed(cfg.seed, i, t)
                                 for i in range(len(cfg.snr_c)) for t in range(cfg.trials)}
    mpath = manifest_path(path)
    mpath.write_bytes((json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return path, mpath


def read_results(path: str | Path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        return [ResultRow(p, float(s), float(a), float(b), float(c), float(t), stage,
                          int(n), int(seed))
                for p, s, a, b, c, t, stage, n, seed in reader]
