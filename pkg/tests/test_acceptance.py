"""Acceptance suite: one test (or test group) per criterion, each marked
with `@pytest.mark.criterion`; the terminal summary prints a PASS/FAIL line
per criterion.

Criterion 9 is asserted exactly as specified.  See the repository notes for
the analysis of its feasibility: each passive error sample accumulates the
medium-access delay noise of up to three independent frames, so the stated
per-frame deviation cannot keep 99% of samples inside the window; the
companion test right below it demonstrates the same pipeline passing the
bound when the per-frame dispersion matches the hardware measurements the
bound came from.
"""

import json
import random
import time

import jsonschema
import pytest

import importlib.resources

from awdl import chanseq, cli, pcap, sim, sync, wire
from awdl.chanseq import LoadState, SocialChannels, build_sequence
from awdl.election import ProtocolVersion
from awdl.node import NodeConfig
from awdl.sim import Action, ClockModel, LinkQuality, MonitorSpec, NodeSpec, Scenario
from awdl.wire import MacAddress

from generators import random_action_frame, random_data_frame
from test_wire import golden_data_bytes, golden_psf_bytes

TU = 1024
AW = 16 * TU


def mac(last: int) -> MacAddress:
    return MacAddress(bytes([0x02, 0, 0, 0, 0, last]))


def joins(ids):
    return tuple(Action(at_us=0, kind="join", node=n) for n in ids)


# ---------------------------------------------------------------------------
# 1. Codec round-trip volume


@pytest.mark.criterion(1, "10k action + 10k data frames round-trip both ways in < 30 s")
def test_criterion_01_codec_roundtrip_volume():
    started = time.monotonic()
    rng = random.Random(0xA3D1)
    for _ in range(10_000):
        frame = random_action_frame(rng)
        encoded = wire.encode_action_frame(frame)
        decoded = wire.decode_action_frame(encoded)
        assert decoded == frame
        assert wire.encode_action_frame(decoded) == encoded
    for _ in range(10_000):
        frame = random_data_frame(rng)
        encoded = wire.encode_data_frame(frame)
        decoded = wire.decode_data_frame(encoded)
        assert decoded == frame
        assert wire.encode_data_frame(decoded) == encoded
    assert time.monotonic() - started < 30.0


# ---------------------------------------------------------------------------
# 2. Golden vectors


@pytest.mark.criterion(2, "hand-assembled golden frames decode to documented values")
def test_criterion_02_golden_vectors():
    # (1) PSF with the full periodic TLV set
    psf = wire.decode_action_frame(golden_psf_bytes())
    assert str(psf.envelope.bssid) == "00:25:00:ff:94:73"
    assert psf.header.category == 127
    assert psf.header.oui == bytes.fromhex("0017f2")
    assert psf.header.awdl_type == 8
    assert psf.header.subtype is wire.AfSubtype.PSF
    assert [t.type_byte() for t in psf.tlvs] == [4, 18, 5, 24, 20, 6, 12, 21]
    assert wire.encode_action_frame(psf) == golden_psf_bytes()

    # (2) MIF carrying the documented Version TLV bytes 15 02 00 31 01
    mif_body = (
        bytes([127, 0x00, 0x17, 0xF2, 8, 0x10, 3, 0])
        + (42).to_bytes(4, "little")
        + (40).to_bytes(4, "little")
        + bytes.fromhex("1502003101")
    )
    mif = wire.decode_action_frame(mif_body, body_only=True)
    assert mif.header.subtype is wire.AfSubtype.MIF
    assert mif.tlvs == (wire.VersionTlv(major=3, minor=1, device_class=1),)

    # (3) data frame: SNAP header, magic 0x0304, EtherType 0x86dd
    data = wire.decode_data_frame(golden_data_bytes())
    assert str(data.envelope.bssid) == "00:25:00:ff:94:73"
    assert data.ethertype == 0x86DD
    assert data.sequence_number == 42
    assert wire.encode_data_frame(data) == golden_data_bytes()

    # (4) synchronization parameters TLV with deployed constants
    sync_value = (
        bytes.fromhex("2c" "4000" "06" "00" "1000" "b801" "0000" "1000" "1000" "0000" "03030303")
        + bytes.fromhex("0a0b0c0d0e0f")
        + bytes.fromhex("04" "00" "0f27" "0000")
        + bytes.fromhex("0f000003ffff")
        + bytes.fromhex("2c00") * 16
    )
    (sp,) = wire.decode_tlvs(bytes([4]) + len(sync_value).to_bytes(2, "little") + sync_value)
    assert (sp.tx_channel, sp.tx_counter, sp.master_channel) == (44, 64, 6)
    assert (sp.aw_period, sp.af_period, sp.presence_mode) == (16, 440, 4)
    assert (sp.ext_min, sp.ext_max_multicast, sp.ext_max_unicast, sp.ext_max_af) == (3, 3, 3, 3)
    assert sp.aw_seq_number == 9999
    assert str(sp.master_address) == "0a:0b:0c:0d:0e:0f"

    # (5) channel sequence block: 15+1 two-byte entries, fill 0xffff, step 3
    seq_value = bytes.fromhex("0f010003ffff") + bytes.fromhex("2c01") * 8 + bytes.fromhex("0601") + bytes.fromhex("2c01") * 7
    (cs,) = wire.decode_tlvs(bytes([18]) + len(seq_value).to_bytes(2, "little") + seq_value)
    seq = cs.sequence
    assert seq.count == 15 and seq.step == 3 and seq.fill_channel == 0xFFFF
    assert len(seq.entries) == 16
    assert [e.channel for e in seq.entries] == [44] * 8 + [6] + [44] * 7
    assert all(e.flags == 1 for e in seq.entries)  # opclass byte carried opaquely

    # (6) election parameters v2 with sync parent distinct from master
    v2_value = (
        bytes.fromhex("0a0b0c0d0e0f")
        + bytes.fromhex("102030405060")
        + (7).to_bytes(4, "little")
        + (2).to_bytes(4, "little")
        + (530).to_bytes(4, "little")
        + (512).to_bytes(4, "little")
        + (3).to_bytes(4, "little")
    )
    (v2,) = wire.decode_tlvs(bytes([24]) + len(v2_value).to_bytes(2, "little") + v2_value)
    assert str(v2.master_address) == "0a:0b:0c:0d:0e:0f"
    assert str(v2.sync_address) == "10:20:30:40:50:60"
    assert (v2.master_metric, v2.self_metric, v2.distance_to_master) == (530, 512, 2)

    # (7) synchronization tree: parent chain up to the top master
    tree_value = bytes.fromhex("102030405060") + bytes.fromhex("0a0b0c0d0e0f")
    (tree,) = wire.decode_tlvs(bytes([20]) + len(tree_value).to_bytes(2, "little") + tree_value)
    assert [str(m) for m in tree.path] == ["10:20:30:40:50:60", "0a:0b:0c:0d:0e:0f"]


# ---------------------------------------------------------------------------
# 3. Slot-mapping oracle


@pytest.mark.criterion(3, "slot mapping equals brute force over all 2^16 indices; airtimes exact")
def test_criterion_03_slot_mapping_oracle():
    social = SocialChannels()
    cases = [
        (LoadState.LOW_POWER, None, 0.25),
        (LoadState.IDLE, None, 0.375),
        (LoadState.DATA_INFRA_50, 36, 0.50),
        (LoadState.DATA_INFRA_75, 36, 0.75),
        (LoadState.DATA, None, 1.0),
    ]
    for state, ap, airtime in cases:
        slot_map = build_sequence(state, social, ap)
        expanded = []
        for slot in range(16):
            expanded.extend([slot_map.slots[slot]] * 4)  # brute-force unroll
        for i in range(1 << 16):
            assert chanseq.channel_at(slot_map, i) == expanded[i % 64]
        assert slot_map.slots[8] == 6  # 1-indexed slot 9
        assert chanseq.airtime_fraction(slot_map) == airtime


# ---------------------------------------------------------------------------
# 4. Timing arithmetic


@pytest.mark.criterion(4, "sequence period 1,048,576 us; guard/window efficiency figures")
def test_criterion_04_timing_arithmetic():
    assert chanseq.sequence_period_micros() == 1_048_576
    assert sync.guard_usable_fraction(64, 3) == 0.90625
    assert chanseq.ew_efficiency(8, 3, 16) == 0.125
    assert chanseq.ew_efficiency(8, 3, 64) >= 0.78


# ---------------------------------------------------------------------------
# 5. Election convergence over random topologies


def random_topology(seed: int):
    rng = random.Random(seed)
    n = rng.randint(3, 10)
    ids = [f"n{i}" for i in range(n)]
    specs = tuple(
        NodeSpec(
            ids[i],
            NodeConfig(
                address=mac(i + 1),
                version=rng.choice([ProtocolVersion.V2, ProtocolVersion.V3]),
                rng_seed=i,
            ),
        )
        for i in range(n)
    )
    links = {}
    for i in range(1, n):  # random spanning tree keeps it connected
        j = rng.randrange(i)
        links[(min(i, j), max(i, j))] = LinkQuality(rssi=-45)
    for _ in range(rng.randrange(n)):
        i, j = rng.sample(range(n), 2)
        links[(min(i, j), max(i, j))] = LinkQuality(rssi=-45)
    link_t = tuple((ids[a], ids[b], q) for (a, b), q in links.items())
    return Scenario(duration_us=4_300_000, nodes=specs, links=link_t, actions=joins(ids))


@pytest.mark.criterion(5, "100 random topologies converge to the argmax metric within 2 s of the bump")
def test_criterion_05_election_convergence():
    for seed in range(100):
        scn = random_topology(seed)
        res = sim.run_scenario(scn, seed=seed)  # raises on any sync-tree cycle
        info = {
            str(sn.spec.config.address): (sn.node.election.self_metric, sn.spec.config.version)
            for sn in res.nodes.values()
        }
        winner = max(info, key=lambda k: (info[k][0], k))
        assert sim.converged_master(res) == winner, f"seed {seed}"
        last_bump = 2_000_000  # all nodes join at 0 and bump together
        last_change = max(t for t, _, _ in res.collectors.master_timeline)
        assert last_change <= last_bump + 2_000_000, f"seed {seed}: converged at {last_change}"
        if any(v is ProtocolVersion.V3 for _, v in info.values()):
            assert info[winner][1] is ProtocolVersion.V3, f"seed {seed}: v2 beat v3"


# ---------------------------------------------------------------------------
# 6. Master churn


@pytest.mark.criterion(6, "departure detected in (96, 96+28] AWs with zero survivor resyncs")
def test_criterion_06_master_churn():
    ids = ["a", "b", "c"]
    scn = Scenario(
        duration_us=16_000_000,
        nodes=(
            NodeSpec("a", NodeConfig(address=mac(1), version=ProtocolVersion.V3, rng_seed=1)),
            NodeSpec("b", NodeConfig(address=mac(2), version=ProtocolVersion.V2, rng_seed=2)),
            NodeSpec("c", NodeConfig(address=mac(3), version=ProtocolVersion.V2, rng_seed=3)),
        ),
        links=(
            ("a", "b", LinkQuality(rssi=-45)),
            ("a", "c", LinkQuality(rssi=-45)),
            ("b", "c", LinkQuality(rssi=-45)),
        ),
        actions=joins(ids) + (Action(at_us=8_000_000, kind="leave_after_next_af", node="a"),),
    )
    res = sim.run_scenario(scn, seed=6)
    probe = sim.master_churn_probe(res, "a")
    assert set(probe["detection_delay_aw"]) == {"b", "c"}
    for nid, delay in probe["detection_delay_aw"].items():
        assert 96 < delay <= 96 + 28, (nid, delay)
    assert probe["resync_events"] == 0
    assert sim.converged_master(res) is not None


# ---------------------------------------------------------------------------
# 7. Cluster merge


@pytest.mark.criterion(7, "two converged clusters merge under the higher-metric master in bounded time")
def test_criterion_07_cluster_merge():
    ids = ["a", "b", "c", "d", "e", "f"]
    bridge_at = 20_000_000
    scn = Scenario(
        duration_us=30_000_000,
        nodes=tuple(
            NodeSpec(n, NodeConfig(address=mac(i + 1), version=ProtocolVersion.V3, rng_seed=i))
            for i, n in enumerate(ids)
        ),
        links=(
            ("a", "b", LinkQuality(rssi=-45)),
            ("b", "c", LinkQuality(rssi=-45)),
            ("d", "e", LinkQuality(rssi=-45)),
            ("e", "f", LinkQuality(rssi=-45)),
        ),
        actions=joins(ids) + (Action(at_us=bridge_at, kind="set_link", a="c", b="d", rssi=-45),),
    )
    res = sim.run_scenario(scn, seed=7)
    metrics = {str(sn.spec.config.address): sn.node.election.self_metric for sn in res.nodes.values()}
    winner = max(metrics, key=lambda k: (metrics[k], k))
    assert sim.converged_master(res) == winner
    # both chains are three deep from the bridge link
    depth = 3
    af_period_us = 110 * TU
    timeout_slack_us = 96 * AW
    last_change = max(t for t, _, _ in res.collectors.master_timeline)
    assert last_change <= bridge_at + depth * af_period_us + timeout_slack_us


# ---------------------------------------------------------------------------
# 8. Offset recovery through the exported captures


def biased_slave_scenario(bias: int) -> Scenario:
    return Scenario(
        duration_us=16_000_000,
        nodes=(
            NodeSpec("m", NodeConfig(address=mac(1), version=ProtocolVersion.V3, rng_seed=1)),
            NodeSpec(
                "s",
                NodeConfig(address=mac(2), version=ProtocolVersion.V2, rng_seed=2),
                clock=ClockModel(grid_bias_us=bias),
            ),
        ),
        links=(("m", "s", LinkQuality(rssi=-50)),),
        monitors=(
            MonitorSpec("m44", channel=0, schedule=((5_000_000, 44),)),
            MonitorSpec(
                "m6",
                channel=0,
                clock=ClockModel(offset_us=7_777),
                schedule=((5_000_000, 44), (9_000_000, 6)),
            ),
        ),
        actions=joins(["m", "s"]),
    )


@pytest.mark.criterion(8, "injected offsets recovered within ±1 us; calibration exact / jitter-bounded")
@pytest.mark.parametrize("bias", [-5000, -1500, 500, 2500, 5000])
def test_criterion_08_sync_estimator_recovers_offsets(tmp_path, capsys, bias):
    res = sim.run_scenario(biased_slave_scenario(bias), seed=8)
    a, b = tmp_path / "a.pcap", tmp_path / "b.pcap"
    pcap.write_pcap(str(a), res.captures["m44"])
    pcap.write_pcap(str(b), res.captures["m6"])
    code = cli.main(["analyze-sync", str(a), str(b), "--master", str(mac(1))])
    out = capsys.readouterr().out
    assert code == 0
    report = json.loads(out)
    assert report["sample_count"] > 30
    assert abs(report["mean_us"] - (-bias)) <= 1
    # the inter-sniffer clock offset is recovered exactly without jitter
    assert report["calibration"]["offset_us"] == -7_777


@pytest.mark.criterion(8, "injected offsets recovered within ±1 us; calibration exact / jitter-bounded")
def test_criterion_08_calibration_jitter_bound():
    rng = random.Random(88)
    frames = [wire.encode_action_frame(random_action_frame(random.Random(i))) for i in range(101)]
    base = [
        pcap.CaptureRecord("a", 1_000_000 + 9_000 * i, -40, f) for i, f in enumerate(frames)
    ]
    jittered = [
        pcap.CaptureRecord("b", r.timestamp_us - 1_000 + rng.randint(-40, 40), -40, r.frame)
        for r in base
    ]
    offset, matched = sim.calibrate_records(base, jittered)
    assert matched == 101
    assert abs(offset - 1_000) <= 40


# ---------------------------------------------------------------------------
# 9 + 10. Twenty-minute run: sync bound and sequence wrap


def twenty_minute_scenario(jitter_us: int) -> Scenario:
    return Scenario(
        duration_us=20 * 60 * 1_000_000,
        nodes=(
            NodeSpec(
                "m",
                NodeConfig(address=mac(1), version=ProtocolVersion.V3, rng_seed=1, af_period_tu=110),
                clock=ClockModel(drift_ppm=50, jitter_us=jitter_us),
            ),
            NodeSpec(
                "s",
                NodeConfig(address=mac(2), version=ProtocolVersion.V2, rng_seed=2, af_period_tu=110),
                clock=ClockModel(drift_ppm=-50, jitter_us=jitter_us),
            ),
        ),
        links=(("m", "s", LinkQuality(rssi=-50)),),
        monitors=(MonitorSpec("m44", channel=0, schedule=((10_000_000, 44),)),),
        actions=joins(["m", "s"]),
    )


@pytest.fixture(scope="module")
def twenty_minute_run():
    res = sim.run_scenario(twenty_minute_scenario(jitter_us=1000), seed=9)
    stats = sim.measure_sync_error(res, mac(1))
    return res, stats


@pytest.mark.criterion(9, "drift ±50 ppm + per-frame jitter σ=1 ms keeps ≥99% of error samples within 3 TU")
def test_criterion_09_sync_bound_at_stated_jitter(twenty_minute_run):
    _, stats = twenty_minute_run
    assert stats.count > 5000
    assert stats.fraction_within_3tu >= 0.99, (
        f"measured {stats.fraction_within_3tu:.4f} (mean {stats.mean_us:.0f} us, "
        f"stddev {stats.stddev_us:.0f} us) - each passive sample stacks the "
        "medium-access delay of up to three independent frames, so at 1 ms "
        "per-frame deviation the 3 TU bound cannot reach 99%; see "
        "notes/decisions.md for the full analysis and the companion test for "
        "the hardware-matched dispersion"
    )


def test_sync_bound_with_halved_delay_scale():
    """Companion to criterion 9: the resync loop itself leaves no residual
    error (zero-noise runs recover offsets exactly), so the bound is purely
    a race between the injected per-frame delay noise and the fixed 3 TU
    window.  At roughly half the stated delay scale the same pipeline holds
    the 99% figure with full margin."""
    res = sim.run_scenario(twenty_minute_scenario(jitter_us=577), seed=9)
    stats = sim.measure_sync_error(res, mac(1))
    assert stats.count > 5000
    assert 300 <= stats.stddev_us <= 800
    assert stats.fraction_within_3tu >= 0.99


@pytest.mark.criterion(10, "exactly one 16-bit sequence wrap (~18 min) with no slot discontinuity")
def test_criterion_10_sequence_wrap(twenty_minute_run):
    res, _ = twenty_minute_run
    seqs = []
    for rec in res.captures["m44"]:
        try:
            frame = wire.decode_action_frame(rec.frame)
        except wire.DecodeError:
            continue
        if frame.envelope.source == mac(1):
            sp = frame.find(wire.SyncParamsTlv)
            seqs.append((rec.timestamp_us, sp.aw_seq_number))
    wraps = [
        (t_prev, t)
        for (t_prev, s_prev), (t, s) in zip(seqs, seqs[1:])
        if s < s_prev - 32768
    ]
    assert len(wraps) == 1
    wrap_minutes = wraps[0][1] / 60_000_000
    assert 17 < wrap_minutes < 19
    # continuity: sequence deltas always match elapsed time, wrap included
    for (t_prev, s_prev), (t, s) in zip(seqs, seqs[1:]):
        if t - t_prev > 500_000:
            continue
        expected = round((t - t_prev) / AW)
        assert abs(sync.seq_delta(s, s_prev) - expected) <= 1, (t_prev, t)


# ---------------------------------------------------------------------------
# 11. Staggered-join replay


@pytest.mark.criterion(11, "bundled staggered-join scenario reproduces the adoption narrative")
def test_criterion_11_staggered_join_replay():
    doc = json.loads(
        importlib.resources.files("awdl").joinpath("scenarios/staggered_join.json").read_text()
    )
    res = sim.run_scenario(sim.scenario_from_dict(doc), seed=1)
    addr = {nid: str(sn.spec.config.address) for nid, sn in res.nodes.items()}
    masters = res.collectors.master_timeline
    metrics = res.collectors.metric_timeline

    def master_of(nid, at):
        current = None
        for t, n, m in masters:
            if n == nid and t <= at:
                current = m
        return current

    # the first joiner creates the cluster as its own master
    assert master_of("desktop_v2", 1_000_000) == addr["desktop_v2"]
    # the newer-protocol phone takes over after its bump
    assert master_of("desktop_v2", 40_000_000) == addr["phone_v3"]
    assert master_of("phone_v3", 40_000_000) == addr["phone_v3"]
    # the second older device adopts the phone rather than a v2 peer
    assert master_of("laptop_v2", 70_000_000) == addr["phone_v3"]
    # the tablet briefly adopts the phone before its own bump wins
    assert master_of("tablet_v3", 91_000_000) == addr["phone_v3"]
    assert master_of("tablet_v3", 100_000_000) == addr["tablet_v3"]
    for nid in addr:
        assert master_of(nid, 119_000_000) == addr["tablet_v3"]

    # every node shows the initial metric 60 before bumping into its band
    for nid, version in [
        ("desktop_v2", ProtocolVersion.V2),
        ("phone_v3", ProtocolVersion.V3),
        ("laptop_v2", ProtocolVersion.V2),
        ("tablet_v3", ProtocolVersion.V3),
    ]:
        values = [m for _, n, m in metrics if n == nid]
        lo, hi = version.metric_range
        assert values[0] == 60
        assert len(values) == 2 and lo <= values[1] <= hi


# ---------------------------------------------------------------------------
# 12. Analytic slot-overlap substitute for the throughput figures


@pytest.mark.criterion(12, "slot overlap matches the analytic intersection and scales with airtime")
def test_criterion_12_overlap_analytics():
    social = SocialChannels()
    data = build_sequence(LoadState.DATA, social)
    infra = build_sequence(LoadState.DATA_INFRA_50, social, ap_channel=36)
    # by hand from the two patterns: primary slots 0-3/9-11 plus the shared
    # secondary slot 8 coincide; the AP slots cannot (36 vs 44)
    overlap = chanseq.common_slots(data, infra)
    assert [k for k, _ in overlap] == [0, 1, 2, 3, 8, 9, 10, 11]
    assert len(overlap) / 16 == 0.5

    ladder = [
        build_sequence(LoadState.LOW_POWER, social),
        build_sequence(LoadState.IDLE, social),
        build_sequence(LoadState.DATA_INFRA_50, social, ap_channel=36),
        build_sequence(LoadState.DATA_INFRA_75, social, ap_channel=36),
        build_sequence(LoadState.DATA, social),
    ]
    overlaps = [len(chanseq.common_slots(m, data)) for m in ladder]
    airtimes = [chanseq.airtime_fraction(m) for m in ladder]
    assert overlaps == sorted(overlaps)
    assert airtimes == sorted(airtimes)
    assert overlaps == [int(a * 16) for a in airtimes]


# ---------------------------------------------------------------------------
# 13. Command-line end-to-end loop


@pytest.fixture(scope="module")
def schema():
    text = importlib.resources.files("awdl").joinpath("schemas/dissect.schema.json").read_text()
    return json.loads(text)


@pytest.mark.criterion(13, "simulate -> pcap -> dissect validates; analyze-sync matches the collector ±1 us")
def test_criterion_13_cli_end_to_end(tmp_path, capsys, schema):
    scenario_doc = {
        "duration_s": 16,
        "nodes": [
            {"id": "m", "address": str(mac(1)), "version": "v3", "rng_seed": 1},
            {
                "id": "s",
                "address": str(mac(2)),
                "version": "v2",
                "rng_seed": 2,
                "clock": {"grid_bias_us": 900},
            },
        ],
        "links": [
            {"a": "m", "b": "s", "rssi": -50},
            {"a": "m", "b": "m44", "rssi": -40},
            {"a": "s", "b": "m44", "rssi": -40},
            {"a": "m", "b": "m6", "rssi": -40},
            {"a": "s", "b": "m6", "rssi": -40},
        ],
        "monitors": [
            {"id": "m44", "channel": 0, "schedule": [{"at_s": 5, "channel": 44}]},
            {
                "id": "m6",
                "channel": 0,
                "clock": {"offset_us": 4321},
                "schedule": [{"at_s": 5, "channel": 44}, {"at_s": 9, "channel": 6}],
            },
        ],
        "actions": [
            {"at_s": 0, "type": "join", "node": "m"},
            {"at_s": 0, "type": "join", "node": "s"},
        ],
    }
    scenario_path = tmp_path / "scenario.json"
    scenario_path.write_text(json.dumps(scenario_doc))
    out_dir = tmp_path / "out"

    assert cli.main(["simulate", str(scenario_path), "--seed", "13", "--out", str(out_dir)]) == 0
    capsys.readouterr()
    a, b = out_dir / "m44.pcap", out_dir / "m6.pcap"
    assert a.exists() and b.exists()

    # dissect both captures; every object must validate against the schema
    for capture in (a, b):
        assert cli.main(["dissect", str(capture)]) == 0
        objects = json.loads(capsys.readouterr().out)
        assert objects
        for obj in objects:
            jsonschema.validate(obj, schema)

    # the analyzer applied to the exported captures reproduces the internal
    # collector sample for sample
    assert cli.main(["analyze-sync", str(a), str(b), "--master", str(mac(1))]) == 0
    report = json.loads(capsys.readouterr().out)
    scn = sim.scenario_from_dict(scenario_doc)
    internal = sim.measure_sync_error(sim.run_scenario(scn, seed=13), mac(1))
    assert report["sample_count"] == internal.count
    for got, want in zip(report["samples"], internal.samples):
        assert abs(got["error_us"] - want.error_us) <= 1
    assert abs(report["mean_us"] - (-900)) <= 1
