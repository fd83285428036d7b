"""`awdl` command line tool.

Subcommands:

- `dissect <file>`: decode AWDL frames from a pcap into structured JSON
- `calibrate <a> <b>`: clock offset between two sniffer captures
- `analyze-sync <a> <b> --master <mac>`: sync-error distribution between a
  master and its slaves, from a calibrated dual-sniffer capture
- `simulate <scenario> --seed N --out DIR`: run a scenario and export
  timelines, histograms, captures, and a summary

Exit codes: 0 success, 1 analysis produced nothing (no matches / pairs),
2 usage or unreadable input.  Set AWDL_LOG=debug for diagnostics.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
from pathlib import Path
from typing import Optional

from . import pcap, sim, wire
from .sync import TU_MICROS
from .wire import MacAddress

log = logging.getLogger("awdl")

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_USAGE = 2

HISTOGRAM_BIN_US = 256


class NoCommonFrames(ValueError):
    pass


class NoMasterFrames(ValueError):
    pass


class NoPairs(ValueError):
    pass


# ---------------------------------------------------------------------------
# JSON rendering of decoded frames


def _mac(m: MacAddress) -> str:
    return str(m)


def _channel_sequence_json(seq: wire.ChannelSequence) -> dict:
    return {
        "count": seq.count,
        "encoding": seq.encoding,
        "duplicate_count": seq.duplicate_count,
        "step": seq.step,
        "fill_channel": seq.fill_channel,
        "channel_list": [{"channel": e.channel, "flags": e.flags} for e in seq.entries],
    }


_TLV_NAMES = {
    wire.TlvType.SERVICE_RESPONSE: "service_response",
    wire.TlvType.SYNCHRONIZATION_PARAMETERS: "synchronization_parameters",
    wire.TlvType.ELECTION_PARAMETERS: "election_parameters",
    wire.TlvType.SERVICE_PARAMETERS: "service_parameters",
    wire.TlvType.HT_CAPABILITIES: "ht_capabilities",
    wire.TlvType.DATA_PATH_STATE: "data_path_state",
    wire.TlvType.ARPA: "arpa",
    wire.TlvType.VHT_CAPABILITIES: "vht_capabilities",
    wire.TlvType.CHANNEL_SEQUENCE: "channel_sequence",
    wire.TlvType.SYNCHRONIZATION_TREE: "synchronization_tree",
    wire.TlvType.VERSION: "version",
    wire.TlvType.ELECTION_PARAMETERS_V2: "election_parameters_v2",
}


def tlv_to_json(tlv: wire.Tlv) -> dict:
    out = {"type": tlv.type_byte(), "name": _TLV_NAMES.get(tlv.type_byte(), "unknown")}
    if isinstance(tlv, wire.SyncParamsTlv):
        out.update(
            tx_channel=tlv.tx_channel,
            tx_counter=tlv.tx_counter,
            master_channel=tlv.master_channel,
            guard_time=tlv.guard_time,
            aw_period=tlv.aw_period,
            af_period=tlv.af_period,
            flags=tlv.flags,
            aw_extension_length=tlv.aw_ext_length,
            aw_common_length=tlv.aw_common_length,
            remaining_aw=tlv.remaining_aw,
            ext_min=tlv.ext_min,
            multicast_max=tlv.ext_max_multicast,
            unicast_max=tlv.ext_max_unicast,
            af_max=tlv.ext_max_af,
            master_address=_mac(tlv.master_address),
            presence_mode=tlv.presence_mode,
            reserved=tlv.reserved,
            sequence_number=tlv.aw_seq_number,
            ap_beacon_alignment=tlv.ap_beacon_alignment,
            channel_sequence=(
                _channel_sequence_json(tlv.channel_sequence) if tlv.channel_sequence else None
            ),
        )
    elif isinstance(tlv, wire.ChannelSequenceTlv):
        out["channel_sequence"] = _channel_sequence_json(tlv.sequence)
    elif isinstance(tlv, wire.ElectionParamsTlv):
        out.update(
            flags=tlv.flags,
            id=tlv.id,
            distance_to_master=tlv.distance_to_master,
            master_address=_mac(tlv.master_address),
            master_metric=tlv.master_metric,
            self_metric=tlv.self_metric,
            trailing_hex=tlv.trailing.hex(),
        )
    elif isinstance(tlv, wire.ElectionParamsV2Tlv):
        out.update(
            master_address=_mac(tlv.master_address),
            sync_address=_mac(tlv.sync_address),
            master_counter=tlv.master_counter,
            distance_to_master=tlv.distance_to_master,
            master_metric=tlv.master_metric,
            self_metric=tlv.self_metric,
            self_counter=tlv.self_counter,
            trailing_hex=tlv.trailing.hex(),
        )
    elif isinstance(tlv, wire.SyncTreeTlv):
        out["path"] = [_mac(m) for m in tlv.path]
    elif isinstance(tlv, wire.VersionTlv):
        out.update(major=tlv.major, minor=tlv.minor, device_class=tlv.device_class)
    elif isinstance(tlv, wire.DataPathStateTlv):
        out.update(
            flags=tlv.flags,
            infra_bssid=_mac(tlv.infra_bssid),
            infra_address=_mac(tlv.infra_address),
            awdl_address=_mac(tlv.awdl_address),
            trailing_hex=tlv.trailing.hex(),
        )
    elif isinstance(tlv, wire.UnknownTlv):
        out.update(length=len(tlv.value), value_hex=tlv.value.hex())
    else:  # opaque known types
        out.update(length=len(tlv.encode_value()), value_hex=tlv.encode_value().hex())
    return out


def _envelope_json(env: wire.Dot11Envelope) -> dict:
    return {
        "destination": _mac(env.destination),
        "source": _mac(env.source),
        "bssid": _mac(env.bssid),
        "sequence_number": env.sequence_number,
        "fragment_number": env.fragment_number,
        "duration": env.duration,
    }


def record_to_json(rec: pcap.CaptureRecord) -> dict:
    """Decode one capture record into the dissector's JSON form.  Non-AWDL
    frames carry a `skipped` reason, malformed AWDL frames an `error`."""
    base = {
        "source_id": rec.source_id,
        "timestamp_us": rec.timestamp_us,
        "rssi_dbm": rec.rssi,
    }
    try:
        decoded = wire.dissect_classify(rec.frame)
    except (wire.NotAwdl, wire.BadLlc) as exc:
        base.update(skipped=str(exc))
        return base | {"frame_type": None}
    except wire.DecodeError as exc:
        base.update(error=f"{type(exc).__name__}: {exc}", frame_type=None)
        return base
    if isinstance(decoded, wire.DataFrame):
        base.update(
            frame_type="data",
            envelope=_envelope_json(decoded.envelope),
            data={
                "magic": wire.DATA_MAGIC,
                "sequence_number": decoded.sequence_number,
                "reserved": decoded.reserved,
                "ethertype": decoded.ethertype,
                "payload_length": len(decoded.payload),
                "payload_hex": decoded.payload.hex(),
            },
        )
        return base
    header = decoded.header
    subtype = header.subtype
    base.update(
        frame_type="action",
        envelope=_envelope_json(decoded.envelope) if decoded.envelope else None,
        action={
            "category": header.category,
            "oui": header.oui.hex(":"),
            "type": header.awdl_type,
            "version": {"major": header.version >> 4, "minor": header.version & 0x0F},
            "subtype": subtype.name.lower() if isinstance(subtype, wire.AfSubtype) else subtype,
            "reserved": header.reserved,
            "phy_tx_time_us": header.phy_tx_time,
            "target_tx_time_us": header.target_tx_time,
            "tlvs": [tlv_to_json(t) for t in decoded.tlvs],
        },
    )
    return base


# ---------------------------------------------------------------------------
# Subcommands


def cmd_dissect(args) -> int:
    try:
        records, tail_error = pcap.read_pcap_lenient(args.file)
    except (OSError, pcap.PcapError) as exc:
        print(f"dissect: {exc}", file=sys.stderr)
        return EXIT_USAGE
    objects = []
    for rec in records:
        obj = record_to_json(rec)
        if obj.get("skipped") and not args.verbose:
            continue
        objects.append(obj)
    if tail_error is not None:
        objects.append({"source_id": str(args.file), "error": tail_error, "frame_type": None})
    _write_json_stream(objects, args.json_lines)
    return EXIT_OK


def _write_json_stream(objects, json_lines: bool) -> None:
    if json_lines:
        for obj in objects:
            print(json.dumps(obj, sort_keys=True))
    else:
        print(json.dumps(objects, indent=2, sort_keys=True))


def _load_capture(path: str) -> list:
    return pcap.read_pcap(path, source_id=Path(path).stem)


def cmd_calibrate(args) -> int:
    try:
        rec_a = _load_capture(args.file_a)
        rec_b = _load_capture(args.file_b)
    except (OSError, pcap.PcapError) as exc:
        print(f"calibrate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    offset, matched = sim.calibrate_records(rec_a, rec_b)
    if matched == 0:
        print("calibrate: no frames common to both captures", file=sys.stderr)
        return EXIT_EMPTY
    print(json.dumps({"offset_us": offset, "sample_count": matched}, sort_keys=True))
    return EXIT_OK


def sync_histogram(values, bin_us: int = HISTOGRAM_BIN_US) -> list:
    """Deterministic histogram with bin edges aligned to multiples of the
    bin width."""
    counts: dict = {}
    for v in values:
        start = (v // bin_us) * bin_us
        counts[start] = counts.get(start, 0) + 1
    return [{"start_us": k, "count": counts[k]} for k in sorted(counts)]


def analyze_sync_records(rec_a, rec_b, master: MacAddress) -> dict:
    """Calibrate capture b onto capture a's clock, pair same-window frames,
    and summarize the sync error; raises NoCommonFrames / NoMasterFrames /
    NoPairs."""
    offset, matched = sim.calibrate_records(rec_a, rec_b)
    if matched == 0 and rec_b:
        raise NoCommonFrames("no frames common to both captures")
    merged = sim.merge_captures(rec_a, rec_b)
    has_master = any(
        _source_is(rec, master) for rec in merged
    )
    if not has_master:
        raise NoMasterFrames(f"no action frames from {master}")
    samples = sim.sync_error_samples(merged, master)
    if not samples:
        raise NoPairs("no same-window master/slave frame pairs")
    values = [s.error_us for s in samples]
    bound = 3 * TU_MICROS
    return {
        "master": str(master),
        "calibration": {"offset_us": offset, "sample_count": matched},
        "sample_count": len(samples),
        "mean_us": statistics.fmean(values),
        "stddev_us": statistics.stdev(values) if len(values) > 1 else 0.0,
        "fraction_within_3tu": sum(1 for v in values if abs(v) <= bound) / len(values),
        "histogram": sync_histogram(values),
        "samples": [
            {"time_us": s.time_us, "slave": str(s.slave), "error_us": s.error_us} for s in samples
        ],
    }


def _source_is(rec, master: MacAddress) -> bool:
    try:
        frame = wire.decode_action_frame(rec.frame)
    except wire.DecodeError:
        return False
    return frame.envelope is not None and frame.envelope.source == master


def cmd_analyze_sync(args) -> int:
    try:
        master = MacAddress.parse(args.master)
    except ValueError as exc:
        print(f"analyze-sync: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rec_a = _load_capture(args.file_a)
        rec_b = _load_capture(args.file_b)
    except (OSError, pcap.PcapError) as exc:
        print(f"analyze-sync: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = analyze_sync_records(rec_a, rec_b, master)
    except (NoCommonFrames, NoMasterFrames, NoPairs, sim.InsufficientPairs) as exc:
        print(f"analyze-sync: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def write_collector_files(result: sim.SimResult, out_dir: Path) -> dict:
    """Write the CSV/JSON/pcap exports for one run; returns the summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "master_timeline.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_us", "node", "master"])
        w.writerows(result.collectors.master_timeline)
    with open(out_dir / "metric_timeline.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_us", "node", "self_metric"])
        w.writerows(result.collectors.metric_timeline)
    with open(out_dir / "activity.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "kind", "dimension", "bin", "count"])
        for (node_id, kind, slot), count in sorted(result.collectors.activity_slot.items()):
            w.writerow([node_id, kind, "slot", slot, count])
        for (node_id, kind, tu), count in sorted(result.collectors.activity_tu.items()):
            w.writerow([node_id, kind, "tu_into_eaw", tu, count])

    sync_stats = None
    samples = []
    masters = {
        str(sn.node.election.top_master) for sn in result.nodes.values() if sn.joined
    }
    if len(masters) == 1 and any(result.captures.values()):
        master = MacAddress.parse(next(iter(masters)))
        try:
            stats = sim.measure_sync_error(result, master)
        except sim.InsufficientPairs:
            stats = None
        if stats is not None:
            samples = stats.samples
            sync_stats = {
                "master": str(master),
                "sample_count": stats.count,
                "mean_us": stats.mean_us,
                "stddev_us": stats.stddev_us,
                "fraction_within_3tu": stats.fraction_within_3tu,
            }
    with open(out_dir / "sync_error.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_us", "slave", "master", "error_us"])
        for s in samples:
            w.writerow([s.time_us, str(s.slave), str(s.master), s.error_us])

    capture_counts = {}
    for monitor_id, records in sorted(result.captures.items()):
        pcap.write_pcap(str(out_dir / f"{monitor_id}.pcap"), records)
        capture_counts[monitor_id] = len(records)

    summary = {
        "seed": result.seed,
        "duration_s": result.duration_us / sim.MICROS_PER_SECOND,
        "outcomes": dict(result.outcomes),
        "captures": capture_counts,
        "sync": sync_stats,
        "nodes": {
            node_id: {
                "address": str(sn.spec.config.address),
                "joined": sn.joined,
                "master": str(sn.node.election.top_master) if sn.node else None,
                "self_metric": sn.node.election.self_metric if sn.node else None,
                "load_state": sn.node.load_state.value if sn.node else None,
                "counters": dict(sn.node.counters) if sn.node else None,
            }
            for node_id, sn in sorted(result.nodes.items())
        },
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def cmd_simulate(args) -> int:
    try:
        with open(args.scenario) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"simulate: {args.scenario}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario = sim.scenario_from_dict(doc)
    except (sim.ScenarioError, ValueError) as exc:
        print(f"simulate: {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = sim.run_scenario(scenario, seed=args.seed)
    summary = write_collector_files(result, Path(args.out))
    log.info("simulate: wrote %s", args.out)
    print(json.dumps({"out": str(args.out), "seed": args.seed, "sync": summary["sync"]}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="awdl", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dissect", help="decode AWDL frames from a pcap to JSON")
    p.add_argument("file")
    p.add_argument("--verbose", action="store_true", help="also report skipped non-AWDL frames")
    p.add_argument("--json-lines", action="store_true", help="one JSON object per line")
    p.set_defaults(func=cmd_dissect)

    p = sub.add_parser("calibrate", help="clock offset between two sniffer captures")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("analyze-sync", help="sync-error distribution from dual captures")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--master", required=True, help="master MAC address")
    p.set_defaults(func=cmd_analyze_sync)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("AWDL_LOG", "warning").upper(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
