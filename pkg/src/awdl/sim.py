"""Deterministic discrete-event simulator for AWDL clusters.

A world holds nodes (each with its own clock model), a pairwise link
matrix, passive monitors, and a single event queue ordered by (time,
insertion sequence), so a run is a pure function of (scenario, seed).
Frames are real encoded bytes: they are only delivered to receivers whose
radio sits on the emission channel at delivery time, can be lost with a
per-link probability, and arrive with the link's RSSI attached.

The clock model separates three impairments: a constant offset and a ppm
drift (the receiver's notion of time), a per-emission delay between the
moment a frame's timestamps are filled in and the moment it hits the air
(the medium-access delay the protocol's timestamps famously do not cover),
and an optional grid bias used to inject known synchronization error.
"""

from __future__ import annotations

import heapq
import random
import statistics
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional

from . import sync, wire
from .chanseq import slot_index
from .election import ProtocolVersion
from .node import AW_MICROS, Node, NodeConfig
from .pcap import CaptureRecord
from .sync import RxMeta, TimeModel
from .wire import MacAddress

MICROS_PER_SECOND = 1_000_000
DEFAULT_MONITOR_RSSI = -40


class ScenarioError(ValueError):
    """Malformed scenario; message names the offending field."""


class ScriptConflict(ScenarioError):
    """Scenario actions out of order for a node (e.g. leave before join)."""


class InsufficientPairs(ValueError):
    """Not enough same-window frame pairs to estimate synchronization error."""


@dataclass(frozen=True)
class ClockModel:
    """Per-device clock: local = global + global*ppm/1e6 + offset.  The
    jitter scale feeds a non-negative (half-normal) per-emission airtime
    delay; the grid bias shifts the node's announced window grid."""

    offset_us: int = 0
    drift_ppm: int = 0
    jitter_us: int = 0
    grid_bias_us: int = 0

    def to_local(self, t_global: int) -> int:
        return t_global + (t_global * self.drift_ppm) // MICROS_PER_SECOND + self.offset_us

    def to_global(self, t_local: int) -> int:
        denom = MICROS_PER_SECOND + self.drift_ppm
        g = ((t_local - self.offset_us) * MICROS_PER_SECOND) // denom
        while self.to_local(g) < t_local:
            g += 1
        while g > 0 and self.to_local(g - 1) >= t_local:
            g -= 1
        return g


@dataclass(frozen=True)
class LinkQuality:
    rssi: int = -50
    loss: float = 0.0


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    config: NodeConfig
    clock: ClockModel = ClockModel()


@dataclass(frozen=True)
class MonitorSpec:
    """A passive sniffer: tuned per `schedule` (time, channel) steps, with
    its own clock to be recovered by offline calibration."""

    monitor_id: str
    channel: int = 44
    clock: ClockModel = ClockModel()
    schedule: tuple = ()  # ((at_us, channel), ...) overrides `channel`

    def channel_at(self, t_global: int) -> int:
        ch = self.channel
        for at, c in self.schedule:
            if t_global >= at:
                ch = c
        return ch


@dataclass(frozen=True)
class Action:
    at_us: int
    kind: str  # join | leave | leave_after_next_af | set_load | set_link
    node: Optional[str] = None
    a: Optional[str] = None
    b: Optional[str] = None
    rssi: int = -50
    loss: float = 0.0
    bytes_per_sec: float = 0.0


@dataclass(frozen=True)
class Scenario:
    duration_us: int
    nodes: tuple
    links: tuple = ()  # ((a, b, LinkQuality), ...)
    monitors: tuple = ()
    actions: tuple = ()

    def validate(self) -> None:
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate node ids")
        known = set(ids) | {m.monitor_id for m in self.monitors}
        for a, b, _ in self.links:
            if a not in known or b not in known:
                raise ScenarioError(f"link references unknown endpoint {a!r}/{b!r}")
        joined_at: dict = {}
        for act in sorted(self.actions, key=lambda x: x.at_us):
            if act.kind in ("join", "leave", "leave_after_next_af", "set_load"):
                if act.node not in ids:
                    raise ScenarioError(f"action references unknown node {act.node!r}")
            if act.kind == "join":
                joined_at[act.node] = act.at_us
            elif act.kind in ("leave", "leave_after_next_af"):
                if act.node not in joined_at:
                    raise ScriptConflict(f"{act.node!r} leaves before joining")
                joined_at.pop(act.node)


@dataclass
class SimNode:
    spec: NodeSpec
    node: Optional[Node] = None
    joined: bool = False
    leave_armed: bool = False
    wake_at: Optional[int] = None  # pending wake (global); stale events no-op


@dataclass
class Collectors:
    """Run observables: who each node follows over time, self metrics,
    transmit activity binned by sequence slot and by TU within an extended
    window, and anchor-resync events."""

    master_timeline: list = field(default_factory=list)  # (t_us, node_id, master)
    metric_timeline: list = field(default_factory=list)  # (t_us, node_id, metric)
    activity_slot: Counter = field(default_factory=Counter)  # (node_id, kind, slot)
    activity_tu: Counter = field(default_factory=Counter)  # (node_id, kind, tu)
    resync_events: list = field(default_factory=list)  # (t_us, node_id)
    tree_snapshots: int = 0


@dataclass
class SimResult:
    seed: int
    duration_us: int
    event_log: list
    collectors: Collectors
    captures: dict  # monitor_id -> [CaptureRecord]
    nodes: dict  # node_id -> SimNode
    outcomes: Counter  # delivered / lost_probability / lost_channel


class SimWorld:
    """One simulation run; see `run_scenario` for the usual entry point."""

    def __init__(self, scenario: Scenario, seed: int = 0):
        scenario.validate()
        self.scenario = scenario
        self.seed = seed
        self.rng = random.Random(seed)
        self.now = 0
        self._heap: list = []
        self._seq = 0
        self.sim_nodes = {spec.node_id: SimNode(spec=spec) for spec in scenario.nodes}
        self.monitors = {m.monitor_id: m for m in scenario.monitors}
        self.links: dict = {}
        for a, b, q in scenario.links:
            self.links[self._link_key(a, b)] = q
        self.captures = {m: [] for m in self.monitors}
        self.collectors = Collectors()
        self.event_log: list = []
        self.outcomes: Counter = Counter()
        self._emission_counter = 0
        self._last_master: dict = {}
        self._last_metric: dict = {}
        for act in scenario.actions:
            self._push(act.at_us, "action", act)

    @staticmethod
    def _link_key(a: str, b: str):
        return (a, b) if a <= b else (b, a)

    def _push(self, t: int, kind: str, payload) -> None:
        heapq.heappush(self._heap, (t, self._seq, kind, payload))
        self._seq += 1

    def _log(self, *entry) -> None:
        self.event_log.append(entry)

    # -- run loop ---------------------------------------------------------

    def run(self) -> SimResult:
        duration = self.scenario.duration_us
        while self._heap:
            t, _, kind, payload = heapq.heappop(self._heap)
            if t > duration:
                break
            self.now = t
            if kind == "action":
                self._apply_action(payload)
            elif kind == "wake":
                self._wake(payload)
            elif kind == "deliver":
                self._deliver(*payload)
        return SimResult(
            seed=self.seed,
            duration_us=duration,
            event_log=self.event_log,
            collectors=self.collectors,
            captures=self.captures,
            nodes=self.sim_nodes,
            outcomes=self.outcomes,
        )

    # -- actions ----------------------------------------------------------

    def _apply_action(self, act: Action) -> None:
        if act.kind == "join":
            self._join(act.node)
        elif act.kind == "leave":
            self._leave(act.node)
        elif act.kind == "leave_after_next_af":
            self.sim_nodes[act.node].leave_armed = True
        elif act.kind == "set_load":
            sn = self.sim_nodes[act.node]
            if sn.joined:
                sn.node.set_offered_load(act.bytes_per_sec, sn.spec.clock.to_local(self.now))
                self._sample_node(act.node)
            self._log(self.now, "set_load", act.node, act.bytes_per_sec)
        elif act.kind == "set_link":
            self.links[self._link_key(act.a, act.b)] = LinkQuality(rssi=act.rssi, loss=act.loss)
            self._log(self.now, "set_link", act.a, act.b, act.rssi, act.loss)
        else:
            raise ScenarioError(f"unknown action kind {act.kind!r}")

    def _join(self, node_id: str) -> None:
        sn = self.sim_nodes[node_id]
        local = sn.spec.clock.to_local(self.now)
        # Mix the world seed into the node's own seed so different runs of
        # the same scenario draw different metrics, reproducibly.
        mixed = (self.seed * 0x9E3779B1 + sn.spec.config.rng_seed * 0x85EBCA6B + 1) & 0xFFFFFFFF
        sn.node = Node(replace(sn.spec.config, rng_seed=mixed), now=local)
        sn.node.grid_bias_us = sn.spec.clock.grid_bias_us
        sn.joined = True
        sn.leave_armed = False
        self._log(self.now, "join", node_id)
        self._last_master.pop(node_id, None)
        self._last_metric.pop(node_id, None)
        self._sample_node(node_id)
        sn.wake_at = self.now
        self._push(self.now, "wake", node_id)

    def _leave(self, node_id: str) -> None:
        sn = self.sim_nodes[node_id]
        sn.joined = False
        self._log(self.now, "leave", node_id)

    # -- node stepping ------------------------------------------------------

    def _wake(self, node_id: str) -> None:
        sn = self.sim_nodes[node_id]
        if not sn.joined or sn.wake_at != self.now:
            return  # node left, or a stale duplicate of a rescheduled wake
        sn.wake_at = None
        local = sn.spec.clock.to_local(self.now)
        emissions = sn.node.step(local)
        for em in emissions:
            self._emit(sn, em)
        self._sample_node(node_id)
        if sn.leave_armed and emissions:
            sn.leave_armed = False
            self._push(self.now + 1000, "action", Action(at_us=self.now + 1000, kind="leave", node=node_id))
        self._schedule_wake(sn, local)

    def _schedule_wake(self, sn: SimNode, local_now: int) -> None:
        nxt_local = sn.node.next_wake(local_now)
        nxt_global = max(sn.spec.clock.to_global(nxt_local), self.now + 1)
        if sn.wake_at is not None and self.now < sn.wake_at <= nxt_global:
            return  # an earlier wake is already pending
        sn.wake_at = nxt_global
        self._push(nxt_global, "wake", sn.spec.node_id)

    def _emit(self, sn: SimNode, em) -> None:
        emission_id = self._emission_counter
        self._emission_counter += 1
        local = sn.spec.clock.to_local(self.now)
        st = sn.node.aw_state(local)
        slot = slot_index(st.aw_seq)[1]
        self.collectors.activity_slot[(sn.spec.node_id, em.kind, slot)] += 1
        self.collectors.activity_tu[(sn.spec.node_id, em.kind, st.tu_into_eaw)] += 1
        self._log(self.now, "emit", sn.spec.node_id, em.kind, em.channel, emission_id)
        delay = 0
        if sn.spec.clock.jitter_us:
            delay = abs(round(self.rng.gauss(0.0, sn.spec.clock.jitter_us)))
        air_time = self.now + delay
        self._push(air_time, "deliver", (sn.spec.node_id, em, emission_id))

    # -- delivery -----------------------------------------------------------

    def _deliver(self, sender_id: str, em, emission_id: int) -> None:
        for rid in sorted(self.sim_nodes):
            if rid == sender_id:
                continue
            rn = self.sim_nodes[rid]
            if not rn.joined:
                continue
            quality = self.links.get(self._link_key(sender_id, rid))
            if quality is None:
                continue
            if quality.loss and self.rng.random() < quality.loss:
                self.outcomes["lost_probability"] += 1
                self._log(self.now, "lost_probability", emission_id, rid)
                continue
            local = rn.spec.clock.to_local(self.now)
            if rn.node.current_channel(local) != em.channel:
                self.outcomes["lost_channel"] += 1
                self._log(self.now, "lost_channel", emission_id, rid)
                continue
            self.outcomes["delivered"] += 1
            self._log(self.now, "deliver", emission_id, rid)
            effects = rn.node.on_receive(em.frame, RxMeta(rx_time=local, rssi=quality.rssi))
            if effects.get("resync"):
                self.collectors.resync_events.append((self.now, rid))
                self._log(self.now, "resync", rid)
            self._sample_node(rid)
            self._check_tree_acyclic()
            self._schedule_wake(rn, local)
        for mid in sorted(self.monitors):
            mon = self.monitors[mid]
            if mon.channel_at(self.now) != em.channel:
                continue
            quality = self.links.get(self._link_key(sender_id, mid))
            rssi = quality.rssi if quality is not None else DEFAULT_MONITOR_RSSI
            if quality is not None and quality.loss and self.rng.random() < quality.loss:
                continue
            ts = mon.clock.to_local(self.now)
            self.captures[mid].append(
                CaptureRecord(source_id=mid, timestamp_us=ts, rssi=rssi, frame=em.frame)
            )
            self._log(self.now, "capture", emission_id, mid)

    # -- collectors -----------------------------------------------------------

    def _sample_node(self, node_id: str) -> None:
        sn = self.sim_nodes[node_id]
        if not sn.joined:
            return
        master = sn.node.election.top_master
        metric = sn.node.election.self_metric
        if self._last_master.get(node_id) != master:
            self._last_master[node_id] = master
            self.collectors.master_timeline.append((self.now, node_id, str(master)))
        if self._last_metric.get(node_id) != metric:
            self._last_metric[node_id] = metric
            self.collectors.metric_timeline.append((self.now, node_id, metric))

    def _check_tree_acyclic(self) -> None:
        """The union of sync-parent edges over non-master nodes must form a
        forest rooted at masters; runs after every adoption-relevant event."""
        self.collectors.tree_snapshots += 1
        parent = {}
        for nid, sn in self.sim_nodes.items():
            if sn.joined and not sn.node.election.is_master:
                parent[sn.node.config.address] = sn.node.election.sync_parent
        for start in parent:
            seen = set()
            cur = start
            while cur in parent:
                if cur in seen:
                    raise AssertionError(f"sync tree cycle through {start}")
                seen.add(cur)
                cur = parent[cur]


def run_scenario(scenario: Scenario, seed: int = 0) -> SimResult:
    return SimWorld(scenario, seed).run()


# ---------------------------------------------------------------------------
# Scenario JSON


def _require(mapping: dict, key: str, kinds, where: str):
    if key not in mapping:
        raise ScenarioError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    if not isinstance(value, kinds):
        raise ScenarioError(f"{where}.{key}: expected {kinds}, got {type(value).__name__}")
    return value


def _clock_from_dict(d: Optional[dict], where: str) -> ClockModel:
    if d is None:
        return ClockModel()
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: clock must be an object")
    return ClockModel(
        offset_us=int(d.get("offset_us", 0)),
        drift_ppm=int(d.get("drift_ppm", 0)),
        jitter_us=int(d.get("jitter_us", 0)),
        grid_bias_us=int(d.get("grid_bias_us", 0)),
    )


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from its documented JSON form; raises ScenarioError
    naming the offending field on any problem."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario root must be a JSON object")
    duration_s = _require(doc, "duration_s", (int, float), "scenario")
    node_docs = _require(doc, "nodes", list, "scenario")
    specs = []
    actions = []
    for idx, nd in enumerate(node_docs):
        where = f"nodes[{idx}]"
        if not isinstance(nd, dict):
            raise ScenarioError(f"{where}: must be an object")
        node_id = _require(nd, "id", str, where)
        address = MacAddress.parse(_require(nd, "address", str, where))
        version_s = nd.get("version", "v3")
        try:
            version = ProtocolVersion(version_s)
        except ValueError:
            raise ScenarioError(f"{where}.version: {version_s!r} is not 'v2' or 'v3'") from None
        config = NodeConfig(
            address=address,
            version=version,
            device_class=int(nd.get("device_class", 1)),
            af_period_tu=int(nd.get("af_period_tu", 110)),
            airplay_mode=bool(nd.get("airplay", False)),
            rng_seed=int(nd.get("rng_seed", idx)),
            ap_channel=nd.get("ap_channel"),
        )
        specs.append(NodeSpec(node_id=node_id, config=config, clock=_clock_from_dict(nd.get("clock"), where)))
        if "join_s" in nd and nd["join_s"] is not None:
            actions.append(Action(at_us=int(nd["join_s"] * MICROS_PER_SECOND), kind="join", node=node_id))
        if nd.get("leave_s") is not None:
            actions.append(Action(at_us=int(nd["leave_s"] * MICROS_PER_SECOND), kind="leave", node=node_id))
    links = []
    for idx, ld in enumerate(doc.get("links", [])):
        where = f"links[{idx}]"
        a = _require(ld, "a", str, where)
        b = _require(ld, "b", str, where)
        links.append((a, b, LinkQuality(rssi=int(ld.get("rssi", -50)), loss=float(ld.get("loss", 0.0)))))
    monitors = []
    for idx, md in enumerate(doc.get("monitors", [])):
        where = f"monitors[{idx}]"
        schedule = tuple(
            (int(step["at_s"] * MICROS_PER_SECOND), int(step["channel"]))
            for step in md.get("schedule", [])
        )
        monitors.append(
            MonitorSpec(
                monitor_id=_require(md, "id", str, where),
                channel=int(md.get("channel", 44)),
                clock=_clock_from_dict(md.get("clock"), where),
                schedule=schedule,
            )
        )
    for idx, ad in enumerate(doc.get("actions", [])):
        where = f"actions[{idx}]"
        kind = _require(ad, "type", str, where)
        at_us = int(_require(ad, "at_s", (int, float), where) * MICROS_PER_SECOND)
        if kind in ("join", "leave", "leave_after_next_af"):
            actions.append(Action(at_us=at_us, kind=kind, node=_require(ad, "node", str, where)))
        elif kind == "set_load":
            actions.append(
                Action(
                    at_us=at_us,
                    kind=kind,
                    node=_require(ad, "node", str, where),
                    bytes_per_sec=float(_require(ad, "bytes_per_sec", (int, float), where)),
                )
            )
        elif kind == "set_link":
            actions.append(
                Action(
                    at_us=at_us,
                    kind=kind,
                    a=_require(ad, "a", str, where),
                    b=_require(ad, "b", str, where),
                    rssi=int(ad.get("rssi", -50)),
                    loss=float(ad.get("loss", 0.0)),
                )
            )
        else:
            raise ScenarioError(f"{where}.type: unknown action {kind!r}")
    actions.sort(key=lambda a: a.at_us)
    scenario = Scenario(
        duration_us=int(duration_s * MICROS_PER_SECOND),
        nodes=tuple(specs),
        links=tuple(links),
        monitors=tuple(monitors),
        actions=tuple(actions),
    )
    scenario.validate()
    return scenario


# ---------------------------------------------------------------------------
# Capture analysis (shared with the command line tools)


@dataclass(frozen=True)
class SyncSample:
    time_us: int
    slave: MacAddress
    master: MacAddress
    error_us: int


@dataclass(frozen=True)
class SyncErrorStats:
    samples: tuple
    mean_us: float
    stddev_us: float
    fraction_within_3tu: float

    @property
    def count(self) -> int:
        return len(self.samples)


def _observed_frames(records) -> list:
    """Decode capture records into (record, frame, sync params) triples,
    silently skipping anything that is not an AWDL action frame."""
    out = []
    for rec in records:
        try:
            frame = wire.decode_action_frame(rec.frame)
        except wire.DecodeError:
            continue
        sp = frame.find(wire.SyncParamsTlv)
        if sp is None or frame.envelope is None:
            continue
        out.append((rec, frame, sp))
    return out


def sync_error_samples(
    records,
    master: MacAddress,
    model: TimeModel = TimeModel(),
) -> list:
    """All same-EAW (master frame, slave frame) error samples in a capture.

    Frames pair when their AW sequence numbers fall in the same presence
    period and their receive times sit within two EAW lengths of each other
    (the time fence keeps 16-bit wraps from aliasing)."""
    frames = sorted(_observed_frames(records), key=lambda x: x[0].timestamp_us)
    fence = 2 * model.eaw_micros
    samples = []
    lo = 0
    for idx, (rec_m, frame_m, sp_m) in enumerate(frames):
        if frame_m.envelope.source != master:
            continue
        epoch_m = sp_m.aw_seq_number // model.presence_mode
        obs_m = sync.ObservedFrame(
            sync_params=sp_m, header=frame_m.header, rx=RxMeta(rec_m.timestamp_us, rec_m.rssi or 0)
        )
        while lo < len(frames) and frames[lo][0].timestamp_us < rec_m.timestamp_us - fence:
            lo += 1
        j = lo
        while j < len(frames) and frames[j][0].timestamp_us <= rec_m.timestamp_us + fence:
            rec_s, frame_s, sp_s = frames[j]
            j += 1
            src = frame_s.envelope.source
            if src == master:
                continue
            if sp_s.aw_seq_number // model.presence_mode != epoch_m:
                continue
            obs_s = sync.ObservedFrame(
                sync_params=sp_s, header=frame_s.header, rx=RxMeta(rec_s.timestamp_us, rec_s.rssi or 0)
            )
            samples.append(
                SyncSample(
                    time_us=rec_s.timestamp_us,
                    slave=src,
                    master=master,
                    error_us=sync.sync_error(obs_m, obs_s, model),
                )
            )
    samples.sort(key=lambda s: (s.time_us, s.slave.octets))
    return samples


def summarize_sync_errors(samples, model: TimeModel = TimeModel()) -> SyncErrorStats:
    if len(samples) < 2:
        raise InsufficientPairs(f"{len(samples)} same-window pairs")
    values = [s.error_us for s in samples]
    bound = 3 * model.tu_micros
    return SyncErrorStats(
        samples=tuple(samples),
        mean_us=statistics.fmean(values),
        stddev_us=statistics.stdev(values),
        fraction_within_3tu=sum(1 for v in values if abs(v) <= bound) / len(values),
    )


def calibrate_records(records_a, records_b) -> tuple[int, int]:
    """Clock offset between two capture sources from frames both saw.

    Frames match on identical bytes; duplicates resolve to the closest
    timestamps.  Returns (median of t_a - t_b, matched frame count).
    """
    by_bytes: dict = {}
    for rec in records_b:
        by_bytes.setdefault(rec.frame, []).append(rec.timestamp_us)
    diffs = []
    for rec in records_a:
        candidates = by_bytes.get(rec.frame)
        if not candidates:
            continue
        nearest = min(candidates, key=lambda t: abs(rec.timestamp_us - t))
        diffs.append(rec.timestamp_us - nearest)
    if not diffs:
        return 0, 0
    diffs.sort()
    n = len(diffs)
    median = diffs[n // 2] if n % 2 else (diffs[n // 2 - 1] + diffs[n // 2]) // 2
    return median, n


def merge_captures(primary, *others) -> list:
    """Align capture sources onto the primary source's clock using the
    byte-match calibration, then merge and sort."""
    merged = list(primary)
    for records in others:
        offset, matched = calibrate_records(primary, records)
        if matched == 0 and records:
            raise InsufficientPairs("no frames common to both captures")
        merged.extend(replace(r, timestamp_us=r.timestamp_us + offset) for r in records)
    merged.sort(key=lambda r: r.timestamp_us)
    return merged


def measure_sync_error(result: SimResult, master: MacAddress, model: TimeModel = TimeModel()) -> SyncErrorStats:
    """Estimate the cluster's sync error exactly as a passive sniffer pair
    would: calibrate the monitors onto one clock, pair same-window frames,
    and evaluate the timestamp-corrected difference."""
    captures = [records for records in result.captures.values() if records]
    if not captures:
        raise InsufficientPairs("no monitor captured any frames")
    merged = merge_captures(captures[0], *captures[1:])
    samples = sync_error_samples(merged, master, model)
    return summarize_sync_errors(samples, model)


# ---------------------------------------------------------------------------
# Canned probes


def master_churn_probe(result: SimResult, master_id: str) -> dict:
    """Departure-detection stats from a run whose scenario used
    `leave_after_next_af` on the master: when each survivor noticed, in AWs
    since the departure, and how many anchor resyncs happened after it."""
    leave_time = None
    for entry in result.event_log:
        if entry[1] == "leave" and entry[2] == master_id:
            leave_time = entry[0]
    if leave_time is None:
        raise ValueError(f"{master_id!r} never left")
    master_addr = str(result.nodes[master_id].spec.config.address)
    detection = {}
    for t, nid, new_master in result.collectors.master_timeline:
        if t > leave_time and nid != master_id and nid not in detection and new_master != master_addr:
            detection[nid] = (t - leave_time) / AW_MICROS
    resyncs = [e for e in result.collectors.resync_events if e[0] > leave_time and e[1] != master_id]
    return {
        "leave_time_us": leave_time,
        "detection_delay_aw": detection,
        "resync_events": len(resyncs),
    }


def converged_master(result: SimResult) -> Optional[str]:
    """MAC of the master every joined node currently follows, or None."""
    masters = {
        str(sn.node.election.top_master) for sn in result.nodes.values() if sn.joined
    }
    return masters.pop() if len(masters) == 1 else None


__all__ = [
    "MICROS_PER_SECOND",
    "ScenarioError",
    "ScriptConflict",
    "scenario_from_dict",
    "InsufficientPairs",
    "ClockModel",
    "LinkQuality",
    "NodeSpec",
    "MonitorSpec",
    "Action",
    "Scenario",
    "SimNode",
    "Collectors",
    "SimResult",
    "SimWorld",
    "run_scenario",
    "SyncSample",
    "SyncErrorStats",
    "sync_error_samples",
    "summarize_sync_errors",
    "calibrate_records",
    "merge_captures",
    "measure_sync_error",
    "master_churn_probe",
    "converged_master",
]
