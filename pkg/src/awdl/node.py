"""Per-node AWDL state machine.

A `Node` owns its election state, its AW-grid anchor, its channel map, and
a peer table.  It is driven externally: `step(now)` returns the frames due
for transmission, `on_receive(...)` feeds it captured bytes.  All times are
the node's own clock in integer microseconds; a simulation layer maps them
to global time.

Scheduling matches the observed behavior: periodic synchronization frames
go out every AF period regardless of the advertised channel map, while
master indication frames stick to advertised slots, twice per sequence
period, clustered around the middle of an extended window.  Frame creation
is aligned to whole TUs of the node's own grid so the announced countdown
fields are exact.
"""

from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass, field, replace
from ipaddress import IPv6Address
from typing import Optional

from . import chanseq, election, sync, wire
from .chanseq import ChannelSlotMap, LoadState, SocialChannels
from .election import ElectionState, ProtocolVersion
from .sync import AwPrediction, RxMeta, TimeModel
from .wire import ActionFrame, MacAddress

AW_MICROS = 16 * sync.TU_MICROS
EAW_MICROS = 64 * sync.TU_MICROS
SEQUENCE_PERIOD_MICROS = chanseq.PERIOD_AW * AW_MICROS  # 1_048_576

MIF_MID_EAW_TU = 32
MIF_JITTER_TU = 4
PSF_JITTER_TU = 2  # exclusive upper bound, whole TUs

INACTIVITY_TIMEOUT_MICROS = 10_000_000
LOAD_HOLD_MICROS = 3_000_000
LOAD_WINDOW_MICROS = 1_000_000

# Sustained-rate rungs (bytes/second): ascend order low_power, idle,
# data_infra_50, data_infra_75, data; descend at half with a 3 s hold.
LOAD_ASCEND_THRESHOLDS = (1_000, 100_000, 1_000_000, 5_000_000)

_LADDER = (
    LoadState.LOW_POWER,
    LoadState.IDLE,
    LoadState.DATA_INFRA_50,
    LoadState.DATA_INFRA_75,
    LoadState.DATA,
)


class PeerUnknown(KeyError):
    """Data was queued for a peer not present in the neighbor table."""


class TxReason(enum.Enum):
    COMMON_SLOT = "common_slot"
    NO_OVERLAP = "no_overlap"
    PEER_UNKNOWN = "peer_unknown"
    GUARD_INTERVAL = "guard_interval"


@dataclass(frozen=True)
class TxDecision:
    allowed: bool
    channel: Optional[int]
    reason: TxReason


@dataclass(frozen=True)
class NodeConfig:
    address: MacAddress
    version: ProtocolVersion = ProtocolVersion.V3
    device_class: int = 1  # 1 macOS, 2 iOS
    af_period_tu: int = 110  # 110 or 440
    airplay_mode: bool = False
    social: SocialChannels = SocialChannels()
    rng_seed: int = 0
    ap_channel: Optional[int] = None  # set when associated with an AP
    chip_address: Optional[MacAddress] = None  # real chip MAC, self if None

    def __post_init__(self):
        if self.af_period_tu not in (110, 440):
            raise ValueError("AF period must be 110 or 440 TU")


@dataclass
class PeerEntry:
    address: MacAddress
    last_rssi: int
    last_seen_aw: int
    advertised_map: ChannelSlotMap
    advertised_sync: wire.SyncParamsTlv
    ipv6: IPv6Address
    version: Optional[wire.VersionTlv] = None


@dataclass(frozen=True)
class Emission:
    """One frame handed to the radio: bytes, the channel it goes out on,
    and what it is ('psf', 'mif', or 'data')."""

    frame: bytes
    channel: int
    kind: str
    destination: MacAddress


class Node:
    """One AWDL interface instance.  Mutable, single-owner, no internal
    timers: call `step` with a monotonically increasing clock."""

    def __init__(self, config: NodeConfig, now: int = 0):
        self.config = config
        self.model = TimeModel()
        self.rssi_policy = (
            election.RssiPolicy.for_airplay() if config.airplay_mode else election.RssiPolicy()
        )
        self.rng = random.Random(config.rng_seed)
        self.start_time = now
        self.election = election.start_interface(now, config.address, config.version)
        # Until a master is heard the node runs on its own grid, starting an
        # EAW (sequence number 0) at activation.
        self.anchor = AwPrediction(next_eaw_start=now, aw_seq_at_start=0, source_master=config.address)
        self.grid_bias_us = 0  # fault-injection knob for sync experiments
        self.load_state = LoadState.IDLE
        self.slot_map = chanseq.build_sequence(self.load_state, config.social, config.ap_channel)
        self.peers: dict = {}
        self.received_data: list = []
        self.counters = {
            "decode_errors": 0,
            "dropped_rssi": 0,
            "misaligned_anchors": 0,
            "resync_events": 0,
            "frames_rx": 0,
        }
        self._dot11_seq = 0
        self._data_seq = 0
        self._tx_queue: deque = deque()
        self._last_aw_tick = -1
        self._offered_rate = 0.0
        self._last_traffic_time = now
        self._load_rung = _LADDER.index(self.load_state)
        self._rate_below_since: Optional[int] = None
        self._next_psf = now  # first PSF goes out immediately on activation
        self._next_mif = self._next_mif_time(now)

    # -- grid -------------------------------------------------------------

    def grid_anchor(self) -> AwPrediction:
        if self.grid_bias_us:
            return replace(self.anchor, next_eaw_start=self.anchor.next_eaw_start + self.grid_bias_us)
        return self.anchor

    def aw_state(self, now: int) -> sync.LocalAwState:
        return sync.local_aw_state(now, self.grid_anchor(), self.model)

    def current_slot(self, now: int) -> int:
        return chanseq.slot_index(self.aw_state(now).aw_seq)[1]

    def current_channel(self, now: int) -> int:
        """Where the radio sits right now.  In unavailable slots it parks on
        the primary social channel (matching the always-listening behavior
        observed in deployed nodes)."""
        ch = self.slot_map.slots[self.current_slot(now)]
        return ch if ch is not None else self.config.social.primary

    def current_aw(self, now: int) -> int:
        """Free-running AW count since activation, for timeout bookkeeping."""
        return (now - self.start_time) // AW_MICROS

    def _grid_align(self, t: int) -> int:
        """Round `t` up to the next whole-TU boundary of the current grid so
        announced TU countdowns stay exact."""
        origin = self.grid_anchor().next_eaw_start
        off = (t - origin) % sync.TU_MICROS
        return t if off == 0 else t + (sync.TU_MICROS - off)

    def _cycle_origin(self, now: int) -> int:
        """Local time at which the current 64-AW sequence period began."""
        anchor = self.grid_anchor()
        origin = anchor.next_eaw_start - (anchor.aw_seq_at_start % chanseq.PERIOD_AW) * AW_MICROS
        return origin + ((now - origin) // SEQUENCE_PERIOD_MICROS) * SEQUENCE_PERIOD_MICROS

    def _next_mif_time(self, now: int) -> int:
        """Next master-indication slot: the first advertised slot of each
        half of the sequence period, mid-EAW, with a few TU of jitter."""
        available = self.slot_map.awdl_slots()
        halves = [
            [s for s in available if s < chanseq.SLOTS // 2],
            [s for s in available if s >= chanseq.SLOTS // 2],
        ]
        origin = self._cycle_origin(now)
        best = None
        for cycle in (0, 1):
            for half in halves:
                if not half:
                    continue
                slot = half[0]
                jitter = self.rng.randint(-MIF_JITTER_TU, MIF_JITTER_TU)
                t = (
                    origin
                    + cycle * SEQUENCE_PERIOD_MICROS
                    + slot * EAW_MICROS
                    + (MIF_MID_EAW_TU + jitter) * sync.TU_MICROS
                )
                if t > now and (best is None or t < best):
                    best = t
        return best if best is not None else now + SEQUENCE_PERIOD_MICROS

    # -- frame construction -------------------------------------------------

    def _next_dot11_seq(self) -> int:
        seq = self._dot11_seq
        self._dot11_seq = (self._dot11_seq + 1) & 0x0FFF
        return seq

    def _build_action_frame(self, now: int, subtype: wire.AfSubtype, channel: int) -> bytes:
        st = self.aw_state(now)
        wire_seq = chanseq.to_wire(self.slot_map)
        major = 2 if self.config.version is ProtocolVersion.V2 else 3
        sync_params = wire.SyncParamsTlv(
            tx_channel=channel,
            tx_counter=st.tu_to_next_eaw,
            master_channel=self.config.social.primary,
            af_period=self.config.af_period_tu,
            master_address=self.election.top_master,
            aw_seq_number=st.aw_seq,
            channel_sequence=wire_seq,
        )
        distance = len(self.election.tree_path)
        tlvs = [
            sync_params,
            wire.ChannelSequenceTlv(sequence=wire_seq),
            wire.ElectionParamsTlv(
                distance_to_master=distance,
                master_address=self.election.top_master,
                master_metric=self.election.top_metric,
                self_metric=self.election.self_metric,
            ),
            wire.ElectionParamsV2Tlv(
                master_address=self.election.top_master,
                sync_address=self.election.sync_parent,
                distance_to_master=distance,
                master_metric=self.election.top_metric,
                self_metric=self.election.self_metric,
            ),
            wire.SyncTreeTlv(path=self.election.announced_path()),
            wire.ServiceParamsTlv(value=b""),
            wire.DataPathStateTlv(
                infra_bssid=MacAddress(b"\x00" * 6),
                infra_address=self.config.chip_address or self.config.address,
                awdl_address=self.config.address,
            ),
            wire.VersionTlv(major=major, minor=0, device_class=self.config.device_class),
        ]
        if subtype is wire.AfSubtype.MIF:
            tlvs.insert(6, wire.HtCapsTlv(value=b"\x00" * 4))
            tlvs.insert(7, wire.ArpaTlv(value=b"\x03" + bytes(str(self.config.address), "ascii")))
        frame = ActionFrame(
            header=wire.ActionFrameHeader(subtype=subtype, phy_tx_time=now & 0xFFFFFFFF, target_tx_time=now & 0xFFFFFFFF),
            tlvs=tuple(tlvs),
            envelope=wire.Dot11Envelope(
                frame_subtype=wire.FrameSubtype.ACTION,
                destination=wire.BROADCAST,
                source=self.config.address,
                sequence_number=self._next_dot11_seq(),
            ),
        )
        return wire.encode_action_frame(frame)

    # -- stepping -----------------------------------------------------------

    def step(self, now: int) -> list:
        """Process everything due at local time `now`; returns emissions."""
        out = []
        self._maybe_bump(now)
        self._run_aw_ticks(now)
        while self._next_psf <= now:
            channel = self.current_channel(now)
            out.append(
                Emission(
                    frame=self._build_action_frame(now, wire.AfSubtype.PSF, channel),
                    channel=channel,
                    kind="psf",
                    destination=wire.BROADCAST,
                )
            )
            jitter = self.rng.randrange(PSF_JITTER_TU)
            self._next_psf = self._grid_align(
                max(self._next_psf, now) + (self.config.af_period_tu + jitter) * sync.TU_MICROS
            )
        while self._next_mif <= now:
            slot = self.current_slot(now)
            ch = self.slot_map.slots[slot]
            if ch is not None:
                out.append(
                    Emission(
                        frame=self._build_action_frame(now, wire.AfSubtype.MIF, ch),
                        channel=ch,
                        kind="mif",
                        destination=wire.BROADCAST,
                    )
                )
            self._next_mif = self._next_mif_time(max(self._next_mif, now))
        out.extend(self._flush_data(now))
        return out

    def _maybe_bump(self, now: int) -> None:
        if election.bump_self_metric(self.election, now, self.rng):
            # A changed election outcome can change nothing in the grid; the
            # node keeps whatever anchor it already follows.
            pass

    def _run_aw_ticks(self, now: int) -> None:
        aw = self.current_aw(now)
        if aw <= self._last_aw_tick:
            return
        self._last_aw_tick = aw
        effects = election.on_aw_tick(self.election, aw)
        if effects.promoted_on_timeout:
            # Keep the current grid: the replacement master was synchronized
            # to the departed one, so slaves must not resynchronize.
            pass
        self._decay_load(now)

    def next_wake(self, now: int) -> int:
        """Earliest local time at which `step` has new work."""
        candidates = [
            self._next_psf,
            self._next_mif,
            (self.current_aw(now) + 1) * AW_MICROS + self.start_time,
        ]
        if not self.election.bump_applied:
            candidates.append(self.election.listen_deadline)
        if self._tx_queue:
            candidates.append(now + sync.TU_MICROS)
        return max(min(candidates), now + 1)

    # -- receive path ---------------------------------------------------------

    def on_receive(self, buf: bytes, rx: RxMeta) -> dict:
        """Feed one captured frame.  Never raises on bad input; decode
        failures only bump a counter."""
        self.counters["frames_rx"] += 1
        effects = {"accepted": False, "adopted": False, "resync": False, "data": False}
        try:
            frame = wire.dissect_classify(buf)
        except wire.DecodeError:
            self.counters["decode_errors"] += 1
            return effects
        if isinstance(frame, wire.DataFrame):
            if frame.envelope.destination in (self.config.address, wire.BROADCAST):
                self.received_data.append((rx.rx_time, frame.envelope.source, frame.payload))
                effects["data"] = True
            return effects
        return self._on_action_frame(frame, rx, effects)

    def _on_action_frame(self, frame: ActionFrame, rx: RxMeta, effects: dict) -> dict:
        sender = frame.envelope.source if frame.envelope else None
        sync_params = frame.find(wire.SyncParamsTlv)
        if sender is None or sender == self.config.address or sync_params is None:
            return effects
        if not election.filter_frame(self.election, rx.rssi, sender, self.rssi_policy):
            self.counters["dropped_rssi"] += 1
            return effects
        effects["accepted"] = True

        aw = self.current_aw(rx.rx_time)
        obs = self._observation(frame, sender)
        result = election.on_action_frame(self.election, obs, aw)
        effects["adopted"] = result.adopted_new_master

        on_path = (
            sender == self.election.sync_parent
            or sender == self.election.top_master
            or sender in self.election.tree_path
        )
        if on_path and not self.election.is_master:
            prediction = sync.predict_aw_start(sync_params, frame.header, rx, model=self.model)
            report = sync.misalignment(self.anchor, prediction, model=self.model)
            if report.exceeds_threshold:
                self.counters["misaligned_anchors"] += 1
                self.counters["resync_events"] += 1
                effects["resync"] = True
            self.anchor = prediction
            self._next_psf = self._grid_align(self._next_psf)
            self._next_mif = self._next_mif_time(rx.rx_time)

        self._upsert_peer(frame, sender, rx, aw, sync_params)
        return effects

    def _observation(self, frame: ActionFrame, sender: MacAddress) -> election.FrameObservation:
        v2 = frame.find(wire.ElectionParamsV2Tlv)
        v1 = frame.find(wire.ElectionParamsTlv)
        tree = frame.find(wire.SyncTreeTlv)
        if v2 is not None:
            top, top_metric, self_metric = v2.master_address, v2.master_metric, v2.self_metric
            parent = v2.sync_address
        elif v1 is not None:
            top, top_metric, self_metric = v1.master_address, v1.master_metric, v1.self_metric
            parent = None
        else:
            sp = frame.find(wire.SyncParamsTlv)
            top, top_metric, self_metric = sp.master_address, 0, 0
            parent = None
        return election.FrameObservation(
            sender=sender,
            self_metric=self_metric,
            top_master=top,
            top_metric=top_metric,
            path=tree.path if tree is not None else (),
            sync_parent=parent,
        )

    def _upsert_peer(self, frame, sender, rx, aw, sync_params) -> None:
        seq_tlv = frame.find(wire.ChannelSequenceTlv)
        wire_seq = seq_tlv.sequence if seq_tlv is not None else sync_params.channel_sequence
        if wire_seq is None:
            return
        self.peers[sender] = PeerEntry(
            address=sender,
            last_rssi=rx.rssi,
            last_seen_aw=aw,
            advertised_map=chanseq.from_wire(wire_seq, self.config.social),
            advertised_sync=sync_params,
            ipv6=wire.link_local_address(sender),
            version=frame.find(wire.VersionTlv),
        )

    # -- data path -------------------------------------------------------------

    def can_transmit(self, peer: MacAddress, now: int) -> TxDecision:
        """Whether a data frame to `peer` may go out right now: the current
        slot must name the same channel in both maps and the instant must be
        outside the guard interval at either end of the EAW."""
        entry = self.peers.get(peer)
        if entry is None:
            return TxDecision(False, None, TxReason.PEER_UNKNOWN)
        st = self.aw_state(now)
        slot = chanseq.slot_index(st.aw_seq)[1]
        ch = self.slot_map.slots[slot]
        if ch is None or entry.advertised_map.slots[slot] != ch:
            return TxDecision(False, None, TxReason.NO_OVERLAP)
        guard = self.model.guard_tu
        if st.tu_into_eaw < guard or st.tu_into_eaw >= self.model.eaw_length_tu - guard:
            return TxDecision(False, ch, TxReason.GUARD_INTERVAL)
        return TxDecision(True, ch, TxReason.COMMON_SLOT)

    def send_data(self, peer: MacAddress, payload: bytes) -> None:
        """Queue one IPv6 payload for `peer`; emitted by `step` in the next
        common slot."""
        if peer not in self.peers:
            raise PeerUnknown(str(peer))
        self._tx_queue.append((peer, payload))

    def _flush_data(self, now: int) -> list:
        out = []
        while self._tx_queue:
            peer, payload = self._tx_queue[0]
            decision = self.can_transmit(peer, now)
            if not decision.allowed:
                break
            self._tx_queue.popleft()
            frame = wire.DataFrame(
                envelope=wire.Dot11Envelope(
                    frame_subtype=wire.FrameSubtype.DATA,
                    destination=peer,
                    source=self.config.address,
                    sequence_number=self._next_dot11_seq(),
                ),
                sequence_number=self._data_seq,
                ethertype=wire.ETHERTYPE_IPV6,
                payload=payload,
            )
            self._data_seq = (self._data_seq + 1) & 0xFFFF
            out.append(
                Emission(
                    frame=wire.encode_data_frame(frame),
                    channel=decision.channel,
                    kind="data",
                    destination=peer,
                )
            )
        return out

    # -- load state ---------------------------------------------------------------

    def set_offered_load(self, bytes_per_sec: float, now: int) -> None:
        self._offered_rate = bytes_per_sec
        if bytes_per_sec > 0:
            self._last_traffic_time = now
        self.update_load_state(bytes_per_sec, now)

    def update_load_state(self, tx_bytes_per_sec: float, now: int) -> LoadState:
        """Hysteresis ladder over the sustained outgoing rate.

        Each ascend threshold guards one rung of low_power, idle,
        data_infra_50, data_infra_75, data; a rung is left downwards only
        after the rate has stayed under half its threshold for 3 s.  A node
        with no AP association has no infra time to protect, so the infra
        rungs resolve to the full data state; an associated node is capped
        at 75% availability instead.  Dropping to low_power happens through
        the inactivity timeout, not through this ladder.
        """
        rung_up = sum(1 for t in LOAD_ASCEND_THRESHOLDS if tx_bytes_per_sec > t)
        if rung_up > self._load_rung:
            self._set_rung(rung_up, now)
            self._rate_below_since = None
        elif self._load_rung >= 2 and tx_bytes_per_sec <= LOAD_ASCEND_THRESHOLDS[self._load_rung - 1] / 2:
            if self._rate_below_since is None:
                self._rate_below_since = now
            elif now - self._rate_below_since >= LOAD_HOLD_MICROS:
                self._set_rung(self._load_rung - 1, now)
                self._rate_below_since = now
        else:
            self._rate_below_since = None
        return self.load_state

    def _resolve_state(self, state: LoadState) -> LoadState:
        if state in (LoadState.DATA_INFRA_50, LoadState.DATA_INFRA_75) and self.config.ap_channel is None:
            return LoadState.DATA
        if state is LoadState.DATA and self.config.ap_channel is not None:
            return LoadState.DATA_INFRA_75
        return state

    def _set_rung(self, rung: int, now: int) -> None:
        self._load_rung = rung
        resolved = self._resolve_state(_LADDER[rung])
        if resolved == self.load_state:
            return
        self.load_state = resolved
        self.slot_map = chanseq.build_sequence(resolved, self.config.social, self.config.ap_channel)
        self._next_mif = self._next_mif_time(now)

    def _decay_load(self, now: int) -> None:
        if self._offered_rate <= 0:
            if self._load_rung > 0 and now - self._last_traffic_time >= INACTIVITY_TIMEOUT_MICROS:
                self._set_rung(0, now)
        else:
            self.update_load_state(self._offered_rate, now)


__all__ = [
    "AW_MICROS",
    "EAW_MICROS",
    "SEQUENCE_PERIOD_MICROS",
    "PeerUnknown",
    "TxReason",
    "TxDecision",
    "NodeConfig",
    "PeerEntry",
    "Emission",
    "Node",
]
