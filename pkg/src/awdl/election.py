"""Master election: metric lifecycle, adoption, loop prevention, timeouts.

Every node starts as its own master with metric 60, listens on the social
channels for two seconds, then redraws its metric from a version-dependent
range (405-436 for v2, 505-536 for v3) whether or not it found a master.
Whoever advertises the largest master metric wins; ties fall to the larger
MAC address.  A silent master is dropped after 96 AWs and the best known
live neighbor takes its place without forcing slaves to resynchronize.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .wire import MacAddress

LISTEN_PERIOD_MICROS = 2_000_000
INITIAL_METRIC = 60
METRIC_RANGE_V2 = (405, 436)
METRIC_RANGE_V3 = (505, 536)
NO_MASTER_TIMEOUT_AW = 96


class ProtocolVersion(enum.Enum):
    V2 = "v2"
    V3 = "v3"

    @property
    def metric_range(self) -> tuple[int, int]:
        return METRIC_RANGE_V2 if self is ProtocolVersion.V2 else METRIC_RANGE_V3


class Role(enum.Enum):
    MASTER = "master"
    NONELECTION_MASTER = "nonelection_master"
    SLAVE = "slave"


@dataclass(frozen=True)
class RssiPolicy:
    """Frames below the edge sync threshold are dropped; frames from the
    node we are synchronizing to get a 5 dB bonus so a flapping link does
    not trigger spurious re-elections."""

    edge_sync_threshold: int = -65
    slave_sync_bonus: int = 5

    @classmethod
    def for_airplay(cls) -> "RssiPolicy":
        return cls(edge_sync_threshold=-78)


def metric_key(metric: int, address: MacAddress) -> tuple[int, bytes]:
    """Total order on (metric, MAC); the MAC breaks metric ties."""
    return (metric, address.octets)


@dataclass
class Neighbor:
    """Last advertisement heard from a neighbor."""

    address: MacAddress
    last_seen_aw: int
    self_metric: int
    top_master: MacAddress
    top_metric: int
    sync_parent: Optional[MacAddress] = None
    path: tuple = ()


@dataclass(frozen=True)
class FrameObservation:
    """Election-relevant fields of one received action frame."""

    sender: MacAddress
    self_metric: int
    top_master: MacAddress
    top_metric: int
    path: tuple = ()  # announced sync tree: sender's parent chain up to top
    sync_parent: Optional[MacAddress] = None


@dataclass(frozen=True)
class ElectionEffects:
    adopted_new_master: bool = False
    resync_needed: bool = False
    promoted_on_timeout: bool = False


@dataclass
class ElectionState:
    """Single-owner mutable election state for one node."""

    self_address: MacAddress
    version: ProtocolVersion
    self_metric: int = INITIAL_METRIC
    top_master: MacAddress = None  # type: ignore[assignment]
    top_metric: int = INITIAL_METRIC
    sync_parent: MacAddress = None  # type: ignore[assignment]
    tree_path: tuple = ()  # parent chain up to top master; never contains self
    last_master_frame_aw: int = 0
    listen_deadline: int = 0
    bump_applied: bool = False
    neighbors: dict = field(default_factory=dict)
    children_seen_aw: dict = field(default_factory=dict)

    @property
    def is_master(self) -> bool:
        return self.top_master == self.self_address

    def role(self, current_aw: Optional[int] = None) -> Role:
        if self.is_master:
            return Role.MASTER
        if current_aw is not None and any(
            current_aw - seen <= NO_MASTER_TIMEOUT_AW for seen in self.children_seen_aw.values()
        ):
            return Role.NONELECTION_MASTER
        return Role.SLAVE

    def announced_path(self) -> tuple:
        """Sync tree to put on the wire: a master announces itself, a slave
        its parent chain up to the top master."""
        return (self.self_address,) if self.is_master else self.tree_path


def start_interface(now: int, self_address: MacAddress, version: ProtocolVersion) -> ElectionState:
    """Fresh interface activation: self-adopted master with metric 60 and a
    two-second listen window before the metric bump."""
    return ElectionState(
        self_address=self_address,
        version=version,
        self_metric=INITIAL_METRIC,
        top_master=self_address,
        top_metric=INITIAL_METRIC,
        sync_parent=self_address,
        tree_path=(),
        last_master_frame_aw=0,
        listen_deadline=now + LISTEN_PERIOD_MICROS,
    )


def bump_self_metric(state: ElectionState, now: int, rng) -> bool:
    """Redraw the self metric from the version range once the listen window
    has passed; happens exactly once per activation, whether or not a
    master was found.  Returns True when the bump fired."""
    if state.bump_applied or now < state.listen_deadline:
        return False
    lo, hi = state.version.metric_range
    state.self_metric = rng.randint(lo, hi)
    state.bump_applied = True
    if state.is_master or metric_key(state.self_metric, state.self_address) > metric_key(
        state.top_metric, state.top_master
    ):
        _become_master(state)
    return True


def _become_master(state: ElectionState) -> None:
    state.top_master = state.self_address
    state.top_metric = state.self_metric
    state.sync_parent = state.self_address
    state.tree_path = ()


def filter_frame(
    state: ElectionState,
    rssi: int,
    sender: MacAddress,
    policy: RssiPolicy = RssiPolicy(),
) -> bool:
    """RSSI gate: accept at or above the edge sync threshold, with the
    slave sync bonus for the node we currently synchronize to."""
    threshold = policy.edge_sync_threshold
    if sender == state.sync_parent and not state.is_master:
        threshold -= policy.slave_sync_bonus
    return rssi >= threshold


def on_action_frame(state: ElectionState, obs: FrameObservation, current_aw: int) -> ElectionEffects:
    """Update election state from one accepted frame.

    Adopts the advertised master when its (metric, MAC) key beats the
    current one, unless our own address appears in the sender's announced
    path (loop prevention).  Frames from anywhere on our current master
    path refresh the no-master timeout.
    """
    state.neighbors[obs.sender] = Neighbor(
        address=obs.sender,
        last_seen_aw=current_aw,
        self_metric=obs.self_metric,
        top_master=obs.top_master,
        top_metric=obs.top_metric,
        sync_parent=obs.sync_parent,
        path=obs.path,
    )
    if obs.sync_parent == state.self_address:
        state.children_seen_aw[obs.sender] = current_aw

    on_master_path = (
        obs.sender == state.top_master or obs.sender == state.sync_parent or obs.sender in state.tree_path
    )
    if on_master_path and not state.is_master:
        state.last_master_frame_aw = current_aw

    adopted = False
    advertised = metric_key(obs.top_metric, obs.top_master)
    if advertised > metric_key(state.top_metric, state.top_master):
        if state.self_address in obs.path:
            return ElectionEffects()  # would close a sync-tree loop
        state.top_master = obs.top_master
        state.top_metric = obs.top_metric
        state.sync_parent = obs.sender
        state.tree_path = (obs.sender,) + tuple(a for a in obs.path if a != obs.sender)
        state.last_master_frame_aw = current_aw
        adopted = True
    elif obs.sender == state.top_master and obs.top_master == state.top_master:
        # The master itself may re-announce a changed (bumped) metric.
        if obs.top_metric != state.top_metric and obs.top_master == obs.sender:
            state.top_metric = obs.top_metric
            if metric_key(state.self_metric, state.self_address) > metric_key(
                state.top_metric, state.top_master
            ):
                _become_master(state)

    return ElectionEffects(adopted_new_master=adopted)


def on_aw_tick(state: ElectionState, current_aw: int) -> ElectionEffects:
    """Per-AW housekeeping: drop a master that has been silent past the
    96 AW timeout and promote the best known live neighbor, or self when
    none survives.  Slaves keep their AW grid, so no resynchronization."""
    if state.is_master:
        return ElectionEffects()
    if current_aw - state.last_master_frame_aw <= NO_MASTER_TIMEOUT_AW:
        return ElectionEffects()

    dead = state.top_master
    candidates = [
        n
        for n in state.neighbors.values()
        if n.address != dead
        and current_aw - n.last_seen_aw <= NO_MASTER_TIMEOUT_AW
        and state.self_address not in n.path  # same loop guard as adoption
    ]
    state.neighbors.pop(dead, None)
    best = None
    for n in candidates:
        if best is None or metric_key(n.self_metric, n.address) > metric_key(best.self_metric, best.address):
            best = n
    if best is not None and metric_key(best.self_metric, best.address) > metric_key(
        state.self_metric, state.self_address
    ):
        state.top_master = best.address
        state.top_metric = best.self_metric
        state.sync_parent = best.address
        state.tree_path = (best.address,)
        state.last_master_frame_aw = current_aw
    else:
        _become_master(state)
    return ElectionEffects(promoted_on_timeout=True)


__all__ = [
    "LISTEN_PERIOD_MICROS",
    "INITIAL_METRIC",
    "METRIC_RANGE_V2",
    "METRIC_RANGE_V3",
    "NO_MASTER_TIMEOUT_AW",
    "ProtocolVersion",
    "Role",
    "RssiPolicy",
    "Neighbor",
    "FrameObservation",
    "ElectionEffects",
    "ElectionState",
    "metric_key",
    "start_interface",
    "bump_self_metric",
    "filter_frame",
    "on_action_frame",
    "on_aw_tick",
]
