"""Channel-sequence logic: slot mapping, per-state sequences, overlaps.

A channel sequence names 16 slots; with step 3 each slot spans 4 AWs (one
EAW), so the whole sequence covers 64 AWs of 16 TU each, about one second.
Which slots carry the primary/secondary social channels, the access-point
channel, or nothing depends on the interface load state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .sync import TU_MICROS
from .wire import ChannelEntry, ChannelSequence

SLOT_COUNT_MINUS_ONE = 15  # the `count` wire field
SLOTS = SLOT_COUNT_MINUS_ONE + 1
STEP = 3
PERIOD_AW = SLOTS * (STEP + 1)  # 64
SECONDARY_SLOT = 8  # 0-indexed; 1-indexed slot 9 is always channel 6


class SlotKind(Enum):
    """What a slot is allocated to; only primary/secondary count as AWDL
    airtime."""

    OFF = "off"
    PRIMARY = "primary"
    SECONDARY = "secondary"
    INFRA = "infra"


class LoadState(Enum):
    LOW_POWER = "low_power"
    IDLE = "idle"
    DATA_INFRA_50 = "data_infra_50"
    DATA_INFRA_75 = "data_infra_75"
    DATA = "data"


class MissingApChannel(ValueError):
    """A data+infra sequence needs the access point's channel."""


class BadWindow(ValueError):
    """Efficiency comparison is defined for 16 and 64 TU windows."""


@dataclass(frozen=True)
class SocialChannels:
    """The fixed coordination channels; 149 replaces 44 in some regions."""

    primary: int = 44
    secondary: int = 6
    alt_primary: int = 149

    def regional(self) -> "SocialChannels":
        return SocialChannels(primary=self.alt_primary, secondary=self.secondary, alt_primary=self.primary)


@dataclass(frozen=True)
class ChannelSlotMap:
    """A 16-slot channel map plus the allocation of each slot.

    `slots[k]` is the channel number the radio sits on during slot k, or
    None when the slot is unavailable; `kinds[k]` records whether that time
    belongs to AWDL (primary/secondary) or the AP link, which is what the
    airtime fraction counts.
    """

    slots: tuple
    kinds: tuple
    step: int = STEP

    def __post_init__(self):
        assert len(self.slots) == SLOTS and len(self.kinds) == SLOTS

    @property
    def period_aw(self) -> int:
        return SLOTS * (self.step + 1)

    def awdl_slots(self) -> list:
        return [k for k in range(SLOTS) if self.kinds[k] in (SlotKind.PRIMARY, SlotKind.SECONDARY)]


def slot_index(i: int, count: int = SLOT_COUNT_MINUS_ONE, step: int = STEP) -> tuple[int, int]:
    """Map an AW sequence number to (expanded index, slot index).

    The expanded index is i modulo the full (count+1)*(step+1) AW period;
    dividing by step+1 yields the slot because one channel entry spans
    step+1 consecutive AWs.
    """
    expanded = i % ((count + 1) * (step + 1))
    return expanded, expanded // (step + 1)


def channel_at(slot_map: ChannelSlotMap, i: int) -> Optional[int]:
    """Channel a node following `slot_map` is available on during AW number
    i, or None when the slot is unavailable."""
    _, slot = slot_index(i, SLOT_COUNT_MINUS_ONE, slot_map.step)
    return slot_map.slots[slot]


# Per-state slot allocation (0-indexed).  p/s/i mirror the primary,
# secondary, and AP channels; missing slots are off.
_STATE_PATTERNS = {
    LoadState.LOW_POWER: {0: "p", 8: "s", 9: "p", 10: "p"},
    LoadState.IDLE: {0: "p", 1: "p", 2: "p", 8: "s", 9: "p", 10: "p"},
    LoadState.DATA_INFRA_50: {
        0: "p", 1: "p", 2: "p", 3: "p",
        4: "i", 5: "i", 6: "i", 7: "i",
        8: "s", 9: "p", 10: "p", 11: "p",
        12: "i", 13: "i", 14: "i", 15: "i",
    },
    LoadState.DATA_INFRA_75: {
        0: "p", 1: "p", 2: "p", 3: "p", 4: "p", 5: "p",
        6: "i", 7: "i",
        8: "s", 9: "p", 10: "p", 11: "p", 12: "p", 13: "p",
        14: "i", 15: "i",
    },
    LoadState.DATA: {k: ("s" if k == SECONDARY_SLOT else "p") for k in range(SLOTS)},
}

_AIRTIME = {
    LoadState.LOW_POWER: 0.25,
    LoadState.IDLE: 0.375,
    LoadState.DATA_INFRA_50: 0.50,
    LoadState.DATA_INFRA_75: 0.75,
    LoadState.DATA: 1.0,
}


def build_sequence(
    state: LoadState,
    social: SocialChannels = SocialChannels(),
    ap_channel: Optional[int] = None,
) -> ChannelSlotMap:
    """The channel map a node in `state` announces.  Data+infra states
    interleave the AP channel and require `ap_channel`."""
    pattern = _STATE_PATTERNS[state]
    needs_ap = any(v == "i" for v in pattern.values())
    if needs_ap and ap_channel is None:
        raise MissingApChannel(f"{state.value} requires the AP channel")
    slots = []
    kinds = []
    for k in range(SLOTS):
        mark = pattern.get(k)
        if mark is None:
            slots.append(None)
            kinds.append(SlotKind.OFF)
        elif mark == "p":
            slots.append(social.primary)
            kinds.append(SlotKind.PRIMARY)
        elif mark == "s":
            slots.append(social.secondary)
            kinds.append(SlotKind.SECONDARY)
        else:
            slots.append(ap_channel)
            kinds.append(SlotKind.INFRA)
    return ChannelSlotMap(slots=tuple(slots), kinds=tuple(kinds))


def airtime_fraction(slot_map: ChannelSlotMap) -> float:
    """Fraction of the sequence allocated to AWDL itself (AP slots keep the
    radio busy but do not count)."""
    return len(slot_map.awdl_slots()) / SLOTS


def common_slots(a: ChannelSlotMap, b: ChannelSlotMap) -> list:
    """Slots where both maps put the radio on the same channel, i.e. where
    the two nodes can exchange frames once their grids are synchronized.
    Returns (slot, channel) pairs."""
    out = []
    for k in range(SLOTS):
        ch = a.slots[k]
        if ch is not None and ch == b.slots[k]:
            out.append((k, ch))
    return out


def sequence_period_micros(slot_map: Optional[ChannelSlotMap] = None, aw_length_tu: int = 16) -> int:
    period_aw = slot_map.period_aw if slot_map is not None else PERIOD_AW
    return period_aw * aw_length_tu * TU_MICROS


def ew_efficiency(switch_time_tu: int = 8, guard_tu: int = 3, window_tu: int = 64) -> float:
    """Usable airtime fraction of a window after one channel switch and a
    guard interval on both ends.

    With the observed 8 TU switch cost and 3 TU guards, a bare 16 TU window
    keeps 2 TU (12.5%) while a 64 TU extended window keeps over 78%, which
    is why deployed AWDL only uses the long windows.
    """
    if window_tu not in (16, 64):
        raise BadWindow(f"window must be 16 or 64 TU, got {window_tu}")
    usable = window_tu - switch_time_tu - 2 * guard_tu
    return max(usable, 0) / window_tu


def to_wire(slot_map: ChannelSlotMap, opclass_flags: int = 0) -> ChannelSequence:
    """Encode a slot map as the wire channel-sequence block (channel 0
    marks an unavailable slot)."""
    entries = tuple(
        ChannelEntry(channel=(ch if ch is not None else 0), flags=opclass_flags) for ch in slot_map.slots
    )
    return ChannelSequence(entries=entries, count=SLOT_COUNT_MINUS_ONE, step=slot_map.step)


def from_wire(seq: ChannelSequence, social: SocialChannels = SocialChannels()) -> ChannelSlotMap:
    """Reconstruct a slot map from the wire block.  Slot kinds are inferred
    from the channel numbers; anything that is neither social channel is
    treated as AP time."""
    slots = []
    kinds = []
    for e in seq.entries[:SLOTS]:
        if e.channel == 0:
            slots.append(None)
            kinds.append(SlotKind.OFF)
        else:
            slots.append(e.channel)
            if e.channel == social.secondary:
                kinds.append(SlotKind.SECONDARY)
            elif e.channel in (social.primary, social.alt_primary):
                kinds.append(SlotKind.PRIMARY)
            else:
                kinds.append(SlotKind.INFRA)
    while len(slots) < SLOTS:
        slots.append(None)
        kinds.append(SlotKind.OFF)
    return ChannelSlotMap(slots=tuple(slots), kinds=tuple(kinds), step=seq.step)


def table_airtime(state: LoadState) -> float:
    """Nominal airtime fraction per load state."""
    return _AIRTIME[state]


__all__ = [
    "SLOTS",
    "STEP",
    "PERIOD_AW",
    "SECONDARY_SLOT",
    "SlotKind",
    "LoadState",
    "MissingApChannel",
    "BadWindow",
    "SocialChannels",
    "ChannelSlotMap",
    "slot_index",
    "channel_at",
    "build_sequence",
    "airtime_fraction",
    "common_slots",
    "sequence_period_micros",
    "ew_efficiency",
    "to_wire",
    "from_wire",
    "table_airtime",
]
