"""AWDL time model: TU/AW arithmetic, next-window prediction, sync error.

Time runs in integer microseconds.  One TU is 1024 us, an availability
window (AW) is 16 TU, and with presence mode 4 the effective slot is an
extended availability window (EAW) of 64 TU.  A node learns its master's
grid from two action-frame fields: the TU countdown to the next EAW and
the 16-bit AW sequence number, corrected by the sender's own transmission
delay estimate (PHY minus target timestamp).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .wire import ActionFrameHeader, MacAddress, SyncParamsTlv

TU_MICROS = 1024
AW_SEQ_MODULUS = 1 << 16
AW_SEQ_HALF = 1 << 15


@dataclass(frozen=True)
class TimeModel:
    """Deployed AWDL timing constants; configurable only so tests can
    shrink them."""

    tu_micros: int = TU_MICROS
    aw_length_tu: int = 16
    presence_mode: int = 4
    guard_tu: int = 3

    def __post_init__(self):
        assert self.presence_mode > 0

    @property
    def eaw_length_tu(self) -> int:
        return self.aw_length_tu * self.presence_mode

    @property
    def aw_micros(self) -> int:
        return self.aw_length_tu * self.tu_micros

    @property
    def eaw_micros(self) -> int:
        return self.eaw_length_tu * self.tu_micros


@dataclass(frozen=True)
class SyncConfig:
    airtime_assumed: int = 0  # the implementation ignores over-the-air time
    misalign_threshold: int = 3000  # microseconds


@dataclass(frozen=True)
class RxMeta:
    """Reception metadata attached by the capture or simulation layer."""

    rx_time: int  # microseconds on the receiver's clock
    rssi: int = 0  # dBm


@dataclass(frozen=True)
class AwPrediction:
    """Anchor for a node's AW grid: when the next EAW starts (receiver
    clock) and which sequence number it carries."""

    next_eaw_start: int
    aw_seq_at_start: int
    source_master: MacAddress
    clock_regression: bool = False


@dataclass(frozen=True)
class LocalAwState:
    aw_seq: int  # current 16-bit AW sequence number
    tu_into_eaw: int  # 0..eaw-1
    tu_to_next_eaw: int  # eaw..1 countdown (full at an EAW boundary)


@dataclass(frozen=True)
class MisalignmentReport:
    delta_micros: int
    exceeds_threshold: bool


class NotSameEaw(ValueError):
    """The two frames' sequence numbers fall in different EAWs."""


def seq_delta(a: int, b: int) -> int:
    """Signed distance a-b between 16-bit AW sequence numbers, resolved to
    (-2^15, 2^15] so direction survives the wrap."""
    d = (a - b) % AW_SEQ_MODULUS
    if d > AW_SEQ_HALF:
        d -= AW_SEQ_MODULUS
    return d


def tx_delay(header: ActionFrameHeader) -> tuple[int, bool]:
    """Sender transmission-delay estimate, clamped at zero.  Returns
    (delay, regression_flag); real captures occasionally carry PHY time
    before target time."""
    d = header.phy_tx_time - header.target_tx_time
    if d < 0:
        return 0, True
    return d, False


def predict_aw_start(
    sync_params: SyncParamsTlv,
    header: ActionFrameHeader,
    rx: RxMeta,
    config: SyncConfig = SyncConfig(),
    model: TimeModel = TimeModel(),
) -> AwPrediction:
    """Project the start of the sender's next EAW onto the receiver clock.

    next = countdown_tu * 1024 - (phy_tx - target_tx) + airtime + rx_time,
    with airtime fixed at zero.  The sequence number at that instant is the
    frame's sequence number advanced to the next multiple of the presence
    mode.
    """
    delay, regression = tx_delay(header)
    start = sync_params.tx_counter * model.tu_micros - delay + config.airtime_assumed + rx.rx_time
    p = model.presence_mode
    seq = ((sync_params.aw_seq_number // p) + 1) * p % AW_SEQ_MODULUS
    return AwPrediction(
        next_eaw_start=start,
        aw_seq_at_start=seq,
        source_master=sync_params.master_address,
        clock_regression=regression,
    )


def local_aw_state(now: int, anchor: AwPrediction, model: TimeModel = TimeModel()) -> LocalAwState:
    """Current position in the AW grid defined by `anchor`.

    Valid for any `now` not more than one 16-bit wrap period before the
    anchor; the sequence number wraps modulo 2^16 with no discontinuity in
    the slot phase because the wrap period is a whole number of EAWs.
    """
    elapsed_tu = (now - anchor.next_eaw_start) // model.tu_micros
    aw_seq = (anchor.aw_seq_at_start + elapsed_tu // model.aw_length_tu) % AW_SEQ_MODULUS
    tu_into_eaw = elapsed_tu % model.eaw_length_tu
    return LocalAwState(
        aw_seq=aw_seq,
        tu_into_eaw=tu_into_eaw,
        tu_to_next_eaw=model.eaw_length_tu - tu_into_eaw,
    )


def misalignment(
    prev: AwPrediction,
    new: AwPrediction,
    config: SyncConfig = SyncConfig(),
    model: TimeModel = TimeModel(),
) -> MisalignmentReport:
    """Compare a fresh prediction against the projection of the previous
    one onto the same EAW boundary.  The driver counts (but does not act
    on) differences beyond 3 ms."""
    shift_aw = seq_delta(new.aw_seq_at_start, prev.aw_seq_at_start)
    projected = prev.next_eaw_start + shift_aw * model.aw_micros
    delta = new.next_eaw_start - projected
    return MisalignmentReport(delta_micros=delta, exceeds_threshold=abs(delta) > config.misalign_threshold)


@dataclass(frozen=True)
class ObservedFrame:
    """One captured action frame, as the sync-error estimator consumes it."""

    sync_params: SyncParamsTlv
    header: ActionFrameHeader
    rx: RxMeta


def same_eaw(seq_a: int, seq_b: int, model: TimeModel = TimeModel()) -> bool:
    return seq_a // model.presence_mode == seq_b // model.presence_mode


def sync_error(
    master_frame: ObservedFrame,
    slave_frame: ObservedFrame,
    model: TimeModel = TimeModel(),
) -> int:
    """Signed sync error between a slave and its master from two frames
    whose sequence numbers fall in the same EAW, as a passive sniffer with
    one common clock computes it.

    Positive means the slave's window starts before the master's.  Raises
    NotSameEaw when the same-EAW precondition fails.
    """
    i_m = master_frame.sync_params.aw_seq_number
    i_s = slave_frame.sync_params.aw_seq_number
    if not same_eaw(i_m, i_s, model):
        raise NotSameEaw(f"sequence numbers {i_m} and {i_s} are in different EAWs")
    delay_m, _ = tx_delay(master_frame.header)
    delay_s, _ = tx_delay(slave_frame.header)
    return (
        (master_frame.sync_params.tx_counter - slave_frame.sync_params.tx_counter) * model.tu_micros
        - (delay_m - delay_s)
        + master_frame.rx.rx_time
        - slave_frame.rx.rx_time
    )


def guard_usable_fraction(window_tu: int = 64, guard_tu: int = 3) -> float:
    """Fraction of a window left after excluding the guard interval at both
    ends (the tolerance the 3 ms accepted sync error forces)."""
    return 1.0 - (2 * guard_tu) / window_tu


__all__ = [
    "TU_MICROS",
    "AW_SEQ_MODULUS",
    "TimeModel",
    "SyncConfig",
    "RxMeta",
    "AwPrediction",
    "LocalAwState",
    "MisalignmentReport",
    "NotSameEaw",
    "ObservedFrame",
    "seq_delta",
    "tx_delay",
    "predict_aw_start",
    "local_aw_state",
    "misalignment",
    "same_eaw",
    "sync_error",
    "guard_usable_fraction",
]
