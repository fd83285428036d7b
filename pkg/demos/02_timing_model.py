#!/usr/bin/env python3
"""How AWDL nodes agree on time.

Walks through the availability-window arithmetic: predicting the master's
next extended window from a received frame, tracking the local grid, the
misalignment check, and the guard-interval arithmetic that decides how
much of a window is actually usable.
"""

from awdl import sync
from awdl.sync import AwPrediction, ObservedFrame, RxMeta
from awdl.wire import ActionFrameHeader, AfSubtype, MacAddress, SyncParamsTlv

MASTER = MacAddress.parse("02:00:00:00:00:aa")

print(f"1 TU = {sync.TU_MICROS} us; an AW is 16 TU; presence mode 4 makes")
print("the working slot a 64 TU extended availability window (EAW).\n")

# A master frame announces: "my next EAW starts in 37 TU, the current
# window number is 1234, and I stamped this frame 150 us before it left."
sync_params = SyncParamsTlv(tx_counter=37, aw_seq_number=1234, master_address=MASTER)
header = ActionFrameHeader(subtype=AfSubtype.PSF, phy_tx_time=1_000_150, target_tx_time=1_000_000)
rx = RxMeta(rx_time=5_000_000, rssi=-48)

prediction = sync.predict_aw_start(sync_params, header, rx)
print("received at local time 5.000000 s:")
print(f"  next EAW starts at {prediction.next_eaw_start} us  (37*1024 - 150 + rx)")
print(f"  and will carry sequence number {prediction.aw_seq_at_start} (next multiple of 4)\n")

# From that single anchor the node can place itself anywhere in time.
for offset_tu in (0, 10, 63, 64, 200):
    t = prediction.next_eaw_start + offset_tu * sync.TU_MICROS
    st = sync.local_aw_state(t, prediction)
    print(
        f"  +{offset_tu:3d} TU: window #{st.aw_seq:5d}, "
        f"{st.tu_into_eaw:2d} TU into the EAW, {st.tu_to_next_eaw:2d} TU to the next"
    )

# The 16-bit window counter wraps roughly every 18 minutes without any
# discontinuity, because the wrap period is a whole number of EAWs.
wrap_at = 65536 * 16 * sync.TU_MICROS
anchor0 = AwPrediction(next_eaw_start=0, aw_seq_at_start=0, source_master=MASTER)
print(f"\nwrap after {wrap_at / 60e6:.1f} minutes:")
for t in (wrap_at - sync.TU_MICROS, wrap_at):
    st = sync.local_aw_state(t, anchor0)
    print(f"  t={t} us -> window #{st.aw_seq}, {st.tu_into_eaw} TU into the EAW")

# Receivers compare every fresh prediction against the projection of the
# previous one; drifting more than 3 ms is counted as misalignment.
drifted = AwPrediction(
    next_eaw_start=prediction.next_eaw_start + 64 * 1024 + 3500,
    aw_seq_at_start=prediction.aw_seq_at_start + 4,
    source_master=MASTER,
)
report = sync.misalignment(prediction, drifted)
print(f"\nmisalignment after one EAW: {report.delta_micros} us, exceeds 3 ms: {report.exceeds_threshold}")

# A passive sniffer estimates the slave-master error from two frames in
# the same EAW, with each sender's own delay estimate subtracted out.
master_frame = ObservedFrame(
    sync_params=SyncParamsTlv(tx_counter=10, aw_seq_number=4, master_address=MASTER),
    header=ActionFrameHeader(subtype=AfSubtype.PSF, phy_tx_time=0, target_tx_time=0),
    rx=RxMeta(rx_time=8_000_000),
)
slave_frame = ObservedFrame(
    sync_params=SyncParamsTlv(tx_counter=10, aw_seq_number=5, master_address=MASTER),
    header=ActionFrameHeader(subtype=AfSubtype.PSF, phy_tx_time=0, target_tx_time=0),
    rx=RxMeta(rx_time=8_000_000 + 750),
)
err = sync.sync_error(master_frame, slave_frame)
print(f"sniffer-estimated sync error: {err} us (negative: the slave runs late)")

# That tolerance is why 3 TU at both ends of each EAW are guard time.
print(f"\nusable fraction of a 64 TU window with 3 TU guards: {sync.guard_usable_fraction(64, 3):.4f}")
print(f"usable fraction of a bare 16 TU window:              {sync.guard_usable_fraction(16, 3):.4f}")
