#!/usr/bin/env python3
"""A tour of the AWDL wire format.

Builds a periodic synchronization frame TLV by TLV, shows the encoded
bytes, round-trips it, and derives the link-local IPv6 addressing that
lets peers skip neighbor discovery entirely.
"""

import random

from awdl import wire
from awdl.wire import MacAddress


def hexdump(data: bytes, width: int = 16) -> str:
    lines = []
    for off in range(0, len(data), width):
        chunk = data[off : off + width]
        lines.append(f"{off:04x}  {' '.join(f'{b:02x}' for b in chunk)}")
    return "\n".join(lines)


# Every activation draws a fresh locally-administered MAC address.
rng = random.Random(2024)
me = wire.random_awdl_mac(rng)
print(f"random interface address: {me}  (local bit set, unicast)")

# Peers derive each other's IPv6 address straight from the MAC: flip the
# universal/local bit, splice ff:fe in the middle, prefix fe80::/64.
print(f"its link-local address:   {wire.link_local_address(me)}")
print(f"the fixed cluster BSSID:  {wire.AWDL_BSSID} -> {wire.link_local_address(wire.AWDL_BSSID)}")
print()

# A synchronization-parameters TLV carries the sender's whole notion of
# time: countdown to the next extended window, sequence number, master,
# and the 16-slot channel sequence.
channel_sequence = wire.ChannelSequence(
    entries=tuple(
        wire.ChannelEntry(channel=6 if slot == 8 else 44) for slot in range(16)
    )
)
sync_params = wire.SyncParamsTlv(
    tx_channel=44,
    tx_counter=37,  # TUs until the next extended availability window
    aw_seq_number=1234,
    master_address=me,
    channel_sequence=channel_sequence,
)

frame = wire.ActionFrame(
    header=wire.ActionFrameHeader(
        subtype=wire.AfSubtype.PSF, phy_tx_time=1_000_150, target_tx_time=1_000_000
    ),
    tlvs=(
        sync_params,
        wire.ChannelSequenceTlv(sequence=channel_sequence),
        wire.ElectionParamsV2Tlv(
            master_address=me, sync_address=me, master_metric=516, self_metric=516
        ),
        wire.SyncTreeTlv(path=(me,)),
        wire.VersionTlv(major=3, minor=0, device_class=1),
    ),
    envelope=wire.Dot11Envelope(
        frame_subtype=wire.FrameSubtype.ACTION,
        destination=wire.BROADCAST,
        source=me,
    ),
)

encoded = wire.encode_action_frame(frame)
print(f"encoded action frame: {len(encoded)} bytes")
print(hexdump(encoded[:64]), "...\n")

decoded = wire.decode_action_frame(encoded)
assert decoded == frame
print("decode(encode(frame)) == frame")
print(f"  subtype        {decoded.header.subtype.name}")
print(f"  tx delay       {decoded.header.tx_delay} us (PHY minus target timestamp)")
print(f"  tlv types      {[t.type_byte() for t in decoded.tlvs]}")
print(f"  countdown      {decoded.find(wire.SyncParamsTlv).tx_counter} TU")

# Data frames ride SNAP encapsulation with a tiny AWDL header in front of
# an IPv6 payload.
data = wire.DataFrame(
    envelope=wire.Dot11Envelope(
        frame_subtype=wire.FrameSubtype.DATA,
        destination=wire.random_awdl_mac(rng),
        source=me,
    ),
    sequence_number=7,
    payload=b"\x60" + b"\x00" * 39,  # an IPv6 header stub
)
blob = wire.encode_data_frame(data)
print(f"\ndata frame: {len(blob)} bytes, magic 0x0304, EtherType 0x{data.ethertype:04x}")
assert wire.decode_data_frame(blob) == data

# The decoder refuses anything that is not AWDL rather than guessing.
try:
    wire.decode_action_frame(b"\xd0\x00" + bytes(30))
except wire.DecodeError as exc:
    print(f"non-AWDL input rejected cleanly: {type(exc).__name__}: {exc}")
