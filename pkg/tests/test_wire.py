"""Wire codec tests: hand-assembled golden vectors, round-trip properties,
and fuzz safety."""

import random
import struct

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from awdl import wire
from awdl.wire import MacAddress

from generators import random_action_frame, random_data_frame, random_mac

BSSID = bytes.fromhex("002500ff9473")


# ---------------------------------------------------------------------------
# Addressing


def test_mac_parse_and_render():
    mac = MacAddress.parse("00:25:00:FF:94:73")
    assert mac.octets == BSSID
    assert str(mac) == "00:25:00:ff:94:73"


def test_mac_requires_six_octets():
    with pytest.raises(ValueError):
        MacAddress(b"\x01\x02\x03")


def test_mac_ordering_uses_octets():
    assert MacAddress.parse("00:00:00:00:00:02") > MacAddress.parse("00:00:00:00:00:01")
    assert MacAddress.parse("ff:00:00:00:00:00") > MacAddress.parse("0f:ff:ff:ff:ff:ff")


@pytest.mark.parametrize(
    "mac,expected",
    [
        # modified EUI-64: flip bit 1 of the first octet, splice ff:fe
        ("00:25:00:ff:94:73", "fe80::225:ff:feff:9473"),
        ("02:00:00:00:00:00", "fe80::ff:fe00:0"),
        ("ff:ff:ff:ff:ff:ff", "fe80::fdff:ffff:feff:ffff"),
    ],
)
def test_link_local_address_vectors(mac, expected):
    assert str(wire.link_local_address(MacAddress.parse(mac))) == expected


def test_random_awdl_mac_is_local_unicast():
    rng = random.Random(7)
    for _ in range(500):
        mac = wire.random_awdl_mac(rng)
        assert mac.octets[0] & 0x03 == 0x02


def test_random_awdl_mac_deterministic_per_seed():
    assert wire.random_awdl_mac(random.Random(42)) == wire.random_awdl_mac(random.Random(42))
    assert wire.random_awdl_mac(random.Random(42)) != wire.random_awdl_mac(random.Random(43))


# ---------------------------------------------------------------------------
# TLV golden vectors


def test_version_tlv_golden():
    # type 0x15=21, length 2 (LE), value 0x31 -> major 3 minor 1, class 1
    tlvs = wire.decode_tlvs(bytes.fromhex("1502003101"))
    assert tlvs == [wire.VersionTlv(major=3, minor=1, device_class=1)]
    assert tlvs[0].encode() == bytes.fromhex("1502003101")


def test_sync_params_tlv_golden():
    chanseq = bytes.fromhex("0f000003ffff") + bytes.fromhex("2c00") * 16
    value = bytes.fromhex(
        "2c"  # tx channel 44
        "0500"  # tx counter 5
        "2c"  # master channel 44
        "00"  # guard time 0
        "1000"  # aw period 16
        "6e00"  # af period 110
        "0000"  # flags
        "1000"  # aw extension length 16
        "1000"  # aw common length 16
        "0000"  # remaining aw
        "03030303"  # ext min / multicast / unicast / af maxima
        "0a0b0c0d0e0f"  # master address
        "04"  # presence mode
        "00"  # reserved
        "2a00"  # sequence number 42
        "0000"  # ap beacon alignment
    ) + chanseq
    blob = bytes([4]) + struct.pack("<H", len(value)) + value
    (tlv,) = wire.decode_tlvs(blob)
    assert isinstance(tlv, wire.SyncParamsTlv)
    assert tlv.tx_channel == 44
    assert tlv.tx_counter == 5
    assert tlv.master_channel == 44
    assert tlv.guard_time == 0
    assert tlv.aw_period == 16
    assert tlv.af_period == 110
    assert tlv.aw_ext_length == 16
    assert tlv.aw_common_length == 16
    assert (tlv.ext_min, tlv.ext_max_multicast, tlv.ext_max_unicast, tlv.ext_max_af) == (3, 3, 3, 3)
    assert tlv.master_address == MacAddress.parse("0a:0b:0c:0d:0e:0f")
    assert tlv.presence_mode == 4
    assert tlv.aw_seq_number == 42
    seq = tlv.channel_sequence
    assert seq.count == 15 and len(seq.entries) == 16
    assert seq.fill_channel == 0xFFFF
    assert all(e.channel == 44 for e in seq.entries)
    assert tlv.encode() == blob


def test_channel_sequence_tlv_golden():
    # count 15, encoding 1, dup 0, step 3, fill 0xffff, 16 two-byte entries
    entries = bytes.fromhex("2c00") * 8 + bytes.fromhex("0600") + bytes.fromhex("2c00") * 7
    value = bytes.fromhex("0f010003ffff") + entries
    blob = bytes([18]) + struct.pack("<H", len(value)) + value
    (tlv,) = wire.decode_tlvs(blob)
    assert isinstance(tlv, wire.ChannelSequenceTlv)
    seq = tlv.sequence
    assert seq.count == 15
    assert seq.encoding == 1
    assert seq.step == 3
    assert seq.fill_channel == 0xFFFF
    assert [e.channel for e in seq.entries] == [44] * 8 + [6] + [44] * 7
    assert tlv.encode() == blob


def test_sync_tree_tlv_golden():
    value = bytes.fromhex("0a0b0c0d0e0f") + bytes.fromhex("102030405060")
    (tlv,) = wire.decode_tlvs(bytes([20]) + struct.pack("<H", 12) + value)
    assert tlv.path == (MacAddress.parse("0a:0b:0c:0d:0e:0f"), MacAddress.parse("10:20:30:40:50:60"))


def test_unknown_and_deprecated_tlvs_are_opaque():
    for ttype in (1, 3, 8, 99):
        blob = bytes([ttype]) + struct.pack("<H", 3) + b"abc"
        (tlv,) = wire.decode_tlvs(blob)
        assert isinstance(tlv, wire.UnknownTlv)
        assert tlv.type_value == ttype and tlv.value == b"abc"
        assert tlv.encode() == blob


def test_election_params_trailing_preserved():
    fixed = bytes.fromhex("07" "3412" "02") + bytes(6) + struct.pack("<II", 500, 60)
    blob = bytes([5]) + struct.pack("<H", len(fixed) + 3) + fixed + b"xyz"
    (tlv,) = wire.decode_tlvs(blob)
    assert tlv.flags == 7 and tlv.id == 0x1234 and tlv.distance_to_master == 2
    assert tlv.master_metric == 500 and tlv.self_metric == 60
    assert tlv.trailing == b"xyz"
    assert tlv.encode() == blob


# ---------------------------------------------------------------------------
# Action frames


def golden_psf_bytes() -> bytes:
    """Minimal PSF assembled by hand: 802.11 header, fixed AWDL header,
    then the full periodic-frame TLV set."""
    dot11 = (
        bytes.fromhex("d000")  # management / action
        + bytes.fromhex("0000")  # duration 0
        + b"\xff" * 6  # broadcast destination
        + bytes.fromhex("020000000001")  # source
        + BSSID
        + bytes.fromhex("5000")  # fragment 0, sequence 5
    )
    fixed = (
        bytes([127])  # category: vendor-specific
        + bytes.fromhex("0017f2")  # Apple OUI
        + bytes([8])  # AWDL fixed header type
        + bytes([0x10])  # version 1.0
        + bytes([0])  # subtype PSF
        + bytes([0])  # reserved
        + struct.pack("<I", 1_000_100)  # PHY tx time
        + struct.pack("<I", 1_000_000)  # target tx time
    )
    chanseq_block = bytes.fromhex("0f000003ffff") + bytes.fromhex("2c00") * 16
    sync_value = (
        bytes.fromhex("2c" "4000" "2c" "00" "1000" "6e00" "0000" "1000" "1000" "0000" "03030303")
        + bytes.fromhex("020000000001")
        + bytes.fromhex("04" "00" "0000" "0000")
        + chanseq_block
    )
    tlvs = b"".join(
        [
            bytes([4]) + struct.pack("<H", len(sync_value)) + sync_value,
            bytes([18]) + struct.pack("<H", len(chanseq_block)) + chanseq_block,
            bytes([5]) + struct.pack("<H", 18) + bytes.fromhex("00" "0000" "00")
            + bytes.fromhex("020000000001") + struct.pack("<II", 60, 60),
            bytes([24]) + struct.pack("<H", 32) + bytes.fromhex("020000000001") * 2
            + struct.pack("<IIIII", 0, 0, 60, 60, 0),
            bytes([20]) + struct.pack("<H", 6) + bytes.fromhex("020000000001"),
            bytes([6]) + struct.pack("<H", 2) + b"\x00\x00",
            bytes([12]) + struct.pack("<H", 20) + struct.pack("<H", 0) + bytes(6)
            + bytes.fromhex("020000000001") * 2,
            bytes([21]) + struct.pack("<H", 2) + bytes([0x30, 1]),
        ]
    )
    return dot11 + fixed + tlvs


def test_action_frame_golden_psf():
    frame = wire.decode_action_frame(golden_psf_bytes())
    assert frame.envelope.bssid == wire.AWDL_BSSID
    assert frame.envelope.destination == wire.BROADCAST
    assert frame.envelope.sequence_number == 5
    assert frame.header.category == 127
    assert frame.header.oui == bytes.fromhex("0017f2")
    assert frame.header.awdl_type == 8
    assert frame.header.subtype is wire.AfSubtype.PSF
    assert frame.header.phy_tx_time == 1_000_100
    assert frame.header.target_tx_time == 1_000_000
    types = [t.type_byte() for t in frame.tlvs]
    assert types == [4, 18, 5, 24, 20, 6, 12, 21]
    assert frame.find(wire.SyncParamsTlv).tx_counter == 64
    assert frame.find(wire.VersionTlv) == wire.VersionTlv(major=3, minor=0, device_class=1)
    assert wire.encode_action_frame(frame) == golden_psf_bytes()


def test_action_frame_golden_mif_with_version():
    body = (
        bytes([127]) + bytes.fromhex("0017f2") + bytes([8, 0x10, 3, 0])
        + struct.pack("<II", 42, 40)
        + bytes.fromhex("1502003101")  # the Version TLV vector
    )
    frame = wire.decode_action_frame(body, body_only=True)
    assert frame.envelope is None
    assert frame.header.subtype is wire.AfSubtype.MIF
    assert frame.tlvs == (wire.VersionTlv(major=3, minor=1, device_class=1),)
    assert wire.encode_action_frame(frame) == body


def test_action_frame_empty_tlv_region():
    body = bytes([127]) + bytes.fromhex("0017f2") + bytes([8, 0x10, 0, 0]) + struct.pack("<II", 0, 0)
    frame = wire.decode_action_frame(body, body_only=True)
    assert frame.tlvs == ()


def test_action_frame_unknown_subtype_preserved():
    body = bytes([127]) + bytes.fromhex("0017f2") + bytes([8, 0x10, 7, 0]) + struct.pack("<II", 0, 0)
    frame = wire.decode_action_frame(body, body_only=True)
    assert frame.header.subtype == 7
    assert wire.encode_action_frame(frame) == body


def test_decode_errors():
    good = golden_psf_bytes()
    with pytest.raises(wire.TruncatedFrame):
        wire.decode_action_frame(good[:-1])  # cuts the last TLV value
    with pytest.raises(wire.NotAwdl):
        bad = bytearray(good)
        bad[24] = 126  # category
        wire.decode_action_frame(bytes(bad))
    with pytest.raises(wire.NotAwdl):
        bad = bytearray(good)
        bad[26] = 0xAA  # OUI second byte
        wire.decode_action_frame(bytes(bad))
    with pytest.raises(wire.BadFixedHeader):
        bad = bytearray(good)
        bad[28] = 9  # AWDL type
        wire.decode_action_frame(bytes(bad))


def test_oversize_tlv_rejected_on_encode():
    frame = wire.ActionFrame(
        header=wire.ActionFrameHeader(subtype=wire.AfSubtype.PSF),
        tlvs=(wire.ArpaTlv(value=b"\x00" * 70000),),
    )
    with pytest.raises(wire.OversizeTlv):
        wire.encode_action_frame(frame)


# ---------------------------------------------------------------------------
# Data frames


def golden_data_bytes() -> bytes:
    return (
        bytes.fromhex("0800")  # data frame, no DS flags
        + bytes.fromhex("0000")
        + bytes.fromhex("020000000002")  # destination
        + bytes.fromhex("020000000001")  # source
        + BSSID
        + bytes.fromhex("7000")  # sequence 7
        + bytes.fromhex("aaaa03" "0017f2" "0800")  # LLC/SNAP
        + bytes.fromhex("0304")  # magic
        + bytes.fromhex("002a")  # sequence number 42
        + bytes.fromhex("0000")  # reserved
        + bytes.fromhex("86dd")  # EtherType IPv6
        + b"payload"
    )


def test_data_frame_golden():
    frame = wire.decode_data_frame(golden_data_bytes())
    assert frame.envelope.bssid == wire.AWDL_BSSID
    assert frame.sequence_number == 42
    assert frame.ethertype == 0x86DD
    assert frame.payload == b"payload"
    assert wire.encode_data_frame(frame) == golden_data_bytes()


def test_data_frame_zero_payload_roundtrip():
    frame = wire.DataFrame(
        envelope=wire.Dot11Envelope(
            frame_subtype=wire.FrameSubtype.DATA,
            destination=MacAddress.parse("02:00:00:00:00:02"),
            source=MacAddress.parse("02:00:00:00:00:01"),
        ),
        sequence_number=0,
        payload=b"",
    )
    assert wire.decode_data_frame(wire.encode_data_frame(frame)) == frame


def test_data_frame_errors():
    good = golden_data_bytes()
    with pytest.raises(wire.BadLlc):
        bad = bytearray(good)
        bad[24] = 0xAB  # DSAP
        wire.decode_data_frame(bytes(bad))
    with pytest.raises(wire.BadLlc):
        bad = bytearray(good)
        bad[27] = 0x11  # SNAP OUI
        wire.decode_data_frame(bytes(bad))
    with pytest.raises(wire.BadMagic):
        bad = bytearray(good)
        bad[32] = 0x04  # magic
        wire.decode_data_frame(bytes(bad))
    with pytest.raises(wire.DecodeError):
        bad = bytearray(good)
        bad[1] = 0x01  # To-DS flag
        wire.decode_data_frame(bytes(bad))


# ---------------------------------------------------------------------------
# Properties


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**63 - 1))
def test_action_frame_roundtrip_property(seed):
    frame = random_action_frame(random.Random(seed))
    encoded = wire.encode_action_frame(frame)
    decoded = wire.decode_action_frame(encoded)
    assert decoded == frame
    assert wire.encode_action_frame(decoded) == encoded


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**63 - 1))
def test_data_frame_roundtrip_property(seed):
    frame = random_data_frame(random.Random(seed))
    encoded = wire.encode_data_frame(frame)
    decoded = wire.decode_data_frame(encoded)
    assert decoded == frame
    assert wire.encode_data_frame(decoded) == encoded


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**63 - 1))
def test_tlv_region_framing_sums(seed):
    frame = random_action_frame(random.Random(seed), body_only=True)
    encoded = wire.encode_action_frame(frame)
    region = encoded[16:]  # past the fixed header
    assert sum(3 + len(t.encode_value()) for t in frame.tlvs) == len(region)


@settings(max_examples=400, deadline=None)
@given(st.binary(max_size=300))
def test_decoder_never_panics_on_arbitrary_bytes(blob):
    try:
        frame = wire.decode_action_frame(blob)
    except wire.DecodeError:
        pass
    else:
        assert wire.encode_action_frame(frame) == blob
    try:
        frame = wire.decode_data_frame(blob)
    except wire.DecodeError:
        pass
    else:
        assert wire.encode_data_frame(frame) == blob


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=120))
def test_fuzzed_golden_prefix_never_panics(tail):
    blob = golden_psf_bytes()[:40] + tail
    try:
        frame = wire.decode_action_frame(blob)
    except wire.DecodeError:
        pass
    else:
        assert wire.encode_action_frame(frame) == blob
