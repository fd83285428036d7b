"""AWDL wire codec: 802.11 vendor-specific action frames, TLVs, and data frames.

AWDL rides on IEEE 802.11 vendor-specific action frames (category 127,
Apple OUI 00:17:f2) and on a SNAP-encapsulated data frame format.  Control
information lives in TLV records: 1-byte type, 2-byte little-endian length,
then exactly `length` value bytes.  Multi-byte TLV fields are little-endian;
the SNAP/data header block is network order.

Everything in this module is a pure function over immutable values.  The
decoder never reads past its input and never lets a struct/index error
escape: malformed input raises a `DecodeError` subclass.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from enum import Enum
from ipaddress import IPv6Address
from typing import ClassVar, Optional, Union

# Fixed protocol constants.
AWDL_BSSID_STR = "00:25:00:ff:94:73"
AWDL_OUI = bytes.fromhex("0017f2")
AWDL_CATEGORY = 127
AWDL_TYPE = 8
AWDL_VERSION_BYTE = 0x10  # major 1, minor 0 in the fixed header
DATA_MAGIC = 0x0304
ETHERTYPE_IPV6 = 0x86DD
LLC_SNAP_PROTOCOL_ID = 0x0800
BROADCAST_STR = "ff:ff:ff:ff:ff:ff"

MAX_TLV_LEN = 0xFFFF


class WireError(Exception):
    """Base class for codec errors."""


class DecodeError(WireError):
    """Input bytes do not form a valid frame."""


class TruncatedFrame(DecodeError):
    """A length field or fixed header runs past the end of the input."""


class NotAwdl(DecodeError):
    """Frame is well-formed 802.11 but not AWDL (category/OUI mismatch)."""


class BadFixedHeader(DecodeError):
    """AWDL fixed header carries an unexpected type byte."""


class BadLlc(DecodeError):
    """LLC/SNAP header does not match the AWDL encapsulation."""


class BadMagic(DecodeError):
    """Data frame magic word is not 0x0304."""


class OversizeTlv(WireError):
    """TLV value longer than the 16-bit length field can express."""


@dataclass(frozen=True, order=True)
class MacAddress:
    """48-bit MAC address; renders as lowercase colon-separated hex."""

    octets: bytes

    def __post_init__(self):
        if len(self.octets) != 6:
            raise ValueError("MAC address must be exactly 6 octets")

    @classmethod
    def parse(cls, text: str) -> "MacAddress":
        parts = text.split(":")
        if len(parts) != 6:
            raise ValueError(f"bad MAC address {text!r}")
        return cls(bytes(int(p, 16) for p in parts))

    def __str__(self) -> str:
        return ":".join(f"{o:02x}" for o in self.octets)

    def __repr__(self) -> str:
        return f"MacAddress({str(self)!r})"


AWDL_BSSID = MacAddress.parse(AWDL_BSSID_STR)
BROADCAST = MacAddress.parse(BROADCAST_STR)


class AfSubtype(Enum):
    PSF = 0
    MIF = 3


class FrameSubtype(Enum):
    ACTION = "action"
    DATA = "data"


@dataclass(frozen=True)
class Dot11Envelope:
    """The 802.11 MAC header shared by AWDL action and data frames.

    AWDL frames always use three addresses (destination, source, BSSID)
    with To-DS/From-DS clear.  `control_flags` carries the frame-control
    flag byte so that captures with e.g. the retry bit set round-trip
    byte-exactly; emitted frames leave it zero.
    """

    frame_subtype: FrameSubtype
    destination: MacAddress
    source: MacAddress
    bssid: MacAddress = AWDL_BSSID
    sequence_number: int = 0  # 12-bit
    fragment_number: int = 0  # 4-bit
    duration: int = 0
    control_flags: int = 0

    def encode(self) -> bytes:
        if self.frame_subtype is FrameSubtype.ACTION:
            fc0 = 0xD0  # management / action
        else:
            fc0 = 0x08  # data / data
        seq_ctl = ((self.sequence_number & 0x0FFF) << 4) | (self.fragment_number & 0x0F)
        return (
            struct.pack("<BBH", fc0, self.control_flags & 0xFF, self.duration & 0xFFFF)
            + self.destination.octets
            + self.source.octets
            + self.bssid.octets
            + struct.pack("<H", seq_ctl)
        )


_DOT11_HEADER_LEN = 24


def _decode_envelope(buf: bytes) -> Dot11Envelope:
    if len(buf) < _DOT11_HEADER_LEN:
        raise TruncatedFrame(f"802.11 header needs 24 bytes, got {len(buf)}")
    fc0, fc1, duration = struct.unpack_from("<BBH", buf, 0)
    if fc0 & 0x03:
        raise DecodeError(f"unsupported 802.11 protocol version {fc0 & 0x03}")
    ftype = (fc0 >> 2) & 0x03
    fsub = (fc0 >> 4) & 0x0F
    if ftype == 0 and fsub == 13:
        subtype = FrameSubtype.ACTION
    elif ftype == 2 and fsub == 0:
        subtype = FrameSubtype.DATA
    else:
        raise NotAwdl(f"not an action or plain data frame (type {ftype} subtype {fsub})")
    if subtype is FrameSubtype.DATA and fc1 & 0x03:
        raise DecodeError("data frame with To-DS/From-DS set is not AWDL addressing")
    seq_ctl = struct.unpack_from("<H", buf, 22)[0]
    return Dot11Envelope(
        frame_subtype=subtype,
        destination=MacAddress(buf[4:10]),
        source=MacAddress(buf[10:16]),
        bssid=MacAddress(buf[16:22]),
        sequence_number=seq_ctl >> 4,
        fragment_number=seq_ctl & 0x0F,
        duration=duration,
        control_flags=fc1,
    )


@dataclass(frozen=True)
class ActionFrameHeader:
    """Fixed AWDL header following the 802.11 category/OUI prefix."""

    subtype: Union[AfSubtype, int]  # raw byte preserved for unknown subtypes
    phy_tx_time: int = 0  # microseconds, u32
    target_tx_time: int = 0  # microseconds, u32
    version: int = AWDL_VERSION_BYTE
    reserved: int = 0
    category: int = AWDL_CATEGORY
    oui: bytes = AWDL_OUI
    awdl_type: int = AWDL_TYPE

    @property
    def subtype_byte(self) -> int:
        return self.subtype.value if isinstance(self.subtype, AfSubtype) else self.subtype

    @property
    def tx_delay(self) -> int:
        """Transmission delay approximation; negative in bad captures."""
        return self.phy_tx_time - self.target_tx_time


# ---------------------------------------------------------------------------
# TLVs


class TlvType:
    """Known TLV type values.  1, 3 and 8 are deprecated and decode as Unknown."""

    SERVICE_RESPONSE = 2
    SYNCHRONIZATION_PARAMETERS = 4
    ELECTION_PARAMETERS = 5
    SERVICE_PARAMETERS = 6
    HT_CAPABILITIES = 7
    DATA_PATH_STATE = 12
    ARPA = 16
    VHT_CAPABILITIES = 17
    CHANNEL_SEQUENCE = 18
    SYNCHRONIZATION_TREE = 20
    VERSION = 21
    ELECTION_PARAMETERS_V2 = 24


@dataclass(frozen=True)
class ChannelEntry:
    """One channel-list slot: channel number in the low byte (0 = not
    available), encoding-dependent flags/opclass in the high byte."""

    channel: int
    flags: int = 0


@dataclass(frozen=True)
class ChannelSequence:
    """Channel sequence block, used standalone (TLV 18) and embedded in the
    Synchronization Parameters TLV.  `count` is one less than the number of
    entries; deployed AWDL always uses count 15, step 3, fill 0xffff."""

    entries: tuple
    count: int = 15
    encoding: int = 0
    duplicate_count: int = 0
    step: int = 3
    fill_channel: int = 0xFFFF

    def encode(self) -> bytes:
        out = bytearray(
            struct.pack(
                "<BBBBH",
                self.count & 0xFF,
                self.encoding & 0xFF,
                self.duplicate_count & 0xFF,
                self.step & 0xFF,
                self.fill_channel & 0xFFFF,
            )
        )
        for e in self.entries:
            out.append(e.channel & 0xFF)
            out.append(e.flags & 0xFF)
        return bytes(out)

    @classmethod
    def decode(cls, buf: bytes, offset: int = 0) -> tuple["ChannelSequence", int]:
        """Decode from `buf[offset:]`; returns (sequence, bytes consumed)."""
        if len(buf) - offset < 6:
            raise TruncatedFrame("channel sequence header needs 6 bytes")
        count, encoding, dup, step, fill = struct.unpack_from("<BBBBH", buf, offset)
        n = count + 1
        need = 6 + 2 * n
        if len(buf) - offset < need:
            raise TruncatedFrame(f"channel sequence wants {n} entries, input too short")
        entries = []
        pos = offset + 6
        for _ in range(n):
            entries.append(ChannelEntry(channel=buf[pos], flags=buf[pos + 1]))
            pos += 2
        seq = cls(
            entries=tuple(entries),
            count=count,
            encoding=encoding,
            duplicate_count=dup,
            step=step,
            fill_channel=fill,
        )
        return seq, need

    def wire_size(self) -> int:
        return 6 + 2 * len(self.entries)


class Tlv:
    """Base class: every TLV knows its type byte and value codec."""

    tlv_type: ClassVar[int]

    def encode_value(self) -> bytes:
        raise NotImplementedError

    def encode(self) -> bytes:
        value = self.encode_value()
        if len(value) > MAX_TLV_LEN:
            raise OversizeTlv(f"TLV value of {len(value)} bytes exceeds 65535")
        return struct.pack("<BH", self.type_byte(), len(value)) + value

    def type_byte(self) -> int:
        return self.tlv_type


@dataclass(frozen=True)
class SyncParamsTlv(Tlv):
    """Synchronization Parameters (type 4).

    Deployed values: guard time 0, AW period 16 TU, AF period 110 or 440 TU,
    extension lengths 16 TU, all EW maxima 3, presence mode 4.  `tx_counter`
    is the TU countdown to the next extended availability window and
    `aw_seq_number` the current 16-bit availability-window index.
    """

    tlv_type: ClassVar[int] = TlvType.SYNCHRONIZATION_PARAMETERS

    tx_channel: int = 44
    tx_counter: int = 0
    master_channel: int = 44
    guard_time: int = 0
    aw_period: int = 16
    af_period: int = 110
    flags: int = 0
    aw_ext_length: int = 16
    aw_common_length: int = 16
    remaining_aw: int = 0
    ext_min: int = 3
    ext_max_multicast: int = 3
    ext_max_unicast: int = 3
    ext_max_af: int = 3
    master_address: MacAddress = MacAddress(b"\x00" * 6)
    presence_mode: int = 4
    reserved: int = 0
    aw_seq_number: int = 0
    ap_beacon_alignment: int = 0
    channel_sequence: Optional[ChannelSequence] = None

    _FIXED = struct.Struct("<BHBBHHHHHHBBBB6sBBHH")

    def encode_value(self) -> bytes:
        fixed = self._FIXED.pack(
            self.tx_channel & 0xFF,
            self.tx_counter & 0xFFFF,
            self.master_channel & 0xFF,
            self.guard_time & 0xFF,
            self.aw_period & 0xFFFF,
            self.af_period & 0xFFFF,
            self.flags & 0xFFFF,
            self.aw_ext_length & 0xFFFF,
            self.aw_common_length & 0xFFFF,
            self.remaining_aw & 0xFFFF,
            self.ext_min & 0xFF,
            self.ext_max_multicast & 0xFF,
            self.ext_max_unicast & 0xFF,
            self.ext_max_af & 0xFF,
            self.master_address.octets,
            self.presence_mode & 0xFF,
            self.reserved & 0xFF,
            self.aw_seq_number & 0xFFFF,
            self.ap_beacon_alignment & 0xFFFF,
        )
        seq = self.channel_sequence
        return fixed + (seq.encode() if seq is not None else b"")

    @classmethod
    def decode_value(cls, value: bytes) -> "SyncParamsTlv":
        if len(value) < cls._FIXED.size:
            raise TruncatedFrame("synchronization parameters TLV too short")
        (
            tx_channel,
            tx_counter,
            master_channel,
            guard_time,
            aw_period,
            af_period,
            flags,
            aw_ext_length,
            aw_common_length,
            remaining_aw,
            ext_min,
            ext_max_multicast,
            ext_max_unicast,
            ext_max_af,
            master_raw,
            presence_mode,
            reserved,
            aw_seq_number,
            ap_beacon_alignment,
        ) = cls._FIXED.unpack_from(value, 0)
        offset = cls._FIXED.size
        seq = None
        if offset < len(value):
            seq, used = ChannelSequence.decode(value, offset)
            if offset + used != len(value):
                raise TruncatedFrame("trailing bytes after embedded channel sequence")
        return cls(
            tx_channel=tx_channel,
            tx_counter=tx_counter,
            master_channel=master_channel,
            guard_time=guard_time,
            aw_period=aw_period,
            af_period=af_period,
            flags=flags,
            aw_ext_length=aw_ext_length,
            aw_common_length=aw_common_length,
            remaining_aw=remaining_aw,
            ext_min=ext_min,
            ext_max_multicast=ext_max_multicast,
            ext_max_unicast=ext_max_unicast,
            ext_max_af=ext_max_af,
            master_address=MacAddress(master_raw),
            presence_mode=presence_mode,
            reserved=reserved,
            aw_seq_number=aw_seq_number,
            ap_beacon_alignment=ap_beacon_alignment,
            channel_sequence=seq,
        )


@dataclass(frozen=True)
class ChannelSequenceTlv(Tlv):
    """Standalone Channel Sequence (type 18); same block as in type 4."""

    tlv_type: ClassVar[int] = TlvType.CHANNEL_SEQUENCE

    sequence: ChannelSequence = field(default_factory=lambda: ChannelSequence(entries=()))

    def encode_value(self) -> bytes:
        return self.sequence.encode()

    @classmethod
    def decode_value(cls, value: bytes) -> "ChannelSequenceTlv":
        seq, used = ChannelSequence.decode(value, 0)
        if used != len(value):
            raise TruncatedFrame("trailing bytes after channel sequence")
        return cls(sequence=seq)


@dataclass(frozen=True)
class ElectionParamsTlv(Tlv):
    """Election Parameters (type 5).  Undocumented tail bytes are preserved
    verbatim in `trailing` so decode/encode is byte-identical."""

    tlv_type: ClassVar[int] = TlvType.ELECTION_PARAMETERS

    flags: int = 0
    id: int = 0
    distance_to_master: int = 0
    master_address: MacAddress = MacAddress(b"\x00" * 6)
    master_metric: int = 0
    self_metric: int = 0
    trailing: bytes = b""

    _FIXED = struct.Struct("<BHB6sII")

    def encode_value(self) -> bytes:
        return (
            self._FIXED.pack(
                self.flags & 0xFF,
                self.id & 0xFFFF,
                self.distance_to_master & 0xFF,
                self.master_address.octets,
                self.master_metric & 0xFFFFFFFF,
                self.self_metric & 0xFFFFFFFF,
            )
            + self.trailing
        )

    @classmethod
    def decode_value(cls, value: bytes) -> "ElectionParamsTlv":
        if len(value) < cls._FIXED.size:
            raise TruncatedFrame("election parameters TLV too short")
        flags, ident, distance, master_raw, master_metric, self_metric = cls._FIXED.unpack_from(value, 0)
        return cls(
            flags=flags,
            id=ident,
            distance_to_master=distance,
            master_address=MacAddress(master_raw),
            master_metric=master_metric,
            self_metric=self_metric,
            trailing=value[cls._FIXED.size :],
        )


@dataclass(frozen=True)
class ElectionParamsV2Tlv(Tlv):
    """Election Parameters v2 (type 24): adds the sync parent address and
    counters; this is the TLV the election actually keys on."""

    tlv_type: ClassVar[int] = TlvType.ELECTION_PARAMETERS_V2

    master_address: MacAddress = MacAddress(b"\x00" * 6)
    sync_address: MacAddress = MacAddress(b"\x00" * 6)
    master_counter: int = 0
    distance_to_master: int = 0
    master_metric: int = 0
    self_metric: int = 0
    self_counter: int = 0
    trailing: bytes = b""

    _FIXED = struct.Struct("<6s6sIIIII")

    def encode_value(self) -> bytes:
        return (
            self._FIXED.pack(
                self.master_address.octets,
                self.sync_address.octets,
                self.master_counter & 0xFFFFFFFF,
                self.distance_to_master & 0xFFFFFFFF,
                self.master_metric & 0xFFFFFFFF,
                self.self_metric & 0xFFFFFFFF,
                self.self_counter & 0xFFFFFFFF,
            )
            + self.trailing
        )

    @classmethod
    def decode_value(cls, value: bytes) -> "ElectionParamsV2Tlv":
        if len(value) < cls._FIXED.size:
            raise TruncatedFrame("election parameters v2 TLV too short")
        master_raw, sync_raw, mcount, distance, mmetric, smetric, scount = cls._FIXED.unpack_from(value, 0)
        return cls(
            master_address=MacAddress(master_raw),
            sync_address=MacAddress(sync_raw),
            master_counter=mcount,
            distance_to_master=distance,
            master_metric=mmetric,
            self_metric=smetric,
            self_counter=scount,
            trailing=value[cls._FIXED.size :],
        )


@dataclass(frozen=True)
class SyncTreeTlv(Tlv):
    """Synchronization Tree (type 20): path of MAC addresses from the
    announcing node's parent up to the top master (the top master announces
    just itself).  Used for loop prevention."""

    tlv_type: ClassVar[int] = TlvType.SYNCHRONIZATION_TREE

    path: tuple = ()

    def encode_value(self) -> bytes:
        return b"".join(m.octets for m in self.path)

    @classmethod
    def decode_value(cls, value: bytes) -> "SyncTreeTlv":
        if len(value) % 6 != 0:
            raise TruncatedFrame("synchronization tree length not a multiple of 6")
        return cls(path=tuple(MacAddress(value[i : i + 6]) for i in range(0, len(value), 6)))


@dataclass(frozen=True)
class VersionTlv(Tlv):
    """Version (type 21): protocol version nibbles plus device class
    (1 = macOS, 2 = iOS, other values preserved)."""

    tlv_type: ClassVar[int] = TlvType.VERSION

    major: int = 3
    minor: int = 0
    device_class: int = 1

    def encode_value(self) -> bytes:
        return bytes([((self.major & 0x0F) << 4) | (self.minor & 0x0F), self.device_class & 0xFF])

    @classmethod
    def decode_value(cls, value: bytes) -> "VersionTlv":
        if len(value) != 2:
            raise TruncatedFrame("version TLV must be exactly 2 bytes")
        return cls(major=value[0] >> 4, minor=value[0] & 0x0F, device_class=value[1])


@dataclass(frozen=True)
class DataPathStateTlv(Tlv):
    """Data Path State (type 12): the infrastructure BSSID the node is
    associated with plus its real chip MAC and its AWDL (randomized) MAC."""

    tlv_type: ClassVar[int] = TlvType.DATA_PATH_STATE

    flags: int = 0
    infra_bssid: MacAddress = MacAddress(b"\x00" * 6)
    infra_address: MacAddress = MacAddress(b"\x00" * 6)
    awdl_address: MacAddress = MacAddress(b"\x00" * 6)
    trailing: bytes = b""

    _FIXED = struct.Struct("<H6s6s6s")

    def encode_value(self) -> bytes:
        return (
            self._FIXED.pack(
                self.flags & 0xFFFF,
                self.infra_bssid.octets,
                self.infra_address.octets,
                self.awdl_address.octets,
            )
            + self.trailing
        )

    @classmethod
    def decode_value(cls, value: bytes) -> "DataPathStateTlv":
        if len(value) < cls._FIXED.size:
            raise TruncatedFrame("data path state TLV too short")
        flags, bssid_raw, infra_raw, awdl_raw = cls._FIXED.unpack_from(value, 0)
        return cls(
            flags=flags,
            infra_bssid=MacAddress(bssid_raw),
            infra_address=MacAddress(infra_raw),
            awdl_address=MacAddress(awdl_raw),
            trailing=value[cls._FIXED.size :],
        )


@dataclass(frozen=True)
class OpaqueTlv(Tlv):
    """Known TLV type whose payload this codec carries as raw bytes."""

    value: bytes = b""

    def encode_value(self) -> bytes:
        return self.value

    @classmethod
    def decode_value(cls, value: bytes):
        return cls(value=value)


class ServiceResponseTlv(OpaqueTlv):
    tlv_type: ClassVar[int] = TlvType.SERVICE_RESPONSE


class ServiceParamsTlv(OpaqueTlv):
    tlv_type: ClassVar[int] = TlvType.SERVICE_PARAMETERS


class HtCapsTlv(OpaqueTlv):
    tlv_type: ClassVar[int] = TlvType.HT_CAPABILITIES


class ArpaTlv(OpaqueTlv):
    tlv_type: ClassVar[int] = TlvType.ARPA


class VhtCapsTlv(OpaqueTlv):
    tlv_type: ClassVar[int] = TlvType.VHT_CAPABILITIES


@dataclass(frozen=True)
class UnknownTlv(Tlv):
    """Any TLV type this codec does not model (includes deprecated 1, 3, 8)."""

    type_value: int = 0
    value: bytes = b""

    def type_byte(self) -> int:
        return self.type_value

    def encode_value(self) -> bytes:
        return self.value


_TLV_CLASSES = {
    cls.tlv_type: cls
    for cls in (
        ServiceResponseTlv,
        SyncParamsTlv,
        ElectionParamsTlv,
        ServiceParamsTlv,
        HtCapsTlv,
        DataPathStateTlv,
        ArpaTlv,
        VhtCapsTlv,
        ChannelSequenceTlv,
        SyncTreeTlv,
        VersionTlv,
        ElectionParamsV2Tlv,
    )
}


def decode_tlvs(buf: bytes, offset: int = 0) -> list:
    """Decode the TLV region starting at `offset`; consumes the rest of
    `buf` exactly or raises TruncatedFrame."""
    tlvs = []
    pos = offset
    end = len(buf)
    while pos < end:
        if end - pos < 3:
            raise TruncatedFrame(f"{end - pos} stray bytes cannot form a TLV header")
        ttype = buf[pos]
        tlen = struct.unpack_from("<H", buf, pos + 1)[0]
        pos += 3
        if end - pos < tlen:
            raise TruncatedFrame(f"TLV type {ttype} wants {tlen} bytes, {end - pos} remain")
        value = buf[pos : pos + tlen]
        pos += tlen
        cls = _TLV_CLASSES.get(ttype)
        if cls is None:
            tlvs.append(UnknownTlv(type_value=ttype, value=value))
        else:
            tlvs.append(cls.decode_value(value))
    return tlvs


def encode_tlvs(tlvs) -> bytes:
    return b"".join(t.encode() for t in tlvs)


@dataclass(frozen=True)
class ActionFrame:
    """A decoded PSF or MIF: 802.11 envelope (when present), fixed AWDL
    header, and the ordered TLV list."""

    header: ActionFrameHeader
    tlvs: tuple = ()
    envelope: Optional[Dot11Envelope] = None

    def find(self, tlv_cls):
        for t in self.tlvs:
            if isinstance(t, tlv_cls):
                return t
        return None


_AF_FIXED = struct.Struct("<B3sBBBBII")


def decode_action_frame(buf: bytes, body_only: bool = False) -> ActionFrame:
    """Decode an AWDL action frame.

    `buf` is the full 802.11 MAC frame without FCS, or just the frame body
    when `body_only` is set.  Unknown TLVs decode to `UnknownTlv`; anything
    malformed raises a `DecodeError` subclass, never an arbitrary exception.
    """
    envelope = None
    offset = 0
    if not body_only:
        envelope = _decode_envelope(buf)
        if envelope.frame_subtype is not FrameSubtype.ACTION:
            raise NotAwdl("not an action frame")
        offset = _DOT11_HEADER_LEN
    if len(buf) - offset < _AF_FIXED.size:
        raise TruncatedFrame("action frame body shorter than the fixed header")
    category, oui, awdl_type, version, subtype_byte, reserved, phy_tx, target_tx = _AF_FIXED.unpack_from(buf, offset)
    if category != AWDL_CATEGORY or oui != AWDL_OUI:
        raise NotAwdl(f"category {category} / OUI {oui.hex()} is not AWDL")
    if awdl_type != AWDL_TYPE:
        raise BadFixedHeader(f"AWDL fixed header type {awdl_type} != 8")
    try:
        subtype: Union[AfSubtype, int] = AfSubtype(subtype_byte)
    except ValueError:
        subtype = subtype_byte
    header = ActionFrameHeader(
        subtype=subtype,
        phy_tx_time=phy_tx,
        target_tx_time=target_tx,
        version=version,
        reserved=reserved,
        category=category,
        oui=oui,
        awdl_type=awdl_type,
    )
    tlvs = decode_tlvs(buf, offset + _AF_FIXED.size)
    return ActionFrame(header=header, tlvs=tuple(tlvs), envelope=envelope)


def encode_action_frame(frame: ActionFrame) -> bytes:
    """Encode an action frame; inverse of `decode_action_frame`."""
    h = frame.header
    body = _AF_FIXED.pack(
        h.category & 0xFF,
        h.oui,
        h.awdl_type & 0xFF,
        h.version & 0xFF,
        h.subtype_byte & 0xFF,
        h.reserved & 0xFF,
        h.phy_tx_time & 0xFFFFFFFF,
        h.target_tx_time & 0xFFFFFFFF,
    ) + encode_tlvs(frame.tlvs)
    if frame.envelope is None:
        return body
    return frame.envelope.encode() + body


@dataclass(frozen=True)
class DataFrame:
    """AWDL data frame: SNAP encapsulation plus the 8-byte AWDL block
    (magic 0x0304, 16-bit sequence number, reserved, EtherType) and an
    opaque payload.  Only IPv6 (0x86dd) is emitted."""

    envelope: Dot11Envelope
    sequence_number: int = 0
    ethertype: int = ETHERTYPE_IPV6
    reserved: int = 0
    payload: bytes = b""


_LLC_SNAP = struct.Struct(">BBB3sH")
_DATA_HEADER = struct.Struct(">HHHH")


def decode_data_frame(buf: bytes) -> DataFrame:
    envelope = _decode_envelope(buf)
    if envelope.frame_subtype is not FrameSubtype.DATA:
        raise BadLlc("not a data frame")
    offset = _DOT11_HEADER_LEN
    if len(buf) - offset < _LLC_SNAP.size + _DATA_HEADER.size:
        raise TruncatedFrame("data frame shorter than LLC + AWDL headers")
    dsap, ssap, control, oui, protocol_id = _LLC_SNAP.unpack_from(buf, offset)
    if dsap != 0xAA or ssap != 0xAA or control != 0x03:
        raise BadLlc(f"LLC header {dsap:02x}/{ssap:02x}/{control:02x} is not SNAP")
    if oui != AWDL_OUI or protocol_id != LLC_SNAP_PROTOCOL_ID:
        raise BadLlc(f"SNAP OUI {oui.hex()} / protocol {protocol_id:#06x} is not AWDL")
    offset += _LLC_SNAP.size
    magic, seq, reserved, ethertype = _DATA_HEADER.unpack_from(buf, offset)
    if magic != DATA_MAGIC:
        raise BadMagic(f"magic {magic:#06x} != 0x0304")
    offset += _DATA_HEADER.size
    return DataFrame(
        envelope=envelope,
        sequence_number=seq,
        ethertype=ethertype,
        reserved=reserved,
        payload=buf[offset:],
    )


def encode_data_frame(frame: DataFrame) -> bytes:
    return (
        frame.envelope.encode()
        + _LLC_SNAP.pack(0xAA, 0xAA, 0x03, AWDL_OUI, LLC_SNAP_PROTOCOL_ID)
        + _DATA_HEADER.pack(
            DATA_MAGIC,
            frame.sequence_number & 0xFFFF,
            frame.reserved & 0xFFFF,
            frame.ethertype & 0xFFFF,
        )
        + frame.payload
    )


# ---------------------------------------------------------------------------
# Addressing helpers


def link_local_address(mac: MacAddress) -> IPv6Address:
    """Derive the fe80::/64 address AWDL peers use, skipping NDP: flip the
    universal/local bit of the first octet and splice ff:fe into the middle
    (the modified EUI-64 construction)."""
    o = mac.octets
    iid = bytes([o[0] ^ 0x02, o[1], o[2], 0xFF, 0xFE, o[3], o[4], o[5]])
    return IPv6Address(b"\xfe\x80" + b"\x00" * 6 + iid)


def random_awdl_mac(rng) -> MacAddress:
    """Draw a random locally-administered unicast MAC, as the interface does
    on every activation."""
    octets = bytearray(rng.randrange(256) for _ in range(6))
    octets[0] = (octets[0] & 0xFC) | 0x02
    return MacAddress(bytes(octets))


def dissect_classify(buf: bytes):
    """Best-effort decode for capture analysis: returns an ActionFrame or
    DataFrame, or raises DecodeError.  Used by the pcap tooling."""
    if len(buf) >= 1 and (buf[0] & 0x0C) == 0x08:  # type bits say data
        return decode_data_frame(buf)
    return decode_action_frame(buf)


__all__ = [
    "WireError",
    "DecodeError",
    "TruncatedFrame",
    "NotAwdl",
    "BadFixedHeader",
    "BadLlc",
    "BadMagic",
    "OversizeTlv",
    "MacAddress",
    "AfSubtype",
    "FrameSubtype",
    "Dot11Envelope",
    "ActionFrameHeader",
    "ActionFrame",
    "DataFrame",
    "TlvType",
    "Tlv",
    "ChannelEntry",
    "ChannelSequence",
    "SyncParamsTlv",
    "ChannelSequenceTlv",
    "ElectionParamsTlv",
    "ElectionParamsV2Tlv",
    "SyncTreeTlv",
    "VersionTlv",
    "DataPathStateTlv",
    "OpaqueTlv",
    "ServiceResponseTlv",
    "ServiceParamsTlv",
    "HtCapsTlv",
    "ArpaTlv",
    "VhtCapsTlv",
    "UnknownTlv",
    "decode_tlvs",
    "encode_tlvs",
    "decode_action_frame",
    "encode_action_frame",
    "decode_data_frame",
    "encode_data_frame",
    "link_local_address",
    "random_awdl_mac",
    "dissect_classify",
    "AWDL_BSSID",
    "AWDL_OUI",
    "AWDL_CATEGORY",
    "AWDL_TYPE",
    "BROADCAST",
    "DATA_MAGIC",
    "ETHERTYPE_IPV6",
]
