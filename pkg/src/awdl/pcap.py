"""Classic pcap and minimal radiotap support.

Reads and writes microsecond-resolution classic pcap (both byte orders on
read).  Two link types are understood: bare 802.11 (105) and radiotap +
802.11 (127).  Radiotap parsing is deliberately minimal: it extracts the
64-bit MAC timestamp and the dBm antenna signal, skipping everything else
via the standard size/alignment rules, and honors the FCS-present flag by
stripping the trailing checksum.  The writer always produces radiotap with
timestamp + signal so exported captures carry per-frame clocks.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator, Optional

PCAP_MAGIC = 0xA1B2C3D4
PCAP_MAGIC_NS = 0xA1B23C4D  # nanosecond variant: recognized, rejected
LINKTYPE_IEEE802_11 = 105
LINKTYPE_RADIOTAP = 127

_GLOBAL_HEADER = struct.Struct("<IHHiIII")
_RECORD_HEADER = struct.Struct("<IIII")

# (size, alignment) of the radiotap fields up to dBm antenna signal; any
# later field is irrelevant because parsing stops at bit 5.
_RADIOTAP_FIELDS = {
    0: (8, 8),  # TSFT
    1: (1, 1),  # flags
    2: (1, 1),  # rate
    3: (4, 2),  # channel
    4: (2, 2),  # FHSS
    5: (1, 1),  # dBm antenna signal
}
_RADIOTAP_FLAG_FCS = 0x10


class PcapError(ValueError):
    """Unreadable or unsupported capture file."""


@dataclass(frozen=True)
class CaptureRecord:
    """One captured frame: source tag, microsecond timestamp (radiotap MAC
    time when present, else the pcap header clock), RSSI when known, and
    the 802.11 frame bytes with any FCS already stripped."""

    source_id: str
    timestamp_us: int
    rssi: Optional[int]
    frame: bytes


def parse_radiotap(buf: bytes) -> tuple[Optional[int], Optional[int], bytes]:
    """Split a radiotap-prefixed frame into (tsft_us, rssi_dbm, frame)."""
    if len(buf) < 8:
        raise PcapError("radiotap header shorter than 8 bytes")
    version, _pad, header_len = struct.unpack_from("<BBH", buf, 0)
    if version != 0 or header_len < 8 or header_len > len(buf):
        raise PcapError(f"bad radiotap header (version {version}, length {header_len})")
    presents = []
    pos = 4
    while True:
        if pos + 4 > header_len:
            raise PcapError("radiotap present chain exceeds header")
        word = struct.unpack_from("<I", buf, pos)[0]
        presents.append(word)
        pos += 4
        if not word & (1 << 31):
            break
    tsft = None
    rssi = None
    flags = 0
    offset = pos
    for bit in range(29):  # namespace bits 29/30 end standard parsing
        if not presents[0] & (1 << bit):
            continue
        if bit not in _RADIOTAP_FIELDS:
            break  # unknown size: cannot skip further safely
        size, align = _RADIOTAP_FIELDS[bit]
        offset = (offset + align - 1) & ~(align - 1)
        if offset + size > header_len:
            raise PcapError("radiotap field runs past header")
        if bit == 0:
            tsft = struct.unpack_from("<Q", buf, offset)[0]
        elif bit == 1:
            flags = buf[offset]
        elif bit == 5:
            rssi = struct.unpack_from("<b", buf, offset)[0]
        offset += size
        if bit == 5:
            break
    frame = buf[header_len:]
    if flags & _RADIOTAP_FLAG_FCS and len(frame) >= 4:
        frame = frame[:-4]
    return tsft, rssi, frame


def build_radiotap(timestamp_us: int, rssi: Optional[int]) -> bytes:
    """Radiotap header carrying TSFT and, when known, the antenna signal."""
    if rssi is None:
        present = 1 << 0
        header_len = 16
        tail = b""
    else:
        present = (1 << 0) | (1 << 5)
        header_len = 17
        tail = struct.pack("<b", max(-128, min(127, rssi)))
    return (
        struct.pack("<BBHI", 0, 0, header_len, present)
        + struct.pack("<Q", timestamp_us & 0xFFFFFFFFFFFFFFFF)
        + tail
    )


def read_pcap(path: str, source_id: Optional[str] = None) -> list:
    """Load a capture file into CaptureRecords, sorted by timestamp."""
    with open(path, "rb") as fh:
        data = fh.read()
    return read_pcap_bytes(data, source_id or str(path))


def read_pcap_lenient(path: str, source_id: Optional[str] = None) -> tuple[list, Optional[str]]:
    """Like `read_pcap`, but a capture cut off mid-record yields the intact
    records plus a description of the problem instead of failing."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _parse_pcap(data, source_id or str(path), lenient=True)


def read_pcap_bytes(data: bytes, source_id: str) -> list:
    records, _ = _parse_pcap(data, source_id, lenient=False)
    return records


def _parse_pcap(data: bytes, source_id: str, lenient: bool) -> tuple[list, Optional[str]]:
    if len(data) < _GLOBAL_HEADER.size:
        raise PcapError("file shorter than a pcap global header")
    magic = struct.unpack_from("<I", data, 0)[0]
    if magic == PCAP_MAGIC:
        endian = "<"
    elif magic == struct.unpack(">I", struct.pack("<I", PCAP_MAGIC))[0]:
        endian = ">"
    elif magic in (PCAP_MAGIC_NS, int.from_bytes(struct.pack("<I", PCAP_MAGIC_NS), "big")):
        raise PcapError("nanosecond pcap is not supported; rewrite with microsecond timestamps")
    elif data[:4] == b"\x0a\x0d\x0d\x0a":
        raise PcapError("pcapng input is not supported; convert to classic pcap")
    else:
        raise PcapError(f"not a pcap file (magic {data[:4].hex()})")
    hdr = struct.Struct(endian + "IHHiIII")
    _, _vmaj, _vmin, _zone, _sigfigs, _snaplen, network = hdr.unpack_from(data, 0)
    if network not in (LINKTYPE_IEEE802_11, LINKTYPE_RADIOTAP):
        raise PcapError(f"unsupported link type {network}")
    rec_hdr = struct.Struct(endian + "IIII")
    records = []
    error = None
    pos = hdr.size
    while pos < len(data):
        if pos + rec_hdr.size > len(data):
            error = "truncated record header"
            break
        ts_sec, ts_usec, incl_len, _orig_len = rec_hdr.unpack_from(data, pos)
        pos += rec_hdr.size
        if pos + incl_len > len(data):
            error = f"truncated record body ({len(data) - pos} of {incl_len} bytes)"
            break
        body = data[pos : pos + incl_len]
        pos += incl_len
        ts = ts_sec * 1_000_000 + ts_usec
        rssi = None
        frame = body
        if network == LINKTYPE_RADIOTAP:
            tsft, rssi, frame = parse_radiotap(body)
            if tsft is not None:
                ts = tsft
        records.append(CaptureRecord(source_id=source_id, timestamp_us=ts, rssi=rssi, frame=frame))
    if error is not None and not lenient:
        raise PcapError(error)
    records.sort(key=lambda r: r.timestamp_us)
    return records, error


def write_pcap(path: str, records) -> None:
    """Write CaptureRecords as a classic pcap with radiotap link type."""
    with open(path, "wb") as fh:
        fh.write(_GLOBAL_HEADER.pack(PCAP_MAGIC, 2, 4, 0, 0, 65535, LINKTYPE_RADIOTAP))
        for rec in records:
            body = build_radiotap(rec.timestamp_us, rec.rssi) + rec.frame
            ts_sec, ts_usec = divmod(max(rec.timestamp_us, 0), 1_000_000)
            fh.write(_RECORD_HEADER.pack(ts_sec, ts_usec, len(body), len(body)))
            fh.write(body)


__all__ = [
    "PcapError",
    "CaptureRecord",
    "LINKTYPE_IEEE802_11",
    "LINKTYPE_RADIOTAP",
    "parse_radiotap",
    "build_radiotap",
    "read_pcap",
    "read_pcap_lenient",
    "read_pcap_bytes",
    "write_pcap",
]
