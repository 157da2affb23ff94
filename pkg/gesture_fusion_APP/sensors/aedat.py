"""
AEDAT 2.0 event file codec (jAER lineage).
Location: gesture_fusion_APP/sensors/aedat.py

Layout: ASCII header lines starting with '#', the first one exactly
'#!AER-DAT2.0', then 8-byte records of a big-endian 32-bit address word and
a big-endian 32-bit microsecond timestamp.

Address word: bit 0 polarity (1 = ON); DVS128 keeps x in bits 1-7 and y in
bits 8-14; DAVIS240 keeps x in bits 1-8 and y in bits 9-16.
"""
import io
import logging
from pathlib import Path
from typing import BinaryIO, Iterable, List, Tuple, Union

import numpy as np

from ..exceptions import CoordinateOutOfRange, MalformedHeader, NonMonotonicTime, TruncatedEvent
from .types import DvsEvent, EventArray, SensorGeometry, SensorKind

logger = logging.getLogger(__name__)

MAGIC = b'#!AER-DAT2.0'
RECORD_DTYPE = np.dtype([('address', '>u4'), ('timestamp', '>u4')])
WRAP = 1 << 32
HALF_WRAP = 1 << 31

# (coordinate bits, x shift, y shift) per chip
ADDRESS_LAYOUT = {
    SensorKind.DVS128: (7, 1, 8),
    SensorKind.DAVIS240: (8, 1, 9),
}

ByteSource = Union[bytes, bytearray, str, Path, BinaryIO]


def _read_bytes(byte_source: ByteSource) -> bytes:
    if isinstance(byte_source, (bytes, bytearray)):
        return bytes(byte_source)
    if isinstance(byte_source, (str, Path)):
        return Path(byte_source).read_bytes()
    return byte_source.read()


def _split_header(data: bytes) -> Tuple[List[str], bytes]:
    """Split the '#' header lines from the binary body"""
    lines = []
    offset = 0
    while offset < len(data) and data[offset:offset + 1] == b'#':
        newline = data.find(b'\n', offset)
        if newline < 0:
            newline = len(data) - 1
        lines.append(data[offset:newline + 1].decode('ascii', errors='replace').rstrip('\r\n'))
        offset = newline + 1
    return lines, data[offset:]


def _geometry_from_header(lines: List[str]) -> SensorGeometry:
    for line in lines[1:]:
        content = line.lstrip('#').strip()
        if content.lower().startswith('chip:'):
            return SensorGeometry.for_kind(content.split(':', 1)[1].strip())
    return SensorGeometry.for_kind(SensorKind.DVS128)


def unwrap_timestamps(raw: np.ndarray) -> np.ndarray:
    """Undo 32-bit wraparound; regressions smaller than 2^31 are errors"""
    raw = raw.astype(np.int64)
    if len(raw) < 2:
        return raw
    steps = np.diff(raw)
    wraps = steps < -HALF_WRAP
    regressions = (steps < 0) & ~wraps
    if regressions.any():
        index = int(np.argmax(regressions)) + 1
        raise NonMonotonicTime(
            f"Timestamp {int(raw[index])} at event {index} precedes {int(raw[index - 1])}"
        )
    if wraps.any():
        logger.debug(f"Unwrapping {int(wraps.sum())} timestamp wraparound(s)")
    offsets = np.concatenate(([0], np.cumsum(wraps, dtype=np.int64))) * WRAP
    return raw + offsets


def decode_addresses(address: np.ndarray, geometry: SensorGeometry) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split address words into (x, y, polarity) columns"""
    bits, x_shift, y_shift = ADDRESS_LAYOUT[geometry.kind]
    mask = (1 << bits) - 1
    address = address.astype(np.int64)
    polarity = (address & 1).astype(np.int8)
    x = (address >> x_shift) & mask
    y = (address >> y_shift) & mask
    return x, y, polarity


def encode_addresses(events: EventArray, geometry: SensorGeometry) -> np.ndarray:
    _, x_shift, y_shift = ADDRESS_LAYOUT[geometry.kind]
    return (
        (events.y << y_shift) | (events.x << x_shift) | events.polarity.astype(np.int64)
    ).astype(np.uint32)


def check_coordinates(events: EventArray, geometry: SensorGeometry):
    outside = (
        (events.x < 0) | (events.x >= geometry.width)
        | (events.y < 0) | (events.y >= geometry.height)
    )
    if outside.any():
        index = int(np.argmax(outside))
        raise CoordinateOutOfRange(
            f"Event {index} at ({int(events.x[index])}, {int(events.y[index])}) lies outside "
            f"the {geometry.width}x{geometry.height} {geometry.kind.value} array"
        )


def parse_aedat(byte_source: ByteSource) -> Tuple[SensorGeometry, EventArray]:
    """Parse an AEDAT 2.0 stream into its sensor geometry and events in file order"""
    data = _read_bytes(byte_source)
    lines, body = _split_header(data)
    if not lines or lines[0].strip() != MAGIC.decode('ascii'):
        raise MalformedHeader(f"AEDAT stream must start with '{MAGIC.decode('ascii')}'")

    geometry = _geometry_from_header(lines)
    if len(body) % RECORD_DTYPE.itemsize:
        raise TruncatedEvent(
            f"Event body of {len(body)} bytes is not a multiple of {RECORD_DTYPE.itemsize}"
        )

    records = np.frombuffer(body, dtype=RECORD_DTYPE)
    x, y, polarity = decode_addresses(records['address'], geometry)
    t = unwrap_timestamps(records['timestamp'])
    events = EventArray(x, y, t, polarity)
    check_coordinates(events, geometry)

    logger.debug(f"Parsed {len(events)} events from a {geometry.kind.value} AEDAT stream")
    return geometry, events


def write_aedat(geometry: SensorGeometry, events: Union[EventArray, Iterable[DvsEvent]],
                byte_sink: Union[str, Path, BinaryIO, None] = None) -> bytes:
    """Serialize events as AEDAT 2.0; writes to byte_sink when given and returns the bytes"""
    if not isinstance(events, EventArray):
        events = EventArray.from_events(events)
    check_coordinates(events, geometry)
    if len(events) and events.t.min() < 0:
        raise NonMonotonicTime("Event timestamps must be non-negative")
    # the reader must be able to unwrap what we write
    steps = np.diff(events.t)
    if ((steps < 0) | (steps >= HALF_WRAP)).any():
        raise NonMonotonicTime("Event timestamps must be non-decreasing with gaps below 2^31 us")

    records = np.empty(len(events), dtype=RECORD_DTYPE)
    records['address'] = encode_addresses(events, geometry)
    records['timestamp'] = (events.t % WRAP).astype(np.uint32)

    header = io.BytesIO()
    header.write(MAGIC + b'\r\n')
    header.write(f'# chip: {geometry.kind.value}\r\n'.encode('ascii'))
    header.write(b'# timestamps: microseconds, address: bit0 polarity\r\n')
    data = header.getvalue() + records.tobytes()

    if isinstance(byte_sink, (str, Path)):
        Path(byte_sink).write_bytes(data)
    elif byte_sink is not None:
        byte_sink.write(data)
    return data
