"""Binary framing for glove readings and a resynchronising stream parser.

Frame layout (35 bytes):

    0      sync byte 0xA5
    1      sequence number, wraps mod 256
    2-9    timestamp, microseconds since stream start, u64 little-endian
    10-33  12 channels, u16 little-endian each, values 0..1023
    34     CRC-8 (poly 0x07, init 0x00) over bytes 1..33

The parser accepts arbitrary byte garbage: bad frames are reported, never
raised, and scanning resumes at the next sync byte after the failure point.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

SYNC = 0xA5
N_CHANNELS = 12
CHANNEL_MAX = 1023
FRAME_LEN = 35
_BODY = struct.Struct("<BQ12H")  # seq + timestamp + channels = 33 bytes

CRC_POLY = 0x07
CRC_INIT = 0x00


def _build_crc_table(poly: int) -> list[int]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return table


_CRC_TABLE = _build_crc_table(CRC_POLY)


def crc8(data: bytes | bytearray | memoryview, init: int = CRC_INIT) -> int:
    crc = init
    for b in data:
        crc = _CRC_TABLE[crc ^ b]
    return crc


@dataclass(frozen=True)
class RawFrame:
    """One time-stamped reading of all 12 ADC channels."""

    seq: int
    timestamp_us: int
    channels: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.seq <= 255:
            raise ValueError(f"seq {self.seq} out of range 0..255")
        if not 0 <= self.timestamp_us < 1 << 64:
            raise ValueError("timestamp_us out of u64 range")
        if len(self.channels) != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} channels, got {len(self.channels)}")
        for i, c in enumerate(self.channels):
            if not 0 <= c <= CHANNEL_MAX:
                raise ValueError(f"channel {i} value {c} out of range 0..{CHANNEL_MAX}")
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))

    def to_json_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "timestamp_us": self.timestamp_us, "channels": list(self.channels)}
        )

    @classmethod
    def from_json_line(cls, line: str) -> "RawFrame":
        d = json.loads(line)
        return cls(seq=d["seq"], timestamp_us=d["timestamp_us"], channels=tuple(d["channels"]))


class ErrorKind(str, Enum):
    BAD_SYNC = "bad_sync"
    BAD_CRC = "bad_crc"
    SHORT_FRAME = "short_frame"
    BAD_CHANNEL = "bad_channel"


@dataclass(frozen=True)
class FrameError:
    kind: ErrorKind
    offset: int  # byte offset into the parser's overall input
    length: int = 1


def encode_frame(frame: RawFrame) -> bytes:
    """35-byte wire encoding; RawFrame validation guarantees the ranges."""
    body = _BODY.pack(frame.seq, frame.timestamp_us, *frame.channels)
    return bytes([SYNC]) + body + bytes([crc8(body)])


class StreamParser:
    """Incremental frame parser with a carry-over buffer.

    Single-owner: feed() bytes as they arrive, collect frames and errors.
    Offsets in errors refer to the cumulative byte stream across feeds.
    """

    def __init__(self):
        self._buf = bytearray()
        self._base_offset = 0  # stream offset of _buf[0]
        self.frames_decoded = 0
        self.bytes_consumed = 0

    @property
    def pending(self) -> bytes:
        return bytes(self._buf)

    def feed(self, data: bytes | bytearray) -> tuple[list[RawFrame], list[FrameError]]:
        self._buf.extend(data)
        frames: list[RawFrame] = []
        errors: list[FrameError] = []
        pos = 0
        buf = self._buf
        n = len(buf)
        while True:
            # hunt for the next sync byte
            sync_at = buf.find(SYNC, pos)
            if sync_at == -1:
                if n > pos:
                    errors.append(
                        FrameError(ErrorKind.BAD_SYNC, self._base_offset + pos, n - pos)
                    )
                pos = n
                break
            if sync_at > pos:
                errors.append(
                    FrameError(ErrorKind.BAD_SYNC, self._base_offset + pos, sync_at - pos)
                )
            if n - sync_at < FRAME_LEN:
                pos = sync_at  # partial frame: keep for the next feed
                break
            body = bytes(buf[sync_at + 1 : sync_at + FRAME_LEN - 1])
            crc_rx = buf[sync_at + FRAME_LEN - 1]
            if crc8(body) != crc_rx:
                errors.append(FrameError(ErrorKind.BAD_CRC, self._base_offset + sync_at, FRAME_LEN))
                pos = sync_at + 1  # resync at the next sync byte after this one
                continue
            seq, ts, *channels = _BODY.unpack(body)
            if any(c > CHANNEL_MAX for c in channels):
                errors.append(
                    FrameError(ErrorKind.BAD_CHANNEL, self._base_offset + sync_at, FRAME_LEN)
                )
                pos = sync_at + 1
                continue
            frames.append(RawFrame(seq=seq, timestamp_us=ts, channels=tuple(channels)))
            pos = sync_at + FRAME_LEN
        consumed = pos
        del buf[:consumed]
        self._base_offset += consumed
        self.bytes_consumed += consumed
        self.frames_decoded += len(frames)
        return frames, errors

    def flush(self) -> list[FrameError]:
        """Declare end-of-stream: any pending partial frame becomes an error."""
        errors: list[FrameError] = []
        if self._buf:
            kind = ErrorKind.SHORT_FRAME if self._buf[0] == SYNC else ErrorKind.BAD_SYNC
            errors.append(FrameError(kind, self._base_offset, len(self._buf)))
            self.bytes_consumed += len(self._buf)
            self._base_offset += len(self._buf)
            self._buf.clear()
        return errors


def decode_stream(buffer: bytes | bytearray) -> tuple[list[RawFrame], bytes, list[FrameError]]:
    """One-shot decode: all complete frames, the unconsumed tail, all errors."""
    parser = StreamParser()
    frames, errors = parser.feed(buffer)
    return frames, parser.pending, errors


def encode_stream(frames: Iterable[RawFrame]) -> bytes:
    return b"".join(encode_frame(f) for f in frames)


def frames_to_ndjson(frames: Sequence[RawFrame]) -> str:
    return "\n".join(f.to_json_line() for f in frames) + ("\n" if frames else "")


def frames_from_ndjson(text: str) -> list[RawFrame]:
    return [RawFrame.from_json_line(line) for line in text.splitlines() if line.strip()]
