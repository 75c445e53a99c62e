"""Wire-format tests: round trips, CRC detection, resync, fuzz totals."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from presstrain.wire import (
    CHANNEL_MAX,
    FRAME_LEN,
    SYNC,
    ErrorKind,
    RawFrame,
    StreamParser,
    crc8,
    decode_stream,
    encode_frame,
    encode_stream,
    frames_from_ndjson,
    frames_to_ndjson,
)


def crc8_bitwise(data: bytes, poly: int = 0x07, init: int = 0x00) -> int:
    """Independent bit-by-bit CRC for cross-checking the table version."""
    crc = init
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ poly) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc


def random_frame(rng) -> RawFrame:
    return RawFrame(
        seq=int(rng.integers(0, 256)),
        timestamp_us=int(rng.integers(0, 2**63)),
        channels=tuple(int(v) for v in rng.integers(0, CHANNEL_MAX + 1, size=12)),
    )


class TestCrc:
    def test_table_matches_bitwise(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(0, 64))
            data = bytes(rng.integers(0, 256, size=n, dtype=np.uint8))
            assert crc8(data) == crc8_bitwise(data)

    def test_zero_body(self):
        body = bytes(33)
        assert crc8(body) == crc8_bitwise(body)


class TestEncode:
    def test_zero_frame_layout(self):
        f = RawFrame(seq=0, timestamp_us=0, channels=(0,) * 12)
        enc = encode_frame(f)
        assert len(enc) == FRAME_LEN
        assert enc[0] == SYNC
        assert enc[1:34] == bytes(33)
        assert enc[34] == crc8_bitwise(bytes(33))

    def test_field_layout_little_endian(self):
        f = RawFrame(seq=0xAB, timestamp_us=0x0102030405060708,
                     channels=(0x3FF,) + (0,) * 11)
        enc = encode_frame(f)
        assert enc[1] == 0xAB
        assert enc[2:10] == bytes([8, 7, 6, 5, 4, 3, 2, 1])
        assert enc[10:12] == bytes([0xFF, 0x03])  # 1023 little-endian, high 6 bits clear

    def test_channel_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            RawFrame(seq=0, timestamp_us=0, channels=(1024,) + (0,) * 11)

    def test_wrong_channel_count_rejected(self):
        with pytest.raises(ValueError):
            RawFrame(seq=0, timestamp_us=0, channels=(0,) * 11)

    def test_roundtrip_1000_random_frames(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            f = random_frame(rng)
            frames, rem, errors = decode_stream(encode_frame(f))
            assert frames == [f]
            assert rem == b""
            assert errors == []


class TestDecode:
    def test_two_concatenated_frames(self):
        rng = np.random.default_rng(1)
        f1, f2 = random_frame(rng), random_frame(rng)
        frames, rem, errors = decode_stream(encode_frame(f1) + encode_frame(f2))
        assert frames == [f1, f2]
        assert rem == b""
        assert errors == []

    def test_single_flipped_payload_bit_is_bad_crc(self):
        rng = np.random.default_rng(2)
        f = random_frame(rng)
        data = bytearray(encode_frame(f))
        data[5] ^= 0x10
        frames, _rem, errors = decode_stream(bytes(data))
        assert frames == []
        assert any(e.kind is ErrorKind.BAD_CRC for e in errors)

    def test_garbage_prefix_then_valid_frame(self):
        rng = np.random.default_rng(3)
        f = random_frame(rng)
        garbage = bytes([0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99])
        frames, rem, errors = decode_stream(garbage + encode_frame(f))
        assert frames == [f]
        assert rem == b""
        assert any(e.kind is ErrorKind.BAD_SYNC for e in errors)

    def test_partial_frame_kept_as_remainder(self):
        rng = np.random.default_rng(4)
        f = random_frame(rng)
        enc = encode_frame(f)
        frames, rem, errors = decode_stream(enc[:20])
        assert frames == []
        assert rem == enc[:20]
        parser = StreamParser()
        p_frames, _ = parser.feed(enc[:20])
        assert p_frames == []
        p_frames, _ = parser.feed(enc[20:])
        assert p_frames == [f]

    def test_byte_at_a_time_feeding(self):
        rng = np.random.default_rng(5)
        frames_in = [random_frame(rng) for _ in range(20)]
        parser = StreamParser()
        got = []
        for byte in encode_stream(frames_in):
            frames, errors = parser.feed(bytes([byte]))
            got.extend(frames)
            assert errors == []
        assert got == frames_in

    def test_resync_after_corrupt_frame(self):
        rng = np.random.default_rng(6)
        f1, f2 = random_frame(rng), random_frame(rng)
        data = bytearray(encode_frame(f1) + encode_frame(f2))
        data[3] ^= 0xFF  # corrupt the first frame's payload
        frames, rem, errors = decode_stream(bytes(data))
        assert f2 in frames
        assert any(e.kind is ErrorKind.BAD_CRC for e in errors)

    def test_flush_reports_short_frame(self):
        parser = StreamParser()
        parser.feed(bytes([SYNC, 1, 2, 3]))
        errors = parser.flush()
        assert len(errors) == 1
        assert errors[0].kind is ErrorKind.SHORT_FRAME
        assert parser.pending == b""

    def test_all_single_bit_corruptions_detected(self):
        # acceptance-grade sweep lives in test_acceptance; this is a spot check
        rng = np.random.default_rng(8)
        f = random_frame(rng)
        enc = encode_frame(f)
        for byte_i in range(FRAME_LEN):
            for bit in range(8):
                data = bytearray(enc)
                data[byte_i] ^= 1 << bit
                frames, _rem, _err = decode_stream(bytes(data))
                assert f not in frames, (byte_i, bit)

    def test_fuzz_conservation(self):
        rng = np.random.default_rng(9)
        blob = bytes(rng.integers(0, 256, size=100_000, dtype=np.uint8))
        frames, rem, errors = decode_stream(blob)
        parser = StreamParser()
        parser.feed(blob)
        assert parser.bytes_consumed + len(parser.pending) == len(blob)

    @settings(max_examples=120, deadline=None)
    @given(st.binary(max_size=600))
    def test_never_raises_on_arbitrary_bytes(self, blob):
        frames, rem, errors = decode_stream(blob)
        assert len(rem) <= len(blob)
        for f in frames:
            assert len(f.channels) == 12

    def test_interleaved_garbage_and_frames_totals(self):
        rng = np.random.default_rng(10)
        chunks = []
        n_valid = 0
        for _ in range(50):
            if rng.random() < 0.5:
                chunks.append(bytes(rng.integers(0, 256, size=int(rng.integers(1, 60)),
                                                 dtype=np.uint8)))
            else:
                chunks.append(encode_frame(random_frame(rng)))
                n_valid += 1
        blob = b"".join(chunks)
        frames, rem, errors = decode_stream(blob)
        # garbage may eat a following frame by embedding a stray sync+partial,
        # but never invents one
        assert len(frames) <= n_valid + 1
        assert all(isinstance(f, RawFrame) for f in frames)


class TestNdjson:
    def test_roundtrip(self):
        rng = np.random.default_rng(11)
        frames = [random_frame(rng) for _ in range(5)]
        text = frames_to_ndjson(frames)
        assert frames_from_ndjson(text) == frames
        assert text.count("\n") == 5
