"""Byte-framed host <-> device protocol for the modulus unit.

Frames (all integers little-endian)::

    request   0x4D | width:u16 | dividend[ceil(N/8)] | divisor[ceil(N/8)]
    response  0x52 | width:u16 | result[ceil(N/8)]   | cycles:u64
    error     0x45 | code:u8

Error codes: 0x01 zero divisor, 0x02 unsupported width, 0x03 malformed frame.
"""
from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass

from .bitvec import BitVec
from .modfsm import ModUnit

__all__ = [
    "OP_REQUEST", "OP_RESPONSE", "OP_ERROR", "ERR_ZERO_DIVISOR", "ERR_BAD_WIDTH",
    "ERR_MALFORMED", "SUPPORTED_WIDTHS", "Request", "Response", "ErrorFrame", "Frame",
    "ProtocolError", "encode_request", "decode_request", "encode_response",
    "decode_response", "encode_error", "decode_error", "read_frame", "Device", "serve",
]

OP_REQUEST = 0x4D
OP_RESPONSE = 0x52
OP_ERROR = 0x45

ERR_ZERO_DIVISOR = 0x01
ERR_BAD_WIDTH = 0x02
ERR_MALFORMED = 0x03

SUPPORTED_WIDTHS = (32, 64, 128, 256, 1024, 2048)
_CYCLES_MAX = (1 << 64) - 1


class ProtocolError(ValueError):
    """Structured decode/encode failure; ``code`` is the wire error code and
    ``offset`` the byte position the problem was found at. When raised by a
    :class:`Device`, ``output`` holds the bytes sent before the abort."""

    def __init__(self, message: str, code: int = ERR_MALFORMED, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.message = message
        self.code = code
        self.offset = offset
        self.output = b""


class Truncated(ProtocolError):
    """Not enough bytes yet for a complete frame."""


@dataclass(frozen=True)
class Request:
    width_bits: int
    dividend: BitVec
    divisor: BitVec


@dataclass(frozen=True)
class Response:
    width_bits: int
    result: BitVec
    cycles: int


@dataclass(frozen=True)
class ErrorFrame:
    code: int


@dataclass(frozen=True)
class Frame:
    opcode: int
    payload: bytes

    def to_bytes(self) -> bytes:
        return bytes([self.opcode]) + self.payload


def _nbytes(width: int) -> int:
    return (width + 7) // 8


def _check_width(width: int, offset: int = 0) -> None:
    if width not in SUPPORTED_WIDTHS:
        raise ProtocolError(f"unsupported width {width}", ERR_BAD_WIDTH, offset)


def _frame_length(buf, offset: int) -> int:
    """Total length of the frame starting at ``offset``; raises if the opcode
    is unknown or the header is incomplete."""
    if offset >= len(buf):
        raise Truncated("empty frame", ERR_MALFORMED, offset)
    op = buf[offset]
    if op == OP_ERROR:
        return 2
    if op not in (OP_REQUEST, OP_RESPONSE):
        raise ProtocolError(f"bad opcode 0x{op:02x}", ERR_MALFORMED, offset)
    if len(buf) - offset < 3:
        raise Truncated("truncated header", ERR_MALFORMED, len(buf))
    (width,) = struct.unpack_from("<H", buf, offset + 1)
    _check_width(width, offset + 1)
    nb = _nbytes(width)
    return 3 + (2 * nb if op == OP_REQUEST else nb + 8)


def read_frame(buf, offset: int = 0) -> tuple[Frame, int]:
    """Split one frame off ``buf`` at ``offset``; returns it and the next offset."""
    length = _frame_length(buf, offset)
    if len(buf) - offset < length:
        raise Truncated(f"frame needs {length} bytes, have {len(buf) - offset}",
                        ERR_MALFORMED, len(buf))
    return Frame(buf[offset], bytes(buf[offset + 1:offset + length])), offset + length


def _whole(data: bytes, opcode: int) -> Frame:
    if not data:
        raise Truncated("empty frame", ERR_MALFORMED, 0)
    if data[0] != opcode:
        raise ProtocolError(f"bad opcode 0x{data[0]:02x}, expected 0x{opcode:02x}",
                            ERR_MALFORMED, 0)
    frame, end = read_frame(data, 0)
    if end != len(data):
        raise ProtocolError("trailing bytes after frame", ERR_MALFORMED, end)
    return frame


def encode_request(req: Request) -> bytes:
    _check_width(req.width_bits)
    if req.dividend.width != req.width_bits or req.divisor.width != req.width_bits:
        raise ProtocolError("operand width differs from width field")
    if not req.divisor.value:
        raise ProtocolError("zero divisor", ERR_ZERO_DIVISOR)
    return (struct.pack("<BH", OP_REQUEST, req.width_bits)
            + req.dividend.to_bytes() + req.divisor.to_bytes())


def _parse_request(frame: Frame, offset: int = 0) -> Request:
    (width,) = struct.unpack_from("<H", frame.payload, 0)
    nb = _nbytes(width)
    try:
        dividend = BitVec.from_bytes(width, frame.payload[2:2 + nb])
        divisor = BitVec.from_bytes(width, frame.payload[2 + nb:])
    except ValueError as exc:
        # a non-byte-aligned width could carry stray high bits
        raise ProtocolError(str(exc), ERR_MALFORMED, offset + 3) from None
    if not divisor.value:
        raise ProtocolError("zero divisor", ERR_ZERO_DIVISOR, offset + 3 + nb)
    return Request(width, dividend, divisor)


def decode_request(data: bytes) -> Request:
    return _parse_request(_whole(data, OP_REQUEST))


def encode_response(resp: Response) -> bytes:
    _check_width(resp.width_bits)
    if resp.result.width != resp.width_bits:
        raise ProtocolError("result width differs from width field")
    if not 0 <= resp.cycles <= _CYCLES_MAX:
        raise ProtocolError("cycle count does not fit in 64 bits")
    return (struct.pack("<BH", OP_RESPONSE, resp.width_bits)
            + resp.result.to_bytes() + struct.pack("<Q", resp.cycles))


def decode_response(data: bytes) -> Response:
    frame = _whole(data, OP_RESPONSE)
    (width,) = struct.unpack_from("<H", frame.payload, 0)
    nb = _nbytes(width)
    result = BitVec.from_bytes(width, frame.payload[2:2 + nb])
    (cycles,) = struct.unpack_from("<Q", frame.payload, 2 + nb)
    return Response(width, result, cycles)


def encode_error(code: int) -> bytes:
    return bytes([OP_ERROR, code])


def decode_error(data: bytes) -> ErrorFrame:
    return ErrorFrame(_whole(data, OP_ERROR).payload[0])


class Device:
    """Device side of the link: an input FIFO feeding one ModUnit whose
    results (with the cycle timer value) are queued on the output FIFO.

    Bytes may arrive in arbitrary chunks; incomplete frames stay buffered.
    A zero divisor answers with an error frame and the loop continues. An
    unknown opcode or unsupported width cannot be resynchronised, so the
    device answers with an error frame and raises :class:`ProtocolError`.
    """

    def __init__(self):
        self.rx = bytearray()
        self.tx: deque[bytes] = deque()
        self.consumed = 0  # bytes taken off the link so far
        self.handled = 0
        self._units: dict[int, ModUnit] = {}

    def _unit(self, width: int) -> ModUnit:
        if width not in self._units:
            self._units[width] = ModUnit(width)
        return self._units[width]

    def feed(self, data: bytes) -> bytes:
        """Push bytes in, process every complete frame, return the bytes the
        device sent back."""
        self.rx += data
        pos = 0
        try:
            while pos < len(self.rx):
                try:
                    frame, end = read_frame(self.rx, pos)
                except Truncated:
                    break
                except ProtocolError as exc:
                    self._abort(exc.message, exc.code, self.consumed + exc.offset)
                if frame.opcode != OP_REQUEST:
                    self._abort(f"device cannot accept opcode 0x{frame.opcode:02x}",
                                ERR_MALFORMED, self.consumed + pos)
                self._handle(frame, self.consumed + pos)
                pos = end
        finally:
            del self.rx[:pos]
            self.consumed += pos
        return self.drain()

    def _abort(self, message: str, code: int, offset: int):
        self.tx.append(encode_error(code))
        err = ProtocolError(message, code, offset)
        err.output = self.drain()
        raise err

    def _handle(self, frame: Frame, offset: int):
        try:
            req = _parse_request(frame, offset)
        except ProtocolError as exc:
            self.tx.append(encode_error(exc.code))
            return
        unit = self._unit(req.width_bits)
        unit.start(req.dividend, req.divisor).run_to_done()
        self.tx.append(encode_response(Response(req.width_bits, unit.result, unit.cycle_count)))
        self.handled += 1

    def drain(self) -> bytes:
        out = b"".join(self.tx)
        self.tx.clear()
        return out

    def close(self):
        """End of stream: leftover bytes mean a truncated frame."""
        if self.rx:
            self._abort(f"truncated frame ({len(self.rx)} stray bytes)",
                        ERR_MALFORMED, self.consumed)


def serve(stream: bytes) -> bytes:
    """Run a whole request stream through a fresh device, FIFO order."""
    dev = Device()
    out = dev.feed(stream)
    dev.close()
    return out
