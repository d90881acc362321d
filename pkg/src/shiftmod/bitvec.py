"""Fixed-width unsigned integers restricted to the operations the modulus
hardware performs: compare, subtract, single-bit shifts and bit-length.

Values are backed by a Python ``int`` masked to ``width`` bits; the width is
authoritative and mixed-width arithmetic raises :class:`WidthMismatch`.
"""
from __future__ import annotations

import random
from enum import IntEnum

__all__ = [
    "BitVec", "Ordering", "BitVecError", "WidthMismatch", "Underflow",
    "Overflow", "from_text", "to_text", "bitlen", "compare", "sub",
    "shl1", "shr1", "random_pair",
]

_DIGITS = {10: frozenset("0123456789"), 16: frozenset("0123456789abcdefABCDEF")}


class BitVecError(ValueError):
    pass


class WidthMismatch(BitVecError):
    pass


class Underflow(BitVecError):
    pass


class Overflow(BitVecError):
    pass


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class BitVec:
    """Immutable unsigned integer of a fixed bit width."""

    __slots__ = ("width", "value")

    def __init__(self, width: int, value: int = 0):
        if width < 1:
            raise BitVecError(f"width must be positive, got {width}")
        if value < 0 or value >> width:
            raise Overflow(f"value does not fit in {width} bits")
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("BitVec is immutable")

    def __eq__(self, other):
        if not isinstance(other, BitVec):
            return NotImplemented
        return self.width == other.width and self.value == other.value

    def __hash__(self):
        return hash((self.width, self.value))

    def __repr__(self):
        return f"BitVec({self.width}, 0x{self.value:x})"

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __reduce__(self):
        return (BitVec, (self.width, self.value))

    @property
    def msb(self) -> int:
        return (self.value >> (self.width - 1)) & 1

    def to_bytes(self) -> bytes:
        """Little-endian, ceil(width/8) bytes."""
        return self.value.to_bytes((self.width + 7) // 8, "little")

    @classmethod
    def from_bytes(cls, width: int, data: bytes) -> "BitVec":
        return cls(width, int.from_bytes(data, "little"))


def _new(width: int, value: int) -> BitVec:
    # skips range validation on internal hot paths
    v = object.__new__(BitVec)
    object.__setattr__(v, "width", width)
    object.__setattr__(v, "value", value)
    return v


def _check_widths(a: BitVec, b: BitVec) -> None:
    if a.width != b.width:
        raise WidthMismatch(f"width mismatch: {a.width} vs {b.width}")


def from_text(text: str, radix: int, width: int) -> BitVec:
    if radix not in _DIGITS:
        raise BitVecError(f"unsupported radix {radix}")
    if not text or not set(text) <= _DIGITS[radix]:
        raise BitVecError(f"malformed base-{radix} numeral: {text!r}")
    value = int(text, radix)
    if value >> width:
        raise Overflow(f"{text!r} exceeds {width} bits")
    return BitVec(width, value)


def to_text(v: BitVec, radix: int = 16) -> str:
    if radix == 16:
        return format(v.value, "x")
    if radix == 10:
        return str(v.value)
    raise BitVecError(f"unsupported radix {radix}")


def bitlen(v: BitVec) -> int:
    return v.value.bit_length()


def compare(a: BitVec, b: BitVec) -> Ordering:
    _check_widths(a, b)
    if a.value < b.value:
        return Ordering.LT
    if a.value > b.value:
        return Ordering.GT
    return Ordering.EQ


def sub(a: BitVec, b: BitVec) -> BitVec:
    _check_widths(a, b)
    if a.value < b.value:
        raise Underflow(f"{a.value} - {b.value} underflows")
    return _new(a.width, a.value - b.value)


def shl1(v: BitVec) -> BitVec:
    if v.msb:
        raise Overflow(f"shl1 would drop the top bit of a {v.width}-bit value")
    return _new(v.width, v.value << 1)


def shr1(v: BitVec) -> BitVec:
    return _new(v.width, v.value >> 1)


def random_pair(width: int, rng: int | random.Random) -> tuple[BitVec, BitVec]:
    """Draw ``(dividend, divisor)`` with dividend uniform on [1, 2**width - 1]
    and divisor uniform on [1, dividend].

    ``rng`` is either a seed or a ``random.Random`` instance (Mersenne
    Twister, identical across platforms for a given seed). Passing an
    instance lets a campaign draw a reproducible stream of pairs.
    """
    if width < 2:
        raise BitVecError("random_pair needs width >= 2")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    dividend = rng.randint(1, (1 << width) - 1)
    divisor = rng.randint(1, dividend)
    return _new(width, dividend), _new(width, divisor)
