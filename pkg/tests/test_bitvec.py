import random

import pytest
from hypothesis import given, strategies as st

from shiftmod import bitvec
from shiftmod.bitvec import (BitVec, Ordering, Overflow, Underflow, WidthMismatch,
                             bitlen, compare, from_text, random_pair, shl1, shr1, sub, to_text)

WIDTHS = [16, 32, 64, 128, 256, 1024, 2048]


def test_from_text():
    assert from_text("0", 10, 32) == BitVec(32, 0)
    assert from_text("ff", 16, 32) == BitVec(32, 255)
    assert from_text("FF", 16, 32) == BitVec(32, 255)
    assert from_text("4294967295", 10, 32).value == 2**32 - 1


@pytest.mark.parametrize("text,radix", [("2^64", 10), ("", 10), ("-1", 10), ("0x10", 16),
                                         ("1_0", 10), (" 1", 10), ("g", 16), ("a", 10)])
def test_from_text_malformed(text, radix):
    with pytest.raises(bitvec.BitVecError):
        from_text(text, radix, 64)


def test_from_text_too_wide():
    with pytest.raises(Overflow):
        from_text("4294967296", 10, 32)
    with pytest.raises(Overflow):
        from_text("1" + "0" * 8, 16, 32)


def test_to_text():
    assert to_text(BitVec(32, 255), 16) == "ff"
    assert to_text(BitVec(32, 0), 10) == "0"
    assert to_text(BitVec(32, 0), 16) == "0"
    assert to_text(BitVec(2048, 2**2047), 16) == "8" + "0" * 511


@pytest.mark.parametrize("width", WIDTHS)
def test_text_round_trip(width):
    rng = random.Random(width)
    for _ in range(1000):
        v = BitVec(width, rng.getrandbits(width))
        assert from_text(to_text(v, 16), 16, width) == v
        assert from_text(to_text(v, 10), 10, width) == v


def test_bitlen():
    assert bitlen(BitVec(32, 0)) == 0
    assert bitlen(BitVec(32, 1)) == 1
    assert bitlen(BitVec(32, 10)) == 4
    assert bitlen(BitVec(32, 2**32 - 1)) == 32


def test_compare():
    assert compare(BitVec(32, 10), BitVec(32, 3)) is Ordering.GT
    assert compare(BitVec(32, 5), BitVec(32, 5)) is Ordering.EQ
    assert compare(BitVec(32, 3), BitVec(32, 10)) is Ordering.LT
    with pytest.raises(WidthMismatch):
        compare(BitVec(32, 1), BitVec(64, 1))


def test_sub():
    assert sub(BitVec(32, 10), BitVec(32, 3)) == BitVec(32, 7)
    assert sub(BitVec(32, 5), BitVec(32, 5)) == BitVec(32, 0)
    with pytest.raises(Underflow):
        sub(BitVec(32, 3), BitVec(32, 10))
    with pytest.raises(WidthMismatch):
        sub(BitVec(64, 3), BitVec(32, 1))


def test_shifts():
    assert shl1(BitVec(32, 3)) == BitVec(32, 6)
    assert shr1(BitVec(32, 6)) == BitVec(32, 3)
    assert shr1(BitVec(32, 1)) == BitVec(32, 0)
    with pytest.raises(Overflow):
        shl1(BitVec(32, 2**31))


def test_construction_guards():
    with pytest.raises(Overflow):
        BitVec(8, 256)
    with pytest.raises(Overflow):
        BitVec(8, -1)
    with pytest.raises(bitvec.BitVecError):
        BitVec(0, 0)
    v = BitVec(8, 3)
    with pytest.raises(AttributeError):
        v.value = 4


def test_bytes_little_endian():
    assert BitVec(32, 10).to_bytes() == bytes([10, 0, 0, 0])
    assert BitVec(12, 0xABC).to_bytes() == bytes([0xBC, 0x0A])
    assert BitVec.from_bytes(32, bytes([3, 0, 0, 0])) == BitVec(32, 3)


widths = st.sampled_from(WIDTHS)


@st.composite
def same_width_pair(draw):
    w = draw(widths)
    a = draw(st.integers(0, 2**w - 1))
    b = draw(st.integers(0, 2**w - 1))
    return BitVec(w, a), BitVec(w, b)


@given(same_width_pair())
def test_sub_inverts_add(pair):
    a, b = pair
    hi, lo = (a, b) if a.value >= b.value else (b, a)
    assert sub(hi, lo).value + lo.value == hi.value


@given(same_width_pair())
def test_compare_agrees_with_ints(pair):
    a, b = pair
    expect = (a.value > b.value) - (a.value < b.value)
    assert compare(a, b) == expect


@given(widths.flatmap(lambda w: st.integers(1, 2**(w - 1) - 1).map(lambda v: BitVec(w, v))))
def test_shl1_grows_bitlen_by_one(v):
    assert bitlen(shl1(v)) == bitlen(v) + 1


@pytest.mark.parametrize("width", [16, 32, 64, 128, 256, 1024, 2048])
def test_compare_bulk(width):
    rng = random.Random(1000 + width)
    n = 1_000_000 if width <= 64 else 100_000
    for _ in range(n):
        a, b = rng.getrandbits(width), rng.getrandbits(width)
        assert compare(BitVec(width, a), BitVec(width, b)) == (a > b) - (a < b)


def test_random_pair_deterministic():
    assert random_pair(32, 5) == random_pair(32, 5)
    assert random_pair(2048, 5) == random_pair(2048, 5)
    rng1, rng2 = random.Random(9), random.Random(9)
    assert [random_pair(64, rng1) for _ in range(5)] == [random_pair(64, rng2) for _ in range(5)]


def test_random_pair_ordering():
    rng = random.Random(11)
    for _ in range(10_000):
        a, b = random_pair(32, rng)
        assert 0 < b.value <= a.value < 2**32
        assert a.width == b.width == 32


def test_random_pair_dividend_uniform():
    rng = random.Random(12)
    total = 0.0
    n = 1_000_000
    for _ in range(n):
        total += random_pair(32, rng)[0].value
    assert 0.49 <= total / n / 2**32 <= 0.51


def test_random_pair_needs_two_bits():
    with pytest.raises(bitvec.BitVecError):
        random_pair(1, 0)
