import pytest

from oracle import sieve, wide_mod

# prime counts below each bound, as published alongside the FPGA timings
TABLE_COUNTS = {10: 4, 100: 25, 1_000: 168, 10_000: 1_229, 100_000: 9_592,
                200_000: 17_984, 300_000: 25_997, 400_000: 33_380, 500_000: 41_538}


def test_wide_mod_basics():
    assert wide_mod(10, 3) == 1
    assert wide_mod(5, 5) == 0
    a, b = 2**2047 + 5, 2**1024 - 1
    # 2**1024 == 1 (mod 2**1024 - 1), so 2**2047 == 2**1023
    assert wide_mod(a, b) == 2**1023 + 5
    with pytest.raises(ZeroDivisionError):
        wide_mod(1, 0)


def test_sieve_small():
    assert sieve(10) == [2, 3, 5, 7]
    assert sieve(2) == []
    assert sieve(3) == [2]
    assert len(sieve(1000)) == 168
    with pytest.raises(ValueError):
        sieve(1)


def test_sieve_against_naive():
    naive = [n for n in range(2, 3000) if all(n % d for d in range(2, n))]
    assert sieve(3000) == naive


@pytest.mark.parametrize("bound,count",
                         sorted((b, c) for b, c in TABLE_COUNTS.items() if b != 400_000))
def test_sieve_matches_published_counts(bound, count):
    assert len(sieve(bound)) == count


def test_sieve_at_400k_is_true_prime_count():
    # the published 33,380 has transposed digits; pi(399999) is 33,860
    sympy = pytest.importorskip("sympy")
    assert len(sieve(400_000)) == int(sympy.primepi(399_999)) == 33_860


@pytest.mark.parametrize("bound", sorted(TABLE_COUNTS))
def test_sieve_matches_sympy(bound):
    sympy = pytest.importorskip("sympy")
    assert len(sieve(bound)) == int(sympy.primepi(bound - 1))
