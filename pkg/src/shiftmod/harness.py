"""Experiment harness: random modulus campaigns, cycle-law fits and prime
benchmarks. Run ``python -m shiftmod --help`` for the CLI."""
from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator

import numba
import numpy as np

from . import bitvec
from .bitvec import BitVec
from .hostlink import SUPPORTED_WIDTHS
from .modfsm import ModError, bld, run
from .prime_engine import Mode, run_primes

CSV_HEADER = ["width_bits", "dividend_hex", "divisor_hex", "result_hex", "bld", "cycles"]

# Published prime-search times (seconds) on the 125 MHz board, keyed by bound.
# Only used for an informational cycles comparison, never asserted.
REFERENCE_FPGA_SECONDS = {
    10: 0.000000680,
    100: 0.000064580,
    1_000: 0.000468280,
    10_000: 0.034511140,
    100_000: 2.710378531,
    200_000: 10.184829460,
    300_000: 22.087260698,
    400_000: 38.444923792,
    500_000: 58.998911240,
}
REFERENCE_CLOCK_HZ = 125_000_000


class HarnessError(Exception):
    pass


@dataclass(frozen=True)
class SampleRecord:
    width_bits: int
    dividend_hex: str
    divisor_hex: str
    result_hex: str
    bld: int
    cycles: int

    def row(self) -> list:
        return [self.width_bits, self.dividend_hex, self.divisor_hex,
                self.result_hex, self.bld, self.cycles]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def check_width(width: int) -> None:
    if width not in SUPPORTED_WIDTHS:
        raise HarnessError(f"unsupported width {width}; choose from {SUPPORTED_WIDTHS}")


def sample_records(width: int, count: int, seed: int) -> Iterator[SampleRecord]:
    """Yield ``count`` campaign rows; the pair stream is fixed by ``seed``."""
    check_width(width)
    if count < 1:
        raise HarnessError("count must be >= 1")
    rng = random.Random(seed)
    for _ in range(count):
        a, b = bitvec.random_pair(width, rng)
        result, cycles, _ = run(a, b, record=False)
        yield SampleRecord(width, bitvec.to_text(a), bitvec.to_text(b),
                           bitvec.to_text(result), bld(a, b), cycles)


def write_samples(records: Iterable[SampleRecord], out) -> int:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    n = 0
    for rec in records:
        writer.writerow(rec.row())
        n += 1
    return n


def read_samples(path) -> list[SampleRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise HarnessError(f"{path}: unexpected header {reader.fieldnames}")
        return [SampleRecord(int(r["width_bits"]), r["dividend_hex"], r["divisor_hex"],
                             r["result_hex"], int(r["bld"]), int(r["cycles"]))
                for r in reader]


def fit_line(x, y) -> FitResult:
    """Ordinary least squares of ``y`` on ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.unique(x).size < 2:
        raise HarnessError("fit needs at least two distinct x values")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    ss_res = np.sum((y - (slope * x + intercept)) ** 2)
    ss_tot = np.sum((y - ym) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), float(r2), int(x.size))


def cmd_mod(a_text: str, b_text: str, width: int) -> str:
    a = parse_operand(a_text, width)
    b = parse_operand(b_text, width)
    result, cycles, _ = run(a, b, record=False)
    return f"{bitvec.to_text(result)},{bld(a, b)},{cycles}"


def parse_operand(text: str, width: int) -> BitVec:
    if text.lower().startswith("0x"):
        return bitvec.from_text(text[2:], 16, width)
    return bitvec.from_text(text, 10, width)


def cmd_sample(width: int, count: int, seed: int, out_path) -> int:
    records = sample_records(width, count, seed)
    if out_path in (None, "-"):
        return write_samples(records, sys.stdout)
    with open(out_path, "w", newline="") as fh:
        return write_samples(records, fh)


def cmd_fit(csv_path) -> FitResult:
    rows = read_samples(csv_path)
    return fit_line([r.bld for r in rows], [r.cycles for r in rows])


def reference_cycles(bound: int) -> int | None:
    secs = REFERENCE_FPGA_SECONDS.get(bound)
    return None if secs is None else round(secs * REFERENCE_CLOCK_HZ)


def cmd_primes(bound: int, mode, primes_out=None) -> dict:
    pr = run_primes(bound, mode)
    if primes_out:
        with open(primes_out, "w") as fh:
            fh.writelines(f"{p}\n" for p in pr.primes)
    return pr.to_record()


@numba.njit(cache=True)
def _native_count(bound):
    # plain trial division: every n, n % 2 then odd divisors up to n
    count = 0
    for n in range(2, bound):
        if n == 2:
            count += 1
            continue
        if n % 2 == 0:
            continue
        i = 3
        while i < n and n % i != 0:
            i += 2
        if i == n:
            count += 1
    return count


def native_prime_count(bound: int) -> tuple[int, int]:
    """Trial division with the machine remainder; returns ``(count, wall_ns)``."""
    t0 = time.perf_counter_ns()
    count = _native_count(bound)
    return int(count), time.perf_counter_ns() - t0


def cmd_bench(bound: int, mode=Mode.FAST) -> dict:
    if bound < 2:
        raise HarnessError("bound must be >= 2")
    _native_count(3)  # keep JIT compilation out of the timing
    pr = run_primes(bound, mode)
    native, native_ns = native_prime_count(bound)
    return {"A": bound, "engine_mode": pr.mode.value, "engine_wall_ns": pr.wall_ns,
            "native_wall_ns": native_ns, "pcount_engine": pr.pcount,
            "pcount_native": native}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shiftmod", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mod", help="one modulus: prints result_hex,bld,cycles")
    p.add_argument("a", help="dividend (decimal, or hex with 0x prefix)")
    p.add_argument("b", help="divisor (decimal, or hex with 0x prefix)")
    p.add_argument("--width", type=int, default=32)

    p = sub.add_parser("sample", help="random campaign to CSV")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="-")

    p = sub.add_parser("fit", help="least-squares fit of cycles on bld")
    p.add_argument("csv")

    modes = [m.value for m in Mode]
    p = sub.add_parser("primes", help="find primes below --bound")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--mode", choices=modes, default="fast")
    p.add_argument("--out", help="write the prime list here, one per line")

    p = sub.add_parser("bench", help="engine vs native trial division")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--mode", choices=modes, default="fast")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mod":
            print(cmd_mod(args.a, args.b, args.width))
        elif args.command == "sample":
            n = cmd_sample(args.width, args.count, args.seed, args.out)
            print(f"wrote {n} rows", file=sys.stderr)
        elif args.command == "fit":
            print(json.dumps(asdict(cmd_fit(args.csv))))
        elif args.command == "primes":
            rec = cmd_primes(args.bound, args.mode, args.out)
            print(json.dumps(rec))
            ref = reference_cycles(args.bound)
            if ref and rec["total_cycles"] is not None:
                print(f"info: board reference ~{ref} cycles, "
                      f"simulated/reference = {rec['total_cycles'] / ref:.3f}", file=sys.stderr)
        elif args.command == "bench":
            print(json.dumps(cmd_bench(args.bound, args.mode)))
    except (HarnessError, ModError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
