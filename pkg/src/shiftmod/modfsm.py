"""Cycle-accurate model of the shift/subtract modulus state machine.

The unit computes ``A mod B`` using only compares, subtraction and one-bit
shifts. Cycle accounting: the cycle on which ``start`` is accepted is cycle 1,
every ALIGN or SUBTRACT cycle adds one, and ``done`` asserts on the edge that
enters FINISH (FINISH itself costs nothing). With ``x`` the bit length
difference this gives ``1 + x + (x + 1) = 2x + 2`` cycles unless SUBTRACT
exits early because the dividend already dropped below B.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .bitvec import BitVec, BitVecError, Overflow, bitlen, shl1, shr1, sub

__all__ = [
    "ModState", "ModUnit", "ModTrace", "TraceRow", "ModError", "ZeroDivisor",
    "UnitBusy", "InternalError", "run", "bld", "cycles_model", "run_batch",
]


class ModError(Exception):
    pass


class ZeroDivisor(ModError):
    pass


class UnitBusy(ModError):
    pass


class InternalError(ModError):
    """A guard that the ALIGN rule makes unreachable was hit."""


class ModState(Enum):
    IDLE = "IDLE"
    ALIGN = "ALIGN"
    SUBTRACT = "SUBTRACT"
    FINISH = "FINISH"


IDLE, ALIGN, SUBTRACT, FINISH = ModState.IDLE, ModState.ALIGN, ModState.SUBTRACT, ModState.FINISH


class TraceRow(NamedTuple):
    cycle: int
    state: ModState
    dividend: int
    divisor: int
    shift: int

    def dump(self) -> str:
        return f"{self.cycle},{self.state.value},{self.dividend:x},{self.divisor:x},{self.shift}"


@dataclass
class ModTrace:
    """Per-cycle record: the state that executed in each cycle and the
    register values latched at the end of it."""

    rows: list[TraceRow] = field(default_factory=list)
    early_exit: bool = False

    def __len__(self):
        return len(self.rows)

    @property
    def states(self) -> list[ModState]:
        return [r.state for r in self.rows]

    def dump(self) -> str:
        return "\n".join(r.dump() for r in self.rows)


class ModUnit:
    """Architectural state of one modulus unit of width ``width`` bits."""

    def __init__(self, width: int, record: bool = False):
        self.width = width
        self.record = record
        self.reset()

    def reset(self):
        zero = BitVec(self.width, 0)
        self.state = IDLE
        self.dividend = zero
        self.divisor = zero
        self.divisor_orig = zero
        self.shift = 0
        self.done = False
        self.cycle_count = 0
        self.early_exit = False
        self.trace = ModTrace() if self.record else None

    @property
    def result(self) -> BitVec:
        if not self.done:
            raise ModError("result read before done")
        return self.dividend

    @property
    def busy(self) -> bool:
        return self.state in (ALIGN, SUBTRACT)

    def _log(self, executed: ModState):
        if self.trace is not None:
            self.trace.rows.append(TraceRow(self.cycle_count, executed, self.dividend.value,
                                            self.divisor.value, self.shift))

    def start(self, a: BitVec, b: BitVec) -> "ModUnit":
        if self.state is FINISH:
            # done is a one-cycle pulse; a finished unit is back in IDLE
            self.state = IDLE
        if self.state is not IDLE:
            raise UnitBusy(f"start while in {self.state.name}")
        if a.width != self.width or b.width != self.width:
            raise BitVecError(f"operands must be {self.width} bits")
        if not b.value:
            raise ZeroDivisor("divisor is zero")
        if self.record:
            self.trace = ModTrace()
        self.dividend = a
        self.divisor = b
        self.divisor_orig = b
        self.shift = 0
        self.done = False
        self.early_exit = False
        self.cycle_count = 1
        self._log(IDLE)
        self.state = ALIGN if b.value.bit_length() < a.value.bit_length() else SUBTRACT
        return self

    def step(self) -> "ModUnit":
        state = self.state
        if state is ALIGN:
            self.divisor = shl1(self.divisor)
            self.shift += 1
            if self.shift >= self.width:
                raise InternalError("shift counter reached N")
            if bitlen(self.divisor) == bitlen(self.dividend):
                self.state = SUBTRACT
        elif state is SUBTRACT:
            if self.dividend.value >= self.divisor.value:
                self.dividend = sub(self.dividend, self.divisor)
            if self.dividend.value < self.divisor_orig.value or self.shift == 0:
                self.state = FINISH
                self.done = True
                self.early_exit = self.shift > 0
                if self.trace is not None:
                    self.trace.early_exit = self.early_exit
            else:
                self.divisor = shr1(self.divisor)
                self.shift -= 1
        else:
            raise ModError(f"cannot step a unit in {state.name}")
        self.cycle_count += 1
        self._log(state)
        return self

    def run_to_done(self) -> "ModUnit":
        while not self.done:
            self.step()
        return self


def run(a: BitVec, b: BitVec, record: bool = True) -> tuple[BitVec, int, ModTrace | None]:
    """Run one modulus from start to done; returns ``(result, cycles, trace)``."""
    unit = ModUnit(a.width, record=record)
    unit.start(a, b).run_to_done()
    return unit.result, unit.cycle_count, unit.trace


def bld(a: BitVec, b: BitVec) -> int:
    """Bit length difference, clamped at zero."""
    if not b.value:
        raise ZeroDivisor("divisor is zero")
    return max(0, bitlen(a) - bitlen(b))


def cycles_model(x: int) -> int:
    return 2 * x + 2


def _same_bitlen(x, y):
    # for x, y > 0 the top bits coincide iff the xor is below the and
    return (x ^ y) < (x & y)


def run_batch(dividends, divisors, width: int = 64):
    """Lane-parallel version of :func:`run` for widths up to 64 bits.

    Every lane follows the same per-cycle rules as :class:`ModUnit`; the
    whole batch is clocked until the last lane asserts done. Returns
    ``(results, cycles, early_exit)`` as numpy arrays.
    """
    if width > 64:
        raise ValueError("run_batch handles widths up to 64 bits")
    dvd = np.array(dividends, dtype=np.uint64)
    b = np.array(divisors, dtype=np.uint64)
    if dvd.shape != b.shape:
        raise ValueError("dividends and divisors differ in shape")
    if (b == 0).any():
        raise ZeroDivisor("divisor is zero")
    limit = (1 << width) - 1
    if width < 64 and ((dvd > limit).any() or (b > limit).any()):
        raise Overflow(f"operands exceed {width} bits")
    dvs = b.copy()
    shift = np.zeros(dvd.shape, dtype=np.int64)
    cycles = np.ones(dvd.shape, dtype=np.int64)
    done = np.zeros(dvd.shape, dtype=bool)
    early = np.zeros(dvd.shape, dtype=bool)
    # IDLE: already aligned (or A < B) lanes go straight to SUBTRACT
    aligning = (b < dvd) & ~_same_bitlen(b, dvd)
    one = np.uint64(1)
    while not done.all():
        active = ~done
        sub_lanes = active & ~aligning
        al = active & aligning
        # ALIGN cycle
        dvs[al] <<= one
        shift[al] += 1
        aligning[al] = ~_same_bitlen(dvs[al], dvd[al])
        # SUBTRACT cycle
        ge = sub_lanes & (dvd >= dvs)
        dvd[ge] -= dvs[ge]
        fin = sub_lanes & ((dvd < b) | (shift == 0))
        early[fin] = shift[fin] > 0
        done |= fin
        cont = sub_lanes & ~fin
        dvs[cont] >>= one
        shift[cont] -= 1
        cycles[active] += 1
        if (shift >= width).any():
            raise InternalError("shift counter reached N")
    return dvd, cycles, early
