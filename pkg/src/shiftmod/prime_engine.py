"""Prime-finding system: datapath registers, controller FSM and cycle counter.

Every divisibility test goes through a 32-bit :class:`~shiftmod.modfsm.ModUnit`
sharing the controller clock. Three execution modes produce the same primes:

* ``stepped``    -- clocks the controller and the embedded unit cycle by cycle.
* ``fast``       -- compiled kernel; controller cycles are counted per state
  visit and each modulus runs as a tight loop with the same cycle rules.
* ``count-only`` -- compiled kernel using the native remainder; no cycles.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import NamedTuple

import numba
import numpy as np

from .bitvec import BitVec
from .modfsm import ModUnit

__all__ = [
    "CtrlState", "StatusSignals", "ControlSignals", "PrimeDatapath", "PrimeEngine",
    "PrimeRun", "Mode", "signals_for_state", "run_stepped", "run_fast",
    "run_count_only", "run_primes", "ENGINE_WIDTH",
]

ENGINE_WIDTH = 32
_MASK = (1 << ENGINE_WIDTH) - 1


class CtrlState(Enum):
    WAIT = "WAIT"
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"
    S6 = "S6"
    S7 = "S7"
    S8 = "S8"
    PRIME = "PRIME"
    REPEAT = "REPEAT"
    DONE = "DONE"


class Mode(Enum):
    STEPPED = "stepped"
    FAST = "fast"
    COUNT_ONLY = "count-only"


class StatusSignals(NamedTuple):
    p: bool  # n < A
    q: bool  # i < n
    r: bool  # n == 2
    t: bool  # i == n
    s: bool  # last modulus result == 0


@dataclass(frozen=True)
class ControlSignals:
    clr_regs: bool = False
    ld_A: bool = False
    ld_n: bool = False
    ld_i: bool = False
    ld_P: bool = False
    sel_1: bool = False
    sel_2_set: bool = False
    sel_2_clr: bool = False
    start_mod: bool = False
    prime_found: bool = False
    done: bool = False

    def asserted(self) -> frozenset[str]:
        return frozenset(k for k, v in asdict(self).items() if v)


_NONE = ControlSignals()
_FIXED = {
    CtrlState.WAIT: ControlSignals(clr_regs=True),
    CtrlState.S1: ControlSignals(ld_A=True, ld_n=True),
    CtrlState.S2: ControlSignals(sel_2_clr=True),
    CtrlState.S4: _NONE,
    CtrlState.S5: ControlSignals(start_mod=True),
    CtrlState.S6: _NONE,
    CtrlState.S7: ControlSignals(sel_2_set=True),
    CtrlState.S8: ControlSignals(ld_i=True),
    CtrlState.PRIME: ControlSignals(prime_found=True, ld_P=True),
    CtrlState.DONE: ControlSignals(done=True),
}
_S3_LOAD = ControlSignals(ld_i=True)
_REPEAT_PLUS1 = ControlSignals(sel_1=False)
_REPEAT_PLUS2 = ControlSignals(sel_1=True)


def signals_for_state(state: CtrlState, status: StatusSignals, sel_2: bool = False) -> ControlSignals:
    """Control lines the controller drives while in ``state``.

    ``sel_2`` is the datapath flag register; only S3 depends on it.
    """
    if state is CtrlState.S3:
        return _NONE if sel_2 else _S3_LOAD
    if state is CtrlState.REPEAT:
        return _REPEAT_PLUS1 if status.r else _REPEAT_PLUS2
    return _FIXED[state]


@dataclass
class PrimeDatapath:
    reg_A: int = 0
    reg_n: int = 0
    reg_i: int = 0
    reg_P: int = 0
    sel_2: bool = False
    s: bool = False
    pcount: int = 0
    primes: list[int] = field(default_factory=list)

    def clear(self):
        self.reg_A = self.reg_n = self.reg_i = self.reg_P = 0
        self.sel_2 = self.s = False
        self.pcount = 0
        self.primes = []

    def status(self) -> StatusSignals:
        n, i = self.reg_n, self.reg_i
        return StatusSignals(p=n < self.reg_A, q=i < n, r=n == 2, t=i == n, s=self.s)


@dataclass
class PrimeRun:
    bound: int
    pcount: int
    primes: list[int]
    total_cycles: int | None
    mode: Mode
    wall_ns: int

    def to_record(self) -> dict:
        return {"bound": self.bound, "pcount": self.pcount,
                "total_cycles": self.total_cycles, "mode": self.mode.value,
                "wall_ns": self.wall_ns}

    def same_result(self, other: "PrimeRun") -> bool:
        """Equality on everything except mode and wall time."""
        return (self.bound == other.bound and self.pcount == other.pcount
                and self.primes == other.primes and self.total_cycles == other.total_cycles)


class EngineError(Exception):
    pass


class PrimeEngine:
    """Controller + datapath + counter, advanced one clock per :meth:`step`.

    With ``record=True`` every cycle appends ``(cycle, state, signals)`` to
    ``self.trace``.
    """

    def __init__(self, bound: int, record: bool = False):
        _check_bound(bound)
        self.bound = bound
        self.dp = PrimeDatapath()
        self.mod = ModUnit(ENGINE_WIDTH)
        self.state = CtrlState.WAIT
        self.total_cycles = 0
        self.mod_calls = 0
        self.record = record
        self.trace: list[tuple[int, CtrlState, ControlSignals]] = []
        self._tested_mod2 = False

    @property
    def done(self) -> bool:
        return self.state is CtrlState.DONE and self.total_cycles > 0 and self._halted

    _halted = False

    def step(self) -> "PrimeEngine":
        if self._halted:
            raise EngineError("engine already DONE")
        dp = self.dp
        state = self.state
        status = dp.status()
        sig = signals_for_state(state, status, dp.sel_2)
        self.total_cycles += 1
        if self.record:
            self.trace.append((self.total_cycles, state, sig))

        if state is CtrlState.WAIT:
            dp.clear()
            nxt = CtrlState.S1
        elif state is CtrlState.S1:
            dp.reg_A = self.bound & _MASK
            dp.reg_n = 2
            nxt = CtrlState.S2
        elif state is CtrlState.S2:
            dp.sel_2 = False
            if not status.p:
                nxt = CtrlState.DONE
            elif status.r:
                nxt = CtrlState.PRIME
            else:
                nxt = CtrlState.S3
        elif state is CtrlState.S3:
            if sig.ld_i:
                dp.reg_i = 3
            nxt = CtrlState.S4
        elif state is CtrlState.S4:
            nxt = CtrlState.PRIME if status.t else CtrlState.S5
        elif state is CtrlState.S5:
            divisor = dp.reg_i if dp.sel_2 else 2
            self._tested_mod2 = not dp.sel_2
            self.mod.start(BitVec(ENGINE_WIDTH, dp.reg_n), BitVec(ENGINE_WIDTH, divisor))
            self.mod_calls += 1
            nxt = CtrlState.S6
        elif state is CtrlState.S6:
            self.mod.step()
            if self.mod.done:
                dp.s = self.mod.result.value == 0
                nxt = CtrlState.S7
            else:
                nxt = CtrlState.S6
        elif state is CtrlState.S7:
            dp.sel_2 = True
            if status.s:
                nxt = CtrlState.REPEAT
            elif self._tested_mod2:
                nxt = CtrlState.S4
            else:
                nxt = CtrlState.S8
        elif state is CtrlState.S8:
            dp.reg_i = (dp.reg_i + 2) & _MASK
            nxt = CtrlState.S4
        elif state is CtrlState.PRIME:
            dp.primes.append(dp.reg_n)
            dp.pcount += 1
            dp.reg_P = dp.reg_n
            nxt = CtrlState.REPEAT
        elif state is CtrlState.REPEAT:
            dp.reg_n = (dp.reg_n + (2 if sig.sel_1 else 1)) & _MASK
            nxt = CtrlState.S2
        else:
            self._halted = True
            nxt = CtrlState.DONE
        self.state = nxt
        return self

    def run(self) -> "PrimeEngine":
        while not self._halted:
            self.step()
        return self


def _check_bound(bound: int) -> None:
    if bound < 2:
        raise ValueError(f"bound must be >= 2, got {bound}")
    if bound > _MASK:
        raise ValueError(f"bound must fit in {ENGINE_WIDTH} bits")


def run_stepped(bound: int) -> PrimeRun:
    t0 = time.perf_counter_ns()
    eng = PrimeEngine(bound).run()
    wall = time.perf_counter_ns() - t0
    return PrimeRun(bound, eng.dp.pcount, eng.dp.primes, eng.total_cycles, Mode.STEPPED, wall)


@numba.njit(cache=True)
def _bitlen(x):
    n = 0
    while x:
        x >>= 1
        n += 1
    return n


@numba.njit(cache=True)
def _mod_cycles(a, b):
    # same cycle rules as ModUnit: 1 start cycle, one per ALIGN shift,
    # one per SUBTRACT iteration
    cycles = 1
    shift = 0
    d = b
    la = _bitlen(a)
    lb = _bitlen(b)
    if lb < la:
        shift = la - lb
        d = b << shift
        cycles += shift
    while True:
        cycles += 1
        if a >= d:
            a -= d
        if a < b or shift == 0:
            return a, cycles
        d >>= 1
        shift -= 1


@numba.njit(cache=True)
def _fast_kernel(bound, out):
    cycles = 2  # WAIT, S1
    count = 0
    if bound > 2:
        out[0] = 2
        count = 1
        cycles += 3  # S2, PRIME, REPEAT
    n = 3
    while n < bound:
        cycles += 2  # S2, S3
        i = 3
        mod2 = True
        while True:
            cycles += 1  # S4
            if i == n:
                out[count] = n
                count += 1
                cycles += 2  # PRIME, REPEAT
                break
            d = i
            if mod2:
                d = 2
            rem, mc = _mod_cycles(n, d)
            cycles += mc + 1  # S5 + S6..., S7
            if rem == 0:
                cycles += 1  # REPEAT
                break
            if mod2:
                mod2 = False
            else:
                cycles += 1  # S8
                i += 2
        n += 2
    cycles += 2  # final S2, DONE
    return count, cycles


@numba.njit(cache=True)
def _count_only_kernel(bound, out):
    count = 0
    n = np.uint32(2)
    two = np.uint32(2)
    while n < bound:
        if n == 2:
            out[count] = n
            count += 1
            n = np.uint32(3)
            continue
        i = np.uint32(3)
        mod2 = True
        while True:
            if i == n:
                out[count] = n
                count += 1
                break
            if mod2:
                rem = n % two
                mod2 = False
                if rem == 0:
                    break
                continue
            if n % i == 0:
                break
            i += two
        n += two
    return count


def _prime_buffer(bound: int) -> np.ndarray:
    return np.zeros(bound // 2 + 2, dtype=np.int64)


def run_fast(bound: int) -> PrimeRun:
    _check_bound(bound)
    out = _prime_buffer(bound)
    t0 = time.perf_counter_ns()
    count, cycles = _fast_kernel(np.int64(bound), out)
    wall = time.perf_counter_ns() - t0
    return PrimeRun(bound, int(count), out[:count].tolist(), int(cycles), Mode.FAST, wall)


def run_count_only(bound: int) -> PrimeRun:
    _check_bound(bound)
    out = _prime_buffer(bound)
    t0 = time.perf_counter_ns()
    count = _count_only_kernel(np.uint32(bound), out)
    wall = time.perf_counter_ns() - t0
    return PrimeRun(bound, int(count), out[:count].tolist(), None, Mode.COUNT_ONLY, wall)


def run_primes(bound: int, mode: Mode | str = Mode.FAST) -> PrimeRun:
    mode = Mode(mode)
    return {Mode.STEPPED: run_stepped, Mode.FAST: run_fast,
            Mode.COUNT_ONLY: run_count_only}[mode](bound)
