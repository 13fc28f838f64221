"""Compiled evaluation of nested recurrences with death detection.

A :class:`~metafib.dsl.ValidatedSpec` is flattened into a postfix program
(:class:`EvalPlan`).  The program is interpreted by a small numba kernel that
appends terms to a flat integer array until the sequence dies, the term cap
is reached, the memory budget runs out, or a value overflows.

Death rule: a lookup index a is fatal when a < 1 or a > n - 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from . import dsl
from .dsl import BinOp, Call, Int, Phi, Round, ValidatedSpec, Var

# opcodes
PUSH_N = 0
PUSH_INT = 1
ADD = 2
SUB = 3
MUL = 4
FLOOR_DIV = 5
CEIL_DIV = 6
LOOKUP = 7
PAIR_ADD = 8
PAIR_SUB = 9
PAIR_MUL = 10
PHI_FLOOR_DIV = 11
PHI_CEIL_DIV = 12

OPNAMES = {
    PUSH_N: "push-n",
    PUSH_INT: "push-int",
    ADD: "add",
    SUB: "sub",
    MUL: "mul",
    FLOOR_DIV: "floor-div",
    CEIL_DIV: "ceil-div",
    LOOKUP: "lookup",
    PAIR_ADD: "phi-add",
    PAIR_SUB: "phi-sub",
    PAIR_MUL: "phi-mul",
    PHI_FLOOR_DIV: "phi-floor-div",
    PHI_CEIL_DIV: "phi-ceil-div",
}

# net stack effect of each opcode
_EFFECT = {
    PUSH_N: 1, PUSH_INT: 1, ADD: -1, SUB: -1, MUL: -1, FLOOR_DIV: -1, CEIL_DIV: -1,
    LOOKUP: 0, PAIR_ADD: -2, PAIR_SUB: -2, PAIR_MUL: -2, PHI_FLOOR_DIV: -3, PHI_CEIL_DIV: -3,
}

# kernel status codes
_OK = 0
_DEATH = 1
_OVERFLOW = 2
_ZERO_DIV = 3
_FULL = 4

_WIDTH_DTYPES = {32: np.int32, 64: np.int64}
_WIDTH_LIMITS = {32: (-(2**31), 2**31 - 1), 64: (-(2**63), 2**63 - 1)}

DEFAULT_CAP = 2**31 - 1
DEFAULT_BUDGET = 1 << 30


class Status(str, enum.Enum):
    DIED = "died"
    CAP_REACHED = "cap-reached"
    BUDGET_EXCEEDED = "budget-exceeded"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class DeathSignal:
    """The term is undefined: a lookup fell outside 1..n-1 (or a division by zero)."""

    offending_argument: int | None
    reason: str = "index out of range"


@dataclass(frozen=True)
class OverflowSignal:
    """An intermediate or final value does not fit the element width."""


@dataclass(frozen=True)
class RunOutcome:
    status: Status
    final_length: int
    died_at: int | None = None
    offending_argument: int | None = None
    max_term: int = 0
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "length": self.final_length,
            "died_at": self.died_at,
            "offending_argument": self.offending_argument,
            "max_term": self.max_term,
            "reason": self.reason,
        }


class BudgetExceeded(MemoryError):
    pass


class PositivityError(AssertionError):
    pass


class History:
    """Append-only store of terms 1..len(self), addressed 1-based.

    Backed by one numpy array (slot 0 unused) that doubles in capacity and is
    never allowed to exceed ``budget`` bytes.
    """

    def __init__(self, width: int = 32, budget: int = DEFAULT_BUDGET, capacity: int = 1 << 16) -> None:
        if width not in _WIDTH_DTYPES:
            raise ValueError(f"element width must be 32 or 64, got {width}")
        self.width = width
        self.budget = int(budget)
        self.dtype = np.dtype(_WIDTH_DTYPES[width])
        self.length = 0
        size = min(capacity, self.max_slots)
        if size < 1:
            raise BudgetExceeded(f"budget of {budget} bytes cannot hold a single term")
        self._data = np.zeros(size, dtype=self.dtype)

    @property
    def max_slots(self) -> int:
        return self.budget // self.dtype.itemsize

    @property
    def capacity(self) -> int:
        """Number of terms that fit without growing."""
        return self._data.shape[0] - 1

    @property
    def nbytes(self) -> int:
        return self._data.nbytes

    def reserve(self, terms: int) -> None:
        """Grow (by doubling) until ``terms`` terms fit; raise if over budget."""
        if terms <= self.capacity:
            return
        if terms + 1 > self.max_slots:
            raise BudgetExceeded(
                f"{terms} terms of {self.width} bits exceed the budget of {self.budget} bytes"
            )
        size = self._data.shape[0]
        while size < terms + 1:
            size *= 2
        size = min(size, self.max_slots)
        # realloc-based resize avoids holding old and new copies at once
        self._data.resize(size, refcheck=False)

    def grow(self, cap: int) -> bool:
        """Double the capacity (bounded by budget and ``cap`` terms).
        Returns False when no growth is possible."""
        size = self._data.shape[0]
        new = min(2 * size, self.max_slots, cap + 1)
        if new <= size:
            return False
        self._data.resize(new, refcheck=False)
        return True

    def append(self, value: int) -> None:
        self.reserve(self.length + 1)
        self.length += 1
        self._data[self.length] = value

    def extend(self, values: Sequence[int]) -> None:
        self.reserve(self.length + len(values))
        self._data[self.length + 1 : self.length + 1 + len(values)] = values
        self.length += len(values)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.length:
            raise IndexError(f"term {n} not in 1..{self.length}")
        return int(self._data[n])

    def values(self) -> np.ndarray:
        """Read-only view of terms 1..length (position i holds term i+1)."""
        view = self._data[1 : self.length + 1]
        view.flags.writeable = False
        return view

    @property
    def raw(self) -> np.ndarray:
        return self._data

    @classmethod
    def from_values(cls, values: Sequence[int], width: int = 64, budget: int | None = None) -> "History":
        values = np.asarray(values)
        itemsize = _WIDTH_DTYPES[width]().itemsize
        if budget is None:
            budget = (len(values) + 1) * itemsize
        h = cls(width=width, budget=budget, capacity=len(values) + 1)
        h.extend(values)
        return h


# --- compilation -----------------------------------------------------------


@dataclass(frozen=True)
class EvalPlan:
    """Postfix program for the right-hand side of one recurrence.

    ``ops``/``args`` hold one instruction per slot; summand ``i`` occupies
    ``ops[ends[i-1]:ends[i]]`` and contributes with ``signs[i]``.
    """

    ops: np.ndarray
    args: np.ndarray
    ends: np.ndarray
    signs: np.ndarray
    stack_depth: int
    start_after: int
    init: tuple[int, ...]
    label: str = ""

    def summand(self, i: int) -> list[str]:
        lo = 0 if i == 0 else int(self.ends[i - 1])
        out = []
        for op, arg in zip(self.ops[lo : self.ends[i]], self.args[lo : self.ends[i]]):
            name = OPNAMES[int(op)]
            out.append(f"{name} {int(arg)}" if op == PUSH_INT else name)
        return out

    def listing(self) -> list[list[str]]:
        return [self.summand(i) for i in range(len(self.ends))]


def _has_phi(node) -> bool:
    return any(isinstance(x, Phi) for x in dsl.walk(node))


def _emit(node, code: list) -> None:
    if isinstance(node, Var):
        code.append((PUSH_N, 0))
    elif isinstance(node, Int):
        code.append((PUSH_INT, node.value))
    elif isinstance(node, BinOp):
        _emit(node.left, code)
        _emit(node.right, code)
        code.append(({"+": ADD, "-": SUB, "*": MUL}[node.op], 0))
    elif isinstance(node, Call):
        _emit(node.arg, code)
        code.append((LOOKUP, 0))
    elif isinstance(node, Round):
        if _has_phi(node.num) or _has_phi(node.den):
            _emit_pair(node.num, code)
            _emit_pair(node.den, code)
            code.append((PHI_FLOOR_DIV if node.mode == "floor" else PHI_CEIL_DIV, 0))
        else:
            _emit(node.num, code)
            _emit(node.den, code)
            code.append((FLOOR_DIV if node.mode == "floor" else CEIL_DIV, 0))
    else:
        raise dsl.SpecError("phi outside floor/ceil cannot be compiled")


def _emit_pair(node, code: list) -> None:
    # pushes p, q standing for p + q*phi
    if isinstance(node, Phi):
        code.extend([(PUSH_INT, 0), (PUSH_INT, 1)])
    elif isinstance(node, BinOp) and _has_phi(node):
        _emit_pair(node.left, code)
        _emit_pair(node.right, code)
        code.append(({"+": PAIR_ADD, "-": PAIR_SUB, "*": PAIR_MUL}[node.op], 0))
    else:
        _emit(node, code)
        code.append((PUSH_INT, 0))


def compile_plan(spec: ValidatedSpec) -> EvalPlan:
    ops: list[int] = []
    args: list[int] = []
    ends: list[int] = []
    depth = 0
    for s in spec.rhs:
        code: list = []
        _emit(s.call, code)
        level = 0
        for op, arg in code:
            level += _EFFECT[op]
            depth = max(depth, level)
            ops.append(op)
            args.append(arg)
        assert level == 1, "summand program must leave exactly one value"
        ends.append(len(ops))
    return EvalPlan(
        ops=np.array(ops, dtype=np.int64),
        args=np.array(args, dtype=np.int64),
        ends=np.array(ends, dtype=np.int64),
        signs=np.array([s.sign for s in spec.rhs], dtype=np.int64),
        stack_depth=max(depth, 1),
        start_after=spec.start_after,
        init=tuple(spec.init),
        label=spec.label,
    )


# --- kernel ----------------------------------------------------------------

_I64_MIN = -(2**63)
_PHI_GUARD = 1 << 30


@numba.njit(cache=True, inline="always")
def _add_ovf(a, b, r):
    return ((a ^ r) & (b ^ r)) < 0


@numba.njit(cache=True, inline="always")
def _sub_ovf(a, b, r):
    return ((a ^ b) & (a ^ r)) < 0


@numba.njit(cache=True, inline="always")
def _mul_ovf(a, b, r):
    if a == 0 or b == 0:
        return False
    if (a == -1 and b == _I64_MIN) or (b == -1 and a == _I64_MIN):
        return True
    return r // b != a


@numba.njit(cache=True, inline="always")
def _le_b_sqrt5(w, b):
    # w <= b*sqrt(5), exactly
    if b >= 0:
        if w <= 0:
            return True
        return w * w <= 5 * b * b
    if w >= 0:
        return False
    return w * w >= 5 * b * b


@numba.njit(cache=True)
def _phi_floor(p1, q1, p2, q2, ceil):
    """floor or ceil of (p1 + q1 phi) / (p2 + q2 phi); returns (status, value)."""
    # multiply through by the conjugate of the denominator
    a = p1 * p2 + p1 * q2 - q1 * q2
    b = q1 * p2 - p1 * q2
    nrm = p2 * p2 + p2 * q2 - q2 * q2
    if nrm == 0:
        return _ZERO_DIV, 0
    if ceil:
        a = -a
        b = -b
    u = 2 * a + b
    d = 2 * nrm
    if d < 0:
        u = -u
        b = -b
        d = -d
    if abs(u) >= _PHI_GUARD or abs(b) >= _PHI_GUARD or d >= _PHI_GUARD:
        return _OVERFLOW, 0
    m = np.int64(np.floor((u + b * 2.23606797749979) / d))
    while not _le_b_sqrt5(m * d - u, b):
        m -= 1
    while _le_b_sqrt5((m + 1) * d - u, b):
        m += 1
    if ceil:
        m = -m
    return _OK, m


@numba.njit(cache=True, nogil=True)
def _eval_term(ops, args, ends, signs, hist, n, stack, lo, hi):
    """Evaluate term n.  Returns (status, value, offending argument)."""
    acc = np.int64(0)
    pc = 0
    for s in range(ends.shape[0]):
        sp = 0
        end = ends[s]
        while pc < end:
            op = ops[pc]
            if op == PUSH_N:
                stack[sp] = n
                sp += 1
            elif op == PUSH_INT:
                stack[sp] = args[pc]
                sp += 1
            elif op == LOOKUP:
                idx = stack[sp - 1]
                if idx < 1 or idx > n - 1:
                    return _DEATH, 0, idx
                stack[sp - 1] = hist[idx]
            elif op <= CEIL_DIV:
                b = stack[sp - 1]
                a = stack[sp - 2]
                sp -= 1
                if op == ADD:
                    r = a + b
                    if _add_ovf(a, b, r):
                        return _OVERFLOW, 0, 0
                elif op == SUB:
                    r = a - b
                    if _sub_ovf(a, b, r):
                        return _OVERFLOW, 0, 0
                elif op == MUL:
                    r = a * b
                    if _mul_ovf(a, b, r):
                        return _OVERFLOW, 0, 0
                else:
                    if b == 0:
                        return _ZERO_DIV, 0, 0
                    if op == FLOOR_DIV:
                        r = a // b
                    else:
                        r = -((-a) // b)
                stack[sp - 1] = r
            elif op <= PAIR_MUL:
                q2 = stack[sp - 1]
                p2 = stack[sp - 2]
                q1 = stack[sp - 3]
                p1 = stack[sp - 4]
                sp -= 2
                if op == PAIR_ADD:
                    p = p1 + p2
                    q = q1 + q2
                elif op == PAIR_SUB:
                    p = p1 - p2
                    q = q1 - q2
                else:
                    # phi^2 = phi + 1
                    if max(abs(p1), abs(q1), abs(p2), abs(q2)) >= _PHI_GUARD:
                        return _OVERFLOW, 0, 0
                    p = p1 * p2 + q1 * q2
                    q = p1 * q2 + q1 * p2 + q1 * q2
                stack[sp - 2] = p
                stack[sp - 1] = q
            else:
                q2 = stack[sp - 1]
                p2 = stack[sp - 2]
                q1 = stack[sp - 3]
                p1 = stack[sp - 4]
                sp -= 3
                if max(abs(p1), abs(q1), abs(p2), abs(q2)) >= _PHI_GUARD:
                    return _OVERFLOW, 0, 0
                st, r = _phi_floor(p1, q1, p2, q2, op == PHI_CEIL_DIV)
                if st != _OK:
                    return st, 0, 0
                stack[sp - 1] = r
            pc += 1
        v = stack[0]
        if signs[s] > 0:
            r = acc + v
            if _add_ovf(acc, v, r):
                return _OVERFLOW, 0, 0
        else:
            r = acc - v
            if _sub_ovf(acc, v, r):
                return _OVERFLOW, 0, 0
        acc = r
    if acc < lo or acc > hi:
        return _OVERFLOW, 0, 0
    return _OK, acc, 0


@numba.njit(cache=True, nogil=True)
def _run_kernel(ops, args, ends, signs, hist, length, stop, stack, lo, hi, extremes):
    """Append terms length+1..stop.  ``extremes`` carries [max, min] across calls.

    Returns (status, length reached, offending argument).
    """
    n = length + 1
    mx = extremes[0]
    mn = extremes[1]
    while n <= stop:
        st, v, off = _eval_term(ops, args, ends, signs, hist, n, stack, lo, hi)
        if st != _OK:
            extremes[0] = mx
            extremes[1] = mn
            return st, n - 1, off
        hist[n] = v
        if v > mx:
            mx = v
        if v < mn:
            mn = v
        n += 1
    extremes[0] = mx
    extremes[1] = mn
    return _OK, stop, 0


# --- public API ------------------------------------------------------------


def step(plan: EvalPlan, history: History, n: int) -> int | DeathSignal | OverflowSignal:
    """Value of term ``n`` given terms 1..n-1 in ``history``."""
    if len(history) != n - 1:
        raise ValueError(f"history holds {len(history)} terms, step needs exactly {n - 1}")
    if n <= plan.start_after:
        raise ValueError(f"n={n} is covered by the initial conditions")
    lo, hi = _WIDTH_LIMITS[history.width]
    stack = np.zeros(plan.stack_depth + 4, dtype=np.int64)
    st, value, off = _eval_term(
        plan.ops, plan.args, plan.ends, plan.signs, history.raw, n, stack, lo, hi
    )
    if st == _DEATH:
        return DeathSignal(int(off))
    if st == _ZERO_DIV:
        return DeathSignal(None, "division by zero")
    if st == _OVERFLOW:
        return OverflowSignal()
    return int(value)


def run(
    plan: EvalPlan,
    cap: int = DEFAULT_CAP,
    budget: int = DEFAULT_BUDGET,
    width: int = 32,
    check_positive: bool = False,
) -> tuple[History, RunOutcome]:
    """Extend the sequence from its initial terms until it dies or a limit hits.

    ``cap`` is the maximum number of terms; ``budget`` bounds the History's
    storage in bytes.  With ``check_positive`` a term below 1 raises
    :class:`PositivityError`.
    """
    if cap <= plan.start_after:
        raise ValueError(f"cap {cap} must exceed the {plan.start_after} initial terms")
    lo, hi = _WIDTH_LIMITS[width]
    init = plan.init
    max_init = max(init)
    if max_init > hi or min(init) < lo:
        empty = History(width=width, budget=max(budget, 64), capacity=1)
        return empty, RunOutcome(Status.OVERFLOW, 0, reason="initial value exceeds element width")
    try:
        history = History(width=width, budget=budget, capacity=min(cap + 1, 1 << 16))
        history.extend(init)
    except BudgetExceeded as exc:
        empty = History(width=width, budget=max(budget, 64), capacity=1)
        return empty, RunOutcome(Status.BUDGET_EXCEEDED, 0, reason=str(exc))

    stack = np.zeros(plan.stack_depth + 4, dtype=np.int64)
    extremes = np.array([max_init, min(init)], dtype=np.int64)
    while True:
        if history.length >= cap:
            outcome = RunOutcome(Status.CAP_REACHED, history.length, max_term=int(extremes[0]))
            break
        if history.length >= history.capacity and not history.grow(cap):
            outcome = RunOutcome(
                Status.BUDGET_EXCEEDED,
                history.length,
                max_term=int(extremes[0]),
                reason=f"budget of {budget} bytes reached",
            )
            break
        stop = min(cap, history.capacity)
        st, reached, off = _run_kernel(
            plan.ops, plan.args, plan.ends, plan.signs, history.raw,
            history.length, stop, stack, lo, hi, extremes,
        )
        history.length = int(reached)
        if st == _OK:
            continue
        if st == _DEATH:
            outcome = RunOutcome(
                Status.DIED, history.length, died_at=history.length + 1,
                offending_argument=int(off), max_term=int(extremes[0]),
                reason="index out of range",
            )
        elif st == _ZERO_DIV:
            outcome = RunOutcome(
                Status.DIED, history.length, died_at=history.length + 1,
                max_term=int(extremes[0]), reason="division by zero",
            )
        else:
            outcome = RunOutcome(
                Status.OVERFLOW, history.length, max_term=int(extremes[0]),
                reason=f"term {history.length + 1} does not fit {width} bits",
            )
        break
    if check_positive and extremes[1] < 1:
        raise PositivityError(f"{plan.label or 'sequence'} produced a term below 1")
    return history, outcome


# --- reference evaluator ---------------------------------------------------


class _Dead(Exception):
    def __init__(self, signal: DeathSignal) -> None:
        self.signal = signal


class ReferenceEvaluator:
    """Memoized direct interpretation of the AST.  Slow; for tests and small n."""

    def __init__(self, spec: ValidatedSpec, width: int = 32) -> None:
        self.spec = spec
        self.lo, self.hi = _WIDTH_LIMITS[width]
        self.terms: list[int] = [0, *spec.init]
        self.end: DeathSignal | OverflowSignal | None = None

    def _next(self) -> None:
        n = len(self.terms)

        def lookup(a):
            if not isinstance(a, int) or a < 1 or a > n - 1:
                raise _Dead(DeathSignal(a if isinstance(a, int) else None))
            return self.terms[a]

        total = 0
        try:
            for s in self.spec.rhs:
                total += s.sign * dsl.evaluate(s.call, n, lookup)
        except _Dead as dead:
            self.end = dead.signal
            return
        except ZeroDivisionError:
            self.end = DeathSignal(None, "division by zero")
            return
        if not self.lo <= total <= self.hi:
            self.end = OverflowSignal()
            return
        self.terms.append(total)

    def __call__(self, n: int) -> int | DeathSignal | OverflowSignal:
        if n < 1:
            raise ValueError("terms are indexed from 1")
        while len(self.terms) <= n and self.end is None:
            self._next()
        if n < len(self.terms):
            return self.terms[n]
        if n == len(self.terms):
            return self.end
        return DeathSignal(None, f"sequence ended at term {len(self.terms) - 1}")

    def prefix(self, upto: int) -> list[int]:
        """Terms 1..min(upto, final length)."""
        self(upto)
        return self.terms[1 : upto + 1]


def reference_eval(spec: ValidatedSpec, n: int, width: int = 32):
    return ReferenceEvaluator(spec, width)(n)
