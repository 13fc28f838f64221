import tracemalloc

import numpy as np
import pytest

from metafib import dsl, engine
from metafib.engine import DeathSignal, History, OverflowSignal, Status
from metafib.families import make_spec

from fuzzspecs import random_specs


def direct_hk(k, upto):
    """Plain loop over H(n) = H(n-H(n-2)) + H(n-H(n-3)); returns (terms, died)."""
    h = [0] + [(n + 1) // 2 for n in range(1, k + 1)]
    for n in range(k + 1, upto + 1):
        a, b = n - h[n - 2], n - h[n - 3]
        if not (1 <= a <= n - 1 and 1 <= b <= n - 1):
            return h[1:], True
        h.append(h[a] + h[b])
    return h[1:], False


def direct_q(upto):
    q = [0, 1, 1]
    for n in range(3, upto + 1):
        q.append(q[n - q[n - 1]] + q[n - q[n - 2]])
    return q[1:]


def direct_conway(upto):
    c = [0, 1, 1]
    for n in range(3, upto + 1):
        c.append(c[c[n - 1]] + c[n - c[n - 1]])
    return c[1:]


H3 = "A(n)=A(n-A(n-2))+A(n-A(n-3)); init ceil(n/2); start 3"
Q = "A(n)=A(n-A(n-1))+A(n-A(n-2)); init list 1,1; start 2"


def history_of(values, width=32):
    return History.from_values(values, width=width, budget=1 << 20)


# --- compile ---------------------------------------------------------------

def test_compile_q():
    plan = engine.compile_plan(dsl.load(Q))
    listing = ["push-n", "push-n", "push-int 1", "sub", "lookup", "sub", "lookup"]
    assert plan.listing()[0] == listing
    assert plan.listing()[1] == [x.replace("push-int 1", "push-int 2") for x in listing]
    assert list(plan.signs) == [1, 1]


def test_compile_value_nested():
    plan = engine.compile_plan(make_spec("conway:1"))
    assert plan.summand(0) == ["push-n", "push-int 1", "sub", "lookup", "lookup"]


def test_compile_def3_second_summand():
    plan = engine.compile_plan(make_spec("aij:2,1"))
    assert plan.summand(1)[-3:] == ["lookup", "sub", "lookup"]


def test_compile_phi_argument():
    plan = engine.compile_plan(dsl.load("A(n)=A(floor(n/phi)); init list 1,1; start 2"))
    assert plan.summand(0)[-2:] == ["phi-floor-div", "lookup"]


# --- step ------------------------------------------------------------------

def test_step_h3():
    plan = engine.compile_plan(dsl.load(H3))
    oracle, _ = direct_hk(3, 7)
    assert oracle[3] == 4 and oracle[6] == 3
    assert engine.step(plan, history_of([1, 1, 2]), 4) == 4
    assert engine.step(plan, history_of(oracle[:6]), 7) == 3


def test_step_death_on_zero_argument():
    plan = engine.compile_plan(dsl.load("A(n)=A(n-A(n-1)); init list 2; start 1"))
    assert engine.step(plan, history_of([2]), 2) == DeathSignal(0)


def test_step_forward_reference_is_death():
    plan = engine.compile_plan(dsl.load("A(n)=A(n+A(n-1)-2); init list 1; start 1"))
    # n=2: argument 2 + 1 - 2 = 1 is fine; with A(1)=3 it would be 3 > n-1
    assert engine.step(plan, history_of([1]), 2) == 1
    assert engine.step(plan, history_of([3]), 2) == DeathSignal(3)


def test_step_overflow_signal():
    plan = engine.compile_plan(dsl.load("A(n)=A(n-1)+A(n-1); init list 2000000000; start 1"))
    assert engine.step(plan, history_of([2_000_000_000]), 2) == OverflowSignal()
    assert engine.step(plan, history_of([2_000_000_000], width=64), 2) == 4_000_000_000


def test_step_division_by_zero():
    plan = engine.compile_plan(dsl.load("A(n)=A(n-floor(1/(A(n-1)-1))); init list 1; start 1"))
    assert engine.step(plan, history_of([1]), 2) == DeathSignal(None, "division by zero")


def test_step_rejects_wrong_history_length():
    plan = engine.compile_plan(dsl.load(H3))
    with pytest.raises(ValueError):
        engine.step(plan, history_of([1, 1, 2]), 6)


# --- run -------------------------------------------------------------------

@pytest.mark.parametrize("k, length", [(3, 53), (6, 24)])
def test_run_hk_dies(k, length):
    hist, out = engine.run(engine.compile_plan(make_spec(f"hk:{k}")), cap=10**6)
    assert out.status is Status.DIED
    assert out.final_length == length == len(hist)
    assert out.died_at == length + 1
    assert not 1 <= out.offending_argument <= length
    oracle, died = direct_hk(k, length + 1)
    assert died and list(hist.values()) == oracle


def test_run_q_reaches_cap():
    hist, out = engine.run(engine.compile_plan(dsl.load(Q)), cap=10**5)
    assert out.status is Status.CAP_REACHED and out.final_length == 10**5
    assert list(hist.values()) == direct_q(10**5)


def test_run_is_deterministic():
    plan = engine.compile_plan(make_spec("hk:12"))
    a, oa = engine.run(plan, cap=10**5)
    b, ob = engine.run(plan, cap=10**5)
    assert oa == ob and np.array_equal(a.values(), b.values())


def test_run_cap_must_exceed_init():
    with pytest.raises(ValueError):
        engine.run(engine.compile_plan(make_spec("hk:10")), cap=10)


def test_run_overflow_status():
    plan = engine.compile_plan(dsl.load("A(n)=A(n-1)+A(n-1); init list 1; start 1"))
    hist, out = engine.run(plan, cap=100)
    assert out.status is Status.OVERFLOW and out.final_length == 31
    hist, out = engine.run(plan, cap=100, width=64)
    assert out.status is Status.OVERFLOW and out.final_length == 63
    assert hist[63] == 2**62


def test_run_budget_exceeded_is_clean():
    plan = engine.compile_plan(dsl.load(Q))
    hist, out = engine.run(plan, cap=10**6, budget=4000)
    assert out.status is Status.BUDGET_EXCEEDED
    assert out.final_length == len(hist) == 999
    assert list(hist.values()) == direct_q(999)


def test_budget_safety():
    plan = engine.compile_plan(dsl.load(Q))
    budget = 1 << 20
    engine.run(plan, cap=10)  # warm the JIT outside the measurement
    tracemalloc.start()
    hist, out = engine.run(plan, cap=10**7, budget=budget)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert out.status is Status.BUDGET_EXCEEDED
    assert hist.nbytes <= budget
    assert peak <= budget + 64 * 1024


def test_death_minimality():
    """Every computed term of a dead run was computed with in-range lookups."""
    for k in range(3, 12):
        hist, out = engine.run(engine.compile_plan(make_spec(f"hk:{k}")), cap=10**6)
        oracle, died = direct_hk(k, out.final_length + 1)
        assert died and len(oracle) == out.final_length


def test_positivity_check():
    plan = engine.compile_plan(dsl.load("A(n)=A(n-1)-A(n-2); init list 1,3; start 2"))
    with pytest.raises(engine.PositivityError):
        engine.run(plan, cap=10, check_positive=True)
    _, out = engine.run(plan, cap=10)
    assert out.status is Status.CAP_REACHED


def test_phi_argument_matches_reference():
    spec = dsl.load("A(n)=A(n-A(n-1))+A(ceil(n*(2-phi)/(1+phi))); init ceil(n/2); start 4")
    hist, out = engine.run(engine.compile_plan(spec), cap=3000)
    ref = engine.ReferenceEvaluator(spec)
    assert list(hist.values()) == ref.prefix(3000)[: out.final_length]


# --- reference evaluator ---------------------------------------------------

def test_reference_q():
    ref = engine.ReferenceEvaluator(dsl.load(Q))
    assert ref.prefix(10) == [1, 1, 2, 3, 3, 4, 5, 5, 6, 6] == direct_q(10)


def test_reference_conway():
    ref = engine.ReferenceEvaluator(make_spec("conway:1"))
    assert ref.prefix(10) == [1, 1, 2, 2, 3, 4, 4, 4, 5, 6] == direct_conway(10)


def test_reference_h3_death():
    spec = dsl.load(H3)
    assert isinstance(engine.reference_eval(spec, 54), DeathSignal)
    assert engine.reference_eval(spec, 53) == direct_hk(3, 53)[0][-1]


def test_engine_matches_reference_on_fuzz_sample():
    for spec in random_specs(40, seed=99):
        hist, out = engine.run(engine.compile_plan(spec), cap=2000)
        ref = engine.ReferenceEvaluator(spec)
        assert list(hist.values()) == ref.prefix(out.final_length), spec.label
        if out.status is Status.DIED:
            end = ref(out.final_length + 1)
            assert isinstance(end, DeathSignal)
            assert end.offending_argument == out.offending_argument


# --- history ---------------------------------------------------------------

def test_history_indexing_and_growth():
    h = History(width=32, budget=1 << 16, capacity=4)
    for v in range(1, 101):
        h.append(v)
    assert len(h) == 100 and h[1] == 1 and h[100] == 100
    with pytest.raises(IndexError):
        h[0]
    with pytest.raises(IndexError):
        h[101]
    assert not h.values().flags.writeable


def test_history_budget():
    h = History(width=64, budget=80, capacity=2)
    h.extend([1] * 9)
    with pytest.raises(engine.BudgetExceeded):
        h.append(1)
