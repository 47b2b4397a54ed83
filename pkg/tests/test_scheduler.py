import math

import pytest

from nsexplore.errors import ConfigError
from nsexplore.scheduler import StreamScheduler


def test_initiation_times():
    sched = StreamScheduler()
    inits = {}
    for q in range(1, 26):
        _q, new, _p = sched.next_quantum()
        for p in new:
            inits[p] = q
    assert inits == {1: 1, 2: 2, 3: 5, 4: 10, 5: 17}


def test_allocation_hand_trace():
    """First nine quanta, rules (i)-(iii) simulated by hand."""
    sched = StreamScheduler()
    active = [sched.next_quantum()[2] for _ in range(9)]
    assert active == [1, 2, 1, 2, 3, 3, 1, 2, 3]


def test_allocation_example_q5():
    # served {1:2, 2:2, 3:0} -> stream 3 (rule iii)
    sched = StreamScheduler()
    for _ in range(4):
        sched.next_quantum()
    sched.initiate(5)
    assert sched.quanta_served == {1: 2, 2: 2, 3: 0}
    assert sched.allocate(5) == 3


def test_allocate_requires_initiation():
    with pytest.raises(ConfigError):
        StreamScheduler().allocate(1)


def test_lemma_invariants_small():
    sched = StreamScheduler()
    for q in range(1, 401):
        sched.next_quantum()
        assert len(sched.quanta_served) == math.isqrt(q - 1) + 1
        b = math.isqrt(q)
        if b * b == q:
            assert set(sched.quanta_served.values()) == {b}
        assert sched.fairness_gap() <= 1
