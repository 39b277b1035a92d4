import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdelay.qubit_model import DelaySchedule, PhysicalQubit, free_evolution_gate, total_delay


def test_zero_delay_is_identity():
    g = free_evolution_gate(PhysicalQubit(0.4, 2.5), 0.0)
    assert np.allclose(g.matrix, np.eye(2))


def test_full_period_is_identity():
    delta = 1.7
    g = free_evolution_gate(PhysicalQubit(0.0, delta), 2 * math.pi / delta)
    assert np.max(np.abs(g.matrix - np.eye(2))) < 1e-12


def test_direct_exponentials():
    # exp(-i pi/2) = -i, exp(-3i pi/2) = +i
    g = free_evolution_gate(PhysicalQubit(1.0, 3.0), math.pi / 2)
    assert np.max(np.abs(g.matrix - np.diag([-1j, 1j]))) < 1e-15


def test_negative_delay_rejected():
    with pytest.raises(ValueError):
        free_evolution_gate(PhysicalQubit(0, 1), -0.1)
    with pytest.raises(ValueError):
        DelaySchedule.from_pairs([(0.0, -1.0)])


def test_qubit_fields():
    q = PhysicalQubit.from_delta(2.5, e0=-1.0)
    assert (q.e0, q.e1, q.delta) == (-1.0, 1.5, 2.5)
    assert PhysicalQubit(3.0, 3.0).delta == 0
    with pytest.raises(ValueError):
        PhysicalQubit(math.inf, 0.0)


def test_total_delay():
    s = DelaySchedule.from_pairs([(0, 0), (1.5, 2.5)])
    assert total_delay(s, 0) == 0
    assert total_delay(s, 1) == 4.0
    with pytest.raises(IndexError):
        total_delay(s, 2)


def test_counting_total():
    delta = 0.8
    s = DelaySchedule.from_repetitions([math.pi / (3 * delta)] * 6)
    assert total_delay(s, 0) == pytest.approx(2 * math.pi / delta, abs=1e-12)


def test_from_totals_split():
    s = DelaySchedule.from_totals([4.0, 1.0], split=0.25)
    assert s.segments == ((1.0, 3.0), (0.25, 0.75))
    assert np.array_equal(s.totals(), [4.0, 1.0])
    with pytest.raises(ValueError):
        DelaySchedule.from_pairs([(1.0, 2.0, 3.0)])


@settings(max_examples=100)
@given(
    e0=st.floats(-20, 20), e1=st.floats(-20, 20),
    a=st.floats(0, 50), b=st.floats(0, 50),
)
def test_composition(e0, e1, a, b):
    q = PhysicalQubit(e0, e1)
    lhs = free_evolution_gate(q, a).matrix @ free_evolution_gate(q, b).matrix
    assert np.max(np.abs(lhs - free_evolution_gate(q, a + b).matrix)) < 1e-12
