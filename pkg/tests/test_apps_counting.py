import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdelay.apps.counting import (
    CountingSpec,
    count_for_omega,
    counting_closed_forms,
    counting_final_state,
    estimate_count_sweep,
    fit_omega,
    grover_eigensystem,
    grover_iterate,
    omega_for_count,
    policy_delays,
    run_counting,
    solution_mask,
)
from qdelay.errors import ModelError
from qdelay.qubit_model import PhysicalQubit
from qdelay.statevec import fidelity_up_to_global_phase

REF = (0, 1, 2, 3)


def test_solution_mask_forms():
    assert np.array_equal(solution_mask(lambda x: x < 4, 4), solution_mask(REF, 4))
    assert solution_mask(REF, 4).sum() == 4
    with pytest.raises(ValueError):
        solution_mask([16], 4)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_grover_unitary(m):
    g = grover_iterate(lambda x: x % 3 == 0, m).to_dense()
    assert np.allclose(g @ g.conj().T, np.eye(1 << m), atol=1e-12)


def test_grover_size_limit():
    with pytest.raises(ValueError):
        grover_iterate(REF, 7)
    with pytest.raises(ValueError):
        grover_iterate(REF, 0)


def test_reference_eigenvalues():
    g = grover_iterate(REF, 4).to_dense()
    evals = np.linalg.eigvals(g)
    for target in (np.exp(1j * math.pi / 3), np.exp(-1j * math.pi / 3)):
        assert np.min(np.abs(evals - target)) < 1e-10
    pair = grover_eigensystem(REF, 4, l=4)
    assert pair.omega == pytest.approx(1 / 6, abs=1e-12)
    assert pair.residual < 1e-12
    assert pair.c_plus == pytest.approx(np.exp(-1j * math.pi / 3) / math.sqrt(2), abs=1e-12)
    assert pair.c_minus == pytest.approx(np.exp(1j * math.pi / 3) / math.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("l,omega", [(4, 1 / 6), (8, 1 / 4), (12, 1 / 3)])
def test_omega_for_count(l, omega):
    assert omega_for_count(l, 16) == pytest.approx(omega, abs=1e-12)
    assert count_for_omega(omega, 16) == pytest.approx(l, abs=1e-9)


@given(m=st.integers(1, 5), data=st.data())
@settings(max_examples=40, deadline=None)
def test_eigensystem_random_predicates(m, data):
    N = 1 << m
    sols = data.draw(st.sets(st.integers(0, N - 1), min_size=1, max_size=N - 1))
    pair = grover_eigensystem(sols, m)
    assert pair.residual < 1e-10
    assert abs(pair.c_plus) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert abs(pair.c_minus) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert count_for_omega(pair.omega, N) == pytest.approx(len(sols), abs=1e-9)


@pytest.mark.parametrize("sols", [(), tuple(range(16))])
def test_degenerate_counts(sols):
    with pytest.raises(ModelError):
        grover_eigensystem(sols, 4)


def test_count_mismatch():
    with pytest.raises(ValueError):
        grover_eigensystem(REF, 4, l=5)


def test_spec_validation():
    with pytest.raises(ValueError):
        CountingSpec(4, REF, 2, (1.0,))
    with pytest.raises(ValueError):
        CountingSpec(4, REF, -1)
    with pytest.raises(ValueError):
        CountingSpec(4, REF, 1, (-1.0,))
    assert CountingSpec(4, REF, 3).repetition_delays == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("k,expected", [(0, 1.0), (1, 0.5), (3, -1.0), (6, 1.0)])
def test_reference_no_delay(k, expected):
    assert run_counting(CountingSpec(4, REF, k)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 6])
def test_half_turn_delay_flips_sign(k):
    qubit = PhysicalQubit(0.0, 1.0)
    delays = (math.pi,) + (0.0,) * (k - 1)
    v = run_counting(CountingSpec(4, REF, k, delays, qubit))
    assert v == pytest.approx(-math.cos(2 * math.pi * k / 6), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 8))
def test_product_form_random_delays(seed, k):
    rng = np.random.default_rng(seed)
    delta = float(rng.uniform(0.1, 5))
    delays = tuple(rng.uniform(0, 3, k))
    qubit = PhysicalQubit.from_delta(delta, float(rng.uniform(-2, 2)))
    v = run_counting(CountingSpec(4, REF, k, delays, qubit))
    forms = counting_closed_forms(1 / 6, k, delta * math.fsum(delays))
    assert v == pytest.approx(forms["product"], abs=1e-10)


def test_shifted_form_only_agrees_at_full_turns():
    f = counting_closed_forms(1 / 6, 1, 2 * math.pi)
    assert f["product"] == pytest.approx(f["shifted"])
    f = counting_closed_forms(1 / 6, 1, 1.0)
    assert abs(f["product"] - f["shifted"]) > 0.1


def test_global_phase_tracking_irrelevant():
    spec = CountingSpec(3, (1, 5), 3, (0.4, 1.1, 0.2), PhysicalQubit(0.7, 2.2))
    a = counting_final_state(spec, True)
    b = counting_final_state(spec, False)
    assert fidelity_up_to_global_phase(a, b) == pytest.approx(1.0, abs=1e-12)


def test_policy_delays():
    q = PhysicalQubit(0.0, 2.0)
    assert policy_delays("zero", 3, q) == (0.0, 0.0, 0.0)
    assert policy_delays("matched", 2, q) == pytest.approx((math.pi, math.pi))
    assert policy_delays("worst", 1, q, l=1) == pytest.approx((1.5 * math.pi,))
    with pytest.raises(ValueError):
        policy_delays("late", 1, q)


def test_fit_omega_recovers_known_value():
    ks = np.arange(1, 13)
    omega, rms, runner = fit_omega(ks, np.cos(2 * np.pi * ks * 0.137))
    assert omega == pytest.approx(0.137, abs=1e-6)
    assert rms < 1e-6 and runner > 0.01


@pytest.mark.parametrize("policy", ["zero", "matched"])
def test_sweep_reference(policy):
    sweep = estimate_count_sweep(REF, 4, 12, policy)
    assert sweep.omega == pytest.approx(1 / 6, abs=1e-6)
    assert sweep.count_estimate == 4 and sweep.confident
    assert len(sweep.rows) == 12 and sweep.rows[0]["k"] == 1


def test_sweep_no_solutions():
    sweep = estimate_count_sweep([], 3, 8)
    assert np.allclose(sweep.sigma_z, 1.0)
    assert sweep.count_estimate == 0


def test_sweep_worst_case_misleads():
    sweep = estimate_count_sweep(REF, 4, 12, "worst")
    ks = np.arange(1, 13)
    # a half-turn of index phase per repetition, total k pi
    assert np.allclose(sweep.sigma_z, (-1.0) ** ks * np.cos(2 * np.pi * ks / 6), atol=1e-12)
    assert sweep.count_estimate != 4


def test_sweep_validation():
    with pytest.raises(ValueError):
        estimate_count_sweep(REF, 4, 0)
