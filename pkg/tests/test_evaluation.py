import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linermoo.evaluation import (
    COST_TERMS,
    build_solution,
    fuel_tons_per_day,
    holding_cost,
    propagate_schedule,
    round_trip_hours,
)
from linermoo.genotype import decode, genotype_space, make_genotype, random_genotype
from linermoo.instance import load_bundled
from linermoo.paths import flows_from_paths, transshipped_teu_by_port
from reference import reference_costs, reference_lags, reference_schedule, reference_time


def _t2_solution(toys, speeds=(15.0, 17.0, 19.0, 21.0), classes=(1, 0), starts=(10.0, 100.0)):
    inst = toys["toy_t2"]
    space = genotype_space(inst)
    g = make_genotype(inst, speeds, classes, starts, np.ones(space.weight.stop - space.weight.start))
    return inst, decode(inst, g)


def test_t2_frozen_objectives(toys):
    # values computed once with the scalar oracle in tests/reference.py
    inst, sol = _t2_solution(toys)
    assert sol.objectives[0] == pytest.approx(1609824.627666825, rel=1e-12)
    assert sol.objectives[1] == pytest.approx(154.26896653398202, rel=1e-12)
    assert sol.feasible
    assert sol.n_r.tolist() == [1, 1]


def test_t2_holding_term_by_hand(toys):
    # one quad in each direction at B: the two lags sum to a full week
    inst, sol = _t2_solution(toys)
    assert sol.theta.sum() == pytest.approx(168.0)
    b = inst.port_index("B")
    expected = 0.5 * inst.rates.c_hold[b] * 168.0 * 2 * 1000.0
    assert sol.cost_terms[COST_TERMS.index("transshipment_holding")] == pytest.approx(expected)
    assert sol.cost_terms[COST_TERMS.index("transshipment_handling")] == pytest.approx(
        inst.rates.c_trans[b] * 1000.0)


@pytest.mark.parametrize("name", ["toy_t1", "toy_t2", "toy_t3", "row_10_2_3", "row_16_3_4", "paper_6routes"])
def test_costs_match_scalar_oracle(name):
    inst = load_bundled(name)
    rng = np.random.default_rng(3)
    for _ in range(5):
        sol = decode(inst, random_genotype(inst, rng))
        arr = reference_schedule(inst, sol.classes, sol.speeds, sol.flow, sol.start_offsets)
        for a, b in zip(arr, sol.arrivals):
            assert np.allclose(a, b, rtol=1e-12, atol=1e-9)
        theta, gamma = reference_lags(inst, arr)
        assert np.allclose(theta, sol.theta, atol=1e-9)
        assert list(gamma) == sol.gamma.tolist()
        terms = reference_costs(inst, sol.n_r, sol.classes, sol.speeds, sol.flow, theta)
        assert np.allclose(terms, sol.cost_terms, rtol=1e-10, atol=1e-6)
        assert sol.objectives[1] == pytest.approx(reference_time(inst, sol.classes, sol.speeds, sol.flow),
                                                  rel=1e-12)


def test_fuel_is_cubic_in_speed(toys):
    v = toys["toy_t1"].vessels[0]
    rates = toys["toy_t1"].rates
    assert fuel_tons_per_day(v, 20.0, 500.0, rates) == pytest.approx(8 * fuel_tons_per_day(v, 10.0, 500.0, rates),
                                                                      rel=1e-14)


def test_fuel_vectorizes(toys):
    v = toys["toy_t1"].vessels[1]
    rates = toys["toy_t1"].rates
    u = np.array([14.0, 18.0, 24.0])
    vec = fuel_tons_per_day(v, u, 1000.0, rates)
    assert np.allclose(vec, [fuel_tons_per_day(v, x, 1000.0, rates) for x in u])


def test_sailing_time_per_leg_is_length_over_speed(toys):
    inst = toys["toy_t1"]
    flow = flows_from_paths(inst, {(0, 1): [1800.0], (1, 0): [900.0]})
    rt = round_trip_hours(inst, np.array([0]), np.array([20.0, 10.0]), flow)
    T = inst.vessels[0].handling_time_h_per_teu
    assert rt[0] == pytest.approx(331 / 20 + 337 / 10 + T * 2 * 2700)


def test_lag_wraps_into_week(toys):
    inst = toys["toy_t2"]
    flow = flows_from_paths(inst, {(0, 2): [600.0], (2, 0): [400.0]})
    # start route 1 later than route 0 by more than a week relative to the quad
    arrivals, theta, gamma = propagate_schedule(inst, np.array([1, 1]), np.array([0, 0]),
                                                np.full(4, 20.0), flow, np.array([0.0, 144.0]))
    diff = arrivals[1][0] - arrivals[0][1]
    assert theta[0] == pytest.approx(diff % 168.0)
    assert 0 <= theta[0] < 168 and 0 <= theta[1] < 168
    assert theta.sum() == pytest.approx(168.0)


def test_holding_cost_is_vectorized(toys):
    inst, sol = _t2_solution(toys)
    trans = transshipped_teu_by_port(sol.flow, inst)
    batch = np.array([sol.theta, sol.theta + 1.0, np.zeros(2)])
    got = holding_cost(inst, trans, batch)
    assert got.shape == (3,)
    assert got[0] == pytest.approx(holding_cost(inst, trans, sol.theta))
    assert got[2] == 0.0


def test_capacity_violation_detected(toys):
    inst = toys["toy_t1"]
    flow = flows_from_paths(inst, {(0, 1): [1800.0], (1, 0): [900.0]})
    # smaller class holds 2400; double the leg flow on purpose
    from linermoo.paths import FlowAssignment
    big = FlowAssignment(flow.z_load * 2, flow.z_disc * 2, flow.f * 2, flow.call_offsets)
    sol = build_solution(inst, [3], [0], [20.0, 20.0], big, [0.0])
    assert sol.residuals.capacity == pytest.approx(3600 - 2400)
    assert sol.residuals.flow > 0  # doubled flows also break the demand rows
    assert not sol.feasible


def test_weekly_violation_detected(toys):
    inst = toys["toy_t1"]
    flow = flows_from_paths(inst, {(0, 1): [1800.0], (1, 0): [900.0]})
    sol = build_solution(inst, [1], [0], [14.0, 14.0], flow, [0.0])
    rt = round_trip_hours(inst, sol.classes, sol.speeds, flow)[0]
    assert sol.residuals.weekly == pytest.approx(rt - 168.0)
    assert not sol.feasible
    ok = build_solution(inst, [2], [0], [14.0, 14.0], flow, [0.0])
    assert ok.feasible and ok.total_violation == 0.0


def test_fleet_bounds_and_integrality(toys):
    inst = toys["toy_t1"]
    flow = flows_from_paths(inst, {(0, 1): [1800.0], (1, 0): [900.0]})
    sol = build_solution(inst, [16], [0], [20.0, 20.0], flow, [0.0])
    assert sol.residuals.bounds == pytest.approx(1.0)
    frac = build_solution(inst, np.array([2]), [0], [20.0, 20.0], flow, [0.0])
    frac.n_r = np.array([2.5])
    from linermoo.evaluation import constraint_report
    assert constraint_report(inst, frac).bounds == pytest.approx(0.5)


def test_speed_bounds_detected(toys):
    inst = toys["toy_t1"]
    flow = flows_from_paths(inst, {(0, 1): [1800.0], (1, 0): [900.0]})
    sol = build_solution(inst, [2], [0], [12.0, 25.0], flow, [0.0])
    assert sol.residuals.bounds == pytest.approx(2.0)


def test_tiny_residuals_are_zeroed(toys):
    inst = toys["toy_t1"]
    flow = flows_from_paths(inst, {(0, 1): [1800.0], (1, 0): [900.0]})
    sol = build_solution(inst, [1], [0], [24.0 + 1e-8, 24.0], flow, [0.0])
    assert sol.residuals.bounds == 0.0


ROW16 = load_bundled("row_16_3_4")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decoded_solutions_satisfy_flow_rows_exactly(seed):
    sol = decode(ROW16, random_genotype(ROW16, seed))
    parts = sol.residuals.parts
    assert not parts["flow"].any()
    assert not parts["schedule"].any()
    assert np.all(sol.objectives[0] >= sum(sol.cost_terms[k] for k in (0, 4)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_time_objective_equals_round_trip_sum(seed):
    sol = decode(ROW16, random_genotype(ROW16, seed))
    rt = round_trip_hours(ROW16, sol.classes, sol.speeds, sol.flow)
    assert sol.objectives[1] == pytest.approx(rt.sum(), rel=1e-12)
    assert np.all(sol.n_r * 168.0 >= rt - 1e-6) or not sol.feasible


def test_cost_terms_nonnegative_on_network(network):
    rng = np.random.default_rng(0)
    for _ in range(20):
        sol = decode(network, random_genotype(network, rng))
        assert np.all(sol.cost_terms >= 0)
        assert sol.objectives[0] == pytest.approx(sol.cost_terms.sum())
