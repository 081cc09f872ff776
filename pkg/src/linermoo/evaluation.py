"""Objective functions, schedule recursion and constraint residuals.

Units: hours, nautical miles, knots, TEU/week, USD/week. Fuel burn is in
tons/day, so fuel for one leg is ``L / (24 u) * F``.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .instance import MAX_START_HOURS, WEEK_HOURS, CostRates, Instance, VesselClass
from .paths import FlowAssignment, transshipped_teu_by_port

FEASIBILITY_TOL = 1e-6

COST_TERMS = (
    "operating",
    "berth",
    "transshipment_handling",
    "transshipment_holding",
    "loading_discharge",
    "fuel",
    "emission_sea",
    "emission_port",
)


def fuel_tons_per_day(v: VesselClass, u, payload_teu, rates: CostRates):
    """Admiralty-type burn rate: k * u^3 * (empty weight + cargo weight)^(2/3)."""
    displacement = v.empty_weight_t + np.asarray(payload_teu, dtype=float) * rates.teu_weight_t
    out = v.fuel_coeff_k * np.asarray(u, dtype=float) ** 3 * displacement ** (2.0 / 3.0)
    return float(out) if np.ndim(out) == 0 else out


class _Plan:
    """Instance-level index arrays shared by every evaluation."""

    def __init__(self, inst: Instance):
        R = inst.n_routes
        self.route_of_call = np.concatenate(
            [np.full(r.n_calls, k, dtype=np.int64) for k, r in enumerate(inst.routes)]
        )
        self.call_port = np.concatenate([np.asarray(r.port_calls, dtype=np.int64) for r in inst.routes])
        self.leg_length = np.concatenate([np.asarray(r.leg_lengths_nm, dtype=float) for r in inst.routes])
        self.next_port = np.concatenate(
            [np.roll(np.asarray(r.port_calls, dtype=np.int64), -1) for r in inst.routes]
        )
        offs = inst.call_offsets
        self.offsets = offs
        # previous call (cyclic) in flat numbering, for conservation checks
        self.prev_call = np.concatenate(
            [offs[k] + np.roll(np.arange(r.n_calls), 1) for k, r in enumerate(inst.routes)]
        )
        quads = inst.transshipments
        P = inst.n_ports
        self.net_index = (self.call_port[:, None] * P + np.arange(P)[None, :]).ravel()
        self.diag = (np.arange(P), np.arange(P))
        self.call_rows = np.arange(inst.n_calls_total)
        # flat positions in the concatenated per-route arrival arrays
        self.arr_this = np.concatenate([offs[k] + k + np.arange(r.n_calls) for k, r in enumerate(inst.routes)])
        self.arr_next = self.arr_this + 1
        self.q_from = np.array([offs[q.r] + q.i for q in quads], dtype=np.int64)
        self.q_to = np.array([offs[q.r_prime] + q.i_prime for q in quads], dtype=np.int64)
        self.q_r = np.array([q.r for q in quads], dtype=np.int64)
        self.q_rp = np.array([q.r_prime for q in quads], dtype=np.int64)
        self.q_port = np.array([q.port for q in quads], dtype=np.int64)
        self.quad_port_incidence = np.zeros((len(quads), inst.n_ports))
        self.quad_port_incidence[np.arange(len(quads)), self.q_port] = 1.0
        vs = inst.vessels
        self.cap = np.array([v.capacity_teu for v in vs])
        self.c_opr = np.array([v.c_opr for v in vs])
        self.c_berth = np.array([v.c_berth for v in vs])
        self.handling = np.array([v.handling_time_h_per_teu for v in vs])
        self.empty_w = np.array([v.empty_weight_t for v in vs])
        self.k_fuel = np.array([v.fuel_coeff_k for v in vs])
        self.c_fix = np.array([[v.c_fix[r] for v in vs] for r in range(R)]).reshape(R, len(vs))
        dem = inst.demand
        rates = inst.rates
        self.loading_const = float(
            np.sum((rates.c_load[:, None] + rates.c_disc[None, :]) * dem)
        )
        self.n_min = np.array([r.n_min for r in inst.routes])
        self.n_max = np.array([r.n_max for r in inst.routes])


_PLANS: "weakref.WeakKeyDictionary[Instance, _Plan]" = weakref.WeakKeyDictionary()


def plan_for(inst: Instance) -> _Plan:
    plan = _PLANS.get(inst)
    if plan is None:
        plan = _PLANS[inst] = _Plan(inst)
    return plan


@dataclass
class ConstraintReport:
    """Largest violation per constraint family and the summed violation.

    Element violations at or below FEASIBILITY_TOL are treated as zero, so
    ``total_violation == 0`` exactly when the solution is feasible.
    """

    capacity: float = 0.0
    weekly: float = 0.0
    theta: float = 0.0
    gamma: float = 0.0
    bounds: float = 0.0
    flow: float = 0.0
    schedule: float = 0.0
    total_violation: float = 0.0
    parts: dict[str, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    @property
    def feasible(self) -> bool:
        return self.total_violation == 0.0

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in (
            "capacity", "weekly", "theta", "gamma", "bounds", "flow", "schedule", "total_violation")}


@dataclass(eq=False)
class Solution:
    n_r: np.ndarray
    classes: np.ndarray
    speeds: np.ndarray  # per flat leg
    arrivals: list[np.ndarray]  # per route, |I_r| + 1 entries
    theta: np.ndarray
    gamma: np.ndarray
    flow: FlowAssignment
    objectives: tuple[float, float] = (float("nan"), float("nan"))
    cost_terms: np.ndarray = field(default_factory=lambda: np.zeros(len(COST_TERMS)))
    residuals: ConstraintReport = field(default_factory=ConstraintReport)
    genotype: Any = None

    @property
    def x(self) -> np.ndarray:
        """One-hot class matrix x_rv."""
        R = len(self.classes)
        n_v = int(self.classes.max()) + 1 if R else 0
        return np.eye(max(n_v, 1), dtype=int)[self.classes]

    @property
    def start_offsets(self) -> np.ndarray:
        return np.array([a[0] for a in self.arrivals])

    @property
    def feasible(self) -> bool:
        return self.residuals.feasible

    @property
    def total_violation(self) -> float:
        return self.residuals.total_violation


def round_trip_hours(inst: Instance, classes: np.ndarray, speeds: np.ndarray, flow: FlowAssignment) -> np.ndarray:
    """Sailing plus handling hours of one full rotation, per route (fixed call time included)."""
    plan = plan_for(inst)
    step = _step_hours(inst, plan, classes, speeds, flow.handled)
    return np.bincount(plan.route_of_call, weights=step, minlength=inst.n_routes)


def _step_hours(inst: Instance, plan: _Plan, classes, speeds, handled) -> np.ndarray:
    T = plan.handling[np.asarray(classes)[plan.route_of_call]]
    step = T * handled + plan.leg_length / speeds
    if inst.fixed_port_hours:
        step = step + inst.fixed_port_hours
    return step


def propagate_schedule(inst: Instance, n_r, classes, speeds, flow: FlowAssignment, start_offsets):
    """Arrival-time recursion plus transshipment lags.

    Returns ``(arrivals, theta, gamma)``: per-route arrival arrays of length
    ``|I_r| + 1`` and, per transshipment quadruple, the lag in ``[0, 168)``
    with its week-wrap integer.
    """
    plan = plan_for(inst)
    step = _step_hours(inst, plan, classes, speeds, flow.handled)
    arrivals = []
    for r in range(inst.n_routes):
        a, b = plan.offsets[r], plan.offsets[r + 1]
        t = np.empty(b - a + 1)
        t[0] = start_offsets[r]
        t[1:] = start_offsets[r] + np.cumsum(step[a:b])
        arrivals.append(t)
    theta, gamma = transshipment_lags(inst, arrivals)
    return arrivals, theta, gamma


def _flat_arrivals(inst: Instance, arrivals: list[np.ndarray]) -> np.ndarray:
    return np.concatenate(arrivals)[plan_for(inst).arr_this]


def transshipment_lags(inst: Instance, arrivals: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    plan = plan_for(inst)
    if len(plan.q_from) == 0:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    t = _flat_arrivals(inst, arrivals)
    diff = t[plan.q_to] - t[plan.q_from]
    gamma = -np.floor(diff / WEEK_HOURS)
    theta = diff + WEEK_HOURS * gamma
    return theta, gamma.astype(np.int64)


def holding_cost(inst: Instance, transshipped: np.ndarray, theta):
    """Holding term from per-port transshipped TEU and lags; ``theta`` may be (k, n_quads)."""
    plan = plan_for(inst)
    theta = np.asarray(theta, dtype=float)
    lag_at_port = theta @ plan.quad_port_incidence
    bracket = 2.0 * transshipped
    return 0.5 * np.sum(inst.rates.c_hold * lag_at_port * bracket, axis=-1)


def cost_breakdown(inst: Instance, sol: Solution) -> np.ndarray:
    """The eight cost components, in COST_TERMS order (USD/week)."""
    plan = plan_for(inst)
    rates = inst.rates
    cls = np.asarray(sol.classes)
    call_cls = cls[plan.route_of_call]
    handled = sol.flow.handled
    payload = sol.flow.payload

    operating = float(np.sum(sol.n_r * plan.c_opr[cls] + plan.c_fix[np.arange(inst.n_routes), cls]))
    berth = float(np.sum(plan.c_berth[call_cls] * plan.handling[call_cls] * handled))

    transshipped = transshipped_teu_by_port(sol.flow, inst)
    bracket = 2.0 * transshipped
    handling = float(0.5 * np.sum(rates.c_trans * bracket))
    holding = float(holding_cost(inst, transshipped, sol.theta))

    loading = plan.loading_const

    u = sol.speeds
    disp = plan.empty_w[call_cls] + payload * rates.teu_weight_t
    burn = plan.k_fuel[call_cls] * u**3 * disp ** (2.0 / 3.0)
    sailing_fuel_t = float(np.sum(plan.leg_length / (24.0 * u) * burn))
    fuel = rates.c_fuel * sailing_fuel_t
    emission_sea = rates.c_emis * rates.e_sea * sailing_fuel_t
    emission_port = rates.c_emis * rates.e_port * float(np.sum(handled))
    return np.array([operating, berth, handling, holding, loading, fuel, emission_sea, emission_port])


def objective_cost(inst: Instance, sol: Solution) -> tuple[float, np.ndarray]:
    terms = cost_breakdown(inst, sol)
    return float(np.sum(terms)), terms


def objective_time(inst: Instance, sol: Solution) -> float:
    plan = plan_for(inst)
    call_cls = np.asarray(sol.classes)[plan.route_of_call]
    return float(np.sum(plan.leg_length / sol.speeds + plan.handling[call_cls] * sol.flow.handled))


def _pos(x) -> np.ndarray:
    x = np.array(x, dtype=float)
    x[x <= FEASIBILITY_TOL] = 0.0
    return x


def flow_residuals(inst: Instance, flow: FlowAssignment) -> dict[str, float]:
    """Max absolute residual of demand, conservation, no-return,
    no-discharge-at-origin and non-negativity rows."""
    plan = plan_for(inst)
    P = inst.n_ports
    net = np.bincount(plan.net_index, weights=(flow.z_disc - flow.z_load).ravel(), minlength=P * P)
    demand_res = net.reshape(P, P).T - inst.demand
    demand_res[plan.diag] = 0.0
    conservation = flow.f[plan.prev_call] + flow.z_load - flow.f - flow.z_disc
    rows = plan.call_rows
    no_return = flow.f[rows, plan.next_port]
    no_disc_origin = flow.z_disc[rows, plan.call_port]
    negative = min(flow.z_load.min(initial=0.0), flow.z_disc.min(initial=0.0), flow.f.min(initial=0.0))
    return {
        "demand": float(np.abs(demand_res).max(initial=0.0)),
        "conservation": float(np.abs(conservation).max(initial=0.0)),
        "no_return": float(np.abs(no_return).max(initial=0.0)),
        "no_discharge_at_origin": float(np.abs(no_disc_origin).max(initial=0.0)),
        "nonnegativity": float(-negative),
    }


def violation_parts(inst: Instance, sol: Solution) -> dict[str, np.ndarray]:
    """Element-wise violations per family (tolerance already applied)."""
    plan = plan_for(inst)
    cls = np.asarray(sol.classes)
    n = np.asarray(sol.n_r)
    gamma = np.asarray(sol.gamma)
    capacity = _pos(sol.flow.payload - plan.cap[cls[plan.route_of_call]])
    step = _step_hours(inst, plan, cls, sol.speeds, sol.flow.handled)
    rt = np.bincount(plan.route_of_call, weights=step, minlength=inst.n_routes)
    weekly = _pos(rt - WEEK_HOURS * n)
    theta_v, gamma_v = lag_violations(inst, n, sol.theta, gamma)
    starts = sol.start_offsets
    bounds = np.concatenate([
        _pos(np.concatenate([
            inst.speed_min_kn - sol.speeds, sol.speeds - inst.speed_max_kn,
            plan.n_min - n, n - plan.n_max, -cls, cls - (inst.n_vessels - 1),
            -starts, starts - MAX_START_HOURS,
        ])),
        # integrality is exact, not toleranced
        np.abs(n - np.round(n)), np.abs(gamma - np.round(gamma)),
    ])
    flow_v = _pos(list(flow_residuals(inst, sol.flow).values()))
    # recursion and lag identities; zero for decoded solutions
    t_all = np.concatenate(sol.arrivals)
    sched = [np.abs(t_all[plan.arr_next] - t_all[plan.arr_this] - step)]
    if len(sol.theta):
        t_flat = t_all[plan.arr_this]
        sched.append(np.abs(t_flat[plan.q_to] - t_flat[plan.q_from] + WEEK_HOURS * gamma - sol.theta))
    sched_v = _pos(np.concatenate(sched))
    return dict(capacity=capacity, weekly=weekly, theta=theta_v, gamma=gamma_v,
                bounds=bounds, flow=flow_v, schedule=sched_v)


def lag_violations(inst: Instance, n_r, theta, gamma) -> tuple[np.ndarray, np.ndarray]:
    """Lag-window and week-wrap violations; works on (..., n_quads) arrays."""
    plan = plan_for(inst)
    theta = np.asarray(theta, dtype=float)
    gamma = np.asarray(gamma)
    n = np.asarray(n_r)
    theta_v = _pos(theta - MAX_START_HOURS) + _pos(-theta)
    gamma_v = np.maximum(gamma - n[plan.q_r], 0) + np.maximum(-n[plan.q_rp] - gamma, 0)
    return theta_v, gamma_v.astype(float)


def constraint_report(inst: Instance, sol: Solution) -> ConstraintReport:
    parts = violation_parts(inst, sol)
    mx = lambda a: float(a.max()) if a.size else 0.0
    return ConstraintReport(
        **{k: mx(v) for k, v in parts.items()},
        total_violation=float(sum(v.sum() for v in parts.values())),
        parts=parts,
    )


def evaluate(inst: Instance, sol: Solution) -> Solution:
    """Attach objectives, cost breakdown and residuals to ``sol`` (in place)."""
    f1, terms = objective_cost(inst, sol)
    sol.cost_terms = terms
    sol.objectives = (f1, objective_time(inst, sol))
    sol.residuals = constraint_report(inst, sol)
    return sol


def build_solution(inst: Instance, n_r, classes, speeds, flow: FlowAssignment, start_offsets) -> Solution:
    """Schedule, evaluate and check a fully specified set of decisions."""
    n_r = np.asarray(n_r, dtype=np.int64)
    classes = np.asarray(classes, dtype=np.int64)
    speeds = np.asarray(speeds, dtype=float)
    arrivals, theta, gamma = propagate_schedule(inst, n_r, classes, speeds, flow, start_offsets)
    sol = Solution(n_r=n_r, classes=classes, speeds=speeds, arrivals=arrivals,
                   theta=theta, gamma=gamma, flow=flow)
    return evaluate(inst, sol)
