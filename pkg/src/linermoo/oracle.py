"""Exhaustive grid enumeration giving the exact front of tiny instances.

Every combination of class choices, gridded leg speeds, gridded path splits
and gridded start offsets is evaluated. Start offsets only enter through the
transshipment lags, so for each (class, speed, split) combination the decoded
solution is computed once and the offset grid is swept in a vectorized pass
over the lag terms. Routes that take part in no transshipment quadruple keep
their first offset value: their offset changes neither objective nor any
residual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .evaluation import WEEK_HOURS, holding_cost, lag_violations, plan_for
from .genotype import Genotype, decode, genotype_space, make_genotype
from .instance import MAX_START_HOURS, Instance
from .metrics import pareto_mask
from .paths import transshipped_teu_by_port

ORACLE_GUARD = 10**7
DEFAULT_SPEED_STEP = 1.0
DEFAULT_WEIGHT_GRID = (0.0, 1.0)
DEFAULT_OFFSET_GRID = tuple(float(x) for x in np.arange(0.0, MAX_START_HOURS + 1, 24.0))


class GuardError(RuntimeError):
    """The enumeration would exceed the evaluation budget."""


@dataclass
class OracleResult:
    front: np.ndarray  # (k, 2), unique vectors sorted by F1
    genotypes: list[Genotype]
    n_combinations: int
    n_feasible: int


def speed_grid(inst: Instance, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("speed grid step must be positive")
    levels = (inst.speed_max_kn - inst.speed_min_kn) / step
    if abs(levels - round(levels)) > 1e-9:
        raise ValueError("speed grid step must divide the speed range")
    return inst.speed_min_kn + step * np.arange(int(round(levels)) + 1)


def split_grid(n_paths: int, weight_grid) -> list[np.ndarray]:
    """Distinct normalized weight vectors reachable from the weight grid."""
    if n_paths == 1:
        return [np.ones(1)]
    seen: dict[tuple, np.ndarray] = {}
    for w in itertools.product(weight_grid, repeat=n_paths):
        w = np.asarray(w, dtype=float)
        if w.sum() <= 0:
            continue
        key = tuple(np.round(w / w.sum(), 12))
        seen.setdefault(key, w)
    return list(seen.values())


def count_combinations(inst: Instance, speed_step=DEFAULT_SPEED_STEP,
                       weight_grid=DEFAULT_WEIGHT_GRID, offset_grid=DEFAULT_OFFSET_GRID) -> int:
    space = genotype_space(inst)
    n = inst.n_vessels ** inst.n_routes
    n *= len(speed_grid(inst, speed_step)) ** inst.n_calls_total
    for size in space.group_sizes:
        n *= len(split_grid(int(size), weight_grid))
    n *= len(offset_grid) ** _n_linked_routes(inst)
    return int(n)


def _n_linked_routes(inst: Instance) -> int:
    return len({q.r for q in inst.transshipments})


def solve_oracle(
    inst: Instance,
    speed_step: float = DEFAULT_SPEED_STEP,
    weight_grid=DEFAULT_WEIGHT_GRID,
    offset_grid=DEFAULT_OFFSET_GRID,
    guard: int = ORACLE_GUARD,
) -> OracleResult:
    """Exact feasible Pareto front over the grid."""
    # cheap size estimate first so huge instances never enumerate path splits
    logn = inst.n_routes * np.log10(inst.n_vessels) + inst.n_calls_total * np.log10(
        len(speed_grid(inst, speed_step)))
    if logn > np.log10(guard):
        raise GuardError(f"search space exceeds the guard of {guard} combinations")
    total = count_combinations(inst, speed_step, weight_grid, offset_grid)
    if total > guard:
        raise GuardError(f"{total} combinations exceed the guard of {guard}")

    space = genotype_space(inst)
    plan = plan_for(inst)
    speeds = speed_grid(inst, speed_step)
    splits = [split_grid(int(s), weight_grid) for s in space.group_sizes]
    linked = sorted({q.r for q in inst.transshipments})
    offsets_all = np.array(list(itertools.product(offset_grid, repeat=len(linked))), dtype=float)
    offsets_all = offsets_all.reshape(len(offsets_all), len(linked))
    base_offsets = np.full(inst.n_routes, float(offset_grid[0]))
    offset_table = np.tile(base_offsets, (len(offsets_all), 1))
    offset_table[:, linked] = offsets_all
    shift = (offset_table - base_offsets)[:, plan.route_of_call]

    cand_obj: list[np.ndarray] = []
    cand_key: list[tuple] = []
    n_feasible = 0
    for cls in itertools.product(range(inst.n_vessels), repeat=inst.n_routes):
        for u in itertools.product(speeds, repeat=inst.n_calls_total):
            for split in itertools.product(*splits):
                weights = np.concatenate(split) if split else np.zeros(0)
                g = make_genotype(inst, u, cls, base_offsets, weights)
                sol = decode(inst, g)
                parts = sol.residuals.parts
                other = sum(float(np.sum(v)) for k, v in parts.items() if k not in ("theta", "gamma"))
                if other > 0:
                    continue
                f1_wo_hold = sol.objectives[0] - sol.cost_terms[3]
                if len(plan.q_from):
                    t = np.concatenate([a[:-1] for a in sol.arrivals])[None, :] + shift
                    diff = t[:, plan.q_to] - t[:, plan.q_from]
                    gamma = -np.floor(diff / WEEK_HOURS)
                    theta = diff + WEEK_HOURS * gamma
                    tv, gv = lag_violations(inst, sol.n_r, theta, gamma)
                    ok = (tv.sum(axis=1) + gv.sum(axis=1)) == 0
                    hold = holding_cost(inst, transshipped_teu_by_port(sol.flow, inst), theta[ok])
                    f1 = f1_wo_hold + hold
                    rows = np.flatnonzero(ok)
                else:
                    f1 = np.array([sol.objectives[0]])
                    rows = np.zeros(1, dtype=np.int64)
                if len(rows) == 0:
                    continue
                n_feasible += len(rows)
                obj = np.column_stack([f1, np.full(len(rows), sol.objectives[1])])
                # keep only locally nondominated rows to bound memory
                keep = pareto_mask(obj)
                for k in np.flatnonzero(keep):
                    cand_obj.append(obj[k])
                    cand_key.append((u, cls, weights, offset_table[rows[k]]))
        if cand_obj:
            mask = pareto_mask(np.array(cand_obj))
            cand_obj = [o for o, m in zip(cand_obj, mask) if m]
            cand_key = [c for c, m in zip(cand_key, mask) if m]

    if not cand_obj:
        return OracleResult(np.zeros((0, 2)), [], total, 0)
    # re-decode the survivors so reported values come from the regular evaluator
    front_obj, front_g = [], []
    for u, cls, weights, offs in cand_key:
        g = make_genotype(inst, u, cls, offs, weights)
        sol = decode(inst, g)
        if sol.feasible:
            front_obj.append(sol.objectives)
            front_g.append(g)
    pts = np.array(front_obj)
    mask = pareto_mask(pts)
    pts, front_g = pts[mask], [g for g, m in zip(front_g, mask) if m]
    _, first = np.unique(pts, axis=0, return_index=True)
    first = np.sort(first)
    pts, front_g = pts[first], [front_g[i] for i in first]
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return OracleResult(pts[order], [front_g[i] for i in order], total, n_feasible)
