"""Evolvable encoding and its decoder.

A genotype is one flat float vector laid out as

    speeds (one per leg) | class choice (one per route) |
    start offsets (one per route) | path weights (one per candidate path)

Path weights are grouped by OD pair in ``inst.od_pairs`` order. Class genes
are integers stored as floats. Flows follow from the weights, so demand and
conservation hold by construction.
"""

from __future__ import annotations

import os
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .evaluation import Solution, build_solution, round_trip_hours
from .instance import MAX_START_HOURS, TEU_QUANTUM, Instance, ceil_weeks
from .paths import flow_plan


class GenotypeSpace:
    """Layout, bounds and integer mask of the flat gene vector for one instance."""

    def __init__(self, inst: Instance):
        plan = flow_plan(inst)
        n_legs = inst.n_calls_total
        R = inst.n_routes
        self.n_paths = plan.n_paths
        self.speed = slice(0, n_legs)
        self.klass = slice(n_legs, n_legs + R)
        self.start = slice(n_legs + R, n_legs + 2 * R)
        self.weight = slice(n_legs + 2 * R, n_legs + 2 * R + plan.n_paths)
        self.size = self.weight.stop
        lo = np.zeros(self.size)
        hi = np.zeros(self.size)
        lo[self.speed], hi[self.speed] = inst.speed_min_kn, inst.speed_max_kn
        lo[self.klass], hi[self.klass] = 0, inst.n_vessels - 1
        lo[self.start], hi[self.start] = 0.0, MAX_START_HOURS
        lo[self.weight], hi[self.weight] = 0.0, 1.0
        self.lower, self.upper = lo, hi
        self.integer = np.zeros(self.size, dtype=bool)
        self.integer[self.klass] = True
        # path-weight groups, relative to the weight block
        self.group_starts = np.array([s.start for s in plan.od_slices], dtype=np.int64)
        self.group_sizes = np.array([s.stop - s.start for s in plan.od_slices], dtype=np.int64)
        self.group_of_path = np.repeat(np.arange(len(plan.od_slices)), self.group_sizes)
        self.od_demand = np.array([inst.demand[od] for od in inst.od_pairs], dtype=float)


_SPACES: "weakref.WeakKeyDictionary[Instance, GenotypeSpace]" = weakref.WeakKeyDictionary()


def genotype_space(inst: Instance) -> GenotypeSpace:
    space = _SPACES.get(inst)
    if space is None:
        space = _SPACES[inst] = GenotypeSpace(inst)
    return space


@dataclass(eq=False)
class Genotype:
    values: np.ndarray
    space: GenotypeSpace

    @property
    def speeds(self) -> np.ndarray:
        return self.values[self.space.speed]

    @property
    def class_choice(self) -> np.ndarray:
        return self.values[self.space.klass].astype(np.int64)

    @property
    def start_offsets(self) -> np.ndarray:
        return self.values[self.space.start]

    @property
    def path_weights(self) -> np.ndarray:
        return self.values[self.space.weight]

    def copy(self) -> "Genotype":
        return Genotype(self.values.copy(), self.space)


def make_genotype(inst: Instance, speeds, class_choice, start_offsets, path_weights) -> Genotype:
    space = genotype_space(inst)
    x = np.empty(space.size)
    x[space.speed] = speeds
    x[space.klass] = class_choice
    x[space.start] = start_offsets
    x[space.weight] = path_weights
    return Genotype(x, space)


def random_genotype(inst: Instance, rng: np.random.Generator | int) -> Genotype:
    """Uniform draw inside every box; class genes uniform over the classes."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    space = genotype_space(inst)
    x = space.lower + rng.random(space.size) * (space.upper - space.lower)
    x[space.klass] = rng.integers(0, inst.n_vessels, size=inst.n_routes)
    return Genotype(x, space)


def repair_values(space: GenotypeSpace, x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float)
    x = np.where(np.isnan(x), space.lower, x)
    x[space.integer] = np.round(x[space.integer])
    x = np.clip(x, space.lower, space.upper)
    w = x[space.weight]
    if len(w):
        totals = np.add.reduceat(w, space.group_starts)
        dead = totals <= 0.0
        if dead.any():
            reset = dead[space.group_of_path]
            w[reset] = 1.0 / space.group_sizes[space.group_of_path[reset]]
            x[space.weight] = w
    return x


def repair(inst: Instance, g: Genotype) -> Genotype:
    """Clamp to boxes, round integer genes, reset all-zero weight groups to uniform."""
    space = genotype_space(inst)
    return Genotype(repair_values(space, g.values), space)


def path_quantities(space: GenotypeSpace, weights: np.ndarray) -> np.ndarray:
    """Split each OD demand over its paths in proportion to the weights.

    Quantities are floored to multiples of TEU_QUANTUM and the remainder is
    given to the heaviest path (first one on ties), so every OD total equals
    its demand exactly in floating point.
    """
    if len(weights) == 0:
        return np.zeros(0)
    gid = space.group_of_path
    totals = np.add.reduceat(weights, space.group_starts)
    share = weights / totals[gid]
    q = np.floor(space.od_demand[gid] * share / TEU_QUANTUM) * TEU_QUANTUM
    rest = space.od_demand - np.add.reduceat(q, space.group_starts)
    gmax = np.maximum.reduceat(weights, space.group_starts)
    heavy = np.flatnonzero(weights == gmax[gid])
    _, first = np.unique(gid[heavy], return_index=True)
    q[heavy[first]] += rest
    return q


def decode(inst: Instance, g: Genotype) -> Solution:
    """Genotype to fully evaluated Solution.

    The fleet size per route is the smallest count that covers the round trip
    in whole weeks, clamped to the route's bounds.
    """
    space = genotype_space(inst)
    x = g.values
    classes = x[space.klass].astype(np.int64)
    speeds = x[space.speed]
    flow = flow_plan(inst).flows(path_quantities(space, x[space.weight]))
    rt = round_trip_hours(inst, classes, speeds, flow)
    n_r = np.array(
        [min(max(ceil_weeks(h), r.n_min), r.n_max) for h, r in zip(rt, inst.routes)],
        dtype=np.int64,
    )
    sol = build_solution(inst, n_r, classes, speeds, flow, x[space.start])
    sol.genotype = g
    return sol


def thread_cap() -> int:
    """Worker count from LINERMOO_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("LINERMOO_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"LINERMOO_THREADS must be an integer, got {raw!r}") from None
    return max(n, 1)


def decode_all(inst: Instance, genotypes: list[Genotype]) -> list[Solution]:
    """Decode a batch; results come back in input order whatever the thread count."""
    n = thread_cap()
    if n == 1 or len(genotypes) < 2:
        return [decode(inst, g) for g in genotypes]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda g: decode(inst, g), genotypes))
