"""Elitist nondominated sorting GA with constrained dominance."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np

from ._rng import substream
from .evaluation import Solution
from .genotype import Genotype, decode_all, genotype_space, random_genotype, repair_values
from .instance import Instance
from .metrics import hypervolume_2d, nondominated_front, reference_point
from .operators import polynomial_mutation, sbx_crossover, uniform_exchange

PROGRESS_FIELDS = ("generation", "front1_size", "best_f1", "best_f2", "hv")


def dominance_matrix(objectives, violation=None) -> np.ndarray:
    """``D[i, j]`` is True when point i constrained-dominates point j.

    Feasible beats infeasible; between infeasible points the smaller total
    violation wins; equal feasibility status and equal violation fall back to
    Pareto dominance on the objectives.
    """
    F = np.asarray(objectives, dtype=float)
    n = len(F)
    v = np.zeros(n) if violation is None else np.asarray(violation, dtype=float)
    le = np.ones((n, n), dtype=bool)
    lt = np.zeros((n, n), dtype=bool)
    for k in range(F.shape[1]):
        col = F[:, k]
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    vi, vj = v[:, None], v[None, :]
    return (vi < vj) | ((vi == vj) & le & lt)


def fast_nondominated_sort(objectives, violation=None, dominance: np.ndarray | None = None) -> list[np.ndarray]:
    """Partition point indices into fronts (each front sorted by index)."""
    D = dominance_matrix(objectives, violation) if dominance is None else dominance
    n = len(D)
    count = D.sum(axis=0)
    assigned = np.zeros(n, dtype=bool)
    fronts = []
    while not assigned.all():
        front = np.flatnonzero((count == 0) & ~assigned)
        assigned[front] = True
        count = count - D[front].sum(axis=0)
        fronts.append(front)
    return fronts


def crowding_distance(front) -> np.ndarray:
    """Normalized neighbour-gap sum per point; objective extremes get +inf."""
    F = np.asarray(front, dtype=float)
    n = len(F)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(F.shape[1]):
        order = np.argsort(F[:, k], kind="stable")
        vals = F[order, k]
        span = vals[-1] - vals[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


@dataclass
class RankedPopulation:
    members: list[Solution]
    fronts: list[np.ndarray]
    rank: np.ndarray
    crowding: np.ndarray

    @property
    def genotypes(self) -> list[Genotype]:
        return [s.genotype for s in self.members]

    def front(self, k: int = 0) -> list[Solution]:
        return [self.members[i] for i in self.fronts[k]]


def rank_population(members: list[Solution]) -> RankedPopulation:
    objs = np.array([s.objectives for s in members])
    viol = np.array([s.total_violation for s in members])
    fronts = fast_nondominated_sort(objs, viol)
    rank = np.empty(len(members), dtype=np.int64)
    crowd = np.empty(len(members))
    for k, f in enumerate(fronts):
        rank[f] = k
        crowd[f] = crowding_distance(objs[f])
    return RankedPopulation(members, fronts, rank, crowd)


def front_summary(solutions: Sequence[Solution], ref=None) -> dict[str, float]:
    """Front-1 statistics over the feasible nondominated solutions."""
    pts = np.array([s.objectives for s in solutions if s.feasible]).reshape(-1, 2)
    if len(pts) == 0:
        return dict(front1_size=0, best_f1=float("nan"), best_f2=float("nan"), hv=0.0)
    front = nondominated_front(pts)
    if ref is None:
        ref = reference_point(front)
    hv = hypervolume_2d(front[np.all(front < ref, axis=1)], ref)
    return dict(front1_size=len(front), best_f1=float(front[:, 0].min()),
                best_f2=float(front[:, 1].min()), hv=hv)


class ProgressWriter:
    """CSV progress stream shared by both solvers."""

    def __init__(self, stream: TextIO | None):
        self.writer = csv.writer(stream, lineterminator="\n") if stream is not None else None
        if self.writer:
            self.writer.writerow(PROGRESS_FIELDS)

    def row(self, generation: int, summary: dict[str, float]) -> None:
        if self.writer:
            self.writer.writerow([generation] + [
                repr(float(summary[k])) if k != "front1_size" else int(summary[k])
                for k in PROGRESS_FIELDS[1:]
            ])


@dataclass
class NSGA2Params:
    pop: int = 100
    generations: int = 500
    p_mut: float | None = None  # None means 1/m with m the gene count
    eta_mut: float = 100.0
    cr: float = 0.5
    eta_cx: float = 20.0
    seed: int = 0
    progress_ref: Sequence[float] | None = field(default=None)


def _better(i: int, j: int, rank: np.ndarray, crowd: np.ndarray) -> int:
    if rank[i] != rank[j]:
        return i if rank[i] < rank[j] else j
    if crowd[i] != crowd[j]:
        return i if crowd[i] > crowd[j] else j
    return min(i, j)


def _survivors(ranked: RankedPopulation, size: int) -> list[int]:
    chosen: list[int] = []
    for f in ranked.fronts:
        if len(chosen) + len(f) <= size:
            chosen.extend(int(i) for i in f)
            continue
        # stable: ties in crowding keep lower member index first
        order = np.lexsort((f, -ranked.crowding[f]))
        chosen.extend(int(i) for i in f[order][: size - len(chosen)])
        break
    return chosen


def evolve(
    inst: Instance,
    params: NSGA2Params | None = None,
    progress: TextIO | None = None,
    callback: Callable[[int, RankedPopulation], None] | None = None,
) -> RankedPopulation:
    """Run the GA and return the final ranked population."""
    params = params or NSGA2Params()
    space = genotype_space(inst)
    m = space.size
    p_mut = params.p_mut if params.p_mut is not None else 1.0 / m
    real = ~space.integer
    init_rng = substream(params.seed, "nsga2/init")
    rng = substream(params.seed, "nsga2/vary")
    log = ProgressWriter(progress)

    pop = decode_all(inst, [random_genotype(inst, init_rng) for _ in range(params.pop)])
    ranked = rank_population(pop)
    log.row(0, front_summary(pop, params.progress_ref))
    if callback:
        callback(0, ranked)

    for gen in range(1, params.generations + 1):
        children: list[Genotype] = []
        n = len(pop)
        while len(children) < params.pop:
            a, b, c, d = rng.integers(0, n, size=4)
            p1 = pop[_better(int(a), int(b), ranked.rank, ranked.crowding)].genotype.values
            p2 = pop[_better(int(c), int(d), ranked.rank, ranked.crowding)].genotype.values
            c1, c2 = sbx_crossover(p1, p2, space.lower, space.upper, params.eta_cx, params.cr, rng)
            # integer genes are exchanged whole, not blended
            c1[~real], c2[~real] = p1[~real], p2[~real]
            c1, c2 = uniform_exchange(c1, c2, ~real, rng)
            for child in (c1, c2):
                child = polynomial_mutation(child, space.lower, space.upper, params.eta_mut, p_mut, rng)
                children.append(Genotype(repair_values(space, child), space))
        children = children[: params.pop]
        combined = pop + decode_all(inst, children)
        keep = _survivors(rank_population(combined), params.pop)
        pop = [combined[i] for i in keep]
        ranked = rank_population(pop)
        log.row(gen, front_summary(pop, params.progress_ref))
        if callback:
            callback(gen, ranked)
    return ranked
