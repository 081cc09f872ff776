"""Online clustering evolutionary algorithm with a hypervolume-pruned archive."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np

from ._rng import substream
from .evaluation import Solution
from .genotype import Genotype, GenotypeSpace, decode, decode_all, genotype_space, random_genotype, repair_values
from .instance import Instance
from .metrics import hv_contributions, reference_point
from .nsga2 import ProgressWriter, dominance_matrix, fast_nondominated_sort, front_summary
from .operators import polynomial_mutation


@dataclass
class Cluster:
    centroid: np.ndarray
    count: int


@dataclass
class Archive:
    """Fixed-size elite set; ``labels[k]`` is the cluster index of member k."""

    solutions: list[Solution]
    clusters: list[Cluster]
    labels: np.ndarray
    scale: np.ndarray = field(repr=False)
    _objs: np.ndarray = field(init=False, repr=False)
    _viol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._objs = np.array([s.objectives for s in self.solutions], dtype=float).reshape(-1, 2)
        self._viol = np.array([s.total_violation for s in self.solutions], dtype=float)

    @property
    def size(self) -> int:
        return len(self.solutions)

    def objectives(self) -> np.ndarray:
        return self._objs.copy()

    def violations(self) -> np.ndarray:
        return self._viol.copy()

    def replace(self, k: int, s: Solution) -> None:
        self.solutions[k] = s
        self._objs[k] = s.objectives
        self._viol[k] = s.total_violation

    def members_of(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


@dataclass
class UpdateEvent:
    """What one archive update did; handed to observers."""

    removed_index: int  # position in E + {t}; equal to K when t was rejected
    n_fronts: int
    reference: np.ndarray | None
    before: list[Solution]


@dataclass
class OCEAParams:
    K: int = 100
    alpha: float = 0.6
    n_max: int = 3
    C: float = 1.0
    CR: float = 0.5
    p: float | None = None  # None means 1/m with m the gene count
    rho: float = 20.0
    generations: int = 500
    seed: int = 0
    progress_ref: Sequence[float] | None = None


def solgen(
    s: Genotype,
    pool: Sequence[Genotype],
    space: GenotypeSpace,
    rng: np.random.Generator,
    C: float = 1.0,
    CR: float = 0.5,
    p: float | None = None,
    rho: float = 20.0,
) -> Genotype:
    """Differential step from two pool members, box repair, polynomial mutation, repair."""
    if len(pool) < 2:
        raise ValueError("mating pool needs at least two parents")
    i, j = rng.choice(len(pool), size=2, replace=False)
    s1, s2 = pool[int(i)].values, pool[int(j)].values
    m = space.size
    x = s.values
    trial = np.where(rng.random(m) <= CR, x + C * (s1 - s2), x)
    trial = np.clip(trial, space.lower, space.upper)
    prob = 1.0 / m if p is None else p
    mutated = polynomial_mutation(trial, space.lower, space.upper, rho, prob, rng)
    return Genotype(repair_values(space, mutated), space)


def _distance_scale(space: GenotypeSpace) -> np.ndarray:
    span = space.upper - space.lower
    return np.where(span > 0, span, 1.0)


def _merge_closest(archive: Archive) -> None:
    cents = np.array([c.centroid for c in archive.clusters]) / archive.scale
    d2 = np.sum((cents[:, None, :] - cents[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    xi, eta = np.unravel_index(int(np.argmin(d2)), d2.shape)
    xi, eta = (int(xi), int(eta)) if xi < eta else (int(eta), int(xi))
    a, b = archive.clusters[xi], archive.clusters[eta]
    a.centroid = (a.centroid * a.count + b.centroid * b.count) / (a.count + b.count)
    a.count += b.count
    del archive.clusters[eta]
    archive.labels[archive.labels == eta] = xi
    archive.labels[archive.labels > eta] -= 1


def init_archive(solutions: list[Solution], space: GenotypeSpace, n_max: int) -> Archive:
    """Every member starts as its own cluster; merge down to ``n_max`` clusters."""
    clusters = [Cluster(s.genotype.values.copy(), 1) for s in solutions]
    archive = Archive(list(solutions), clusters, np.arange(len(solutions)), _distance_scale(space))
    while len(archive.clusters) > n_max:
        _merge_closest(archive)
    return archive


def esoc_update(archive: Archive, t: Solution, n_max: int = 3) -> UpdateEvent:
    """Insert ``t`` and drop one member of E + {t}; keep the clustering consistent."""
    K = archive.size
    before = list(archive.solutions)
    objs = np.vstack([archive._objs, np.asarray(t.objectives)[None, :]])
    viol = np.append(archive._viol, t.total_violation)
    D = dominance_matrix(objs, viol)
    fronts = fast_nondominated_sort(objs, viol, dominance=D)
    ref = None
    if len(fronts) > 1:
        worst = fronts[-1]
        dom_count = D[:, worst].sum(axis=0)
        s_star = int(worst[int(np.argmax(dom_count))])
    else:
        ref = reference_point(objs)
        s_star = int(np.argmin(hv_contributions(objs, ref)))
    event = UpdateEvent(s_star, len(fronts), ref, before)
    if s_star == K:
        return event

    c = int(archive.labels[s_star])
    cl = archive.clusters[c]
    cl.count -= 1
    x_star = archive.solutions[s_star].genotype.values
    if cl.count == 0:
        del archive.clusters[c]
        archive.labels[archive.labels > c] -= 1
    else:
        cl.centroid = cl.centroid - (x_star - cl.centroid) / cl.count
    archive.replace(s_star, t)
    archive.clusters.append(Cluster(t.genotype.values.copy(), 1))
    archive.labels[s_star] = len(archive.clusters) - 1
    while len(archive.clusters) > n_max:
        _merge_closest(archive)
    return event


def run_ocea(
    inst: Instance,
    params: OCEAParams | None = None,
    progress: TextIO | None = None,
    observer: Callable[[Archive, UpdateEvent], None] | None = None,
) -> Archive:
    """Evolve for ``params.generations`` generations and return the archive."""
    params = params or OCEAParams()
    space = genotype_space(inst)
    init_rng = substream(params.seed, "ocea/init")
    rng = substream(params.seed, "ocea/vary")
    log = ProgressWriter(progress)

    start = decode_all(inst, [random_genotype(inst, init_rng) for _ in range(params.K)])
    archive = init_archive(start, space, params.n_max)
    log.row(0, front_summary(archive.solutions, params.progress_ref))

    for gen in range(1, params.generations + 1):
        # the population of this generation is the archive as it stood at its start
        pop = [s.genotype for s in archive.solutions]
        labels = archive.labels.copy()
        groups = [np.flatnonzero(labels == c) for c in range(len(archive.clusters))]
        global_pool = [int(g[rng.integers(len(g))]) for g in groups]
        for j in range(params.K):
            pool_idx: list[int] | None = None
            if rng.random() < params.alpha:
                own = [int(k) for k in groups[labels[j]] if k != j]
                if len(own) >= 2:
                    pool_idx = own
            if pool_idx is None:
                pool_idx = global_pool if len(global_pool) >= 2 else [k for k in range(params.K) if k != j]
            child_g = solgen(pop[j], [pop[k] for k in pool_idx], space, rng,
                             params.C, params.CR, params.p, params.rho)
            event = esoc_update(archive, decode(inst, child_g), params.n_max)
            if observer:
                observer(archive, event)
        log.row(gen, front_summary(archive.solutions, params.progress_ref))
    return archive


def archive_front(archive: Archive) -> list[Solution]:
    """Feasible members not dominated by any other feasible member."""
    feas = [s for s in archive.solutions if s.feasible]
    if not feas:
        return []
    objs = np.array([s.objectives for s in feas])
    first = fast_nondominated_sort(objs)[0]
    return [feas[i] for i in first]
