"""Pairwise front peeling used as the sorting oracle."""

import numpy as np


def constrained_dominates(fa, va, fb, vb):
    if va != vb:
        return va < vb
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def pairwise_fronts(objectives, violation=None):
    F = np.asarray(objectives, dtype=float)
    n = len(F)
    v = np.zeros(n) if violation is None else np.asarray(violation, dtype=float)
    remaining = list(range(n))
    fronts = []
    while remaining:
        front = [i for i in remaining
                 if not any(constrained_dominates(F[j], v[j], F[i], v[i]) for j in remaining if j != i)]
        fronts.append(front)
        remaining = [i for i in remaining if i not in set(front)]
    return fronts


def pairwise_fronts_fast(objectives):
    """Same peeling with the pairwise test vectorized per point, for large n."""
    F = np.asarray(objectives, dtype=float)
    n = len(F)
    alive = np.ones(n, dtype=bool)
    fronts = []
    while alive.any():
        idx = np.flatnonzero(alive)
        sub = F[idx]
        front = []
        for k, i in enumerate(idx):
            le = np.all(sub <= sub[k], axis=1)
            lt = np.any(sub < sub[k], axis=1)
            if not np.any(le & lt):
                front.append(int(i))
        fronts.append(front)
        alive[front] = False
    return fronts
