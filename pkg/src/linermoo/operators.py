"""Real-coded variation operators shared by the evolutionary solvers."""

from __future__ import annotations

import numpy as np


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta: float,
    gene_prob: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Bounded simulated binary crossover, gene-wise.

    Each gene is recombined with probability ``gene_prob``; children are
    swapped gene-wise with probability 1/2 and clipped to the box.
    """
    c1 = np.array(p1, dtype=float)
    c2 = np.array(p2, dtype=float)
    n = len(c1)
    u_sel = rng.random(n)
    u_beta = rng.random(n)
    u_swap = rng.random(n)
    y1 = np.minimum(c1, c2)
    y2 = np.maximum(c1, c2)
    gap = y2 - y1
    active = (u_sel < gene_prob) & (gap > 1e-14) & (upper > lower)
    if not active.any():
        return c1, c2
    y1, y2, gap = y1[active], y2[active], gap[active]
    lo, hi, r = lower[active], upper[active], u_beta[active]
    e1 = 1.0 / (eta + 1.0)

    def spread(beta: np.ndarray) -> np.ndarray:
        alpha = 2.0 - beta ** -(eta + 1.0)
        ra = r * alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r <= 1.0 / alpha, ra ** e1, (1.0 / (2.0 - ra)) ** e1)

    b1 = spread(1.0 + 2.0 * (y1 - lo) / gap)
    b2 = spread(1.0 + 2.0 * (hi - y2) / gap)
    k1 = np.clip(0.5 * (y1 + y2 - b1 * gap), lo, hi)
    k2 = np.clip(0.5 * (y1 + y2 + b2 * gap), lo, hi)
    swap = u_swap[active] < 0.5
    c1[active] = np.where(swap, k2, k1)
    c2[active] = np.where(swap, k1, k2)
    return c1, c2


def polynomial_mutation(
    x: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta: float,
    prob: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Bounded polynomial mutation; each gene mutates with probability ``prob``.

    Input must lie inside the box. The perturbation is
    ``delta * (upper - lower)`` with the bounded delta distribution, so the
    result stays inside the box up to rounding.
    """
    x = np.array(x, dtype=float)
    n = len(x)
    fire = rng.random(n) <= prob
    d = rng.random(n)
    span = upper - lower
    fire &= span > 0
    if not fire.any():
        return x
    xs, lo, sp, dd = x[fire], lower[fire], span[fire], d[fire]
    e = eta + 1.0
    to_upper = (upper[fire] - xs) / sp
    to_lower = (xs - lo) / sp
    low_branch = dd < 0.5
    with np.errstate(invalid="ignore"):
        delta = np.where(
            low_branch,
            (2.0 * dd + (1.0 - 2.0 * dd) * to_upper**e) ** (1.0 / e) - 1.0,
            1.0 - (2.0 - 2.0 * dd + (2.0 * dd - 1.0) * to_lower**e) ** (1.0 / e),
        )
    x[fire] = np.clip(xs + delta * sp, lo, upper[fire])
    return x


def uniform_exchange(
    a: np.ndarray, b: np.ndarray, mask: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Swap the genes selected by ``mask`` between ``a`` and ``b`` with probability 1/2."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    swap = mask & (rng.random(len(a)) < 0.5)
    a[swap], b[swap] = b[swap], a[swap].copy()
    return a, b
