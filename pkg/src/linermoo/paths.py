"""Candidate container paths and the flow variables they induce.

A path is a chain of segments ``(route, board_call, alight_call)`` joined at
transshipment ports. Paths are simple in port space: no physical port is
touched twice, so cargo never re-enters its origin and never rides past its
destination. Flow conservation and demand satisfaction then hold for any
non-negative split of each OD demand over its paths.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .instance import Instance, TransshipmentQuad

MAX_TRANSSHIPMENTS = 2


@dataclass(frozen=True)
class CargoPath:
    origin: int
    destination: int
    segments: tuple[tuple[int, int, int], ...]
    transshipment_calls: tuple[TransshipmentQuad, ...]

    @property
    def n_transshipments(self) -> int:
        return len(self.segments) - 1

    def legs(self, inst: Instance):
        """Yield ``(route, leg)`` for every leg sailed, in travel order."""
        for r, on, off in self.segments:
            n = inst.routes[r].n_calls
            i = on
            while i != off:
                yield r, i
                i = (i + 1) % n


def _calls_at(inst: Instance) -> dict[int, list[tuple[int, int]]]:
    out: dict[int, list[tuple[int, int]]] = {}
    for r, route in enumerate(inst.routes):
        for i, p in enumerate(route.port_calls):
            out.setdefault(p, []).append((r, i))
    return out


def enumerate_paths(
    inst: Instance, o: int, d: int, max_transshipments: int = MAX_TRANSSHIPMENTS
) -> list[CargoPath]:
    """All simple paths from ``o`` to ``d`` with at most ``max_transshipments``.

    Ordered by transshipment count, then lexicographically by segments.
    """
    if o == d:
        raise ValueError("origin and destination must differ")
    calls_at = _calls_at(inst)
    found: list[tuple[tuple[int, int, int], ...]] = []

    def extend(port: int, visited: frozenset, segments: tuple, prev_route: int) -> None:
        for r, i in calls_at.get(port, ()):
            if r == prev_route:
                continue
            calls = inst.routes[r].port_calls
            n = len(calls)
            seen = set(visited)
            for k in range(1, n):
                j = (i + k) % n
                q = calls[j]
                if q in seen:
                    break
                seen.add(q)
                seg = segments + ((r, i, j),)
                if q == d:
                    found.append(seg)
                    break
                if len(seg) <= max_transshipments:
                    extend(q, frozenset(seen), seg, r)

    extend(o, frozenset([o]), (), -1)
    found.sort(key=lambda segs: (len(segs), segs))
    paths = []
    for segs in found:
        quads = tuple(
            TransshipmentQuad(a[0], a[2], b[0], b[1], inst.routes[a[0]].port_calls[a[2]])
            for a, b in zip(segs, segs[1:])
        )
        paths.append(CargoPath(o, d, segs, quads))
    return paths


@dataclass(frozen=True, eq=False)
class FlowAssignment:
    """Weekly TEU flows indexed by flat call number and origin port.

    Row ``inst.call_offsets[r] + i`` holds call ``i`` of route ``r``; for ``f``
    the same row is leg ``i`` (call ``i`` to call ``i + 1``).
    """

    z_load: np.ndarray
    z_disc: np.ndarray
    f: np.ndarray
    call_offsets: np.ndarray

    def route(self, name: str, r: int) -> np.ndarray:
        a, b = self.call_offsets[r], self.call_offsets[r + 1]
        return getattr(self, name)[a:b]

    @cached_property
    def handled(self) -> np.ndarray:
        """TEU loaded plus discharged at each call."""
        return (self.z_load + self.z_disc).sum(axis=1)

    @cached_property
    def payload(self) -> np.ndarray:
        """TEU on board on each leg."""
        return self.f.sum(axis=1)


class FlowPlan:
    """Precomputed path incidence for fast flow construction.

    ``flows(q)`` maps a vector of per-path quantities (all OD pairs stacked in
    ``inst.od_pairs`` order) to a FlowAssignment.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        P = inst.n_ports
        offs = inst.call_offsets
        self.paths: list[CargoPath] = []
        self.od_slices: list[slice] = []
        for od in inst.od_pairs:
            start = len(self.paths)
            self.paths.extend(inst.paths[od])
            self.od_slices.append(slice(start, len(self.paths)))
        load_idx, load_pid, disc_idx, disc_pid, f_idx, f_pid = [], [], [], [], [], []
        for k, path in enumerate(self.paths):
            o = path.origin
            for r, on, off in path.segments:
                load_idx.append((offs[r] + on) * P + o)
                load_pid.append(k)
                disc_idx.append((offs[r] + off) * P + o)
                disc_pid.append(k)
            for r, leg in path.legs(inst):
                f_idx.append((offs[r] + leg) * P + o)
                f_pid.append(k)
        as_int = lambda x: np.asarray(x, dtype=np.int64)
        self._load = (as_int(load_idx), as_int(load_pid))
        self._disc = (as_int(disc_idx), as_int(disc_pid))
        self._f = (as_int(f_idx), as_int(f_pid))
        self.size = inst.n_calls_total * P
        self.n_paths = len(self.paths)

    def flows(self, q: np.ndarray) -> FlowAssignment:
        shape = (self.inst.n_calls_total, self.inst.n_ports)

        def acc(pair) -> np.ndarray:
            idx, pid = pair
            return np.bincount(idx, weights=q[pid], minlength=self.size).reshape(shape)

        return FlowAssignment(acc(self._load), acc(self._disc), acc(self._f), self.inst.call_offsets)


def flows_from_paths(
    inst: Instance, alloc: Mapping[tuple[int, int], Sequence[float]], tol: float = 1e-9
) -> FlowAssignment:
    """Turn per-path TEU quantities into z_load, z_disc and f.

    ``alloc[(o, d)]`` lists one quantity per path of ``inst.paths[(o, d)]``.
    Capacity is not checked here.
    """
    plan = flow_plan(inst)
    q = np.zeros(plan.n_paths)
    for od, sl in zip(inst.od_pairs, plan.od_slices):
        qty = np.asarray(alloc.get(od, ()), dtype=float)
        if qty.shape != (sl.stop - sl.start,):
            raise ValueError(f"OD {od}: expected {sl.stop - sl.start} path quantities")
        if np.any(qty < 0):
            raise ValueError(f"OD {od}: negative path quantity")
        if abs(qty.sum() - inst.demand[od]) > tol:
            raise ValueError(f"OD {od}: quantities sum to {qty.sum()}, demand is {inst.demand[od]}")
        q[sl] = qty
    extra = set(alloc) - set(inst.od_pairs)
    for od in extra:
        if np.any(np.asarray(alloc[od], dtype=float) != 0):
            raise ValueError(f"OD {od}: allocation given for a pair without demand")
    return plan.flows(q)


_PLANS: "weakref.WeakKeyDictionary[Instance, FlowPlan]" = weakref.WeakKeyDictionary()


def flow_plan(inst: Instance) -> FlowPlan:
    plan = _PLANS.get(inst)
    if plan is None:
        plan = _PLANS[inst] = FlowPlan(inst)
    return plan


def transshipped_teu_by_port(flow: FlowAssignment, inst: Instance) -> np.ndarray:
    """TEU transshipped at every port.

    Half of (all loads and discharges at the port's calls, minus the cargo
    that starts or ends there).
    """
    handled = flow.handled
    ports = np.concatenate([np.asarray(r.port_calls) for r in inst.routes])
    per_port = np.bincount(ports, weights=handled, minlength=inst.n_ports)
    dem = inst.demand
    return 0.5 * (per_port - dem.sum(axis=1) - dem.sum(axis=0))


def transshipped_teu_at_port(flow: FlowAssignment, inst: Instance, p: int) -> float:
    return float(transshipped_teu_by_port(flow, inst)[p])
