"""Problem data model: ports, routes, vessel classes, cost rates and demand.

Instances are immutable once built. Derived structures (transshipment
quadruples, candidate cargo paths) are computed lazily and cached on the
instance object, so an instance can be shared read-only between evaluators.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence

import numpy as np

# Flow quantities live on this dyadic grid so that sums of path flows are
# exact in binary floating point (conservation residuals are exactly zero).
TEU_QUANTUM = 2.0**-20

DEFAULT_FUEL_COEFF = 7.0e-6
DEFAULT_TEU_WEIGHT = 10.0
WEEK_HOURS = 168.0
MAX_START_HOURS = 144.0


class InstanceError(ValueError):
    """Raised when an instance file is malformed or violates an invariant."""


@dataclass(frozen=True)
class Port:
    id: str
    index: int


@dataclass(frozen=True)
class Route:
    id: int
    port_calls: tuple[int, ...]
    leg_lengths_nm: tuple[float, ...]
    n_min: int = 1
    n_max: int = 15

    @property
    def n_calls(self) -> int:
        return len(self.port_calls)

    @property
    def length_nm(self) -> float:
        return float(sum(self.leg_lengths_nm))


@dataclass(frozen=True)
class VesselClass:
    id: int
    capacity_teu: float
    c_opr: float
    c_berth: float
    c_fix: tuple[float, ...]  # USD/week, one entry per route of the instance
    handling_time_h_per_teu: float
    empty_weight_t: float
    fuel_coeff_k: float = DEFAULT_FUEL_COEFF


@dataclass(frozen=True, eq=False)
class CostRates:
    c_load: np.ndarray  # USD/TEU, per port
    c_disc: np.ndarray
    c_trans: np.ndarray
    c_hold: np.ndarray  # USD/TEU/hour, per port
    c_fuel: float
    c_emis: float
    e_sea: float
    e_port: float
    teu_weight_t: float = DEFAULT_TEU_WEIGHT


@dataclass(frozen=True)
class TransshipmentQuad:
    r: int
    i: int
    r_prime: int
    i_prime: int
    port: int


@dataclass(frozen=True, eq=False)
class Instance:
    ports: tuple[Port, ...]
    routes: tuple[Route, ...]
    vessels: tuple[VesselClass, ...]
    demand_teu_per_week: np.ndarray
    rates: CostRates
    speed_min_kn: float
    speed_max_kn: float
    fixed_port_hours: float = 0.0
    name: str = ""

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    @property
    def n_routes(self) -> int:
        return len(self.routes)

    @property
    def n_vessels(self) -> int:
        return len(self.vessels)

    @property
    def demand(self) -> np.ndarray:
        return self.demand_teu_per_week

    def port_index(self, port_id: str) -> int:
        for p in self.ports:
            if p.id == port_id:
                return p.index
        raise KeyError(port_id)

    @cached_property
    def transshipments(self) -> tuple[TransshipmentQuad, ...]:
        return tuple(derive_transshipments(self))

    @cached_property
    def call_offsets(self) -> np.ndarray:
        """Start of each route's block in the flat (route, call) numbering."""
        sizes = [r.n_calls for r in self.routes]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

    @property
    def n_calls_total(self) -> int:
        return int(self.call_offsets[-1])

    @cached_property
    def od_pairs(self) -> tuple[tuple[int, int], ...]:
        """OD pairs with positive demand, row-major order."""
        o, d = np.nonzero(self.demand_teu_per_week > 0)
        return tuple((int(a), int(b)) for a, b in zip(o, d))

    @cached_property
    def paths(self) -> dict[tuple[int, int], list]:
        from .paths import enumerate_paths

        return {od: enumerate_paths(self, *od) for od in self.od_pairs}


# --------------------------------------------------------------------------
# Transshipment structure
# --------------------------------------------------------------------------


def derive_transshipments(inst: Instance) -> list[TransshipmentQuad]:
    calls = [
        (r, i, p)
        for r, route in enumerate(inst.routes)
        for i, p in enumerate(route.port_calls)
    ]
    quads = []
    for r, i, p in calls:
        for r2, i2, p2 in calls:
            if p == p2 and (r, i) != (r2, i2):
                quads.append(TransshipmentQuad(r, i, r2, i2, p))
    quads.sort(key=lambda q: (q.r, q.i, q.r_prime, q.i_prime))
    return quads


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


def validate_instance(inst: Instance, check_paths: bool = True) -> None:
    """Raise InstanceError naming the first violated invariant."""
    ids = [p.id for p in inst.ports]
    if len(set(ids)) != len(ids):
        raise InstanceError("duplicate port id")
    if [p.index for p in inst.ports] != list(range(len(inst.ports))):
        raise InstanceError("port indices not contiguous")
    n_ports = len(inst.ports)
    if not inst.routes:
        raise InstanceError("no routes")
    if not inst.vessels:
        raise InstanceError("no vessel classes")
    for route in inst.routes:
        if len(route.port_calls) < 2:
            raise InstanceError(f"route {route.id}: fewer than two port calls")
        if len(route.leg_lengths_nm) != len(route.port_calls):
            raise InstanceError(f"route {route.id}: leg count != port-call count")
        if any(not (0 <= p < n_ports) for p in route.port_calls):
            raise InstanceError(f"route {route.id}: unknown port")
        if len(set(route.port_calls)) != len(route.port_calls):
            raise InstanceError(f"route {route.id}: repeated port within rotation")
        if any(not (L > 0) for L in route.leg_lengths_nm):
            raise InstanceError(f"route {route.id}: nonpositive leg")
        if not (1 <= route.n_min <= route.n_max):
            raise InstanceError(f"route {route.id}: bad fleet bounds")
    for v in inst.vessels:
        if len(v.c_fix) != len(inst.routes):
            raise InstanceError(f"vessel {v.id}: c_fix needs one entry per route")
        money = [v.c_opr, v.c_berth, v.handling_time_h_per_teu, *v.c_fix]
        if any(x < 0 for x in money):
            raise InstanceError(f"vessel {v.id}: negative rate")
        if not (v.capacity_teu > 0 and v.fuel_coeff_k > 0 and v.empty_weight_t > 0):
            raise InstanceError(f"vessel {v.id}: nonpositive capacity/weight/fuel coefficient")
    rates = inst.rates
    for name in ("c_load", "c_disc", "c_trans", "c_hold"):
        arr = getattr(rates, name)
        if arr.shape != (n_ports,):
            raise InstanceError(f"rates.{name}: expected one value per port")
        if np.any(arr < 0):
            raise InstanceError(f"rates.{name}: negative rate")
    if min(rates.c_fuel, rates.c_emis, rates.e_sea, rates.e_port) < 0:
        raise InstanceError("rates: negative rate")
    if not rates.teu_weight_t > 0:
        raise InstanceError("rates: nonpositive teu_weight_t")
    if not (0 < inst.speed_min_kn <= inst.speed_max_kn):
        raise InstanceError("speed bounds: need 0 < min <= max")
    if inst.fixed_port_hours < 0:
        raise InstanceError("fixed_port_hours: negative")
    dem = inst.demand_teu_per_week
    if dem.shape != (n_ports, n_ports):
        raise InstanceError("demand: wrong shape")
    if np.any(np.diag(dem) != 0):
        raise InstanceError("self-demand: d_oo must be zero")
    if np.any(dem < 0) or not np.all(np.isfinite(dem)):
        raise InstanceError("demand: negative or non-finite value")
    if check_paths:
        for od in inst.od_pairs:
            if not inst.paths[od]:
                o, d = od
                raise InstanceError(
                    f"disconnected demand: no path {inst.ports[o].id} -> {inst.ports[d].id}"
                )


# --------------------------------------------------------------------------
# JSON I/O
# --------------------------------------------------------------------------


def _per_port(value: Any, n_ports: int, name: str) -> np.ndarray:
    if isinstance(value, (int, float)):
        arr = np.full(n_ports, float(value))
    else:
        arr = np.asarray(value, dtype=float)
        if arr.shape != (n_ports,):
            raise InstanceError(f"rates.{name}: expected scalar or one value per port")
    arr.flags.writeable = False
    return arr


def quantize_teu(x: np.ndarray | float) -> np.ndarray:
    return np.round(np.asarray(x, dtype=float) / TEU_QUANTUM) * TEU_QUANTUM


def instance_from_dict(data: dict[str, Any], validate: bool = True) -> Instance:
    try:
        port_ids = [str(p) for p in data["ports"]]
        lookup = {pid: k for k, pid in enumerate(port_ids)}

        def port_ref(x: Any) -> int:
            if isinstance(x, bool):
                raise InstanceError(f"bad port reference {x!r}")
            if isinstance(x, int):
                return x
            if str(x) not in lookup:
                raise InstanceError(f"unknown port {x!r}")
            return lookup[str(x)]

        ports = tuple(Port(pid, k) for k, pid in enumerate(port_ids))
        routes = tuple(
            Route(
                id=int(r["id"]),
                port_calls=tuple(port_ref(p) for p in r["port_calls"]),
                leg_lengths_nm=tuple(float(x) for x in r["leg_lengths_nm"]),
                n_min=int(r.get("n_min", 1)),
                n_max=int(r.get("n_max", 15)),
            )
            for r in data["routes"]
        )
        vessels = tuple(
            VesselClass(
                id=int(v["id"]),
                capacity_teu=float(v["capacity_teu"]),
                c_opr=float(v["c_opr"]),
                c_berth=float(v["c_berth"]),
                c_fix=tuple(float(x) for x in v["c_fix"]),
                handling_time_h_per_teu=float(v["handling_time_h_per_teu"]),
                empty_weight_t=float(v["empty_weight_t"]),
                fuel_coeff_k=float(v.get("fuel_coeff_k", DEFAULT_FUEL_COEFF)),
            )
            for v in data["vessels"]
        )
        n = len(ports)
        demand = np.zeros((n, n))
        for entry in data.get("demand", []):
            demand[port_ref(entry["o"]), port_ref(entry["d"])] += float(entry["teu"])
        demand = quantize_teu(demand)
        demand.flags.writeable = False
        r = data["rates"]
        rates = CostRates(
            c_load=_per_port(r["c_load"], n, "c_load"),
            c_disc=_per_port(r["c_disc"], n, "c_disc"),
            c_trans=_per_port(r["c_trans"], n, "c_trans"),
            c_hold=_per_port(r["c_hold"], n, "c_hold"),
            c_fuel=float(r["c_fuel"]),
            c_emis=float(r["c_emis"]),
            e_sea=float(r["e_sea"]),
            e_port=float(r["e_port"]),
            teu_weight_t=float(r.get("teu_weight_t", DEFAULT_TEU_WEIGHT)),
        )
        inst = Instance(
            ports=ports,
            routes=routes,
            vessels=vessels,
            demand_teu_per_week=demand,
            rates=rates,
            speed_min_kn=float(data["speed_min_kn"]),
            speed_max_kn=float(data["speed_max_kn"]),
            fixed_port_hours=float(data.get("fixed_port_hours", 0.0)),
            name=str(data.get("name", "")),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from exc
    if validate:
        validate_instance(inst)
    return inst


def load_instance(path: str | Path) -> Instance:
    """Read and validate an instance JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceError(f"parse error in {path}: top level must be an object")
    return instance_from_dict(data)


def _compact(values: np.ndarray) -> Any:
    vals = [float(x) for x in values]
    return vals[0] if len(set(vals)) == 1 else vals


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    ids = [p.id for p in inst.ports]
    dem = inst.demand_teu_per_week
    demand = [
        {"o": ids[o], "d": ids[d], "teu": float(dem[o, d])}
        for o in range(inst.n_ports)
        for d in range(inst.n_ports)
        if dem[o, d] > 0
    ]
    rates = inst.rates
    out: dict[str, Any] = {
        "name": inst.name,
        "ports": ids,
        "routes": [
            {
                "id": r.id,
                "port_calls": [ids[p] for p in r.port_calls],
                "leg_lengths_nm": list(r.leg_lengths_nm),
                "n_min": r.n_min,
                "n_max": r.n_max,
            }
            for r in inst.routes
        ],
        "vessels": [
            {
                "id": v.id,
                "capacity_teu": v.capacity_teu,
                "c_opr": v.c_opr,
                "c_berth": v.c_berth,
                "c_fix": list(v.c_fix),
                "handling_time_h_per_teu": v.handling_time_h_per_teu,
                "empty_weight_t": v.empty_weight_t,
                "fuel_coeff_k": v.fuel_coeff_k,
            }
            for v in inst.vessels
        ],
        "demand": demand,
        "rates": {
            "c_load": _compact(rates.c_load),
            "c_disc": _compact(rates.c_disc),
            "c_trans": _compact(rates.c_trans),
            "c_hold": _compact(rates.c_hold),
            "c_fuel": rates.c_fuel,
            "c_emis": rates.c_emis,
            "e_sea": rates.e_sea,
            "e_port": rates.e_port,
            "teu_weight_t": rates.teu_weight_t,
        },
        "speed_min_kn": inst.speed_min_kn,
        "speed_max_kn": inst.speed_max_kn,
    }
    if inst.fixed_port_hours:
        out["fixed_port_hours"] = inst.fixed_port_hours
    return out


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst), encoding="utf-8")


def bundled_path(name: str) -> Path:
    return Path(__file__).parent / "data" / name


def load_bundled(name: str) -> Instance:
    if not name.endswith(".json"):
        name += ".json"
    return load_instance(bundled_path(name))


# --------------------------------------------------------------------------
# Reference network (ports of call, leg lengths, vessel classes, cost rates)
# --------------------------------------------------------------------------

# (port, length of the leg leaving that port), rotation order.
NETWORK_ROUTES: tuple[tuple[tuple[str, float], ...], ...] = (
    (("Ho Chi Minh", 589), ("Laem Chabang", 755), ("Singapore", 187), ("Port Klang", 830)),
    (
        ("Brisbane", 419), ("Sydney", 512), ("Melbourne", 470), ("Adelaide", 1325),
        ("Fremantle", 1733), ("Jakarta", 483), ("Singapore", 3649),
    ),
    (
        ("Yokohama", 15), ("Tokyo", 177), ("Nagoya", 201), ("Kobe", 734),
        ("Shanghai", 745), ("Hong Kong", 1568),
    ),
    (
        ("Dalian", 187), ("Xingang", 379), ("Qingdao", 303), ("Xiamen", 93),
        ("Ningbo", 93), ("Shanghai", 383), ("Kwangyang", 72), ("Busan", 487),
    ),
    (
        ("Ho Chi Minh", 589), ("Laem Chabang", 755), ("Singapore", 187),
        ("Port Klang", 830), ("Qingdao", 345), ("Shanghai", 876),
    ),
    (
        ("Brisbane", 419), ("Sydney", 512), ("Melbourne", 470), ("Adelaide", 1325),
        ("Fremantle", 1733), ("Jakarta", 483), ("Singapore", 3649), ("Colombo", 1287),
    ),
)

# Per vessel class: C_opr, C_berth, C_fix for routes 1..6, capacity, empty
# weight (lightweight + fuel/water/provisions/crew), handling time.
NETWORK_VESSELS: tuple[dict[str, Any], ...] = (
    dict(c_opr=37485, c_berth=500, c_fix=(154791, 533980, 226198, 148807, 197892, 594070),
         capacity_teu=2400, empty_weight_t=21832, handling_time_h_per_teu=0.025),
    dict(c_opr=51923, c_berth=1000, c_fix=(191900, 689651, 280542, 187600, 235340, 730527),
         capacity_teu=4800, empty_weight_t=36898, handling_time_h_per_teu=0.012),
    dict(c_opr=76923, c_berth=1666, c_fix=(240500, 788300, 342760, 220850, 292760, 840582),
         capacity_teu=8400, empty_weight_t=54753, handling_time_h_per_teu=0.011),
    dict(c_opr=115384, c_berth=3333, c_fix=(256600, 854600, 384500, 259800, 304500, 929753),
         capacity_teu=11000, empty_weight_t=66204, handling_time_h_per_teu=0.008),
    dict(c_opr=173076, c_berth=5000, c_fix=(276100, 929100, 404000, 279700, 324000, 989650),
         capacity_teu=15000, empty_weight_t=79612, handling_time_h_per_teu=0.007),
)

NETWORK_RATES = dict(
    c_load=150.0, c_disc=150.0, c_trans=150.0, c_hold=1.25,
    c_fuel=500.0, c_emis=32.0, e_sea=3.082, e_port=0.01729,
    teu_weight_t=DEFAULT_TEU_WEIGHT,
)
NETWORK_SPEED_KN = (14.0, 24.0)
N_MAX_VESSELS = 15

# (ports, routes, vessel classes) of the six benchmark rows.
BENCHMARK_SIZES: tuple[tuple[int, int, int], ...] = (
    (10, 2, 3), (13, 2, 3), (16, 3, 4), (18, 3, 4), (24, 4, 5), (27, 4, 5),
)
BUNDLED_SEED = 42
BUNDLED_DEMAND_SCALE = 200.0


def _rates(n_ports: int) -> CostRates:
    return CostRates(
        c_load=_per_port(NETWORK_RATES["c_load"], n_ports, "c_load"),
        c_disc=_per_port(NETWORK_RATES["c_disc"], n_ports, "c_disc"),
        c_trans=_per_port(NETWORK_RATES["c_trans"], n_ports, "c_trans"),
        c_hold=_per_port(NETWORK_RATES["c_hold"], n_ports, "c_hold"),
        c_fuel=NETWORK_RATES["c_fuel"],
        c_emis=NETWORK_RATES["c_emis"],
        e_sea=NETWORK_RATES["e_sea"],
        e_port=NETWORK_RATES["e_port"],
        teu_weight_t=NETWORK_RATES["teu_weight_t"],
    )


def _vessels(n_vessels: int, c_fix_rows: Sequence[Sequence[float]]) -> tuple[VesselClass, ...]:
    return tuple(
        VesselClass(
            id=v + 1,
            capacity_teu=float(spec["capacity_teu"]),
            c_opr=float(spec["c_opr"]),
            c_berth=float(spec["c_berth"]),
            c_fix=tuple(float(row[v]) for row in c_fix_rows),
            handling_time_h_per_teu=float(spec["handling_time_h_per_teu"]),
            empty_weight_t=float(spec["empty_weight_t"]),
        )
        for v, spec in enumerate(NETWORK_VESSELS[:n_vessels])
    )


def _assemble(
    name: str,
    rotations: Sequence[tuple[list[str], list[float]]],
    c_fix_rows: Sequence[Sequence[float]],
    n_vessels: int,
    demand_fn,
) -> Instance:
    port_ids: list[str] = []
    for calls, _ in rotations:
        for p in calls:
            if p not in port_ids:
                port_ids.append(p)
    lookup = {p: k for k, p in enumerate(port_ids)}
    ports = tuple(Port(p, k) for k, p in enumerate(port_ids))
    routes = tuple(
        Route(
            id=k + 1,
            port_calls=tuple(lookup[p] for p in calls),
            leg_lengths_nm=tuple(float(x) for x in lengths),
            n_min=1,
            n_max=N_MAX_VESSELS,
        )
        for k, (calls, lengths) in enumerate(rotations)
    )
    n = len(ports)
    base = Instance(
        ports=ports,
        routes=routes,
        vessels=_vessels(n_vessels, c_fix_rows),
        demand_teu_per_week=np.zeros((n, n)),
        rates=_rates(n),
        speed_min_kn=NETWORK_SPEED_KN[0],
        speed_max_kn=NETWORK_SPEED_KN[1],
        name=name,
    )
    demand = quantize_teu(demand_fn(base))
    demand.flags.writeable = False
    inst = Instance(
        ports=base.ports,
        routes=base.routes,
        vessels=base.vessels,
        demand_teu_per_week=demand,
        rates=base.rates,
        speed_min_kn=base.speed_min_kn,
        speed_max_kn=base.speed_max_kn,
        name=name,
    )
    validate_instance(inst)
    return inst


def _uniform_demand(rng: np.random.Generator, scale: float):
    def draw(base: Instance) -> np.ndarray:
        from .paths import enumerate_paths

        n = base.n_ports
        dem = np.zeros((n, n))
        for o in range(n):
            for d in range(n):
                if o == d:
                    continue
                value = float(np.round(rng.uniform(0.0, scale)))
                if value > 0 and enumerate_paths(base, o, d):
                    dem[o, d] = value
        return dem

    return draw


def network_instance(seed: int = BUNDLED_SEED, demand_scale: float = BUNDLED_DEMAND_SCALE) -> Instance:
    """The full six-route, 24-port reference network with seeded demand."""
    rng = np.random.default_rng(seed)
    rotations = [([p for p, _ in r], [L for _, L in r]) for r in NETWORK_ROUTES]
    c_fix_rows = [tuple(v["c_fix"][k] for v in NETWORK_VESSELS) for k in range(len(NETWORK_ROUTES))]
    return _assemble("paper_6routes", rotations, c_fix_rows, len(NETWORK_VESSELS),
                     _uniform_demand(rng, demand_scale))


def _routes_connected(rotations: Sequence[list[str]]) -> bool:
    if len(rotations) <= 1:
        return True
    seen = {0}
    frontier = [0]
    while frontier:
        a = frontier.pop()
        for b in range(len(rotations)):
            if b not in seen and set(rotations[a]) & set(rotations[b]):
                seen.add(b)
                frontier.append(b)
    return len(seen) == len(rotations)


def _trim_to(
    rotations: list[tuple[list[str], list[float]]], n_ports: int, rng: np.random.Generator
) -> list[tuple[list[str], list[float]]] | None:
    """Drop port calls (merging adjacent legs) until exactly n_ports remain."""
    rots = [(list(c), list(L)) for c, L in rotations]

    def union() -> list[str]:
        out: list[str] = []
        for c, _ in rots:
            out.extend(p for p in c if p not in out)
        return out

    while len(union()) > n_ports:
        candidates = union()
        order = rng.permutation(len(candidates))
        for k in order:
            port = candidates[int(k)]
            trial = []
            ok = True
            for calls, lengths in rots:
                calls, lengths = list(calls), list(lengths)
                if port in calls:
                    i = calls.index(port)
                    lengths[i - 1] += lengths[i]
                    del calls[i], lengths[i]
                    if len(calls) < 2:
                        ok = False
                        break
                trial.append((calls, lengths))
            if ok and _routes_connected([c for c, _ in trial]):
                rots = trial
                break
        else:
            return None
    return rots


def generate_instance(
    n_ports: int,
    n_routes: int,
    n_vessels: int,
    seed: int,
    demand_scale: float,
) -> Instance:
    """Build a seeded instance of the requested size.

    Routes are sub-rotations of the reference network whenever a connected
    set of ``n_routes`` reference routes covers at least ``n_ports`` ports;
    otherwise a chain of synthetic rotations is generated. Demand is uniform
    on ``[0, demand_scale]`` (integer TEU) for every connected OD pair.
    """
    if n_ports < 2 or n_routes < 1 or not (1 <= n_vessels <= len(NETWORK_VESSELS)):
        raise ValueError("need n_ports >= 2, n_routes >= 1 and 1 <= n_vessels <= 5")
    if n_routes > 1 and n_ports < n_routes + 1:
        raise ValueError(f"{n_routes} connected routes cannot be built on {n_ports} ports")
    rng = np.random.default_rng(seed)
    name = f"gen_{n_ports}_{n_routes}_{n_vessels}_s{seed}"

    network = [([p for p, _ in r], [float(L) for _, L in r]) for r in NETWORK_ROUTES]
    combos = [
        c for c in itertools.combinations(range(len(network)), n_routes)
        if _routes_connected([network[k][0] for k in c])
        and len({p for k in c for p in network[k][0]}) >= n_ports
    ]
    chosen = None
    for idx in rng.permutation(len(combos)):
        combo = combos[int(idx)]
        trimmed = _trim_to([network[k] for k in combo], n_ports, rng)
        if trimmed is not None:
            chosen = (combo, trimmed)
            break

    if chosen is not None:
        combo, rotations = chosen
        c_fix_rows = [tuple(v["c_fix"][k] for v in NETWORK_VESSELS) for k in combo]
    else:
        rotations = _synthetic_rotations(n_ports, n_routes, rng)
        c_fix_rows = [_synthetic_c_fix(sum(L)) for _, L in rotations]
    return _assemble(name, rotations, c_fix_rows, n_vessels, _uniform_demand(rng, demand_scale))


def _synthetic_rotations(n_ports: int, n_routes: int, rng: np.random.Generator):
    total_calls = n_ports + (n_routes - 1)
    sizes = [total_calls // n_routes] * n_routes
    for k in range(total_calls % n_routes):
        sizes[k] += 1
    names = [f"S{k + 1:02d}" for k in range(n_ports)]
    rotations = []
    cursor = 0
    for k, size in enumerate(sizes):
        if k == 0:
            calls = names[cursor:cursor + size]
            cursor += size
        else:
            shared = rotations[-1][0][-1]
            calls = [shared] + names[cursor:cursor + size - 1]
            cursor += size - 1
        lengths = [float(x) for x in rng.integers(100, 2000, size=len(calls))]
        rotations.append((calls, lengths))
    return rotations


def _synthetic_c_fix(length_nm: float) -> tuple[float, ...]:
    lengths = [sum(L for _, L in r) for r in NETWORK_ROUTES]
    per_nm = [
        float(np.mean([v["c_fix"][k] / lengths[k] for k in range(len(lengths))]))
        for v in NETWORK_VESSELS
    ]
    return tuple(float(round(rate * length_nm)) for rate in per_nm)


def bundled_row_name(n_ports: int, n_routes: int, n_vessels: int) -> str:
    return f"row_{n_ports}_{n_routes}_{n_vessels}"


def ceil_weeks(hours: float) -> int:
    return int(math.ceil(hours / WEEK_HOURS - 1e-12))


# --------------------------------------------------------------------------
# Toy instances for exhaustive verification
# --------------------------------------------------------------------------

# rotations as (port, length of leg leaving it); prime lengths keep grid arrival
# times from coinciding modulo a week
TOY_SPECS: dict[str, dict[str, Any]] = {
    "toy_t1": dict(
        routes=[[("A", 331), ("B", 337)]],
        classes=2,
        demand=[("A", "B", 1800), ("B", "A", 900)],
    ),
    "toy_t2": dict(
        routes=[[("A", 347), ("B", 353)], [("B", 359), ("C", 367)]],
        classes=2,
        demand=[("A", "C", 600), ("C", "A", 400)],
    ),
    "toy_t3": dict(
        routes=[[("A", 311), ("B", 313), ("C", 317)], [("A", 383), ("C", 389)]],
        classes=1,
        demand=[("A", "C", 500), ("C", "A", 300)],
    ),
}


def toy_instance(name: str) -> Instance:
    spec = TOY_SPECS[name]
    rotations = [([p for p, _ in r], [float(L) for _, L in r]) for r in spec["routes"]]
    c_fix_rows = [tuple(v["c_fix"][k] for v in NETWORK_VESSELS) for k in range(len(rotations))]

    def demand(base: Instance) -> np.ndarray:
        d = np.zeros((base.n_ports, base.n_ports))
        for o, dst, teu in spec["demand"]:
            d[base.port_index(o), base.port_index(dst)] = teu
        return d

    return _assemble(name, rotations, c_fix_rows, spec["classes"], demand)


def bundled_instances() -> dict[str, Instance]:
    """Every instance shipped in the data directory, rebuilt from its recipe."""
    out = {"paper_6routes": network_instance()}
    for row in BENCHMARK_SIZES:
        out[bundled_row_name(*row)] = generate_instance(*row, seed=BUNDLED_SEED, demand_scale=BUNDLED_DEMAND_SCALE)
    for name in TOY_SPECS:
        out[name] = toy_instance(name)
    return out
