"""Linearized mixed-integer model: build, write/read in CPLEX LP format, verify.

Speeds are restricted to a grid per leg (binary ``psi``), class-speed products
become ``phi``, the payload-dependent displacement power is replaced by a
least-squares line ``a_v + b_v * w`` and its payload part carried by ``w``
(tons) on the active (class, speed) pair. Transshipment lags take integer
hours through ``lam`` and the holding product is carried by ``del``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .evaluation import Solution, evaluate
from .instance import MAX_START_HOURS, WEEK_HOURS, Instance
from .paths import FlowAssignment, transshipped_teu_by_port

FIT_SAMPLES = 101
HOURS = tuple(range(0, int(WEEK_HOURS) + 1))
SENSES = ("<=", ">=", "=")


class MilpError(ValueError):
    """Invalid model input, malformed LP text, or a rejected assignment."""


@dataclass
class Variable:
    name: str
    kind: str  # "binary", "integer" or "continuous"
    lb: float = 0.0
    ub: float = math.inf


@dataclass
class Row:
    name: str
    terms: list[tuple[str, float]]
    sense: str
    rhs: float


@dataclass
class Objective:
    terms: list[tuple[str, float]]
    constant: float = 0.0


@dataclass
class MilpModel:
    variables: list[Variable] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objectives: dict[str, Objective] = field(default_factory=dict)
    big_m: dict[str, float] = field(default_factory=dict)
    speed_grid: list[np.ndarray] = field(default_factory=list)  # per flat leg
    fit: dict[str, np.ndarray] = field(default_factory=dict)  # a, b, residual per class
    name: str = "linermoo"

    def __post_init__(self) -> None:
        self._index = {v.name: k for k, v in enumerate(self.variables)}

    # builders -----------------------------------------------------------
    def add_var(self, name: str, kind: str, lb: float = 0.0, ub: float = math.inf) -> str:
        if name in self._index:
            raise MilpError(f"duplicate variable {name}")
        if kind == "binary":
            lb, ub = 0.0, 1.0
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, kind, float(lb), float(ub)))
        return name

    def add_row(self, name: str, terms: Iterable[tuple[str, float]], sense: str, rhs: float) -> None:
        if sense not in SENSES:
            raise MilpError(f"bad sense {sense!r}")
        merged: dict[str, float] = {}
        for var, coef in terms:
            if var not in self._index:
                raise MilpError(f"row {name} references undeclared variable {var}")
            merged[var] = merged.get(var, 0.0) + float(coef)
        self.rows.append(Row(name, [(k, c) for k, c in merged.items() if c != 0.0], sense, float(rhs)))

    def variable(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def has_variable(self, name: str) -> bool:
        return name in self._index

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {"variables": self.n_variables, "constraints": self.n_rows}
        for v in self.variables:
            key = "vars_" + v.name.split("_")[0]
            out[key] = out.get(key, 0) + 1
        return out


# --------------------------------------------------------------------------
# Displacement power fit
# --------------------------------------------------------------------------

def fit_displacement(empty_weight: float, max_payload: float, samples: int = FIT_SAMPLES):
    """Least-squares line a + b*w for (empty_weight + w)^(2/3) on [0, max_payload].

    Returns ``(a, b, bound)`` where ``bound`` is the largest absolute error on
    the whole interval. The error g - line is concave, so its extremes sit at
    the interval ends and at the point where g' equals b.
    """
    w = np.linspace(0.0, max_payload, samples)
    g = (empty_weight + w) ** (2.0 / 3.0)
    A = np.column_stack([np.ones_like(w), w])
    (a, b), *_ = np.linalg.lstsq(A, g, rcond=None)
    err = lambda x: (empty_weight + x) ** (2.0 / 3.0) - (a + b * x)
    cands = [0.0, max_payload]
    if b > 0:
        w_star = (2.0 / (3.0 * b)) ** 3 - empty_weight
        if 0.0 < w_star < max_payload:
            cands.append(w_star)
    bound = max(abs(err(x)) for x in cands)
    return float(a), float(b), float(bound)


# --------------------------------------------------------------------------
# Model construction
# --------------------------------------------------------------------------

def _grid(inst: Instance, step: float) -> np.ndarray:
    if not step > 0:
        raise MilpError("speed grid step must be positive")
    levels = (inst.speed_max_kn - inst.speed_min_kn) / step
    if abs(levels - round(levels)) > 1e-9:
        raise MilpError("speed grid step must split the speed range into whole levels")
    return inst.speed_min_kn + step * np.arange(int(round(levels)) + 1)


def big_m_values(inst: Instance, grid: np.ndarray) -> dict[str, float]:
    total = float(inst.demand.sum())
    t_max = max(v.handling_time_h_per_teu for v in inst.vessels)
    sail_max = float(max(sum(L / grid.min() for L in r.leg_lengths_nm) for r in inst.routes))
    fixed = max(r.n_calls for r in inst.routes) * inst.fixed_port_hours
    return {
        "M1": float(max(r.n_max for r in inst.routes)),
        "M2": 2.0 * total + 1.0,
        "M3": 2.0 * total + 1.0,
        "M4": sail_max + t_max * 2.0 * total + fixed + 1.0,
        "M5": WEEK_HOURS * total + 1.0,
    }


def build_milp(inst: Instance, speed_grid_step: float = 1.0) -> MilpModel:
    grid = _grid(inst, speed_grid_step)
    integral_grid = bool(np.all(grid == np.round(grid)))
    R, V, P = inst.n_routes, inst.n_vessels, inst.n_ports
    routes, vessels, rates = inst.routes, inst.vessels, inst.rates
    dem = inst.demand
    quads = inst.transshipments
    m = MilpModel(name=inst.name or "linermoo")
    m.big_m = big_m_values(inst, grid)
    M1, M2, M3, M4, M5 = (m.big_m[k] for k in ("M1", "M2", "M3", "M4", "M5"))

    fits = [fit_displacement(v.empty_weight_t, v.capacity_teu * rates.teu_weight_t) for v in vessels]
    m.fit = {
        "a": np.array([f[0] for f in fits]),
        "b": np.array([f[1] for f in fits]),
        "residual": np.array([f[2] for f in fits]),
    }

    # variables ------------------------------------------------------------
    for r in range(R):
        for v in range(V):
            m.add_var(f"x_{r}_{v}", "binary")
    for r in range(R):
        for v in range(V):
            m.add_var(f"n_{r}_{v}", "integer", 0, routes[r].n_max)
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            m.add_var(f"u_{r}_{i}", "integer" if integral_grid else "continuous",
                      inst.speed_min_kn, inst.speed_max_kn)
    for r, route in enumerate(routes):
        for i in range(route.n_calls + 1):
            m.add_var(f"t_{r}_{i}", "continuous", 0.0, MAX_START_HOURS if i == 0 else math.inf)
    for prefix in ("zl", "zd", "f"):
        for r, route in enumerate(routes):
            for i in range(route.n_calls):
                for o in range(P):
                    m.add_var(f"{prefix}_{r}_{i}_{o}", "continuous")
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            for v in range(V):
                m.add_var(f"z_{r}_{i}_{v}", "continuous")
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            m.speed_grid.append(grid.copy())
            for a in range(len(grid)):
                m.add_var(f"psi_{r}_{i}_{a}", "binary")
    for prefix, kind in (("phi", "binary"), ("w", "continuous")):
        for r, route in enumerate(routes):
            for i in range(route.n_calls):
                for v in range(V):
                    for a in range(len(grid)):
                        m.add_var(f"{prefix}_{r}_{i}_{v}_{a}", kind)
    for q in range(len(quads)):
        m.add_var(f"theta_{q}", "integer", 0, MAX_START_HOURS)
    for q in range(len(quads)):
        m.add_var(f"gamma_{q}", "integer", -math.inf, math.inf)
    for q in range(len(quads)):
        for h in HOURS:
            m.add_var(f"lam_{q}_{h}", "binary")
    for q, quad in enumerate(quads):
        for h in HOURS:
            m.add_var(f"del_{quad.port}_{q}_{h}", "continuous")

    calls_at: dict[int, list[tuple[int, int]]] = {}
    for r, route in enumerate(routes):
        for i, p in enumerate(route.port_calls):
            calls_at.setdefault(p, []).append((r, i))

    def handled_terms(p: int, scale: float) -> list[tuple[str, float]]:
        out = []
        for r, i in calls_at.get(p, []):
            for o in range(P):
                out += [(f"zl_{r}_{i}_{o}", scale), (f"zd_{r}_{i}_{o}", scale)]
        return out

    od_at = dem.sum(axis=1) + dem.sum(axis=0)

    # objectives -----------------------------------------------------------
    fuel_rate = rates.c_fuel + rates.c_emis * rates.e_sea
    cost: list[tuple[str, float]] = []
    for r in range(R):
        for v in range(V):
            cost.append((f"n_{r}_{v}", vessels[v].c_opr))
            cost.append((f"x_{r}_{v}", vessels[v].c_fix[r]))
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            for v, ves in enumerate(vessels):
                cost.append((f"z_{r}_{i}_{v}", ves.c_berth * ves.handling_time_h_per_teu
                             + rates.c_emis * rates.e_port))
    for p in range(P):
        cost += handled_terms(p, 0.5 * rates.c_trans[p])
    for q, quad in enumerate(quads):
        for h in HOURS:
            cost.append((f"del_{quad.port}_{q}_{h}", rates.c_hold[quad.port]))
    for r, route in enumerate(routes):
        for i, L in enumerate(route.leg_lengths_nm):
            for v, ves in enumerate(vessels):
                for a, alpha in enumerate(grid):
                    base = fuel_rate * L * ves.fuel_coeff_k * alpha**2 / 24.0
                    cost.append((f"phi_{r}_{i}_{v}_{a}", base * m.fit["a"][v]))
                    cost.append((f"w_{r}_{i}_{v}_{a}", base * m.fit["b"][v]))
    constant = float(np.sum((rates.c_load[:, None] + rates.c_disc[None, :]) * dem)
                     - 0.5 * np.sum(rates.c_trans * od_at))
    m.objectives["cost"] = Objective(_merge(cost), constant)

    time: list[tuple[str, float]] = []
    for r, route in enumerate(routes):
        for i, L in enumerate(route.leg_lengths_nm):
            for v, ves in enumerate(vessels):
                for a, alpha in enumerate(grid):
                    time.append((f"phi_{r}_{i}_{v}_{a}", L / alpha))
                time.append((f"z_{r}_{i}_{v}", ves.handling_time_h_per_teu))
    m.objectives["time"] = Objective(_merge(time), 0.0)

    # constraints ----------------------------------------------------------
    for r in range(R):
        m.add_row(f"class_choice_{r}", [(f"x_{r}_{v}", 1.0) for v in range(V)], "=", 1.0)
    for r, route in enumerate(routes):
        fleet = [(f"n_{r}_{v}", 1.0) for v in range(V)]
        m.add_row(f"fleet_min_{r}", fleet, ">=", route.n_min)
        m.add_row(f"fleet_max_{r}", fleet, "<=", route.n_max)
    for r in range(R):
        for v in range(V):
            m.add_row(f"fleet_link_{r}_{v}", [(f"n_{r}_{v}", 1.0), (f"x_{r}_{v}", -M1)], "<=", 0.0)
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            m.add_row(f"capacity_{r}_{i}",
                      [(f"f_{r}_{i}_{o}", 1.0) for o in range(P)]
                      + [(f"x_{r}_{v}", -vessels[v].capacity_teu) for v in range(V)], "<=", 0.0)
    for o in range(P):
        for d in range(P):
            if o == d:
                continue
            terms = []
            for r, i in calls_at.get(d, []):
                terms += [(f"zd_{r}_{i}_{o}", 1.0), (f"zl_{r}_{i}_{o}", -1.0)]
            m.add_row(f"demand_{o}_{d}", terms, "=", dem[o, d])
    for r, route in enumerate(routes):
        n = route.n_calls
        for i in range(n):
            for o in range(P):
                m.add_row(f"conservation_{r}_{i}_{o}",
                          [(f"f_{r}_{(i - 1) % n}_{o}", 1.0), (f"zl_{r}_{i}_{o}", 1.0),
                           (f"f_{r}_{i}_{o}", -1.0), (f"zd_{r}_{i}_{o}", -1.0)], "=", 0.0)
    for r, route in enumerate(routes):
        for i, L in enumerate(route.leg_lengths_nm):
            terms = [(f"t_{r}_{i + 1}", 1.0), (f"t_{r}_{i}", -1.0)]
            for v, ves in enumerate(vessels):
                terms.append((f"z_{r}_{i}_{v}", -ves.handling_time_h_per_teu))
                for a, alpha in enumerate(grid):
                    terms.append((f"phi_{r}_{i}_{v}_{a}", -L / alpha))
            m.add_row(f"schedule_{r}_{i}", terms, "=", inst.fixed_port_hours)
    for q, quad in enumerate(quads):
        m.add_row(f"lag_{q}", [(f"t_{quad.r_prime}_{quad.i_prime}", 1.0), (f"t_{quad.r}_{quad.i}", -1.0),
                               (f"gamma_{q}", WEEK_HOURS), (f"theta_{q}", -1.0)], "=", 0.0)
        m.add_row(f"wrap_min_{q}", [(f"gamma_{q}", 1.0)] + [(f"n_{quad.r_prime}_{v}", 1.0) for v in range(V)],
                  ">=", 0.0)
        m.add_row(f"wrap_max_{q}", [(f"gamma_{q}", 1.0)] + [(f"n_{quad.r}_{v}", -1.0) for v in range(V)],
                  "<=", 0.0)
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            m.add_row(f"speed_one_{r}_{i}", [(f"psi_{r}_{i}_{a}", 1.0) for a in range(len(grid))], "=", 1.0)
            m.add_row(f"speed_value_{r}_{i}",
                      [(f"psi_{r}_{i}_{a}", float(alpha)) for a, alpha in enumerate(grid)]
                      + [(f"u_{r}_{i}", -1.0)], "=", 0.0)
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            for v, ves in enumerate(vessels):
                cap_t = ves.capacity_teu * rates.teu_weight_t
                for a in range(len(grid)):
                    phi, psi, x = f"phi_{r}_{i}_{v}_{a}", f"psi_{r}_{i}_{a}", f"x_{r}_{v}"
                    m.add_row(f"phi_psi_{r}_{i}_{v}_{a}", [(phi, 1.0), (psi, -1.0)], "<=", 0.0)
                    m.add_row(f"phi_x_{r}_{i}_{v}_{a}", [(phi, 1.0), (x, -1.0)], "<=", 0.0)
                    m.add_row(f"phi_and_{r}_{i}_{v}_{a}", [(phi, 1.0), (psi, -1.0), (x, -1.0)], ">=", -1.0)
                    m.add_row(f"w_cap_{r}_{i}_{v}_{a}", [(f"w_{r}_{i}_{v}_{a}", 1.0), (phi, -cap_t)], "<=", 0.0)
            m.add_row(f"payload_{r}_{i}",
                      [(f"w_{r}_{i}_{v}_{a}", 1.0) for v in range(V) for a in range(len(grid))]
                      + [(f"f_{r}_{i}_{o}", -rates.teu_weight_t) for o in range(P)], "=", 0.0)
    for r, route in enumerate(routes):
        for i in range(route.n_calls):
            handled = [(f"zl_{r}_{i}_{o}", -1.0) for o in range(P)] + [(f"zd_{r}_{i}_{o}", -1.0) for o in range(P)]
            for v in range(V):
                m.add_row(f"z_cap_{r}_{i}_{v}", [(f"z_{r}_{i}_{v}", 1.0), (f"x_{r}_{v}", -M2)], "<=", 0.0)
                m.add_row(f"z_def_{r}_{i}_{v}", [(f"z_{r}_{i}_{v}", 1.0), (f"x_{r}_{v}", -M3)] + handled,
                          ">=", -M3)
    for r, route in enumerate(routes):
        for v, ves in enumerate(vessels):
            terms = [(f"n_{r}_{v}", WEEK_HOURS), (f"x_{r}_{v}", -M4)]
            for i, L in enumerate(route.leg_lengths_nm):
                terms.append((f"z_{r}_{i}_{v}", -ves.handling_time_h_per_teu))
                for a, alpha in enumerate(grid):
                    terms.append((f"psi_{r}_{i}_{a}", -L / alpha))
            m.add_row(f"weekly_{r}_{v}", terms, ">=", -M4 + route.n_calls * inst.fixed_port_hours)
    for q, quad in enumerate(quads):
        m.add_row(f"lag_one_{q}", [(f"lam_{q}_{h}", 1.0) for h in HOURS], "=", 1.0)
        m.add_row(f"lag_value_{q}", [(f"lam_{q}_{h}", float(h)) for h in HOURS] + [(f"theta_{q}", -1.0)],
                  "=", 0.0)
    for q, quad in enumerate(quads):
        p = quad.port
        for h in HOURS:
            m.add_row(f"hold_{p}_{q}_{h}",
                      [(f"del_{p}_{q}_{h}", 1.0)] + handled_terms(p, -0.5 * h) + [(f"lam_{q}_{h}", -M5)],
                      ">=", -0.5 * h * od_at[p] - M5)
    for r, route in enumerate(routes):
        n = route.n_calls
        for i in range(n):
            o = route.port_calls[(i + 1) % n]
            m.add_row(f"no_return_{r}_{i}", [(f"f_{r}_{i}_{o}", 1.0)], "=", 0.0)
    for r, route in enumerate(routes):
        for i, o in enumerate(route.port_calls):
            m.add_row(f"no_disc_origin_{r}_{i}", [(f"zd_{r}_{i}_{o}", 1.0)], "=", 0.0)
    return m


def _merge(terms: list[tuple[str, float]]) -> list[tuple[str, float]]:
    merged: dict[str, float] = {}
    for k, c in terms:
        merged[k] = merged.get(k, 0.0) + float(c)
    return [(k, c) for k, c in merged.items() if c != 0.0]


# --------------------------------------------------------------------------
# LP text format
# --------------------------------------------------------------------------

def _num(x: float) -> str:
    if x == math.inf:
        return "+inf"
    if x == -math.inf:
        return "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _expr_lines(terms: list[tuple[str, float]], constant: float = 0.0, per_line: int = 6) -> list[str]:
    parts = []
    for k, (name, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = name if mag == 1.0 else f"{_num(mag)} {name}"
        parts.append(f"{sign} {body}" if k or c < 0 else body)
    if constant:
        parts.append(f"{'-' if constant < 0 else '+'} {_num(abs(constant))}")
    if not parts:
        parts = ["0 " + "__none__"]
    return [" ".join(parts[k:k + per_line]) for k in range(0, len(parts), per_line)]


def lp_text(model: MilpModel, objective: str = "cost", epsilon: float | None = None) -> str:
    """CPLEX LP text for one scalar objective; ``epsilon`` adds a time cap row."""
    if objective not in model.objectives:
        raise MilpError(f"unknown objective {objective!r}")
    obj = model.objectives[objective]
    out = [f"\\ Problem: {model.name}", f"\\ Objective: {objective}", "Minimize"]
    lines = _expr_lines(obj.terms, obj.constant)
    out.append(f" obj: {lines[0]}")
    out += [f"   {ln}" for ln in lines[1:]]
    out.append("Subject To")
    rows = list(model.rows)
    if epsilon is not None:
        t = model.objectives["time"]
        rows.append(Row("epsilon_time", t.terms, "<=", float(epsilon) - t.constant))
    for row in rows:
        lines = _expr_lines(row.terms)
        lines[-1] += f" {row.sense} {_num(row.rhs)}"
        out.append(f" {row.name}: {lines[0]}")
        out += [f"   {ln}" for ln in lines[1:]]
    out.append("Bounds")
    for v in model.variables:
        if v.lb == -math.inf and v.ub == math.inf:
            out.append(f" {v.name} free")
        elif v.ub == math.inf:
            out.append(f" {v.name} >= {_num(v.lb)}")
        else:
            out.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    gen = [v.name for v in model.variables if v.kind == "integer"]
    binv = [v.name for v in model.variables if v.kind == "binary"]
    for title, names in (("General", gen), ("Binary", binv)):
        if names:
            out.append(title)
            out += [" " + " ".join(names[k:k + 8]) for k in range(0, len(names), 8)]
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp(model: MilpModel, path: str | Path, objective: str = "cost", epsilon: float | None = None) -> None:
    Path(path).write_text(lp_text(model, objective, epsilon), encoding="utf-8")


def _parse_expr(text: str) -> tuple[list[tuple[str, float]], float]:
    toks = text.replace("+", " + ").replace("-", " - ").split()
    # re-join exponents split above, e.g. "1e - 05"
    joined: list[str] = []
    for tok in toks:
        if joined and joined[-1][-1:] in ("e", "E") and re.fullmatch(r"[0-9.]+[eE]", joined[-1]):
            joined[-1] += tok
        elif joined and re.fullmatch(r"[0-9.]+[eE][+-]", joined[-1]):
            joined[-1] += tok
        else:
            joined.append(tok)
    terms: list[tuple[str, float]] = []
    constant = 0.0
    sign, coef = 1.0, None
    for tok in joined:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
        elif re.fullmatch(r"[0-9.]+([eE][+-]?[0-9]+)?", tok):
            if coef is not None:
                raise MilpError(f"two numbers in a row near {tok!r}")
            coef = float(tok)
        else:
            terms.append((tok, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
            continue
        if tok not in "+-":
            continue
    if coef is not None:
        constant = sign * coef
    return terms, constant


def read_lp(path_or_text: str | Path) -> tuple[MilpModel, Objective]:
    """Parse LP text written by ``write_lp`` (a practical subset of the format)."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text(encoding="utf-8")
    section = None
    statements: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "general": [], "binary": []}
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        key = line.strip().lower()
        if key in ("minimize", "subject to", "bounds", "general", "binary", "end"):
            section = key
            continue
        if section == "minimize":
            statements["obj"].append(line)
        elif section == "subject to":
            if line.startswith(" ") and not line.startswith("   "):
                statements["rows"].append(line.strip())
            else:
                statements["rows"][-1] += " " + line.strip()
        elif section in ("bounds", "general", "binary"):
            statements[section].append(line.strip())
        else:
            raise MilpError(f"unexpected line outside a section: {line!r}")

    obj_text = " ".join(s.strip() for s in statements["obj"])
    if not obj_text.startswith("obj:"):
        raise MilpError("objective must be labelled 'obj:'")
    obj_terms, obj_const = _parse_expr(obj_text[4:])

    rows = []
    for stmt in statements["rows"]:
        name, _, body = stmt.partition(":")
        m = re.match(r"(.*)\s(<=|>=|=)\s(\S+)$", body)
        if not m:
            raise MilpError(f"cannot parse row {stmt!r}")
        terms, const = _parse_expr(m.group(1))
        if const:
            raise MilpError(f"row {name} has a constant on the left-hand side")
        rows.append(Row(name.strip(), terms, m.group(2), float(m.group(3))))

    kinds: dict[str, str] = {}
    for line in statements["general"]:
        for name in line.split():
            kinds[name] = "integer"
    for line in statements["binary"]:
        for name in line.split():
            kinds[name] = "binary"
    bounds: dict[str, tuple[float, float]] = {}
    for line in statements["bounds"]:
        parts = line.split()
        if len(parts) == 2 and parts[1] == "free":
            bounds[parts[0]] = (-math.inf, math.inf)
        elif len(parts) == 3 and parts[1] == ">=":
            bounds[parts[0]] = (float(parts[2]), math.inf)
        elif len(parts) == 5 and parts[1] == parts[3] == "<=":
            bounds[parts[2]] = (float(parts[0]), float(parts[4]))
        else:
            raise MilpError(f"cannot parse bound {line!r}")

    order: list[str] = []
    seen: set[str] = set()
    for name in list(bounds) + [n for line in statements["general"] + statements["binary"] for n in line.split()]:
        if name not in seen:
            seen.add(name)
            order.append(name)
    model = MilpModel()
    for name in order:
        lb, ub = bounds.get(name, (0.0, math.inf))
        model.add_var(name, kinds.get(name, "continuous"), lb, ub)
    for row in rows:
        for var, _ in row.terms:
            if not model.has_variable(var):
                model.add_var(var, kinds.get(var, "continuous"))
    model.rows = rows
    objective = Objective(obj_terms, obj_const)
    return model, objective


# --------------------------------------------------------------------------
# Assignments
# --------------------------------------------------------------------------

@dataclass
class VerificationReport:
    linear_f1: float
    nonlinear_f1: float
    linear_f2: float
    nonlinear_f2: float
    fit_residual_bound: float
    solution: Solution

    @property
    def gap_f1(self) -> float:
        return abs(self.linear_f1 - self.nonlinear_f1)

    @property
    def gap_f2(self) -> float:
        return abs(self.linear_f2 - self.nonlinear_f2)


def objective_value(obj: Objective, values: dict[str, float]) -> float:
    return float(sum(c * values.get(k, 0.0) for k, c in obj.terms) + obj.constant)


def row_violation(row: Row, values: dict[str, float]) -> float:
    lhs = sum(c * values.get(k, 0.0) for k, c in row.terms)
    if row.sense == "<=":
        return max(0.0, lhs - row.rhs)
    if row.sense == ">=":
        return max(0.0, row.rhs - lhs)
    return abs(lhs - row.rhs)


def row_slack(row: Row, values: dict[str, float]) -> float:
    lhs = sum(c * values.get(k, 0.0) for k, c in row.terms)
    return lhs - row.rhs if row.sense == ">=" else row.rhs - lhs


def check_assignment(model: MilpModel, values: dict[str, float], tol: float = 1e-6) -> None:
    """Raise MilpError naming the first bound, integrality or row violation."""
    for name in values:
        if not model.has_variable(name):
            raise MilpError(f"unknown variable {name}")
    for v in model.variables:
        x = values.get(v.name, 0.0)
        if x < v.lb - tol or x > v.ub + tol:
            raise MilpError(f"variable {v.name}={x} outside [{v.lb}, {v.ub}]")
        if v.kind != "continuous" and abs(x - round(x)) > 1e-9:
            raise MilpError(f"variable {v.name}={x} is not integral")
    for row in model.rows:
        scale = 1.0 + sum(abs(c * values.get(k, 0.0)) for k, c in row.terms) + abs(row.rhs)
        if row_violation(row, values) > tol * scale:
            raise MilpError(f"row {row.name} violated by {row_violation(row, values):.6g}")


def _chosen(values: dict[str, float], names: list[str]) -> int:
    hits = [k for k, n in enumerate(names) if round(values.get(n, 0.0)) == 1]
    if len(hits) != 1:
        raise MilpError(f"expected exactly one of {names[0]}.. to be 1")
    return hits[0]


def verify_assignment(model: MilpModel, inst: Instance, values: dict[str, float], tol: float = 1e-6) -> VerificationReport:
    """Check every row, rebuild the nonlinear solution, compare objective values."""
    check_assignment(model, values, tol)
    R, V, P = inst.n_routes, inst.n_vessels, inst.n_ports
    classes = np.array([_chosen(values, [f"x_{r}_{v}" for v in range(V)]) for r in range(R)])
    n_r = np.array([round(sum(values.get(f"n_{r}_{v}", 0.0) for v in range(V))) for r in range(R)])
    speeds, bound = [], 0.0
    fuel_rate = inst.rates.c_fuel + inst.rates.c_emis * inst.rates.e_sea
    leg = 0
    for r, route in enumerate(inst.routes):
        for i, L in enumerate(route.leg_lengths_nm):
            grid = model.speed_grid[leg]
            a = _chosen(values, [f"psi_{r}_{i}_{a}" for a in range(len(grid))])
            alpha = float(grid[a])
            speeds.append(alpha)
            v = classes[r]
            k = inst.vessels[v].fuel_coeff_k
            bound += fuel_rate * L * k * alpha**2 / 24.0 * model.fit["residual"][v]
            leg += 1
    shape = (inst.n_calls_total, P)
    arrays = {p: np.zeros(shape) for p in ("zl", "zd", "f")}
    offs = inst.call_offsets
    for r, route in enumerate(inst.routes):
        for i in range(route.n_calls):
            for o in range(P):
                for p in arrays:
                    arrays[p][offs[r] + i, o] = values.get(f"{p}_{r}_{i}_{o}", 0.0)
    flow = FlowAssignment(arrays["zl"], arrays["zd"], arrays["f"], offs)
    arrivals = [np.array([values.get(f"t_{r}_{i}", 0.0) for i in range(route.n_calls + 1)])
                for r, route in enumerate(inst.routes)]
    nq = len(inst.transshipments)
    theta = np.array([values.get(f"theta_{q}", 0.0) for q in range(nq)])
    gamma = np.array([round(values.get(f"gamma_{q}", 0.0)) for q in range(nq)], dtype=np.int64)
    sol = Solution(n_r=n_r.astype(np.int64), classes=classes.astype(np.int64), speeds=np.array(speeds),
                   arrivals=arrivals, theta=theta, gamma=gamma, flow=flow)
    evaluate(inst, sol)
    return VerificationReport(
        linear_f1=objective_value(model.objectives["cost"], values),
        nonlinear_f1=sol.objectives[0],
        linear_f2=objective_value(model.objectives["time"], values),
        nonlinear_f2=sol.objectives[1],
        fit_residual_bound=bound,
        solution=sol,
    )


def solution_to_assignment(model: MilpModel, inst: Instance, sol: Solution) -> dict[str, float]:
    """Variable values representing ``sol``; speeds must be on the grid, lags whole hours."""
    R, V, P = inst.n_routes, inst.n_vessels, inst.n_ports
    rates = inst.rates
    values: dict[str, float] = {}
    for r in range(R):
        for v in range(V):
            on = float(sol.classes[r] == v)
            values[f"x_{r}_{v}"] = on
            values[f"n_{r}_{v}"] = on * float(sol.n_r[r])
    offs = inst.call_offsets
    handled = sol.flow.handled
    payload = sol.flow.payload
    leg = 0
    for r, route in enumerate(inst.routes):
        v_on = int(sol.classes[r])
        for i in range(route.n_calls + 1):
            values[f"t_{r}_{i}"] = float(sol.arrivals[r][i])
        for i in range(route.n_calls):
            k = offs[r] + i
            grid = model.speed_grid[leg]
            hit = np.flatnonzero(np.isclose(grid, sol.speeds[k], rtol=0.0, atol=1e-12))
            if len(hit) != 1:
                raise MilpError(f"speed {sol.speeds[k]} on leg ({r}, {i}) is not on the grid")
            a_on = int(hit[0])
            values[f"u_{r}_{i}"] = float(grid[a_on])
            for o in range(P):
                values[f"zl_{r}_{i}_{o}"] = float(sol.flow.z_load[k, o])
                values[f"zd_{r}_{i}_{o}"] = float(sol.flow.z_disc[k, o])
                values[f"f_{r}_{i}_{o}"] = float(sol.flow.f[k, o])
            for v in range(V):
                values[f"z_{r}_{i}_{v}"] = float(handled[k]) if v == v_on else 0.0
            for a in range(len(grid)):
                values[f"psi_{r}_{i}_{a}"] = float(a == a_on)
                for v in range(V):
                    on = a == a_on and v == v_on
                    values[f"phi_{r}_{i}_{v}_{a}"] = float(on)
                    values[f"w_{r}_{i}_{v}_{a}"] = float(payload[k] * rates.teu_weight_t) if on else 0.0
            leg += 1
    bracket = 2.0 * transshipped_teu_by_port(sol.flow, inst)
    for q, quad in enumerate(inst.transshipments):
        th = float(sol.theta[q])
        if abs(th - round(th)) > 1e-9:
            raise MilpError(f"lag {th} of quadruple {q} is not a whole hour")
        h_on = int(round(th))
        values[f"theta_{q}"] = float(h_on)
        values[f"gamma_{q}"] = float(sol.gamma[q])
        for h in HOURS:
            values[f"lam_{q}_{h}"] = float(h == h_on)
            values[f"del_{quad.port}_{q}_{h}"] = 0.5 * h * float(bracket[quad.port]) if h == h_on else 0.0
    return values
