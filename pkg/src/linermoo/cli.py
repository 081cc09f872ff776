"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 guard refusal or no feasible
solution.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation import COST_TERMS, Solution, plan_for
from .genotype import Genotype, decode, genotype_space
from .instance import (
    Instance,
    InstanceError,
    bundled_path,
    generate_instance,
    load_instance,
    save_instance,
)
from .metrics import pareto_mask
from .milp import MilpError, build_milp, lp_text
from .nsga2 import NSGA2Params, evolve
from .ocea import OCEAParams, archive_front, run_ocea
from .oracle import DEFAULT_SPEED_STEP, GuardError, solve_oracle

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


class ConfigError(ValueError):
    pass


def resolve_instance(spec: str) -> Instance:
    """A file path, or the name of a bundled instance."""
    path = Path(spec)
    if not path.exists():
        candidate = bundled_path(spec if spec.endswith(".json") else spec + ".json")
        if not candidate.exists():
            raise ConfigError(f"no instance file or bundled instance named {spec!r}")
        path = candidate
    try:
        return load_instance(path)
    except (InstanceError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load {path}: {exc}") from exc


def _fmt(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# Front files
# --------------------------------------------------------------------------

def front_rows(inst: Instance, solutions: Sequence[Solution], algorithm: str) -> list[dict[str, str]]:
    """Feasible, mutually nondominated, unique rows sorted by F1 then F2."""
    feas = [s for s in solutions if s.feasible]
    if not feas:
        return []
    objs = np.array([s.objectives for s in feas])
    keep = np.flatnonzero(pareto_mask(objs))
    _, first = np.unique(objs[keep], axis=0, return_index=True)
    chosen = [feas[keep[i]] for i in sorted(first)]
    chosen.sort(key=lambda s: (s.objectives[0], s.objectives[1]))
    plan = plan_for(inst)
    rows = []
    for k, s in enumerate(chosen):
        row = {
            "solution_id": str(k),
            "algorithm": algorithm,
            "F1_usd": _fmt(s.objectives[0]),
            "F2_hours": _fmt(s.objectives[1]),
            "feasible": str(int(s.feasible)),
        }
        for r in range(inst.n_routes):
            legs = s.speeds[plan.route_of_call == r]
            row[f"class_r{r}"] = str(int(s.classes[r]))
            row[f"n_r{r}"] = str(int(s.n_r[r]))
            row[f"mean_speed_r{r}"] = _fmt(legs.mean())
        row["genotype"] = " ".join(_fmt(x) for x in s.genotype.values)
        rows.append(row)
    return rows


def front_fields(inst: Instance) -> list[str]:
    fields = ["solution_id", "algorithm", "F1_usd", "F2_hours", "feasible"]
    for r in range(inst.n_routes):
        fields += [f"class_r{r}", f"n_r{r}", f"mean_speed_r{r}"]
    return fields + ["genotype"]


def write_csv(path: Path, fields: Sequence[str], rows: Sequence[dict[str, str]]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def read_front(path: Path) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for k, row in enumerate(rows):
        try:
            float(row["F1_usd"]), float(row["F2_hours"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"{path}: row {k + 1} lacks numeric F1_usd/F2_hours") from None
    return rows


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.name:
        inst = resolve_instance(args.name)
    else:
        if args.ports is None or args.routes is None or args.classes is None:
            raise ConfigError("gen needs --name or all of --ports, --routes, --classes")
        try:
            inst = generate_instance(args.ports, args.routes, args.classes, args.seed, args.demand_scale)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_instance(inst, out)
    print(f"wrote {out} ({inst.n_ports} ports, {inst.n_routes} routes, {inst.n_vessels} classes)")
    return EXIT_OK


def _solve(inst: Instance, args, out: Path) -> tuple[list[Solution], str]:
    algo = args.algo
    if algo == "oracle":
        res = solve_oracle(inst, speed_step=args.speed_grid_step)
        return [decode(inst, g) for g in res.genotypes], algo
    progress = io.StringIO()
    if algo == "nsga2":
        ranked = evolve(inst, NSGA2Params(pop=args.pop, generations=args.generations, seed=args.seed), progress)
        sols = ranked.members
    else:
        archive = run_ocea(inst, OCEAParams(K=args.pop, generations=args.generations, seed=args.seed), progress)
        sols = archive_front(archive) or archive.solutions
    (out / "progress.csv").write_text(progress.getvalue(), encoding="utf-8")
    return sols, algo


def cmd_solve(args) -> int:
    inst = resolve_instance(args.instance)
    if args.generations < 0 or args.pop < 2:
        raise ConfigError("--generations must be >= 0 and --pop >= 2")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sols, algo = _solve(inst, args, out)
    rows = front_rows(inst, sols, algo)
    write_csv(out / "front.csv", front_fields(inst), rows)
    if not rows:
        print("no feasible solution found", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"{len(rows)} front solutions written to {out / 'front.csv'}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    args.algo = "oracle"
    return cmd_solve(args)


def cmd_eval(args) -> int:
    """Re-decode every front row and write its cost breakdown and residuals."""
    inst = resolve_instance(args.instance)
    rows = read_front(Path(args.front))
    space = genotype_space(inst)
    out_rows = []
    status = EXIT_OK
    for row in rows:
        try:
            x = np.array([float(v) for v in row["genotype"].split()])
        except (KeyError, ValueError):
            raise ConfigError("front rows need a genotype column") from None
        if x.shape != (space.size,):
            raise ConfigError(f"genotype of row {row['solution_id']} does not fit the instance")
        sol = decode(inst, Genotype(x, space))
        f1, f2 = float(row["F1_usd"]), float(row["F2_hours"])
        match = abs(sol.objectives[0] - f1) <= 1e-6 * abs(f1) and abs(sol.objectives[1] - f2) <= 1e-6 * abs(f2)
        if not (match and sol.feasible):
            status = EXIT_INFEASIBLE
        rec = {"solution_id": row["solution_id"], "F1_usd": _fmt(sol.objectives[0]),
               "F2_hours": _fmt(sol.objectives[1])}
        rec.update({name: _fmt(v) for name, v in zip(COST_TERMS, sol.cost_terms)})
        rec.update({f"res_{k}": _fmt(v) for k, v in sol.residuals.as_dict().items()})
        rec["feasible"] = str(int(sol.feasible))
        rec["matches_front"] = str(int(match))
        out_rows.append(rec)
    res_keys = [k for k in out_rows[0] if k.startswith("res_")] if out_rows else []
    fields = ["solution_id", "F1_usd", "F2_hours", *COST_TERMS, *res_keys, "feasible", "matches_front"]
    write_csv(Path(args.out), fields, out_rows)
    print(f"evaluated {len(out_rows)} rows into {args.out}")
    return status


def cmd_export_milp(args) -> int:
    inst = resolve_instance(args.instance)
    try:
        model = build_milp(inst, args.speed_grid_step)
    except MilpError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(lp_text(model, args.objective, args.epsilon), encoding="utf-8")
    print(f"wrote {out}: {model.n_variables} variables, {model.n_rows + (args.epsilon is not None)} constraints")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    rows = read_front(Path(args.front))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    by_algo: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        by_algo.setdefault(row.get("algorithm") or "front", []).append(
            (float(row["F1_usd"]), float(row["F2_hours"])))
    if not by_algo:
        (out / "front.dat").write_text("", encoding="utf-8")
        print("warning: empty front", file=sys.stderr)
        return EXIT_OK
    for algo, pts in sorted(by_algo.items()):
        pts.sort()
        text = "".join(f"{_fmt(a)} {_fmt(b)}\n" for a, b in pts)
        (out / f"{algo}.dat").write_text(text, encoding="utf-8")
    print(f"wrote {len(by_algo)} plot file(s) to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linermoo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an instance file")
    p.add_argument("--name", help="bundled instance to copy")
    p.add_argument("--ports", type=int)
    p.add_argument("--routes", type=int)
    p.add_argument("--classes", type=int)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--demand-scale", type=float, default=200.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    def solver_flags(p, algo_choice: bool) -> None:
        p.add_argument("--instance", required=True)
        if algo_choice:
            p.add_argument("--algo", choices=("nsga2", "ocea", "oracle"), default="ocea")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--generations", type=int, default=300)
        p.add_argument("--pop", type=int, default=100)
        p.add_argument("--speed-grid-step", type=float, default=DEFAULT_SPEED_STEP)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("solve", help="run a solver and write front.csv and progress.csv")
    solver_flags(p, True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive grid front of a tiny instance")
    solver_flags(p, False)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("eval", help="re-evaluate a front file, write cost breakdown")
    p.add_argument("--instance", required=True)
    p.add_argument("--front", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-milp", help="write the linearized model in LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", choices=("cost", "time"), default="cost")
    p.add_argument("--epsilon", type=float, help="add total voyage hours <= EPSILON")
    p.add_argument("--speed-grid-step", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_milp)

    p = sub.add_parser("plotdata", help="two-column F1 F2 files, one per algorithm")
    p.add_argument("--front", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
