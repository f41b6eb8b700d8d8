"""Command line: run verification suites, emit series, classify fibres, check Euler diagrams."""
from __future__ import annotations

import argparse
import json
import random
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from math import factorial
from pathlib import Path

from . import euler, fibers, gluing, relations, toric
from .errors import LgError
from .invariants import FactoredInvariant
from .series import Trunc, TruncatedSeries, VarSet

DEFAULT_ORDER = 6
DEFAULT_TORIC_ORDER = 4
DEFAULT_INSTANCES = 20
DEFAULT_SEED = 7
EULER_SAMPLES = 100

EXAMPLE_SUITES = ("example1", "example2", "normal_cone", "quintic")
SUITES = EXAMPLE_SUITES + ("toric", "toric_random", "euler", "fibers", "all")


# ---------------------------------------------------------------------------
# suite members (plain tuples so they can cross process boundaries)


def run_member(member: tuple, emit_table: bool = False) -> dict:
    kind, name, *args = member
    if kind == "period":
        order, = args
        return gluing.verify_period_gluing(gluing.PERIOD_BUILDERS[name](order), emit_table=emit_table).to_json()
    if kind == "ifunc":
        order, = args
        return gluing.verify_I_gluing(gluing.I_BUILDERS[name](order), emit_table=emit_table).to_json()
    if kind == "relation":
        order, = args
        return relations.verify(relations.BUILTIN[name](), order)
    if kind == "toric_period":
        data, order, strip = args
        g = gluing.toric_instance(toric.ToricCIData.from_json(data), order, strip_rho_factor=strip, name=name)
        return gluing.verify_period_gluing(g, emit_table=emit_table).to_json()
    if kind == "toric_ifunc":
        data, order, strip = args
        g = gluing.toric_I_instance(toric.ToricCIData.from_json(data), order, strip_rho_factor=strip, name=name)
        return gluing.verify_I_gluing(g, emit_table=emit_table).to_json()
    if kind == "toric_relation":
        data, d12 = args
        reports = [relations.verify(r) for r in
                   relations.toric_relations(toric.ToricCIData.from_json(data), d12_family=d12)]
        return {"instance": name, "order": 4, "verdict": all(r["verdict"] for r in reports),
                "first_mismatch": next((r for r in reports if not r["verdict"]), None),
                "runtime_ms": sum(r["runtime_ms"] for r in reports)}
    if kind == "double_residue":
        order, = args
        return _double_residue_report(name, order)
    if kind == "euler_data":
        return _euler_data_report(name)
    if kind == "euler_random":
        seed, count = args
        return _euler_random_report(name, seed, count)
    if kind == "fibers":
        r = fibers.verify_golden(name)
        return {"instance": f"fibers_{name}", "order": 0, "verdict": r["match"] and r["errata_exact"],
                "first_mismatch": None if r["match"] else {"only_computed": r["only_computed"],
                                                            "only_expected": r["only_expected"]},
                "details": {"errata": r["errata"], "errata_exact": r["errata_exact"]}, "runtime_ms": 0}
    raise LgError("UNKNOWN_SUITE", f"unknown member kind {kind!r}")


def _double_residue_report(name: str, order: int) -> dict:
    s = gluing.double_residue_quintic(order)
    got = [s.coeff((d,)) for d in range(order + 1)]
    want = [factorial(5 * d) // factorial(d) ** 5 for d in range(order + 1)]
    bad = next((d for d in range(order + 1) if got[d] != want[d]), None)
    return {"instance": name, "order": order, "verdict": bad is None,
            "first_mismatch": None if bad is None else {"d": bad, "lhs": str(got[bad]), "rhs": str(want[bad])},
            "runtime_ms": 0}


def _euler_data_report(name: str) -> dict:
    path = Path(__file__).parent / "data" / f"{name}.json"
    rows = euler.check_smoothing(euler.EulerDiagram.load(path))
    bad = next((r for r in rows if not r["holds"]), None)
    return {"instance": name, "order": 0, "verdict": bad is None, "first_mismatch": bad, "runtime_ms": 0,
            "details": {"relations": rows}}


def _euler_random_report(name: str, seed: int, count: int) -> dict:
    rng = random.Random(seed)
    for i in range(count):
        d = euler.random_smoothing_diagram(rng)
        solved = euler.solve_unknowns(d)
        rows = euler.check_all(solved)
        rt = euler.check_mirror_relations(euler.populate_mirror(solved))
        bad = next((r for r in rows + rt if not r["holds"]), None)
        if bad is not None:
            return {"instance": name, "order": 0, "verdict": False,
                    "first_mismatch": dict(bad, sample=i), "runtime_ms": 0}
    return {"instance": name, "order": 0, "verdict": True, "first_mismatch": None, "runtime_ms": 0,
            "details": {"samples": count, "seed": seed}}


def _toric_members(data: toric.ToricCIData, label: str, order: int, strip: bool) -> list:
    js = data.to_json()
    tag = "_stripped" if strip else ""
    return [("toric_period", f"{label}_periods{tag}", js, order, strip),
            ("toric_ifunc", f"{label}_ifunc{tag}", js, order, strip),
            ("toric_relation", f"{label}_invariants", js, False),
            ("toric_relation", f"{label}_invariants_d12", js, True)]


def suite_members(suite: str, order: int | None, *, seed: int = DEFAULT_SEED,
                  instances: int = DEFAULT_INSTANCES, strip: bool = False) -> list:
    suite = suite.replace("-", "_")
    N = DEFAULT_ORDER if order is None else order
    members = []
    if suite in ("example1", "all"):
        members += [("period", "example1", N), ("ifunc", "example1_I", N), ("relation", "example1", 4)]
    if suite in ("example2", "all"):
        members += [("period", "example2", N), ("ifunc", "example2_I", N), ("relation", "example2", 4)]
    if suite in ("normal_cone", "all"):
        members += [("period", "normal_cone", N), ("relation", "normal_cone", 4)]
        members += _toric_members(toric.builtin("normal_cone_P3"), "normal_cone_P3", N, strip)
    if suite in ("quintic", "all"):
        members += [("double_residue", "quintic_double_residue", N), ("period", "quintic", N),
                    ("period", "quintic_four_factor", N), ("relation", "quintic_step", 4),
                    ("relation", "quintic_iterated", 4)]
        for name in ("quintic_step1", "quintic_step2"):
            members += _toric_members(toric.builtin(name), name, N, strip)
    if suite in ("toric", "all"):
        for name in ("example1_P4xP1", "example2_quartic"):
            members += _toric_members(toric.builtin(name), name, DEFAULT_TORIC_ORDER if order is None else N, strip)
    if suite in ("toric_random", "all"):
        rng = random.Random(seed)
        M = DEFAULT_TORIC_ORDER if order is None else order
        for i in range(instances):
            members += _toric_members(toric.random_data(rng), f"random{i:03d}", M, strip)
    if suite in ("euler", "all"):
        members += [("euler_data", "euler_quintic"), ("euler_random", "euler_random_diagrams", seed, EULER_SAMPLES)]
    if suite in ("fibers", "all"):
        members += [("fibers", n) for n in fibers.golden_names()]
    if not members:
        raise LgError("UNKNOWN_SUITE", f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return members


def _member_key(m: tuple) -> str:
    return m[1]


def run_members(members: list, jobs: int = 1, emit_table: bool = False) -> list:
    members = sorted(members, key=_member_key)
    if jobs > 1 and len(members) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_member, members, [emit_table] * len(members)))
    else:
        results = [run_member(m, emit_table) for m in members]
    return sorted(results, key=lambda r: r["instance"])


# ---------------------------------------------------------------------------
# reports


def _stable(report: dict) -> dict:
    out = dict(report)
    out["runtime_ms"] = 0
    return out


def human_report(report: dict) -> str:
    lines = [f"suite {report['suite']} order {report['order']}"]
    for r in report["members"]:
        status = "PASS" if r["verdict"] else "FAIL"
        line = f"{status} {r['instance']} ({r['runtime_ms']} ms)"
        if not r["verdict"] and r.get("first_mismatch"):
            line += f" first mismatch: {json.dumps(r['first_mismatch'], sort_keys=True)}"
        lines.append(line)
    passed = sum(r["verdict"] for r in report["members"])
    lines.append(f"{passed}/{len(report['members'])} passed")
    return "\n".join(lines) + "\n"


def write_reports(report: dict, out: str | None, as_json: bool, stable: bool) -> None:
    rep = dict(report)
    if stable:
        rep["members"] = [_stable(m) for m in rep["members"]]
    text_json = json.dumps(rep, indent=1, sort_keys=True) + "\n"
    text_human = human_report(rep)
    if out:
        d = Path(out)
        try:
            d.mkdir(parents=True, exist_ok=True)
            (d / "report.json").write_text(text_json)
            (d / "report.txt").write_text(text_human)
        except OSError as exc:
            raise LgError("IO_ERROR", f"{exc.filename}: {exc.strerror}") from None
    sys.stdout.write(text_json if as_json else text_human)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise LgError("IO_ERROR", f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise LgError("CONFIG_PARSE", f"{path}: {exc}") from None


def cmd_verify(args) -> int:
    target = args.target
    order, seed, instances, strip = args.order, args.seed, args.instances, args.strip_rho_factor
    if target.endswith(".json") or Path(target).is_file():
        cfg = _load_json(target)
        if "strata" in cfg:
            d = euler.EulerDiagram.from_json(cfg)
            rows = euler.check_all(d)
            report = {"suite": target, "order": 0, "verdict": all(r["holds"] for r in rows), "members": [
                {"instance": r["relation"], "order": 0, "verdict": r["holds"], "runtime_ms": 0,
                 "first_mismatch": None if r["holds"] else {"residual": r["residual"]}} for r in rows]}
            write_reports(report, args.out, args.json, args.stable)
            return 0 if report["verdict"] else 1
        if "M" in cfg:
            data = toric.ToricCIData.from_json(cfg)
            N = DEFAULT_TORIC_ORDER if order is None else order
            members = _toric_members(data, data.name or "custom", N, bool(strip))
            return _run_and_report(target, N, members, args)
        if "suite" not in cfg:
            raise LgError("CONFIG_PARSE", f"{target}: expected a 'suite' key, toric data or an Euler diagram")
        target = cfg["suite"]
        order = cfg.get("order") if order is None else order
        seed = cfg.get("seed", DEFAULT_SEED) if seed is None else seed
        instances = cfg.get("instances", DEFAULT_INSTANCES) if instances is None else instances
        strip = cfg.get("strip_rho_factor", False) if strip is None else strip
    if order is not None and order < 0:
        raise LgError("CONFIG_PARSE", "order must be nonnegative")
    members = suite_members(target, order, seed=DEFAULT_SEED if seed is None else seed,
                            instances=DEFAULT_INSTANCES if instances is None else instances, strip=bool(strip))
    N = order if order is not None else (DEFAULT_TORIC_ORDER if target.replace("-", "_") == "toric_random"
                                         else DEFAULT_ORDER)
    return _run_and_report(target, N, members, args)


def _run_and_report(suite: str, order: int, members: list, args) -> int:
    results = run_members(members, max(1, args.jobs), args.emit_table)
    verdict = all(r["verdict"] for r in results)
    report = {"suite": suite, "order": order, "verdict": verdict, "members": results}
    write_reports(report, args.out, args.json, args.stable)
    return 0 if verdict else 1


# ---------------------------------------------------------------------------
# emit


def emit_target(target: str, order: int) -> TruncatedSeries:
    """Series named by ``target``.

    ``quintic-period``; ``period:<dataset>:<X|D0|X1|X2>`` for built-in toric
    data; ``gluing:<instance>:<lhs|rhs>`` for the two sides of a built-in
    period gluing.
    """
    if target == "quintic-period":
        return gluing.double_residue_quintic(order)
    kind, _, rest = target.partition(":")
    if kind == "period":
        name, _, which = rest.partition(":")
        fn = {"X": toric.period_X, "D0": toric.period_D0, "X1": toric.period_X1, "X2": toric.period_X2}.get(which)
        if fn is None:
            raise LgError("UNKNOWN_SUITE", f"unknown period {which!r}")
        return fn(toric.builtin(name), order)
    if kind == "gluing":
        name, _, side = rest.partition(":")
        if name not in gluing.PERIOD_BUILDERS or side not in ("lhs", "rhs"):
            raise LgError("UNKNOWN_SUITE", f"unknown gluing side {rest!r}")
        lhs, rhs = gluing.glue_sides(gluing.PERIOD_BUILDERS[name](order))
        return lhs if side == "lhs" else rhs
    raise LgError("UNKNOWN_SUITE", f"unknown emit target {target!r}")


def render_series(s: TruncatedSeries, as_json: bool = False) -> str:
    """Canonical text: one coefficient per line for one variable, else exponent rows."""
    if as_json:
        return json.dumps(s.to_json(), indent=1) + "\n"
    if len(s.vars) == 1 and s.vars.power_idx == (0,):
        return "".join(f"{s.coeff((d,))}\n" for d in range(s.trunc.order + 1))
    return s.to_text()


def ingest_series(text: str, vars: VarSet | None = None, trunc: Trunc | None = None) -> TruncatedSeries:
    """Inverse of :func:`render_series`."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return TruncatedSeries.from_json(json.loads(text))
    if vars is None or trunc is None:
        raise LgError("CONFIG_PARSE", "text series need their variables and truncation")
    if len(vars) == 1 and vars.power_idx == (0,):
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        return TruncatedSeries(vars, trunc, {(d,): c for d, c in enumerate(lines)}, strict=True)
    return TruncatedSeries.from_text(text, vars, trunc)


def cmd_emit(args) -> int:
    order = DEFAULT_ORDER if args.order is None else args.order
    s = emit_target(args.target, order)
    text = render_series(s, args.json)
    dest = None
    if args.bless:
        safe = re.sub(r"[^A-Za-z0-9_.-]", "_", args.target)
        dest = fibers.golden_dir() / "series" / f"{safe}_order{order}{'.json' if args.json else '.txt'}"
    elif args.out:
        dest = Path(args.out)
    if dest is None:
        sys.stdout.write(text)
        return 0
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
    except OSError as exc:
        raise LgError("IO_ERROR", f"{dest}: {exc.strerror}") from None
    sys.stdout.write(f"wrote {dest}\n")
    return 0


# ---------------------------------------------------------------------------
# classify, euler, solve


def cmd_classify(args) -> int:
    cfg = _load_json(args.path)
    inv = cfg["invariant"]
    inv = FactoredInvariant.parse(inv) if isinstance(inv, str) else FactoredInvariant.from_json(inv)
    table = fibers.classify(inv, cfg.get("chart", [])).to_json()
    out = {"table": table}
    code = 0
    if "table" in cfg:
        cmp = fibers.compare_tables(table, cfg["table"])
        out["comparison"] = cmp
        code = 0 if cmp["match"] else 1
    sys.stdout.write(json.dumps(out, indent=1, ensure_ascii=False) + "\n")
    return code


def cmd_euler(args) -> int:
    d = euler.EulerDiagram.from_json(_load_json(args.path))
    rows = euler.check_all(d)
    if args.json:
        sys.stdout.write(json.dumps(rows, indent=1) + "\n")
    else:
        for r in rows:
            sys.stdout.write(f"{'PASS' if r['holds'] else 'FAIL'} {r['relation']} residual {r['residual']}\n")
    return 0 if all(r["holds"] for r in rows) else 1


def cmd_solve(args) -> int:
    d = euler.EulerDiagram.from_json(_load_json(args.path))
    sys.stdout.write(json.dumps(euler.solve_unknowns(d).to_json(), indent=1) + "\n")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgglue", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a built-in suite or a JSON config")
    v.add_argument("target", help=f"suite ({', '.join(SUITES)}) or path to a JSON config")
    v.add_argument("--order", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--instances", type=int)
    v.add_argument("--emit-table", action="store_true", help="include full coefficient tables")
    v.add_argument("--strip-rho-factor", action="store_true", default=None,
                   help="drop the product over the refined class from every term")
    v.add_argument("--json", action="store_true", help="print the JSON report instead of the summary")
    v.add_argument("--out", help="directory for report.json and report.txt")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--stable", action="store_true", help="zero the timings for byte-reproducible reports")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("emit", help="write a series in canonical text or JSON")
    e.add_argument("target")
    e.add_argument("--order", type=int)
    e.add_argument("--json", action="store_true")
    e.add_argument("--out")
    e.add_argument("--bless", action="store_true", help="write into the golden directory")
    e.set_defaults(func=cmd_emit)

    c = sub.add_parser("classify", help="fibre table of an invariant")
    c.add_argument("path")
    c.set_defaults(func=cmd_classify)

    for name, fn, text in (("euler", cmd_euler, "check the relations of an Euler diagram"),
                           ("solve", cmd_solve, "fill in unknown Euler numbers")):
        s = sub.add_parser(name, help=text)
        s.add_argument("path")
        s.add_argument("--json", action="store_true")
        s.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LgError as exc:
        sys.stderr.write(f"error {exc.code}: {exc.message}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
