"""Command-line front end: generate, descend, sweep, certify, report, validate.

Every command can append a JSON record to a JSONL file (--output) or print it
(--json).  Records carry a schema tag and a timestamp; everything else is a
pure function of the configuration, so reruns diff cleanly.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .curves import BadReduction, a_q
from .descent import (
    GRID_CLASSES, GRID_INSTANCES, ORACLE, PAPER_FAITHFUL, PRINTED_GRIDS, SIDES, CellKind,
    DescentError, InconclusiveCell, compare_grids, printed_consistency, printed_reference,
    rank_certificate, render_grid,
)
from .families import (
    FAMILIES, ROMAN, FamilyError, default_jobs, instantiate, rank_one_case, rank_table_report,
    sweep, sweep_instances,
)
from .ingest import CurveDatabase, IngestError, fetch
from .intcore import OutOfRange, is_prime
from .localsolve import DEFAULT_DEPTH, Torsor, verify_witness
from .watkins import (
    CERTIFIED_PATHS, GAPS, REASONS, CurveData, WatkinsError, certification_path, certify_twist,
    rank_bound,
)

SCHEMA = "ivorra-watkins/1"
EXIT_OK, EXIT_DOMAIN, EXIT_INCONCLUSIVE, EXIT_IO = 0, 2, 3, 4
DEFAULT_BOUND = 10**5
MODES = (PAPER_FAITHFUL, ORACLE, "both")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --- records ----------------------------------------------------------------


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def make_record(command: str, config: dict, result) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": config,
        "result": result,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def strip_timestamp(rec: dict) -> dict:
    return {k: v for k, v in rec.items() if k != "timestamp"}


def load_records(path: str | Path) -> list[dict]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except ValueError as exc:
            raise CliError(f"{path}:{n}: not JSON ({exc})", EXIT_DOMAIN) from exc
    return out


def _place_prime(place: str) -> int | None:
    if place.startswith("Q_"):
        try:
            return int(place[2:])
        except ValueError:
            return None
    return None


def validate_record(rec: dict) -> list[str]:
    """Problems found when re-checking a record; empty means it validates."""
    problems = []
    if rec.get("schema") != SCHEMA:
        problems.append(f"schema is {rec.get('schema')!r}, expected {SCHEMA!r}")
    for key in ("command", "config", "result"):
        if key not in rec:
            problems.append(f"missing field {key!r}")
    if problems or rec["command"] != "descend":
        return problems
    for mode, cert in rec["result"]["certificates"].items():
        for side, table in cert["tables"].items():
            for cls, cell in table["cells"].items():
                body = cell.get("certificate")
                if not body:
                    continue
                for place, v in body["places"].items():
                    w = v.get("witness")
                    p = _place_prime(place)
                    if w is None or p is None:
                        continue
                    if not verify_witness(Torsor(*v["equation"]), p, w):
                        problems.append(f"{mode}/{side}/{cls}: witness at {place} does not verify")
                in_cell = cell["status"] in ("Green", "OracleIn")
                if in_cell and body["status"] != "Solvable":
                    problems.append(f"{mode}/{side}/{cls}: marked in but certificate says {body['status']}")
    return problems


def digest(obj) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()[:16]


# --- argument helpers -------------------------------------------------------


def _selector(args) -> dict:
    return {"type": args.type, "p": args.p, "k": args.k, "sign": args.sign}


def _instance(args):
    return instantiate(args.type, args.p, args.k, args.sign)


def _emit(args, rec: dict) -> None:
    if getattr(args, "output", None):
        try:
            with open(args.output, "a") as fh:
                fh.write(dumps(rec) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from exc
    if getattr(args, "json", False):
        print(dumps(rec))


def _say(args, text: str) -> None:
    if not getattr(args, "json", False):
        print(text)


# --- generate -----------------------------------------------------------------


def cmd_generate(args) -> int:
    inst = _instance(args)
    case = rank_one_case(inst)
    table = rank_table_report(inst)
    result = {"instance": inst.to_json(), "rank_one_case": case.to_json(), "rank_table": table.to_json()}
    lines = [
        f"type {inst.type}  p = {inst.p}  k = {inst.k}  sign = {inst.sign:+d}",
        f"alpha = {inst.alpha}  beta = {inst.beta}",
        f"E : y^2 = x^3 + ({inst.a})x^2 + ({inst.b})x",
        f"E': y^2 = x^3 + ({inst.pair.E_dual.a})x^2 + ({inst.pair.E_dual.b})x",
        f"conductor exponents m in {list(inst.m_set)}",
        f"p = {inst.p % 8} (mod 8)",
        f"rank <= 1 case: {case.case if case.applies else 'none'} ({case.reason})",
    ]
    for row in table.rows:
        lines.append(f"known behaviour [{row.conditions}]: {row.verdict}")
    if not table.consistent:
        lines.append(f"warning: p mod 8 = {table.p_mod_8} is outside the forced classes {sorted(table.forced_p_mod_8 or [])}")
    lines += [f"warning: {w}" for w in inst.warnings]
    _say(args, "\n".join(lines))
    _emit(args, make_record("generate", _selector(args), result))
    return EXIT_OK


# --- descend ------------------------------------------------------------------


def _descend(inst, modes, depth, jobs):
    certs = {m: rank_certificate(inst, m, depth=depth, jobs=jobs) for m in modes}
    ref = printed_reference(inst)
    disc = {}
    if ref is not None:
        for m, c in certs.items():
            disc[f"printed_vs_{m}"] = [d.to_json() for d in compare_grids(ref, c.tables)]
    if len(certs) == 2:
        pf = certs[PAPER_FAITHFUL].tables
        codes = {s: {t.label(d): t.cells[d].short() for d in t.ambient} for s, t in pf.items()}
        disc["PaperFaithful_vs_Oracle"] = [d.to_json() for d in compare_grids(codes, certs[ORACLE].tables)]
    return certs, ref, disc


def _consistency_lines(check: dict | None) -> list[str]:
    if check is None:
        return []
    line = (f"printed grid bounds the rank by {check['printed_rank_bound']} "
            f"(dims {check['printed_dims']['phi']} + {check['printed_dims'][SIDES[1]]})")
    out = [line]
    if not check["consistent"]:
        out.append("INCONSISTENT: known behaviour says " + "; ".join(check["known_behaviour"]))
    return out


def cmd_descend(args) -> int:
    inst = _instance(args)
    modes = (PAPER_FAITHFUL, ORACLE) if args.mode == "both" else (args.mode,)
    try:
        certs, ref, disc = _descend(inst, modes, args.depth, args.jobs)
    except InconclusiveCell as exc:
        raise CliError(str(exc), EXIT_INCONCLUSIVE) from exc
    out = []
    for m, c in certs.items():
        out.append(render_grid(c.tables, f"{m}: {inst.type} p={inst.p} k={inst.k} sign={inst.sign:+d}"))
        out.append(f"naive bound {c.naive_bound}, Selmer bound {c.selmer_bound}, final bound {c.final_bound}")
        if c.conditional_watkins:
            out.append(f"Watkins for the base curve: {c.conditional_watkins['kind']}")
        out.append("")
    for name, items in disc.items():
        out.append(f"discrepancies {name}: {len(items)}")
        for d in items:
            out.append(f"  {d['side']:5} {d['class']:>4}  printed/ref {d['reference']:8} observed {d['observed']:10} {d['severity']}")
    check = printed_consistency(inst)
    out += _consistency_lines(check)
    _say(args, "\n".join(out))
    config = {**_selector(args), "mode": args.mode, "depth": args.depth}
    result = {
        "certificates": {m: c.to_json() for m, c in certs.items()},
        "printed_row": ref,
        "printed_consistency": check,
        "discrepancies": disc,
    }
    _emit(args, make_record("descend", config, result))
    return EXIT_OK


# --- sweep --------------------------------------------------------------------


def cmd_sweep(args) -> int:
    primes = sweep(args.type, args.k, args.bound, jobs=args.jobs)
    _emit(args, make_record("sweep", {"type": args.type, "k": args.k, "bound": args.bound}, primes))
    if not args.json:
        print(json.dumps(primes))
    return EXIT_OK


# --- certify ------------------------------------------------------------------


def _member_curves(inst, member: str):
    members = ("E", "E_dual") if member == "both" else (member,)
    return [(m, inst.pair.E if m == "E" else inst.pair.E_dual) for m in members]


def _data_for(args, C) -> CurveData | None:
    if args.manin_constant is not None or args.modular_degree is not None:
        if args.manin_constant is None or args.modular_degree is None:
            raise CliError("--manin-constant and --modular-degree go together", EXIT_DOMAIN)
        return CurveData("manual", C.a, C.b, args.modular_degree, args.manin_constant,
                         provenance="command line")
    if args.fetch:
        for label in args.label or []:
            row = fetch(label, args.data_url)
            if (row.a, row.b) == (C.a, C.b):
                return row
        return None
    if args.data:
        return CurveDatabase.from_csv(args.data).lookup(C.a, C.b)
    return None


def cmd_certify(args) -> int:
    inst = _instance(args)
    q = args.q
    if q < 5 or not is_prime(q):
        raise CliError(f"q = {q} must be a prime >= 5", EXIT_DOMAIN)
    try:
        a_q(inst.pair.E, q)
    except BadReduction as exc:
        raise CliError(f"q = {q} is a prime of bad reduction: {exc}", EXIT_DOMAIN) from exc
    certs, missing, lines = [], [], []
    for member, C in _member_curves(inst, args.member):
        data = _data_for(args, C)
        if data is None:
            missing.append(member)
            lines.append(f"{member} ({C.a}, {C.b}): no curve data")
            continue
        cert = certify_twist(inst, data, q, args.twist_sign, member,
                             rank_is_one=args.rank_is_one, base_watkins=args.base_watkins)
        certs.append(cert)
        lines.append(
            f"{member} ({C.a}, {C.b}) [{data.label}, c_E = {data.manin_constant}, m_E = {data.modular_degree}]: "
            f"{cert.verdict} via {cert.path}; a_q = {cert.a_q}, v2 >= {cert.v2_effective}, "
            f"rank bound {cert.rank_bound}; {cert.reason}"
        )
    _say(args, "\n".join(lines))
    if not certs:
        raise CliError("no curve data for any member; pass --data, --fetch or --manin-constant/--modular-degree",
                       EXIT_DOMAIN)
    config = {**_selector(args), "q": q, "twist_sign": args.twist_sign, "member": args.member}
    result = {"certificates": [c.to_json() for c in certs], "missing_data": missing}
    _emit(args, make_record("certify", config, result))
    return EXIT_OK


# --- report -------------------------------------------------------------------


def _family_section(bound: int) -> list[str]:
    out = [f"## Family instances up to {bound}", ""]
    for label in ROMAN:
        T = FAMILIES[label]
        insts = sweep_instances(label, bound)
        out.append(f"### {label}: beta = {T.beta_text}, a = {T.a_text}, b = {T.b_text}, k: {T.k_text or 'none'}")
        if not insts:
            out += ["", f"no instances ≤ {bound}", ""]
            continue
        out += ["", f"{len(insts)} instances; first {min(len(insts), 12)}:", "",
                "| p | k | sign | E | E' |", "|---|---|---|---|---|"]
        for i in insts[:12]:
            out.append(f"| {i.p} | {i.k if i.k is not None else '-'} | {i.sign:+d} | "
                       f"[{i.a}, {i.b}] | [{i.pair.E_dual.a}, {i.pair.E_dual.b}] |")
        out.append("")
    return out


def _cell_digests(cert) -> list[str]:
    out = []
    for side in SIDES:
        t = cert.tables[side]
        for d in t.ambient:
            c = t.cells[d]
            if c.kind in (CellKind.RED, CellKind.ORACLE_OUT):
                out.append(f"- {cert.mode} {side} {t.label(d)}: {c.short()} digest {digest(c.to_json())}")
    return out


def _grid_section(depth: int) -> list[str]:
    out = ["## Descent grids", ""]
    for key, sel in GRID_INSTANCES.items():
        inst = instantiate(*sel)
        certs, ref, disc = _descend(inst, (PAPER_FAITHFUL, ORACLE), depth, 1)
        name = f"{key[0]} {key[1]}".strip()
        out.append(f"### {name}: p = {inst.p}, k = {inst.k}, sign = {inst.sign:+d}, E = [{inst.a}, {inst.b}]")
        out.append("")
        out.append("printed row:")
        out.append("")
        out.append("| side | " + " | ".join(GRID_CLASSES) + " |")
        out.append("|---" * (len(GRID_CLASSES) + 1) + "|")
        for side in SIDES:
            out.append(f"| {side} | " + " | ".join(ref[side][c] for c in GRID_CLASSES) + " |")
        out.append("")
        for m, c in certs.items():
            out.append(render_grid(c.tables, m))
            out.append("")
            out.append(f"final bound {c.final_bound} (naive {c.naive_bound}, Selmer {c.selmer_bound})")
            out.append("")
        for label, items in disc.items():
            hard = [d for d in items if d["severity"] == "contradiction"]
            out.append(f"{label}: {len(items)} discrepancies, {len(hard)} contradictions")
            for d in hard:
                out.append(f"- {d['side']} {d['class']}: {d['reference']} vs {d['observed']}")
        out += _consistency_lines(printed_consistency(inst))
        out.append("")
        out.append("refutation digests:")
        for c in certs.values():
            out += _cell_digests(c)
        out.append("")
    return out


def _certification_section() -> list[str]:
    out = ["## Twist certification matrix", "",
           "| family | c_E | q mod 8 | a_q | path | verdict |", "|---|---|---|---|---|---|"]
    for trick in (True, False):
        for c_E in (1, 2):
            for r in (1, 3, 5, 7):
                for aq in (0, 2):
                    path = certification_path(trick, c_E, r, aq)
                    verdict = "Certified" if path in CERTIFIED_PATHS else "Unknown: " + REASONS[path]
                    out.append(f"| {'trick' if trick else 'other'} | {'1' if c_E == 1 else '>1'} | {r} | "
                               f"{'0' if aq == 0 else '≠0'} | {path} | {verdict} |")
    out += ["", f"rank bounds: trick family {rank_bound('I')}, others {rank_bound('VIII')}", ""]
    return out


def _dictionary_section() -> list[str]:
    out = ["## Label dictionary", "", "| type | Ivorra labels | m |", "|---|---|---|"]
    for label in ROMAN:
        T = FAMILIES[label]
        out.append(f"| {label} | {', '.join(T.ivorra_labels)} | {', '.join(map(str, T.m_set))} |")
    out.append("")
    return out


def build_report(bound: int, depth: int = DEFAULT_DEPTH) -> str:
    lines = ["# Ivorra curves: families, descent grids, twist certificates", ""]
    lines += _family_section(bound)
    lines += _grid_section(depth)
    lines += _certification_section()
    lines += _dictionary_section()
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    try:
        text = build_report(args.bound, args.depth)
    except InconclusiveCell as exc:
        raise CliError(str(exc), EXIT_INCONCLUSIVE) from exc
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from exc
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- validate -----------------------------------------------------------------


def cmd_validate(args) -> int:
    bad = 0
    for n, rec in enumerate(load_records(args.path), 1):
        problems = validate_record(rec)
        for msg in problems:
            print(f"record {n}: {msg}")
        bad += bool(problems)
    print(f"{args.path}: {'ok' if not bad else f'{bad} bad record(s)'}")
    return EXIT_OK if not bad else EXIT_DOMAIN


# --- parser -------------------------------------------------------------------


def _add_selector(sp, k_required=False):
    sp.add_argument("--type", required=True, choices=ROMAN)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=None, required=k_required)
    sp.add_argument("--sign", type=int, default=1, choices=(1, -1))


def _add_output(sp):
    sp.add_argument("--output", help="append the JSON record to this JSONL file")
    sp.add_argument("--json", action="store_true", help="print the JSON record instead of text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ivorra-watkins", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="instantiate a family member")
    _add_selector(sp)
    _add_output(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("descend", help="2-isogeny descent grid and rank bound")
    _add_selector(sp)
    sp.add_argument("--mode", choices=MODES, default=ORACLE)
    sp.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    sp.add_argument("--jobs", type=int, default=None)
    _add_output(sp)
    sp.set_defaults(func=cmd_descend)

    sp = sub.add_parser("sweep", help="primes p <= bound giving a family member")
    sp.add_argument("--type", required=True, choices=ROMAN)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    sp.add_argument("--jobs", type=int, default=None)
    _add_output(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("certify", help="Watkins certificate for the twist by +-q")
    _add_selector(sp)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--twist-sign", type=int, default=1, choices=(1, -1))
    sp.add_argument("--member", choices=("E", "E_dual", "both"), default="both")
    sp.add_argument("--data", help="CSV with label,a,b,modular_degree,manin_constant,rank")
    sp.add_argument("--fetch", action="store_true", help="fetch rows over HTTP (needs --label)")
    sp.add_argument("--label", action="append", help="curve label to fetch; repeatable")
    sp.add_argument("--data-url", default=None)
    sp.add_argument("--manin-constant", type=int, default=None)
    sp.add_argument("--modular-degree", type=int, default=None)
    sp.add_argument("--rank-is-one", action="store_true", help="assert the base curve has rank exactly 1")
    sp.add_argument("--base-watkins", action="store_true", help="assert Watkins holds for the base curve")
    _add_output(sp)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("report", help="markdown report")
    sp.add_argument("--suite", choices=("paper",), default="paper")
    sp.add_argument("--bound", type=int, default=10**4)
    sp.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("validate", help="re-check the records of a JSONL file")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 0) is None:
        args.jobs = default_jobs()
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InconclusiveCell as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (IngestError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FamilyError, WatkinsError, BadReduction, DescentError, OutOfRange, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
