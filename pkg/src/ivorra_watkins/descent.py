"""Explicit 2-descent via the 2-isogeny: Selmer grids, closure, dimension bounds, rank bounds.

Side "phi" uses torsors on the dual curve's coefficients (its torsion image is
the squarefree part of a^2 - 4b); side "phi'" uses torsors on E itself (torsion
image squarefree part of b).
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .curves import CurvePair, torsor
from .families import FamilyInstance, minus64_fourth_power
from .intcore import factorize, omega, squarefree_part
from .localsolve import DEFAULT_DEPTH, Status, solvable_everywhere

SIDES = ("phi", "phi'")
PAPER_FAITHFUL = "PaperFaithful"
ORACLE = "Oracle"


class DescentError(ValueError):
    pass


class InconclusiveCell(DescentError):
    pass


class ClosureInconsistency(DescentError):
    pass


class CellKind(str, Enum):
    GREEN = "Green"
    RED = "Red"
    BLUE = "Blue"
    ORACLE_IN = "OracleIn"
    ORACLE_OUT = "OracleOut"


@dataclass
class Cell:
    kind: CellKind
    place: str | None = None
    justification: str = ""
    certificate: dict | None = None

    @property
    def is_in(self) -> bool:
        return self.kind in (CellKind.GREEN, CellKind.ORACLE_IN)

    @property
    def is_out(self) -> bool:
        return self.kind in (CellKind.RED, CellKind.ORACLE_OUT)

    def short(self) -> str:
        if self.kind is CellKind.BLUE:
            return "B"
        if self.kind is CellKind.ORACLE_IN:
            return "In"
        tag = {"Green": "G", "Red": "R", "OracleOut": "Out"}[self.kind.value]
        return f"{tag}({self.place})" if self.place else tag

    def to_json(self) -> dict:
        out = {"status": self.kind.value, "place": self.place, "justification": self.justification}
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


# --- the ambient group ----------------------------------------------------


def mul(x: int, y: int) -> int:
    """Product in Q^*/Q^*2 on squarefree representatives."""
    return squarefree_part(x * y)


def support_primes(pair: CurvePair) -> list[int]:
    E = pair.E
    return sorted({2} | set(factorize(E.b * E.c)))


def support_sigma(pair: CurvePair) -> list[int]:
    """Squarefree classes supported on -1 and the bad primes, in the order 1, -1, 2, -2, p, -p, ..."""
    primes = support_primes(pair)
    out = []
    for mask in range(1 << len(primes)):
        m = 1
        for i, q in enumerate(primes):
            if mask >> i & 1:
                m *= q
        out.extend([m, -m])
    return out


def span(gens) -> set[int]:
    group = {1}
    for g in gens:
        group |= {mul(g, h) for h in group}
    return group


@dataclass(frozen=True)
class TorsionImages:
    delta_O: int
    delta_00_phi: int
    delta_00_phiprime: int

    def for_side(self, side: str) -> int:
        return self.delta_00_phi if side == "phi" else self.delta_00_phiprime


def torsion_images(pair: CurvePair) -> TorsionImages:
    return TorsionImages(1, squarefree_part(pair.E.c), squarefree_part(pair.E.b))


def group_closure(green: set[int], red: set[int], ambient) -> set[int]:
    """Red classes augmented by everything that differs from a red class by a green one.

    If x * g is out for some g in the subgroup generated by the green classes, so is x.
    """
    amb = set(ambient)
    G = span(green)
    clash = G & set(red)
    if clash:
        raise ClosureInconsistency(f"classes {sorted(clash)} are both generated by green cells and red")
    return {x for x in amb if any(mul(x, g) in red for g in G)}


def _subgroup_dims(ambient: list[int], green: set[int], red: set[int]) -> int:
    """Dimension of the largest subgroup containing green and missing every red class."""
    start = frozenset(span(green))
    if start & red:
        raise ClosureInconsistency("green classes generate a red class")
    best = start
    seen = {start}
    stack = [start]
    while stack:
        H = stack.pop()
        for x in ambient:
            if x in H or x in red:
                continue
            H2 = frozenset(H | {mul(x, h) for h in H})
            if H2 in seen or H2 & red:
                continue
            seen.add(H2)
            if len(H2) > len(best):
                best = H2
            stack.append(H2)
    return len(best).bit_length() - 1


# --- the grid -------------------------------------------------------------


def side_curve(pair: CurvePair, side: str):
    if side == "phi":
        return pair.E_dual
    if side == "phi'":
        return pair.E
    raise DescentError(f"side must be one of {SIDES}, got {side!r}")


@dataclass
class SelmerTable:
    side: str
    mode: str
    pair: CurvePair
    ambient: list[int]
    cells: dict[int, Cell]
    dim_lower: int
    dim_upper: int
    labels: dict[int, str] = field(default_factory=dict)

    def label(self, d: int) -> str:
        return self.labels.get(d, str(d))

    def in_set(self) -> set[int]:
        return {d for d, c in self.cells.items() if c.is_in}

    def out_set(self) -> set[int]:
        return {d for d, c in self.cells.items() if c.is_out}

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "mode": self.mode,
            "curve": [side_curve(self.pair, self.side).a, side_curve(self.pair, self.side).b],
            "cells": {self.label(d): self.cells[d].to_json() for d in self.ambient},
            "dim_lower": self.dim_lower,
            "dim_upper": self.dim_upper,
        }


def sigma_labels(pair: CurvePair, p: int | None) -> dict[int, str]:
    out = {}
    for d in support_sigma(pair):
        if p is None or d % p:
            out[d] = str(d)
            continue
        m = d // p
        out[d] = {1: "p", -1: "-p", 2: "2p", -2: "-2p"}.get(m, f"{m}p")
    return out


def _finish(side, mode, pair, ambient, cells, labels) -> SelmerTable:
    green = {d for d, c in cells.items() if c.kind is CellKind.GREEN}
    red = {d for d, c in cells.items() if c.is_out}
    closed = group_closure(green, red, ambient)
    for d in sorted(closed - red, key=ambient.index):
        c = cells[d]
        if c.kind is CellKind.ORACLE_IN:
            raise ClosureInconsistency(f"class {d} is locally solvable but differs from an obstructed class by a global one")
        cells[d] = Cell(CellKind.RED, "grp", "product of a green class and an obstructed class")
    green_all = {d for d, c in cells.items() if c.is_in and c.kind is CellKind.GREEN}
    dim_lower = len(span(green_all)).bit_length() - 1
    dim_upper = _subgroup_dims(ambient, green_all, closed)
    return SelmerTable(side, mode, pair, ambient, cells, dim_lower, dim_upper, labels)


def _green_cells(pair: CurvePair, side: str) -> dict[int, Cell]:
    t = torsion_images(pair).for_side(side)
    cells = {1: Cell(CellKind.GREEN, "δ(O)", "image of the identity")}
    if t != 1:
        cells[t] = Cell(CellKind.GREEN, "δ(0,0)", "image of the 2-torsion point (0,0)")
    return cells


# --- obstructions proved by hand -------------------------------------------


@dataclass(frozen=True)
class Rule:
    side: str
    types: frozenset
    classes: tuple[str, ...]
    place: str
    reason: str
    when: object = None  # optional predicate on the instance

    def applies(self, inst: FamilyInstance) -> bool:
        return inst.type in self.types and (self.when is None or self.when(inst))


def _types(*labels):
    return frozenset(labels)


def _p_not_1_mod_8(inst):
    return inst.p % 8 != 1


RULES: list[Rule] = [
    # the Q_2 obstructions on the phi side
    Rule("phi", _types("XVIII", "XIX"), ("-1",), "Q_2",
         "ord_2 of the quartic forces w, z integral; 1 = -w^2 mod 4 is impossible"),
    Rule("phi", _types("X"), ("2", "-2"), "Q_2",
         "only odd square mod 8 is 1"),
    Rule("phi", _types("VIII"), ("2", "-2"), "Q_2",
         "w = 2W, then 4 = 2 alpha mod 8 with alpha odd", lambda i: i.k == 2),
    Rule("phi", _types("XVI"), ("2", "-2", "2p", "-2p"), "Q_2",
         "ord_2 of the right side is even for every ord_2(z)"),
    Rule("phi", _types("XVII", "XIX"), ("p", "-p"), "Q_2",
         "w^2 = p mod 8 with p != 1 mod 8", _p_not_1_mod_8),
    Rule("phi", _types("XII", "XVIII"), ("p", "-p", "2p", "-2p"), "Q_p",
         "z in pZ_p then w in pZ_p forces p^2 = 0 mod p^3"),
    Rule("phi", _types("I"), ("2", "-2"), "Q_2",
         "refinement for conductor 8p when p = 9 mod 16",
         lambda i: i.p % 16 == 9 and i.k == 5),
    # phi' side
    Rule("phi'", _types("XIV"), ("-1",), "Q_2",
         "z = zeta/2 leads to 2 alpha = 0 mod 4 with alpha odd"),
    Rule("phi'", _types("VIII"), ("2", "2p"), "Q_2",
         "w = 2W, z = zeta/2 leads to 2 = 2 + alpha mod 8", lambda i: i.k == 2),
    Rule("phi'", _types("XVII"), ("2",), "Q_2",
         "z = zeta/2 leads to 4 alpha = 0 mod 8 with alpha odd"),
    Rule("phi'", _types("X", "XIV", "XVI", "XVII", "XIX"), ("p", "-p", "2p", "-2p"), "Q_p",
         "z in pZ_p then w in pZ_p forces p^2 = 0 mod p^3"),
    Rule("phi'", _types("XII"), ("p", "-p"), "Q_p",
         "w^4 = -64 z^4 mod p contradicts -64 not a fourth power",
         lambda i: i.k == 2 and not minus64_fourth_power(i.p)),
]


def _class_value(label: str, p: int) -> int:
    sign = -1 if label.startswith("-") else 1
    body = label.lstrip("-")
    if body.endswith("p"):
        coef = int(body[:-1]) if body[:-1] else 1
        return sign * coef * p
    return sign * int(body)


def real_rule(pair: CurvePair, side: str) -> tuple[str, ...]:
    """Classes killed over R by a negative discriminant, as argued for d = -1, -2 (and -p on phi)."""
    if side == "phi" and pair.E.b < 0:
        return ("-1", "-2", "-p")
    if side == "phi'" and pair.E.c < 0:
        return ("-1", "-2")
    return ()


def proved_obstructions(inst: FamilyInstance, side: str) -> dict[int, tuple[str, str]]:
    out: dict[int, tuple[str, str]] = {}
    for lab in real_rule(inst.pair, side):
        out[_class_value(lab, inst.p)] = ("R", "discriminant of the quadratic in z^2 is negative")
    for r in RULES:
        if r.side == side and r.applies(inst):
            for lab in r.classes:
                out.setdefault(_class_value(lab, inst.p), (r.place, r.reason))
    return out


def proved_table(inst: FamilyInstance, side: str) -> SelmerTable:
    pair = inst.pair
    ambient = support_sigma(pair)
    labels = sigma_labels(pair, inst.p)
    cells = _green_cells(pair, side)
    for d, (place, why) in proved_obstructions(inst, side).items():
        if d in cells:
            raise ClosureInconsistency(f"rule marks the torsion class {d} as obstructed")
        cells[d] = Cell(CellKind.RED, place, why)
    for d in ambient:
        cells.setdefault(d, Cell(CellKind.BLUE, None, "not analysed"))
    return _finish(side, PAPER_FAITHFUL, pair, ambient, cells, labels)


# --- oracle mode ----------------------------------------------------------


def _oracle_cell(args):
    C, d, bad, depth = args
    return solvable_everywhere(torsor(C, d), bad, max_depth=depth)


def _pick_place(names: list[str]) -> str:
    order = sorted(names, key=lambda n: (n != "R", n != "Q_2", len(n), n))
    return order[0]


def oracle_table(pair: CurvePair, side: str, depth: int = DEFAULT_DEPTH, p: int | None = None,
                 jobs: int = 1) -> SelmerTable:
    C = side_curve(pair, side)
    ambient = support_sigma(pair)
    labels = sigma_labels(pair, p)
    bad = set(support_primes(pair))
    greens = _green_cells(pair, side)
    work = [(C, d, bad, depth) for d in ambient]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(_oracle_cell, work))
    else:
        verdicts = [_oracle_cell(w) for w in work]
    cells: dict[int, Cell] = {}
    for d, v in zip(ambient, verdicts):
        cert = v.to_json()
        status = v.status
        if status is Status.INCONCLUSIVE:
            raise InconclusiveCell(
                f"class {d} on side {side} is undecided at depth {depth}; rerun with a larger --depth"
            )
        if d in greens:
            if status is not Status.SOLVABLE:
                raise ClosureInconsistency(f"torsion class {d} reported obstructed at {v.obstructions}")
            cells[d] = Cell(CellKind.GREEN, greens[d].place, greens[d].justification, cert)
        elif status is Status.SOLVABLE:
            cells[d] = Cell(CellKind.ORACLE_IN, None, "locally solvable at every place checked", cert)
        else:
            place = _pick_place(v.obstructions)
            if p is not None and place == f"Q_{p}":
                place = "Q_p"
            cells[d] = Cell(CellKind.ORACLE_OUT, place, f"no local points at {', '.join(v.obstructions)}", cert)
    return _finish(side, ORACLE, pair, ambient, cells, labels)


def selmer_table(pair_or_inst, side: str, mode: str = ORACLE, depth: int = DEFAULT_DEPTH,
                 jobs: int = 1) -> SelmerTable:
    inst = pair_or_inst if isinstance(pair_or_inst, FamilyInstance) else None
    pair = inst.pair if inst else pair_or_inst
    if mode == PAPER_FAITHFUL:
        if inst is None:
            raise DescentError("PaperFaithful mode needs a family instance")
        return proved_table(inst, side)
    if mode == ORACLE:
        return oracle_table(pair, side, depth, inst.p if inst else None, jobs)
    raise DescentError(f"mode must be {PAPER_FAITHFUL} or {ORACLE}, got {mode!r}")


# --- rank bounds ------------------------------------------------------------


@dataclass(frozen=True)
class ReductionData:
    additive: frozenset
    multiplicative: frozenset

    @classmethod
    def ivorra(cls, p: int, twist_q: int | None = None) -> "ReductionData":
        add = {2} if twist_q is None else {2, twist_q}
        return cls(frozenset(add), frozenset({p}))


def naive_bound(pair: CurvePair, red: ReductionData | None = None) -> int:
    E = pair.E
    bound = omega(E.c) + omega(E.b) - 1
    if red is not None:
        bound = min(bound, len(red.multiplicative) + 2 * len(red.additive) - 1)
    return max(bound, 0)


@dataclass
class RankCertificate:
    pair: CurvePair
    naive_bound: int
    selmer_bound: int
    final_bound: int
    mode: str
    tables: dict[str, SelmerTable]
    instance: FamilyInstance | None = None
    conditional_watkins: dict | None = None

    def to_json(self) -> dict:
        return {
            "instance": self.instance.to_json() if self.instance else None,
            "E": [self.pair.E.a, self.pair.E.b],
            "E_dual": [self.pair.E_dual.a, self.pair.E_dual.b],
            "mode": self.mode,
            "naive_bound": self.naive_bound,
            "selmer_bound": self.selmer_bound,
            "final_bound": self.final_bound,
            "dim_sum": sum(t.dim_upper for t in self.tables.values()),
            "tables": {s: t.to_json() for s, t in self.tables.items()},
            "conditional_watkins": self.conditional_watkins,
        }


def rank_certificate(pair_or_inst, mode: str = ORACLE, depth: int = DEFAULT_DEPTH,
                     reduction: ReductionData | None = None, jobs: int = 1) -> RankCertificate:
    from .watkins import conditional_watkins

    inst = pair_or_inst if isinstance(pair_or_inst, FamilyInstance) else None
    pair = inst.pair if inst else pair_or_inst
    if reduction is None and inst is not None:
        reduction = ReductionData.ivorra(inst.p)
    tables = {s: selmer_table(pair_or_inst, s, mode, depth, jobs) for s in SIDES}
    selmer = max(0, tables["phi"].dim_upper + tables["phi'"].dim_upper - 2)
    naive = naive_bound(pair, reduction)
    cert = RankCertificate(pair, naive, selmer, min(naive, selmer), mode, tables, inst)
    cert.conditional_watkins = conditional_watkins(cert)
    return cert


# --- comparing grids --------------------------------------------------------


@dataclass(frozen=True)
class Discrepancy:
    side: str
    cls: str
    reference: str
    observed: str
    severity: str  # "contradiction", "unsupported", "resolved" or "place"

    def to_json(self) -> dict:
        return {"side": self.side, "class": self.cls, "reference": self.reference,
                "observed": self.observed, "severity": self.severity}


def compare_grids(reference: dict[str, dict[str, str]], tables: dict[str, SelmerTable]) -> list[Discrepancy]:
    """Reference cells are short codes G/R/B with optional place, e.g. 'R(Q_2)'."""
    out = []
    for side in SIDES:
        t = tables[side]
        inv = {t.label(d): t.cells[d] for d in t.ambient}
        for cls, ref in reference.get(side, {}).items():
            cell = inv[cls]
            ref_kind = ref[0]
            if ref_kind == "B":
                if cell.kind is not CellKind.BLUE:
                    out.append(Discrepancy(side, cls, ref, cell.short(), "resolved"))
                continue
            if ref_kind == "G" and cell.is_in:
                continue
            if cell.kind is CellKind.BLUE:
                out.append(Discrepancy(side, cls, ref, cell.short(), "unsupported"))
                continue
            if ref_kind == "R" and cell.is_out:
                ref_place = ref[2:-1] if "(" in ref else None
                if ref_place and cell.place and ref_place != cell.place:
                    out.append(Discrepancy(side, cls, ref, cell.short(), "place"))
                continue
            out.append(Discrepancy(side, cls, ref, cell.short(), "contradiction"))
    return out


# The printed descent grids, one code per class in the order 1, -1, 2, -2, p, -p, 2p, -2p.
_PRINTED_ROWS = {
    ("VIII", "k=2"): ("G R(R) R(Q_2) R(Q_2) G R(grp) R(grp) R(grp)",
                      "G G R(Q_2) R(grp) B B R(Q_p) R(grp)"),
    ("X", "k even"): ("G B R(Q_2) R(Q_2) B G R(grp) R(grp)",
                      "G R(R) B R(R) R(Q_p) R(Q_p) R(Q_p) R(Q_p)"),
    ("X", "k odd"): ("G B R(Q_2) R(Q_2) B G R(grp) R(grp)",
                     "G R(R) G R(R) R(Q_p) R(Q_p) R(Q_p) R(Q_p)"),
    ("XII", "k=2"): ("G G B B R(Q_p) R(Q_p) R(Q_p) R(Q_p)",
                     "G R(R) G R(R) R(Q_p) R(Q_p) R(grp) R(grp)"),
    ("XIV", ""): ("G B R(Q_2) R(Q_2) B B R(Q_2) R(Q_2)",
                  "G R(Q_2) G R(grp) R(Q_p) R(Q_p) R(Q_p) R(Q_p)"),
    ("XVI", ""): ("G R(R) R(Q_2) R(Q_2) G R(grp) R(grp) R(grp)",
                  "G B B G R(Q_p) R(grp) R(grp) R(grp)"),
    ("XVII", "k=1"): ("G R(R) R(grp) R(R) R(Q_p) R(Q_p) G R(grp)",
                      "G R(grp) R(Q_2) G R(Q_p) R(Q_p) R(Q_p) R(Q_p)"),
    ("XVIII", "k=1"): ("G R(Q_2) R(grp) G R(Q_p) R(Q_p) R(Q_p) R(Q_p)",
                       "G R(R) B R(R) B R(grp) G R(grp)"),
    ("XIX", "k=1"): ("G R(Q_2) R(grp) R(grp) R(Q_2) R(Q_2) G R(grp)",
                     "G B G B R(Q_p) R(Q_p) R(Q_p) R(Q_p)"),
    ("XIX", "k=2"): ("G R(Q_2) G R(grp) R(Q_2) R(Q_2) R(grp) R(grp)",
                     "G B G B R(Q_p) R(Q_p) R(Q_p) R(Q_p)"),
}
GRID_CLASSES = ("1", "-1", "2", "-2", "p", "-p", "2p", "-2p")
PRINTED_GRIDS: dict[tuple[str, str], dict[str, dict[str, str]]] = {
    key: {side: dict(zip(GRID_CLASSES, row.split())) for side, row in zip(SIDES, rows)}
    for key, rows in _PRINTED_ROWS.items()
}


# one hypothesis-satisfying instance per printed row (type, p, k, sign)
GRID_INSTANCES: dict[tuple[str, str], tuple] = {
    ("VIII", "k=2"): ("VIII", 173, 2, 1),
    ("X", "k even"): ("X", 31, 8, 1),
    ("X", "k odd"): ("X", 31, 5, 1),
    ("XII", "k=2"): ("XII", 29, 2, 1),
    ("XIV", ""): ("XIV", 79, 1, 1),
    ("XVI", ""): ("XVI", 83, None, 1),
    ("XVII", "k=1"): ("XVII", 163, 1, 1),
    ("XVIII", "k=1"): ("XVIII", 73, 1, 1),
    ("XIX", "k=1"): ("XIX", 31, 1, 1),
    ("XIX", "k=2"): ("XIX", 239, 2, 1),
}


def printed_key(inst: FamilyInstance) -> tuple[str, str] | None:
    """The printed grid row describing this instance, if there is one."""
    if inst.type in ("XIV", "XVI"):
        return (inst.type, "")
    if inst.type == "X":
        return ("X", "k even" if inst.k % 2 == 0 else "k odd")
    key = (inst.type, f"k={inst.k}")
    return key if key in PRINTED_GRIDS else None


def printed_reference(inst: FamilyInstance) -> dict[str, dict[str, str]] | None:
    key = printed_key(inst)
    return PRINTED_GRIDS[key] if key else None


def printed_consistency(inst: FamilyInstance) -> dict | None:
    """Rank bound implied by the printed grid (Blue counted as possibly in) against the known-rank rows."""
    from .families import rank_table_report

    ref = printed_reference(inst)
    if ref is None:
        return None
    labels = sigma_labels(inst.pair, inst.p)
    by_label = {v: k for k, v in labels.items()}
    ambient = support_sigma(inst.pair)
    dims = {}
    for side in SIDES:
        green = {by_label[c] for c, code in ref[side].items() if code.startswith("G")}
        red = {by_label[c] for c, code in ref[side].items() if code.startswith("R")}
        dims[side] = _subgroup_dims(ambient, green, red)
    bound = max(0, sum(dims.values()) - 2)
    verdicts = [r.verdict for r in rank_table_report(inst).rows]
    rank2 = any("rank 2 possible" in v for v in verdicts)
    return {
        "printed_dims": dims,
        "printed_rank_bound": bound,
        "known_behaviour": verdicts,
        "consistent": not (rank2 and bound < 2),
    }


def render_grid(tables: dict[str, SelmerTable], title: str = "") -> str:
    t0 = tables[SIDES[0]]
    cols = [t0.label(d) for d in t0.ambient]
    lines = []
    if title:
        lines.append(f"### {title}")
        lines.append("")
    lines.append("| side | " + " | ".join(cols) + " | dim |")
    lines.append("|---" * (len(cols) + 2) + "|")
    for side in SIDES:
        t = tables[side]
        row = [t.cells[d].short() for d in t.ambient]
        lines.append(f"| {side} | " + " | ".join(row) + f" | {t.dim_lower}..{t.dim_upper} |")
    return "\n".join(lines)

