"""Local solvability of the quartic torsors d w^2 = d^2 + c2 z^2 + c4 z^4.

Over R the question is a sign question on a quadratic in t = z^2.  Over Q_p we
refine residue classes of z (and of 1/z) until, on each class, the quartic's
square class is pinned down or a Hensel root appears.  Unsolvable verdicts
carry the complete list of refuted classes so they can be replayed by hand.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from math import comb

from sympy.ntheory.residue_ntheory import sqrt_mod

from .intcore import factorize, legendre, primes_up_to, squarefree_part, vp

DEFAULT_DEPTH = 12
SPOT_CHECKS = 5
_SPOT_POOL = [q for q in primes_up_to(400) if q > 2]


@dataclass(frozen=True)
class Torsor:
    """d w^2 = d^2 + c2 z^2 + c4 z^4."""

    d: int
    c2: int
    c4: int

    def __post_init__(self):
        if self.d == 0 or squarefree_part(self.d) != self.d:
            raise ValueError(f"d = {self.d} must be a nonzero squarefree integer")
        if self.c4 == 0:
            raise ValueError("c4 = 0 does not define a genus-one quartic")

    def rhs(self, z: int) -> int:
        zz = z * z
        return self.d * self.d + self.c2 * zz + self.c4 * zz * zz

    @property
    def disc(self) -> int:
        """Discriminant of the right-hand side as a quadratic in z^2."""
        return self.c2 * self.c2 - 4 * self.d * self.d * self.c4

    def rescaled(self, s: int) -> "Torsor":
        """The same curve after z -> s z."""
        return Torsor(self.d, self.c2 * s * s, self.c4 * s**4)

    def equation(self) -> list[int]:
        return [self.d, self.c2, self.c4]

    def __str__(self):
        return f"{self.d}w^2 = {self.d**2} + ({self.c2})z^2 + ({self.c4})z^4"


class Status(str, Enum):
    SOLVABLE = "Solvable"
    UNSOLVABLE = "Unsolvable"
    INCONCLUSIVE = "Inconclusive"


def place_name(p: int | None) -> str:
    return "R" if p is None else f"Q_{p}"


@dataclass
class LocalVerdict:
    torsor: Torsor
    place: str
    status: Status
    witness: dict | None = None
    refutation: list[dict] | None = None
    refutation_depth: int | None = None
    depth: int | None = None

    @property
    def solvable(self) -> bool:
        return self.status is Status.SOLVABLE

    def to_json(self) -> dict:
        out = {"equation": self.torsor.equation(), "place": self.place, "status": self.status.value}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.status is Status.UNSOLVABLE and self.refutation is not None:
            out["refutation_depth"] = self.refutation_depth
            out["refutation"] = self.refutation
        if self.status is Status.INCONCLUSIVE:
            out["depth"] = self.depth
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LocalVerdict":
        d, c2, c4 = obj["equation"]
        return cls(
            torsor=Torsor(d, c2, c4),
            place=obj["place"],
            status=Status(obj["status"]),
            witness=obj.get("witness"),
            refutation=obj.get("refutation"),
            refutation_depth=obj.get("refutation_depth"),
            depth=obj.get("depth"),
        )


# --- the real place -------------------------------------------------------


def solvable_R(T: Torsor) -> LocalVerdict:
    """Need t = z^2 >= 0 (or t = oo) with sign(d) * (d^2 + c2 t + c4 t^2) >= 0."""
    place = place_name(None)
    if T.d > 0:
        return LocalVerdict(T, place, Status.SOLVABLE, {"t": 0, "reason": "d > 0, take z = 0"})
    if T.c4 < 0:
        return LocalVerdict(T, place, Status.SOLVABLE, {"t": "oo", "reason": "c4 < 0, rhs -> -oo"})
    if T.c2 < 0 and T.disc >= 0:
        return LocalVerdict(
            T, place, Status.SOLVABLE,
            {"t": f"{-T.c2}/{2 * T.c4}", "reason": "rhs <= 0 at the vertex t = -c2/(2 c4)"},
        )
    reason = "c2 >= 0 and c4 > 0" if T.c2 >= 0 else "discriminant c2^2 - 4 d^2 c4 < 0"
    return LocalVerdict(T, place, Status.UNSOLVABLE, refutation=[{"reason": reason}], refutation_depth=0)


# --- p-adic places --------------------------------------------------------


def is_square_qp(x: int, p: int) -> bool:
    """x in (Q_p^*)^2 for a nonzero integer x."""
    v = vp(x, p)
    if v % 2:
        return False
    u = x // p**v
    if p == 2:
        return u % 8 == 1
    return legendre(u, p) == 1


def _shift(coeffs: list[int], z0: int, h: int) -> list[int]:
    """Coefficients of U(z0 + h t) from those of U(z) (low degree first)."""
    n = len(coeffs)
    out = []
    for i in range(n):
        s = 0
        for j in range(i, n):
            if coeffs[j]:
                s += comb(j, i) * coeffs[j] * z0 ** (j - i)
        out.append(s * h**i)
    return out


def _val(x: int, p: int) -> float | int:
    return float("inf") if x == 0 else vp(x, p)


def _chart_polys(T: Torsor) -> list[tuple[str, list[int], int]]:
    """U = d * quartic on each chart, with the exponent of the starting class.

    Chart "z" covers z in Z_p, chart "1/z" covers z' = 1/z in pZ_p (reversed quartic).
    U is a square in Q_p exactly when the chart has a point over that z.
    """
    d, c2, c4 = T.d, T.c2, T.c4
    return [
        ("z", [d**3, 0, d * c2, 0, d * c4], 0),
        ("1/z", [d * c4, 0, d * c2, 0, d**3], 1),
    ]


def _root_witness(chart: str, z0: int, n: int, p: int, kind: str) -> dict:
    return {"chart": chart, "z": z0, "modulus": f"{p}^{n}", "kind": kind, "w": 0}


def _square_witness(T: Torsor, chart: str, z0: int, n: int, p: int) -> dict:
    """Witness for a class on which U has constant square class; includes a w residue."""
    value = T.rhs(z0) if chart == "z" else T.d**2 * z0**4 + T.c2 * z0**2 + T.c4
    # value / d = p^(2k) u with u a unit square
    vv, vd = vp(value, p), vp(T.d, p)
    v = vv - vd
    k = v // 2
    prec = 3 if p == 2 else 1
    mod = p**prec
    unit = (value // p**vv) * pow(T.d // p**vd, -1, mod) % mod
    s = sqrt_mod(unit, mod)
    w = p**k * s
    return {
        "chart": chart,
        "z": z0,
        "modulus": f"{p}^{n}",
        "kind": "square-class",
        "value_valuation": v,
        "w": w,
        "w_modulus": f"{p}^{k + prec}",
    }


def _explore(T: Torsor, p: int, max_depth: int):
    """Depth-first refinement over both charts.

    Returns (status, witness, refuted_nodes, deepest_level).
    """
    r = 3 if p == 2 else 1
    refuted: list[dict] = []
    deepest = 0
    inconclusive = False
    for chart, U, n0 in _chart_polys(T):
        stack = [(0, n0)]
        while stack:
            z0, n = stack.pop()
            deepest = max(deepest, n)
            h = p**n
            b = _shift(U, z0, h)
            if b[0] == 0:
                return Status.SOLVABLE, _root_witness(chart, z0, n, p, "exact-root"), None, deepest
            e = vp(b[0], p)
            deriv = b[1] // h if n else b[1]
            if deriv and e > 2 * vp(deriv, p):
                return Status.SOLVABLE, _root_witness(chart, z0, n, p, "hensel-root"), None, deepest
            m = min(_val(x, p) for x in b[1:])
            node = {"chart": chart, "z": z0, "n": n}
            if m >= e + r:
                if is_square_qp(b[0], p):
                    return Status.SOLVABLE, _square_witness(T, chart, z0, n, p), None, deepest
                refuted.append({**node, "reason": "nonsquare", "valuation": e})
                continue
            if m > e and e % 2:
                refuted.append({**node, "reason": "odd-valuation", "valuation": e})
                continue
            if p == 2:
                children = [z0, z0 + h]
                node_record = {**node, "reason": "split", "children": 2}
            else:
                mu = min(e, m)
                red = [(x // p**mu) % p if x else 0 for x in b]
                roots = []
                for t in range(p):
                    val = 0
                    for c in reversed(red):
                        val = (val * t + c) % p
                    if val == 0:
                        roots.append(t)
                    elif mu % 2 == 0 and legendre(val, p) == 1:
                        return (
                            Status.SOLVABLE,
                            _square_witness(T, chart, z0 + h * t, n + 1, p),
                            None,
                            deepest,
                        )
                children = [z0 + h * t for t in roots]
                node_record = {**node, "reason": "residues", "mu": mu, "surviving": roots}
            refuted.append(node_record)
            if n + 1 > max_depth:
                if children:
                    inconclusive = True
                continue
            stack.extend((c, n + 1) for c in reversed(children))
    if inconclusive:
        return Status.INCONCLUSIVE, None, None, deepest
    return Status.UNSOLVABLE, None, refuted, deepest


def solvable_Qp(T: Torsor, p: int, max_depth: int = DEFAULT_DEPTH) -> LocalVerdict:
    status, witness, refuted, deepest = _explore(T, p, max_depth)
    v = LocalVerdict(T, place_name(p), status, witness=witness, depth=max_depth)
    if status is Status.UNSOLVABLE:
        v.refutation = refuted
        v.refutation_depth = deepest
    return v


def verify_witness(T: Torsor, p: int, witness: dict, extra: int = 4, seed: int = 0) -> bool:
    """Re-check a Q_p witness at a random point of its class, at higher precision."""
    chart, z0 = witness["chart"], witness["z"]
    n = int(witness["modulus"].split("^")[1])
    if chart == "z":
        def G(z):
            return T.rhs(z)
    else:
        def G(z):
            return T.d**2 * z**4 + T.c2 * z**2 + T.c4
    kind = witness["kind"]
    if kind == "exact-root":
        return G(z0) == 0
    if kind == "hensel-root":
        U0 = T.d * G(z0)
        dz = T.d * (4 * (T.d**2 if chart == "1/z" else T.c4) * z0**3 + 2 * T.c2 * z0)
        return dz != 0 and (U0 == 0 or vp(U0, p) > 2 * vp(dz, p))
    rng = random.Random(seed)
    for _ in range(3):
        z = z0 + p**n * rng.randrange(p**extra)
        g = G(z)
        if g == 0 or not is_square_qp(T.d * g, p):
            return False
    return True


def torsor_bad_primes(T: Torsor) -> set[int]:
    """Primes at which the torsor can fail to be locally solvable."""
    out = {2}
    for x in (T.d, T.c4, T.disc):
        if x:
            out |= set(factorize(x))
    return out


@dataclass
class EverywhereVerdict:
    torsor: Torsor
    places: dict[str, LocalVerdict]
    spot_checks: dict[str, LocalVerdict] = field(default_factory=dict)

    @property
    def status(self) -> Status:
        verdicts = list(self.places.values()) + list(self.spot_checks.values())
        if any(v.status is Status.UNSOLVABLE for v in verdicts):
            return Status.UNSOLVABLE
        if any(v.status is Status.INCONCLUSIVE for v in verdicts):
            return Status.INCONCLUSIVE
        return Status.SOLVABLE

    @property
    def obstructions(self) -> list[str]:
        return [k for k, v in {**self.places, **self.spot_checks}.items() if v.status is Status.UNSOLVABLE]

    @property
    def spot_check_failures(self) -> list[str]:
        return [k for k, v in self.spot_checks.items() if v.status is not Status.SOLVABLE]

    def to_json(self) -> dict:
        return {
            "equation": self.torsor.equation(),
            "status": self.status.value,
            "places": {k: v.to_json() for k, v in self.places.items()},
            "spot_checks": {k: v.status.value for k, v in self.spot_checks.items()},
        }


def spot_check_primes(T: Torsor, exclude: set[int], count: int = SPOT_CHECKS) -> list[int]:
    rng = random.Random(f"{T.d},{T.c2},{T.c4}")
    pool = [q for q in _SPOT_POOL if q not in exclude and q not in torsor_bad_primes(T)]
    return sorted(rng.sample(pool, min(count, len(pool))))


def solvable_everywhere(
    T: Torsor,
    bad_primes: set[int] | None = None,
    max_depth: int = DEFAULT_DEPTH,
    spot_checks: int = SPOT_CHECKS,
) -> EverywhereVerdict:
    """R and every listed prime, plus a few good primes as a sanity check.

    Good places are assumed solvable; the spot checks only probe that assumption.
    """
    primes = sorted(set(bad_primes or ()) | torsor_bad_primes(T))
    places = {place_name(None): solvable_R(T)}
    for p in primes:
        places[place_name(p)] = solvable_Qp(T, p, max_depth)
    spots = {}
    for q in spot_check_primes(T, set(primes), spot_checks):
        spots[place_name(q)] = solvable_Qp(T, q, max_depth)
    return EverywhereVerdict(T, places, spots)
