"""The twenty families I..XX of curves with conductor 2^m p and a rational 2-torsion point.

Each family fixes beta as a function of (p, k); when beta is a perfect square,
alpha is its conventional root and (a, b) follow from the row's rules.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .curves import Curve, CurvePair, SingularCurve, make_pair
from .intcore import (
    convention_sqrt,
    factorize,
    is_prime,
    ivorra_bound,
    omega,
    primes_up_to,
    residue_tests,
)

ROMAN = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X",
         "XI", "XII", "XIII", "XIV", "XV", "XVI", "XVII", "XVIII", "XIX", "XX"]

XIII_XIV_K_MAX = 164969


class FamilyError(ValueError):
    pass


class NotInFamily(FamilyError):
    pass


class KOutOfRange(FamilyError):
    pass


class SignRestricted(FamilyError):
    pass


@dataclass(frozen=True)
class FamilyType:
    label: str
    beta: Callable[[int, int], int]
    mult: int  # a = sign * mult * alpha
    b: Callable[[int, int], int]
    k_kind: str  # "free", "set" or "range"
    k_set: tuple[int, ...] = ()
    k_min: int = 0
    k_max: int | None = None  # None means f(p)
    signs: Callable[[int | None], tuple[int, ...]] = lambda k: (1, -1)
    omega_disc: int = 0
    omega_b: int = 0
    omega_b_at_most: bool = False
    m_set: tuple[int, ...] = ()
    ivorra_labels: tuple[str, ...] = ()
    # display strings, kept in the layout of the printed table
    beta_text: str = ""
    a_text: str = ""
    b_text: str = ""
    omega_disc_text: str = ""
    omega_b_text: str = ""
    k_text: str = ""

    def k_range(self, p: int) -> tuple[int, ...] | range | None:
        if self.k_kind == "free":
            return None
        if self.k_kind == "set":
            return self.k_set
        hi = ivorra_bound(p) if self.k_max is None else self.k_max
        return range(self.k_min, hi + 1)

    def k_admissible(self, p: int, k: int | None) -> bool:
        if self.k_kind == "free":
            return k in (None, 1)
        if k is None:
            return False
        if self.k_kind == "set":
            return k in self.k_set
        hi = ivorra_bound(p) if self.k_max is None else self.k_max
        return self.k_min <= k <= hi

    def fixture_row(self) -> str:
        m = ",".join(str(x) for x in self.m_set)
        return " | ".join(
            [self.label, self.beta_text, self.a_text, self.b_text,
             self.omega_disc_text, self.omega_b_text, self.k_text, m]
        )


def _signs_I(k):
    return tuple(s for s, ks in ((1, (2, 4, 5)), (-1, (2, 3))) if k in ks)


def _signs_II(k):
    return (1, -1) if k == 3 else (1,)


def _minus_only(k):
    return (-1,)


def _t(label, beta, mult, b, kind, **kw) -> FamilyType:
    return FamilyType(label=label, beta=beta, mult=mult, b=b, k_kind=kind, **kw)


FAMILIES: dict[str, FamilyType] = {t.label: t for t in [
    _t("I", lambda p, k: p - 2**k, 1, lambda p, k: -(2 ** (k - 2)), "set", k_set=(2, 3, 4, 5),
       signs=_signs_I, omega_disc=1, omega_b=1, omega_b_at_most=True, m_set=(2, 3, 4, 5),
       ivorra_labels=("2A", "3A", "3B", "4D", "5B", "5B'"),
       beta_text="p-2^k", a_text="±α", b_text="-2^(k-2)", omega_disc_text="ω(p)=1",
       omega_b_text="≤1", k_text="2≤k≤5"),
    _t("II", lambda p, k: p + 2**k, 1, lambda p, k: 2 ** (k - 2), "set", k_set=(3, 5),
       signs=_signs_II, omega_disc=1, omega_b=1, omega_b_at_most=True, m_set=(3, 5),
       ivorra_labels=("3C", "5C", "5C'"),
       beta_text="p+2^k", a_text="±α", b_text="2^(k-2)", omega_disc_text="ω(p)=1",
       omega_b_text="≤1", k_text="k∈{3,5}"),
    _t("III", lambda p, k: p - 2**k, 1, lambda p, k: -(2 ** (k - 2)), "range", k_min=4,
       signs=_minus_only, omega_disc=1, omega_b=1, omega_b_at_most=True, m_set=(4,),
       ivorra_labels=("4A",),
       beta_text="p-2^k", a_text="-α", b_text="-2^(k-2)", omega_disc_text="ω(p)=1",
       omega_b_text="≤1", k_text="4≤k≤f(p)"),
    _t("IV", lambda p, k: p + 2**k, 1, lambda p, k: 2 ** (k - 2), "range", k_min=4,
       signs=_minus_only, omega_disc=1, omega_b=1, omega_b_at_most=True, m_set=(4,),
       ivorra_labels=("4B",),
       beta_text="p+2^k", a_text="-α", b_text="2^(k-2)", omega_disc_text="ω(p)=1",
       omega_b_text="≤1", k_text="4≤k≤f(p)"),
    _t("V", lambda p, k: 2**k - p, 1, lambda p, k: 2 ** (k - 2), "range", k_min=4,
       signs=_minus_only, omega_disc=1, omega_b=1, omega_b_at_most=True, m_set=(4,),
       ivorra_labels=("4E",),
       beta_text="2^k-p", a_text="-α", b_text="2^(k-2)", omega_disc_text="ω(-p)=1",
       omega_b_text="≤1", k_text="4≤k≤f(p)"),
    _t("VI", lambda p, k: p - 1, 2, lambda p, k: -1, "free",
       omega_disc=2, omega_b=0, m_set=(5,), ivorra_labels=("5A", "5A'"),
       beta_text="p-1", a_text="±2α", b_text="-1", omega_disc_text="ω(4p)=2",
       omega_b_text="0", k_text=""),
    _t("VII", lambda p, k: p - 1, 2, lambda p, k: p, "free",
       omega_disc=1, omega_b=1, m_set=(6,), ivorra_labels=("6A", "6A'"),
       beta_text="p-1", a_text="±2α", b_text="p", omega_disc_text="ω(-4)=1",
       omega_b_text="1", k_text=""),
    _t("VIII", lambda p, k: p - 2**k, 2, lambda p, k: -(2**k), "range", k_min=2,
       omega_disc=2, omega_b=1, m_set=(6,), ivorra_labels=("6B", "6B'"),
       beta_text="p-2^k", a_text="±2α", b_text="-2^k", omega_disc_text="ω(4p)=2",
       omega_b_text="1", k_text="2≤k≤f(p)"),
    _t("IX", lambda p, k: p + 2**k, 2, lambda p, k: 2**k, "range", k_min=2,
       omega_disc=2, omega_b=1, m_set=(6,), ivorra_labels=("6C", "6C'"),
       beta_text="p+2^k", a_text="±2α", b_text="2^k", omega_disc_text="ω(4p)=2",
       omega_b_text="1", k_text="2≤k≤f(p)"),
    _t("X", lambda p, k: 2**k - p, 2, lambda p, k: 2**k, "range", k_min=2,
       omega_disc=2, omega_b=1, m_set=(6,), ivorra_labels=("6E", "6E'"),
       beta_text="2^k-p", a_text="±2α", b_text="2^k", omega_disc_text="ω(-4p)=2",
       omega_b_text="1", k_text="2≤k≤f(p)"),
    _t("XI", lambda p, k: 2 * p**k - 1, 2, lambda p, k: -1, "set", k_set=(1, 2),
       omega_disc=2, omega_b=0, m_set=(7,), ivorra_labels=("7A", "7A'"),
       beta_text="2p^k-1", a_text="±2α", b_text="-1", omega_disc_text="ω(8p^k)=2",
       omega_b_text="0", k_text="k∈{1,2}"),
    _t("XII", lambda p, k: 2 * p**k - 1, 2, lambda p, k: 2 * p**k, "set", k_set=(1, 2),
       omega_disc=1, omega_b=2, m_set=(7,), ivorra_labels=("7B", "7B'"),
       beta_text="2p^k-1", a_text="±2α", b_text="2p^k", omega_disc_text="ω(-4)=1",
       omega_b_text="2", k_text="k∈{1,2}"),
    _t("XIII", lambda p, k: p**k + 2, 2, lambda p, k: p**k, "range", k_min=1,
       k_max=XIII_XIV_K_MAX, omega_disc=1, omega_b=1, m_set=(7,), ivorra_labels=("7C", "7C'"),
       beta_text="p^k+2", a_text="±2α", b_text="p^k", omega_disc_text="ω(8)=1",
       omega_b_text="1", k_text="1≤k≤164969"),
    _t("XIV", lambda p, k: p**k + 2, 2, lambda p, k: 2, "range", k_min=1,
       k_max=XIII_XIV_K_MAX, omega_disc=2, omega_b=1, m_set=(7,), ivorra_labels=("7D", "7D'"),
       beta_text="p^k+2", a_text="±2α", b_text="2", omega_disc_text="ω(4p^k)=2",
       omega_b_text="1", k_text="1≤k≤164969"),
    _t("XV", lambda p, k: p - 2, 2, lambda p, k: p, "free",
       omega_disc=1, omega_b=1, m_set=(7,), ivorra_labels=("7E", "7E'"),
       beta_text="p-2", a_text="±2α", b_text="p", omega_disc_text="ω(-8)=1",
       omega_b_text="1", k_text=""),
    _t("XVI", lambda p, k: p - 2, 2, lambda p, k: -2, "free",
       omega_disc=2, omega_b=1, m_set=(7,), ivorra_labels=("7F", "7F'"),
       beta_text="p-2", a_text="±2α", b_text="-2", omega_disc_text="ω(4p)=2",
       omega_b_text="1", k_text=""),
    _t("XVII", lambda p, k: (p**k - 1) // 2, 4, lambda p, k: -2, "set", k_set=(1, 2),
       omega_disc=2, omega_b=1, m_set=(8,), ivorra_labels=("8A", "8A'"),
       beta_text="(p^k-1)/2", a_text="±4α", b_text="-2", omega_disc_text="ω(8p^k)=2",
       omega_b_text="1", k_text="k∈{1,2}"),
    _t("XVIII", lambda p, k: (p**k - 1) // 2, 4, lambda p, k: 2 * p**k, "set", k_set=(1, 2),
       omega_disc=1, omega_b=2, m_set=(8,), ivorra_labels=("8B", "8B'"),
       beta_text="(p^k-1)/2", a_text="±4α", b_text="2p^k", omega_disc_text="ω(-8)=1",
       omega_b_text="2", k_text="k∈{1,2}"),
    _t("XIX", lambda p, k: (p**k + 1) // 2, 4, lambda p, k: 2, "set", k_set=(1, 2),
       omega_disc=2, omega_b=1, m_set=(8,), ivorra_labels=("8C", "8C'"),
       beta_text="(p^k+1)/2", a_text="±4α", b_text="2", omega_disc_text="ω(8p^k)=2",
       omega_b_text="1", k_text="k∈{1,2}"),
    _t("XX", lambda p, k: (p**k + 1) // 2, 4, lambda p, k: 2 * p**k, "set", k_set=(1, 2),
       omega_disc=1, omega_b=2, m_set=(8,), ivorra_labels=("8D", "8D'"),
       beta_text="(p^k+1)/2", a_text="±4α", b_text="2p^k", omega_disc_text="ω(8)=1",
       omega_b_text="2", k_text="k∈{1,2}"),
]}


def family(label: str) -> FamilyType:
    try:
        return FAMILIES[label.upper()]
    except KeyError:
        raise FamilyError(f"unknown family type {label!r}; expected one of {', '.join(ROMAN)}") from None


@dataclass(frozen=True)
class FamilyInstance:
    type: str
    p: int
    k: int | None
    sign: int
    alpha: int
    beta: int
    pair: CurvePair
    m_set: tuple[int, ...]
    strict: bool
    warnings: tuple[str, ...] = field(default=())

    @property
    def a(self) -> int:
        return self.pair.E.a

    @property
    def b(self) -> int:
        return self.pair.E.b

    @property
    def family(self) -> FamilyType:
        return FAMILIES[self.type]

    @property
    def key(self) -> tuple:
        return (self.type, self.p, self.k, self.sign)

    def to_json(self) -> dict:
        return {
            "type": self.type,
            "p": self.p,
            "k": self.k,
            "sign": self.sign,
            "alpha": self.alpha,
            "beta": self.beta,
            "E": [self.pair.E.a, self.pair.E.b],
            "E_dual": [self.pair.E_dual.a, self.pair.E_dual.b],
            "m_set": list(self.m_set),
            "strict": self.strict,
            "warnings": list(self.warnings),
            "ivorra_labels": list(self.family.ivorra_labels),
        }


def _check_prime(p: int) -> None:
    if p < 3 or not is_prime(p):
        raise NotInFamily(f"p = {p} is not an odd prime")


def _check_k_sign(T: FamilyType, p: int, k: int | None, sign: int) -> int | None:
    if sign not in (1, -1):
        raise SignRestricted(f"sign must be +1 or -1, got {sign}")
    if not T.k_admissible(p, k):
        rng = T.k_range(p)
        shown = f"{rng.start}..{rng.stop - 1}" if isinstance(rng, range) else rng
        raise KOutOfRange(f"k = {k} is outside the range {shown} for type {T.label}")
    if T.k_kind == "free":
        k = None
    if sign not in T.signs(k):
        raise SignRestricted(f"sign {sign:+d} is not permitted for type {T.label} with k = {k}")
    return k


def _infer_k(T: FamilyType, p: int, sign: int) -> int:
    """The unique admissible k making beta a square; ambiguity or absence is an error."""
    rng = T.k_range(p)
    if len(rng) > 64:
        raise KOutOfRange(f"type {T.label} allows k up to {rng[-1]}; pass --k")
    ks = [k for k in rng if sign in T.signs(k) and convention_sqrt(T.beta(p, k)) is not None]
    if not ks:
        raise NotInFamily(f"no k makes beta = {T.beta_text} a square for p = {p} (sign {sign:+d})")
    if len(ks) > 1:
        raise KOutOfRange(f"type {T.label} at p = {p}: several k work ({ks}); pass --k")
    return ks[0]


def instantiate(label: str, p: int, k: int | None = None, sign: int = 1) -> FamilyInstance:
    T = family(label)
    _check_prime(p)
    if k is None and T.k_kind != "free":
        k = _infer_k(T, p, sign)
    k = _check_k_sign(T, p, k, sign)
    kk = 1 if k is None else k
    beta = T.beta(p, kk)
    alpha = convention_sqrt(beta)
    if alpha is None:
        raise NotInFamily(f"beta = {T.beta_text} = {beta} is not a perfect square for p = {p}, k = {k}")
    a = sign * T.mult * alpha
    b = T.b(p, kk)
    try:
        pair = make_pair(a, b)
    except SingularCurve as exc:
        raise NotInFamily(str(exc)) from None
    warnings = []
    strict = p >= 29
    if not strict:
        warnings.append(f"p = {p} < 29: outside the range where the classification is asserted")
    om_d, om_b = omega(pair.E.c), omega(b)
    ok_b = om_b <= T.omega_b if T.omega_b_at_most else om_b == T.omega_b
    if om_d != T.omega_disc or not ok_b:
        raise AssertionError(
            f"type {T.label} at p={p}, k={k}: omega columns ({om_d}, {om_b}) "
            f"disagree with the table ({T.omega_disc_text}, {T.omega_b_text})"
        )
    return FamilyInstance(T.label, p, k, sign, alpha, beta, pair, T.m_set, strict, tuple(warnings))


def _k_candidates(T: FamilyType, p: int, a: int, b: int):
    if T.k_kind == "free":
        return [None]
    if T.k_kind == "set":
        return list(T.k_set)
    # p^k or 2^k never exceeds the size of a^2 + |b| by more than a constant
    size = max(a * a, abs(b)) + 8
    hi = min(size.bit_length() + 2, ivorra_bound(p) if T.k_max is None else T.k_max)
    return range(T.k_min, hi + 1)


def classify(a: int, b: int) -> list[tuple[str, int, int | None, int]]:
    """Every (type, p, k, sign) whose instance has E = (a, b)."""
    Curve(a, b)
    odd = sorted(q for q in factorize(b * (a * a - 4 * b)) if q > 2)
    out = []
    for label in ROMAN:
        T = FAMILIES[label]
        for p in odd:
            for k in _k_candidates(T, p, a, b):
                for sign in T.signs(k if T.k_kind != "free" else None):
                    try:
                        inst = instantiate(label, p, k, sign)
                    except FamilyError:
                        continue
                    if (inst.a, inst.b) == (a, b):
                        out.append(inst.key)
    return out


def _sweep_chunk(args):
    label, k, primes = args
    T = FAMILIES[label]
    kk = 1 if k is None else k
    out = []
    for p in primes:
        if not T.k_admissible(p, k):
            continue
        beta = T.beta(p, kk)
        if convention_sqrt(beta) is not None:
            out.append(p)
    return out


def sweep(label: str, k: int | None, bound: int, jobs: int = 1) -> list[int]:
    """Odd primes p <= bound for which (type, p, k) gives a family member."""
    T = family(label)
    if T.k_kind == "free":
        k = None
    elif k is None:
        raise KOutOfRange(f"type {T.label} needs an explicit k")
    elif T.k_kind == "set" and k not in T.k_set:
        raise KOutOfRange(f"k = {k} is not in {T.k_set} for type {T.label}")
    if T.k_kind != "free" and not T.signs(k):
        return []
    primes = [q for q in primes_up_to(bound) if q > 2]
    if jobs <= 1 or len(primes) < 50_000:
        return _sweep_chunk((T.label, k, primes))
    size = -(-len(primes) // jobs)
    chunks = [(T.label, k, primes[i : i + size]) for i in range(0, len(primes), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_sweep_chunk, chunks))
    return sorted(q for part in parts for q in part)


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def sweep_instances(label: str, bound: int, k_cap: int = 15) -> list[FamilyInstance]:
    """All instances of a type with p <= bound, every admissible k (capped at k_cap) and sign."""
    T = family(label)
    if T.k_kind == "free":
        ks = [None]
    elif T.k_kind == "set":
        ks = list(T.k_set)
    else:
        hi = ivorra_bound(bound) if T.k_max is None else min(T.k_max, k_cap)
        ks = range(T.k_min, hi + 1)
    out = []
    for k in ks:
        for p in sweep(label, k, bound):
            for sign in T.signs(k):
                out.append(instantiate(label, p, k, sign))
    return out


# --- rank-bound hypotheses -------------------------------------------------

_CASE1 = {"I", "II", "III", "IV", "V", "VI", "VII", "XI", "XIII", "XV"}


@dataclass(frozen=True)
class HypothesisCheck:
    applies: bool
    case: int | None
    rank_zero_claim: bool
    reason: str

    def to_json(self) -> dict:
        return {"applies": self.applies, "case": self.case,
                "rank_zero_claim": self.rank_zero_claim, "reason": self.reason}


def minus64_fourth_power(p: int) -> bool:
    return residue_tests(-64, p).is_fourth_power


def rank_one_case(inst: FamilyInstance) -> HypothesisCheck:
    """Which of the eight rank <= 1 cases, if any, covers the instance."""
    T, p, k = inst.type, inst.p, inst.k
    if T in _CASE1:
        return HypothesisCheck(True, 1, False, f"type {T} has naive bound rank <= 1")
    if T == "VIII":
        if k == 2:
            return HypothesisCheck(True, 2, False, "type VIII with k = 2")
        return HypothesisCheck(False, None, False, f"type VIII needs k = 2 (k = {k})")
    if T == "X":
        return HypothesisCheck(True, 3, False, "type X")
    if T == "XII":
        if k != 2:
            return HypothesisCheck(False, None, False, "type XII needs k = 2")
        if minus64_fourth_power(p):
            return HypothesisCheck(False, None, False, f"-64 is a fourth power mod {p}")
        return HypothesisCheck(True, 4, False, f"type XII, k = 2, -64 not a fourth power mod {p}")
    if T == "XVI":
        return HypothesisCheck(True, 5, False, "type XVI")
    if T == "XVII":
        if k == 1 and p % 8 == 3:
            return HypothesisCheck(True, 6, True, "type XVII, k = 1, p = 3 mod 8: rank 0")
        return HypothesisCheck(False, None, False, f"type XVII needs k = 1 and p = 3 mod 8 (k = {k}, p = {p % 8} mod 8)")
    if T == "XVIII":
        if k == 1:
            return HypothesisCheck(True, 7, False, "type XVIII with k = 1")
        return HypothesisCheck(False, None, False, "type XVIII needs k = 1")
    if T == "XIX":
        if p % 8 != 1:
            return HypothesisCheck(True, 8, False, f"type XIX with p = {p % 8} mod 8")
        return HypothesisCheck(False, None, False, "type XIX needs p != 1 mod 8")
    return HypothesisCheck(False, None, False, f"type {T} is not in the case list")


# --- known rank behaviour with extra hypotheses ---------------------------


@dataclass(frozen=True)
class RankRow:
    type: str
    conditions: str
    verdict: str
    example: str | None
    conductor: str | None
    matches: Callable[[FamilyInstance], bool]

    def to_json(self) -> dict:
        return {"type": self.type, "conditions": self.conditions, "verdict": self.verdict,
                "example": self.example, "conductor": self.conductor}


def _k(pred):
    return lambda i: i.k is not None and pred(i.k)


RANK_TABLE = [
    RankRow("VIII", "k = 2; p ≡ 5 (mod 8)", "rank ≤ 1 by descent", None, None,
            lambda i: i.k == 2 and i.p % 8 == 5),
    RankRow("VIII", "k ≥ 3; p ≡ 1 (mod 8)", "rank 2 possible", "7232c", "2^6·113",
            lambda i: i.k >= 3 and i.p % 8 == 1),
    RankRow("IX", "k = 2; p ≡ 5 (mod 8)", "only p = 5 found below 10^7", None, None,
            lambda i: i.k == 2 and i.p % 8 == 5),
    RankRow("IX", "k ≥ 3; p ≡ 1 (mod 8)", "rank 2 possible", "16448j", "2^6·257",
            lambda i: i.k >= 3 and i.p % 8 == 1),
    RankRow("XII", "k = 1; p ≡ 1 (mod 8)", "rank 2 possible", "5248a", "2^7·41",
            lambda i: i.k == 1 and i.p % 8 == 1),
    RankRow("XII", "k = 2; -64 ≡ x^4 (mod p)", "only p = 5, 29, 5741, 33461 below 10^9", None, None,
            lambda i: i.k == 2 and minus64_fourth_power(i.p)),
    RankRow("XII", "k = 2; -64 ≢ x^4 (mod p)", "rank ≤ 1 by descent", None, None,
            lambda i: i.k == 2 and not minus64_fourth_power(i.p)),
    RankRow("XIV", "", "rank 2 possible", "10112c", "2^7·79", lambda i: True),
    RankRow("XVII", "k = 1; p ≡ 1 (mod 8)", "rank 2 possible", "18688b", "2^8·73",
            lambda i: i.k == 1 and i.p % 8 == 1),
    RankRow("XVII", "k = 1; p ≡ 3 (mod 8)", "rank = 0 by descent", None, None,
            lambda i: i.k == 1 and i.p % 8 == 3),
    RankRow("XVII", "k = 2", "only p = 3, 17, 577, 665857 below 10^9; rank 2 possible", "147712e", "2^8·577",
            lambda i: i.k == 2),
    RankRow("XVIII", "k = 1", "rank ≤ 1 by descent", None, None, lambda i: i.k == 1),
    RankRow("XVIII", "k = 2", "same primes as XII with k = 2; rank ≤ 1", None, None, lambda i: i.k == 2),
    RankRow("XIX", "k = 1; p ≡ 1 (mod 8)", "rank 2 possible", "24832d", "2^8·97",
            lambda i: i.k == 1 and i.p % 8 == 1),
    RankRow("XIX", "k = 1; p ≡ 7 (mod 8)", "rank ≤ 1 by descent", None, None,
            lambda i: i.k == 1 and i.p % 8 == 7),
    RankRow("XIX", "k = 2; p ≡ 1 (mod 8)", "only p = 7, 41, 239, 9369319 below 10^9; rank ≤ 1", None, None,
            lambda i: i.k == 2 and i.p % 8 == 1),
    RankRow("XIX", "k = 2; p ≢ 1 (mod 8)", "only p = 7, 41, 239, 9369319 below 10^9; rank ≤ 1", None, None,
            lambda i: i.k == 2 and i.p % 8 != 1),
    RankRow("XX", "k = 1; p ≡ 1 (mod 8)", "rank 2 possible", "86272a", "2^8·337",
            lambda i: i.k == 1 and i.p % 8 == 1),
    RankRow("XX", "k = 1; p ≡ 7 (mod 8)", "rank 2 possible", "7936b", "2^8·31",
            lambda i: i.k == 1 and i.p % 8 == 7),
    RankRow("XX", "k = 2", "same primes as XIX with k = 2; rank ≤ 1", None, None, lambda i: i.k == 2),
]

# congruences on p forced by beta being a square (p mod 8 as a function of k)
FORCED_CONGRUENCE: dict[str, Callable[[int | None], set[int]]] = {
    "VIII": lambda k: {5} if k == 2 else {1},
    "IX": lambda k: {5} if k == 2 else {1},
    "X": lambda k: {3} if k == 2 else {7},
    "XIX": lambda k: {1, 7} if k == 1 else None,
    "XX": lambda k: {1, 7} if k == 1 else None,
}


@dataclass(frozen=True)
class RankTableReport:
    instance: tuple
    rows: list[RankRow]
    p_mod_8: int
    forced_p_mod_8: set[int] | None
    consistent: bool

    @property
    def verdict(self) -> str | None:
        return self.rows[0].verdict if self.rows else None

    def to_json(self) -> dict:
        return {
            "instance": list(self.instance),
            "rows": [r.to_json() for r in self.rows],
            "p_mod_8": self.p_mod_8,
            "forced_p_mod_8": sorted(self.forced_p_mod_8) if self.forced_p_mod_8 else None,
            "consistent": self.consistent,
        }


def rank_table_report(inst: FamilyInstance) -> RankTableReport:
    typed = [r for r in RANK_TABLE if r.type == inst.type]
    rows = [r for r in typed if r.matches(inst)]
    forced = FORCED_CONGRUENCE.get(inst.type)
    forced_set = forced(inst.k) if forced else None
    consistent = forced_set is None or inst.p % 8 in forced_set
    if typed and not rows:
        consistent = False
    return RankTableReport(inst.key, rows, inst.p % 8, forced_set, consistent)
