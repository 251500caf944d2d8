"""Watkins-type certificates for quadratic twists by +-q.

Everything rests on the 2-adic valuation of
    2^(k-m) (q-1)(q+1-a_q)(q+1+a_q) = (m_twist / m_E) * (c_E^2 / c_twist^2)
with only k - m >= 0 used for the conductor factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .curves import BadReduction, a_q as trace
from .families import FamilyInstance
from .intcore import is_prime, vp

if TYPE_CHECKING:
    from .descent import RankCertificate

TRICK = frozenset({"I", "II", "III", "IV", "V", "VI", "VII", "XI", "XIII", "XV"})
CERTIFIED = "CertifiedUnconditional"
CERTIFIED_CONDITIONAL = "CertifiedConditional"
UNKNOWN = "Unknown"

# certified rows, then the four combinations left open
TRICK_C1 = "trick-c1"
TRICK_Q1MOD8 = "trick-q1mod8"            # c_E > 1
TRICK_RANK1 = "trick-rank1"              # c_E > 1, q = 1 mod 4, rank exactly 1 and Watkins for E
TRICK_SUPERSINGULAR = "trick-supersingular"  # c_E > 1, q = 3 mod 4, a_q = 0
ANY_SUPERSINGULAR = "any-supersingular"  # c_E = 1
ANY_Q1MOD4 = "any-q1mod4"                # c_E = 1
GAP_TRICK_Q5MOD8 = "gap-trick-q5mod8"    # c_E > 1
GAP_TRICK_Q3MOD4 = "gap-trick-q3mod4"    # c_E > 1, a_q != 0
GAP_NONTRICK_Q3MOD4 = "gap-nontrick-q3mod4"  # c_E = 1, a_q != 0
GAP_NONTRICK_C = "gap-nontrick-c"        # c_E > 1

CERTIFIED_PATHS = (TRICK_C1, TRICK_Q1MOD8, TRICK_SUPERSINGULAR, ANY_SUPERSINGULAR, ANY_Q1MOD4)
GAPS = (GAP_TRICK_Q5MOD8, GAP_TRICK_Q3MOD4, GAP_NONTRICK_Q3MOD4, GAP_NONTRICK_C)

REASONS = {
    GAP_TRICK_Q5MOD8: "trick family, c_E > 1, q ≡ 5 (mod 8)",
    GAP_TRICK_Q3MOD4: "trick family, c_E > 1, q ≡ 3 (mod 4), a_q ≠ 0",
    GAP_NONTRICK_Q3MOD4: "non-trick, c_E = 1, q ≡ 3 mod 4, a_q ≠ 0",
    GAP_NONTRICK_C: "non-trick, c_E > 1",
}


class WatkinsError(ValueError):
    pass


@dataclass(frozen=True)
class CurveData:
    label: str
    a: int
    b: int
    modular_degree: int
    manin_constant: int
    rank: int | None = None
    provenance: str = ""

    def __post_init__(self):
        if self.modular_degree < 1:
            raise WatkinsError(f"{self.label}: modular degree must be >= 1, got {self.modular_degree}")
        if self.manin_constant < 1:
            raise WatkinsError(f"{self.label}: Manin constant must be >= 1, got {self.manin_constant}")
        if self.rank is not None and self.rank < 0:
            raise WatkinsError(f"{self.label}: rank must be >= 0")


@dataclass(frozen=True)
class ConductorBound:
    d: int
    k_equals_m: bool
    k_minus_m_lower: int = 0

    def to_json(self) -> dict:
        return {"d": self.d, "k_equals_m": self.k_equals_m, "k_minus_m_lower": self.k_minus_m_lower}


def twist_conductor_bound(d: int) -> ConductorBound:
    """For d = +-q: the twisted 2-exponent k equals m when d = 1 mod 4, else only k >= m is known."""
    q = abs(d)
    if q < 3 or not is_prime(q):
        raise WatkinsError(f"d = {d} must be plus or minus an odd prime")
    return ConductorBound(d, d % 4 == 1)


def valuation_lower(q: int, aq: int) -> int:
    """v_2((q-1)(q+1-a_q)(q+1+a_q)); the 2^(k-m) factor contributes at least 0."""
    if q < 5 or not is_prime(q):
        raise WatkinsError(f"q = {q} must be a prime >= 5")
    if aq % 2:
        raise WatkinsError(f"a_q = {aq} is odd, impossible with a rational 2-torsion point")
    return vp(q - 1, 2) + vp(q + 1 - aq, 2) + vp(q + 1 + aq, 2)


def rank_bound(type_label: str) -> int:
    return 3 if type_label in TRICK else 4


def certification_path(trick: bool, c_E: int, q: int, aq: int, rank_is_one: bool = False,
                base_watkins: bool = False) -> str:
    """The certified row (or open case) covering this combination."""
    if trick:
        if c_E == 1:
            return TRICK_C1
        if q % 8 == 1:
            return TRICK_Q1MOD8
        if q % 4 == 3:
            return TRICK_SUPERSINGULAR if aq == 0 else GAP_TRICK_Q3MOD4
        # q = 5 mod 8
        if rank_is_one and base_watkins:
            return TRICK_RANK1
        return GAP_TRICK_Q5MOD8
    if c_E > 1:
        return GAP_NONTRICK_C
    if aq == 0:
        return ANY_SUPERSINGULAR
    if q % 4 == 1:
        return ANY_Q1MOD4
    return GAP_NONTRICK_Q3MOD4


@dataclass
class TwistCertificate:
    base: tuple
    member: str
    curve: tuple[int, int]
    data_label: str
    q: int
    sign: int
    a_q: int
    theta: int
    v2_lower: int
    v2_effective: int
    rank_bound: int
    verdict: str
    path: str
    reason: str
    conductor: ConductorBound
    caller_assertions: dict = field(default_factory=dict)
    provenance: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict in (CERTIFIED, CERTIFIED_CONDITIONAL)

    def to_json(self) -> dict:
        return {
            "base": list(self.base),
            "member": self.member,
            "curve": list(self.curve),
            "data_label": self.data_label,
            "provenance": self.provenance,
            "q": self.q,
            "sign": self.sign,
            "twist": self.sign * self.q,
            "a_q": self.a_q,
            "theta": self.theta,
            "v2_lower": self.v2_lower,
            "v2_effective": self.v2_effective,
            "rank_bound": self.rank_bound,
            "verdict": self.verdict,
            "path": self.path,
            "reason": self.reason,
            "conductor": self.conductor.to_json(),
            "caller_assertions": self.caller_assertions,
        }


def certify_twist(inst: FamilyInstance, data: CurveData, q: int, sign: int = 1, member: str = "E",
                  rank_is_one: bool = False, base_watkins: bool = False) -> TwistCertificate:
    """Certificate for Watkins' conjecture on the twist of one member of the pair by sign*q.

    rank_is_one and base_watkins are facts about the base curve that cannot be
    computed here; they are recorded as caller assertions.
    """
    if sign not in (1, -1):
        raise WatkinsError("sign must be +1 or -1")
    if q < 5 or not is_prime(q):
        raise WatkinsError(f"q = {q} must be a prime >= 5")
    if member not in ("E", "E_dual"):
        raise WatkinsError("member must be 'E' or 'E_dual'")
    C = inst.pair.E if member == "E" else inst.pair.E_dual
    if (data.a, data.b) != (C.a, C.b):
        raise WatkinsError(
            f"data row {data.label} is for ({data.a}, {data.b}), not member {member} = ({C.a}, {C.b})"
        )
    aq = trace(C, q)  # raises BadReduction at q = p
    theta = aq // 2
    v2 = valuation_lower(q, aq)
    bound = rank_bound(inst.type)
    trick = inst.type in TRICK
    path = certification_path(trick, data.manin_constant, q, aq, rank_is_one, base_watkins)
    effective = v2 + vp(data.modular_degree, 2) - 2 * vp(data.manin_constant, 2)
    assertions = {}
    if path == TRICK_RANK1:
        assertions = {"rank_is_one": True, "watkins_holds_for_base": True}
    if path in GAPS:
        verdict, reason = UNKNOWN, REASONS[path]
    elif effective < bound:
        verdict = UNKNOWN
        reason = f"{path} applies but v2 lower bound {effective} < rank bound {bound}"
    else:
        verdict = CERTIFIED_CONDITIONAL if assertions else CERTIFIED
        reason = f"{path}: v2 >= {effective} >= rank bound {bound}"
    return TwistCertificate(
        base=inst.key, member=member, curve=(C.a, C.b), data_label=data.label, q=q, sign=sign,
        a_q=aq, theta=theta, v2_lower=v2, v2_effective=effective, rank_bound=bound,
        verdict=verdict, path=path, reason=reason, conductor=twist_conductor_bound(sign * q),
        caller_assertions=assertions, provenance=data.provenance,
    )


def weak_watkins_missing_case(N_factorization: dict[int, int], reduction_at_2: str | None,
                              two_torsion_nontrivial: bool) -> bool:
    """At most two odd primes in N, additive reduction at 2 (4 | N), and a rational 2-torsion point."""
    for q, e in N_factorization.items():
        if e < 1 or q < 2 or not is_prime(q):
            raise WatkinsError(f"invalid factorisation entry {q}^{e}")
    additive = N_factorization.get(2, 0) >= 2
    if reduction_at_2 is not None:
        claimed = reduction_at_2 == "additive"
        if claimed != additive:
            raise WatkinsError(f"reduction at 2 given as {reduction_at_2!r} but 2-exponent of N is "
                               f"{N_factorization.get(2, 0)}")
    odd = sum(1 for q in N_factorization if q > 2)
    return odd <= 2 and additive and two_torsion_nontrivial


def conditional_watkins(cert: "RankCertificate") -> dict | None:
    """Watkins for the base curve once the rank is known to be at most 1."""
    if cert.final_bound > 1:
        return None
    if cert.final_bound == 0:
        return {"kind": "unconditional", "statement": "rank 0, so 2^rank = 1 divides the modular degree"}
    return {
        "kind": "conditional",
        "hypotheses": ["BSD", "finiteness of Sha"],
        "statement": "rank <= 1; if the rank is 1, either hypothesis gives analytic rank 1 and "
                     "then the modular degree is even",
    }


__all__ = [
    "CERTIFIED", "CERTIFIED_CONDITIONAL", "CERTIFIED_PATHS", "GAPS", "UNKNOWN", "BadReduction", "CurveData", "TwistCertificate", "certify_twist", "conditional_watkins",
    "rank_bound", "certification_path", "twist_conductor_bound", "valuation_lower",
    "weak_watkins_missing_case",
]
