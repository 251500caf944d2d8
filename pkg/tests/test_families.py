import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_family_rows
from ivorra_watkins.families import (
    FAMILIES, ROMAN, KOutOfRange, NotInFamily, SignRestricted, classify, instantiate,
    minus64_fourth_power, rank_one_case, rank_table_report, sweep, sweep_instances,
)
from ivorra_watkins.intcore import omega

ALL_INSTANCES = {label: sweep_instances(label, 10**4) for label in ROMAN}


def _trial_prime(n):
    return n > 1 and all(n % d for d in range(2, math.isqrt(n) + 1))


def test_rows_match_fixture():
    assert [FAMILIES[l].fixture_row() for l in ROMAN] == load_family_rows()


def test_116c():
    inst = instantiate("I", 29, 2, 1)
    assert (inst.a, inst.b) == (5, -1)
    assert (inst.pair.E_dual.a, inst.pair.E_dual.b) == (-10, 29)
    assert inst.strict


def test_328a_uses_root_convention():
    inst = instantiate("I", 41, 5, 1)
    assert inst.alpha == -3
    assert (inst.a, inst.b) == (-3, -8)
    assert (inst.pair.E_dual.a, inst.pair.E_dual.b) == (6, 41)


def test_k_inferred_when_unique():
    assert instantiate("I", 29).key == ("I", 29, 2, 1)
    with pytest.raises(KOutOfRange, match="several k"):
        instantiate("X", 31)


def test_not_in_family():
    with pytest.raises(NotInFamily):
        instantiate("I", 37, 2, 1)
    with pytest.raises(NotInFamily):
        instantiate("I", 39, 2, 1)


def test_k_and_sign_restrictions():
    with pytest.raises(KOutOfRange):
        instantiate("I", 29, 6, 1)
    # +alpha only for k in {2, 4, 5}; -alpha only for k in {2, 3}
    with pytest.raises(SignRestricted):
        instantiate("I", 37, 3, 1)
    with pytest.raises(SignRestricted):
        instantiate("I", 41, 5, -1)


def test_small_prime_flagged_not_rejected():
    inst = instantiate("IX", 5, 2, 1)
    assert not inst.strict and inst.warnings


def test_classify_examples():
    assert classify(5, -1) == [("I", 29, 2, 1)]
    assert classify(0, 1) == []
    assert classify(-3, -8) == [("I", 41, 5, 1)]


@pytest.mark.parametrize("label,k,bound,expected", [
    ("XII", 2, 10**5, [5, 29, 5741, 33461]),
    ("XVII", 2, 10**3, [3, 17, 577]),
    ("XIX", 2, 10**3, [7, 41, 239]),
    ("IX", 2, 10**5, [5]),
])
def test_sweeps(label, k, bound, expected):
    assert sweep(label, k, bound) == expected


def test_sweep_parallel_matches_serial():
    assert sweep("XII", 2, 2 * 10**6, jobs=4) == sweep("XII", 2, 2 * 10**6, jobs=1)


@pytest.mark.parametrize("label", ["I", "VIII", "X", "XIV", "XVI", "XIX"])
def test_sweep_against_direct_search(label):
    T = FAMILIES[label]
    k = None if T.k_kind == "free" else (T.k_set[0] if T.k_kind == "set" else T.k_min + 1)
    kk = k or 1
    direct = []
    for p in range(3, 3000, 2):
        if not _trial_prime(p):
            continue
        beta = T.beta(p, kk)
        if beta >= 0 and math.isqrt(beta) ** 2 == beta:
            direct.append(p)
    assert sweep(label, k, 3000) == direct


@pytest.mark.parametrize("label", ROMAN)
def test_roundtrip_and_columns(label):
    T = FAMILIES[label]
    for inst in ALL_INSTANCES[label]:
        assert inst.key in classify(inst.a, inst.b)
        assert omega(inst.a**2 - 4 * inst.b) == T.omega_disc
        ob = omega(inst.b)
        assert ob <= T.omega_b if T.omega_b_at_most else ob == T.omega_b
        assert inst.alpha**2 == inst.beta


def test_type_x_congruences():
    for inst in ALL_INSTANCES["X"]:
        assert inst.p % 8 == (3 if inst.k == 2 else 7)


@settings(max_examples=30)
@given(st.integers(5, 10**6))
def test_family_ix_k2_only_five(bound):
    assert sweep("IX", 2, bound) == [5]


def test_rank_one_cases():
    c = rank_one_case(instantiate("X", 31, 5, 1))
    assert c.applies and c.case == 3
    c = rank_one_case(instantiate("XVII", 163, 1, 1))
    assert c.applies and c.case == 6 and c.rank_zero_claim
    c = rank_one_case(instantiate("XIV", 79, 1, 1))
    assert not c.applies
    assert rank_one_case(instantiate("I", 29, 2, 1)).case == 1
    assert rank_one_case(instantiate("XIX", 31, 1, 1)).case == 8
    assert not rank_one_case(instantiate("XIX", 41, 2, 1)).applies


def test_xii_k2_fourth_power_hypothesis_never_holds():
    # beta = alpha^2 = 2p^2 - 1, so alpha^2 = -1 mod p and -64 = (2(1 + alpha))^4 mod p
    primes = sweep("XII", 2, 10**6)
    assert primes
    for p in primes:
        inst = instantiate("XII", p, 2, 1)
        assert pow(inst.alpha, 2, p) == p - 1
        assert pow(2 * (1 + inst.alpha), 4, p) == -64 % p
        assert minus64_fourth_power(p)
        assert not rank_one_case(inst).applies


def test_rank_table_examples():
    for inst in ALL_INSTANCES["VIII"]:
        rep = rank_table_report(inst)
        assert rep.consistent
        if inst.k >= 3:
            assert inst.p % 8 == 1
    rep = rank_table_report(instantiate("XIX", 31, 1, 1))
    assert rep.rows[0].conditions == "k = 1; p ≡ 7 (mod 8)"
    assert rep.verdict == "rank ≤ 1 by descent"
    for inst in ALL_INSTANCES["X"]:
        if inst.k == 2:
            assert rank_table_report(inst).forced_p_mod_8 == {3}
    assert rank_table_report(instantiate("XIV", 79, 1, 1)).verdict == "rank 2 possible"
