import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import count_points_brute, real_brute
from ivorra_watkins.curves import (
    BadReduction, Curve, SingularCurve, a_q, count_points, make_pair, quadratic_twist, torsor,
)
from ivorra_watkins.families import instantiate
from ivorra_watkins.intcore import primes_up_to, squarefree_part
from ivorra_watkins.localsolve import Torsor, solvable_R

coef = st.integers(-200, 200)
odd_primes = st.sampled_from([q for q in primes_up_to(200) if q > 2])


def nonsingular(a, b):
    return b != 0 and a * a != 4 * b


def test_make_pair_examples():
    assert make_pair(5, -1).E_dual == Curve(-10, 29)
    assert make_pair(-3, -8).E_dual == Curve(6, 41)
    assert make_pair(0, 4).E_dual == Curve(0, -16)


def test_singular_inputs_named():
    with pytest.raises(SingularCurve, match="b = 0"):
        make_pair(3, 0)
    with pytest.raises(SingularCurve, match="a\\^2 - 4b"):
        make_pair(4, 4)


def test_torsor_example():
    T = torsor(Curve(-10, 29), -1)
    assert (T.d, T.c2, T.c4) == (-1, 10, 29)
    # -w^2 = 1 + 10 z^2 + 29 z^4 has no real points
    assert not solvable_R(T).solvable


def test_torsor_identity_class_has_point():
    T = torsor(Curve(5, -1), 1)
    assert T.rhs(0) == 1


def test_torsor_rejects_non_squarefree():
    with pytest.raises(ValueError):
        torsor(Curve(5, -1), 4)


def test_type_x_dual_torsor_at_minus_one_has_no_real_points():
    inst = instantiate("X", 31, 5, 1)
    T = torsor(inst.pair.E, -1)
    assert T.d == -1 and T.disc < 0 and T.c4 > 0
    assert not solvable_R(T).solvable


def test_quadratic_twist_examples():
    assert quadratic_twist(Curve(5, -1), 7) == Curve(35, -49)
    assert quadratic_twist(Curve(5, -1), -1) == Curve(-5, -1)


def test_twist_bad_primes():
    # twisting a conductor 2^m p curve by +-q: odd bad primes become {p, q}
    E = instantiate("I", 29, 2, 1).pair.E
    for d in (7, -7, 13, -11):
        T = quadratic_twist(E, d)
        odd_bad = {q for q in primes_up_to(200) if q > 2 and T.disc % q == 0}
        assert odd_bad == {29, abs(d)}


def test_a_q_examples():
    assert a_q(Curve(5, -1), 3) == 2
    assert a_q(Curve(5, -1), 5) == -2
    with pytest.raises(BadReduction, match="29"):
        a_q(Curve(5, -1), 29)


@given(coef, coef)
def test_double_dual(a, b):
    assume(nonsingular(a, b))
    dd = make_pair(a, b).E_dual.dual()
    assert (dd.a, dd.b) == (4 * a, 16 * b)
    # (x, y) -> (4x, 8y): 64 y^2 = 64 x^3 + 16 (4a) x^2 + 4 (16 b) x, i.e. the same scaling on every term
    assert 16 * dd.a == 64 * a and 4 * dd.b == 64 * b


@given(coef, coef, st.integers(-30, 30).filter(lambda d: d and squarefree_part(d) == d))
def test_double_twist_isomorphic(a, b, d):
    assume(nonsingular(a, b))
    t = quadratic_twist(quadratic_twist(Curve(a, b), d), d)
    assert (t.a, t.b) == (a * d * d, b * d**4)


@settings(max_examples=60)
@given(coef, coef, odd_primes)
def test_count_points_matches_brute_force(a, b, q):
    assume(nonsingular(a, b))
    C = Curve(a, b)
    assert count_points(C, q) == count_points_brute(a, b, q)


@settings(max_examples=200)
@given(coef, coef, odd_primes)
def test_a_q_even_and_hasse(a, b, q):
    assume(nonsingular(a, b) and Curve(a, b).disc % q)
    t = a_q(Curve(a, b), q)
    assert t % 2 == 0
    assert t * t <= 4 * q


@settings(max_examples=100)
@given(coef, coef, odd_primes)
def test_isogenous_curves_share_a_q(a, b, q):
    assume(nonsingular(a, b))
    P = make_pair(a, b)
    assume(P.E.disc % q and P.E_dual.disc % q)
    assert a_q(P.E, q) == a_q(P.E_dual, q)


def test_parity_over_family_pairs():
    insts = [instantiate("I", 29, 2, 1), instantiate("I", 41, 5, 1), instantiate("X", 31, 5, 1),
             instantiate("XVII", 163, 1, 1)]
    n = 0
    for inst in insts:
        for q in [5, 7, 11, 13, 17, 19, 23]:
            if inst.pair.E.disc % q:
                assert a_q(inst.pair.E, q) % 2 == 0
                n += 1
    assert n >= 20


@given(coef, coef, st.integers(-30, 30).filter(lambda d: d and squarefree_part(d) == d))
def test_real_verdict_matches_grid_scan(a, b, d):
    assume(nonsingular(a, b))
    T = torsor(Curve(a, b), d)
    assert solvable_R(T).solvable == real_brute(T.d, T.c2, T.c4)
