from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from modparity.arith import primes_up_to
from modparity.curve import (CM_J_INVARIANTS, BadReductionError, SingularCurveError, ap_point_count,
                             cm_discriminant, derive_invariants, is_real_connected, is_supersingular_at_2,
                             quadratic_twist, twist_character, two_torsion_info)

ainv = st.tuples(*[st.integers(-50, 50)] * 5)


def curve_or_none(a):
    try:
        return derive_invariants(*a)
    except SingularCurveError:
        return None


def brute_count(E, p):
    a1, a2, a3, a4, a6 = E.ainvs
    return 1 + sum(1 for x in range(p) for y in range(p)
                   if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0)


def test_invariant_examples():
    E = derive_invariants(0, 0, 1, 0, 2)
    assert E.disc == -2187 and E.j == (0, 1)
    E = derive_invariants(0, -1, 1, -10, -20)
    assert E.j == (-122023936, 161051) and E.disc == -161051
    E = derive_invariants(0, 0, 0, -1, 0)
    assert E.disc == 64 and E.j == (1728, 1)


def test_singular_rejected():
    with pytest.raises(SingularCurveError):
        derive_invariants(0, 0, 0, 0, 0)


@given(ainv)
def test_invariant_identities(a):
    E = curve_or_none(a)
    assume(E is not None)
    assert 1728 * E.disc == E.c4**3 - E.c6**2
    assert 4 * E.b8 == E.b2 * E.b6 - E.b4**2
    assert E.b2 == E.a1**2 + 4 * E.a2
    assert Fraction(E.j_num, E.j_den) == Fraction(E.c4**3, E.disc)


def test_two_torsion_examples():
    assert two_torsion_info(derive_invariants(1, 1, 1, -10, -10)).has_rational_root
    assert not two_torsion_info(derive_invariants(0, 1, 1, -4, -10)).has_rational_root
    info = two_torsion_info(derive_invariants(0, 0, 0, -1, 0))
    assert info.has_rational_root and 0 in info.roots


def rational_two_torsion_by_search(E):
    """Points with 2y + a1 x + a3 = 0 on the curve, x = k/4 in the root bound."""
    a1, a2, a3, a4, a6 = E.ainvs
    bound = 4 * (1 + max(abs(E.b2), abs(8 * E.b4), abs(16 * E.b6)))
    for k in range(-bound, bound + 1):
        x = Fraction(k, 4)
        y = -(a1 * x + a3) / 2
        if y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6:
            return True
    return False


@given(st.tuples(*[st.integers(-6, 6)] * 5))
@settings(max_examples=80, deadline=None)
def test_two_torsion_matches_direct_search(a):
    E = curve_or_none(a)
    assume(E is not None)
    info = two_torsion_info(E)
    assert info.has_rational_root == rational_two_torsion_by_search(E)
    assert (info.cubic_disc > 0) == (E.disc > 0)


def test_real_connected():
    assert is_real_connected(derive_invariants(0, 1, 1, -4, -10))
    assert not is_real_connected(derive_invariants(0, 0, 0, -1, 0))
    assert is_real_connected(derive_invariants(0, -1, 1, -10, -20))


def test_ap_examples():
    assert ap_point_count(derive_invariants(0, -1, 1, -10, -20), 3) == -1
    assert ap_point_count(derive_invariants(0, 1, 1, -4, -10), 2) == -2
    E = derive_invariants(0, 0, 0, -1, 0)
    assert ap_point_count(E, 5) == 5 + 1 - brute_count(E, 5)


def test_ap_bad_reduction():
    with pytest.raises(BadReductionError):
        ap_point_count(derive_invariants(0, -1, 1, -10, -20), 11)


@given(ainv)
@settings(max_examples=30, deadline=None)
def test_ap_matches_brute_force(a):
    E = curve_or_none(a)
    assume(E is not None)
    for p in (2, 3, 5, 7, 11, 13, 31):
        if E.disc % p:
            assert ap_point_count(E, p) == p + 1 - brute_count(E, p)


@given(ainv)
@settings(max_examples=100, deadline=None)
def test_hasse_bound(a):
    E = curve_or_none(a)
    assume(E is not None)
    for p in primes_up_to(10**4)[::97]:
        if E.disc % p:
            assert ap_point_count(E, p) ** 2 <= 4 * p


def test_supersingular_at_2():
    assert is_supersingular_at_2(derive_invariants(0, 1, 1, -4, -10))
    assert is_supersingular_at_2(derive_invariants(0, -1, 1, -10, -20))
    E = derive_invariants(1, 1, 1, -10, -10)
    assert is_supersingular_at_2(E) == ((2 + 1 - brute_count(E, 2)) % 2 == 0)


def test_cm_examples():
    assert cm_discriminant(derive_invariants(0, 0, 1, 0, 2)) == -3
    assert cm_discriminant(derive_invariants(0, 0, 0, -1, 0)) == -4
    assert cm_discriminant(derive_invariants(0, -1, 1, -10, -20)) is None


def test_cm_table_matches_klein_j():
    mpmath.mp.dps = 60
    for D, j in CM_J_INVARIANTS.items():
        tau = (D + mpmath.sqrt(D)) / 2
        val = 1728 * mpmath.kleinj(tau)
        assert abs(mpmath.im(val)) < 1e-20
        assert int(mpmath.nint(mpmath.re(val))) == j
    mpmath.mp.dps = 15


def test_twist_examples():
    E = derive_invariants(0, 0, 1, 0, 2)
    assert quadratic_twist(E, -3).j == (0, 1)
    E = derive_invariants(0, -1, 1, -10, -20)
    assert quadratic_twist(E, 1).j == E.j
    with pytest.raises(ValueError):
        quadratic_twist(E, 4)
    with pytest.raises(ValueError):
        quadratic_twist(E, 0)


@given(ainv, st.sampled_from([-7, -5, -3, -2, -1, 2, 3, 5, 6, 13, -15]))
@settings(max_examples=50, deadline=None)
def test_twist_ap_relation(a, d):
    E = curve_or_none(a)
    assume(E is not None)
    T = quadratic_twist(E, d)
    assert T.j == E.j
    assert quadratic_twist(T, d).j == E.j
    for p in (5, 7, 11, 13, 17, 19, 23):
        if E.disc % p and T.disc % p and d % p:
            assert ap_point_count(T, p) == twist_character(d, p) * ap_point_count(E, p)
