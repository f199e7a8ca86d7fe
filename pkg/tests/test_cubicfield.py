import json
import math
import os
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from modparity.arith import is_prime
from modparity.classify import predict_parity_prime_level, theorem_one_filter
from modparity.cubicfield import (NotTotallyRamifiedError, ReducibleCubicError, class_number_naive, field_from_cubic,
                                  fundamental_unit, fundamental_unit_valuation, prop5_predicate, totally_ramified_at,
                                  two_division_field)
from modparity.curve import derive_invariants, integer_roots

HERE = os.path.dirname(__file__)
with open(os.path.join(HERE, "data", "cubic_fields.json")) as fh:
    ORACLE = json.load(fh)

# a unit is found by the search iff log of its size is within the size bound
UNIT_LOG_BOUND = math.log(10**6)

E11 = derive_invariants(0, -1, 1, -10, -20)
E24859 = derive_invariants(0, 1, 1, -4, -10)

cubic = st.tuples(*[st.integers(-40, 40)] * 3).filter(lambda t: t[2] != 0 and not integer_roots(*t))


def _rem(a, b):
    a = list(a)
    while len(a) >= len(b):
        q = a[0] / b[0]
        a = [x - q * y for x, y in zip(a, b + [0] * (len(a) - len(b)))][1:]
    while a and a[0] == 0:
        a = a[1:]
    return a


def sturm_real_roots(coeffs):
    """Number of distinct real roots by a Sturm chain (leading coefficient first)."""
    p = [Fraction(c) for c in coeffs]
    n = len(p) - 1
    dp = [c * (n - i) for i, c in enumerate(p[:-1])]
    chain = [p, dp]
    while True:
        r = _rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-x for x in r])

    def changes(sign_of):
        s = [x for x in (sign_of(q) for q in chain) if x]
        return sum(1 for a, b in zip(s, s[1:]) if a != b)

    at_pos = lambda q: (q[0] > 0) - (q[0] < 0)
    at_neg = lambda q: ((q[0] > 0) - (q[0] < 0)) * (-1) ** (len(q) - 1)
    return changes(at_neg) - changes(at_pos)


def test_examples_level_11():
    K = two_division_field(E11)
    assert K.signature == (1, 1)
    assert K.field_disc == -44           # PARI: nfdisc
    assert class_number_naive(K) == 1
    assert fundamental_unit_valuation(K) == "v<2"
    assert prop5_predicate(E11) == "neither_detected"


def test_example_level_24859():
    K = two_division_field(E24859)
    assert K.signature == (1, 1)
    assert K.field_disc == -99436        # PARI: nfdisc; regulator 53.57
    assert fundamental_unit(K).unit is None
    assert fundamental_unit_valuation(K) == "undetermined"


def test_reducible_rejected():
    with pytest.raises(ReducibleCubicError):
        two_division_field(derive_invariants(0, 0, 0, -1, 0))


def test_small_discriminant_has_class_number_one():
    K = field_from_cubic(0, -1, -1)      # disc -23, Minkowski bound below 2
    assert K.field_disc == -23
    assert class_number_naive(K) == 1


def test_class_number_gate():
    K = field_from_cubic(0, 101, 1)
    assert abs(K.field_disc) > 10**6
    assert class_number_naive(K) is None


def test_valuation_needs_total_ramification():
    with pytest.raises(NotTotallyRamifiedError):
        fundamental_unit_valuation(field_from_cubic(0, -1, -1))
    with pytest.raises(ValueError):
        fundamental_unit_valuation(field_from_cubic(0, -3, 1))   # totally real


@pytest.mark.parametrize("row", ORACLE, ids=lambda r: "x3{:+d}x2{:+d}x{:+d}".format(*r["cubic"]))
def test_field_invariants_match_oracle(row):
    K = field_from_cubic(*row["cubic"])
    assert K.poly_disc == row["poly_disc"]
    assert K.field_disc == row["field_disc"]
    assert K.signature == (1, 1)
    assert totally_ramified_at(K, 2) == row["two_totally_ramified"]


ELIGIBLE = [r for r in ORACLE if abs(r["field_disc"]) <= 10**6 and r["regulator"] < UNIT_LOG_BOUND - 0.1]


@pytest.mark.parametrize("row", ELIGIBLE, ids=lambda r: "x3{:+d}x2{:+d}x{:+d}".format(*r["cubic"]))
def test_class_number_matches_oracle(row):
    K = field_from_cubic(*row["cubic"])
    assert class_number_naive(K) == row["class_number"]
    u = fundamental_unit(K)
    assert math.isclose(math.log(u.size), row["regulator"], rel_tol=1e-5)


def test_unit_valuation_matches_oracle():
    found = 0
    for row in ORACLE:
        if not row["two_totally_ramified"]:
            continue
        K = field_from_cubic(*row["cubic"])
        got = fundamental_unit_valuation(K)
        if row["regulator"] < UNIT_LOG_BOUND - 0.1:
            assert got == ("v>=2" if row["unit_minus_one_v2"] >= 2 else "v<2")
            found += 1
        elif row["regulator"] > UNIT_LOG_BOUND + 0.1:
            assert got == "undetermined"
    assert found >= 5


@given(cubic)
@settings(max_examples=100, deadline=None)
def test_signature_matches_sturm_count(t):
    b, c, d = t
    K = field_from_cubic(b, c, d)
    real = sturm_real_roots([1, b, c, d])
    assert K.signature == ((1, 1) if real == 1 else (3, 0))
    assert (K.poly_disc < 0) == (real == 1)


@given(cubic)
@settings(max_examples=100, deadline=None)
def test_field_disc_divides_with_square_quotient(t):
    K = field_from_cubic(*t)
    assert K.poly_disc % K.field_disc == 0
    q = K.poly_disc // K.field_disc
    assert q > 0 and math.isqrt(q) ** 2 == q


def test_prop5_against_hecke(optimal, levels, report_line):
    # not an assertion about the proposition: it is only sufficient
    counts = {}
    for r in optimal:
        if r.conductor > 600 or not is_prime(r.conductor):
            continue
        E = r.curve()
        v = theorem_one_filter(E, r.conductor, "odd" if r.rank % 2 else "even")
        if v.rule.value != "CASE_3B" or v.parity != "undetermined":
            continue
        pred = predict_parity_prime_level(E, r.conductor, levels(r.conductor))
        key = ("d_m>=2" if pred.parity == "even" else "d_m=1", prop5_predicate(E))
        counts[key] = counts.get(key, 0) + 1
    assert counts
    for (dm, res), n in sorted(counts.items()):
        report_line(f"prop5 over 3b curves N<=600: {dm} {res} {n}")
