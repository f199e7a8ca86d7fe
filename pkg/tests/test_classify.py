import pytest
from hypothesis import given, settings, strategies as st

from modparity.arith import factor, is_prime
from modparity.classify import (CM_LEVELS, Citation, ConductorMismatch, Rule, WatkinsRow, composite_conditions,
                                predict_parity_prime_level, theorem_one_filter, watkins_verdict)
from modparity.curve import cm_discriminant, derive_invariants, two_torsion_info

CITATIONS = {c.value for c in Citation}


def rank_parity(r):
    return "odd" if r.rank % 2 else "even"


def test_filter_examples():
    v = theorem_one_filter(derive_invariants(1, -1, 0, -58, -105), 2537)
    assert (v.parity, v.rule) == ("undetermined", Rule.CASE_3A)
    assert list(v.detail["odd_primes"]) == [43, 59]
    v = theorem_one_filter(derive_invariants(0, 1, 1, -4, -10), 24859)
    assert (v.parity, v.rule) == ("undetermined", Rule.CASE_3B)
    assert v.detail["supersingular_at_2"] and v.detail["disc_negative"]
    v = theorem_one_filter(derive_invariants(0, 0, 1, 0, 2), 243)
    assert (v.parity, v.rule) == ("undetermined", Rule.CASE_3C)
    assert v.detail["cm_discriminant"] == -3
    v = theorem_one_filter(derive_invariants(1, 1, 1, -10, -10), 15)
    assert (v.parity, v.rule) == ("undetermined", Rule.CASE_3A)


def test_filter_even_rules():
    v = theorem_one_filter(derive_invariants(0, 0, 1, -1, 0), 37, rank_parity="odd")
    assert (v.parity, v.rule) == ("even", Rule.ODD_ANALYTIC_RANK)
    # 37b: prime level, no 2-torsion, ordinary at 2
    v = theorem_one_filter(derive_invariants(0, 1, 1, -23, -50), 37, rank_parity="even")
    assert (v.parity, v.rule) == ("even", Rule.CASE_3B)
    v = theorem_one_filter(derive_invariants(0, 1, 1, -23, -50), 37)
    assert v.parity == "even"


def test_two_power_level_outside_scope():
    v = theorem_one_filter(derive_invariants(0, 0, 0, -4, 0), 64)   # 64a1
    assert v.rule == Rule.OUTSIDE_SCOPE and v.parity == "undetermined"


def test_conductor_mismatch():
    with pytest.raises(ConductorMismatch):
        theorem_one_filter(derive_invariants(0, -1, 1, -10, -20), 13)
    with pytest.raises(ConductorMismatch):
        predict_parity_prime_level(derive_invariants(0, -1, 1, -10, -20), 13)


def test_predict_examples(levels):
    assert predict_parity_prime_level(derive_invariants(0, -1, 1, -10, -20), 11, levels(11)).parity == "odd"
    assert predict_parity_prime_level(derive_invariants(1, -1, 1, -1, -14), 17, levels(17)).parity == "odd"
    v = predict_parity_prime_level(derive_invariants(0, 0, 1, -1, 0), 37, levels(37))
    assert v.parity == "even" and v.rule == Rule.TM_NE_Z2
    with pytest.raises(ValueError):
        predict_parity_prime_level(derive_invariants(1, 1, 1, -10, -10), 15)


@pytest.mark.slow
def test_predict_level_24859():
    v = predict_parity_prime_level(derive_invariants(0, 1, 1, -4, -10), 24859)
    assert v.parity == "odd"


def test_watkins_examples():
    assert watkins_verdict([WatkinsRow("11a1", 11, 1, False)]).passed
    assert watkins_verdict([WatkinsRow("24859a1", 24859, 3979, False)]).passed
    rep = watkins_verdict([WatkinsRow("17a1", 17, 1, True)])
    assert rep.excluded == ["17a1"] and rep.checked == []
    assert not watkins_verdict([WatkinsRow("fake", 17, 1, False)]).passed


def test_composite_examples():
    E = derive_invariants(1, -1, 0, -58, -105)
    assert composite_conditions(E, 2537, "even").all_pass()
    c = composite_conditions(E, 3 * 5 * 7 * 11, "even")
    assert not c.at_most_three_primes and not c.at_most_two_odd_primes
    assert composite_conditions(E, 2537, "odd").failures() == ["even_analytic_rank"]


def test_filter_never_contradicts_odd_degree(optimal):
    bad = []
    for r in optimal:
        if r.degree % 2 == 0:
            continue
        v = theorem_one_filter(r.curve(), r.conductor, rank_parity(r))
        if v.parity == "even":
            bad.append(r.label)
    assert bad == []


def test_verdicts_cite_and_never_claim_odd(optimal):
    for r in optimal[::7]:
        v = theorem_one_filter(r.curve(), r.conductor, rank_parity(r))
        assert v.parity in ("even", "undetermined")
        assert v.citations and set(v.citations) <= CITATIONS


def test_cm_undetermined_only_at_four_levels(allcurves):
    levels_seen = set()
    for r in allcurves.records:
        E = r.curve()
        if cm_discriminant(E) is None:
            continue
        v = theorem_one_filter(E, r.conductor, rank_parity(r))
        if v.parity == "undetermined" and not two_torsion_info(E).has_rational_root:
            levels_seen.add(r.conductor)
    assert levels_seen <= CM_LEVELS and levels_seen


@given(st.integers(2, 3000))
@settings(max_examples=200, deadline=None)
def test_checklist_matches_factorisation(N):
    E = derive_invariants(1, -1, 0, -58, -105)
    f = factor(N)
    c = composite_conditions(E, N, "even", has_two_torsion=False)
    assert c.at_most_two_odd_primes == (len([p for p, _ in f.factors if p > 2]) <= 2)
    assert c.composite_has_two_torsion == (len(f.factors) < 2)
    assert c.at_most_three_primes == (len(f.factors) <= 3)


def test_composite_odd_degree_rows(optimal):
    bad = []
    for r in optimal:
        if r.degree % 2 == 0 or r.conductor > 3000 or is_prime(r.conductor):
            continue
        c = composite_conditions(r.curve(), r.conductor, rank_parity(r), r.torsion_order % 2 == 0)
        if not c.all_pass():
            bad.append((r.label, c.failures()))
    assert bad == []
