"""One test per acceptance criterion; the summary lines print after the run."""

import importlib
import time

import numpy as np

from modparity.arith import factor, genus_x0, is_prime, merel_criterion, neumann_setzer_test, primes_up_to
from modparity.classify import (Rule, WatkinsRow, composite_conditions, predict_parity_prime_level,
                                theorem_one_filter, watkins_verdict)
from modparity.curve import ap_values, derive_invariants, two_torsion_info
from modparity.modsym import analytic_rank_parity, atkin_lehner_matrix, build_space, hecke_matrix, locate_eigenform


def parity(n):
    return "odd" if n % 2 else "even"


def test_paper_examples(acceptance):
    with acceptance(1, "paper-example verdicts") as info:
        t0 = time.perf_counter()
        v = theorem_one_filter(derive_invariants(1, 1, 1, -10, -10), 15)
        assert v.rule == Rule.CASE_3A
        v = theorem_one_filter(derive_invariants(1, -1, 0, -58, -105), 2537)
        assert v.rule == Rule.CASE_3A and list(v.detail["odd_primes"]) == [43, 59]
        v = theorem_one_filter(derive_invariants(0, 1, 1, -4, -10), 24859)
        assert v.rule == Rule.CASE_3B and v.parity == "undetermined"
        assert v.detail["supersingular_at_2"] and v.detail["disc_negative"]
        assert not two_torsion_info(derive_invariants(0, 1, 1, -4, -10)).has_rational_root
        v = theorem_one_filter(derive_invariants(0, 0, 1, 0, 2), 243)
        assert v.rule == Rule.CASE_3C and v.detail["j"] == "0" and v.detail["cm_discriminant"] == -3
        dt = time.perf_counter() - t0
        assert dt < 5
        info["summary"] = "4/4 exact"


def test_parity_oracle(acceptance, optimal, levels):
    with acceptance(2, "prime-level parity vs recorded degree, N <= 1000") as info:
        bad, n = [], 0
        for r in optimal:
            if r.conductor > 1000 or not is_prime(r.conductor):
                continue
            v = predict_parity_prime_level(r.curve(), r.conductor, levels(r.conductor))
            n += 1
            if v.parity != parity(r.degree):
                bad.append(r.label)
        assert n > 0 and bad == [], bad
        info["summary"] = f"{n}/{n} agree"


def test_merel_cross_check(acceptance, levels):
    with acceptance(3, "u^2+16v^2 criterion vs Eisenstein local factor, N <= 1000") as info:
        bad, n = [], 0
        for N in primes_up_to(1000):
            if N % 8 != 1:
                continue
            dims = [f.local_dim for f in levels(N).factors if f.eisenstein]
            n += 1
            if len(dims) != 1 or merel_criterion(N) != (dims[0] >= 2):
                bad.append((N, dims))
            if N == 17:
                assert not merel_criterion(17) and dims == [1]
        assert bad == [], bad
        info["summary"] = f"{n}/{n} agree"


def test_watkins_audit(acceptance, optimal):
    with acceptance(4, "odd degree, prime level, no 2-torsion forces N = 3 mod 8, N <= 3000") as info:
        rows = [WatkinsRow(r.label, r.conductor, r.degree, two_torsion_info(r.curve()).has_rational_root)
                for r in optimal if r.conductor <= 3000]
        rep = watkins_verdict(rows)
        assert rep.checked and rep.violations == [], rep.violations
        info["summary"] = f"{len(rep.checked)} checked, {len(rep.excluded)} excluded, 0 violations"


def test_composite_audit(acceptance, optimal):
    with acceptance(5, "odd-degree necessary conditions over the fixture, N <= 3000") as info:
        bad, n = [], 0
        for r in optimal:
            if r.conductor > 3000 or r.degree % 2 == 0:
                continue
            n += 1
            c = composite_conditions(r.curve(), r.conductor, parity(r.rank))
            if not c.all_pass():
                bad.append((r.label, c.failures()))
        assert n > 0 and bad == [], bad
        info["summary"] = f"{n} odd-degree curves, 0 violations"


def _eye(g):
    return np.eye(g, dtype=object)


def test_structural_identities(acceptance, levels):
    with acceptance(6, "structural identities") as info:
        for N in primes_up_to(500):
            d = levels(N)
            assert sum(f.local_dim for f in d.factors) == d.lattice.rank == genus_x0(N), N
        checks = 0
        for N in range(1, 301):
            S = build_space(N)
            g = S.cuspidal_dimension
            assert g == 2 * genus_x0(N), N
            if g == 0:
                continue
            T = {p: np.asarray(hecke_matrix(S, p), dtype=object) for p in (2, 3, 5)}
            for a in T:
                for b in T:
                    assert np.array_equal(T[a].dot(T[b]), T[b].dot(T[a])), (N, a, b)
            for Q in (q for q in range(1, N + 1) if N % q == 0 and np.gcd(q, N // q) == 1):
                W = np.asarray(atkin_lehner_matrix(S, Q), dtype=object)
                assert np.array_equal(W.dot(W), _eye(g)), (N, Q)
                for p in T:
                    if N % p:
                        assert np.array_equal(W.dot(T[p]), T[p].dot(W)), (N, Q, p)
                checks += 1
        info["summary"] = f"primes <= 500, levels <= 300, {checks} involutions"


def test_root_number_relation(acceptance, optimal):
    with acceptance(7, "rank parity from W_N matches fixture rank, prime N <= 500") as info:
        bad, n = [], 0
        for r in optimal:
            if r.conductor > 500 or not is_prime(r.conductor):
                continue
            S = build_space(r.conductor)
            E = r.curve()
            ap = ap_values(E, [l for l in primes_up_to(2 * S.sturm_bound) if r.conductor % l])
            n += 1
            if analytic_rank_parity(S, locate_eigenform(S, ap)) != parity(r.rank):
                bad.append(r.label)
        assert n > 0 and bad == [], bad
        info["summary"] = f"{n}/{n} agree"


def test_neumann_setzer(acceptance, optimal):
    with acceptance(8, "u^2+64 levels: predicted vs recorded degree parity, N <= 3000") as info:
        bad, n = [], 0
        for r in optimal:
            if r.conductor > 3000 or not is_prime(r.conductor):
                continue
            t = neumann_setzer_test(r.conductor)
            if t is None or not two_torsion_info(r.curve()).has_rational_root:
                continue
            n += 1
            if t.odd_degree != (r.degree % 2 == 1):
                bad.append(r.label)
        assert n > 0 and bad == [], bad
        info["summary"] = f"{n}/{n} agree"


PROPERTY_SUITES = ("test_arith", "test_curve", "test_modsym", "test_hecke2", "test_classify",
                   "test_cubicfield", "test_ingest_cli")


def test_property_suites_present(acceptance):
    with acceptance(9, "full-strength results covered by property suites") as info:
        counts = {}
        for name in PROPERTY_SUITES:
            mod = importlib.import_module(name)
            counts[name] = sum(1 for k, f in vars(mod).items()
                               if k.startswith("test_") and getattr(f, "is_hypothesis_test", False))
        assert all(counts.values()), counts
        assert factor(2537).factors == ((43, 1), (59, 1))
        info["summary"] = ", ".join(f"{k[5:]}={v}" for k, v in counts.items())
