from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modparity import linalg as la
from modparity.arith import genus_x0, is_prime, primes_up_to
from modparity.curve import ap_values, derive_invariants
from modparity.modsym import (EigenformNotFound, analytic_rank_parity, atkin_lehner_matrix, build_space,
                              hecke_matrix, locate_eigenform, plus_hecke_matrix)


@lru_cache(maxsize=None)
def space(N):
    return build_space(N)


def mat(h):
    return np.asarray(h, dtype=object)


def line_for(N, ainvs):
    S = space(N)
    E = derive_invariants(*ainvs)
    ap = ap_values(E, [l for l in primes_up_to(2 * S.sturm_bound) if N % l])
    return S, locate_eigenform(S, ap)


def exact_divisors(N):
    return [q for q in range(1, N + 1) if N % q == 0 and np.gcd(q, N // q) == 1]


def test_cuspidal_dimension_examples():
    assert space(11).cuspidal_dimension == 2
    assert space(1).cuspidal_dimension == 0
    assert space(37).cuspidal_dimension == 4


def test_level_range():
    with pytest.raises(ValueError):
        build_space(0)
    with pytest.raises(ValueError):
        build_space(5001)


def test_hecke_level_11():
    S = space(11)
    assert np.array_equal(mat(hecke_matrix(S, 1)), np.eye(2, dtype=object))
    assert np.array_equal(mat(hecke_matrix(S, 2)), -2 * np.eye(2, dtype=object))
    assert np.array_equal(mat(hecke_matrix(S, 3)), -1 * np.eye(2, dtype=object))


def test_atkin_lehner_examples():
    S = space(11)
    assert np.array_equal(mat(atkin_lehner_matrix(S, 1)), np.eye(2, dtype=object))
    assert np.array_equal(mat(atkin_lehner_matrix(S, 11)), -np.eye(2, dtype=object))
    W = mat(atkin_lehner_matrix(space(15), 3))
    assert np.array_equal(W.dot(W), np.eye(W.shape[0], dtype=object))
    with pytest.raises(ValueError):
        atkin_lehner_matrix(space(12), 2)


@given(st.integers(1, 500))
@settings(max_examples=40, deadline=None)
def test_cuspidal_dimension_is_twice_genus(N):
    assert space(N).cuspidal_dimension == 2 * genus_x0(N)


@given(st.integers(2, 150))
@settings(max_examples=25, deadline=None)
def test_hecke_commute_and_involutions(N):
    S = space(N)
    g = S.cuspidal_dimension
    if g == 0:
        return
    ops = {n: mat(hecke_matrix(S, n)) for n in (2, 3, 4, 5, 6, 7)}
    for a in ops:
        for b in ops:
            assert np.array_equal(ops[a].dot(ops[b]), ops[b].dot(ops[a]))
    good = [l for l in (2, 3, 5, 7) if N % l]
    for Q in exact_divisors(N):
        W = mat(atkin_lehner_matrix(S, Q))
        assert np.array_equal(W.dot(W), np.eye(g, dtype=object))
        for l in good:
            assert np.array_equal(W.dot(ops[l]), ops[l].dot(W))


@given(st.integers(2, 100), st.sampled_from([2, 3, 5]))
@settings(max_examples=30, deadline=None)
def test_hecke_square_recurrence(N, p):
    if N % p == 0:
        return
    S = space(N)
    if S.cuspidal_dimension == 0:
        return
    Tp = mat(hecke_matrix(S, p))
    Tp2 = mat(hecke_matrix(S, p * p))
    assert np.array_equal(Tp2, Tp.dot(Tp) - p * np.eye(Tp.shape[0], dtype=object))


@pytest.mark.parametrize("N", [11, 23, 37, 63, 97, 125])
@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_merel_matrices_match_coset_action(N, p):
    # two independent constructions of T_p on the full space
    if N % p == 0:
        pytest.skip("coset route covers good primes only")
    S = space(N)
    assert np.array_equal(np.asarray(S.hecke_full(p), dtype=object),
                          np.asarray(S.hecke_full_by_cosets(p), dtype=object))


def test_deterministic_matrices():
    a = mat(hecke_matrix(build_space(53), 2))
    b = mat(hecke_matrix(build_space(53), 2))
    assert np.array_equal(a, b)


def test_locate_eigenform_examples():
    S, line = line_for(11, (0, -1, 1, -10, -20))
    assert line.N == 11
    _, l37a = line_for(37, (0, 0, 1, -1, 0))
    _, l37b = line_for(37, (0, 1, 1, -23, -50))
    assert la.rank_q(np.vstack([l37a.vector, l37b.vector])) == 2
    with pytest.raises(EigenformNotFound):
        locate_eigenform(space(11), {l: 0 for l in (2, 3, 5, 7)})


def test_rank_parity_examples():
    assert analytic_rank_parity(*line_for(11, (0, -1, 1, -10, -20))) == "even"
    assert analytic_rank_parity(*line_for(37, (0, 0, 1, -1, 0))) == "odd"
    assert analytic_rank_parity(*line_for(19, (0, 1, 1, -9, -15))) == "even"


def test_eigenvalues_on_located_line(optimal):
    # every prime-conductor curve up to 200: T_l acts by a_l on the located line
    for r in optimal:
        if r.conductor > 200:
            break
        if not is_prime(r.conductor):
            continue
        S, line = line_for(r.conductor, r.a_invariants)
        E = r.curve()
        v = np.asarray(line.vector, dtype=object)
        for l in primes_up_to(S.sturm_bound):
            if r.conductor % l == 0:
                continue
            img = np.asarray(la.matmul(v[None, :], S.hecke_full(l))[0], dtype=object)
            assert np.array_equal(img, ap_values(E, [l])[l] * v)


def test_plus_space_halves_dimension():
    for N in (11, 37, 43, 97, 389):
        S = space(N)
        assert plus_hecke_matrix(S, 2).shape[0] * 2 == S.cuspidal_dimension
