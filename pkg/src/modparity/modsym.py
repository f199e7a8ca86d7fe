"""Weight-2 modular symbols for Gamma_0(N) via Manin symbols.

The space is built over Q and then given the integral structure spanned by
the Manin symbols themselves, so every Hecke, star and Atkin-Lehner matrix
on the cuspidal lattice is an integer matrix.  Matrices act on row vectors
from the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping, Optional

import numpy as np
from flint import fmpq_mat, fmpz_mat

from . import linalg as la
from .arith import factor, genus_x0, is_prime, primes_up_to, sturm_bound

MAX_LEVEL = 5000


class P1List:
    """Canonical representatives of P^1(Z/N), lexicographically ordered.

    Each class is represented by its lexicographically least pair (c, d) with
    0 <= c, d < N.  ``table[c*N + d]`` maps any pair to its class (or -1 when
    gcd(c, d, N) > 1).
    """

    def __init__(self, N: int):
        self.N = N
        units = np.array([u for u in range(N) if math.gcd(u, N) == 1] or [0], dtype=np.int64)
        table = np.full(N * N, -1, dtype=np.int32)
        reps: list[tuple[int, int]] = []
        all_d = np.arange(N, dtype=np.int64)
        for c in range(N):
            row = table[c * N:(c + 1) * N]
            valid = np.gcd(np.gcd(all_d, c), N) == 1 if N > 1 else np.ones(N, bool)
            for d in np.flatnonzero((row == -1) & valid):
                if table[c * N + d] != -1:
                    continue
                idx = len(reps)
                reps.append((c, int(d)))
                table[((units * c) % N) * N + (units * d) % N] = idx
        self.reps = reps
        self.table = table

    def __len__(self) -> int:
        return len(self.reps)

    def index(self, c: int, d: int) -> int:
        N = self.N
        return int(self.table[(c % N) * N + (d % N)])

    def index_array(self, c: np.ndarray, d: np.ndarray) -> np.ndarray:
        N = self.N
        return self.table[(c % N) * N + (d % N)]


# -- Heilbronn--Merel matrices -------------------------------------------------

@lru_cache(maxsize=4096)
def merel_matrices(n: int) -> tuple[np.ndarray, ...]:
    """Merel's set {[a b; c d] : ad - bc = n, a > b >= 0, d > c >= 0} as four arrays."""
    A, B, C, D = [], [], [], []
    for a in range(1, n + 1):
        if n % a == 0:
            # b = 0: d = n/a and any 0 <= c < d
            d = n // a
            A += [a] * d; B += [0] * d; C += list(range(d)); D += [d] * d
        for b in range(1, a):
            # d = (n + bc)/a > c  <=>  c (a - b) < n
            for c in range(0, -(-n // (a - b))):
                t = n + b * c
                if t % a == 0:
                    A.append(a); B.append(b); C.append(c); D.append(t // a)
    return tuple(np.array(x, dtype=np.int64) for x in (A, B, C, D))


# -- continued fractions -------------------------------------------------------

def _convergent_denominators(num: int, den: int) -> list[int]:
    """q_{-2}, q_{-1}, q_0, ..., q_n for the continued fraction of num/den (den > 0)."""
    qs = [1, 0]
    a, b = num, den
    while b != 0:
        t = a // b
        qs.append(t * qs[-1] + qs[-2])
        a, b = b, a - t * b
    return qs


def _lift_to_sl2(c: int, d: int, N: int) -> tuple[int, int, int, int]:
    """A matrix [a b; c' d'] in SL2(Z) with (c', d') = (c, d) mod N."""
    if c == 0 and d % N == 1 % N:
        return (1, 0, 0, 1)
    if c == 0:
        c = N
    while math.gcd(c, d) != 1:
        d += N
    g, x, y = _xgcd(c, d)
    # x c + y d = 1 -> a = y, b = -x gives a d - b c = 1
    return (y, -x, c, d)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


# -- cusps -----------------------------------------------------------------------

class CuspList:
    """Gamma_0(N)-inequivalent cusps, discovered on demand."""

    def __init__(self, N: int):
        self.N = N
        self.cusps: list[tuple[int, int]] = []
        self._by_key: dict[tuple[int, int], int] = {}

    @staticmethod
    def _normalize(a: int, c: int) -> tuple[int, int]:
        if c == 0:
            return (1, 0)
        g = math.gcd(a, c)
        a, c = a // g, c // g
        if c < 0:
            a, c = -a, -c
        return a, c

    def _equivalent(self, x: tuple[int, int], y: tuple[int, int]) -> bool:
        (a1, c1), (a2, c2) = x, y
        N = self.N
        s1 = pow(a1, -1, c1) if c1 > 1 else (a1 if c1 == 0 else 0)
        s2 = pow(a2, -1, c2) if c2 > 1 else (a2 if c2 == 0 else 0)
        m = math.gcd(c1 * c2, N)
        return (s1 * c2 - s2 * c1) % m == 0

    def index(self, a: int, c: int) -> int:
        x = self._normalize(a, c)
        key = (x[0] % max(self.N * x[1], 1), x[1])
        if key in self._by_key:
            return self._by_key[key]
        for i, y in enumerate(self.cusps):
            if self._equivalent(x, y):
                self._by_key[key] = i
                return i
        self.cusps.append(x)
        self._by_key[key] = len(self.cusps) - 1
        return len(self.cusps) - 1


# -- the space -----------------------------------------------------------------

@dataclass(frozen=True)
class HeckeMatrix:
    n: int
    matrix: np.ndarray

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)


class ManinSymbolSpace:
    """Modular symbols of weight 2 on Gamma_0(N), with an integral structure.

    Attributes of note: ``p1`` (P^1 representatives), ``free`` (indices of the
    Manin symbols used as a rational basis), ``lattice`` coordinates in which
    every Manin symbol is an integral vector (``symbol_coords``), the boundary
    map, and ``cuspidal_basis`` (saturated, rows in lattice coordinates).
    """

    def __init__(self, N: int):
        if not 1 <= N <= MAX_LEVEL:
            raise ValueError(f"level must be in [1, {MAX_LEVEL}], got {N}")
        self.N = N
        self.p1 = P1List(N)
        self._build_quotient()
        self._build_boundary()
        self._hecke_cache: dict[int, np.ndarray] = {}
        self._sign_cache: dict[int, np.ndarray] = {}
        self._solvers: dict = {}

    # ---- presentation -----------------------------------------------------

    def _build_quotient(self) -> None:
        p1, N = self.p1, self.N
        n = len(p1)
        c = np.array([r[0] for r in p1.reps], dtype=np.int64)
        d = np.array([r[1] for r in p1.reps], dtype=np.int64)
        sigma = p1.index_array(d, -c)
        tau = p1.index_array(d, -c - d)
        self.sigma, self.tau = sigma, tau

        # two-term relations: x_i = sign_i * x_{rep_i}; rep -1 means x_i = 0
        rep = np.full(n, -1, dtype=np.int64)
        sign = np.zeros(n, dtype=np.int64)
        for i in range(n):
            j = int(sigma[i])
            if j == i:
                continue
            if i < j:
                rep[i], sign[i] = i, 1
                rep[j], sign[j] = i, -1
        reps = sorted(set(int(r) for r in rep if r >= 0))
        var = {r: k for k, r in enumerate(reps)}

        # three-term relations
        seen = np.zeros(n, dtype=bool)
        rel_rows = []
        for i in range(n):
            if seen[i]:
                continue
            orbit = [i, int(tau[i]), int(tau[tau[i]])]
            for j in orbit:
                seen[j] = True
            row: dict[int, int] = {}
            for j in orbit if orbit[1] != i else [i, i, i]:
                if rep[j] < 0:
                    continue
                k = var[int(rep[j])]
                row[k] = row.get(k, 0) + int(sign[j])
            row = {k: v for k, v in row.items() if v}
            if row:
                rel_rows.append(row)

        nvar = len(reps)
        if rel_rows:
            rel = fmpz_mat(len(rel_rows), nvar)
            for r, row in enumerate(rel_rows):
                for k, v in row.items():
                    rel[r, k] = v
            red, rank = fmpq_mat(rel).rref()
        else:
            red, rank = None, 0
        pivots = []
        for r in range(rank):
            for k in range(nvar):
                if red[r, k] != 0:
                    pivots.append(k)
                    break
        pivot_set = set(pivots)
        free_vars = [k for k in range(nvar) if k not in pivot_set]
        free_pos = {k: t for t, k in enumerate(free_vars)}
        nfree = len(free_vars)

        # each pivot variable is minus the free part of its reduced row
        scale = 1
        for r in range(rank):
            for f in free_vars:
                scale = math.lcm(scale, int(red[r, f].q))
        var_img = np.zeros((nvar, nfree), dtype=object)
        for k in free_vars:
            var_img[k, free_pos[k]] = scale
        for r, k in enumerate(pivots):
            for f in free_vars:
                e = red[r, f]
                if e != 0:
                    var_img[k, free_pos[f]] = -int(e.p) * (scale // int(e.q))
        r_int = np.zeros((n, nfree), dtype=object)
        for i in range(n):
            if rep[i] >= 0:
                r_int[i] = sign[i] * var_img[var[int(rep[i])]]

        self.free = [reps[k] for k in free_vars]
        self.dimension = nfree
        if nfree == 0:
            self.symbol_coords = np.zeros((n, 0), dtype=np.int64)
            self._free_coords = np.zeros((0, 0), dtype=np.int64)
            self._free_is_identity = True
            return
        if scale == 1:
            # free symbols map to unit vectors, so they already span the lattice
            self.symbol_coords = la.as_int_array(r_int)
        else:
            hb = la.hnf_rows(r_int)
            self.symbol_coords = la.solve_rows(hb, r_int)
        self._free_coords = self.symbol_coords[self.free]
        self._free_is_identity = np.array_equal(
            np.asarray(self._free_coords, dtype=object), np.eye(nfree, dtype=np.int64).astype(object))
        self._free_inv = la.inverse_q(self._free_coords)

    def _from_free(self, images) -> np.ndarray:
        """Lattice-coordinate matrix of an operator given the images of the free symbols."""
        if self._free_is_identity:
            return la.as_int_array(np.asarray(images))
        images = la.to_fmpq(np.asarray(images))
        return la.fmpq_to_int_array(self._free_inv * images)

    # ---- boundary and cuspidal subspace -----------------------------------

    def _build_boundary(self) -> None:
        N = self.N
        self.cusp_list = CuspList(N)
        rows = []
        for i in self.free:
            c, d = self.p1.reps[i]
            a, b, c2, d2 = _lift_to_sl2(c, d, N)
            rows.append((self.cusp_list.index(a, c2), self.cusp_list.index(b, d2)))
        ncusp = len(self.cusp_list.cusps)
        bd = np.zeros((len(self.free), ncusp), dtype=np.int64)
        for r, (plus, minus) in enumerate(rows):
            bd[r, plus] += 1
            bd[r, minus] -= 1
        self.boundary_free = bd
        if self.dimension == 0:
            self.boundary_map = bd
            self.cuspidal_basis = np.zeros((0, 0), dtype=np.int64)
            return
        self.boundary_map = self._from_free(bd)
        self.cuspidal_basis = la.left_kernel_z(self.boundary_map)

    @property
    def cuspidal_dimension(self) -> int:
        return int(self.cuspidal_basis.shape[0])

    @property
    def genus(self) -> int:
        return genus_x0(self.N)

    @property
    def sturm_bound(self) -> int:
        return sturm_bound(self.N)

    # ---- operators on the full lattice ----------------------------------------

    def _apply_merel(self, n: int) -> np.ndarray:
        A, B, C, D = merel_matrices(n)
        free = np.array(self.free, dtype=np.int64)
        c = np.array([self.p1.reps[i][0] for i in free], dtype=np.int64)
        d = np.array([self.p1.reps[i][1] for i in free], dtype=np.int64)
        N, n_p1 = self.N, len(self.p1)
        c, d = c % N, d % N
        A, B, C, D = A % N, B % N, C % N, D % N
        counts = np.zeros((len(free), n_p1), dtype=np.int64)
        chunk = max(1, 2_000_000 // max(len(A), 1))
        for s in range(0, len(free), chunk):
            cs, ds = c[s:s + chunk, None], d[s:s + chunk, None]
            u = (cs * A + ds * C) % N
            v = (cs * B + ds * D) % N
            idx = self.p1.index_array(u, v)
            rows = np.broadcast_to(np.arange(s, s + len(cs))[:, None], idx.shape)
            ok = idx >= 0
            np.add.at(counts, (rows[ok], idx[ok]), 1)
        return la.matmul(counts, self.symbol_coords)

    def hecke_full(self, n: int) -> np.ndarray:
        """T_n on the whole lattice (Merel's formula, valid for every n)."""
        if n not in self._hecke_cache:
            if n == 1:
                self._hecke_cache[n] = np.eye(self.dimension, dtype=np.int64)
            else:
                self._hecke_cache[n] = self._from_free(self._apply_merel(n))
        return self._hecke_cache[n]

    def symbol_vector(self, alpha, beta) -> np.ndarray:
        """Lattice coordinates of the modular symbol {alpha, beta}; None means infinity."""
        return self._zero_to(beta) - self._zero_to(alpha)

    def _zero_to(self, x) -> np.ndarray:
        if x is None:
            return np.asarray(self.symbol_coords[self.p1.index(0, 1)]).copy()
        x = Fraction(x)
        qs = _convergent_denominators(x.numerator, x.denominator)
        total = np.zeros(self.dimension, dtype=object)
        # {0, x} = sum_{k=-1}^{n} ((-1)^(k-1) q_k : q_{k-1})
        for k in range(-1, len(qs) - 2):
            qk, qk1 = qs[k + 2], qs[k + 1]
            i = self.p1.index((-1) ** ((k - 1) % 2) * qk, qk1)
            total = total + self.symbol_coords[i]
        return la.as_int_array([list(total)])[0]

    def _free_lifts(self):
        for i in self.free:
            c, d = self.p1.reps[i]
            yield _lift_to_sl2(c, d, self.N)

    def act_by_matrix(self, g) -> np.ndarray:
        """Lattice-coordinate images of the free symbols under {a,b} -> {g a, g b}."""
        ga, gb, gc, gd = g
        out = []
        for a, b, c, d in self._free_lifts():
            # symbol (c:d) = {b/d, a/c}
            out.append(self.symbol_vector(_mobius(g, b, d), _mobius(g, a, c)))
        return np.array(out, dtype=object) if out else np.zeros((0, 0), dtype=object)

    def hecke_full_by_cosets(self, p: int) -> np.ndarray:
        """T_p for prime p not dividing N from the coset representatives.

        Independent of Merel's formula; used as a cross-check.
        """
        if self.N % p == 0:
            raise ValueError("coset route implemented for good primes only")
        total = None
        mats = [(1, r, 0, p) for r in range(p)] + [(p, 0, 0, 1)]
        for g in mats:
            img = self.act_by_matrix(g)
            total = img if total is None else total + img
        return self._from_free(total)

    def atkin_lehner_full(self, Q: int) -> np.ndarray:
        N = self.N
        if Q <= 0 or N % Q or math.gcd(Q, N // Q) != 1:
            raise ValueError(f"{Q} is not an exact divisor of {N}")
        if Q == 1:
            return np.eye(self.dimension, dtype=np.int64)
        # Q x - (N/Q) y = 1 gives W = [Q x, y; N, Q] of determinant Q
        _, x, y = _xgcd(Q, N // Q)
        W = (Q * x, -y, N, Q)
        return self._from_free(self.act_by_matrix(W))

    def star_full(self) -> np.ndarray:
        idx = [self.p1.index(-c, d) for c, d in (self.p1.reps[i] for i in self.free)]
        return self._from_free(self.symbol_coords[idx])

    # ---- restriction to the cuspidal lattice -----------------------------------

    def restrict(self, op: np.ndarray, basis: Optional[np.ndarray] = None) -> np.ndarray:
        basis = self.cuspidal_basis if basis is None else basis
        if basis.shape[0] == 0:
            return np.zeros((0, 0), dtype=np.int64)
        return self._solver(basis).conjugate(op)

    def _solver(self, basis: np.ndarray) -> la.RowSolver:
        key = (basis.shape, np.asarray(basis, dtype=object).tobytes() if basis.dtype == object else basis.tobytes())
        if key not in self._solvers:
            self._solvers[key] = la.RowSolver(basis)
        return self._solvers[key]

    def sign_basis(self, sign: int) -> np.ndarray:
        """Saturated basis of the cuspidal symbols fixed by star up to ``sign``.

        Rows are in cuspidal-lattice coordinates.
        """
        if sign not in self._sign_cache:
            g = self.cuspidal_dimension
            if g == 0:
                self._sign_cache[sign] = np.zeros((0, 0), dtype=np.int64)
            else:
                star = self.restrict(self.star_full())
                op = la.matmul(star, np.eye(g, dtype=np.int64)) - sign * np.eye(g, dtype=np.int64)
                self._sign_cache[sign] = la.left_kernel_z(op)
        return self._sign_cache[sign]


def _mobius(g, num: int, den: int):
    a, b, c, d = g
    top, bot = a * num + b * den, c * num + d * den
    if bot == 0:
        return None
    return Fraction(top, bot)


def build_space(N: int) -> ManinSymbolSpace:
    return ManinSymbolSpace(N)


def hecke_matrix(space: ManinSymbolSpace, n: int) -> HeckeMatrix:
    """T_n on the integral cuspidal lattice (U_n when n shares factors with N)."""
    if n < 1:
        raise ValueError("n must be positive")
    return HeckeMatrix(n, space.restrict(space.hecke_full(n)))


def atkin_lehner_matrix(space: ManinSymbolSpace, Q: int) -> HeckeMatrix:
    return HeckeMatrix(Q, space.restrict(space.atkin_lehner_full(Q)))


def star_matrix(space: ManinSymbolSpace) -> np.ndarray:
    return space.restrict(space.star_full())


def plus_basis(space: ManinSymbolSpace) -> np.ndarray:
    """Saturated basis of the star-fixed cuspidal lattice, rows in full coordinates."""
    sb = space.sign_basis(1)
    if sb.shape[0] == 0:
        return np.zeros((0, space.dimension), dtype=np.int64)
    return la.matmul(sb, space.cuspidal_basis)


def plus_hecke_matrix(space: ManinSymbolSpace, n: int, basis: Optional[np.ndarray] = None) -> np.ndarray:
    basis = plus_basis(space) if basis is None else basis
    return space.restrict(space.hecke_full(n), basis)


@dataclass(frozen=True)
class EigenLine:
    """A rational line in the star-fixed cuspidal space (vector in full coordinates)."""
    N: int
    vector: np.ndarray
    primes_used: tuple[int, ...]


class EigenformNotFound(ValueError):
    pass


def locate_eigenform(space: ManinSymbolSpace, ap: Mapping[int, int], bound: Optional[int] = None) -> EigenLine:
    """Cut the star-fixed cuspidal space down by T_l - a_l for good primes l.

    Primes up to the Sturm bound are used first; if the result is still more
    than one-dimensional, the remaining primes in ``ap`` (up to twice the
    bound) are added.
    """
    N = space.N
    B = space.sturm_bound if bound is None else bound
    basis = plus_basis(space)
    if basis.shape[0] == 0:
        raise EigenformNotFound(f"no cusp forms at level {N}")
    cur = np.eye(basis.shape[0], dtype=np.int64)  # rows: current subspace in plus coords
    used = []
    for l in primes_up_to(2 * B):
        if N % l == 0 or l not in ap:
            continue
        if l > B and cur.shape[0] == 1:
            break
        T = plus_hecke_matrix(space, l, basis)
        op = la.matmul(cur, T) - int(ap[l]) * cur
        # y with (y cur) T = a_l (y cur)
        ker = la.left_kernel_z(op)
        if ker.shape[0] == 0:
            raise EigenformNotFound(f"a_{l} = {ap[l]} is not an eigenvalue at level {N}")
        cur = la.matmul(ker, cur)
        used.append(l)
    if cur.shape[0] != 1:
        raise EigenformNotFound(f"eigenspace has dimension {cur.shape[0]} at level {N}")
    vec = la.matmul(cur, basis)[0]
    return EigenLine(N, vec, tuple(used))


def analytic_rank_parity(space: ManinSymbolSpace, line: EigenLine) -> str:
    """'odd' when W_N fixes the eigenline, 'even' when it negates it."""
    W = space.atkin_lehner_full(space.N)
    v = np.asarray(line.vector, dtype=object)
    img = np.asarray(la.matmul(v[None, :], W)[0], dtype=object)
    if np.array_equal(img, v):
        return "odd"
    if np.array_equal(img, -v):
        return "even"
    raise ArithmeticError("W_N does not preserve the eigenline")
