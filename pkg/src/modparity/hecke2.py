"""The cuspidal Hecke algebra T as a lattice and its reduction T/2T.

T is realized through a cyclic vector v of the star-fixed cuspidal lattice:
t -> v t is injective on T, so the Z-span of the vectors v T_n (n up to the
Sturm bound) is a copy of T, and T_p acts on it by its regular
representation.  Reducing that copy mod 2 gives T/2T acting on itself.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from flint import nmod_mat, nmod_poly

from . import linalg as la
from .arith import factor, is_prime, primes_up_to
from .modsym import ManinSymbolSpace, build_space, plus_basis, plus_hecke_matrix


# -- small binary fields -------------------------------------------------------

def _pmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


@dataclass(frozen=True)
class FieldElement:
    """Element of F_2[x]/(modulus), stored as coefficient bitmasks (bit i = x^i)."""
    value: int
    modulus: int

    @property
    def degree(self) -> int:
        return self.modulus.bit_length() - 1

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.value ^ other.value, self.modulus)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(_pmod(_pmul(self.value, other.value), self.modulus), self.modulus)

    def is_zero(self) -> bool:
        return self.value == 0

    def __int__(self) -> int:
        if self.value > 1:
            raise ValueError(f"{self} is not in the prime field")
        return self.value

    def __str__(self) -> str:
        if self.value == 0:
            return "0"
        terms = []
        for i in reversed(range(self.value.bit_length())):
            if self.value >> i & 1:
                terms.append("1" if i == 0 else ("a" if i == 1 else f"a^{i}"))
        return "+".join(terms)


def poly_str(bits: int) -> str:
    terms = []
    for i in reversed(range(bits.bit_length())):
        if bits >> i & 1:
            terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
    return "+".join(terms) or "0"


# -- the lattice ---------------------------------------------------------------

def _prime_power_steps(n: int):
    return [(p, e) for p, e in factor(n)] if n > 1 else []


class HeckeLattice:
    """Z-basis of T (as vectors v T_n) with the regular action of T_p, p <= bound.

    ``basis`` rows are in star-fixed cuspidal coordinates; ``coords[n]`` gives
    T_n in that basis for 1 <= n <= bound; ``regular[p]`` is T_p acting on
    the basis (integer matrix, row convention).
    """

    def __init__(self, space: ManinSymbolSpace, bound: Optional[int] = None, seed_vector: Optional[np.ndarray] = None):
        self.space = space
        self.N = space.N
        self.sturm_bound = space.sturm_bound
        self.bound = self.sturm_bound if bound is None else bound
        self._plus = plus_basis(space)
        g = self._plus.shape[0]
        self.plus_dimension = g
        self.primes = primes_up_to(self.bound)
        self.plus_hecke = {p: plus_hecke_matrix(space, p, self._plus) for p in self.primes}
        if g == 0:
            self.basis = np.zeros((0, 0), dtype=np.int64)
            self.rank = 0
            self.coords = {n: np.zeros(0, dtype=np.int64) for n in range(1, self.bound + 1)}
            self.regular = {p: np.zeros((0, 0), dtype=np.int64) for p in self.primes}
            self.cyclic_vector = np.zeros(0, dtype=np.int64)
            self.eigen_primes = primes_up_to(max(2 * self.sturm_bound, self.bound))
            return
        vectors = None
        for v in _candidate_vectors(g, seed_vector):
            w = self._orbit(v)
            if la.rank_q(w) == g:
                vectors = w
                self.cyclic_vector = v
                break
        if vectors is None:
            raise ArithmeticError(f"no cyclic vector found at level {self.N}")
        self.images = vectors  # row n-1 is v T_n
        self.basis = la.hnf_rows(vectors)
        self.rank = self.basis.shape[0]
        co = la.solve_rows(self.basis, vectors)
        self.coords = {n: co[n - 1] for n in range(1, self.bound + 1)}
        self.regular = {p: la.conjugate_integral(self.basis, self.plus_hecke[p]) for p in self.primes}
        # eigenvalues of a few more primes, for the Eisenstein test at small levels
        self.eigen_primes = primes_up_to(max(2 * self.sturm_bound, self.bound))
        solver = la.RowSolver(self.basis)
        for l in self.eigen_primes:
            if l > self.bound:
                T = plus_hecke_matrix(space, l, self._plus)
                img = la.matmul(np.asarray(self.cyclic_vector)[None, :], T)
                self.coords[l] = solver.solve(img)[0]

    def _apply(self, x: np.ndarray, n: int) -> np.ndarray:
        for p, e in _prime_power_steps(n):
            T = self.plus_hecke[p]
            prev, cur = x, la.matmul(x[None, :], T)[0]
            for _ in range(e - 1):
                nxt = la.matmul(cur[None, :], T)[0]
                if self.N % p:
                    nxt = nxt - p * prev
                prev, cur = cur, nxt
            x = cur
        return x

    def _orbit(self, v: np.ndarray) -> np.ndarray:
        rows = [self._apply(np.asarray(v), n) for n in range(1, self.bound + 1)]
        return la.as_int_array([[int(x) for x in r] for r in rows])

    # ---- checks ---------------------------------------------------------------

    def same_lattice_at(self, bound: int) -> bool:
        """Recompute with a larger bound and compare lattices (off-by-one guard)."""
        other = HeckeLattice(self.space, bound, seed_vector=self.cyclic_vector)
        return np.array_equal(np.asarray(other.basis, dtype=object), np.asarray(self.basis, dtype=object))

    def basis_matrices(self) -> list[np.ndarray]:
        """The basis elements of T as integer matrices on the lattice itself."""
        g = self.rank
        if g == 0:
            return []
        order = [n for n in range(1, self.bound + 1)]
        chosen, rows = [], []
        for n in order:
            trial = rows + [self.coords[n]]
            if la.rank_q(np.array(trial, dtype=object)) == len(trial):
                chosen.append(n)
                rows = trial
            if len(rows) == g:
                break
        mats = [self.regular_matrix(n) for n in chosen]
        # basis element i = sum_j C[i, j] T_{chosen j} with C = rows^-1
        C = la.inverse_q(np.array(rows, dtype=object))
        vec = la.to_fmpq(np.array([np.asarray(m, dtype=object).ravel() for m in mats], dtype=object))
        out = la.fmpq_to_int_array(C * vec)
        return [out[i].reshape(g, g) for i in range(g)]

    def regular_matrix(self, n: int) -> np.ndarray:
        """T_n acting on the lattice basis, via the Hecke recursions."""
        g = self.rank
        M = np.eye(g, dtype=np.int64)
        for p, e in _prime_power_steps(n):
            T = self.regular[p]
            prev, cur = np.eye(g, dtype=np.int64), T
            for _ in range(e - 1):
                nxt = la.matmul(cur, T)
                if self.N % p:
                    nxt = nxt - p * prev
                prev, cur = cur, nxt
            M = la.matmul(M, cur)
        return M


def _candidate_vectors(g: int, seed_vector=None):
    if seed_vector is not None:
        yield np.asarray(seed_vector)
    for i in range(g):
        v = np.zeros(g, dtype=np.int64)
        v[i] = 1
        yield v
    rng = np.random.default_rng(12345)
    for _ in range(50):
        yield rng.integers(-3, 4, size=g).astype(np.int64)


def hecke_lattice(space: ManinSymbolSpace, verify_bound: bool = False) -> HeckeLattice:
    lat = HeckeLattice(space)
    if verify_bound and lat.rank and not lat.same_lattice_at(2 * lat.sturm_bound):
        raise ArithmeticError(f"Hecke lattice changed past the Sturm bound at level {space.N}")
    return lat


# -- T/2T ----------------------------------------------------------------------

class Mod2Algebra:
    """T/2T with structure constants in the reduced lattice basis."""

    def __init__(self, lattice: HeckeLattice):
        self.lattice = lattice
        g = lattice.rank
        self.dim = g
        self.one = la.gf2(lattice.coords[1][None, :])[0] if g else np.zeros(0, np.uint8)
        self.gens = {p: la.gf2(lattice.regular[p]) for p in lattice.primes}
        self.element = {n: la.gf2(lattice.coords[n][None, :])[0] for n in lattice.coords}
        self.mult = self._structure_constants()

    def _regular_mod2(self, n: int) -> np.ndarray:
        g = self.dim
        M = np.eye(g, dtype=np.uint8)
        for p, e in _prime_power_steps(n):
            T = self.gens[p]
            prev, cur = np.eye(g, dtype=np.uint8), T
            for _ in range(e - 1):
                nxt = la.gf2_matmul(cur, T)
                if self.lattice.N % p and p % 2:
                    nxt ^= prev
                prev, cur = cur, nxt
            M = la.gf2_matmul(M, cur)
        return M

    def _structure_constants(self) -> np.ndarray:
        g = self.dim
        if g == 0:
            self._flat = np.zeros((0, 0), dtype=np.int64)
            return np.zeros((0, 0, 0), dtype=np.uint8)
        chosen, rows = [], np.zeros((0, g), dtype=np.uint8)
        for n in sorted(self.element):
            trial = np.vstack([rows, self.element[n]])
            if la.gf2_rank(trial) == trial.shape[0]:
                rows = trial
                chosen.append(n)
            if rows.shape[0] == g:
                break
        if rows.shape[0] != g:
            raise ArithmeticError("T_n do not span T/2T")
        self.spanning_indices = chosen
        C = la.gf2_solve_rows(rows, np.eye(g, dtype=np.uint8))  # C @ rows = I
        regs = np.array([self._regular_mod2(n) for n in chosen], dtype=np.int64)
        mult = np.einsum("ij,jkl->ikl", C.astype(np.int64), regs) & 1
        mult = mult.astype(np.uint8)  # mult[i] = multiplication by basis vector i
        self._flat = mult.reshape(g, g * g).astype(np.int64)
        return mult

    def times(self, y: np.ndarray) -> np.ndarray:
        """Matrix of x -> x y."""
        g = self.dim
        return ((y.astype(np.int64) @ self._flat) & 1).astype(np.uint8).reshape(g, g)

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return la.gf2_matmul(x[None, :], self.times(y))[0]

    def mul_rows(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Row-wise products X[a] * Y[a]."""
        g = self.dim
        if X.shape[0] == 0:
            return np.zeros((0, g), dtype=np.uint8)
        R = (Y.astype(np.int64) @ self._flat).reshape(-1, g, g)
        return (np.einsum("aj,ajk->ak", X.astype(np.int64), R) & 1).astype(np.uint8)

    def frobenius(self) -> np.ndarray:
        """Matrix of the F2-linear map x -> x^2."""
        eye = np.eye(self.dim, dtype=np.uint8)
        return self.mul_rows(eye, eye)

    def idempotent_count(self) -> int:
        """Number of local factors, as dim ker(Frobenius - 1)."""
        if self.dim == 0:
            return 0
        F = self.frobenius() ^ np.eye(self.dim, dtype=np.uint8)
        return self.dim - la.gf2_rank(F)

    def dump(self) -> str:
        """Line-oriented structure constants.

        Format: ``level N``, ``rank g``, ``one <bits>``, then ``T n <bits>``
        for the Hecke operators used as a spanning set, then one line
        ``mul i j <bits>`` per ordered pair i <= j of basis vectors.  Bits are
        coordinates in the reduced lattice basis.
        """
        out = io.StringIO()
        bits = lambda v: "".join(str(int(b)) for b in v)
        out.write(f"level {self.lattice.N}\nrank {self.dim}\n")
        out.write(f"one {bits(self.one)}\n")
        for n in getattr(self, "spanning_indices", []):
            out.write(f"T {n} {bits(self.element[n])}\n")
        eye = np.eye(self.dim, dtype=np.uint8)
        for i in range(self.dim):
            for j in range(i, self.dim):
                out.write(f"mul {i} {j} {bits(self.mul(eye[i], eye[j]))}\n")
        return out.getvalue()


@dataclass
class LocalFactorMod2:
    """One local factor of T/2T."""
    level: int
    block: np.ndarray               # F2 basis (rows) of the ideal, in algebra coordinates
    idempotent: np.ndarray
    residue_degree: int
    local_dim: int
    eisenstein: bool
    field_modulus: int              # minimal polynomial of the residue-field generator
    eigensystem: dict[int, FieldElement] = field(default_factory=dict)
    max_ideal: np.ndarray = field(default=None, repr=False)
    _algebra: "Mod2Algebra" = field(default=None, repr=False, compare=False)
    _residue: tuple = field(default=None, repr=False, compare=False)

    @property
    def d_m(self) -> int:
        return self.local_dim

    def summary(self) -> dict:
        return {
            "residue_degree": self.residue_degree,
            "local_dim": self.local_dim,
            "eisenstein": self.eisenstein,
            "field": poly_str(self.field_modulus),
            "eigenvalues": {str(l): str(v) for l, v in sorted(self.eigensystem.items())},
        }


def _subspace_restrict(V: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Matrix of M on the invariant subspace spanned by rows of V."""
    return la.gf2_solve_rows(V, la.gf2_matmul(V, M))


def _poly_eval_matrix(poly: nmod_poly, M: np.ndarray) -> np.ndarray:
    coeffs = [int(c) for c in poly.coeffs()]
    k = M.shape[0]
    R = np.zeros((k, k), dtype=np.uint8)
    for c in reversed(coeffs):
        R = la.gf2_matmul(R, M)
        if c & 1:
            R ^= np.eye(k, dtype=np.uint8)
    return R


def _minpoly(M: np.ndarray) -> nmod_poly:
    k = M.shape[0]
    return nmod_mat(k, k, [int(x) for x in M.flat], 2).minpoly()


def _split(V: np.ndarray, M: np.ndarray) -> list[np.ndarray]:
    """Split the invariant subspace V by the primary decomposition of M."""
    R = _subspace_restrict(V, M)
    mp = _minpoly(R)
    _, facs = mp.factor()
    if len(facs) <= 1:
        return [V]
    pieces = []
    for f, e in facs:
        K = la.gf2_left_kernel(_poly_eval_matrix(f**e, R))  # coordinates in V
        pieces.append(la.gf2_row_basis(la.gf2_matmul(K, V)))
    return pieces


def _is_local(alg: Mod2Algebra, V: np.ndarray) -> bool:
    """A block is local iff its only idempotents are 0 and its unit."""
    k = V.shape[0]
    sq = alg.mul_rows(V, V)
    F = la.gf2_solve_rows(V, sq)
    return k - la.gf2_rank(F ^ np.eye(k, dtype=np.uint8)) == 1


def _block_units(alg: Mod2Algebra, blocks: list[np.ndarray]) -> list[np.ndarray]:
    """Components of 1 in the direct sum of the blocks (their idempotents)."""
    stacked = np.vstack(blocks)
    c = la.gf2_solve_rows(stacked, alg.one[None, :])[0]
    out, start = [], 0
    for V in blocks:
        k = V.shape[0]
        out.append(la.gf2_matmul(c[None, start:start + k], V)[0])
        start += k
    return out


def _radical(alg: Mod2Algebra, V: np.ndarray) -> np.ndarray:
    """Nilpotent elements of the block: the kernel of a high power of Frobenius."""
    k = V.shape[0]
    sq = alg.mul_rows(V, V)
    F = la.gf2_solve_rows(V, sq)
    Fk = np.eye(k, dtype=np.uint8)
    for _ in range(k):
        Fk = la.gf2_matmul(Fk, F)
    K = la.gf2_left_kernel(Fk)
    if K.shape[0] == 0:
        return np.zeros((0, alg.dim), dtype=np.uint8)
    return la.gf2_row_basis(la.gf2_matmul(K, V))


class _ResidueField:
    """V / m for a local block, with a chosen generator theta."""

    def __init__(self, alg: Mod2Algebra, V: np.ndarray, m: np.ndarray, unit: np.ndarray, candidates):
        self.alg = alg
        self.m = m
        # complement of m in V
        comp = []
        cur = m.copy()
        for v in V:
            if not la.gf2_in_span(cur, v):
                comp.append(v)
                cur = np.vstack([cur, v])
        self.comp = np.array(comp, dtype=np.uint8).reshape(len(comp), alg.dim)
        self.k = len(comp)
        self.full = np.vstack([m, self.comp]) if m.shape[0] else self.comp
        self.unit = unit
        self.theta, self.modulus, self.powers = self._find_generator(candidates)

    def project(self, x: np.ndarray) -> np.ndarray:
        c = la.gf2_solve_rows(self.full, x[None, :])[0]
        return c[self.m.shape[0]:]

    def _find_generator(self, candidates):
        k = self.k
        tried = []
        for t in candidates:
            t = self.alg.mul(t, self.unit)
            tried.append(t)
            res = self._try(t)
            if res is not None:
                return res
        for i in range(len(tried)):
            for j in range(i + 1, len(tried)):
                res = self._try(tried[i] ^ tried[j])
                if res is not None:
                    return res
        raise ArithmeticError("no generator for the residue field")

    def _try(self, t):
        k = self.k
        pw = [self.unit]
        for _ in range(k):
            pw.append(self.alg.mul(pw[-1], t))
        proj = np.array([self.project(x) for x in pw], dtype=np.uint8)
        if la.gf2_rank(proj[:k]) < k:
            return None
        rel = la.gf2_solve_rows(proj[:k], proj[k][None, :])[0]
        modulus = (1 << k) | sum(int(b) << i for i, b in enumerate(rel))
        return t, modulus, proj[:k]

    def element(self, x: np.ndarray) -> FieldElement:
        c = la.gf2_solve_rows(self.powers, self.project(x)[None, :])[0]
        return FieldElement(sum(int(b) << i for i, b in enumerate(c)), self.modulus)


def decompose_mod2(lattice: HeckeLattice, algebra: Optional[Mod2Algebra] = None) -> list[LocalFactorMod2]:
    """Local factors of T/2T, split by the primary decomposition of each T_p."""
    alg = algebra or Mod2Algebra(lattice)
    g = alg.dim
    if g == 0:
        return []
    blocks = [np.eye(g, dtype=np.uint8)]
    gens = [alg.gens[p] for p in lattice.primes]
    for M in gens:
        blocks = [piece for V in blocks for piece in _split(V, M)]
    # generators can share a primary decomposition while sums of them do not
    if any(not _is_local(alg, V) for V in blocks):
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                blocks = [piece for V in blocks for piece in _split(V, gens[i] ^ gens[j])]
            if all(_is_local(alg, V) for V in blocks):
                break
    if any(not _is_local(alg, V) for V in blocks):
        raise ArithmeticError(f"could not split T/2T into local factors at level {lattice.N}")

    N = lattice.N
    factors = []
    for V, unit in zip(blocks, _block_units(alg, blocks)):
        m = _radical(alg, V)
        cands = [alg.element[p] for p in lattice.primes]
        res = _ResidueField(alg, V, m, unit, cands)
        eig = {n: res.element(alg.mul(alg.element[n], unit)) for n in sorted(alg.element)}
        eis = res.k == 1 and all(
            eig[l].is_zero() for l in lattice.eigen_primes if l % 2 and N % l
        )
        f = LocalFactorMod2(
            level=N, block=V, idempotent=unit, residue_degree=res.k, local_dim=V.shape[0],
            eisenstein=eis, field_modulus=res.modulus,
            eigensystem={l: eig[l] for l in lattice.eigen_primes}, max_ideal=m,
        )
        f._algebra = alg
        f._residue = (res, eig)
        factors.append(f)
    factors.sort(key=lambda f: (f.residue_degree, tuple(int(x.value) for _, x in sorted(f.eigensystem.items()))))
    return factors


def eigensystem_coefficient(factor: LocalFactorMod2, n: int) -> FieldElement:
    """Image of T_n in the residue field of the factor (n up to the lattice bound)."""
    _, eig = factor._residue
    if n not in eig:
        raise ValueError(f"T_{n} is beyond the computed bound")
    return eig[n]


@dataclass(frozen=True)
class TmTest:
    equal: bool
    reason: str  # "rank_one", "rank_gt_one", "residue_field_not_f2"

    def __bool__(self) -> bool:
        return self.equal


def tm_equals_z2(factor: LocalFactorMod2) -> TmTest:
    """Whether the completion at this factor is Z_2 (only meaningful over F_2)."""
    if factor.residue_degree > 1:
        return TmTest(False, "residue_field_not_f2")
    if factor.local_dim == 1:
        return TmTest(True, "rank_one")
    return TmTest(False, "rank_gt_one")


def _annihilator_functionals(factor: LocalFactorMod2) -> np.ndarray:
    """Functionals on T/2T vanishing on (1-e) T/2T and on m^2 of the factor."""
    alg = factor._algebra
    g = alg.dim
    e = factor.idempotent
    comp = np.array([x ^ alg.mul(x, e) for x in np.eye(g, dtype=np.uint8)], dtype=np.uint8)
    m = factor.max_ideal
    sq = [alg.mul(x, y) for i, x in enumerate(m) for y in m[i:]]
    rows = [r for r in comp] + sq
    if not rows:
        return np.eye(g, dtype=np.uint8)
    S = np.array(rows, dtype=np.uint8).reshape(len(rows), g)
    # phi (column) with S phi = 0
    return la.gf2_left_kernel(S.T)


def lemma_local_witness(lattice: HeckeLattice, factor: LocalFactorMod2) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Two distinct nonzero mod-2 q-expansion prefixes (a_1..a_B) killed by m^2.

    Returns None when the factor has F_2-dimension one.
    """
    if factor.local_dim < 2:
        return None
    alg = factor._algebra
    phis = _annihilator_functionals(factor)
    B = lattice.bound
    prefixes = []
    for phi in phis:
        pre = tuple(int(la.gf2_matmul(alg.element[n][None, :], phi[:, None])[0, 0]) for n in range(1, B + 1))
        if any(pre) and pre not in prefixes:
            prefixes.append(pre)
        if len(prefixes) == 2:
            return prefixes[0], prefixes[1]
    raise ArithmeticError("expected two independent functionals")


@dataclass(frozen=True)
class ResidualClass:
    reduction_at_2: str       # "ordinary" or "supersingular"
    n_mod_8: int
    implied: str


def classify_residual(factor: LocalFactorMod2, N: int) -> ResidualClass:
    if factor.eisenstein:
        raise ValueError("Eisenstein factor has reducible residual representation")
    if factor.residue_degree != 1:
        raise ValueError("residue field larger than F_2")
    if not is_prime(N) or N == 2:
        raise ValueError("odd prime level required")
    a2 = eigensystem_coefficient(factor, 2)
    r = N % 8
    if not a2.is_zero():
        return ResidualClass("ordinary", r, "undetermined")
    if r == 3:
        implied = "totally complex, F = Q(sqrt(-N))"
    elif r == 5:
        implied = "totally real, F = Q(sqrt(N))"
    else:
        implied = "no supersingular-ramified option"
    return ResidualClass("supersingular", r, implied)


def level_structure(N: int, verify_bound: bool = False):
    """Convenience: (space, lattice, factors) for a level."""
    space = build_space(N)
    lat = hecke_lattice(space, verify_bound=verify_bound)
    return space, lat, decompose_mod2(lat)
