"""The cubic field cut out by the 2-division polynomial of a curve.

Orders are Z-lattices in K = Q(theta) given by a basis in power-basis
coordinates.  The maximal order is found with the Dedekind criterion plus
Round-2 enlargement, the class number by a naive search over prime ideals
below the Minkowski bound, and the fundamental unit (complex cubics only)
by enumerating lattice points in a box in Minkowski space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import mpmath
import numpy as np
from flint import fmpq, fmpq_mat, fmpz_mat, nmod_poly

from .arith import factor, primes_up_to
from .curve import WeierstrassCurve, cubic_discriminant, two_division_cubic, integer_roots

CLASS_NUMBER_DISC_LIMIT = 10**6
DEFAULT_UNIT_SIZE = 10**6


class ReducibleCubicError(ValueError):
    pass


class NotTotallyRamifiedError(ValueError):
    pass


# -- mod p helpers (tiny matrices) ----------------------------------------------

def _rref_mod(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    m = [[x % p for x in r] for r in rows]
    piv, r = [], 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        k = next((i for i in range(r, len(m)) if m[i][c]), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        piv.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], piv


def _left_kernel_mod(rows: list[list[int]], p: int) -> list[list[int]]:
    """Basis of {y : y A = 0 mod p} for A given by rows."""
    n = len(rows)
    if n == 0:
        return []
    ncols = len(rows[0])
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
    # eliminate on the A part only, keeping all rows
    m = [[x % p for x in r] for r in aug]
    r = 0
    for c in range(ncols):
        k = next((i for i in range(r, n) if m[i][c]), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(n):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        r += 1
    return [row[ncols:] for row in m[r:]]


def _hnf_rational(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Z-basis (HNF, nonzero rows) of the lattice spanned by rational rows."""
    den = 1
    for r in rows:
        for x in r:
            den = math.lcm(den, Fraction(x).denominator)
    ints = [[int(Fraction(x) * den) for x in r] for r in rows]
    h = fmpz_mat(ints).hnf()
    out = []
    for r in h.tolist():
        if any(x != 0 for x in r):
            out.append([Fraction(int(x), den) for x in r])
    return out


def _det3(m) -> Fraction:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _inverse3(m) -> list[list[Fraction]]:
    q = fmpq_mat(3, 3)
    for i in range(3):
        for j in range(3):
            x = Fraction(m[i][j])
            q[i, j] = fmpq(x.numerator, x.denominator)
    qi = q.inv()
    return [[Fraction(int(qi[i, j].p), int(qi[i, j].q)) for j in range(3)] for i in range(3)]


# -- the field -------------------------------------------------------------------

@dataclass
class CubicField:
    """K = Q[x]/(x^3 + b x^2 + c x + d) with its maximal order."""
    defining_cubic: tuple[int, int, int]
    poly_disc: int
    field_disc: int
    signature: tuple[int, int]
    integral_basis: list[list[Fraction]] = field(repr=False)   # rows in power basis
    index: int = 1

    # ---- element arithmetic in the power basis ------------------------------

    def theta_matrix(self) -> list[list[int]]:
        b, c, d = self.defining_cubic
        # rows: theta * 1, theta * theta, theta * theta^2
        return [[0, 1, 0], [0, 0, 1], [-d, -c, -b]]

    def mul(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> list[Fraction]:
        b, c, d = self.defining_cubic
        prod = [Fraction(0)] * 5
        for i in range(3):
            if x[i]:
                for j in range(3):
                    prod[i + j] += x[i] * y[j]
        for k in (4, 3):
            t = prod[k]
            if t:
                prod[k] = Fraction(0)
                prod[k - 1] -= b * t
                prod[k - 2] -= c * t
                prod[k - 3] -= d * t
        return prod[:3]

    def mult_matrix(self, x: Sequence[Fraction]) -> list[list[Fraction]]:
        """Rows are x * theta^i in the power basis."""
        rows = [list(map(Fraction, x))]
        th = [Fraction(0), Fraction(1), Fraction(0)]
        for _ in range(2):
            rows.append(self.mul(rows[-1], th))
        return rows

    def norm(self, x: Sequence[Fraction]) -> Fraction:
        return _det3(self.mult_matrix(x))

    def charpoly(self, x: Sequence[Fraction]) -> tuple[Fraction, Fraction, Fraction]:
        """(s1, s2, s3) with charpoly t^3 - s1 t^2 + s2 t - s3."""
        m = self.mult_matrix(x)
        s1 = m[0][0] + m[1][1] + m[2][2]
        s2 = (m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
              + m[1][1] * m[2][2] - m[1][2] * m[2][1])
        s3 = _det3(m)
        return s1, s2, s3

    # ---- maximal-order coordinates ------------------------------------------

    @cached_property
    def _basis_inverse(self) -> list[list[Fraction]]:
        return _inverse3(self.integral_basis)

    def to_power(self, c: Sequence[int]) -> list[Fraction]:
        W = self.integral_basis
        return [sum(Fraction(c[i]) * W[i][j] for i in range(3)) for j in range(3)]

    def to_order(self, x: Sequence[Fraction]) -> list[Fraction]:
        Wi = self._basis_inverse
        return [sum(Fraction(x[i]) * Wi[i][j] for i in range(3)) for j in range(3)]

    @cached_property
    def structure_constants(self) -> list[list[list[int]]]:
        """table[i][j] = omega_i * omega_j in maximal-order coordinates."""
        W = self.integral_basis
        out = []
        for i in range(3):
            row = []
            for j in range(3):
                v = self.to_order(self.mul(W[i], W[j]))
                if any(x.denominator != 1 for x in v):
                    raise ArithmeticError("integral basis is not a ring")
                row.append([int(x) for x in v])
            out.append(row)
        return out

    def order_mul(self, x: Sequence[int], y: Sequence[int]) -> list[int]:
        t = self.structure_constants
        out = [0, 0, 0]
        for i in range(3):
            if x[i]:
                for j in range(3):
                    if y[j]:
                        s = x[i] * y[j]
                        tij = t[i][j]
                        out[0] += s * tij[0]
                        out[1] += s * tij[1]
                        out[2] += s * tij[2]
        return out

    def order_norm(self, c: Sequence[int]) -> int:
        n = self.norm(self.to_power(c))
        assert n.denominator == 1
        return int(n)

    # ---- embeddings ------------------------------------------------------------

    @cached_property
    def roots(self):
        b, c, d = self.defining_cubic
        with mpmath.workdps(50):
            rs = mpmath.polyroots([1, b, c, d], maxsteps=200, extraprec=200)
        real = [r for r in rs if abs(mpmath.im(r)) < mpmath.mpf(10) ** -30]
        cplx = [r for r in rs if mpmath.im(r) > mpmath.mpf(10) ** -30]
        return real, cplx

    def embedding_matrix(self) -> np.ndarray:
        """Rows: maximal-order basis elements; columns: real embedding(s) then Re/Im of complex ones."""
        real, cplx = self.roots
        cols = []
        for r in real:
            cols.append([float(mpmath.re(r)) ** k for k in range(3)])
        E = []
        W = self.integral_basis
        for i in range(3):
            row = []
            for r in real:
                row.append(float(sum(W[i][k] * mpmath.re(r) ** k for k in range(3))))
            for z in cplx:
                val = sum(mpmath.mpf(W[i][k].numerator) / W[i][k].denominator * z ** k for k in range(3))
                row += [float(mpmath.re(val)), float(mpmath.im(val))]
            E.append(row)
        return np.array(E, dtype=np.float64)


def dedekind_p_maximal(cubic: tuple[int, int, int], p: int) -> bool:
    """Dedekind's criterion: is Z[theta] maximal at p?"""
    b, c, d = cubic
    f = nmod_poly([d, c, b, 1], p)
    _, facs = f.factor()
    g = nmod_poly([1], p)
    for t, _ in facs:
        g *= t
    h = f // g
    # lift to Z: coefficients in [0, p)
    gz = [int(x) for x in g.coeffs()]
    hz = [int(x) for x in h.coeffs()]
    prod = [0] * (len(gz) + len(hz) - 1)
    for i, x in enumerate(gz):
        for j, y in enumerate(hz):
            prod[i + j] += x * y
    fz = [d, c, b, 1]
    Fz = [(prod[i] if i < len(prod) else 0) - (fz[i] if i < 4 else 0) for i in range(max(len(prod), 4))]
    assert all(x % p == 0 for x in Fz)
    F = nmod_poly([x // p for x in Fz], p)
    gcd = F.gcd(g).gcd(h)
    return gcd.degree() == 0


def _round2_step(K: CubicField, basis: list[list[Fraction]], p: int) -> Optional[list[list[Fraction]]]:
    """One multiplier-ring enlargement at p; None if the order is p-maximal."""
    # structure constants of the current order
    Wi = _inverse3(basis)

    def coords(x):
        return [sum(x[i] * Wi[i][j] for i in range(3)) for j in range(3)]

    table = [[[int(v) for v in coords(K.mul(basis[i], basis[j]))] for j in range(3)] for i in range(3)]

    def mulmod(x, y):
        out = [0, 0, 0]
        for i in range(3):
            for j in range(3):
                s = x[i] * y[j]
                if s:
                    for k in range(3):
                        out[k] += s * table[i][j][k]
        return [v % p for v in out]

    # p-radical: kernel of x -> x^(p^j) with p^j >= 3
    q = p
    while q < 3:
        q *= p
    frob = []
    for i in range(3):
        e = [1 if k == i else 0 for k in range(3)]
        base, n, res = e, q, None
        while n:
            if n & 1:
                res = base if res is None else mulmod(res, base)
            base = mulmod(base, base)
            n >>= 1
        frob.append(res)
    ker = _left_kernel_mod(frob, p)
    rad = _hnf_rational([[Fraction(p if i == j else 0) for j in range(3)] for i in range(3)]
                        + [[Fraction(x) for x in r] for r in ker])
    # rad rows in order coordinates; multiplier ring condition mod p
    rad_inv = _inverse3(rad)
    rows = []
    for i in range(3):
        e = [1 if k == i else 0 for k in range(3)]
        row = []
        for beta in rad:
            prod = [0, 0, 0]
            for a in range(3):
                for bb in range(3):
                    s = e[a] * beta[bb]
                    if s:
                        for k in range(3):
                            prod[k] += s * table[a][bb][k]
            c = [sum(prod[k] * rad_inv[k][j] for k in range(3)) for j in range(3)]
            if any(x.denominator != 1 for x in c):
                raise ArithmeticError("radical is not an ideal")
            row += [int(x) % p for x in c]
        rows.append(row)
    U = _left_kernel_mod(rows, p)
    if not U:
        return None
    new_rows = [[Fraction(1 if i == j else 0) for j in range(3)] for i in range(3)]
    new_rows += [[Fraction(x, p) for x in u] for u in U]
    new_coords = _hnf_rational(new_rows)
    # back to power basis
    return [[sum(r[i] * basis[i][j] for i in range(3)) for j in range(3)] for r in new_coords]


def _maximal_order(K: CubicField, primes: Sequence[int]) -> list[list[Fraction]]:
    basis = [[Fraction(1 if i == j else 0) for j in range(3)] for i in range(3)]
    for p in primes:
        while True:
            nb = _round2_step(K, basis, p)
            if nb is None:
                break
            basis = nb
    return basis


def _squarefull_primes(n: int) -> list[int]:
    return [p for p, e in factor(abs(n)) if e >= 2]


def field_from_cubic(b: int, c: int, d: int) -> CubicField:
    if integer_roots(b, c, d):
        raise ReducibleCubicError(f"x^3 + {b}x^2 + {c}x + {d} has a rational root")
    D = cubic_discriminant(b, c, d)
    sig = (1, 1) if D < 0 else (3, 0)
    K = CubicField((b, c, d), D, D, sig, [[Fraction(1 if i == j else 0) for j in range(3)] for i in range(3)])
    suspects = [p for p in _squarefull_primes(D) if not dedekind_p_maximal((b, c, d), p)]
    basis = _maximal_order(K, suspects)
    det = abs(_det3(basis))
    index = 1 / det
    assert index.denominator == 1
    index = int(index)
    K.integral_basis = basis
    K.index = index
    K.field_disc = D // (index * index)
    return K


def two_division_field(E: WeierstrassCurve) -> CubicField:
    """The cubic field generated by the x-coordinate of a 2-torsion point."""
    b, c, d = two_division_cubic(E)
    return field_from_cubic(b, c, d)


# -- lattice enumeration ----------------------------------------------------------

def _lll_transform(B: np.ndarray) -> np.ndarray:
    """Unimodular U with the rows of U B LLL-reduced (B a real basis, rows)."""
    scale = 2.0 ** 50 / float(np.max(np.abs(B)))
    Bi = [[int(x) for x in r] for r in np.rint(B * scale)]
    _, U = fmpz_mat(Bi).lll(transform=True)
    return np.array([[int(U[i, j]) for j in range(3)] for i in range(3)], dtype=np.int64)


def _short_vectors(basis: np.ndarray, bound: float):
    """Integer x (3 coordinates) with |x B|^2 <= bound, yielded in blocks; B real, rows."""
    B = np.asarray(basis, dtype=np.float64)
    U = _lll_transform(B)
    R = U.astype(np.float64) @ B
    for block in _fincke_pohst(R @ R.T, bound):
        yield block @ U


def _fincke_pohst(G: np.ndarray, bound: float):
    n = 3
    # q-form decomposition: Q(x) = sum_i q[i,i] (x_i + sum_{j>i} q[i,j] x_j)^2
    q = G.copy()
    for i in range(n):
        for j in range(i + 1, n):
            q[j, i] = q[i, j]
            q[i, j] = q[i, j] / q[i, i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k, l] -= q[k, i] * q[i, l]
    eps = 1e-9 * max(bound, 1.0)
    C = bound + eps
    r2 = math.sqrt(C / q[2, 2])
    for x2 in range(-math.floor(r2), math.floor(r2) + 1):
        rem2 = C - q[2, 2] * x2 * x2
        if rem2 < 0:
            continue
        c1 = -q[1, 2] * x2
        r1 = math.sqrt(rem2 / q[1, 1])
        for x1 in range(math.ceil(c1 - r1 - 1e-12), math.floor(c1 + r1 + 1e-12) + 1):
            rem1 = rem2 - q[1, 1] * (x1 + q[1, 2] * x2) ** 2
            if rem1 < 0:
                continue
            c0 = -(q[0, 1] * x1 + q[0, 2] * x2)
            r0 = math.sqrt(rem1 / q[0, 0])
            lo, hi = math.ceil(c0 - r0 - 1e-9), math.floor(c0 + r0 + 1e-9)
            if lo > hi:
                continue
            x0 = np.arange(lo, hi + 1, dtype=np.int64)
            yield np.stack([x0, np.full_like(x0, x1), np.full_like(x0, x2)], axis=1)


def _box_basis(K: CubicField, lattice: np.ndarray, real_radius: float, complex_radius: float) -> np.ndarray:
    """Rows x with |x|^2 = x_r^2/R^2 + |x_c|^2/r^2 for the lattice rows (order coordinates)."""
    E = np.asarray(lattice, dtype=np.float64) @ K.embedding_matrix()
    return E / np.array([real_radius, complex_radius, complex_radius])


# -- units -----------------------------------------------------------------------

@dataclass(frozen=True)
class UnitSearch:
    unit: Optional[tuple[int, int, int]]   # maximal-order coordinates
    size: Optional[float]                  # |real embedding| > 1
    certified: bool
    searched_to: float


def fundamental_unit(K: CubicField, max_size: float = DEFAULT_UNIT_SIZE) -> UnitSearch:
    """Smallest unit with real embedding of absolute value > 1 (complex cubics)."""
    if K.signature != (1, 1):
        raise ValueError("fundamental unit search is implemented for complex cubic fields")
    I = np.eye(3, dtype=np.int64)
    T = 4.0
    lower = 1.0
    while True:
        T = min(T, max_size)
        best = None
        Emb = K.embedding_matrix()
        for block in _short_vectors(_box_basis(K, I, T, 1.0), 2.0):
            vals = block.astype(np.float64) @ Emb
            re = np.abs(vals[:, 0])
            cs = vals[:, 1] ** 2 + vals[:, 2] ** 2
            nrm = re * cs
            ok = (np.abs(nrm - 1) < 1e-6) & (re > 1 + 1e-9) & (re <= T * (1 + 1e-9))
            for idx in np.flatnonzero(ok):
                c = tuple(int(v) for v in block[idx])
                if abs(K.order_norm(c)) == 1 and (best is None or re[idx] < best[1]):
                    best = (c, float(re[idx]))
        if best is not None:
            # every unit of size <= T was enumerated, so the smallest is fundamental
            d = abs(K.field_disc)
            if d > 24 and d >= 4 * best[1] ** 3 + 24 + 1e-6:
                raise ArithmeticError("unit search inconsistent with the discriminant bound")
            return UnitSearch(best[0], best[1], True, T)
        if T >= max_size:
            return UnitSearch(None, None, False, T)
        T *= 4


def fundamental_unit_valuation(K: CubicField, max_size: float = DEFAULT_UNIT_SIZE) -> str:
    """'v>=2', 'v<2' or 'undetermined' for v_pi(eps - 1), pi the prime over 2."""
    if K.signature != (1, 1):
        raise ValueError("signature (1,1) required")
    if not totally_ramified_at(K, 2):
        raise NotTotallyRamifiedError("2 is not totally ramified")
    u = fundamental_unit(K, max_size)
    if u.unit is None:
        return "undetermined"
    return "v>=2" if unit_minus_one_valuation(K, u.unit) >= 2 else "v<2"


def unit_minus_one_valuation(K: CubicField, unit: Sequence[int]) -> int:
    """v_pi(u - 1) when 2 is totally ramified: equals v_2(N(u - 1))."""
    x = K.to_power(unit)
    x[0] -= 1
    n = K.norm(x)
    if n == 0:
        raise ValueError("u = 1")
    n = abs(int(n))
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    return v


# -- primes and ideals -----------------------------------------------------------

def _algebra_mod_p(K: CubicField, p: int):
    t = K.structure_constants
    return [[[x % p for x in t[i][j]] for j in range(3)] for i in range(3)]


def _mul_mod(t, x, y, p):
    out = [0, 0, 0]
    for i in range(3):
        if x[i]:
            for j in range(3):
                if y[j]:
                    s = x[i] * y[j]
                    for k in range(3):
                        out[k] += s * t[i][j][k]
    return [v % p for v in out]


def _pow_mod(t, x, n, p):
    res = None
    base = x
    while n:
        if n & 1:
            res = base if res is None else _mul_mod(t, res, base, p)
        base = _mul_mod(t, base, base, p)
        n >>= 1
    return res


def _span_mod(rows, p):
    return _rref_mod(rows, p)[0] if rows else []


def prime_ideals_above(K: CubicField, p: int) -> list[tuple[list[list[int]], int, int]]:
    """(basis in order coordinates, residue degree f, ramification e) for each prime over p."""
    t = _algebra_mod_p(K, p)
    one = K.to_order([Fraction(1), Fraction(0), Fraction(0)])
    one = [int(x) % p for x in one]
    q = p
    while q < 3:
        q *= p
    frob = [_pow_mod(t, [1 if k == i else 0 for k in range(3)], q, p) for i in range(3)]
    rad = _left_kernel_mod(frob, p)
    rad = _span_mod(rad, p)
    # split A / rad into fields using idempotents found from minimal polynomials
    comps = _split_semisimple(t, p, rad, one)
    primes = []
    for i, (space, f) in enumerate(comps):
        others = [v for j, (s, _) in enumerate(comps) if j != i for v in s]
        primes.append((_ideal_basis(p, [list(v) for v in rad] + others), f))
    es = _ramification_indices(K, p, [b for b, _ in primes])
    return [(b, f, e) for (b, f), e in zip(primes, es)]


def _ideal_basis(p: int, gens: list[list[int]]) -> list[list[int]]:
    rows = [[p if i == j else 0 for j in range(3)] for i in range(3)] + [list(g) for g in gens]
    h = fmpz_mat(rows).hnf()
    return [[int(x) for x in r] for r in h.tolist() if any(x != 0 for x in r)]


def _split_semisimple(t, p, rad, one):
    """Components (F_p basis of the ideal e A + rad, residue degree) of A/rad."""
    # work with representatives of A/rad: complement of rad
    comp = []
    cur = [list(r) for r in rad]
    for i in range(3):
        e = [1 if k == i else 0 for k in range(3)]
        if len(_span_mod(cur + [e], p)) > len(_span_mod(cur, p)) if cur else True:
            comp.append(e)
            cur = cur + [e]
    total = len(comp)
    blocks = [(comp, one)]
    done = []
    while blocks:
        space, unit = blocks.pop()
        split = None
        for x in space + [[a + b for a, b in zip(space[0], s)] for s in space[1:]]:
            # minimal polynomial of multiplication by x on (space + rad)/rad
            mp = _min_poly_mod(t, x, unit, rad, p)
            facs = nmod_poly(mp, p).factor()[1]
            if len(facs) > 1:
                split = (x, facs)
                break
        if split is None:
            done.append((space, len(space)))
            continue
        x, facs = split
        for fpoly, mult in facs:
            # ideal component: image of g(x) with g = product of the other factors to high power
            g = nmod_poly([1], p)
            for other, m2 in facs:
                if other != fpoly:
                    g *= other ** (m2 * 3)
            e_elem = _poly_at(t, [int(c) for c in g.coeffs()], x, unit, p)
            sub = _span_mod([_mul_mod(t, e_elem, s, p) for s in space] , p)
            sub = _reduce_mod_rad(sub, rad, p)
            # unit of the component: e_elem^(p^big) projected to an idempotent
            u = e_elem
            for _ in range(6):
                u = _pow_mod(t, u, p, p)
            blocks.append((sub, u))
    return done


def _reduce_mod_rad(vectors, rad, p):
    base = _span_mod([list(r) for r in rad], p) if rad else []
    out = []
    cur = list(base)
    for v in vectors:
        if len(_span_mod(cur + [v], p)) > len(cur):
            out.append(v)
            cur = _span_mod(cur + [v], p)
    return out


def _poly_at(t, coeffs, x, unit, p):
    res = [0, 0, 0]
    for c in reversed(coeffs):
        res = _mul_mod(t, res, x, p)
        res = [(a + c * u) % p for a, u in zip(res, unit)]
    return res


def _min_poly_mod(t, x, unit, rad, p):
    """Coefficients (low to high) of the minimal polynomial of x modulo rad."""
    powers = [unit]
    base = list(rad)
    for k in range(1, 5):
        powers.append(_mul_mod(t, powers[-1], x, p))
        rows = base + powers[:k + 1]
        # find relation among powers modulo rad
        ker = _left_kernel_mod(rows, p)
        for v in ker:
            coeffs = v[len(base):]
            if coeffs[-1] % p:
                inv = pow(coeffs[-1], -1, p)
                return [c * inv % p for c in coeffs]
    raise ArithmeticError("minimal polynomial not found")


def _ideal_mul(K: CubicField, I, J):
    gens = [K.order_mul(a, b) for a in I for b in J]
    h = fmpz_mat(gens).hnf()
    return [[int(x) for x in r] for r in h.tolist() if any(x != 0 for x in r)]


def _ideal_norm(I) -> int:
    return abs(int(fmpz_mat(I).det()))


def _contains(I, v) -> bool:
    m = fmpq_mat(fmpz_mat(I)).transpose()
    sol = m.solve(fmpq_mat(3, 1, [int(x) for x in v]))
    return all(sol[i, 0].q == 1 for i in range(3))


def _ramification_indices(K: CubicField, p: int, primes) -> list[int]:
    pO = [[p if i == j else 0 for j in range(3)] for i in range(3)]
    es = []
    for P in primes:
        e, power = 0, [[1 if i == j else 0 for j in range(3)] for i in range(3)]
        while True:
            nxt = _ideal_mul(K, power, P)
            if all(_contains(nxt, v) for v in pO):
                e += 1
                power = nxt
                if e > 3:
                    break
            else:
                break
        es.append(e)
    return es


def totally_ramified_at(K: CubicField, p: int) -> bool:
    ps = prime_ideals_above(K, p)
    return len(ps) == 1 and ps[0][2] == 3


def _ideal_inverse_scaled(K: CubicField, I) -> list[list[int]]:
    """N(I) * I^{-1}, an integral ideal."""
    mats = []
    for b in I:
        # multiplication by b: row i = omega_i * b
        mats.append([K.order_mul([1 if k == i else 0 for k in range(3)], b) for i in range(3)])
    # columns of [M_1 | M_2 | M_3]
    cols = []
    for M in mats:
        for j in range(3):
            cols.append([M[i][j] for i in range(3)])
    h = fmpz_mat(cols).hnf()
    G = [[int(x) for x in r] for r in h.tolist() if any(x != 0 for x in r)]
    Gt = [[Fraction(G[j][i]) for j in range(3)] for i in range(3)]  # columns are basis vectors
    inv = _inverse3(Gt)
    n = _ideal_norm(I)
    rows = [[x * n for x in r] for r in inv]
    assert all(x.denominator == 1 for r in rows for x in r)
    h = fmpz_mat([[int(x) for x in r] for r in rows]).hnf()
    return [[int(x) for x in r] for r in h.tolist() if any(x != 0 for x in r)]


def _reduce_ideal(K: CubicField, I) -> list[list[int]]:
    """An integral ideal of small norm in the class of I (two inversions by short elements)."""
    for _ in range(2):
        n = _ideal_norm(I)
        if n == 1:
            return I
        B = np.array(I, dtype=np.float64) @ K.embedding_matrix()
        U = _lll_transform(B)
        alpha = [int(x) for x in (U[0] @ np.array(I, dtype=object))]
        J = _ideal_inverse_scaled(K, I)
        gens = [K.order_mul(alpha, b) for b in J]
        if any(x % n for g in gens for x in g):
            raise ArithmeticError("ideal reduction produced a non-integral ideal")
        h = fmpz_mat([[x // n for x in g] for g in gens]).hnf()
        I = [[int(x) for x in r] for r in h.tolist() if any(x != 0 for x in r)]
    return I


def _is_principal(K: CubicField, C, unit_size: float) -> bool:
    """Search for a generator of the integral ideal C in a box that must contain one.

    A generator times a power of the unit has |real| in [s, s*unit_size) and
    then |complex| <= s, where s is the cube root of the norm.
    """
    C = _reduce_ideal(K, C)
    n = _ideal_norm(C)
    if n == 1:
        return True
    s = n ** (1.0 / 3.0)
    Emb = K.embedding_matrix()
    Cf = np.array(C, dtype=np.float64)
    for block in _short_vectors(_box_basis(K, Cf, s * unit_size, s), 2.0):
        vals = block.astype(np.float64) @ Cf @ Emb
        nrm = np.abs(vals[:, 0]) * (vals[:, 1] ** 2 + vals[:, 2] ** 2)
        for idx in np.flatnonzero(np.abs(nrm - n) < 1e-6 * n + 0.5):
            coeff = [int(x) for x in block[idx]]
            elt = [sum(coeff[i] * C[i][j] for i in range(3)) for j in range(3)]
            if abs(K.order_norm(elt)) == n:
                return True
    return False


def minkowski_primes(K: CubicField) -> list[list[list[int]]]:
    d = abs(K.field_disc)
    bound = (4 / math.pi) * (6 / 27) * math.sqrt(d)
    out = []
    for p in primes_up_to(int(bound)):
        for P, f, _ in prime_ideals_above(K, p):
            if p**f <= bound:
                out.append(P)
    return out


def class_number_naive(K: CubicField, max_unit_size: float = DEFAULT_UNIT_SIZE) -> Optional[int]:
    """Class number from the primes below the Minkowski bound.

    The subgroup generated so far is kept as a list of coset representatives;
    each new prime contributes its order modulo that subgroup.  Returns None
    (undetermined) when |disc| exceeds the desk-scale limit or no unit is
    found.  Only complex cubic fields are handled.
    """
    if abs(K.field_disc) > CLASS_NUMBER_DISC_LIMIT:
        return None
    if K.signature != (1, 1):
        raise ValueError("class number search is implemented for complex cubic fields")
    gens = minkowski_primes(K)
    if not gens:
        return 1
    u = fundamental_unit(K, max_unit_size)
    if u.unit is None:
        return None
    eta = u.size
    one = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    reps = [one]
    inverses = [one]

    def in_subgroup(C):
        return any(_is_principal(K, _ideal_mul(K, C, Sinv), eta) for Sinv in inverses)

    for P in gens:
        P = _reduce_ideal(K, P)
        k, Pk, powers = 1, P, []
        while not in_subgroup(Pk):
            powers.append(Pk)
            k += 1
            Pk = _reduce_ideal(K, _ideal_mul(K, Pk, P))
        new = [_reduce_ideal(K, _ideal_mul(K, R, Pj)) for Pj in powers for R in reps]
        reps += new
        inverses += [_ideal_inverse_scaled(K, R) for R in new]
    return len(reps)


def prop5_predicate(E: WeierstrassCurve, max_unit_size: float = DEFAULT_UNIT_SIZE) -> str:
    """Which sufficient condition for a nontrivial minimal deformation is detected.

    Returns one of 'deformation_exists_via_1' (even class number),
    'deformation_exists_via_2' (v_pi(eps - 1) >= 2), 'neither_detected' or
    'undetermined'.
    """
    K = two_division_field(E)
    h = class_number_naive(K, max_unit_size)
    if h is not None and h % 2 == 0:
        return "deformation_exists_via_1"
    v = fundamental_unit_valuation(K, max_unit_size)
    if v == "v>=2":
        return "deformation_exists_via_2"
    if h is None or v == "undetermined":
        return "undetermined"
    return "neither_detected"
