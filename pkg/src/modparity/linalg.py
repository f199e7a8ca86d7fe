"""Exact integer/rational linear algebra glue (python-flint) and GF(2) routines.

Matrices cross module boundaries as numpy arrays: ``int64`` when every entry
fits comfortably, otherwise ``object`` arrays of Python ints.  Row-vector
convention throughout: a matrix acts on row vectors from the right.
"""

from __future__ import annotations

import numpy as np
from flint import fmpq, fmpq_mat, fmpz_mat

_INT64_SAFE = 2**62
_FLOAT_EXACT = 2**52


def as_int_array(rows) -> np.ndarray:
    """Integer matrix as int64 when it fits, else as an object array."""
    if isinstance(rows, (fmpz_mat, fmpq_mat)):
        r, c = rows.nrows(), rows.ncols()
        return as_int_array(np.array([int(x) for x in rows.entries()], dtype=object).reshape(r, c))
    if isinstance(rows, np.ndarray) and rows.dtype == np.int64:
        return rows
    try:
        arr = np.array(rows, dtype=np.int64)
    except OverflowError:
        return np.array(rows, dtype=object)
    if arr.size and int(np.abs(arr).max()) >= _INT64_SAFE:
        return np.array(rows, dtype=object)
    return arr


def to_fmpz(a) -> fmpz_mat:
    a = np.asarray(a)
    r, c = a.shape
    return fmpz_mat(r, c, [int(x) for x in a.ravel().tolist()])


def to_fmpq(a) -> fmpq_mat:
    a = np.asarray(a)
    if a.dtype == object and a.size and any(isinstance(x, fmpq) for x in a.flat):
        r, c = a.shape
        return fmpq_mat(r, c, [x if isinstance(x, fmpq) else fmpq(int(x)) for x in a.flat])
    return fmpq_mat(to_fmpz(a))


def fmpq_to_int_array(m: fmpq_mat) -> np.ndarray:
    num, den = m.numer_denom()
    if den != 1:
        raise ArithmeticError("matrix is not integral")
    if m.nrows() == 0:
        return np.zeros((0, m.ncols()), dtype=np.int64)
    return as_int_array(num)


def hnf_rows(a) -> np.ndarray:
    """Nonzero rows of the Hermite normal form of an integer matrix."""
    a = np.asarray(a)
    if a.shape[0] == 0:
        return a.reshape(0, a.shape[1]).astype(np.int64)
    h = to_fmpz(a).hnf()
    rows = [r for r in h.tolist() if any(x != 0 for x in r)]
    if not rows:
        return np.zeros((0, a.shape[1]), dtype=np.int64)
    return as_int_array([[int(x) for x in r] for r in rows])


def left_kernel_z(a) -> np.ndarray:
    """Z-basis (rows) of {y in Z^n : y a = 0}, automatically saturated."""
    a = np.asarray(a)
    n, m = a.shape
    if m == 0:
        return np.eye(n, dtype=np.int64)
    aug = np.concatenate([np.asarray(a, dtype=object), np.eye(n, dtype=np.int64).astype(object)], axis=1)
    h = to_fmpz(aug).hnf().tolist()
    ker = [[int(x) for x in row[m:]] for row in h
           if all(x == 0 for x in row[:m]) and any(x != 0 for x in row[m:])]
    if not ker:
        return np.zeros((0, n), dtype=np.int64)
    return hnf_rows(ker)


def saturate(rows) -> np.ndarray:
    """Z^n intersected with the rational row span of ``rows``."""
    rows = np.asarray(rows)
    k, n = rows.shape
    if k == 0:
        return rows.astype(np.int64)
    # kernel of the orthogonal complement
    perp = nullspace_q(rows)  # n x (n-k) columns spanning {x : rows x = 0}
    if perp.shape[1] == 0:
        return np.eye(n, dtype=np.int64)
    return left_kernel_z(perp)


def nullspace_q(a) -> np.ndarray:
    """Integral column basis of the right kernel {x : a x = 0}."""
    a = np.asarray(a)
    ns, nullity = to_fmpz(a).nullspace()
    cols = [[int(ns[i, j]) for i in range(ns.nrows())] for j in range(nullity)]
    if not cols:
        return np.zeros((a.shape[1], 0), dtype=np.int64)
    basis = np.array(cols, dtype=object)
    return as_int_array(basis).T


def rank_q(a) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return to_fmpz(a).rank()


def solve_rows(basis, targets) -> np.ndarray:
    """Rational X with X @ basis == targets, for ``basis`` of full row rank.

    Returns an integer array; raises if the solution is not integral or does
    not exist.
    """
    basis = np.asarray(basis)
    targets = np.asarray(targets)
    k, n = basis.shape
    if k == 0:
        return np.zeros((targets.shape[0], 0), dtype=np.int64)
    if k == n:
        x = to_fmpq(basis).transpose().solve(to_fmpq(targets).transpose()).transpose()
        return fmpq_to_int_array(x)
    b = to_fmpz(basis)
    _, piv = _pivot_columns(b)
    sq = to_fmpq(basis[:, piv])
    t = to_fmpq(targets[:, piv])
    x = (sq.transpose().solve(t.transpose())).transpose()
    xi = fmpq_to_int_array(x)
    check = matmul(xi, basis)
    if not np.array_equal(np.asarray(check, dtype=object), np.asarray(targets, dtype=object)):
        raise ArithmeticError("targets are not in the row span")
    return xi


def _pivot_columns(m: fmpz_mat) -> tuple[int, list[int]]:
    r = m.rref()[0]
    piv = []
    rows = r.tolist()
    for row in rows:
        for j, x in enumerate(row):
            if x != 0:
                piv.append(j)
                break
    return len(piv), piv


def matmul(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype != object and b.dtype != object:
        bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * max(a.shape[1], 1)
        if bound < _FLOAT_EXACT:
            # exact in double precision, so BLAS can be used
            return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        if bound < _INT64_SAFE:
            return a.astype(np.int64) @ b.astype(np.int64)
    return as_int_array(np.asarray(a, dtype=object).dot(np.asarray(b, dtype=object)))


def inverse_q(a) -> fmpq_mat:
    return to_fmpq(a).inv()


def conjugate_integral(basis, op) -> np.ndarray:
    """Matrix of ``op`` on the lattice spanned by rows of ``basis`` (must be stable)."""
    return solve_rows(basis, matmul(basis, op))


class RowSolver:
    """Repeated solves of X @ basis == targets against one full-row-rank basis."""

    def __init__(self, basis):
        self.basis = np.asarray(basis)
        k, n = self.basis.shape
        self.k = k
        if k == 0:
            return
        _, self.pivots = _pivot_columns(to_fmpz(self.basis))
        self.inverse = to_fmpq(self.basis[:, self.pivots]).inv()

    def solve(self, targets) -> np.ndarray:
        targets = np.asarray(targets)
        if self.k == 0:
            return np.zeros((targets.shape[0], 0), dtype=np.int64)
        x = fmpq_to_int_array(to_fmpq(targets[:, self.pivots]) * self.inverse)
        if not np.array_equal(np.asarray(matmul(x, self.basis), dtype=object), np.asarray(targets, dtype=object)):
            raise ArithmeticError("targets are not in the row span")
        return x

    def conjugate(self, op) -> np.ndarray:
        return self.solve(matmul(self.basis, op))


# -- GF(2) ------------------------------------------------------------------

def gf2(a) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype == object:
        return np.array([[int(x) & 1 for x in row] for row in a], dtype=np.uint8).reshape(a.shape)
    return (a % 2).astype(np.uint8)


def gf2_matmul(a, b) -> np.ndarray:
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def gf2_rref(a) -> tuple[np.ndarray, list[int]]:
    m = np.array(a, dtype=np.uint8, copy=True)
    rows, cols = m.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != r]
        if hit.size:
            m[hit] ^= m[r]
        piv.append(c)
        r += 1
    return m[:r], piv


def gf2_rank(a) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(gf2_rref(a)[1])


def gf2_row_basis(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint8)
    if a.shape[0] == 0:
        return a
    return gf2_rref(a)[0]


def gf2_left_kernel(a) -> np.ndarray:
    """Rows spanning {y : y a = 0} over GF(2)."""
    a = np.asarray(a, dtype=np.uint8)
    n = a.shape[0]
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    red, piv = gf2_rref(aug)
    m = a.shape[1]
    # rows of the reduced augmented matrix whose left part vanishes
    full, _ = _gf2_rref_all(aug)
    ker = [row[m:] for row in full if not row[:m].any() and row[m:].any()]
    if not ker:
        return np.zeros((0, n), dtype=np.uint8)
    return gf2_row_basis(np.array(ker, dtype=np.uint8))


def _gf2_rref_all(a):
    # same elimination but keep the zero rows (needed for kernels)
    m = np.array(a, dtype=np.uint8, copy=True)
    rows, cols = m.shape
    r = 0
    piv = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != r]
        if hit.size:
            m[hit] ^= m[r]
        piv.append(c)
        r += 1
    return m, piv


def gf2_solve_rows(basis, targets) -> np.ndarray:
    """X over GF(2) with X @ basis == targets; basis rows independent."""
    basis = np.asarray(basis, dtype=np.uint8)
    targets = np.atleast_2d(np.asarray(targets, dtype=np.uint8))
    k = basis.shape[0]
    aug = np.concatenate([basis.T, targets.T], axis=1)
    red, piv = _gf2_rref_all(aug)
    if any(p >= k for p in piv):
        raise ArithmeticError("target not in span over GF(2)")
    x = np.zeros((targets.shape[0], k), dtype=np.uint8)
    for i, p in enumerate(piv):
        x[:, p] = red[i, k:]
    return x


def gf2_in_span(basis, v) -> bool:
    basis = np.asarray(basis, dtype=np.uint8)
    if basis.shape[0] == 0:
        return not np.asarray(v).any()
    return gf2_rank(np.vstack([basis, v])) == gf2_rank(basis)
