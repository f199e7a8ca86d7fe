"""Elliptic curves over Q given by integral Weierstrass models.

Models are taken as globally minimal (they come from the curve tables);
``possibly_non_minimal`` only does the cheap valuation check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .arith import factor, is_prime, is_squarefree, kronecker

# Discriminant -> j-invariant for the thirteen imaginary quadratic orders of
# class number one.  Checked numerically against Klein's j function in the
# test suite (tests/test_curve.py::test_cm_table_matches_klein_j).
CM_J_INVARIANTS = {
    -3: 0,
    -4: 1728,
    -7: -3375,
    -8: 8000,
    -11: -32768,
    -12: 54000,
    -16: 287496,
    -19: -884736,
    -27: -12288000,
    -28: 16581375,
    -43: -884736000,
    -67: -147197952000,
    -163: -262537412640768000,
}


class SingularCurveError(ValueError):
    pass


class BadReductionError(ValueError):
    pass


@dataclass(frozen=True)
class WeierstrassCurve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    b2: int = field(init=False)
    b4: int = field(init=False)
    b6: int = field(init=False)
    b8: int = field(init=False)
    c4: int = field(init=False)
    c6: int = field(init=False)
    disc: int = field(init=False)
    j_num: int = field(init=False)
    j_den: int = field(init=False)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise SingularCurveError(f"singular model {list(self.ainvs)}")
        num = c4**3
        g = math.gcd(num, disc)
        j_num, j_den = num // g, disc // g
        if j_den < 0:
            j_num, j_den = -j_num, -j_den
        for name, value in (("b2", b2), ("b4", b4), ("b6", b6), ("b8", b8),
                            ("c4", c4), ("c6", c6), ("disc", disc),
                            ("j_num", j_num), ("j_den", j_den)):
            object.__setattr__(self, name, value)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def j(self) -> tuple[int, int]:
        return (self.j_num, self.j_den)

    def has_good_reduction(self, p: int) -> bool:
        return self.disc % p != 0

    def possibly_non_minimal(self) -> bool:
        """True if some p has p^12 | disc and p^4 | c4."""
        for p, e in factor(abs(self.disc)):
            if e >= 12 and self.c4 % p**4 == 0:
                return True
        return False

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"


def derive_invariants(*ainvs: int | Sequence[int]) -> WeierstrassCurve:
    """Build a curve from five a-invariants, given separately or as one sequence."""
    if len(ainvs) == 1:
        ainvs = tuple(ainvs[0])
    if len(ainvs) != 5:
        raise ValueError("expected five a-invariants")
    return WeierstrassCurve(*(int(a) for a in ainvs))


def from_c4_c6(c4: int, c6: int) -> WeierstrassCurve:
    """The model y^2 = x^3 - 27 c4 x - 54 c6 (same j, discriminant scaled by 6^12)."""
    return WeierstrassCurve(0, 0, 0, -27 * c4, -54 * c6)


# -- 2-torsion ---------------------------------------------------------------

@dataclass(frozen=True)
class TwoTorsionInfo:
    cubic: tuple[int, int, int]          # X^3 + b X^2 + c X + d as (b, c, d)
    has_rational_root: bool
    cubic_disc: int
    roots: tuple[int, ...] = ()


def cubic_discriminant(b: int, c: int, d: int) -> int:
    return b * b * c * c - 4 * c**3 - 4 * b**3 * d - 27 * d * d + 18 * b * c * d


def integer_roots(b: int, c: int, d: int) -> list[int]:
    """Integer roots of X^3 + bX^2 + cX + d, exactly.

    The real line is cut at the integer hulls of the critical points, and each
    monotone piece is bisected for an exact zero.
    """
    f = lambda x: ((x + b) * x + c) * x + d
    bound = 1 + max(abs(b), abs(c), abs(d))
    cuts = [-bound, bound]
    # critical points of 3X^2 + 2bX + c
    dd = b * b - 3 * c
    if dd >= 0:
        s = math.isqrt(dd)
        for num in (-b - s - 1, -b - s, -b + s, -b + s + 1):
            cuts += [num // 3, num // 3 + 1]
    cuts = sorted({min(max(x, -bound), bound) for x in cuts})
    roots = set()
    for x in cuts:
        if f(x) == 0:
            roots.add(x)
    for lo, hi in zip(cuts, cuts[1:]):
        flo, fhi = f(lo), f(hi)
        if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
            continue
        up = fhi > 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            fm = f(mid)
            if fm == 0:
                roots.add(mid)
                break
            if (fm > 0) == up:
                hi = mid
            else:
                lo = mid
    return sorted(roots)


def two_division_cubic(E: WeierstrassCurve) -> tuple[int, int, int]:
    """Monic integral form of 4x^3 + b2 x^2 + 2 b4 x + b6 under X = 4x."""
    return (E.b2, 8 * E.b4, 16 * E.b6)


def two_torsion_info(E: WeierstrassCurve) -> TwoTorsionInfo:
    b, c, d = two_division_cubic(E)
    roots = integer_roots(b, c, d)
    return TwoTorsionInfo((b, c, d), bool(roots), cubic_discriminant(b, c, d), tuple(roots))


def is_real_connected(E: WeierstrassCurve) -> bool:
    return E.disc < 0


# -- point counting ----------------------------------------------------------

def _count_small(E: WeierstrassCurve, p: int) -> int:
    a1, a2, a3, a4, a6 = (a % p for a in E.ainvs)
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return n


def count_points(E: WeierstrassCurve, p: int) -> int:
    """#E(F_p) for a prime p of good reduction."""
    if not E.has_good_reduction(p):
        raise BadReductionError(f"{E} has bad reduction at {p}")
    if p <= 3:
        return _count_small(E, p)
    x = np.arange(p, dtype=np.int64)
    b2, b4, b6 = E.b2 % p, (2 * E.b4) % p, E.b6 % p
    rhs = (4 * x + b2) % p
    rhs = (rhs * x + b4) % p
    rhs = (rhs * x + b6) % p
    is_square = np.zeros(p, dtype=np.int8)
    is_square[(x * x) % p] = 1
    chi = np.where(rhs == 0, 0, 2 * is_square[rhs].astype(np.int64) - 1)
    return int(1 + p + chi.sum())


def ap_point_count(E: WeierstrassCurve, p: int) -> int:
    """a_p = p + 1 - #E(F_p) for good p."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p + 1 - count_points(E, p)


def ap_values(E: WeierstrassCurve, primes: Iterable[int]) -> dict[int, int]:
    return {p: ap_point_count(E, p) for p in primes if E.has_good_reduction(p)}


def is_supersingular_at_2(E: WeierstrassCurve) -> bool:
    """Good reduction at 2 with a_2 even."""
    return ap_point_count(E, 2) % 2 == 0


# -- CM and twists -----------------------------------------------------------

def cm_discriminant(E: WeierstrassCurve) -> Optional[int]:
    """Discriminant of the CM order, or None when j is not a rational CM value."""
    if E.j_den != 1:
        return None
    for D, j in CM_J_INVARIANTS.items():
        if j == E.j_num:
            return D
    return None


def quadratic_twist(E: WeierstrassCurve, d: int) -> WeierstrassCurve:
    """A (generally non-minimal) model of the twist of E by Q(sqrt d)."""
    if d == 0 or not is_squarefree(d):
        raise ValueError(f"twist parameter {d} must be squarefree and nonzero")
    return from_c4_c6(d * d * E.c4, d**3 * E.c6)


def twist_character(d: int, p: int) -> int:
    """Value at p of the quadratic character attached to Q(sqrt d)."""
    disc = d if d % 4 == 1 else 4 * d
    return kronecker(disc, p)
