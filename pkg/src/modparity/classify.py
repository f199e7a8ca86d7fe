"""Verdicts on the parity of a curve's modular degree.

The structural criteria are necessary conditions for odd degree: they can
force ``even`` but never ``odd``.  An ``odd`` verdict only comes from the
mod-2 Hecke algebra computation at prime level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .arith import Factorization, factor, is_prime, primes_up_to
from .curve import WeierstrassCurve, ap_point_count, cm_discriminant, is_real_connected, two_torsion_info
from .hecke2 import LocalFactorMod2, decompose_mod2, hecke_lattice, tm_equals_z2
from .modsym import MAX_LEVEL, build_space


class Rule(str, enum.Enum):
    TOO_MANY_ODD_PRIMES = "TOO_MANY_ODD_PRIMES"
    ODD_ANALYTIC_RANK = "ODD_ANALYTIC_RANK"
    COMPOSITE_NO_2TORSION = "COMPOSITE_NO_2TORSION"
    PRIME_POWER_NON_CM = "PRIME_POWER_NON_CM"
    CASE_3A = "CASE_3A"
    CASE_3B = "CASE_3B"
    CASE_3C = "CASE_3C"
    TM_EQ_Z2 = "TM_EQ_Z2"
    TM_NE_Z2 = "TM_NE_Z2"
    OUTSIDE_SCOPE = "OUTSIDE_SCOPE"


class Citation(str, enum.Enum):
    """Fixed set of result names attached to verdicts."""
    NECESSARY_CONDITIONS = "odd-degree-necessary-conditions"
    ODD_PRIME_BOUND = "odd-degree:at-most-two-odd-primes"
    EVEN_RANK = "odd-degree:even-analytic-rank"
    TWO_TORSION_CASE = "odd-degree:rational-2-torsion"
    SUPERSINGULAR_CASE = "odd-degree:prime-supersingular-connected"
    CM_CASE = "odd-degree:cm-small-levels"
    COMPOSITE_LEVEL = "composite-level:2-torsion-and-even-rank"
    PRIME_POWER_TWIST = "prime-power-level:quadratic-twist"
    RIBET_CONGRUENCE = "congruence-prime-2-iff-local-factor-not-z2"
    WATKINS = "odd-degree-prime-level:3-mod-8"
    MEREL = "eisenstein-factor:u2-plus-16v2"
    NEUMANN_SETZER = "neumann-setzer:u2-plus-64"
    OPTIMALITY = "assumes-optimal-curve"
    TWO_POWER_LEVEL = "two-power-level:finite-list"


CM_LEVELS = frozenset({27, 32, 49, 243})


@dataclass(frozen=True)
class Verdict:
    parity: str              # "odd", "even" or "undetermined"
    rule: Rule
    citations: tuple[str, ...]
    detail: Mapping[str, object] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "parity": self.parity,
            "rule": self.rule.value,
            "citations": list(self.citations),
            "detail": dict(self.detail),
        }


class ConductorMismatch(ValueError):
    pass


def _cites(*c: Citation) -> tuple[str, ...]:
    return tuple(x.value for x in c)


def _check_conductor(E: WeierstrassCurve, N: Factorization) -> None:
    for p in N.primes:
        if E.disc % p:
            raise ConductorMismatch(f"{p} divides the conductor {N.n} but not the discriminant of {E}")
    if N.n <= 0:
        raise ConductorMismatch("conductor must be positive")


def theorem_one_filter(E: WeierstrassCurve, N: Factorization | int, rank_parity: Optional[str] = None) -> Verdict:
    """Apply the necessary conditions for the modular degree to be odd.

    Returns ``even`` with the first violated condition, otherwise
    ``undetermined`` labelled by the case that remains possible.
    ``rank_parity`` ("odd"/"even"), when known, adds the rank condition.
    """
    if isinstance(N, int):
        N = factor(N)
    _check_conductor(E, N)
    n = N.n
    odd = N.odd_primes()
    if len(odd) > 2:
        return Verdict("even", Rule.TOO_MANY_ODD_PRIMES, _cites(Citation.ODD_PRIME_BOUND),
                       {"odd_primes": odd})
    if n & (n - 1) == 0 and n != 32:
        return Verdict("undetermined", Rule.OUTSIDE_SCOPE, _cites(Citation.TWO_POWER_LEVEL))
    if rank_parity == "odd":
        return Verdict("even", Rule.ODD_ANALYTIC_RANK, _cites(Citation.EVEN_RANK))

    cm = cm_discriminant(E)
    tt = two_torsion_info(E)
    prime_power = N.is_prime_power() and not N.is_prime()
    if prime_power and n % 2 and n not in CM_LEVELS and cm is None:
        return Verdict("even", Rule.PRIME_POWER_NON_CM, _cites(Citation.PRIME_POWER_TWIST),
                       {"conductor": str(N)})
    if len(N.primes) >= 2 and not tt.has_rational_root:
        return Verdict("even", Rule.COMPOSITE_NO_2TORSION, _cites(Citation.COMPOSITE_LEVEL),
                       {"primes": N.primes})

    if tt.has_rational_root:
        return Verdict("undetermined", Rule.CASE_3A, _cites(Citation.TWO_TORSION_CASE),
                       {"odd_primes": odd, "two_torsion_x": [r / 4 for r in tt.roots]})
    if cm is not None and n in CM_LEVELS:
        return Verdict("undetermined", Rule.CASE_3C, _cites(Citation.CM_CASE),
                       {"cm_discriminant": cm, "j": f"{E.j_num}/{E.j_den}" if E.j_den != 1 else str(E.j_num)})
    if N.is_prime():
        a2 = ap_point_count(E, 2) if n != 2 else None
        supersingular = a2 is not None and a2 % 2 == 0
        connected = is_real_connected(E)
        info = {"a2": a2, "supersingular_at_2": supersingular, "disc_negative": connected}
        if supersingular and connected:
            return Verdict("undetermined", Rule.CASE_3B, _cites(Citation.SUPERSINGULAR_CASE), info)
        return Verdict("even", Rule.CASE_3B, _cites(Citation.SUPERSINGULAR_CASE), info)
    # a prime power that is left over: either CM outside the allowed levels or
    # one of the allowed levels without CM
    if cm is not None:
        return Verdict("even", Rule.CASE_3C, _cites(Citation.CM_CASE), {"cm_discriminant": cm, "conductor": n})
    return Verdict("even", Rule.PRIME_POWER_NON_CM, _cites(Citation.PRIME_POWER_TWIST), {"conductor": str(N)})


# -- prime level ---------------------------------------------------------------

class NoMatchingFactor(ArithmeticError):
    pass


@dataclass
class LevelData:
    """Everything computed once per prime level and shared between its curves."""
    N: int
    lattice: object
    factors: list[LocalFactorMod2]


def level_data(N: int) -> LevelData:
    space = build_space(N)
    lat = hecke_lattice(space)
    return LevelData(N, lat, decompose_mod2(lat))


def matching_factor(E: WeierstrassCurve, data: LevelData) -> LocalFactorMod2:
    """The residue-degree-one factor whose eigenvalues are the a_l of E mod 2."""
    N = data.N
    primes = [l for l in data.lattice.primes if N % l]
    ap = {l: ap_point_count(E, l) % 2 for l in primes}
    hits = [f for f in data.factors
            if f.residue_degree == 1 and all(int(f.eigensystem[l]) == ap[l] for l in primes)]
    if len(hits) != 1:
        raise NoMatchingFactor(f"{len(hits)} local factors match {E} at level {N}")
    return hits[0]


def predict_parity_prime_level(E: WeierstrassCurve, N: int, data: Optional[LevelData] = None) -> Verdict:
    """Odd iff the curve's local factor of T/2T is one-dimensional over F_2."""
    if not is_prime(N):
        raise ValueError(f"{N} is not prime")
    if N > MAX_LEVEL:
        raise ValueError(f"level {N} is above the supported range {MAX_LEVEL}")
    if E.disc % N:
        raise ConductorMismatch(f"{E} has good reduction at {N}")
    data = data or level_data(N)
    f = matching_factor(E, data)
    t = tm_equals_z2(f)
    info = {"local_dim": f.local_dim, "residue_degree": f.residue_degree,
            "eisenstein": f.eisenstein, "reason": t.reason}
    cites = _cites(Citation.RIBET_CONGRUENCE, Citation.OPTIMALITY)
    if t:
        return Verdict("odd", Rule.TM_EQ_Z2, cites, info)
    return Verdict("even", Rule.TM_NE_Z2, cites, info)


# -- dataset-level checks ------------------------------------------------------

@dataclass(frozen=True)
class WatkinsRow:
    label: str
    conductor: int
    degree: int
    has_two_torsion: bool


@dataclass
class WatkinsReport:
    checked: list[str]
    excluded: list[str]
    violations: list[str]

    @property
    def passed(self) -> bool:
        return not self.violations


def watkins_verdict(rows: Iterable[WatkinsRow]) -> WatkinsReport:
    """Odd degree, prime level and no 2-torsion must force N = 3 mod 8."""
    checked, excluded, bad = [], [], []
    for r in rows:
        if r.degree % 2 == 0 or not is_prime(r.conductor):
            continue
        if r.has_two_torsion:
            excluded.append(r.label)
            continue
        checked.append(r.label)
        if r.conductor % 8 != 3:
            bad.append(r.label)
    return WatkinsReport(checked, excluded, bad)


@dataclass(frozen=True)
class CompositeChecklist:
    at_most_three_primes: bool
    odd_level_at_most_two_primes: bool
    at_most_two_odd_primes: bool
    even_analytic_rank: bool
    composite_has_two_torsion: bool

    def all_pass(self) -> bool:
        return all(self.as_dict().values())

    def failures(self) -> list[str]:
        return [k for k, v in self.as_dict().items() if not v]

    def as_dict(self) -> dict[str, bool]:
        return {
            "at_most_three_primes": self.at_most_three_primes,
            "odd_level_at_most_two_primes": self.odd_level_at_most_two_primes,
            "at_most_two_odd_primes": self.at_most_two_odd_primes,
            "even_analytic_rank": self.even_analytic_rank,
            "composite_has_two_torsion": self.composite_has_two_torsion,
        }


def composite_conditions(E: WeierstrassCurve, N: Factorization | int, rank_parity: str,
                         has_two_torsion: Optional[bool] = None) -> CompositeChecklist:
    """Conditions every odd-degree curve must meet; composite means two or more primes."""
    if isinstance(N, int):
        N = factor(N)
    if has_two_torsion is None:
        has_two_torsion = two_torsion_info(E).has_rational_root
    k = len(N.primes)
    return CompositeChecklist(
        at_most_three_primes=k <= 3,
        odd_level_at_most_two_primes=(N.n % 2 == 0) or k <= 2,
        at_most_two_odd_primes=len(N.odd_primes()) <= 2,
        even_analytic_rank=rank_parity == "even",
        composite_has_two_torsion=k < 2 or has_two_torsion,
    )
