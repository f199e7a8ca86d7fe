"""Integer utilities and the closed-form mod-2 criteria at prime level.

Everything here works on Python ints.  Inputs are bounded by ``2**63``.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from typing import NamedTuple, Optional

LIMIT = 2**63

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

_SMALL_PRIMES: list[int] = []
_SIEVED_TO = 0


def _sieve(n: int) -> list[int]:
    flags = bytearray([1]) * (n + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, f in enumerate(flags) if f]


def small_primes(bound: int = 10**6) -> list[int]:
    global _SMALL_PRIMES, _SIEVED_TO
    if _SIEVED_TO < bound:
        _SIEVED_TO = max(bound, 10**6)
        _SMALL_PRIMES = _sieve(_SIEVED_TO)
    if bound >= _SIEVED_TO:
        return _SMALL_PRIMES
    return _SMALL_PRIMES[: bisect.bisect_right(_SMALL_PRIMES, bound)]


def primes_up_to(n: int) -> list[int]:
    return [p for p in small_primes(max(n, 2)) if p <= n]


def _check_range(n: int) -> None:
    if n < 1 or n > LIMIT:
        raise ValueError(f"expected 1 <= n <= 2**63, got {n}")


def is_prime(n: int) -> bool:
    """Deterministic primality test for 1 <= n <= 2**63."""
    _check_range(n)
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho(n: int, rng: random.Random) -> int:
    """Brent's variant of Pollard rho; returns a nontrivial factor of composite n."""
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def odd_primes(self) -> list[int]:
        return [p for p, _ in self.factors if p != 2]

    def is_prime(self) -> bool:
        return len(self.factors) == 1 and self.factors[0][1] == 1

    def is_prime_power(self) -> bool:
        return len(self.factors) == 1

    def exponent(self, p: int) -> int:
        return dict(self.factors).get(p, 0)

    def __iter__(self):
        return iter(self.factors)

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)


def factor(n: int) -> Factorization:
    """Factor n <= 2**63: trial division to 10**6, then Pollard-Brent rho."""
    _check_range(n)
    m = n
    found: dict[int, int] = {}
    for p in small_primes():
        if p * p > m:
            break
        while m % p == 0:
            found[p] = found.get(p, 0) + 1
            m //= p
    if m > 1:
        rng = random.Random(0x5EED)
        stack = [m]
        while stack:
            x = stack.pop()
            if x == 1:
                continue
            if is_prime(x):
                found[x] = found.get(x, 0) + 1
                continue
            d = _rho(x, rng)
            stack += [d, x // d]
    return Factorization(n, tuple(sorted(found.items())))


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factor(abs(n)))


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


class FormRepresentation(NamedTuple):
    N: int
    u: int
    v: int


def _require_prime_1_mod_8(N: int) -> None:
    if N % 8 != 1 or not is_prime(N):
        raise ValueError(f"{N} is not a prime congruent to 1 mod 8")


def represent_u2_plus_16v2(N: int) -> FormRepresentation:
    """Return the positive solution of N = u^2 + 16 v^2 (u odd) for prime N = 1 mod 8."""
    _require_prime_1_mod_8(N)
    for v in range(1, math.isqrt(N // 16) + 1):
        rest = N - 16 * v * v
        u = math.isqrt(rest)
        if u * u == rest:
            return FormRepresentation(N, u, v)
    raise AssertionError(f"no representation found for prime {N}")  # pragma: no cover


def merel_criterion(N: int) -> bool:
    """True iff v = (N-1)/8 mod 2, i.e. the Eisenstein local factor at 2 is not Z_2."""
    rep = represent_u2_plus_16v2(N)
    return rep.v % 2 == ((N - 1) // 8) % 2


class NeumannSetzer(NamedTuple):
    u: int
    odd_degree: bool


def neumann_setzer_test(N: int) -> Optional[NeumannSetzer]:
    """For N = u^2 + 64 return u and whether the optimal curve has odd degree."""
    if N <= 64:
        return None
    u = math.isqrt(N - 64)
    if u * u != N - 64:
        return None
    return NeumannSetzer(u, N % 16 != 1)


def genus_x0(N: int) -> int:
    """Genus of X_0(N) from the index, elliptic points and cusps."""
    fac = factor(N)
    mu = index_gamma0(N)
    nu2 = 0 if N % 4 == 0 else math.prod(1 + kronecker(-4, p) for p, _ in fac)
    nu3 = 0 if N % 9 == 0 else math.prod(1 + kronecker(-3, p) for p, _ in fac)
    cusps = sum(_euler_phi(math.gcd(d, N // d)) for d in divisors(N))
    return 1 + (mu - 3 * nu2 - 4 * nu3 - 6 * cusps) // 12


def index_gamma0(N: int) -> int:
    mu = N
    for p, _ in factor(N):
        mu = mu // p * (p + 1)
    return mu


def sturm_bound(N: int) -> int:
    return -(-index_gamma0(N) // 6)


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factor(n):
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def _euler_phi(n: int) -> int:
    r = n
    for p, _ in factor(n):
        r = r // p * (p - 1)
    return r
