"""Multiplicative functions and their sign statistics: the sign algebra,
pretentious distance, the "pretends to be a character" prime sum, sign-density
counts over squarefree integers, L(q), and sums of 1*psi over rough numbers.

Signs live in {+1, -1}, identified with the symbols {+, -}; the product of
two signs is + exactly when they agree.
"""

from __future__ import annotations

import math
from typing import Callable

import mpmath
import numpy as np

from . import arith
from .errors import DomainError

PLUS = 1
MINUS = -1


def sgn(x: float) -> int:
    """Sign symbol of a nonzero real, as +1 or -1."""
    if x == 0:
        raise DomainError("sgn is undefined at 0")
    return PLUS if x > 0 else MINUS


class MultiplicativeFunction:
    """A real multiplicative function given by its rule on prime powers.

    h(1) = 1 and h(prod p^e) = prod rule(p, e).  Values are memoized; the
    memo is safe for concurrent reads (single-writer dict publication).
    `kind` marks built-ins with fast vectorized sign windows.
    """

    def __init__(self, name: str, prime_power_rule: Callable[[int, int], float],
                 kind: str = "generic", character=None):
        self.name = name
        self.rule = prime_power_rule
        self.kind = kind
        self.character = character
        self._memo: dict[int, float] = {1: 1.0}

    def __repr__(self):
        return f"MultiplicativeFunction({self.name!r})"

    def value(self, n: int) -> float:
        if n < 1:
            raise DomainError("multiplicative functions are defined on n >= 1")
        v = self._memo.get(n)
        if v is None:
            out = 1.0
            for p, e in arith.factorize(n).factors:
                out *= self.rule(p, e)
            v = out
            self._memo[n] = v
        return v

    __call__ = value

    def sign(self, n: int) -> int:
        return sgn(self.value(n))

    def sign_window(self, lo: int, hi: int) -> np.ndarray:
        """Signs of h(n) for lo < n <= hi as int8 (+1/-1; 0 where h(n)=0)."""
        N = hi - lo
        if N <= 0:
            return np.empty(0, dtype=np.int8)
        if self.kind == "liouville":
            lam, _ = arith.liouville_squarefree_window(lo, hi)
            return lam
        if self.kind == "mobius":
            lam, sqf = arith.liouville_squarefree_window(lo, hi)
            return np.where(sqf, lam, 0).astype(np.int8)
        if self.kind == "one":
            return np.ones(N, dtype=np.int8)
        if self.kind == "character":
            chi = self.character
            table = chi.real_sign_table()
            n = np.arange(lo + 1, hi + 1, dtype=np.int64)
            return table[n % chi.group.q]
        out = np.empty(N, dtype=np.int8)
        for i, fac in enumerate(arith.factor_window(lo, hi)):
            v = 1.0
            for p, e in fac:
                v *= self.rule(p, e)
            out[i] = 0 if v == 0 else (1 if v > 0 else -1)
        return out


def liouville_fn() -> MultiplicativeFunction:
    return MultiplicativeFunction("liouville", lambda p, e: float((-1) ** e), kind="liouville")


def mobius_fn() -> MultiplicativeFunction:
    return MultiplicativeFunction("mobius", lambda p, e: -1.0 if e == 1 else 0.0, kind="mobius")


def one_fn() -> MultiplicativeFunction:
    return MultiplicativeFunction("one", lambda p, e: 1.0, kind="one")


def character_fn(chi) -> MultiplicativeFunction:
    """Completely multiplicative extension of a real Dirichlet character."""
    if not chi.is_real:
        raise DomainError("character_fn requires a real (order <= 2) character")
    return MultiplicativeFunction(
        f"character-mod-{chi.group.q}", lambda p, e: float(chi(p).real) ** e,
        kind="character", character=chi)


def builtin_function(name: str) -> MultiplicativeFunction:
    table = {"liouville": liouville_fn, "mobius": mobius_fn, "one": one_fn}
    if name not in table:
        raise DomainError(f"unknown multiplicative function {name!r}; "
                          f"choose from {sorted(table)}")
    return table[name]()


# ---------------------------------------------------------------------------
# pretentious distance and the pretend criterion

def pretentious_distance_squared(f: MultiplicativeFunction, g: MultiplicativeFunction,
                                 x: float, r: int = 1) -> float:
    """D_r(f,g;x)^2 = sum_{p <= x, p not | r} (1 - f(p) g(p)) / p."""
    if x < 2:
        raise DomainError("x must be >= 2")
    total = 0.0
    for p in arith.primes_upto(int(x)):
        p = int(p)
        if r % p == 0:
            continue
        total += (1.0 - f.value(p) * g.value(p)) / p
    return total


def pretentious_distance(f, g, x: float, r: int = 1) -> float:
    return math.sqrt(max(0.0, pretentious_distance_squared(f, g, x, r)))


def pretend_sum(h: MultiplicativeFunction, chi, cutoff: float) -> float:
    """sum over p <= cutoff with h(p) chi(p) < 0 of 1/p (chi real/principal)."""
    if not chi.is_real:
        raise DomainError("the pretend criterion is defined for characters of order <= 2")
    total = 0.0
    for p in arith.primes_upto(int(cutoff)):
        p = int(p)
        if h.value(p) * chi(p).real < 0:
            total += 1.0 / p
    return total


def pretend_condition_holds(pretend: float, c: float, Q1: float) -> bool:
    """The theorem-side smallness test: pretend <= c / Q1^(1/100)."""
    return pretend <= c / Q1 ** (1 / 100)


# ---------------------------------------------------------------------------
# sign densities over squarefree integers

def sign_density_counts(h: MultiplicativeFunction, q: int, y: int, delta: int,
                        eps: float = 0.1) -> tuple[int, dict]:
    """Exact sum_{n<=y, sgn(h(n))=delta} chi_0(n) |mu(n)| plus shape ratios.

    The reported lower-bound shapes are (phi(q)/q) y and, for the minus sign,
    the same times min(1, sum_{p <= y/q^(eps/8), h(p)<0, p not|q} 1/p).
    Ratios are informational (the implied constants are not specified).
    """
    if y < 1:
        raise DomainError("y must be >= 1")
    signs = h.sign_window(0, y)
    _, sqf = arith.liouville_squarefree_window(0, y)
    n = np.arange(1, y + 1, dtype=np.int64)
    coprime = np.gcd(n, q) == 1 if q > 1 else np.ones(y, dtype=bool)
    count = int(np.sum(sqf & coprime & (signs == delta)))
    shape = arith.euler_phi(q) / q * y
    neg_cut = y / q ** (eps / 8) if q > 1 else float(y)
    neg_sum = 0.0
    for p in arith.primes_upto(int(neg_cut)):
        p = int(p)
        if q % p == 0:
            continue
        if h.value(p) < 0:
            neg_sum += 1.0 / p
    if delta == MINUS:
        shape *= min(1.0, neg_sum)
    report = {
        "count": count,
        "shape": shape,
        "ratio": count / shape if shape > 0 else float("inf"),
        "negative_prime_sum": neg_sum,
    }
    return count, report


def rough_squarefree_density(x: int, prime_predicate: Callable[[int], bool]) -> tuple[float, dict]:
    """(1/x) sum_{n<=x, p|n => p in P} |mu(n)|, with the sieve-product shape.

    The right-hand shape is prod_{p <= x, p not in P} (1 - 1/p); the ratio is
    reported, never asserted.
    """
    if x < 10:
        raise DomainError("x must be >= 10")
    count = 0
    for fac in arith.factor_window(0, x):
        if any(e > 1 for _, e in fac):
            continue
        if all(prime_predicate(p) for p, _ in fac):
            count += 1
    lhs = count / x
    rhs = 1.0
    for p in arith.primes_upto(x):
        if not prime_predicate(int(p)):
            rhs *= 1.0 - 1.0 / int(p)
    return lhs, {"lhs_density": lhs, "rhs_product": rhs,
                 "ratio": lhs / rhs if rhs > 0 else float("inf")}


# ---------------------------------------------------------------------------
# L(1, chi) and L(q)

def dirichlet_L1(chi) -> float:
    """L(1, chi) for a non-principal real character, exactly resummed.

    Partial summation over residue classes collapses the conditionally
    convergent series to the finite digamma sum -(1/q) sum_a chi(a) psi(a/q)
    (the a-average of the tail is exact because sum_a chi(a) = 0); evaluated
    at 30 significant digits, far below the 1e-8 relative target.
    """
    if chi.is_principal:
        raise DomainError("L(1, chi_0) diverges; principal character excluded")
    if not chi.is_real:
        raise DomainError("only real characters are supported here")
    q = chi.group.q
    with mpmath.workdps(30):
        total = mpmath.mpf(0)
        for a in range(1, q):
            v = chi(a).real
            if v:
                total += mpmath.mpf(int(round(v))) * mpmath.digamma(mpmath.mpf(a) / q)
        return float(-total / q)


def L_of_q(q: int, prime_cutoff: int | None = None) -> tuple[float, list[dict]]:
    """max over non-principal real chi mod q of L(1,chi)^-1 prod_{p<=q}(1-chi(p)/p)^-1.

    This equals max over real chi of prod_{p>q} (1 - chi(p)/p).  The principal
    character's product diverges to 0 and contributes nothing to the max; it
    is excluded.  Returns the max and a per-character breakdown; each entry
    carries a truncated-Euler-product cross-check of L(1,chi) up to
    prime_cutoff (default q).
    """
    from . import group as group_mod

    if q < 3:
        raise DomainError("L(q) needs a non-principal real character (q >= 3)")
    if prime_cutoff is None:
        prime_cutoff = q
    if prime_cutoff < q:
        raise DomainError("prime_cutoff must be >= q")
    G = group_mod.build_unit_group(q)
    best = -math.inf
    rows = []
    for chi in group_mod.real_characters(q, G):
        if chi.is_principal:
            continue
        L1 = dirichlet_L1(chi)
        prod = 1.0
        for p in arith.primes_upto(q):
            cp = chi(int(p)).real
            if cp:
                prod *= 1.0 - cp / int(p)
        euler = 1.0
        for p in arith.primes_upto(prime_cutoff):
            cp = chi(int(p)).real
            if cp:
                euler /= 1.0 - cp / int(p)
        val = (1.0 / L1) * (1.0 / prod)
        rows.append({"character": chi.label(), "L1": L1, "value": val,
                     "L1_euler_truncated": euler})
        best = max(best, val)
    return best, rows


# ---------------------------------------------------------------------------
# sums of 1 * psi over rough numbers

def one_star_psi_sum(q: int, psi, y: int, z: float) -> tuple[float, dict]:
    """Exact sum_{n <= y, (n, P(z)) = 1} (1 * psi)(n), psi a real character.

    The reported shape is y L(1,psi) (phi(q)/q) prod_{2<p<=q, psi(p)=1}(1-2/p);
    the constant c_eps in front is surfaced as the measured ratio.
    """
    if not psi.is_real:
        raise DomainError("psi must be real")
    if y < 1:
        raise DomainError("y must be >= 1")
    total = 0.0
    for fac in arith.factor_window(0, y):
        if any(p < z for p, _ in fac):
            continue
        term = 1.0
        for p, e in fac:
            v = psi(p).real
            if v > 0:
                term *= e + 1
            elif v < 0:
                term *= 1.0 if e % 2 == 0 else 0.0
            # v == 0: factor 1
        total += term
    shape = 1.0
    if not psi.is_principal:
        L1 = dirichlet_L1(psi)
        shape = y * L1 * arith.euler_phi(q) / q
        for p in arith.primes_upto(q):
            p = int(p)
            if p > 2 and psi(p).real > 0:
                shape *= 1.0 - 2.0 / p
    report = {"lhs": total, "rhs_shape": shape,
              "ratio": total / shape if shape else float("inf")}
    return total, report
