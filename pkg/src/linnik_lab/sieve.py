"""Fundamental-lemma sieve weights lambda_d^+-, their sandwich and accuracy
properties, rough-number counts in index-2 cosets, and the majorant nu.

Construction: a truncated Buchstab recursion over chains of strictly
decreasing primes p_1 > p_2 > ... below z.  A branch may be cut only at odd
depth for the upper sieve and only at even depth for the lower sieve (that
parity is what makes the sandwich one-sided), and it is cut exactly when the
level budget D cannot absorb further expansion: a chain kept at a checked
depth m must satisfy c_m * p^ <= D, where c_m is the chain product and p^ is
the largest prime below p_m (just c_m <= D when p_m = 2).  This is the least
truncation compatible with support {d <= D, d | P(z)}, so whenever the full
Moebius expansion fits under D the weights are exactly mu(d).  The truncation
parameter beta = 9 kappa + 1 governs the accuracy threshold s >= 9 kappa + 1
of the explicit (1 +- e^(9 kappa - s) K^10) factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import arith
from .errors import DomainError, PreconditionError, ResourceError

_SUPPORT_BUDGET = 10**7


@dataclass(frozen=True)
class SieveWeights:
    """Coefficients lambda_d for one side of the sieve.

    weights maps squarefree d | P(z), d <= D to mu(d) (never more than 1 in
    absolute value); lambda_1 = 1.
    """

    z: float
    D: float
    kappa: float
    sign: int  # +1 upper, -1 lower
    weights: dict[int, int]

    @property
    def s(self) -> float:
        return math.log(self.D) / math.log(self.z) if self.z > 1 else math.inf

    def support(self) -> list[int]:
        return sorted(self.weights)

    def weighted_divisor_sum(self, n: int) -> int:
        """sum_{d | n} lambda_d."""
        total = 0
        for d, w in self.weights.items():
            if n % d == 0:
                total += w
        return total

    def sum_over_array(self, limit: int) -> np.ndarray:
        """Array S[n] = sum_{d|n} lambda_d for 0 <= n <= limit (S[0] unused)."""
        out = np.zeros(limit + 1, dtype=np.int64)
        for d, w in self.weights.items():
            if d <= limit:
                out[d::d] += w
        return out


def build_beta_sieve(z: float, D: float, kappa: float = 1.0) -> tuple[SieveWeights, SieveWeights]:
    """Construct the (upper, lower) weight pair for sifting limit z, level D."""
    if z < 2 or D < 2:
        raise DomainError("need z >= 2 and D >= 2")
    ps = [int(p) for p in arith.primes_upto(int(math.ceil(z)) - 1 if z == int(z) else int(z))
          if p < z]
    if ps and ps[-1] > D:
        raise PreconditionError(
            f"no valid lower sieve: prime {ps[-1]} < z exceeds the level D={D}")
    prev_prime = {p: (ps[i - 1] if i else None) for i, p in enumerate(ps)}
    plus: dict[int, int] = {1: 1}
    minus: dict[int, int] = {1: 1}

    def budget_ok(c: int, p: int) -> bool:
        hat = prev_prime[p]
        return c <= D if hat is None else c * hat <= D

    count = 0

    def dfs(start_idx: int, c: int, depth: int, mu: int, ok_plus: bool, ok_minus: bool):
        nonlocal count
        for i in range(start_idx, -1, -1):
            p = ps[i]
            c2 = c * p
            if c2 > D:
                continue
            d2 = depth + 1
            mu2 = -mu
            checked_plus = d2 % 2 == 1
            op = ok_plus and (budget_ok(c2, p) if checked_plus else True)
            om = ok_minus and (budget_ok(c2, p) if not checked_plus else True)
            if not op and not om:
                continue
            count += 1
            if count > _SUPPORT_BUDGET:
                raise ResourceError("sieve support enumeration exceeded 1e7 divisors")
            if op:
                plus[c2] = mu2
            if om:
                minus[c2] = mu2
            dfs(i - 1, c2, d2, mu2, op, om)

    dfs(len(ps) - 1, 1, 0, 1, True, True)
    return (SieveWeights(z, float(D), kappa, +1, plus),
            SieveWeights(z, float(D), kappa, -1, minus))


def _check_kbound(g: Callable[[int], float], z: float, K: float, kappa: float):
    """Verify prod_{w<=p<z1}(1-g(p))^-1 <= K (log z1 / log w)^kappa on prime pairs."""
    ps = [int(p) for p in arith.primes_upto(int(z)) if p < z]
    # the sup over real (w, z1) is attained with w at a prime and z1 just
    # above one, so prime pairs suffice
    for i, w in enumerate(ps):
        prod = 1.0
        for j in range(i, len(ps)):
            pj = ps[j]
            gp = g(pj)
            if not 0.0 <= gp < 1.0:
                raise PreconditionError(f"g({pj}) = {gp} outside [0, 1)")
            prod /= 1.0 - gp
            if prod > K * (math.log(pj) / math.log(w)) ** kappa + 1e-12:
                raise PreconditionError(
                    f"declared K={K} violates the dimension bound at w={w}, z1={pj}")


def sieve_accuracy(pair: tuple[SieveWeights, SieveWeights], g: Callable[[int], float],
                   z: float, K: float, kappa: float = 1.0) -> dict:
    """Assert the explicit accuracy sandwich of the weight pair against g.

    Returns both weighted sums and the reference product prod_{p<z}(1-g(p)),
    asserting sum lambda^+ g <= (1+err) ref and sum lambda^- g >= (1-err) ref
    with err = e^(9 kappa - s) K^10.  Requires s = log D/log z >= 9 kappa + 1.
    """
    plus, minus = pair
    s = plus.s
    if s < 9 * kappa + 1:
        raise PreconditionError(f"s = log D/log z = {s:.3f} < 9 kappa + 1 = {9 * kappa + 1}")
    _check_kbound(g, z, K, kappa)

    def weighted(weights: dict[int, int]) -> float:
        total = 0.0
        for d, w in weights.items():
            gd = 1.0
            for p in arith.factorize(d).primes:
                gd *= g(p)
            total += w * gd
        return total

    val_plus = weighted(plus.weights)
    val_minus = weighted(minus.weights)
    ref = 1.0
    for p in arith.primes_upto(int(z)):
        p = int(p)
        if p < z:
            ref *= 1.0 - g(p)
    err = math.exp(9 * kappa - s) * K**10
    ok_plus = val_plus <= (1.0 + err) * ref + 1e-12
    ok_minus = val_minus >= (1.0 - err) * ref - 1e-12
    if not (ok_plus and ok_minus):
        raise AssertionError(
            f"accuracy sandwich failed: {val_minus} .. {val_plus} vs ref {ref}, err {err}")
    return {"upper": val_plus, "lower": val_minus, "reference": ref,
            "error_factor": err, "s": s}


def rough_count_in_coset(Rcap: float, q: int, coset, z: float,
                         eps: float = 0.1) -> tuple[int, dict]:
    """Exact |{n <= Rcap : n in bH, (n, P(z)) = 1}| with the half-share ratio.

    `coset` is a CosetSpec (or None for no congruence restriction beyond
    nothing).  The report compares against (1/2 - eps) times the total rough
    count below Rcap; at desk scale the ratio may dip below the shape and is
    logged, never asserted.
    """
    cap = int(math.floor(Rcap + 1e-9 * max(1.0, Rcap)))
    if cap < 1:
        return 0, {"count": 0, "total_rough": 0, "share_shape": 0.0, "ratio": float("nan")}
    if coset is not None and not coset.group.is_unit(coset.b):
        raise DomainError("coset representative must be a unit")
    n = np.arange(1, cap + 1, dtype=np.int64)
    rough = np.ones(cap, dtype=bool)
    for p in arith.primes_upto(int(z)):
        p = int(p)
        if p >= z:
            break
        rough[p - 1 :: p] = False
    total = int(np.sum(rough))
    if coset is None:
        count = total
    else:
        count = int(np.sum(rough & coset.member_mask(n)))
    shape = (0.5 - eps) * total
    report = {"count": count, "total_rough": total, "share_shape": shape,
              "ratio": count / shape if shape > 0 else float("nan")}
    return count, report


def majorant_nu(z: float, D: float, q: int, interval: arith.IntegerInterval,
                weights_plus: SieveWeights | None = None) -> Callable[[int], float]:
    """The pointwise majorant nu(n) of the sign-restricted rough indicators.

    nu(n) = prod_{p<z, p not|q}(1-1/p)^-1 * sum_{d|n, d<=D} lambda_d^+ on
    [I]_q, and 0 elsewhere; nu >= f^Delta pointwise for both signs by the
    sandwich property.
    """
    if weights_plus is None:
        weights_plus, _ = build_beta_sieve(z, D)
    norm = arith.mertens_product(z, q, inverse=True)

    def nu(n: int) -> float:
        if n not in interval or math.gcd(n, q) != 1:
            return 0.0
        return norm * weights_plus.weighted_divisor_sum(n)

    return nu
