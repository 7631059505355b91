"""Character-sum functionals: the sign-restricted interval transforms, prime
and squarefree-unit sums, the prime-factor ladder and its membership set, the
Ramare-type decomposition, the character partition, and the mean-value /
large-value / amplification checks.

Only the mean value theorem, the Polya-Vinogradov bound and the Ramare
identity are asserted (their constants are explicit); every other bound
shape is reported as a measured ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith
from . import group as group_mod
from .errors import DomainError, PreconditionError

# ---------------------------------------------------------------------------
# reports

@dataclass
class SumReport:
    lhs: float
    rhs_shape: float
    ratio: float
    asserted: bool
    ok: bool | None = None
    tag: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def make(cls, lhs, rhs, asserted=False, ok=None, tag="", **extra):
        lhs = float(lhs)
        rhs = float(rhs)
        ratio = lhs / rhs if rhs not in (0.0, -0.0) else math.inf * (1 if lhs else 0)
        return cls(lhs, rhs, ratio, asserted, ok, tag, dict(extra))


# ---------------------------------------------------------------------------
# batched character sums via class collapse

def class_weights(G: group_mod.UnitGroup, ns, weights=None) -> np.ndarray:
    """Collapse weighted integers onto unit classes (non-units dropped)."""
    w = np.zeros(len(G.units), dtype=complex)
    if weights is None:
        weights = np.ones(len(ns))
    q = G.q
    for n, c in zip(ns, weights):
        a = int(n) % q
        if G.is_unit(a):
            w[G.unit_pos[a]] += c
    return w


def all_char_sums(G: group_mod.UnitGroup, ns, weights=None, conj: bool = True) -> np.ndarray:
    """sum_i w_i chi~(n_i) for every character chi (chi~ = conj by default)."""
    w = class_weights(G, ns, weights)
    V = G.character_matrix()
    return (V.conj() if conj else V) @ w


# ---------------------------------------------------------------------------
# coset membership

def _coset_mask(B, G: group_mod.UnitGroup, ns: np.ndarray) -> np.ndarray:
    """Membership of integers in B (CosetSpec, frozenset of units, or None=G)."""
    q = G.q
    res = ns % q if q > 1 else np.zeros(len(ns), dtype=np.int64)
    if q > 1:
        unit = np.gcd(res, q) == 1
    else:
        unit = np.ones(len(ns), dtype=bool)
    if B is None:
        return unit
    if isinstance(B, group_mod.CosetSpec):
        return unit & B.member_mask(ns)
    members = np.zeros(q if q > 1 else 1, dtype=bool)
    for b in B:
        members[b % q] = True
    return unit & members[res]


# ---------------------------------------------------------------------------
# sign-restricted interval transforms f^Delta

def f_delta_value(n: int, delta: int, h, q: int, z: float,
                  interval: arith.IntegerInterval) -> float:
    """f^Delta(n): Mertens-normalized indicator of sign-delta rough [I]_q points."""
    if n not in interval or math.gcd(n, q) != 1:
        return 0.0
    if not arith.is_rough(n, z):
        return 0.0
    if h.sign(n) != delta:
        return 0.0
    return arith.mertens_product(z, q, inverse=True)


def f_support(G: group_mod.UnitGroup, h, z: float,
              interval: arith.IntegerInterval) -> tuple[list[int], list[int]]:
    """Integers of [I]_q that are z-rough, split by sign of h."""
    lo, hi = interval.ilo, interval.ihi
    if hi <= lo:
        raise DomainError("empty interval")
    ns = np.arange(lo + 1, hi + 1, dtype=np.int64)
    unit = _coset_mask(None, G, ns)
    rough = np.ones(len(ns), dtype=bool)
    for p in arith.primes_upto(int(z)):
        p = int(p)
        if p >= z:
            break
        rough[(-(lo + 1)) % p :: p] = False
    signs = h.sign_window(lo, hi)
    keep = unit & rough
    plus = ns[keep & (signs == 1)].tolist()
    minus = ns[keep & (signs == -1)].tolist()
    if np.any(keep & (signs == 0)):
        raise DomainError("h vanishes on a unit of the interval")
    return plus, minus


def f_hat_table(G: group_mod.UnitGroup, delta: int, h, z: float,
                interval: arith.IntegerInterval) -> np.ndarray:
    """F^Delta(chi) = E_{n in [I]_q} f^Delta(n) conj(chi(n)) for all chi."""
    members = [n for n in interval.members() if math.gcd(n, G.q) == 1]
    if not members:
        raise DomainError("[I]_q is empty")
    plus, minus = f_support(G, h, z, interval)
    supp = plus if delta == 1 else minus
    norm = arith.mertens_product(z, G.q, inverse=True)
    return all_char_sums(G, supp) * (norm / len(members))


# ---------------------------------------------------------------------------
# the sets Q, U, M and their normalized character sums

def q_set(G: group_mod.UnitGroup, h, Q1: float, B=None, delta: int | None = None) -> list[int]:
    """Primes p in (Q1/e, Q1] with p in B and sgn(h(p)) = delta."""
    ps = arith.primes_in(Q1 / math.e, Q1)
    if ps.size == 0:
        return []
    mask = _coset_mask(B, G, ps)
    if delta is not None:
        sig = np.array([1 if h.value(int(p)) > 0 else (-1 if h.value(int(p)) < 0 else 0)
                        for p in ps], dtype=np.int8)
        mask &= sig == delta
    return [int(p) for p in ps[mask]]


def _squarefree_signed(G, h, lo: int, hi: int, B, delta):
    ns = np.arange(lo + 1, hi + 1, dtype=np.int64)
    if ns.size == 0:
        return []
    _, sqf = arith.liouville_squarefree_window(lo, hi)
    signs = h.sign_window(lo, hi)
    mask = sqf & _coset_mask(B, G, ns)
    if delta is not None:
        mask &= signs == delta
    return ns[mask].tolist()


def u_set_easy(G, h, R: float, B=None, delta=None) -> list[int]:
    """Squarefree u <= R with u in B and sign delta."""
    return _squarefree_signed(G, h, 0, int(math.floor(R + 1e-9 * max(1.0, R))), B, delta)


def u_set(G, h, U: float, v: int, B=None, delta=None) -> list[int]:
    """Squarefree u in I_U(v) with u in B and sign delta."""
    iv = arith.IntegerInterval.e_adic(U, v)
    return _squarefree_signed(G, h, iv.ilo, iv.ihi, B, delta)


def m_set(G, h, M: float, v: int, ladder: "LadderSpec", B=None, delta=None) -> list[int]:
    """Squarefree m in I_M(v), m in the ladder set S, (m, P(Q1)) = 1, sign delta."""
    iv = arith.IntegerInterval.e_adic(M, v)
    lo, hi = iv.ilo, iv.ihi
    base = _squarefree_signed(G, h, lo, hi, B, delta)
    out = []
    for m in base:
        fac = arith.factorize(m)
        if fac.primes and fac.primes[0] < ladder.Q1:
            continue
        if in_S(m, ladder, fac):
            out.append(m)
    return out


def prime_sum_Q(chi, qset: list[int], Q1: float) -> complex:
    """Q_B^Delta(chi) = (1/Q1) sum over the prime set of conj(chi(p))."""
    return sum((chi(p).conjugate() for p in qset), 0j) / Q1


def unit_sum_U(chi, uset: list[int], norm: float) -> complex:
    """U-sum normalized by R (easy) or U e^v (general)."""
    return sum((chi(u).conjugate() for u in uset), 0j) / norm


def m_sum(chi, mset: list[int], norm: float) -> complex:
    return sum((chi(m).conjugate() for m in mset), 0j) / norm


# ---------------------------------------------------------------------------
# ladder

@dataclass(frozen=True)
class LadderSpec:
    """Widening prime-factor intervals (P_j, Q_j], j = 2..J (possibly none)."""

    Q1: float
    J: int
    intervals: tuple[tuple[float, float], ...]
    overridden: bool = False

    def interval(self, j: int) -> tuple[float, float]:
        if not 2 <= j <= self.J:
            raise DomainError(f"j must lie in [2, J]={self.J}")
        return self.intervals[j - 2]


def ladder_build(Q1: float, q: int, overrides=None) -> LadderSpec:
    """Ladder intervals; J is maximal with log Q_J <= sqrt(log q).

    P_j = exp(j^(4j) (log Q1)^j) and Q_j = exp(100 j^(4j+2) (log Q1)^j); the
    comparison runs in log space so nothing overflows.  At desk scale the
    formula ladder is empty (J < 2); overrides supply explicit intervals.
    """
    if Q1 < 3:
        raise DomainError("Q1 must be >= 3")
    if overrides is not None:
        ivs = [(float(a), float(b)) for a, b in overrides]
        for (a, b), (c, d) in zip(ivs, ivs[1:]):
            if not (a < b <= c < d):
                raise DomainError("override intervals must be disjoint and increasing")
        return LadderSpec(Q1, 1 + len(ivs), tuple(ivs), overridden=True)
    logQ1 = math.log(Q1)
    cap = math.sqrt(math.log(q)) if q >= 2 else 0.0
    ivs = []
    j = 2
    while True:
        logPj = j ** (4 * j) * logQ1**j
        logQj = 100 * j ** (4 * j + 2) * logQ1**j
        if logQj > cap:
            break
        ivs.append((math.exp(logPj), math.exp(logQj)))
        j += 1
    return LadderSpec(Q1, 1 + len(ivs), tuple(ivs))


def in_S(n: int, ladder: LadderSpec, fac: arith.Factorization | None = None) -> bool:
    """True iff n has at least one prime factor in every ladder interval."""
    if not ladder.intervals:
        return True
    if fac is None:
        fac = arith.factorize(n)
    return all(any(P < p <= Q for p in fac.primes) for P, Q in ladder.intervals)


def _in_S_except(fac: arith.Factorization, ladder: LadderSpec, j: int) -> bool:
    """Membership in S_j: a factor from every interval except the j-th."""
    for jj, (P, Q) in enumerate(ladder.intervals, start=2):
        if jj == j:
            continue
        if not any(P < p <= Q for p in fac.primes):
            return False
    return True


# ---------------------------------------------------------------------------
# mean value theorem (asserted) and Halasz-Montgomery report

def mvt_check(coeffs: dict[int, complex] | np.ndarray, N: int, q: int) -> SumReport:
    """Assert (1/phi) sum_chi |sum a_n chi(n)|^2 <= (1 + N/q) sum_{(n,q)=1} |a_n|^2.

    The left side is evaluated exactly by orthogonality as
    sum over classes c of |sum_{n = c} a_n|^2.
    """
    G = group_mod.build_unit_group(q)
    if isinstance(coeffs, dict):
        items = [(n, c) for n, c in coeffs.items() if 1 <= n <= N]
    else:
        arr = np.asarray(coeffs)
        items = [(n, arr[n - 1]) for n in range(1, min(N, len(arr)) + 1)]
    w = np.zeros(len(G.units), dtype=complex)
    rhs_sum = 0.0
    for n, c in items:
        a = n % q if q > 1 else 0
        if G.is_unit(a):
            w[G.unit_pos[a]] += c
            rhs_sum += abs(c) ** 2
    lhs = float(np.sum(np.abs(w) ** 2))
    rhs = (1.0 + N / q) * rhs_sum
    ok = lhs <= rhs * (1 + 1e-12) + 1e-12
    if not ok:
        raise AssertionError(f"mean value inequality failed: {lhs} > {rhs}")
    return SumReport.make(lhs, rhs, asserted=True, ok=True, tag="mvt-mean-value")


def halasz_montgomery_report(coeffs: dict[int, complex], chars, N: int, q: int,
                             eps: float) -> SumReport:
    """sum_{chi in X} |sum_{n<=N rough} a_n chi(n)|^2 against its bound shape.

    Coefficients must be supported on (n, P(q^eps)) = 1; shape is
    (N/log q + N^(2/3) q^(1/9 + 2 eps) |X|) * sum |a_n|^2 (ratio only).
    """
    G = group_mod.build_unit_group(q)
    z = q**eps
    for n in coeffs:
        if not arith.is_rough(n, z):
            raise PreconditionError(f"coefficient at n={n} is not q^eps-rough")
    w = class_weights(G, list(coeffs), list(coeffs.values()))
    V = G.character_matrix()
    idx = [G.characters().index(c) for c in chars]
    vals = V[idx] @ w
    lhs = float(np.sum(np.abs(vals) ** 2))
    l2 = sum(abs(c) ** 2 for n, c in coeffs.items() if math.gcd(n, q) == 1)
    rhs = (N / math.log(q) + N ** (2 / 3) * q ** (1 / 9 + 2 * eps) * len(idx)) * l2
    return SumReport.make(lhs, rhs, asserted=False, tag="halasz-montgomery-mean",
                          set_size=len(idx))


def large_values_census(a_p, P: float, q: int, alpha: float, C: float = 1.0) -> tuple[int, SumReport]:
    """Exact count of characters with |sum_{P/e<p<=P} a_p chi(p)| >= P^(1-alpha).

    Reported against the shape P^(2 alpha) q^(2 alpha + 1/C); not asserted.
    """
    if not 0 <= alpha <= 0.5:
        raise DomainError("alpha must lie in [0, 1/2]")
    G = group_mod.build_unit_group(q)
    ps = [int(p) for p in arith.primes_in(P / math.e, P)]
    if callable(a_p):
        weights = [a_p(p) for p in ps]
    elif a_p is None:
        weights = [1.0] * len(ps)
    else:
        weights = [a_p.get(p, 0.0) for p in ps]
    if any(abs(c) > 1 + 1e-12 for c in weights):
        raise PreconditionError("coefficients must be 1-bounded")
    vals = all_char_sums(G, ps, weights, conj=False)
    thr = P ** (1 - alpha)
    count = int(np.sum(np.abs(vals) >= thr))
    shape = P ** (2 * alpha) * q ** (2 * alpha + 1 / C)
    return count, SumReport.make(count, shape, asserted=False, tag="prime-sum-large-values",
                                 threshold=thr, n_primes=len(ps))


# ---------------------------------------------------------------------------
# Polya-Vinogradov (asserted) and Burgess shapes (reported)

def pv_max_window(chi) -> tuple[float, dict]:
    """Exact sup over all windows (M, M+N] of |sum chi(n)|.

    For non-principal chi the prefix sums are q-periodic with zero period
    sum, so the sup equals max - min of one period of prefix values.
    """
    if chi.is_principal:
        raise DomainError("principal character excluded")
    q = chi.group.q
    vals = np.array([chi(n) for n in range(1, q + 1)])
    prefix = np.concatenate([[0.0 + 0j], np.cumsum(vals)])
    # complex values: sup |P[b]-P[a]| over a period; brute max over pairs
    if chi.is_real:
        re = prefix.real
        best = float(re.max() - re.min())
    else:
        diffs = prefix[None, :] - prefix[:, None]
        best = float(np.abs(diffs).max())
    return best, {"max_window_sum": best}


def pv_burgess_check(chi, M: int, N: int) -> SumReport:
    """|sum_{M<n<=M+N} chi(n)| with the PV bound asserted, Burgess reported.

    Asserts the classical explicit Polya-Vinogradov constant sqrt(q) log q
    (on the specific window and on the sup over all windows); reports the
    Burgess shapes N^(1-1/r) q^((r+1)/(4 r^2)) for r in {2, 3}.
    """
    if chi.is_principal:
        raise DomainError("principal character excluded")
    q = chi.group.q
    window = sum((chi(n) for n in range(M + 1, M + N + 1)), 0j)
    value = abs(window)
    pv = math.sqrt(q) * math.log(q)
    sup, _ = pv_max_window(chi)
    ok = value <= pv + 1e-9 and sup <= pv + 1e-9
    if not ok:
        raise AssertionError(f"Polya-Vinogradov bound violated: {max(value, sup)} > {pv}")
    burgess = {f"burgess_r{r}": N ** (1 - 1 / r) * q ** ((r + 1) / (4 * r * r))
               for r in (2, 3)}
    return SumReport.make(value, pv, asserted=True, ok=True, tag="polya-vinogradov",
                          sup_over_windows=sup, **burgess)


# ---------------------------------------------------------------------------
# ladder character sums and the partition

def _alpha_j(j: int, eta: float) -> float:
    return 1 / 40 - eta * (1 + 1 / (2 * j))


def _H_j(j: int, Q1: float) -> float:
    return j**4 * Q1 ** (1 / 40)


def _w_of_p(p: int, H: float) -> int:
    return int(math.ceil(H * math.log(p) - 1e-12))


def _w_range(j: int, ladder: LadderSpec) -> range:
    P, Q = ladder.interval(j)
    H = _H_j(j, ladder.Q1)
    return range(int(math.ceil(H * math.log(P) - 1e-12)),
                 int(math.ceil(H * math.log(Q))) + 1)


def ladder_prime_sums(G, h, ladder: LadderSpec, j: int, B, delta: int) -> dict[int, np.ndarray]:
    """Q_{j,B,w}(chi) for all w: e^(-w/H_j) sums of conj(chi(p)) over the
    w-th subwindow of (P_j, Q_j], restricted to B and sign delta."""
    P, Q = ladder.interval(j)
    H = _H_j(j, ladder.Q1)
    ps = [int(p) for p in arith.primes_in(P, Q)]
    buckets: dict[int, list[int]] = {}
    for p in ps:
        if not G.is_unit(p % G.q):
            continue
        if h.sign(p) != delta:
            continue
        if B is not None and not B.contains(p):
            continue
        buckets.setdefault(_w_of_p(p, H), []).append(p)
    out = {}
    for w, plist in buckets.items():
        out[w] = all_char_sums(G, plist) * math.exp(-w / H)
    return out


@dataclass
class CharacterPartition:
    classes: dict[int, list[int]]      # j -> character indices
    residual: list[int]                # the set Y
    H_j: dict[int, float]
    alpha_j: dict[int, float]
    eta: float

    def sizes(self) -> dict:
        d = {f"X{j}": len(v) for j, v in self.classes.items()}
        d["Y"] = len(self.residual)
        return d


def partition_characters(q: int, ladder: LadderSpec, H, h, eta: float) -> CharacterPartition:
    """Deterministic partition of the dual group into X_1..X_J and Y.

    chi lands in X_j for the smallest j whose ladder prime sums are all small
    (threshold e^(-alpha_j w / H_j); for j = 1 the threshold is Q1^(-alpha_1),
    the value the j=1 convention H_1 = 1/log Q1 produces).  H is a real
    character whose kernel defines the cosets (None for the full group).
    """
    if not 0 < eta <= 1 / 80:
        raise DomainError("eta must lie in (0, 1/80]")
    G = group_mod.build_unit_group(q)
    chars = G.characters()
    nchars = len(chars)
    if H is None:
        cosets = [None]
    else:
        psi = H if isinstance(H, group_mod.DirichletCharacter) else H.psi
        reps = [1]
        if psi.order == 2:
            table = psi.real_sign_table()
            reps.append(next(int(a) for a in G.units if table[int(a)] == -1))
        cosets = [group_mod.CosetSpec(psi, b) for b in reps]

    small = np.ones((ladder.J + 1, nchars), dtype=bool)  # small[j][i]
    # j = 1: the (P_1, Q_1] prime sum
    thr1 = ladder.Q1 ** (-_alpha_j(1, eta))
    for B in cosets:
        for delta in (1, -1):
            qs = q_set(G, h, ladder.Q1, B, delta)
            vals = np.abs(all_char_sums(G, qs)) / ladder.Q1
            small[1] &= vals <= thr1
    for j in range(2, ladder.J + 1):
        aj = _alpha_j(j, eta)
        Hj = _H_j(j, ladder.Q1)
        for B in cosets:
            for delta in (1, -1):
                sums = ladder_prime_sums(G, h, ladder, j, B, delta)
                for w, vals in sums.items():
                    small[j] &= np.abs(vals) <= math.exp(-aj * w / Hj)

    classes: dict[int, list[int]] = {j: [] for j in range(1, ladder.J + 1)}
    residual: list[int] = []
    for i in range(nchars):
        for j in range(1, ladder.J + 1):
            if small[j][i]:
                classes[j].append(i)
                break
        else:
            residual.append(i)
    return CharacterPartition(classes, residual,
                              {j: _H_j(j, ladder.Q1) for j in range(2, ladder.J + 1)},
                              {j: _alpha_j(j, eta) for j in range(1, ladder.J + 1)}, eta)


# ---------------------------------------------------------------------------
# Ramare-type decomposition (exact identity)

def _psi_of(B):
    if B is None:
        return None, 1
    return B.psi, B.b


def ramare_decompose(G: group_mod.UnitGroup, h, B, delta: int, v: int, j: int,
                     ladder: LadderSpec, M: float) -> dict:
    """Split M_{B,v}(chi) = Mtilde + E1 + E2 exactly, for every character.

    The marked-prime rewrite distinguishes one prime factor from the j-th
    ladder interval with weight 1/(omega(m; P_j, Q_j) + 1) on the cofactor;
    E1 collects the squarefree-repair terms (products p^2 m), E2 the two
    edge windows created by snapping the cofactor interval.  All five arrays
    are indexed by G.characters(); the defect max_chi |M - Mt - E1 - E2| is
    returned and must vanish to ~1e-12.
    """
    q = G.q
    Q1 = ladder.Q1
    P_j, Q_j = ladder.interval(j)
    H = _H_j(j, Q1)
    iv = arith.IntegerInterval.e_adic(M, v)
    n_lo, n_hi = iv.ilo, iv.ihi
    norm = M * math.exp(v)
    psi, b = _psi_of(B)
    psi_table = psi.real_sign_table() if psi is not None else None
    target = psi_table[b % q] if psi is not None else 1

    def in_B(n: int) -> bool:
        return psi_table is None or psi_table[n % q] == target

    # factorization data for the master window
    facs = arith.factor_window(0, n_hi)

    def fac_of(n: int) -> arith.Factorization:
        return arith.Factorization(n, tuple(facs[n - 1]))

    def m_conditions(m: int) -> bool:
        # shared cofactor conditions: squarefree, rough past Q1, in S_j
        if m < 1 or math.gcd(m, q) != 1:
            return False
        f = fac_of(m)
        if not f.is_squarefree:
            return False
        if f.primes and f.primes[0] < Q1:
            return False
        return _in_S_except(f, ladder, j)

    # --- direct M sum ------------------------------------------------------
    m_members = []
    for n in range(n_lo + 1, n_hi + 1):
        f = fac_of(n)
        if not f.is_squarefree or math.gcd(n, q) != 1:
            continue
        if f.primes and f.primes[0] < Q1:
            continue
        if not in_S(n, ladder, f):
            continue
        if not in_B(n) or h.sign(n) != delta:
            continue
        m_members.append(n)
    M_direct = all_char_sums(G, m_members) / norm

    # --- marked main term Mtilde ------------------------------------------
    primes_j = [int(p) for p in arith.primes_in(P_j, Q_j)]
    Mtilde = np.zeros(len(G.characters()), dtype=complex)
    r_cache: dict[tuple[int, int, int], np.ndarray] = {}

    def r_sum(w: int, delta2: int, coset_sign: int) -> np.ndarray:
        key = (w, delta2, coset_sign)
        if key not in r_cache:
            win = arith.IntegerInterval(norm * math.exp(-w / H - 1), norm * math.exp(-w / H))
            if win.ihi > n_hi:
                raise AssertionError("cofactor window escaped the factor table")
            terms, weights = [], []
            for m in range(max(win.ilo, 0) + 1, win.ihi + 1):
                if not m_conditions(m):
                    continue
                if h.sign(m) != delta2:
                    continue
                if psi_table is not None and psi_table[m % q] != coset_sign:
                    continue
                f = fac_of(m)
                terms.append(m)
                weights.append(1.0 / (f.omega_in_range(P_j, Q_j) + 1))
            r_cache[key] = all_char_sums(G, terms, weights) / (norm * math.exp(-w / H))
        return r_cache[key]

    q_buckets: dict[tuple[int, int, int], list[int]] = {}
    for p in primes_j:
        if math.gcd(p, q) != 1:
            continue
        w = _w_of_p(p, H)
        s1 = h.sign(p)
        c1 = int(psi_table[p % q]) if psi_table is not None else 1
        q_buckets.setdefault((w, s1, c1), []).append(p)
    for (w, s1, c1), plist in q_buckets.items():
        qsum = all_char_sums(G, plist) * math.exp(-w / H)
        delta2 = delta * s1
        coset2 = target * c1  # need c1 * c2 = target
        Mtilde += qsum * r_sum(w, delta2, coset2)

    # --- E1: squarefree repair (n = p^2 m0) --------------------------------
    e1_terms, e1_weights = [], []
    for p in primes_j:
        if math.gcd(p, q) != 1:
            continue
        p2 = p * p
        for m0 in range(n_lo // p2 + 1, n_hi // p2 + 1):
            m = p * m0
            if not m_conditions(m):
                continue
            if h.sign(p) * h.sign(m) != delta:
                continue
            if psi_table is not None and psi_table[p % q] * psi_table[m % q] != target:
                continue
            f = fac_of(m)
            e1_terms.append(p2 * m0)
            e1_weights.append(-1.0 / (f.omega_in_range(P_j, Q_j) + 1))
    E1 = all_char_sums(G, e1_terms, e1_weights) / norm

    # --- E2: interval-snapping edge terms ----------------------------------
    e2_terms, e2_weights = [], []
    for p in primes_j:
        if math.gcd(p, q) != 1:
            continue
        w = _w_of_p(p, H)
        fixed = arith.IntegerInterval(norm * math.exp(-w / H - 1), norm * math.exp(-w / H))
        true_lo, true_hi = n_lo // p, n_hi // p
        lo = min(fixed.ilo, true_lo)
        hi = max(fixed.ihi, true_hi)
        s1 = h.sign(p)
        c1 = int(psi_table[p % q]) if psi_table is not None else 1
        for m in range(lo + 1, hi + 1):
            ind_true = true_lo < m <= true_hi
            ind_fixed = m in fixed
            if ind_true == ind_fixed:
                continue
            if not m_conditions(m):
                continue
            if s1 * h.sign(m) != delta:
                continue
            if psi_table is not None and c1 * psi_table[m % q] != target:
                continue
            f = fac_of(m)
            e2_terms.append(p * m)
            e2_weights.append((1.0 if ind_true else -1.0) / (f.omega_in_range(P_j, Q_j) + 1))
    E2 = all_char_sums(G, e2_terms, e2_weights) / norm

    defect = float(np.abs(M_direct - Mtilde - E1 - E2).max()) if len(M_direct) else 0.0
    max_coeff = max([abs(wgt) for wgt in e1_weights + e2_weights], default=0.0)
    return {"M": M_direct, "Mtilde": Mtilde, "E1": E1, "E2": E2,
            "defect": defect, "members": len(m_members),
            "e1_terms": len(e1_terms), "e2_terms": len(e2_terms),
            "max_coefficient": max_coeff}


# ---------------------------------------------------------------------------
# amplification and moment reports

def amplify_report(q: int, Y1: float, Y2: float, X: float, c_p=None, a_n=None) -> SumReport:
    """(1/phi) sum_chi |Q(chi)|^(2 l) |A(chi)|^2 against the factorial shape.

    Q runs over primes in [Y1, 2Y1], A over integers in [X/Y2, 2X/Y2], and
    l = ceil(log Y2 / log Y1).  Implied constant unspecified: report only.
    """
    G = group_mod.build_unit_group(q)
    ell = math.ceil(math.log(Y2) / math.log(Y1))
    ps = [int(p) for p in arith.primes_upto(int(2 * Y1)) if Y1 <= p <= 2 * Y1]
    ns = list(range(int(math.ceil(X / Y2)), int(math.floor(2 * X / Y2)) + 1))
    cw = [1.0] * len(ps) if c_p is None else [c_p(p) for p in ps]
    aw = [1.0] * len(ns) if a_n is None else [a_n(n) for n in ns]
    if any(abs(x) > 1 + 1e-12 for x in cw + aw):
        raise PreconditionError("coefficients must be 1-bounded")
    Q = all_char_sums(G, ps, cw, conj=False)
    A = all_char_sums(G, ns, aw, conj=False)
    lhs = float(np.mean(np.abs(Q) ** (2 * ell) * np.abs(A) ** 2))
    phi = G.phi
    rhs = (phi / q) * (1 + X * Y1 * 2**ell / q) * X * Y1 * 2**ell * math.factorial(ell + 1) ** 2
    return SumReport.make(lhs, rhs, asserted=False, tag="prime-power-amplification",
                          ell=ell, n_primes=len(ps), n_terms=len(ns))


def square_and_shorts_moments(q: int, N: int, P: float, Q: float, M: float,
                              H: float, Kcap: int, eps: float,
                              seed: int = 0) -> tuple[SumReport, SumReport]:
    """Second moments of the two Ramare error shapes, with their bound shapes.

    Squares: sums over p^2 m <= N with P < p <= Q, shape (phi/q)(N + N^2/q)/P.
    Shorts: sums over l m <= N with m in the union of short windows
    (M e^(k-1/H), M e^k], |k| <= 2K+1, and l rough, shape (phi/q)(N+N^2/q)/H.
    Coefficients are seeded +-1.
    """
    G = group_mod.build_unit_group(q)
    rng = np.random.default_rng(seed)
    phi = G.phi

    terms, weights = [], []
    for p in arith.primes_in(P, Q):
        p = int(p)
        p2 = p * p
        for m in range(1, N // p2 + 1):
            terms.append(p2 * m)
            weights.append(rng.choice((-1.0, 1.0)))
    vals = all_char_sums(G, terms, weights)
    lhs1 = float(np.mean(np.abs(vals) ** 2))
    rhs1 = (phi / q) * (N + N * N / q) / P
    squares = SumReport.make(lhs1, rhs1, asserted=False, tag="square-repair-moment",
                             n_terms=len(terms))

    z = q**eps
    terms2, weights2 = [], []
    for k in range(-(2 * Kcap + 1), 2 * Kcap + 2):
        win = arith.IntegerInterval(M * math.exp(k - 1 / H), M * math.exp(k))
        for m in win.members():
            if m > N:
                break
            for ell in range(1, N // m + 1):
                if arith.is_rough(ell, z):
                    terms2.append(ell * m)
                    weights2.append(rng.choice((-1.0, 1.0)))
    vals2 = all_char_sums(G, terms2, weights2)
    lhs2 = float(np.mean(np.abs(vals2) ** 2))
    rhs2 = (phi / q) * (N + N * N / q) / H
    shorts = SumReport.make(lhs2, rhs2, asserted=False, tag="short-window-moment",
                            n_terms=len(terms2))
    return squares, shorts
