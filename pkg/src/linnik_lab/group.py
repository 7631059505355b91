"""The unit group Z_q^x with its CRT cyclic decomposition, exact Dirichlet
characters (values are rational rotations), real characters and index-2
subgroups, and Fourier analysis / convolution on the group.

Normalizations, fixed once: the Fourier transform uses the expectation
E_a over units; convolution uses plain counting sums (no 1/phi factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import arith
from .errors import DomainError

_MATERIALIZE_LIMIT = 10**5
_Q_LIMIT = 10**7


@dataclass(frozen=True)
class CyclicComponent:
    modulus: int   # the prime power it lives modulo
    generator: int
    order: int


def _primitive_root_mod_p(p: int) -> int:
    if p == 2:
        return 1
    fac = arith.factorize(p - 1).primes
    g = 2
    while True:
        if all(pow(g, (p - 1) // r, p) != 1 for r in fac):
            return g
        g += 1


def _generator_mod_prime_power(p: int, e: int) -> int:
    g = _primitive_root_mod_p(p)
    if e == 1:
        return g
    # g lifts to p^e unless g^(p-1) = 1 mod p^2, in which case g+p works
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


class UnitGroup:
    """Z_q^x with component-wise discrete logarithm tables.

    For 2^e with e >= 3 the 2-part is split as <-1> x <5>.  Immutable after
    build; all derived tables are cached lazily.
    """

    def __init__(self, q: int):
        if q < 1:
            raise DomainError("q must be >= 1")
        if q > _Q_LIMIT:
            raise DomainError(f"q exceeds the enumeration-scale bound {_Q_LIMIT}")
        self.q = q
        self.phi = arith.euler_phi(q)
        comps: list[CyclicComponent] = []
        for p, e in arith.factorize(q).factors:
            m = p**e
            if p == 2:
                if e == 1:
                    continue
                if e == 2:
                    comps.append(CyclicComponent(4, 3, 2))
                else:
                    comps.append(CyclicComponent(m, m - 1, 2))
                    comps.append(CyclicComponent(m, 5, 2 ** (e - 2)))
            else:
                g = _generator_mod_prime_power(p, e)
                comps.append(CyclicComponent(m, g, arith.euler_phi(m)))
        self.components = tuple(comps)
        order_prod = math.prod(c.order for c in comps) if comps else 1
        if order_prod != self.phi:
            raise AssertionError("component orders do not multiply to phi(q)")
        self._dlog_tables = self._build_dlog_tables()
        self._units: np.ndarray | None = None
        self._unit_pos: np.ndarray | None = None
        self._chars: tuple[DirichletCharacter, ...] | None = None
        self._char_matrix: np.ndarray | None = None
        self._mult_pos: np.ndarray | None = None
        if q <= _MATERIALIZE_LIMIT:
            self._materialize()

    # -- construction ------------------------------------------------------

    def _build_dlog_tables(self) -> list[np.ndarray]:
        tables = []
        two_part: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for comp in self.components:
            m = comp.modulus
            if m % 2 == 0 and m % 8 == 0:
                # joint fill for the <-1> x <5> pair, once per modulus
                if m not in two_part:
                    tA = np.full(m, -1, dtype=np.int64)
                    tB = np.full(m, -1, dtype=np.int64)
                    half = m // 4  # order of 5 mod 2^e
                    x = 1
                    for t in range(half):
                        tA[x] = 0
                        tB[x] = t
                        tA[m - x] = 1
                        tB[m - x] = t
                        x = x * 5 % m
                    two_part[m] = (tA, tB)
                tA, tB = two_part[m]
                tables.append(tA if comp.generator == m - 1 else tB)
            else:
                t = np.full(m, -1, dtype=np.int64)
                x = 1
                for k in range(comp.order):
                    t[x] = k
                    x = x * comp.generator % m
                tables.append(t)
        return tables

    def _materialize(self):
        q = self.q
        if q == 1:
            self._units = np.array([0], dtype=np.int64)
            self._unit_pos = np.array([0], dtype=np.int64)
            return
        n = np.arange(q, dtype=np.int64)
        mask = np.gcd(n, q) == 1
        self._units = n[mask]
        pos = np.full(q, -1, dtype=np.int64)
        pos[self._units] = np.arange(len(self._units))
        self._unit_pos = pos

    # -- basic queries -----------------------------------------------------

    @property
    def units(self) -> np.ndarray:
        if self._units is None:
            raise DomainError(f"element list not materialized for q={self.q} > {_MATERIALIZE_LIMIT}")
        return self._units

    @property
    def unit_pos(self) -> np.ndarray:
        if self._unit_pos is None:
            raise DomainError("element list not materialized")
        return self._unit_pos

    def is_unit(self, n: int) -> bool:
        return math.gcd(n % self.q if self.q > 1 else 0, self.q) == 1

    def canon(self, n: int) -> int:
        """Canonical residue of a unit n, raising off the units."""
        a = n % self.q
        if not self.is_unit(a):
            raise DomainError(f"{n} is not a unit mod {self.q}")
        return a

    def dlog(self, n: int) -> tuple[int, ...]:
        a = self.canon(n)
        out = []
        for comp, table in zip(self.components, self._dlog_tables):
            v = int(table[a % comp.modulus])
            if v < 0:
                raise AssertionError("dlog table miss")
            out.append(v)
        return tuple(out)

    def from_dlog(self, vec) -> int:
        """Reconstruct the unit with the given exponent vector."""
        a = 1 % self.q
        # generators of distinct components are CRT-compatible units mod q
        for comp, x in zip(self.components, vec):
            g = comp.generator
            lifted = self._lift_component_generator(comp)
            a = a * pow(lifted, int(x) % comp.order, self.q) % self.q
        return a if self.q > 1 else 0

    @lru_cache(maxsize=None)
    def _lift_component_generator(self, comp: CyclicComponent) -> int:
        # CRT-lift: generator at its own prime power, 1 at the other factors
        if self.q == comp.modulus:
            return comp.generator % self.q
        rest = self.q // comp.modulus
        t = (comp.generator - 1) * pow(rest, -1, comp.modulus) % comp.modulus
        return (1 + rest * t) % self.q

    # -- characters ---------------------------------------------------------

    def characters(self) -> tuple["DirichletCharacter", ...]:
        if self._chars is None:
            vecs = [()]
            for comp in self.components:
                vecs = [v + (t,) for v in vecs for t in range(comp.order)]
            self._chars = tuple(DirichletCharacter(self, tuple(v)) for v in vecs)
        return self._chars

    def character_matrix(self) -> np.ndarray:
        """Complex matrix V[i, j] = chi_i(units[j])."""
        if self._char_matrix is None:
            units = self.units
            chars = self.characters()
            X = np.array([self.dlog(int(a)) for a in units], dtype=np.float64)
            if X.size == 0:
                X = X.reshape(len(units), 0)
            T = np.array([c.vector for c in chars], dtype=np.float64)
            if T.size == 0:
                T = T.reshape(len(chars), 0)
            orders = np.array([c.order for c in self.components], dtype=np.float64)
            ang = (T / orders) @ X.T if len(self.components) else np.zeros((len(chars), len(units)))
            self._char_matrix = np.exp(2j * np.pi * ang)
        return self._char_matrix

    def mult_pos(self) -> np.ndarray:
        """Index table: mult_pos[i, j] = position of units[i]*units[j]."""
        if self._mult_pos is None:
            u = self.units
            prod = (u[:, None] * u[None, :]) % self.q if self.q > 1 else np.zeros((1, 1), dtype=np.int64)
            self._mult_pos = self.unit_pos[prod]
        return self._mult_pos

    def inverse_pos(self) -> np.ndarray:
        u = self.units
        if self.q == 1:
            return np.zeros(1, dtype=np.int64)
        inv = np.array([pow(int(a), -1, self.q) for a in u], dtype=np.int64)
        return self.unit_pos[inv]


class DirichletCharacter:
    """A character mod q, represented by its dual exponent vector.

    chi(a) = prod_i zeta_{d_i}^{t_i x_i} where x = dlog(a); values are exact
    rational rotations, rendered to complex on demand.  chi(n) = 0 whenever
    gcd(n, q) > 1.
    """

    __slots__ = ("group", "vector", "_order", "_sign_table")

    def __init__(self, group: UnitGroup, vector: tuple[int, ...]):
        if len(vector) != len(group.components):
            raise DomainError("dual vector length mismatch")
        self.group = group
        self.vector = tuple(int(t) % c.order for t, c in zip(vector, group.components))
        o = 1
        for t, c in zip(self.vector, group.components):
            if t:
                o = math.lcm(o, c.order // math.gcd(c.order, t))
        self._order = o
        self._sign_table = None

    def __eq__(self, other):
        return (isinstance(other, DirichletCharacter)
                and self.group.q == other.group.q and self.vector == other.vector)

    def __hash__(self):
        return hash((self.group.q, self.vector))

    def __repr__(self):
        return f"DirichletCharacter(q={self.group.q}, vector={self.vector})"

    def label(self) -> str:
        return f"chi[q={self.group.q};{','.join(map(str, self.vector))}]"

    @property
    def order(self) -> int:
        return self._order

    @property
    def is_principal(self) -> bool:
        return self._order == 1

    @property
    def is_real(self) -> bool:
        return self._order <= 2

    def rotation(self, n: int) -> Fraction | None:
        """Exact angle chi(n) = e^(2 pi i rotation); None off the units."""
        a = n % self.group.q
        if not self.group.is_unit(a):
            return None
        x = self.group.dlog(a)
        ang = Fraction(0)
        for t, xi, c in zip(self.vector, x, self.group.components):
            ang += Fraction(t * xi, c.order)
        return ang % 1

    def __call__(self, n: int) -> complex:
        rot = self.rotation(n)
        if rot is None:
            return 0j
        if rot == 0:
            return 1 + 0j
        if 2 * rot == 1:
            return -1 + 0j
        return complex(math.cos(2 * math.pi * rot), math.sin(2 * math.pi * rot))

    def values_on_units(self) -> np.ndarray:
        G = self.group
        return G.character_matrix()[G.characters().index(self)]

    def real_sign_table(self) -> np.ndarray:
        """For real chi: int8 table over residues 0..q-1 with values in {0,+-1}."""
        if not self.is_real:
            raise DomainError("sign table only defined for real characters")
        if self._sign_table is None:
            q = self.group.q
            t = np.zeros(max(q, 1), dtype=np.int8)
            if q == 1:
                t[0] = 1
            else:
                for a in range(q):
                    if self.group.is_unit(a):
                        rot = self.rotation(a)
                        t[a] = 1 if rot == 0 else -1
            self._sign_table = t
        return self._sign_table

    def kernel(self) -> frozenset[int]:
        return frozenset(int(a) for a in self.group.units if self.rotation(int(a)) == 0)


# ---------------------------------------------------------------------------
# module-level helpers (spec surface)

_group_cache: dict[int, UnitGroup] = {}


def build_unit_group(q: int, cache=None) -> UnitGroup:
    """Build (and memoize) Z_q^x.  `cache` may be a JsonCache for tables."""
    if q == 0:
        raise DomainError("q must be >= 1")
    G = _group_cache.get(q)
    if G is None:
        loaded = None
        if cache is not None:
            loaded = _from_cache(q, cache)
        G = loaded if loaded is not None else UnitGroup(q)
        if cache is not None and loaded is None:
            cache.put(_cache_key(q), group_table_json(G))
        _group_cache[q] = G
    return G


def characters(q: int, G: UnitGroup | None = None) -> tuple[DirichletCharacter, ...]:
    return (G or build_unit_group(q)).characters()


def evaluate(chi: DirichletCharacter, n: int) -> complex:
    return chi(n)


def real_characters(q: int, G: UnitGroup | None = None) -> list[DirichletCharacter]:
    return [c for c in characters(q, G) if c.is_real]


@dataclass(frozen=True)
class CosetSpec:
    """A coset b H where H is the kernel of the real character psi.

    Membership: a in bH  iff  psi(a) = psi(b).  Index of H is the order of
    psi's image (1 for principal psi, else 2).
    """

    psi: DirichletCharacter
    b: int = 1

    def __post_init__(self):
        if not self.psi.is_real:
            raise DomainError("coset specs are built from real characters")
        if not self.psi.group.is_unit(self.b):
            raise DomainError("coset representative must be a unit")

    @property
    def group(self) -> UnitGroup:
        return self.psi.group

    @property
    def index(self) -> int:
        return self.psi.order

    def contains(self, n: int) -> bool:
        table = self.psi.real_sign_table()
        q = self.group.q
        return table[n % q] == table[self.b % q] and table[n % q] != 0

    def member_mask(self, n: np.ndarray) -> np.ndarray:
        table = self.psi.real_sign_table()
        q = self.group.q
        target = table[self.b % q]
        return table[n % q] == target

    def members(self) -> frozenset[int]:
        table = self.psi.real_sign_table()
        target = table[self.b % self.group.q]
        return frozenset(int(a) for a in self.group.units if table[a] == target)


def full_group_coset(q: int, G: UnitGroup | None = None) -> CosetSpec:
    G = G or build_unit_group(q)
    return CosetSpec(G.characters()[0], 1 if q > 1 else 0)


def index2_subgroups(q: int, G: UnitGroup | None = None) -> list[frozenset[int]]:
    """Kernels of the non-principal real characters (index-2 subgroups)."""
    return [chi.kernel() for chi in real_characters(q, G) if not chi.is_principal]


# ---------------------------------------------------------------------------
# Fourier analysis on the group

def _as_unit_vector(G: UnitGroup, f) -> np.ndarray:
    units = G.units
    if isinstance(f, dict):
        vec = np.zeros(len(units), dtype=complex)
        for n, v in f.items():
            a = n % G.q
            if not G.is_unit(a):
                raise DomainError(f"f is defined at non-unit {n} mod {G.q}")
            vec[G.unit_pos[a]] += v
        return vec
    arr = np.asarray(f, dtype=complex)
    if arr.shape != units.shape:
        raise DomainError("array must align with group.units")
    return arr


def fourier_forward(G: UnitGroup, f) -> np.ndarray:
    """F(chi) = E_{a in Z_q^x} f(a) conj(chi(a)), aligned with G.characters()."""
    vec = _as_unit_vector(G, f)
    V = G.character_matrix()
    return (V.conj() @ vec) / G.phi


def fourier_inverse(G: UnitGroup, coeffs) -> np.ndarray:
    """f(a) = sum_chi F(chi) chi(a); inverse of fourier_forward."""
    c = np.asarray(coeffs, dtype=complex)
    V = G.character_matrix()
    return c @ V


def parseval_gap(G: UnitGroup, f) -> float:
    """| E|f|^2 - sum_chi |F(chi)|^2 |, zero in exact arithmetic."""
    vec = _as_unit_vector(G, f)
    coeffs = fourier_forward(G, vec)
    return abs(float(np.mean(np.abs(vec) ** 2)) - float(np.sum(np.abs(coeffs) ** 2)))


def convolve_group(G: UnitGroup, f, g) -> np.ndarray:
    """Counting convolution (f*g)(a) = sum_{xy=a} f(x) g(y) over Z_q^x.

    Computed by the exact index-table route (no transforms), so integer
    inputs stay exact.
    """
    fv = _as_unit_vector(G, f)
    gv = _as_unit_vector(G, g)
    if np.all(fv.imag == 0) and np.all(gv.imag == 0):
        fv = fv.real
        gv = gv.real
    pos = G.mult_pos()
    out = np.zeros(len(G.units), dtype=fv.dtype)
    for i in range(len(G.units)):
        if fv[i] != 0:
            np.add.at(out, pos[i], fv[i] * gv)
    return out


def convolve_group_transform(G: UnitGroup, f, g) -> np.ndarray:
    """Same convolution through pointwise products of raw transforms."""
    fv = _as_unit_vector(G, f)
    gv = _as_unit_vector(G, g)
    V = G.character_matrix()
    Rf = V.conj() @ fv
    Rg = V.conj() @ gv
    out = (Rf * Rg) @ V / G.phi
    return out


def orthogonality_exact(G: UnitGroup) -> bool:
    """Exact pairwise orthogonality via integer angle arithmetic.

    For every non-principal chi the value multiset is checked to cover each
    m-th root of unity equally often (m = order of chi), which forces
    sum_a chi(a) = 0 exactly; together with sum_a |chi(a)|^2 = phi(q) this
    is pairwise orthogonality of the full dual (differences of characters
    are characters).
    """
    L = math.lcm(*(c.order for c in G.components)) if G.components else 1
    mults = [L // c.order for c in G.components]
    X = [G.dlog(int(a)) for a in G.units]
    for chi in G.characters():
        if chi.is_principal:
            continue
        ks = [sum(t * x * m for t, x, m in zip(chi.vector, xs, mults)) % L for xs in X]
        m = chi.order
        step = L // m
        counts: dict[int, int] = {}
        for k in ks:
            if k % step:
                return False
            counts[k] = counts.get(k, 0) + 1
        if len(counts) != m or len(set(counts.values())) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON character tables (external interface)

def _cache_key(q: int) -> str:
    return f"chartable-q{q}"


def group_table_json(G: UnitGroup) -> dict:
    return {
        "modulus": G.q,
        "phi": G.phi,
        "components": [[c.modulus, c.generator, c.order] for c in G.components],
        "dual_vectors": [list(c.vector) for c in G.characters()],
    }


def _from_cache(q: int, cache) -> UnitGroup | None:
    data = cache.get(_cache_key(q))
    if not isinstance(data, dict):
        return None
    try:
        if data["modulus"] != q or data["phi"] != arith.euler_phi(q):
            raise ValueError("inconsistent cached table")
        G = UnitGroup(q)
        cached = [tuple(c) for c in data["components"]]
        built = [(c.modulus, c.generator, c.order) for c in G.components]
        if cached != built:
            raise ValueError("cached components disagree with rebuild")
        return G
    except Exception:
        cache.mark_corrupt(_cache_key(q))
        return None
