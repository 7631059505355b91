import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from linnik_lab import arith, group, multfunc as mf
from linnik_lab.errors import DomainError


def test_sgn():
    assert mf.sgn(3.5) == 1
    assert mf.sgn(-2) == -1
    assert mf.sgn(-1) * mf.sgn(-1) == 1
    with pytest.raises(DomainError):
        mf.sgn(0)


@given(st.integers(min_value=1, max_value=10**6), st.integers(min_value=1, max_value=10**6))
@settings(max_examples=300, deadline=None)
def test_builtins_multiplicative(m, n):
    if math.gcd(m, n) != 1:
        return
    for h in (mf.liouville_fn(), mf.mobius_fn(), mf.one_fn()):
        assert h.value(m * n) == h.value(m) * h.value(n)


def test_multiplicative_on_random_coprime_pairs():
    rng = random.Random(11)
    hs = [mf.liouville_fn(), mf.mobius_fn(), mf.one_fn(),
          mf.character_fn(group.real_characters(5)[1])]
    pairs = 0
    while pairs < 10**4:
        m = rng.randint(1, 10**6)
        n = rng.randint(1, 10**6)
        if math.gcd(m, n) != 1:
            continue
        pairs += 1
        for h in hs:
            assert h.value(m * n) == pytest.approx(h.value(m) * h.value(n))


def test_sign_windows_match_values():
    for h in (mf.liouville_fn(), mf.mobius_fn(), mf.one_fn()):
        win = h.sign_window(0, 300)
        for i, n in enumerate(range(1, 301)):
            v = h.value(n)
            assert win[i] == (0 if v == 0 else (1 if v > 0 else -1))
    quad = [c for c in group.real_characters(5) if not c.is_principal][0]
    h = mf.character_fn(quad)
    win = h.sign_window(0, 50)
    for i, n in enumerate(range(1, 51)):
        assert win[i] == (0 if n % 5 == 0 else (1 if quad(n).real > 0 else -1))


def test_pretentious_distance():
    lam, one = mf.liouville_fn(), mf.one_fn()
    assert mf.pretentious_distance(lam, lam, 100) == 0.0
    expected = math.sqrt(2 * (1 / 2 + 1 / 3 + 1 / 5 + 1 / 7))
    assert mf.pretentious_distance(lam, one, 10) == pytest.approx(expected, abs=1e-12)
    assert mf.pretentious_distance(lam, one, 10, r=2) == pytest.approx(
        math.sqrt(2 * (1 / 3 + 1 / 5 + 1 / 7)), abs=1e-12)
    # symmetry
    assert mf.pretentious_distance(lam, one, 50) == mf.pretentious_distance(one, lam, 50)


def test_pretend_sum():
    lam = mf.liouville_fn()
    chi0_4 = group.real_characters(4)[0]
    assert chi0_4.is_principal
    s = mf.pretend_sum(lam, chi0_4, 10)
    assert s == pytest.approx(1 / 3 + 1 / 5 + 1 / 7, abs=1e-12)
    assert mf.pretend_sum(lam, chi0_4, 1.5) == 0.0
    # h agreeing with chi never contributes
    quad = [c for c in group.real_characters(5) if not c.is_principal][0]
    h = mf.character_fn(quad)
    assert mf.pretend_sum(h, quad, 10**4) == 0.0
    nonreal = [c for c in group.characters(5) if not c.is_real][0]
    with pytest.raises(DomainError):
        mf.pretend_sum(lam, nonreal, 10)


def test_pretend_sum_monotone_in_cutoff():
    lam = mf.liouville_fn()
    chi0 = group.real_characters(7)[0]
    vals = [mf.pretend_sum(lam, chi0, c) for c in (2, 5, 10, 50, 200, 1000)]
    assert vals == sorted(vals)


def test_sign_density_counts():
    lam, one = mf.liouville_fn(), mf.one_fn()
    c, _ = mf.sign_density_counts(one, 1, 10, -1)
    assert c == 0
    c, _ = mf.sign_density_counts(lam, 1, 10, 1)
    assert c == 3  # {1, 6, 10}
    c, _ = mf.sign_density_counts(lam, 1, 10, -1)
    assert c == 4  # {2, 3, 5, 7}


def test_sign_density_partition_property():
    lam = mf.liouville_fn()
    for q, y in ((1, 500), (6, 800), (35, 1000)):
        plus, _ = mf.sign_density_counts(lam, q, y, 1)
        minus, _ = mf.sign_density_counts(lam, q, y, -1)
        total = sum(1 for n in range(1, y + 1)
                    if arith.is_squarefree(n) and math.gcd(n, q) == 1)
        assert plus + minus == total


def test_rough_squarefree_density():
    d, rep = mf.rough_squarefree_density(10, lambda p: True)
    assert d == pytest.approx(0.7)
    d, _ = mf.rough_squarefree_density(10, lambda p: False)
    assert d == pytest.approx(0.1)
    d, _ = mf.rough_squarefree_density(100, lambda p: p % 4 == 1)
    brute = sum(1 for n in range(1, 101) if arith.is_squarefree(n)
                and all(p % 4 == 1 for p in arith.factorize(n).primes))
    assert d == pytest.approx(brute / 100)


def test_L1_closed_forms():
    chi3 = [c for c in group.real_characters(3) if not c.is_principal][0]
    assert mf.dirichlet_L1(chi3) == pytest.approx(math.pi / math.sqrt(27), rel=1e-10)
    chi4 = [c for c in group.real_characters(4) if not c.is_principal][0]
    assert mf.dirichlet_L1(chi4) == pytest.approx(math.pi / 4, rel=1e-10)


def test_L_of_q():
    val, rows = mf.L_of_q(3)
    assert val == pytest.approx((math.pi / math.sqrt(27)) ** -1 * (2 / 3), rel=1e-8)
    val, rows = mf.L_of_q(4)
    assert val == pytest.approx(3 / math.pi, rel=1e-8)
    with pytest.raises(DomainError):
        mf.L_of_q(2)
    # the Euler-product cross-check stays within a few percent at this scale
    _, rows = mf.L_of_q(5, prime_cutoff=100000)
    assert rows[0]["L1_euler_truncated"] == pytest.approx(rows[0]["L1"], rel=0.05)


def test_one_star_psi_sum():
    q = 3
    psi = [c for c in group.real_characters(q) if not c.is_principal][0]
    total, rep = mf.one_star_psi_sum(q, psi, 10, 0)
    brute = 0
    for n in range(1, 11):
        brute += sum(psi(d).real for d in arith.divisors(n))
    assert total == pytest.approx(brute, abs=1e-9)
    # (1 * psi)(1) = 1 alone when the rough cutoff removes everything else
    total, _ = mf.one_star_psi_sum(q, psi, 2, 2.5)
    assert total == pytest.approx(1.0)
    # (1 * psi)(p) = 1 + psi(p)
    total, _ = mf.one_star_psi_sum(q, psi, 2, 0)
    assert total == pytest.approx(1.0 + 1.0 + psi(2).real)
