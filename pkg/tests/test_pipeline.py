import math

import numpy as np
import pytest

from linnik_lab import charsums as cs, group as g, multfunc as mf, pipeline as pl
from linnik_lab.errors import DomainError, ResourceError


LAM = mf.liouville_fn()


def test_paramset_defaults_and_relations():
    ps = pl.ParamSet.from_q(101, 0.04, easy_mode=False)
    assert abs(ps.U * ps.R - 101) <= 1e-9 * 101
    assert abs(ps.R**2 * ps.M - 101) <= 1e-9 * 101
    assert ps.K == int(0.04**2 * math.log(101))
    easy = pl.ParamSet.from_q(101, 0.04)
    assert easy.R == pytest.approx(math.sqrt(101))
    d = easy.as_dict()
    assert d["ladder"]["J"] == 1 and d["q"] == 101
    with pytest.raises(DomainError):
        pl.ParamSet.from_q(2, 0.04)


def test_E_sets():
    plus, minus = pl.E_sets(LAM, 3, 1)
    assert plus == {1} and minus == set()
    plus, minus = pl.E_sets(LAM, 3, 14)
    assert plus == {1, 2} and minus == {1, 2}
    # monotone in x
    prev_p, prev_m = set(), set()
    for x in (1, 5, 10, 14, 50):
        p_, m_ = pl.E_sets(LAM, 3, x)
        assert prev_p <= p_ and prev_m <= m_
        prev_p, prev_m = p_, m_
    # character h: the two sets never intersect
    quad = [c for c in g.real_characters(5) if not c.is_principal][0]
    hq = mf.character_fn(quad)
    p_, m_ = pl.E_sets(hq, 5, 10**4)
    assert p_ & m_ == set()


def test_R_of_h_q_examples():
    res = pl.R_of_h_q(LAM, 1, 10)
    assert res.R_value == 2 and res.witnesses[0] == {1: 1, -1: 2}
    res = pl.R_of_h_q(LAM, 3, 100)
    assert res.R_value == 14
    assert res.witnesses[2][1] == 14
    assert pl.verify_witnesses(res, LAM, 3)
    # R is the first x at which both E-sets fill up
    plus, minus = pl.E_sets(LAM, 3, 13)
    assert plus != {1, 2} or minus != {1, 2}
    # insufficient cap -> None
    res = pl.R_of_h_q(LAM, 3, 13)
    assert res.R_value is None and not res.complete


def test_R_of_character_never_exists():
    for q in (5, 8, 12, 35):
        for chi in g.real_characters(q):
            if chi.is_principal:
                continue
            h = mf.character_fn(chi)
            res = pl.R_of_h_q(h, q, q**3)
            assert res.R_value is None
            # found witnesses agree with the slow scan
            slow_plus, slow_minus = pl.E_sets(h, q, 200)
            fast_plus = {a for a, d in res.witnesses.items() if 1 in d and d[1] <= 200}
            assert slow_plus <= fast_plus


def test_mu_equals_lambda_threshold():
    mu = mf.mobius_fn()
    for q in (3, 5, 8, 12):
        cap = 40 * q * q
        assert pl.R_of_h_q(mu, q, cap).R_value == pl.R_of_h_q(LAM, q, cap).R_value


def test_theorem_audit():
    quad = [c for c in g.real_characters(7) if not c.is_principal][0]
    aud = pl.theorem_audit(mf.character_fn(quad), 7, 10.0, 1.0)
    assert aud["verdict"] == "branch2" and aud["min_pretend_sum"] == 0.0
    aud = pl.theorem_audit(LAM, 3, 10.0, 1.0)
    assert aud["verdict"] in ("branch1", "both") and aud["R"] == 14
    mu = mf.mobius_fn()
    for q in range(3, 30):
        aud = pl.theorem_audit(mu, q, 10.0, 1.0)
        assert aud["verdict"] in ("branch1", "branch2", "both")


TOY35 = dict(q=35, epsilon=0.1, R=20.0, Q1=16.0, z=3.0)
TOY101 = dict(q=101, epsilon=0.1, R=30.0, Q1=16.0, z=3.0)


def _easy_ctx(spec):
    params = pl.ParamSet.from_q(spec["q"], spec["epsilon"], easy_mode=True,
                                R=spec["R"], Q1=spec["Q1"], z=spec["z"])
    return pl.build_context(LAM, spec["q"], params)


def test_s_dual_route_easy():
    for spec in (TOY35, TOY101):
        ctx = _easy_ctx(spec)
        for a in (1, 2):
            for deltas in ((-1, -1, -1), (-1, -1, 1)):
                direct, extras = pl.s_function_easy(ctx, a, None, None, deltas)
                chars = pl.s_function_easy_chars(ctx, a, None, None, deltas)
                assert abs(direct - chars) <= max(1e-9 * abs(direct), 1e-12)
                assert extras["loss"] <= direct + 1e-15


def test_s_empty_prime_set():
    ctx = _easy_ctx(TOY35)
    # Delta2 = +1 never happens for Liouville at primes
    v, _ = pl.s_function_easy(ctx, 1, None, None, (-1, 1, -1))
    assert v == 0.0
    assert pl.t_function_easy(ctx, 1, None, None, (-1, 1, -1)) == pytest.approx(0.0, abs=1e-15)


def test_t_constant_for_flat_inputs():
    # with g = constant both signs and full cosets T is constant over classes
    ctx = _easy_ctx(TOY101)
    vals = [pl.t_function_easy(ctx, a, None, None, (-1, -1, -1))
            for a in (1, 2, 3, 5)]
    model = ctx.models[(0, -1)]
    if len(model.spectrum) == 1:  # constant dense model at this delta
        assert max(vals) - min(vals) <= 1e-12


def test_t_easy_matches_group_convolution():
    ctx = _easy_ctx(TOY35)
    G = ctx.G
    deltas = (-1, -1, -1)
    gvec = ctx.models[(0, -1)].g
    qvec = cs.class_weights(G, cs.q_set(G, LAM, ctx.params.Q1, None, -1)).real
    uvec = cs.class_weights(G, cs.u_set_easy(G, LAM, ctx.params.R, None, -1)).real
    conv = g.convolve_group(G, gvec, gvec)
    conv = g.convolve_group(G, conv, gvec)
    conv = g.convolve_group(G, conv, qvec)
    conv = g.convolve_group(G, conv, uvec)
    Tn = G.phi**3 * ctx.params.Q1 * ctx.params.R
    for a in (1, 4, 11):
        assert pl.t_function_easy(ctx, a, None, None, deltas) == pytest.approx(
            float(conv[G.unit_pos[a]]) / Tn, abs=1e-12)


def test_budget_and_monte_carlo():
    ctx = _easy_ctx(TOY101)
    with pytest.raises(ResourceError):
        pl.s_function_easy(ctx, 1, None, None, (-1, -1, -1), budget=10)
    val, extras = pl.s_function_easy(ctx, 1, None, None, (-1, -1, -1), budget=10,
                                     monte_carlo=True, rng=np.random.default_rng(0))
    assert extras["method"] == "monte-carlo" and extras["stderr"] >= 0
    exact, _ = pl.s_function_easy(ctx, 1, None, None, (-1, -1, -1))
    assert abs(val - exact) <= 6 * max(extras["stderr"], 1e-12) + 1e-9


def test_general_variant_dual_route():
    params = pl.ParamSet.from_q(35, 0.1, easy_mode=False, R=14.0, U=22.0, M=26.0,
                                Q1=16.0, z=3.0, K=1)
    ctx = pl.build_context(LAM, 35, params, ks=(-1, 0, 1))
    kset = [(0, 0, 0), (1, 0, -1)]
    deltas = (-1, -1, -1, -1, 1, 1)
    for a in (1, 2):
        direct, _ = pl.s_function_general(ctx, a, None, None, None, deltas, kset)
        chars = pl.s_function_general_chars(ctx, a, None, None, None, deltas, kset)
        assert abs(direct - chars) <= max(1e-9 * abs(direct), 1e-12)
    # empty K set
    v, _ = pl.s_function_general(ctx, 1, None, None, None, deltas, [])
    assert v == 0.0
    rep = pl.st_compare_general(ctx, 1, None, None, None, deltas, kset)
    assert math.isfinite(rep.lhs) and math.isfinite(rep.rhs_shape)


def test_st_compare_and_loss():
    ctx = _easy_ctx(TOY35)
    rep = pl.st_compare_easy(ctx, 1, None, None, (-1, -1, -1))
    assert math.isfinite(rep.ratio) and not rep.asserted
    loss, rep2 = pl.nonsquarefree_loss(ctx, 1, None, None, (-1, -1, -1))
    assert rep2["loss_le_S"]
    assert math.isfinite(rep2["ratio"])


def test_case_analysis_toy():
    params = pl.ParamSet.from_q(101, 0.08, easy_mode=True, R=101.0, z=2.5)
    rep = pl.case_analysis(LAM, 101, params)
    assert rep.case in ("Case1", "Case2->1", "Case3.1", "Case3.2->1", "Undetermined")
    assert rep.per_k and rep.per_k[0]["k"] == 0
    d = rep.as_dict()
    assert "case" in d and "per_k" in d


def test_case_analysis_full_sets_is_case1():
    # h = 1: every rough interval point has sign +, the + model is the rough
    # density and A+ = full group at small eps, forcing Case 1 via expansion
    one = mf.one_fn()
    params = pl.ParamSet.from_q(101, 0.08, easy_mode=True, R=101.0, z=2.5)
    rep = pl.case_analysis(one, 101, params)
    assert rep.case in ("Case1", "Case2->1")


def test_case_analysis_opposite_cosets_is_case31():
    # h = real character: signs align with the cosets of its kernel, so both
    # level sets sit on opposite cosets of the same index-2 subgroup
    q = 13
    psi = [c for c in g.real_characters(q) if not c.is_principal][0]
    h = mf.character_fn(psi)
    params = pl.ParamSet.from_q(q, 0.08, easy_mode=True, R=float(q), z=2.0,
                                delta=0.02)
    rep = pl.case_analysis(h, q, params)
    assert rep.case == "Case3.1"
    assert rep.certificates["psi"] == psi.label()
    table = psi.real_sign_table()
    assert table[rep.certificates["b_plus"] % q] == 1
    assert table[rep.certificates["b_minus"] % q] == -1
