"""Dense models of sparse interval-supported functions by hard spectral
truncation, property verification, and the epsilon^2 level sets.

Construction: keep the principal coefficient plus every character whose
coefficient is at least delta in absolute value, and resynthesize.  The
spectral-agreement, domination and mean properties then hold by
construction; boundedness and coset averages are verified and reported.
No clipping is applied, so small negative excursions of g are possible at
desk scale; level sets use the signed threshold g(a) >= eps^2, with the
absolute-value variant recorded side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import arith
from . import group as group_mod
from .errors import DomainError


@dataclass
class DenseModel:
    group: group_mod.UnitGroup
    delta: float
    eta: float
    source: str
    spectrum: tuple[int, ...]          # indices into group.characters()
    f_hat: np.ndarray                  # E_{n in [I]_q} f(n) conj(chi(n))
    g_hat: np.ndarray                  # truncated coefficients
    g: np.ndarray                      # real values over group.units
    interval_count: int

    def spectrum_characters(self):
        chars = self.group.characters()
        return [chars[i] for i in self.spectrum]

    def g_at(self, a: int) -> float:
        return float(self.g[self.group.unit_pos[a % self.group.q]])

    def mean_g(self) -> float:
        return float(np.mean(self.g))


def interval_transform(G: group_mod.UnitGroup, interval: arith.IntegerInterval,
                       fvals: Callable[[int], float]) -> tuple[np.ndarray, int, np.ndarray]:
    """F(chi) = E_{n in [I]_q} f(n) conj(chi(n)) for all chi, plus class sums.

    Returns (f_hat over characters, |[I]_q|, class-collapsed weight vector).
    """
    q = G.q
    members = [n for n in interval.members() if math.gcd(n, q) == 1]
    if not members:
        raise DomainError(f"[I]_q is empty for I=({interval.lo}, {interval.hi}], q={q}")
    w = np.zeros(len(G.units), dtype=float)
    for n in members:
        v = fvals(n)
        if v:
            w[G.unit_pos[n % q]] += v
    V = G.character_matrix()
    f_hat = (V.conj() @ w) / len(members)
    return f_hat, len(members), w


def build_dense_model(G: group_mod.UnitGroup, interval: arith.IntegerInterval,
                      fvals: Callable[[int], float], delta: float,
                      eta: float = 0.0, source: str = "") -> DenseModel:
    """Spectral-truncation dense model of f: [I]_q -> R_{>=0} at threshold delta."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    f_hat, count, _ = interval_transform(G, interval, fvals)
    keep = np.abs(f_hat) >= delta
    keep[0] = True  # principal character always retained so means agree
    g_hat = np.where(keep, f_hat, 0.0)
    V = G.character_matrix()
    g_vals = g_hat @ V
    if np.abs(g_vals.imag).max() > 1e-9:
        raise AssertionError("dense model is not real; input f was not real?")
    spectrum = tuple(int(i) for i in np.nonzero(keep)[0])
    return DenseModel(G, float(delta), float(eta), source, spectrum,
                      f_hat, g_hat, g_vals.real.copy(), count)


def verify_model(model: DenseModel, nu: Callable[[int], float] | None = None,
                 interval: arith.IntegerInterval | None = None,
                 fvals: Callable[[int], float] | None = None,
                 tol: float = 1e-12) -> dict:
    """Check the five dense-model properties; assert the constructive ones.

    (ii) max_chi |F - G| <= delta, (iii) |G| <= |F| and |F - G| <= |F|, and
    (iv) E g = E f are asserted (to `tol`).  (i) the range of g and (v) the
    coset averages over every index-2 subgroup are measured and reported;
    (v) slack is returned in units of delta.
    """
    G = model.group
    diff = np.abs(model.f_hat - model.g_hat)
    ok_ii = float(diff.max()) <= model.delta + tol
    ok_iii = bool(np.all(np.abs(model.g_hat) <= np.abs(model.f_hat) + tol)
                  and np.all(diff <= np.abs(model.f_hat) + tol))
    mean_gap = abs(model.mean_g() - model.f_hat[0].real)
    ok_iv = mean_gap <= tol
    if not (ok_ii and ok_iii and ok_iv):
        raise AssertionError(
            f"constructive properties failed: ii={ok_ii} iii={ok_iii} iv={ok_iv}")

    gmin = float(model.g.min())
    gmax = float(model.g.max())
    nu_report = None
    if nu is not None and interval is not None and fvals is not None:
        members = [n for n in interval.members() if math.gcd(n, G.q) == 1]
        nu_vals = np.array([nu(n) for n in members])
        dominated = all(fvals(n) <= nu(n) + tol for n in members)
        nu_mean = float(np.mean(nu_vals)) if members else float("nan")
        w = np.zeros(len(G.units), dtype=float)
        for n in members:
            w[G.unit_pos[n % G.q]] += nu(n)
        V = G.character_matrix()
        nu_hat = (V.conj() @ w) / max(len(members), 1)
        max_nonprincipal = float(np.abs(nu_hat[1:]).max()) if len(nu_hat) > 1 else 0.0
        nu_report = {"dominates_f": dominated, "mean_nu": nu_mean,
                     "mean_gap": abs(nu_mean - 1.0),
                     "max_nonprincipal_coeff": max_nonprincipal}

    coset_rows = []
    worst = 0.0
    for psi in group_mod.real_characters(G.q, G):
        if psi.is_principal:
            continue
        ipsi = G.characters().index(psi)
        # E f 1_{bH} - E g 1_{bH} = psi(b)/2 * (F(psi) - G(psi)) for real psi
        gap = abs((model.f_hat[ipsi] - model.g_hat[ipsi]).real) / 2.0
        for b_sign in (+1, -1):
            coset_rows.append({"psi": psi.label(), "coset_sign": b_sign, "gap": gap,
                               "slack_in_delta": gap / model.delta})
        worst = max(worst, gap)

    return {
        "asserted": {"ii": ok_ii, "iii": ok_iii, "iv": ok_iv, "mean_gap": mean_gap},
        "range": {"min": gmin, "max": gmax, "upper_shape": 1.0 + model.eta},
        "majorant": nu_report,
        "coset_averages": coset_rows,
        "max_coset_gap": worst,
        "spectrum_size": len(model.spectrum),
        "delta": model.delta,
    }


@dataclass
class SignedLevelSets:
    plus: frozenset[int]
    minus: frozenset[int]
    plus_abs: frozenset[int]
    minus_abs: frozenset[int]
    epsilon: float


def level_sets(model_plus: DenseModel, model_minus: DenseModel, eps: float) -> SignedLevelSets:
    """A^Delta = {a : g^Delta(a) >= eps^2} (signed), plus the |g| variant."""
    if model_plus.group.q != model_minus.group.q:
        raise DomainError("models must share the modulus")
    G = model_plus.group
    thr = eps * eps

    def pick(model, absolute):
        vals = np.abs(model.g) if absolute else model.g
        return frozenset(int(a) for a, v in zip(G.units, vals) if v >= thr)

    return SignedLevelSets(pick(model_plus, False), pick(model_minus, False),
                           pick(model_plus, True), pick(model_minus, True), eps)


def aprop_check(sets: SignedLevelSets, G: group_mod.UnitGroup,
                supp_plus: set[int], supp_minus: set[int]) -> dict:
    """Measure the level-set lemma: total mass and per-coset lower bounds.

    (i) |A+| + |A-| >= (1 - eps) phi; (ii) per index-2 coset bH,
    |A^Delta cap bH| >= (share of sign-Delta rough interval elements in bH
    minus eps) phi.  Asymptotic conclusions: recorded pass/fail, not raised.
    """
    eps = sets.epsilon
    phi = G.phi
    total_ok = len(sets.plus) + len(sets.minus) >= (1 - eps) * phi
    rough_total = len(supp_plus) + len(supp_minus)
    rows = []
    for psi in group_mod.real_characters(G.q, G):
        if psi.is_principal:
            continue
        table = psi.real_sign_table()
        for b_sign in (+1, -1):
            for delta, A, supp in ((+1, sets.plus, supp_plus), (-1, sets.minus, supp_minus)):
                in_coset = sum(1 for n in supp if table[n % G.q] == b_sign)
                share = in_coset / rough_total if rough_total else 0.0
                lhs = sum(1 for a in A if table[a] == b_sign)
                bound = (share - eps) * phi
                rows.append({"psi": psi.label(), "coset_sign": b_sign, "delta": delta,
                             "|A cap bH|": lhs, "bound": bound, "ok": lhs >= bound})
    return {"total_mass_ok": bool(total_ok),
            "|A+|": len(sets.plus), "|A-|": len(sets.minus),
            "threshold": (1 - eps) * phi, "coset_rows": rows,
            "coset_failures": sum(1 for r in rows if not r["ok"])}


# ---------------------------------------------------------------------------
# JSON dump (external interface)

def model_to_json(model: DenseModel) -> dict:
    chars = model.group.characters()
    return {
        "q": model.group.q,
        "delta": model.delta,
        "eta": model.eta,
        "source": model.source,
        "spectrum": [list(chars[i].vector) for i in model.spectrum],
        "g": {int(a): float(v) for a, v in zip(model.group.units, model.g)},
    }


def model_from_json(data: dict) -> DenseModel:
    G = group_mod.build_unit_group(int(data["q"]))
    chars = G.characters()
    vec_index = {c.vector: i for i, c in enumerate(chars)}
    spectrum = tuple(sorted(vec_index[tuple(v)] for v in data["spectrum"]))
    g = np.array([float(data["g"][str(int(a))]) if str(int(a)) in data["g"]
                  else float(data["g"][int(a)]) for a in G.units])
    V = G.character_matrix()
    g_hat = (V.conj() @ g.astype(complex)) / G.phi
    f_hat = g_hat.copy()
    return DenseModel(G, float(data["delta"]), float(data["eta"]), data.get("source", ""),
                      spectrum, f_hat, g_hat, g, interval_count=0)
