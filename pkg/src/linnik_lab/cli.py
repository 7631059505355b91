"""Command-line surface: JSON reports for every module, configuration file
support, and a small JSON cache for character tables and prime lists.

Reports are deterministic: a fixed seed and config produce byte-identical
output (keys sorted, no timestamps).  Cache diagnostics go to stderr so cold
and warm runs emit identical reports.  Exit codes: 0 success, 1 usage,
2 precondition/domain error, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, is_dataclass, asdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import arith, charsums, densemodel, group as group_mod, multfunc, pipeline, setcomb, sieve
from .errors import DomainError, PreconditionError, ResourceError

SCHEMA = "linnik-lab/1"


# ---------------------------------------------------------------------------
# cache

class JsonCache:
    """Directory-backed JSON cache; corrupt entries are recomputed, never used."""

    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None
        self.stats = {"hits": 0, "misses": 0, "corrupt": 0, "writes": 0}
        if self.dir is not None:
            try:
                self.dir.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                print(f"cache: directory unusable ({exc}); using memory only",
                      file=sys.stderr)
                self.dir = None
        self._memory: dict[str, dict] = {}

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.json"

    def get(self, key: str):
        if self.dir is None:
            hit = self._memory.get(key)
            self.stats["hits" if hit is not None else "misses"] += 1
            return hit
        path = self._path(key)
        if not path.exists():
            self.stats["misses"] += 1
            return None
        try:
            with open(path) as fh:
                data = json.load(fh)
            self.stats["hits"] += 1
            print(f"cache: hit {key}", file=sys.stderr)
            return data
        except (json.JSONDecodeError, OSError):
            self.mark_corrupt(key)
            return None

    def mark_corrupt(self, key: str):
        self.stats["corrupt"] += 1
        print(f"cache: corrupt entry {key}; recomputing", file=sys.stderr)

    def put(self, key: str, data: dict):
        self.stats["writes"] += 1
        if self.dir is None:
            self._memory[key] = data
            return
        try:
            with open(self._path(key), "w") as fh:
                json.dump(data, fh, sort_keys=True)
        except OSError as exc:
            print(f"cache: write failed ({exc})", file=sys.stderr)


def _sync_prime_cache(cache: JsonCache, q: int) -> None:
    """Load/store the prime sieve for the working range (keyed by range).

    Entries are validated against a rebuild before acceptance, so they serve
    as auditable artifacts; mismatches are reported as corrupt and replaced.
    """
    limit = max(2 * q, 1000)
    key = f"primes-{limit}"
    data = cache.get(key)
    if isinstance(data, dict) and "primes" in data:
        if not arith.validate_prime_table(data.get("limit", limit), data["primes"]):
            cache.mark_corrupt(key)
            data = None
    elif data is not None:
        cache.mark_corrupt(key)
        data = None
    if data is None:
        cache.put(key, {"limit": limit,
                        "primes": [int(p) for p in arith.primes_upto(limit)]})


# ---------------------------------------------------------------------------
# serialization

def jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    return obj


def emit(report: dict, args) -> None:
    text = json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"
    if getattr(args, "fmt", "json") == "csv" and "table" in report.get("result", {}):
        buf = io.StringIO()
        rows = report["result"]["table"]
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow(jsonable(row))
        text = buf.getvalue()
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def report_for(args, audit_tag: str, result: dict, paramset: pipeline.ParamSet | None = None) -> dict:
    resolved = {k: v for k, v in vars(args).items()
                if k not in ("func", "out", "cache", "config") and v is not None}
    if paramset is not None:
        resolved["paramset"] = paramset.as_dict()
    return {"schema": SCHEMA, "command": args.command, "audit": audit_tag,
            "params": resolved, "result": result}


# ---------------------------------------------------------------------------
# shared argument helpers

def _fn(args) -> multfunc.MultiplicativeFunction:
    name = getattr(args, "h", "liouville")
    if name.startswith("character:"):
        _, qs, idx = name.split(":")
        chars = group_mod.real_characters(int(qs))
        return multfunc.character_fn(chars[int(idx)])
    return multfunc.builtin_function(name)


def _real_char(q: int, spec: str):
    chars = group_mod.real_characters(q)
    if spec == "principal":
        return next(c for c in chars if c.is_principal)
    try:
        return chars[int(spec)]
    except (ValueError, IndexError):
        raise DomainError(f"--chi expects 'principal' or an index below {len(chars)}")


def _coset(args, q: int):
    psi_idx = getattr(args, "psi", None)
    if psi_idx is None:
        return None
    chars = [c for c in group_mod.real_characters(q) if not c.is_principal]
    psi = chars[int(psi_idx)]
    return group_mod.CosetSpec(psi, getattr(args, "b", 1) or 1)


def _overrides(spec: str | None):
    if not spec:
        return None
    out = []
    for part in spec.split(","):
        a, b = part.split(":")
        out.append((float(a), float(b)))
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_factor(args):
    fac = arith.factorize(args.n)
    return report_for(args, "integer-factorization",
                      {"n": fac.n, "factors": [list(t) for t in fac.factors],
                       "mobius": fac.mobius, "liouville": fac.liouville})


def cmd_rfunc(args):
    h = _fn(args)
    res = pipeline.R_of_h_q(h, args.q, args.cap)
    out = res.as_dict()
    out["witnesses_verified"] = pipeline.verify_witnesses(res, h, args.q)
    return report_for(args, "sign-change-threshold", out)


def cmd_esets(args):
    h = _fn(args)
    plus, minus = pipeline.E_sets(h, args.q, args.x)
    phi = arith.euler_phi(args.q)
    return report_for(args, "sign-witness-classes",
                      {"E_plus": sorted(plus), "E_minus": sorted(minus),
                       "phi": phi, "both_full": len(plus) == len(minus) == phi})


def cmd_pretend(args):
    h = _fn(args)
    chi = _real_char(args.q, args.chi)
    s = multfunc.pretend_sum(h, chi, args.cutoff)
    res = {"sum": s, "character": chi.label()}
    if args.c is not None and args.Q1 is not None:
        res["holds"] = multfunc.pretend_condition_holds(s, args.c, args.Q1)
    return report_for(args, "character-pretension-sum", res)


def cmd_distance(args):
    f = multfunc.builtin_function(args.f)
    gfn = multfunc.builtin_function(args.g)
    d2 = multfunc.pretentious_distance_squared(f, gfn, args.x, args.r)
    return report_for(args, "pretentious-distance",
                      {"distance": math.sqrt(max(0.0, d2)), "squared": d2})


def cmd_lofq(args):
    val, rows = multfunc.L_of_q(args.q, args.prime_cutoff)
    return report_for(args, "real-character-euler-max",
                      {"L": val, "per_character": rows})


def cmd_sieve(args):
    plus, minus = sieve.build_beta_sieve(args.z, args.D, args.kappa)
    res = {
        "support_plus": len(plus.weights), "support_minus": len(minus.weights),
        "s": plus.s, "lambda_1": [plus.weights[1], minus.weights[1]],
        "max_abs": max(max(abs(v) for v in plus.weights.values()),
                       max(abs(v) for v in minus.weights.values())),
    }
    if args.accuracy_K is not None:
        res["accuracy_g_inv_p"] = sieve.sieve_accuracy(
            (plus, minus), lambda p: 1.0 / p, args.z, K=args.accuracy_K, kappa=args.kappa)
    return report_for(args, "sieve-weight-construction", res)


def cmd_rough(args):
    coset = _coset(args, args.q)
    count, rep = sieve.rough_count_in_coset(args.cap, args.q, coset, args.z, args.eps)
    return report_for(args, "rough-coset-count", rep)


def cmd_densemodel(args):
    h = _fn(args)
    overrides = {}
    for name in ("R", "Q1", "z", "delta"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    params = pipeline.ParamSet.from_q(args.q, args.epsilon, easy_mode=True, **overrides)
    ctx = pipeline.build_context(h, args.q, params)
    reports = {}
    for delta, tag in ((1, "plus"), (-1, "minus")):
        model = ctx.models[(0, delta)]
        rep = densemodel.verify_model(model)
        reports[tag] = {"verify": rep, "model": densemodel.model_to_json(model)}
    sets = densemodel.level_sets(ctx.models[(0, 1)], ctx.models[(0, -1)], args.level_eps)
    ap = densemodel.aprop_check(sets, ctx.G, set(ctx.supports[(0, 1)]),
                                set(ctx.supports[(0, -1)]))
    return report_for(args, "dense-model-properties",
                      {"models": reports, "level_sets": {
                          "A_plus": sorted(sets.plus), "A_minus": sorted(sets.minus),
                          "check": ap}}, paramset=params)


def cmd_kneser(args):
    import random
    rng = random.Random(args.seed)
    G = group_mod.build_unit_group(args.q)
    units = [int(a) for a in G.units]
    rows = []
    for _ in range(args.trials):
        A = rng.sample(units, rng.randint(1, len(units)))
        B = rng.sample(units, rng.randint(1, len(units)))
        rows.append(setcomb.kneser_check(G, A, B))
    return report_for(args, "kneser-product-bound",
                      {"trials": args.trials, "all_pass": True, "sample": rows[:5]})


def cmd_triple(args):
    rng = np.random.default_rng(args.seed)
    G = group_mod.build_unit_group(args.q)
    units = [int(a) for a in G.units]
    phi = G.phi
    floor_size = int((0.4 + args.epsilon) * phi) + 1
    outcomes = {}
    for t in range(args.trials):
        sets = []
        for _ in range(3):
            size = rng.integers(floor_size, phi + 1)
            sets.append(frozenset(rng.choice(units, size=size, replace=False).tolist()))
        out = setcomb.triple_conv_classify(G, *sets, eps=args.epsilon)
        outcomes[out.branch] = outcomes.get(out.branch, 0) + 1
        if not out.verified:
            raise AssertionError(f"trial {t}: no branch certified")
    return report_for(args, "triple-convolution-dichotomy",
                      {"trials": args.trials, "outcomes": outcomes})


def cmd_charsum(args):
    rng = np.random.default_rng(args.seed)
    sub = args.variant
    if sub == "mvt":
        coeffs = {n: complex(rng.choice((-1.0, 1.0))) for n in range(1, args.N + 1)}
        rep = charsums.mvt_check(coeffs, args.N, args.q)
        return report_for(args, "mvt-mean-value", jsonable(rep))
    if sub == "pv":
        chars = [c for c in group_mod.characters(args.q) if not c.is_principal]
        worst = 0.0
        for chi in chars:
            sup, _ = charsums.pv_max_window(chi)
            worst = max(worst, sup)
        bound = math.sqrt(args.q) * math.log(args.q)
        if worst > bound + 1e-9:
            raise AssertionError("Polya-Vinogradov bound violated")
        return report_for(args, "polya-vinogradov",
                          {"max_over_characters_windows": worst, "bound": bound})
    if sub == "halmon":
        z = args.q**args.eps
        coeffs = {}
        n = 1
        while len(coeffs) < args.N:
            n += 1
            if arith.is_rough(n, z):
                coeffs[n] = complex(rng.choice((-1.0, 1.0)))
            if n > 100 * args.N:
                break
        chars = list(group_mod.characters(args.q))
        pick = rng.choice(len(chars), size=min(args.nchars, len(chars)), replace=False)
        rep = charsums.halasz_montgomery_report(coeffs, [chars[i] for i in pick],
                                                max(coeffs), args.q, args.eps)
        return report_for(args, "halasz-montgomery-mean", jsonable(rep))
    if sub == "large":
        count, rep = charsums.large_values_census(None, args.P, args.q, args.alpha, args.C)
        return report_for(args, "prime-sum-large-values", jsonable(rep))
    if sub == "amplify":
        rep = charsums.amplify_report(args.q, args.Y1, args.Y2, args.X)
        return report_for(args, "prime-power-amplification", jsonable(rep))
    if sub == "moments":
        sq, sh = charsums.square_and_shorts_moments(
            args.q, args.N, args.P, args.Q, args.M, args.H, args.K, args.eps, args.seed)
        return report_for(args, "ramare-error-moments",
                          {"squares": jsonable(sq), "shorts": jsonable(sh)})
    raise DomainError(f"unknown charsum variant {sub}")


def cmd_ladder(args):
    lad = charsums.ladder_build(args.Q1, args.q, _overrides(args.overrides))
    res = {"J": lad.J, "intervals": list(lad.intervals), "empty": not lad.intervals}
    if args.n is not None:
        res["in_S"] = charsums.in_S(args.n, lad)
    return report_for(args, "prime-factor-ladder", res)


def cmd_ramare(args):
    h = _fn(args)
    G = group_mod.build_unit_group(args.q)
    lad = charsums.ladder_build(args.Q1, args.q, _overrides(args.overrides))
    B = _coset(args, args.q)
    delta = 1 if args.delta == "plus" else -1
    out = charsums.ramare_decompose(G, h, B, delta, args.v, args.j, lad, args.M)
    res = {"defect": out["defect"], "members": out["members"],
           "e1_terms": out["e1_terms"], "e2_terms": out["e2_terms"],
           "max_coefficient": out["max_coefficient"],
           "identity_holds": out["defect"] <= 1e-12}
    if not res["identity_holds"]:
        raise AssertionError(f"decomposition identity defect {out['defect']}")
    return report_for(args, "ramare-identity", res)


def _toy_params(q: int, variant: str) -> tuple[pipeline.ParamSet, tuple]:
    if variant == "easy":
        params = pipeline.ParamSet.from_q(q, 0.1, easy_mode=True,
                                          R=20.0 if q == 35 else 30.0,
                                          Q1=16.0, z=3.0)
        return params, (None, None, (-1, -1, -1))
    params = pipeline.ParamSet.from_q(
        q, 0.1, easy_mode=False, R=14.0, U=22.0, M=26.0, Q1=16.0, z=3.0, K=1,
        ladder_overrides=None)
    return params, (None, None, None, (-1, -1, -1, -1, 1, 1))


def cmd_stcompare(args):
    h = _fn(args)
    params, spec = _toy_params(args.q, args.variant)
    if args.variant == "easy":
        ctx = pipeline.build_context(h, args.q, params)
        B2, B3, deltas = spec
        rep = pipeline.st_compare_easy(ctx, args.a, B2, B3, deltas)
    else:
        ctx = pipeline.build_context(h, args.q, params)
        B4, B5, B6, deltas = spec
        kset = [(0, 0, 0)]
        rep = pipeline.st_compare_general(ctx, args.a, B4, B5, B6, deltas, kset)
    return report_for(args, "sparse-dense-comparison", jsonable(rep), paramset=params)


def cmd_audit(args):
    h = _fn(args)
    res = pipeline.theorem_audit(h, args.q, args.Q1, args.c)
    return report_for(args, "dichotomy-audit", res)


def cmd_batch(args):
    h = _fn(args)
    rows = []
    qs = list(range(args.qmin, args.qmax + 1))

    def one(q):
        if args.what == "rfunc":
            cap = int(q * q * 20 * max(math.log(q), 1.0)) + 1
            res = pipeline.R_of_h_q(h, q, cap)
            return {"q": q, "R": res.R_value, "cap": cap,
                    "verified": pipeline.verify_witnesses(res, h, q)}
        res = pipeline.theorem_audit(h, q, args.Q1, args.c)
        return {"q": q, "verdict": res["verdict"], "R": res["R"],
                "min_pretend_sum": res["min_pretend_sum"]}

    if args.threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = sorted(pool.map(_BatchWorker(args), qs), key=lambda r: r["q"])
    else:
        rows = [one(q) for q in qs]
    return report_for(args, "batch-thresholds", {"table": rows})


class _BatchWorker:
    """Picklable per-q worker for process pools."""

    def __init__(self, args):
        self.h_name = args.h
        self.what = args.what
        self.Q1 = getattr(args, "Q1", 10.0)
        self.c = getattr(args, "c", 1.0)

    def __call__(self, q):
        h = multfunc.builtin_function(self.h_name)
        if self.what == "rfunc":
            cap = int(q * q * 20 * max(math.log(q), 1.0)) + 1
            res = pipeline.R_of_h_q(h, q, cap)
            return {"q": q, "R": res.R_value, "cap": cap,
                    "verified": pipeline.verify_witnesses(res, h, q)}
        res = pipeline.theorem_audit(h, q, self.Q1, self.c)
        return {"q": q, "verdict": res["verdict"], "R": res["R"],
                "min_pretend_sum": res["min_pretend_sum"]}


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _common_flags(p, suppress: bool):
    d = argparse.SUPPRESS if suppress else None

    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--config", default=d, help="JSON config file (schema linnik-lab/1)")
    p.add_argument("--out", default=d, help="write the report to this path instead of stdout")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default=dflt("json"))
    p.add_argument("--seed", type=int, default=dflt(0))
    p.add_argument("--cache", default=d, help="cache directory (or env LINNIK_CACHE_DIR)")
    p.add_argument("--threads", type=int, default=dflt(1))


REQUIRED: dict[str, list[str]] = {}
DEFAULTS: dict[str, dict[str, object]] = {}


def build_parser() -> _Parser:
    p = _Parser(prog="linnik-lab", description=__doc__)
    _common_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command")

    def add(name, fn, **flags):
        sp = sub.add_parser(name)
        _common_flags(sp, suppress=True)
        REQUIRED[name] = []
        DEFAULTS[name] = {}
        for fname, spec in flags.items():
            spec = dict(spec)
            if spec.pop("required", False):
                # deferred so a config file may supply the value
                REQUIRED[name].append(fname)
                spec.setdefault("default", None)
            DEFAULTS[name][fname] = spec.get("default")
            sp.add_argument(f"--{fname.replace('_', '-')}", **spec)
        sp.set_defaults(func=fn)
        return sp

    add("factor", cmd_factor, n={"type": int, "required": True})
    add("rfunc", cmd_rfunc, h={"default": "liouville"}, q={"type": int, "required": True},
        cap={"type": int, "required": True})
    add("esets", cmd_esets, h={"default": "liouville"}, q={"type": int, "required": True},
        x={"type": int, "required": True})
    add("pretend", cmd_pretend, h={"default": "liouville"}, q={"type": int, "required": True},
        cutoff={"type": float, "required": True}, chi={"default": "principal"},
        c={"type": float}, Q1={"type": float})
    add("distance", cmd_distance, f={"default": "liouville"}, g={"default": "one"},
        x={"type": float, "required": True}, r={"type": int, "default": 1})
    add("lofq", cmd_lofq, q={"type": int, "required": True},
        prime_cutoff={"type": int, "default": None})
    add("sieve", cmd_sieve, z={"type": float, "required": True},
        D={"type": float, "required": True}, kappa={"type": float, "default": 1.0},
        accuracy_K={"type": float, "default": None})
    add("rough", cmd_rough, q={"type": int, "required": True},
        cap={"type": float, "required": True}, z={"type": float, "required": True},
        psi={"type": int, "default": None}, b={"type": int, "default": 1},
        eps={"type": float, "default": 0.1})
    add("densemodel", cmd_densemodel, h={"default": "liouville"},
        q={"type": int, "required": True}, epsilon={"type": float, "default": 0.04},
        R={"type": float}, Q1={"type": float}, z={"type": float}, delta={"type": float},
        level_eps={"type": float, "default": 0.2})
    add("kneser", cmd_kneser, q={"type": int, "required": True},
        trials={"type": int, "default": 100})
    add("triple", cmd_triple, q={"type": int, "required": True},
        epsilon={"type": float, "default": 0.08}, trials={"type": int, "default": 20})
    cs = add("charsum", cmd_charsum, q={"type": int, "required": True},
             N={"type": int, "default": 500}, eps={"type": float, "default": 0.2},
             nchars={"type": int, "default": 10}, P={"type": float, "default": 500.0},
             Q={"type": float, "default": 1000.0}, alpha={"type": float, "default": 0.25},
             C={"type": float, "default": 1.0}, Y1={"type": float, "default": 10.0},
             Y2={"type": float, "default": 100.0}, X={"type": float, "default": 2000.0},
             M={"type": float, "default": 50.0}, H={"type": float, "default": 8.0},
             K={"type": int, "default": 2})
    cs.add_argument("variant", choices=("mvt", "pv", "halmon", "large", "amplify", "moments"))
    add("ladder", cmd_ladder, Q1={"type": float, "required": True},
        q={"type": int, "required": True}, overrides={"default": None},
        n={"type": int, "default": None})
    add("ramare", cmd_ramare, h={"default": "liouville"}, q={"type": int, "required": True},
        Q1={"type": float, "required": True}, M={"type": float, "required": True},
        v={"type": int, "default": 0}, j={"type": int, "default": 2},
        delta={"choices": ("plus", "minus"), "default": "plus"},
        overrides={"default": None}, psi={"type": int, "default": None},
        b={"type": int, "default": 1})
    add("stcompare", cmd_stcompare, h={"default": "liouville"},
        q={"type": int, "required": True}, a={"type": int, "default": 1},
        variant={"choices": ("easy", "general"), "default": "easy"})
    add("audit", cmd_audit, h={"default": "liouville"}, q={"type": int, "required": True},
        Q1={"type": float, "default": 10.0}, c={"type": float, "default": 1.0})
    add("batch", cmd_batch, h={"default": "liouville"},
        what={"choices": ("rfunc", "audit"), "default": "rfunc"},
        qmin={"type": int, "default": 3}, qmax={"type": int, "default": 50},
        Q1={"type": float, "default": 10.0}, c={"type": float, "default": 1.0})
    return p


def _apply_config(args, parser):
    if not args.config:
        return args
    with open(args.config) as fh:
        data = json.load(fh)
    if data.get("schema") != SCHEMA:
        raise PreconditionError(f"config schema must be {SCHEMA!r}")
    merged = dict(data.get("defaults", {}))
    merged.update(data.get(args.command or "", {}))
    defaults = DEFAULTS.get(args.command, {})
    for key, val in merged.items():
        # flags given on the command line win over config values; a flag
        # still holding its parser default is considered not given
        if getattr(args, key, None) in (None, defaults.get(key)):
            setattr(args, key, val)
    return args


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        args = _apply_config(args, parser)
        missing = [name for name in REQUIRED.get(args.command, ())
                   if getattr(args, name, None) is None]
        if missing:
            raise _UsageError(f"missing required arguments for {args.command}: "
                              + ", ".join(f"--{m}" for m in missing))
        cache_dir = args.cache or os.environ.get("LINNIK_CACHE_DIR")
        cache = JsonCache(cache_dir) if cache_dir else None
        if cache is not None and getattr(args, "q", None):
            group_mod.build_unit_group(args.q, cache=cache)
            _sync_prime_cache(cache, args.q)
        report = args.func(args)
        emit(report, args)
        if cache is not None:
            print(f"cache: {cache.stats}", file=sys.stderr)
        return 0
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (DomainError, PreconditionError) as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
