"""Command-line experiment runner.

Each subcommand runs one experiment and writes a JSON (or CSV) report::

    chaoslab basis-constant --param spec=L2 --param max_pairs=10
    chaoslab lemma2 --param K=2
    chaoslab suite --out suite.json
    chaoslab --config experiment.json

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error, 3 computational error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from datetime import datetime, timezone
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .constants import basis_constant, equivalence_ratios, ruc_average, uncond_constant
from .constructions import BlockSpec, interpolation_check, lemma2_witness, prop2_witness, prop3_witness
from .dyadic import DyadicStep
from .errors import PreconditionError
from .records import Check, plain
from .sampling import FAMILIES, random_coeffs, random_step, rng_for
from .spaces import NFUNCTIONS, NormSpec, norm
from .square import DyadicStep2D, lemma1_check, random_step_2d, remark3_compare
from .suite import CRITERIA, run_suite
from .walsh import ChaosCoeffs, pairs_up_to, synthesize

log = logging.getLogger("chaoslab")

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3


class UsageError(PreconditionError):
    pass


# --- parameter handling -------------------------------------------------------------


def parse_value(text: str) -> Any:
    """JSON literal when possible (numbers, lists, booleans), plain string otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_value(v.strip())
    return out


class Params:
    """Typed access to an experiment's parameters; unknown keys are rejected."""

    def __init__(self, raw: dict, allowed: dict, level_cap: Optional[int]):
        unknown = sorted(set(raw) - set(allowed))
        if unknown:
            raise UsageError(f"unknown parameter(s) {unknown}; allowed: {sorted(allowed)}")
        self.values = {**allowed, **raw}
        self.level_cap = level_cap

    def __getitem__(self, key):
        return self.values[key]

    def int(self, key, lo=None, hi=None) -> int:
        v = self.values[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
            raise UsageError(f"parameter {key} must be an integer, got {v!r}")
        v = int(v)
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise UsageError(f"parameter {key}={v} outside [{lo}, {hi}]")
        return v

    def float(self, key) -> float:
        v = self.values[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise UsageError(f"parameter {key} must be a finite number, got {v!r}")
        return float(v)

    def spec(self, key="spec") -> NormSpec:
        v = self.values[key]
        return NormSpec.from_dict(v)

    def level(self, key="level", need: int = 0) -> Optional[int]:
        """Resolution, defaulting to ``need``; the global cap may not push it below ``need``."""
        v = self.values.get(key)
        level = need if v is None else self.int(key, lo=0)
        if self.level_cap is not None and level > self.level_cap:
            if need > self.level_cap:
                raise UsageError(f"experiment needs level >= {need}, above the --level cap {self.level_cap}")
            level = self.level_cap
        if level < need:
            raise UsageError(f"{key}={level} is below the required level {need}")
        return level


def _decode(parse, value, what: str):
    """Parse a user payload; malformed input is a usage error, not a computation error."""
    try:
        return parse(value)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise UsageError(f"malformed {what}: {exc!r}") from exc


def _coeffs(p: Params, rng) -> ChaosCoeffs:
    if p["coeffs"] is not None:
        return _decode(ChaosCoeffs.from_list, p["coeffs"], "coeffs")
    if p["pairs"] is not None:
        pairs = _decode(lambda v: [tuple(map(int, q)) for q in v], p["pairs"], "pairs")
        vals = p["values"] if p.values.get("values") is not None else np.ones(len(pairs))
        return _decode(lambda v: ChaosCoeffs.from_pairs(pairs, v), vals, "values")
    return random_coeffs(rng, pairs_up_to(p.int("max_index", 2, 10)), p["family"])


# --- experiments --------------------------------------------------------------------
#
# Each returns (checks, witnesses).


def exp_gen(p: Params, seed: int):
    rng = rng_for(seed)
    kind, count = p["kind"], p.int("count", 1, 10_000)
    if kind == "coeffs":
        pairs = pairs_up_to(p.int("max_index", 2, 30))
        fam = p["family"]
        if fam not in FAMILIES:
            raise UsageError(f"family must be one of {FAMILIES}")
        samples = [random_coeffs(rng, pairs, fam).to_list() for _ in range(count)]
    elif kind == "step":
        level = p.level(need=p.int("min_level", 0, 24))
        samples = [random_step(rng, level).to_dict() for _ in range(count)]
    elif kind == "step2d":
        level = p.level(need=p.int("min_level", 0, 12))
        samples = [random_step_2d(rng, level, level).to_dict() for _ in range(count)]
    else:
        raise UsageError("kind must be one of coeffs, step, step2d")
    return [], {"kind": kind, "samples": samples}


def exp_norm(p: Params, seed: int):
    rng = rng_for(seed)
    specs = [NormSpec.from_dict(s) for s in (p["spec"] if isinstance(p["spec"], list) else [p["spec"]])]
    if p["step"] is not None:
        x = _decode(DyadicStep.from_dict, p["step"], "step")
        source = "step"
    else:
        c = _coeffs(p, rng)
        x = synthesize(c, p.level(need=c.min_level))
        source = {"coeffs": c.to_list()}
    values = {s.label: norm(x, s) for s in specs}
    return [], {"source": source, "level": x.level, "norms": values}


def exp_basis(p: Params, seed: int):
    rep = basis_constant(p.spec(), p.int("max_pairs", 2, 300), p.int("trials", 1), seed)
    checks = [Check("max partial-sum ratio", rep.max_ratio, 3.0, "<=", 1e-9, "‖S_m y‖_X <= 3B‖S_n y‖_X, B = 1")]
    return checks, {"report": rep.to_dict()}


def exp_uncond(p: Params, seed: int):
    c = _coeffs(p, rng_for(seed))
    rep = uncond_constant(p.spec(), c)
    checks = [
        Check("identity pattern attains ratio 1 (lower)", rep.max_ratio, 1.0, ">=", 1e-12,
              "max_theta ‖T_theta y‖/‖y‖ >= 1"),
        Check("identity pattern attains ratio 1 (upper)", rep.min_ratio, 1.0, "<=", 1e-12,
              "min_theta ‖T_theta y‖/‖y‖ <= 1"),
    ]
    return checks, {"coeffs": c.to_list(), "report": rep.to_dict()}


def exp_khintchine(p: Params, seed: int):
    spec = p.spec()
    rep = equivalence_ratios(spec, p.int("max_index", 2, 10), p.int("trials", 1), seed)
    checks = [Check("lower equivalence constant positive", rep.min_ratio, 0.0, ">", 0.0,
                    "A‖a‖_2 <= ‖sum a_ij r_i r_j‖_X")]
    if spec.tag == "Lp" and spec.p >= 2:
        checks.append(Check("L_p dominates L_2 for p >= 2", rep.min_ratio, 1.0, ">=", 1e-12, "‖y‖_p >= ‖y‖_2"))
    if spec.tag == "Lp" and spec.p <= 2:
        checks.append(Check("L_2 dominates L_p for p <= 2", rep.max_ratio, 1.0, "<=", 1e-12, "‖y‖_p <= ‖y‖_2"))
    return checks, {"report": rep.to_dict()}


def exp_ruc(p: Params, seed: int):
    c = _coeffs(p, rng_for(seed))
    mode = p["mode"]
    est = ruc_average(p.spec(), c, mode, p.int("samples", 2), seed)
    checks = [
        Check("average at least the minimum", est.mean, est.min_norm, ">=", 1e-12 * max(1.0, est.mean),
              "min_theta ‖T_theta y‖ <= E‖T_theta y‖"),
        Check("average at most the maximum", est.mean, est.max_norm, "<=", 1e-12 * max(1.0, est.mean),
              "E‖T_theta y‖ <= max_theta ‖T_theta y‖"),
    ]
    return checks, {"coeffs": c.to_list(), "estimate": est.to_dict()}


def _block_spec(p: Params) -> BlockSpec:
    K = p.int("K", 1, 4)
    c = p["c"] if p["c"] is not None else [1.0] * K
    if not isinstance(c, list) or len(c) < K:
        raise UsageError(f"c must be a list of at least K={K} positive weights")
    if p["n"] == "powers-of-two":
        return BlockSpec.powers_of_two(K, c[:K])
    if isinstance(p["n"], list):
        return BlockSpec(tuple(p["n"]), tuple(c))
    raise UsageError("n must be 'powers-of-two' or a list of block bounds")


def exp_lemma2(p: Params, seed: int):
    spec = _block_spec(p)
    K = p.int("K", 1, spec.blocks)
    rec = lemma2_witness(spec, K, p.level(need=spec.n[K]))
    return rec.checkpoints, {"record": rec.to_dict()}


def exp_prop2(p: Params, seed: int):
    K = p.int("K", 1, 3)
    rec = prop2_witness(p.float("eps"), K, p.level(need=2 ** (K + 1)), seed, p.int("budget", 1))
    return rec.checkpoints, {"record": rec.to_dict()}


def exp_prop3(p: Params, seed: int):
    K = p.int("K", 1, 3)
    v = None if p["v"] is None else p.float("v")
    rec = prop3_witness(p.float("eps"), p.float("delta"), v, K, p.level(need=2 ** (K + 1)), seed,
                        p.int("budget", 1))
    return rec.checkpoints, {"record": rec.to_dict()}


def exp_interp(p: Params, seed: int):
    rng = rng_for(seed)
    u = p.float("u")
    if p["step"] is not None:
        steps = [_decode(DyadicStep.from_dict, p["step"], "step")]
    else:
        level = p.level(need=p.int("min_level", 1, 24))
        steps = [random_step(rng, level) for _ in range(p.int("trials", 1))]
    recs = [interpolation_check(x, u) for x in steps]
    form = max((r.weighted_sup - r.split_bound) / max(1.0, r.split_bound) for r in recs)
    chain = max(r.end_to_end_constant - r.psi_constant for r in recs)
    checks = [
        Check("sup-form inequality (worst relative excess)", form, 0.0, "<=", 1e-12,
              "sup x* w^u <= (sup x*)^(1-u) (sup x* w)^u"),
        Check("interpolation constant within C_phi (worst excess)", chain, 0.0, "<=", 1e-12,
              "‖x‖_{M(phi_eps)} <= C_phi ‖x‖_inf^(1-u) ‖x‖_{M(phi_-1/2)}^u"),
    ]
    wit = {"u": u, "samples": len(recs), "max_end_to_end_constant": max(r.end_to_end_constant for r in recs),
           "psi_constant": recs[0].psi_constant}
    if len(recs) == 1:
        wit["record"] = recs[0].to_dict()
    return checks, wit


def exp_mixed(p: Params, seed: int):
    rng = rng_for(seed)
    name = p["A"]
    if name not in NFUNCTIONS:
        raise UsageError(f"A must be one of {sorted(NFUNCTIONS)}")
    A = NFUNCTIONS[name]
    if p["step"] is not None:
        xs = [_decode(DyadicStep2D.from_dict, p["step"], "step")]
    else:
        level = p.level(need=p.int("min_level", 1, 12))
        xs = [random_step_2d(rng, level, level) for _ in range(p.int("trials", 1))]
    recs = [lemma1_check(x, A) for x in xs]
    first = max((r.product - r.sup_inner) / max(1.0, r.sup_inner) for r in recs)
    second = max((r.mean_inner - r.sup_inner) / max(1.0, r.sup_inner) for r in recs)
    checks = [
        Check("product Orlicz norm below sup of fiber norms", first, 0.0, "<=", 1e-9,
              "‖x‖_{L_A(IxI)} <= ‖x‖_{Linf[L_A]}"),
        Check("mean of fiber norms below their sup", second, 0.0, "<=", 1e-12, "‖x‖_{L1[L_A]} <= ‖x‖_{Linf[L_A]}"),
    ]
    wit = {"A": A.name, "samples": len(recs), "max_L1_over_product_ratio": max(r.ratio for r in recs)}
    if len(recs) == 1:
        wit["record"] = recs[0].to_dict()
    return checks, wit


def exp_square(p: Params, seed: int):
    rng = rng_for(seed)
    spec = p.spec()
    if p["coeffs"] is not None:
        cs = [_decode(ChaosCoeffs.from_list, p["coeffs"], "coeffs")]
    else:
        pool = pairs_up_to(p.int("max_index", 2, 8))
        cs = [random_coeffs(rng, pool, FAMILIES[t % 2]) for t in range(p.int("trials", 1))]
    level = p.level(need=max(c.min_level for c in cs))
    recs = [remark3_compare(c, spec, level) for c in cs]
    ratios = [r["ratio"] for r in recs]
    checks = [Check("ratios finite and positive", float(min(ratios)), 0.0, ">", 0.0,
                    "‖y‖_X on [0,1] and on the square are equivalent")]
    if spec == NormSpec.lp(2):
        worst = max(abs(r - 1.0) for r in ratios)
        checks.append(Check("L2 ratio exactly 1", worst, 0.0, "<=", 1e-12, "Parseval on both sides"))
    return checks, {"samples": len(recs), "min_ratio": min(ratios), "max_ratio": max(ratios),
                    "records": recs if len(recs) <= 10 else None}


def exp_suite(p: Params, seed: int):
    only = p["criteria"]
    if only is not None and (not isinstance(only, list) or any(n not in CRITERIA for n in only)):
        raise UsageError(f"criteria must be a list drawn from {sorted(CRITERIA)}")
    results = run_suite(seed, only)
    checks = []
    for r in results:
        for c in r.checks:
            c.name = f"criterion {r.number}: {c.name}"
            checks.append(c)
    return checks, {"criteria": [r.to_dict() for r in results]}


_COMMON_C = {"coeffs": None, "pairs": None, "values": None, "max_index": 5, "family": "gaussian"}

EXPERIMENTS: dict[str, tuple[Callable, dict, str]] = {
    "gen": (exp_gen, {"kind": "coeffs", "count": 1, "max_index": 6, "family": "gaussian", "level": None,
                      "min_level": 6}, "emit seeded sample coefficients or step functions"),
    "norm": (exp_norm, {"spec": "L2", "step": None, "level": None, **_COMMON_C}, "evaluate norms"),
    "basis-constant": (exp_basis, {"spec": "L1", "max_pairs": 21, "trials": 200}, "empirical basis constant"),
    "uncond": (exp_uncond, {"spec": "L1", **_COMMON_C, "max_index": 5}, "exhaustive sign-pattern constant"),
    "khintchine": (exp_khintchine, {"spec": "L1", "max_index": 6, "trials": 400}, "l2-equivalence ratios"),
    "ruc": (exp_ruc, {"spec": "L1", "mode": "exact", "samples": 10_000, **_COMMON_C, "max_index": 5},
            "average norm over random signs"),
    "lemma2": (exp_lemma2, {"K": 2, "n": "powers-of-two", "c": None, "level": None}, "block rearrangement bound"),
    "prop2": (exp_prop2, {"eps": 0.25, "K": 2, "level": None, "budget": 20_000}, "bounded chaos witness"),
    "prop3": (exp_prop3, {"eps": 0.0, "delta": 0.1, "v": None, "K": 2, "level": None, "budget": 20_000},
              "Marcinkiewicz chaos witness"),
    "interp": (exp_interp, {"u": 0.5, "step": None, "trials": 100, "level": None, "min_level": 8},
               "sup-form interpolation inequality"),
    "mixed": (exp_mixed, {"A": "M", "step": None, "trials": 100, "level": None, "min_level": 6},
              "mixed Orlicz norms on the square"),
    "square-compare": (exp_square, {"spec": "L1", "coeffs": None, "max_index": 6, "trials": 200, "level": None},
                       "chaos norm on the line against the square"),
    "suite": (exp_suite, {"criteria": None}, "run the acceptance battery"),
}


# --- report -------------------------------------------------------------------------


def build_report(experiment: str, params: dict, seed: int, level_cap: Optional[int]) -> tuple[dict, int]:
    if experiment not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {experiment!r}; known: {sorted(EXPERIMENTS)}")
    fn, defaults, _ = EXPERIMENTS[experiment]
    p = Params(params, defaults, level_cap)
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    checks, witnesses = fn(p, seed)
    report = {
        "schema": SCHEMA,
        "experiment": experiment,
        "version": __version__,
        "config": {"experiment": experiment, "parameters": plain(p.values), "seed": seed, "level_cap": level_cap},
        "pass": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
        "witnesses": plain(witnesses),
        "started_at": started,
        "wall_clock_ms": 1000.0 * (time.perf_counter() - t0),
    }
    return report, EXIT_PASS if report["pass"] else EXIT_FAIL


def error_report(experiment: Optional[str], params: dict, seed: int, exc: BaseException, kind: str) -> dict:
    failing = Check(f"{kind}: {type(exc).__name__}", float("nan"), float("nan"), "==", 0.0, str(exc))
    return {
        "schema": SCHEMA,
        "experiment": experiment,
        "version": __version__,
        "config": {"experiment": experiment, "parameters": plain(params), "seed": seed},
        "pass": False,
        "error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)},
        "checks": [failing.to_dict()],
        "witnesses": {},
    }


CSV_FIELDS = ["experiment", "name", "paper_anchor", "relation", "lhs", "rhs", "margin", "tol", "pass", "t"]


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for c in report.get("checks", []):
        w.writerow({"experiment": report.get("experiment"), **c})
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(report)
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# --- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's defaults from clobbering flags given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with experiment, parameters, seed, output, format")
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="override one parameter; values are parsed as JSON when possible")
    common.add_argument("--seed", type=int, help="PRNG seed (default 0)")
    common.add_argument("--out", help="report path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--level", type=int, help="global cap on dyadic resolution")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="chaoslab", parents=[common],
                                     description="Seeded experiments on the order-2 Rademacher chaos.")
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    for name, (_, defaults, help_text) in EXPERIMENTS.items():
        keys = ", ".join(f"{k}={json.dumps(v)}" for k, v in defaults.items())
        sub.add_parser(name, parents=[common], help=help_text, description=f"{help_text}. Parameters: {keys}")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(cfg) - {"experiment", "parameters", "seed", "output", "format", "level"})
    if unknown:
        raise UsageError(f"unknown config keys {unknown}")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("param", []), ("seed", None), ("out", None), ("format", None),
                          ("level", None), ("verbose", False), ("experiment", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    experiment, params, seed, fmt, out = args.experiment, {}, 0, "json", None
    try:
        if args.config:
            cfg = _load_config(args.config)
            experiment = experiment or cfg.get("experiment")
            if args.experiment and cfg.get("experiment") not in (None, args.experiment):
                raise UsageError(f"config is for {cfg['experiment']!r}, not {args.experiment!r}")
            params = dict(cfg.get("parameters") or {})
            seed = int(cfg.get("seed", 0))
            fmt = cfg.get("format", fmt)
            out = cfg.get("output")
            if args.level is None and cfg.get("level") is not None:
                args.level = int(cfg["level"])
        params.update(parse_params(args.param))
        seed = seed if args.seed is None else args.seed
        fmt = args.format or fmt
        out = args.out or out
        if experiment is None:
            raise UsageError("no experiment given (subcommand or config 'experiment')")
        if fmt not in ("json", "csv"):
            raise UsageError(f"format must be json or csv, got {fmt!r}")
        report, code = build_report(experiment, params, seed, args.level)
    except PreconditionError as exc:
        print(f"chaoslab: usage error: {exc}", file=sys.stderr)
        report, code = error_report(experiment, params, seed, exc, "usage"), EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any other failure is reported, not raised
        print(f"chaoslab: computational error: {exc}", file=sys.stderr)
        report, code = error_report(experiment, params, seed, exc, "computation"), EXIT_COMPUTE
    text = render(report, fmt if fmt in ("json", "csv") else "json")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
