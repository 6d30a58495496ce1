"""Batch front end: run configured check suites, evaluate single operators,
list available checks.

Config files are INI-style.  Sections and keys, all optional except
[run] checks:

    [run]
    dimension = 2
    checks = bbm_limit, beta_identity
    output_dir = reports
    formats = json, csv

    [quadrature]
    rel_tol = 1e-3
    annuli_per_decade = 4
    points_per_dim = 16

    [function]
    family = smooth_bump
    center = 0, 0
    scale = 1.0
    amplitude = 1.0

    [weight]
    kind = constant | radial_power | power_plus_one
    value = 1.0
    beta = 0.5
    pole = 0, 0

    [omega]
    profile = cosine_harmonic | sign_profile | odd_polynomial
    k = 1
    amplitude = 1.0
    cells = 64
    coefficients = 1.0, -0.5

    [params]
    alpha = 0.5          p = 1.5            d = 2.0
    K = 10               cube_side = 2.0    variant = avg_11
    a1 = 0.8             a2 = 0.8           separation = 1.0
    bbm_octaves = 10     ahlfors_beta = 0.5
    outer_cells = 8      cells = 12

Exit codes: 0 all non-degenerate checks pass, 1 some check fails or errors,
2 config/usage error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import verify
from .functions import FAMILIES, Cube, TestFunction
from .norms import lorentz_norm, lp_norm
from .operators import (
    GradientMagnitude,
    SphereSymbol,
    TruncationGrid,
    frac_derivative,
    maximal_Mwc,
    potential_Tw,
    riesz_potential,
    rough_maximal,
)
from .quadrature import QuadratureScheme
from .verify import CHECK_ANCHORS
from .weights import Weight

EVAL_OPERATORS = ("riesz", "frac_derivative", "tw", "rough_maximal", "mwc", "lp_norm", "lorentz")


class ConfigError(ValueError):
    """Raised with a message naming the offending section and field."""


@dataclass
class RunConfig:
    dimension: int
    checks: list
    function: TestFunction
    weight: Weight
    omega: SphereSymbol
    scheme: QuadratureScheme
    output_dir: Path
    formats: tuple
    params: dict = field(default_factory=dict)


def _floats(raw: str, where: str) -> tuple:
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{where} must be a list of numbers, got {raw!r}")


def _get_float(section, key: str, default: float, where: str) -> float:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where} {key} must be a number, got {raw!r}")


DEFAULT_PARAMS = {
    "alpha": 0.5,
    "p": 1.5,
    "d": None,  # defaults to the dimension
    "K": 10.0,
    "cube_side": 2.0,
    "a1": None,  # defaults to 0.8 n, keeping a1 + a2 > n at every dimension
    "a2": None,
    "separation": 1.0,
    "bbm_octaves": 10.0,
    "ahlfors_beta": 0.5,
    "outer_cells": 8.0,
    "cells": 12.0,
}


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "run" not in parser:
        raise ConfigError("missing [run] section")
    run = parser["run"]

    try:
        n = int(run.get("dimension", "2"))
    except ValueError:
        raise ConfigError(f"[run] dimension must be an integer, got {run.get('dimension')!r}")
    if n < 1:
        raise ConfigError(f"[run] dimension must be positive, got {n}")

    raw_checks = run.get("checks", "")
    checks = [tok.strip() for tok in raw_checks.replace(",", " ").split() if tok.strip()]
    for cid in checks:
        if cid not in CHECK_ANCHORS:
            known = ", ".join(sorted(CHECK_ANCHORS))
            raise ConfigError(f"[run] checks: unknown check {cid!r}; known: {known}")
    seen = set()
    checks = [c for c in checks if not (c in seen or seen.add(c))]

    formats = tuple(tok.strip() for tok in run.get("formats", "json").replace(",", " ").split() if tok.strip())
    for fmt in formats:
        if fmt not in ("json", "csv"):
            raise ConfigError(f"[run] formats must be a subset of json, csv; got {fmt!r}")
    output_dir = Path(run.get("output_dir", "reports"))

    quad = parser["quadrature"] if "quadrature" in parser else {}
    scheme = QuadratureScheme(
        rel_tol=_get_float(quad, "rel_tol", 1e-3, "[quadrature]"),
        annuli_per_decade=int(_get_float(quad, "annuli_per_decade", 4, "[quadrature]")),
        points_per_dim=int(_get_float(quad, "points_per_dim", 16, "[quadrature]")),
    )

    fsec = parser["function"] if "function" in parser else {}
    family = fsec.get("family", "smooth_bump")
    if family not in FAMILIES:
        raise ConfigError(f"[function] family must be one of {FAMILIES}, got {family!r}")
    center = _floats(fsec.get("center", ", ".join(["0"] * n)), "[function] center")
    if len(center) != n:
        raise ConfigError(f"[function] center has {len(center)} coordinates, dimension is {n}")
    scale = _get_float(fsec, "scale", 1.0, "[function]")
    if scale <= 0.0:
        raise ConfigError(f"[function] scale must be positive, got {scale}")
    amplitude = _get_float(fsec, "amplitude", 1.0, "[function]")
    function = TestFunction(family, center, scale, amplitude)

    wsec = parser["weight"] if "weight" in parser else {}
    kind = wsec.get("kind", "constant")
    if kind == "constant":
        value = _get_float(wsec, "value", 1.0, "[weight]")
        if value <= 0.0:
            raise ConfigError(f"[weight] value must be positive, got {value}")
        weight = Weight.constant(n, value)
    elif kind in ("radial_power", "power_plus_one"):
        beta = _get_float(wsec, "beta", 0.5, "[weight]")
        if not 0.0 <= beta < n:
            raise ConfigError(f"[weight] beta must sit in [0, {n}), got {beta}")
        pole = _floats(wsec.get("pole", ", ".join(["0"] * n)), "[weight] pole")
        if len(pole) != n:
            raise ConfigError(f"[weight] pole has {len(pole)} coordinates, dimension is {n}")
        ctor = Weight.radial_power if kind == "radial_power" else Weight.power_plus_one
        weight = ctor(pole, beta)
    else:
        raise ConfigError(f"[weight] kind must be constant, radial_power or power_plus_one, got {kind!r}")

    osec = parser["omega"] if "omega" in parser else {}
    profile = osec.get("profile", "cosine_harmonic" if n == 2 else "odd_polynomial")
    oamp = _get_float(osec, "amplitude", 1.0, "[omega]")
    if profile == "cosine_harmonic":
        omega = SphereSymbol.cosine_harmonic(k=int(_get_float(osec, "k", 1, "[omega]")), amplitude=oamp)
    elif profile == "sign_profile":
        omega = SphereSymbol.sign_profile(cells=int(_get_float(osec, "cells", 64, "[omega]")), amplitude=oamp)
    elif profile == "odd_polynomial":
        coeffs = _floats(osec.get("coefficients", "1.0"), "[omega] coefficients")
        omega = SphereSymbol.odd_polynomial(list(coeffs), amplitude=oamp)
    else:
        raise ConfigError(f"[omega] profile unknown: {profile!r}")

    psec = parser["params"] if "params" in parser else {}
    params = dict(DEFAULT_PARAMS)
    params["variant"] = "avg_11"
    fallbacks = {"d": float(n), "a1": 0.8 * n, "a2": 0.8 * n}
    for key in DEFAULT_PARAMS:
        default = fallbacks.get(key, params[key])
        params[key] = _get_float(psec, key, default, "[params]")
    if "variant" in psec:
        params["variant"] = psec.get("variant")

    alpha = params["alpha"]
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"[params] alpha must sit in (0, 1), got {alpha}")
    needs_pd = {"hedberg_split", "sobolev_mapping"} & set(checks)
    if needs_pd and not 1.0 < params["p"] < params["d"]:
        raise ConfigError(
            f"[params] need 1 < p < d, got p={params['p']}, d={params['d']}"
        )
    if params["variant"] not in verify.POINCARE_VARIANTS:
        raise ConfigError(
            f"[params] variant must be one of {verify.POINCARE_VARIANTS}, got {params['variant']!r}"
        )
    if not 0.0 < params["ahlfors_beta"] < 1.0:
        raise ConfigError(f"[params] ahlfors_beta must sit in (0, 1), got {params['ahlfors_beta']}")
    if params["K"] < 1:
        raise ConfigError(f"[params] K must be at least 1, got {params['K']}")

    return RunConfig(
        dimension=n,
        checks=checks,
        function=function,
        weight=weight,
        omega=omega,
        scheme=scheme,
        output_dir=output_dir,
        formats=formats,
        params=params,
    )


# -- check dispatch ------------------------------------------------------------


def _build_check(rc: RunConfig, check_id: str):
    f, w, n = rc.function, rc.weight, rc.dimension
    p = rc.params
    alpha = p["alpha"]
    e0 = np.zeros(n)
    e0[0] = 1.0
    off_center = np.asarray(f.support_center) + 0.1 * f.support_radius * e0
    if check_id == "subrepresentation_identity":
        return verify.check_subrepresentation_identity(f, w, scheme=rc.scheme)
    if check_id == "rough_subrepresentation":
        return verify.check_rough_subrepresentation(f, w, rc.omega, scheme=rc.scheme)
    if check_id == "fractional_domination":
        return verify.check_fractional_domination(f, alpha, rc.omega, scheme=rc.scheme)
    if check_id == "lemma_domination":
        return verify.check_lemma_domination(f, alpha, scheme=rc.scheme)
    if check_id == "poincare_bbm":
        Q = Cube(tuple(f.support_center), p["cube_side"])
        return verify.check_poincare_bbm(
            f, Q, alpha, variant=p["variant"], scheme=rc.scheme, outer_cells=int(p["outer_cells"])
        )
    if check_id == "identity_fractional":
        return verify.check_identity_fractional(f, w, alpha, scheme=rc.scheme)
    if check_id == "rough_fractional":
        return verify.check_rough_fractional(f, w, alpha, rc.omega, scheme=rc.scheme)
    if check_id == "annuli_absorption":
        return verify.check_annuli_absorption(GradientMagnitude(f), off_center, int(p["K"]), scheme=rc.scheme)
    if check_id == "beta_identity":
        x1 = np.zeros(n)
        x2 = p["separation"] * e0
        return verify.check_beta_identity(n, p["a1"], p["a2"], x1, x2, scheme=rc.scheme)
    if check_id == "hedberg_split":
        return verify.check_hedberg_split(f, w, p["p"], p["d"], off_center, scheme=rc.scheme)
    if check_id == "sobolev_mapping":
        return verify.check_sobolev_mapping(
            [f], w, p["p"], p["d"], scheme=rc.scheme, cells=int(p["cells"])
        )
    if check_id == "bbm_limit":
        alphas = [1.0 - 2.0**-k for k in range(1, int(p["bbm_octaves"]) + 1)]
        return verify.check_bbm_limit(n, alphas)
    if check_id == "lower_ahlfors":
        return verify.check_lower_ahlfors(beta=p["ahlfors_beta"])
    raise ConfigError(f"[run] checks: unknown check {check_id!r}")


@dataclass
class CheckFailure:
    check_id: str
    error: str


def _run_one(rc: RunConfig, check_id: str):
    try:
        return _build_check(rc, check_id)
    except Exception as exc:  # recorded, never aborts the batch
        return CheckFailure(check_id, f"{type(exc).__name__}: {exc}")


def _resolve_threads(flag: Optional[int]) -> int:
    env = os.environ.get("SUBREP_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SUBREP_THREADS must be an integer, got {env!r}")
    if flag is not None:
        return max(1, flag)
    return os.cpu_count() or 1


CSV_COLUMNS = (
    "check_id",
    "paper_anchor",
    "config_digest",
    "sample_index",
    "point",
    "lhs",
    "rhs",
    "ratio",
    "empirical_constant",
    "theoretical_constant",
    "pass",
    "error_budget",
)


def _write_csv(path: Path, report) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i, s in enumerate(report.samples):
            writer.writerow(
                [
                    report.check_id,
                    report.paper_anchor,
                    report.config_digest,
                    i,
                    "|".join(str(c) for c in s.point),
                    str(s.lhs),
                    str(s.rhs),
                    str(s.ratio),
                    str(report.empirical_constant),
                    "" if report.theoretical_constant is None else str(report.theoretical_constant),
                    report.passed,
                    str(report.error_budget),
                ]
            )


def _write_outputs(rc: RunConfig, results: list) -> dict:
    rc.output_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for res in results:
        if isinstance(res, CheckFailure):
            rows.append(
                {"check_id": res.check_id, "pass": False, "error": res.error, "degenerate": False}
            )
            if "json" in rc.formats:
                blob = json.dumps(rows[-1], indent=2, sort_keys=True) + "\n"
                (rc.output_dir / f"{res.check_id}.json").write_text(blob)
            continue
        rows.append(
            {
                "check_id": res.check_id,
                "paper_anchor": res.paper_anchor,
                "pass": res.passed,
                "degenerate": res.degenerate,
                "empirical_constant": res.empirical_constant,
                "config_digest": res.config_digest,
            }
        )
        if "json" in rc.formats:
            blob = json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n"
            (rc.output_dir / f"{res.check_id}.json").write_text(blob)
        if "csv" in rc.formats:
            _write_csv(rc.output_dir / f"{res.check_id}.csv", res)
    summary = {"checks": rows, "all_pass": all(r["pass"] or r.get("degenerate") for r in rows)}
    (rc.output_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_command(args) -> int:
    try:
        rc = load_config(args.config)
        threads = _resolve_threads(args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    results = {}
    if rc.checks:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {cid: pool.submit(_run_one, rc, cid) for cid in rc.checks}
        results = {cid: fut.result() for cid, fut in futures.items()}
    ordered = [results[cid] for cid in sorted(results)]
    summary = _write_outputs(rc, ordered)
    for row in summary["checks"]:
        tag = "PASS" if row["pass"] else ("SKIP" if row.get("degenerate") else "FAIL")
        extra = f"  error: {row['error']}" if "error" in row else ""
        print(f"{tag:4s}  {row['check_id']}{extra}")
    print(f"{len(summary['checks'])} checks, all_pass={summary['all_pass']}")
    exit_bad = any(
        not row["pass"] and not row.get("degenerate", False) for row in summary["checks"]
    )
    return 1 if exit_bad else 0


# -- single-operator evaluation --------------------------------------------------


def _eval_function(args) -> TestFunction:
    n = args.dimension
    center = _floats(args.center, "--center") if args.center else tuple([0.0] * n)
    if len(center) != n:
        raise ConfigError(f"--center has {len(center)} coordinates, --dimension is {n}")
    if args.scale <= 0.0:
        raise ConfigError(f"--scale must be positive, got {args.scale}")
    if args.family not in FAMILIES:
        raise ConfigError(f"--family must be one of {FAMILIES}, got {args.family!r}")
    return TestFunction(args.family, center, args.scale, args.amplitude)


def _eval_weight(args) -> Weight:
    n = args.dimension
    if args.weight == "constant":
        return Weight.constant(n, args.weight_value)
    if args.weight in ("radial_power", "power_plus_one"):
        if not 0.0 <= args.beta < n:
            raise ConfigError(f"--beta must sit in [0, {n}), got {args.beta}")
        pole = _floats(args.pole, "--pole") if args.pole else tuple([0.0] * n)
        ctor = Weight.radial_power if args.weight == "radial_power" else Weight.power_plus_one
        return ctor(pole, args.beta)
    raise ConfigError(f"--weight unknown: {args.weight!r}")


def _eval_omega(args) -> SphereSymbol:
    if args.profile == "cosine_harmonic":
        return SphereSymbol.cosine_harmonic(k=args.k, amplitude=args.omega_amplitude)
    if args.profile == "sign_profile":
        return SphereSymbol.sign_profile(amplitude=args.omega_amplitude)
    if args.profile == "odd_polynomial":
        return SphereSymbol.odd_polynomial([1.0], amplitude=args.omega_amplitude)
    raise ConfigError(f"--profile unknown: {args.profile!r}")


def eval_command(args) -> int:
    try:
        scheme = QuadratureScheme(
            rel_tol=args.rel_tol,
            annuli_per_decade=args.annuli_per_decade,
            points_per_dim=args.points_per_dim,
        )
        f = _eval_function(args)
        n = args.dimension
        x = np.asarray(_floats(args.x, "--x") if args.x else f.support_center, dtype=float)
        if x.size != n:
            raise ConfigError(f"--x has {x.size} coordinates, --dimension is {n}")
        op = args.operator
        if op == "riesz":
            alpha = args.alpha if args.alpha is not None else 1.0
            if not 0.0 < alpha < n:
                raise ConfigError(f"--alpha must sit in (0, {n}) for riesz, got {alpha}")
            value = riesz_potential(f, alpha, x, scheme)
            err = abs(value) * scheme.rel_tol
        elif op == "frac_derivative":
            alpha = args.alpha if args.alpha is not None else 0.5
            if not 0.0 < alpha < 1.0:
                raise ConfigError(f"--alpha must sit in (0, 1), got {alpha}")
            value = frac_derivative(f, alpha, x, scheme)
            err = abs(value) * scheme.rel_tol
        elif op == "tw":
            alpha = args.alpha if args.alpha is not None else 1.0
            if not 0.0 < alpha <= 1.0:
                raise ConfigError(f"--alpha must sit in (0, 1] for tw, got {alpha}")
            value = potential_Tw(f, _eval_weight(args), alpha, x, scheme)
            err = abs(value) * scheme.rel_tol
        elif op == "rough_maximal":
            grid = TruncationGrid.covering(f, x, octaves=args.octaves)
            value = rough_maximal(f, _eval_omega(args), x, grid, scheme)
            err = abs(value) * scheme.rel_tol
        elif op == "mwc":
            value = maximal_Mwc(f, _eval_weight(args), x, None, scheme)
            err = abs(value) * scheme.rel_tol
        elif op == "lp_norm":
            value = lp_norm(f, _eval_weight(args), args.p, f.support_box(pad=1.0), scheme)
            err = abs(value) * scheme.rel_tol
        elif op == "lorentz":
            q = args.q if args.q is not None else 1.0
            side = args.cube_side if args.cube_side is not None else 2.0 * f.support_radius
            Q = Cube(tuple(f.support_center), side)
            value = lorentz_norm(f, args.p, q, Q, samples=args.samples)
            err = 2.0 * abs(value) / math.sqrt(args.samples)
        else:
            raise ConfigError(f"unknown operator {op!r}")
    except (ConfigError, ValueError) as exc:
        print(f"eval error: {exc}", file=sys.stderr)
        return 2
    print(f"{value!r} +/- {err:.3g}")
    return 0


def list_checks_command(_args) -> int:
    for cid in sorted(CHECK_ANCHORS):
        print(f"{cid:28s} {CHECK_ANCHORS[cid]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subrep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the checks requested by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=run_command)

    p_eval = sub.add_parser("eval", help="evaluate a single operator at a point")
    p_eval.add_argument("operator", choices=EVAL_OPERATORS)
    p_eval.add_argument("--dimension", type=int, default=2)
    p_eval.add_argument("--family", default="smooth_bump")
    p_eval.add_argument("--center", default=None)
    p_eval.add_argument("--scale", type=float, default=1.0)
    p_eval.add_argument("--amplitude", type=float, default=1.0)
    p_eval.add_argument("--x", default=None)
    p_eval.add_argument("--alpha", type=float, default=None)
    p_eval.add_argument("--p", type=float, default=2.0)
    p_eval.add_argument("--q", type=float, default=None)
    p_eval.add_argument("--weight", default="constant")
    p_eval.add_argument("--weight-value", type=float, default=1.0)
    p_eval.add_argument("--beta", type=float, default=0.5)
    p_eval.add_argument("--pole", default=None)
    p_eval.add_argument("--profile", default="cosine_harmonic")
    p_eval.add_argument("--k", type=int, default=1)
    p_eval.add_argument("--omega-amplitude", type=float, default=1.0)
    p_eval.add_argument("--octaves", type=int, default=10)
    p_eval.add_argument("--samples", type=int, default=100_000)
    p_eval.add_argument("--cube-side", type=float, default=None)
    p_eval.add_argument("--rel-tol", type=float, default=1e-3)
    p_eval.add_argument("--annuli-per-decade", type=int, default=4)
    p_eval.add_argument("--points-per-dim", type=int, default=16)
    p_eval.set_defaults(func=eval_command)

    p_list = sub.add_parser("list-checks", help="list check ids and their anchors")
    p_list.set_defaults(func=list_checks_command)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
