"""platelab command line.

    platelab resolvent-scan --sigma 1 --omega 0
    platelab region-map --omega 0 --sigma-grid 0.1:1.5:0.1
    platelab witness --sigma 0.75 --omega 0
    platelab evolve --sigma 0.25 --omega 0 --init worst-case --modes 10000
    platelab inequalities --sigma 1 --omega 0
    platelab verify

Exit status: 0 all verdicts pass, 2 at least one mismatch, 1 usage or runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import List, Optional

import numpy as np

from platelab import __version__
from platelab.csvout import CsvReport
from platelab.errors import PlateLabError, RangeError
from platelab.evolution import (
    dyadic_times,
    fit_decay,
    random_state,
    simulate_decay,
    smoothed_random_state,
    worst_case_decay,
)
from platelab.inequalities import ACCEPTANCE_ITEMS, ITEMS, lemma_ratio_scan
from platelab.resolvent import SearchParams
from platelab.scaling import (
    MISMATCH,
    SweepConfig,
    classify_regularity,
    scan_and_verify,
)
from platelab.spectrum import EigenModel
from platelab.verify import run_all
from platelab.witness import geometric_indices, ratio_test, witness_points

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_model(spec: str) -> EigenModel:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "power":
            if not rest:
                return EigenModel.power_law()
            c, p = (float(x) for x in rest.split(","))
            return EigenModel.power_law(c, p)
        if kind == "list":
            return EigenModel.from_list([float(x) for x in rest.split(",") if x.strip()])
        if kind == "file":
            return EigenModel.from_file(rest)
    except PlateLabError:
        raise
    except (ValueError, OSError) as exc:
        raise UsageError(f"bad model spec {spec!r}: {exc}") from None
    raise UsageError(f"bad model spec {spec!r}; use power:c,p, list:v1,v2,... or file:PATH")


def parse_grid(spec: str) -> List[float]:
    """'a:b:step' (inclusive), 'v1,v2,...' or a single value."""
    spec = spec.strip()
    try:
        if ":" in spec:
            parts = [float(x) for x in spec.split(":")]
            if len(parts) != 3:
                raise ValueError("expected a:b:step")
            a, b, step = parts
            if step <= 0 or b < a:
                raise ValueError("need step > 0 and a <= b")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + k * step, 12) for k in range(count)]
        values = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"malformed grid {spec!r}: {exc}") from None
    if not values:
        raise UsageError(f"empty grid {spec!r}")
    return values


def read_config_file(path: str) -> List[str]:
    """key=value lines turned into ``--key value`` tokens."""
    tokens: list = []
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep or not key.strip():
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                flag = "--" + key.strip().replace("_", "-")
                value = value.strip()
                if value.lower() in ("true", "yes", "on"):
                    tokens.append(flag)
                else:
                    tokens += [flag, value]
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    return tokens


def expand_config(argv: List[str]) -> List[str]:
    """Splice config-file tokens in front of the explicit flags so flags win."""
    out = list(argv)
    for i, tok in enumerate(out):
        if tok == "--config" or tok.startswith("--config="):
            if tok == "--config":
                if i + 1 >= len(out):
                    raise UsageError("--config needs a path")
                path = out[i + 1]
                del out[i:i + 2]
            else:
                path = tok.split("=", 1)[1]
                del out[i]
            cmd = next((j for j, t in enumerate(out) if not t.startswith("-")), None)
            if cmd is None:
                raise UsageError("--config given without a subcommand")
            return out[:cmd + 1] + read_config_file(path) + out[cmd + 1:]
    return out


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", default="power:1,2", help="power:c,p | list:v1,v2,... | file:PATH")
    common.add_argument("--lambda-min", type=float, default=16.0)
    common.add_argument("--lambda-max", type=float, default=None, help="default 2^24 (2^20 for inequalities)")
    common.add_argument("--points-per-octave", type=_positive_int, default=4)
    common.add_argument("--fit", choices=("envelope", "raw"), default="envelope")
    common.add_argument("--tol", type=float, default=0.1)
    common.add_argument("--tol-analytic", type=float, default=0.05)
    common.add_argument("--rho", type=float, default=64.0)
    common.add_argument("--n-max", type=_positive_int, default=10**6)
    common.add_argument("--threads", type=_positive_int, default=None, help="default: available cores")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-o", "--output", default="-", help="CSV path, '-' for stdout")
    common.add_argument("--config", help="key=value file; explicit flags override it")

    p = _Parser(prog="platelab", description="Modal resolvent and decay laboratory for thermoelastic plates.")
    p.add_argument("--version", action="version", version=f"platelab {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("resolvent-scan", parents=[common], help="sweep lambda and fit the resolvent exponent")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--omega", type=float, default=0.0)

    s = sub.add_parser("region-map", parents=[common], help="classification and measurement over a sigma grid")
    s.add_argument("--sigma-grid", default="0.1:1.5:0.1")
    s.add_argument("--omega", default="0", help="value or grid")

    s = sub.add_parser("witness", parents=[common], help="lower-bound sequences and ratio test")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--omega", type=float, default=0.0)
    s.add_argument("--n-first", type=_positive_int, default=20)
    s.add_argument("--n-last", type=_positive_int, default=160)
    s.add_argument("--n-per-octave", type=_positive_int, default=4)

    s = sub.add_parser("evolve", parents=[common], help="time decay of the phase norm")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--omega", type=float, default=0.0)
    s.add_argument("--modes", type=_positive_int, default=64)
    s.add_argument("--t-min", type=float, default=2.0**-4)
    s.add_argument("--t-max", type=float, default=1e4)
    s.add_argument("--init", choices=("smoothed", "random", "worst-case"), default="smoothed")
    s.add_argument("--kind", choices=("polynomial", "exponential"), default="polynomial")
    s.add_argument("--tol-decay", type=float, default=0.4)

    s = sub.add_parser("inequalities", parents=[common], help="lemma ratio scans")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--omega", type=float, default=0.0)
    s.add_argument("--items", default=None, help="comma list; default: acceptance items valid for (sigma, omega)")
    s.add_argument("--trials", type=_positive_int, default=8)

    s = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    s.add_argument("--draws", type=_positive_int, default=10_000)
    return p


def _sweep(args, default_max: float = 2.0**24) -> SweepConfig:
    try:
        return SweepConfig(
            lambda_min=args.lambda_min,
            lambda_max=args.lambda_max if args.lambda_max is not None else default_max,
            points_per_octave=args.points_per_octave,
            fit=args.fit,
            tol=args.tol,
            tol_analytic=args.tol_analytic,
            search=SearchParams(rho=args.rho, n_max=args.n_max),
            threads=args.threads or os.cpu_count(),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_echo(args) -> dict:
    skip = {"output", "config", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def cmd_resolvent_scan(args, model, out) -> int:
    rep = scan_and_verify(model, args.sigma, args.omega, _sweep(args))
    csv = CsvReport("resolvent-scan", _config_echo(args), args.seed, ["lambda", "norm", "argmax_mode", "identity_residual"])
    for s in rep.samples:
        csv.add(s.lam, s.norm, s.argmax_mode, s.identity_residual)
    csv.note("fit_window", f"{rep.fit.lambda_window[0]:.6g}..{rep.fit.lambda_window[1]:.6g}")
    csv.note("slope", rep.fit.slope)
    csv.note("phi_est", rep.phi_est)
    csv.note("r_squared", rep.fit.r_squared)
    csv.note("predicted_regularity", rep.prediction.regularity)
    csv.note("phi_theory", rep.prediction.phi)
    csv.note("sharp", rep.prediction.sharp)
    csv.note("bounded", rep.bounded)
    csv.note("verdict", rep.verdict)
    csv.write(args.output, out)
    return EXIT_MISMATCH if rep.verdict == MISMATCH else EXIT_OK


def cmd_region_map(args, model, out) -> int:
    sigmas = parse_grid(args.sigma_grid)
    omegas = parse_grid(args.omega)
    if any(w < 0 for w in omegas):
        raise UsageError("omega must be nonnegative")
    cfg = _sweep(args)
    csv = CsvReport(
        "region-map",
        _config_echo(args),
        args.seed,
        ["sigma", "omega", "predicted_regularity", "phi_theory", "phi_measured", "r_squared", "verdict"],
    )
    code = EXIT_OK
    for w in omegas:
        for s in sigmas:
            rep = scan_and_verify(model, s, w, cfg)
            csv.add(s, w, rep.prediction.regularity, rep.prediction.phi, rep.phi_est, rep.fit.r_squared, rep.verdict)
            if rep.verdict == MISMATCH:
                code = EXIT_MISMATCH
    csv.write(args.output, out)
    return code


def cmd_witness(args, model, out) -> int:
    ns = geometric_indices(args.n_first, args.n_last, args.n_per_octave)
    pts = witness_points(args.sigma, args.omega, ns, model)
    rt = ratio_test(pts)
    csv = CsvReport("witness", _config_echo(args), args.seed, ["n", "eta", "lambda", "abs_mu", "abs_nu", "lower_bound", "ratio"])
    for p, r in zip(pts, rt.ratios):
        csv.add(p.n, p.eta, p.lam, abs(p.mu), abs(p.nu), p.lower_bound, r)
    csv.note("predicted_exponent", pts[0].predicted_exponent)
    csv.note("max_rel_spread", rt.max_rel_spread)
    csv.note("converged", rt.converged)
    # for omega = 0 and sigma > 1 the predicted exponent is descriptive only
    descriptive = args.omega == 0 and args.sigma > 1
    csv.note("descriptive_only", descriptive)
    csv.write(args.output, out)
    return EXIT_OK if rt.converged or descriptive else EXIT_MISMATCH


def cmd_evolve(args, model, out) -> int:
    if not 0 < args.t_min < args.t_max:
        raise UsageError("need 0 < t-min < t-max")
    times = dyadic_times(args.t_min, args.t_max, args.points_per_octave)
    if args.init == "worst-case":
        curve = worst_case_decay(model, args.sigma, args.omega, args.modes, times)
    else:
        make = smoothed_random_state if args.init == "smoothed" else random_state
        state = make(model, args.modes, args.omega, seed=args.seed)
        curve = simulate_decay(model, args.sigma, args.omega, state, times)
    csv = CsvReport("evolve", _config_echo(args), args.seed, ["t", "norm"])
    for t, v in curve:
        csv.add(t, v)
    norms = np.array([v for _, v in curve])
    monotone = bool(np.all(np.diff(norms) <= 1e-12 * norms[0]))
    code = EXIT_OK if monotone else EXIT_MISMATCH
    rate = fit_decay(curve, args.kind)
    csv.note("fit_kind", args.kind)
    csv.note("decay_exponent" if args.kind == "polynomial" else "decay_rate", rate)
    csv.note("monotone", monotone)
    try:
        pred = classify_regularity(args.sigma, args.omega)
    except RangeError:
        pred = None
    if pred is not None and pred.poly_rate is not None and args.kind == "polynomial":
        csv.note("poly_rate_theory", pred.poly_rate)
        if args.init == "worst-case":
            ok = abs(rate - pred.poly_rate) <= args.tol_decay
            csv.note("verdict", "match" if ok else "mismatch")
            if not ok:
                code = EXIT_MISMATCH
    csv.write(args.output, out)
    return code


def cmd_inequalities(args, model, out) -> int:
    if args.items:
        items = [x.strip() for x in args.items.split(",") if x.strip()]
        for it in items:
            if it not in ITEMS:
                raise UsageError(f"unknown item {it!r}; known: {', '.join(ITEMS)}")
    else:
        items = []
        for it in ACCEPTANCE_ITEMS:
            try:
                ITEMS[it].check_range(args.sigma, args.omega)
                items.append(it)
            except RangeError:
                pass
    cfg = _sweep(args, default_max=2.0**20)
    csv = CsvReport("inequalities", _config_echo(args), args.seed, ["item_id", "lambda", "ratio"])
    code = EXIT_OK
    for it in items:
        rep = lemma_ratio_scan(it, model, args.sigma, args.omega, cfg, seed=args.seed, trials=args.trials)
        for lam, r in rep.rows:
            csv.add(it, lam, r)
        csv.note(f"{it} sup_ratio", rep.sup_ratio)
        csv.note(f"{it} argmax_lambda", rep.argmax_lambda)
        csv.note(f"{it} bounded", rep.bounded_verdict)
        if not rep.bounded_verdict:
            code = EXIT_MISMATCH
    csv.write(args.output, out)
    return code


def cmd_verify(args, model, out) -> int:
    results = run_all(draws=args.draws, seed=args.seed, model=model)
    for r in results:
        print(r.line(), file=out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


COMMANDS = {
    "resolvent-scan": cmd_resolvent_scan,
    "region-map": cmd_region_map,
    "witness": cmd_witness,
    "evolve": cmd_evolve,
    "inequalities": cmd_inequalities,
    "verify": cmd_verify,
}


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(expand_config(list(sys.argv[1:] if argv is None else argv)))
        model = parse_model(args.model)
        return COMMANDS[args.command](args, model, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR
    except (PlateLabError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
