"""Command-line interface: ``bprh {simulate,fit,gof,verify,analyze,curves}``.

Exit codes: 0 success, 1 statistical rejection (``gof --strict``) or failed
deterministic identity (``verify``), 2 usage or input errors.  The default
output directory is ``./bprh-out`` unless ``BPRH_OUT_DIR`` is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import baseline_class, parse_baseline
from .datasets import football_path
from .fit import aic_table, format_aic_table, mle_fit
from .gof import ecdf, format_gof_table, gof_suite, ks_univariate
from .models import BivariatePRH, make_model
from .simulate import DEFAULT_SEED, SAMPLERS, CalibrationError, CensoredSample, SampleFormatError, simulate_sample
from .verify import MomentCheckConfig, check_functional_equation, format_suite, reference_models, run_suite

FOOTBALL_BASELINES = ("exponential", "weibull", "rayleigh", "lfr")


class UsageError(Exception):
    pass


def _out_dir(arg: str | None) -> Path:
    d = Path(arg or os.environ.get("BPRH_OUT_DIR", "bprh-out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _model_from_args(args, required: bool = True) -> BivariatePRH | None:
    if args.params is None:
        if required:
            raise UsageError("--params is required to specify the model")
        return None
    try:
        params = [float(v) for v in args.params.split(",")]
        return make_model(parse_baseline(args.baseline), args.family, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_model_args(p: argparse.ArgumentParser, params_required: bool = True) -> None:
    p.add_argument("--family", choices=("bprhm1", "bprhm2"), default="bprhm1")
    p.add_argument("--baseline", default="weibull:1.5,1.2", help="family[:p1,p2], e.g. weibull:1.5,1.2")
    p.add_argument("--params", required=params_required, default=None, help="model parameters, comma separated")


def _load(path: str) -> CensoredSample:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"data file not found: {p}")
    return CensoredSample.from_csv(p)


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    model = _model_from_args(args)
    sampler = "literal" if args.paper_literal else args.sampler
    try:
        sample = simulate_sample(model, args.n, args.p, args.seed, sampler)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out and args.out.endswith(".csv") else _out_dir(args.out) / "sample.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    sample.to_csv(out)
    gt = float(np.mean(sample.y1 > sample.y2))
    lt = float(np.mean(sample.y1 < sample.y2))
    eq = float(np.mean(sample.y1 == sample.y2))
    c1, c2 = sample.censored_fraction()
    print(f"model       {model}")
    print(f"sampler     {sampler}   seed {args.seed}   n {sample.n}")
    print(f"regions     P(Y1>Y2) {gt:.4f}  P(Y1<Y2) {lt:.4f}  P(Y1=Y2) {eq:.4f}")
    print(f"            model    {model.region_probabilities()[0]:.4f}           "
          f"{model.region_probabilities()[1]:.4f}           {model.region_probabilities()[2]:.4f}")
    print(f"censored    Y1 {c1:.4f}  Y2 {c2:.4f}  (target p = {args.p:g})")
    print(f"wrote       {out} and {out.with_suffix('.json')}")
    return 0


def cmd_fit(args) -> int:
    sample = _load(args.data)
    name = args.baseline.partition(":")[0]
    try:
        baseline_class(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = mle_fit(args.family, name, sample, starts=args.starts, seed=args.seed, compute_se=args.se)
    d = res.to_dict()
    print(f"family {args.family}  baseline {name}  n {sample.n}")
    width = max(len(k) for k in d["params"])
    for k, v in d["params"].items():
        se = res.standard_errors.get(k) if res.standard_errors else None
        print(f"  {k:<{width}}  {v:12.6g}" + (f"  (se {se:.3g})" if se is not None else ""))
    print(f"log L {res.log_likelihood:.4f}   AIC {res.aic:.4f}   k {res.k}   converged {res.converged}")
    if args.out:
        out = Path(args.out) if args.out.endswith(".json") else _out_dir(args.out) / "fit.json"
        _dump(d, out)
        print(f"wrote {out}")
    else:
        print(json.dumps(d, indent=2))
    return 0


def cmd_gof(args) -> int:
    sample = _load(args.data)
    model = _model_from_args(args)
    reports = gof_suite(sample, model, replicates=args.replicates, seed=args.seed)
    print(format_gof_table(reports, f"{model}   n = {sample.n}"))
    if args.out:
        out = Path(args.out) if args.out.endswith(".json") else _out_dir(args.out) / "gof.json"
        _dump({"model": model.to_dict(), "reports": [r.to_dict() for r in reports]}, out)
    if args.strict and any(r.rejects(args.level) for r in reports):
        return 1
    return 0


def cmd_verify(args) -> int:
    models = reference_models()
    extra = _model_from_args(args, required=False)
    if extra is not None:
        models.append(extra)
    cfg = MomentCheckConfig(mc_size=args.mc_size, seed=args.seed, perturb=args.perturb)
    result = run_suite(models, cfg, n_triples=args.triples, identities_only=args.identities_only)
    if args.perturb:
        probes = [check_functional_equation(m, args.triples, args.seed, perturb=args.perturb) for m in models]
        for p in probes:
            p.asserted = False
        result["identities"] += [p.to_dict() for p in probes]
    print(format_suite(result))
    out = _out_dir(args.out) / "verify.json"
    _dump(result, out)
    print(f"\nwrote {out}")
    return 0 if result["identities_passed"] else 1


def _curve_rows(y: np.ndarray, theo: np.ndarray, emp: np.ndarray | None) -> str:
    lines = ["y,F_theoretical,F_empirical" if emp is not None else "y,F_theoretical"]
    for k in range(y.size):
        row = f"{float(y[k])!r},{float(theo[k])!r}"
        lines.append(row + (f",{float(emp[k])!r}" if emp is not None else ""))
    return "\n".join(lines) + "\n"


def _curves(model: BivariatePRH, sample: CensoredSample | None, n_grid: int) -> dict[str, str]:
    targets = {
        "max": (model.max_cdf, None if sample is None else np.maximum(sample.y1, sample.y2)),
        "marginal1": (lambda t: model.marginal_cdf(1, t), None if sample is None else sample.y1),
        "marginal2": (lambda t: model.marginal_cdf(2, t), None if sample is None else sample.y2),
    }
    a, b = model.baseline.support
    out = {}
    for name, (F, data) in targets.items():
        if data is not None:
            lo = max(a, 0.0) if np.isfinite(a) or data.min() >= 0 else 1.5 * data.min()
            hi = 1.5 * data.max() if data.max() > 0 else 0.0
            hi = min(hi, b) if np.isfinite(b) else hi
            y = np.linspace(lo, hi, n_grid)
            emp = ecdf(data)(y)
        else:
            y = np.asarray(model.max_quantile(np.linspace(0.001, 0.999, n_grid)))
            emp = None
        out[name] = _curve_rows(y, np.asarray(F(y)), emp)
    return out


def cmd_curves(args) -> int:
    model = _model_from_args(args)
    sample = _load(args.data) if args.data else None
    d = _out_dir(args.out)
    for name, text in _curves(model, sample, args.grid).items():
        (d / f"curve_{name}.csv").write_text(text)
        print(f"wrote {d / f'curve_{name}.csv'}")
    return 0


def cmd_analyze(args) -> int:
    path = Path(args.data) if args.data else football_path()
    if not path.exists():
        print(
            f"error: dataset not found at {path}. The football data ships with the package as "
            "bprh/data/football.csv; reinstall, or pass --data <csv with columns y1,y2>.",
            file=sys.stderr,
        )
        return 2
    sample = CensoredSample.from_csv(path)
    d = _out_dir(args.out)
    fits = []
    for name in FOOTBALL_BASELINES:
        res = mle_fit("bprhm1", name, sample, starts=args.starts, seed=args.seed)
        res.label = baseline_class(name).name
        fits.append(res)
    rows = aic_table(fits)
    print(f"BPRHM1 fits to {path.name} (n = {sample.n})\n")
    print(format_aic_table(rows))
    report = {"data": str(path), "n": sample.n, "aic_table": rows, "models": []}
    print(f"\n{'Baseline':<20} {'Variable':<11} {'K-S':>8} {'p-value':>9}")
    for res in fits:
        m = res.model
        ks = [
            ks_univariate(np.maximum(sample.y1, sample.y2), m.max_cdf, "max"),
            ks_univariate(sample.y1, lambda t, m=m: m.marginal_cdf(1, t), "marginal1"),
            ks_univariate(sample.y2, lambda t, m=m: m.marginal_cdf(2, t), "marginal2"),
        ]
        for r, lab in zip(ks, ("Max{Y1,Y2}", "Y1", "Y2")):
            print(f"{res.label:<20} {lab:<11} {r.statistic:>8.4f} {r.p_value:>9.4f}")
        for name, text in _curves(m, sample, args.grid).items():
            (d / f"football_{res.label}_{name}.csv").write_text(text)
        report["models"].append({"fit": res.to_dict(), "ks": [r.to_dict() for r in ks]})
    _dump(report, d / "football.json")
    print(f"\nwrote {d / 'football.json'} and curve CSVs in {d}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bprh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="output directory (or file)"):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
        p.add_argument("--out", default=None, help=out_help)

    p = sub.add_parser("simulate", help="draw a (censored) sample")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=float, default=0.0, help="target left-censoring fraction")
    p.add_argument("--sampler", choices=SAMPLERS, default="recipe")
    p.add_argument("--paper-literal", action="store_true", help="literal max-then-ratio recipe (marginal quantile in the ratio step)")
    common(p, "CSV path or output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="maximum likelihood fit")
    p.add_argument("--family", choices=("bprhm1", "bprhm2"), default="bprhm1")
    p.add_argument("--baseline", required=True, help="baseline family name")
    p.add_argument("--data", required=True)
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--se", action="store_true", help="finite-difference standard errors")
    common(p, "JSON path or output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", help="K-S goodness-of-fit suite")
    _add_model_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--strict", action="store_true", help="exit 1 if any test rejects")
    p.add_argument("--level", type=float, default=0.05)
    common(p, "JSON path or output directory")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("verify", help="characterization checks")
    _add_model_args(p, params_required=False)
    p.add_argument("--perturb", type=float, default=0.0, help="relative perturbation of the constants")
    p.add_argument("--mc-size", type=int, default=100_000)
    p.add_argument("--triples", type=int, default=1000)
    p.add_argument("--identities-only", action="store_true")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="football data: fits, AIC, K-S and curves")
    p.add_argument("--data", default=None, help="defaults to the bundled dataset")
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--grid", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("curves", help="theoretical (and empirical) cdf series")
    _add_model_args(p)
    p.add_argument("--data", default=None)
    p.add_argument("--grid", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SampleFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
