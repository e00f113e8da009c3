"""Command-line interface: ``sample``, ``estimate``, ``moments`` and ``simulate``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 estimation failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from .bootstrap import SCHEMES, BootstrapConfig, bootstrap_bias_reduce
from .estimators import estimate, mle_numeric
from .exceptions import DomainError, EstimationFailed, MomentUndefined
from .family import NAMED_MODELS, FamilySpec, Params, from_named, named_spec, to_named
from .moments import log_moment, moment, population_h
from .sampling import SeededStream, sample
from .simulation import (aggregate, default_threads, fmt, read_config, simulate_estimates, write_estimates,
                         write_metrics)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ESTIMATION = 0, 1, 2, 3
GENERIC = "family"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_params(text: str | None) -> dict:
    """Parse ``k=v,k=v`` into a dict of floats."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad parameter {item!r}; expected key=value")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"parameter {key.strip()!r} is not a number: {value!r}") from None
    return out


def resolve_model(name: str, params: dict, need_params: bool = True):
    """Return ``(spec, params or None, named or None)`` for a CLI model."""
    try:
        if name == GENERIC:
            if "s" not in params or "delta" not in params:
                raise UsageError("model 'family' needs s and delta")
            delta = params["delta"]
            spec = FamilySpec(params["s"], int(delta) if delta in (0.0, 1.0) else delta)
            if not need_params:
                return spec, None, None
            if "mu" not in params or "sigma" not in params:
                raise UsageError("model 'family' needs mu and sigma")
            return spec, Params(params["mu"], params["sigma"]), None
        if name not in NAMED_MODELS:
            raise UsageError(f"unknown model {name!r}; choose from {GENERIC}, {', '.join(NAMED_MODELS)}")
        if not need_params:
            return named_spec(name, params), None, name
        model = from_named(name, params)
        return model.spec, model.params, name
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def read_data(path) -> list[float]:
    """One positive real per line; blank lines and ``#`` comments are skipped."""
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise DataError(f"line {lineno}: not a number: {line!r}") from None
        if not (v > 0 and math.isfinite(v)):
            raise DataError(f"line {lineno}: value must be a positive finite real, got {line!r}")
        values.append(v)
    if len(values) < 2:
        raise DataError(f"need at least 2 observations, found {len(values)}")
    return values


def _csv(rows, out):
    w = csv.writer(out, lineterminator="\r\n")
    for row in rows:
        w.writerow(row)


def cmd_sample(args, out):
    spec, params, _ = resolve_model(args.model, parse_params(args.params))
    if args.n < 1:
        raise UsageError("--n must be positive")
    x = sample(spec, params, args.n, SeededStream(args.seed))
    text = "".join(fmt(v) + "\n" for v in x)
    if args.out in (None, "-"):
        out.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")


def cmd_estimate(args, out):
    spec, _, named = resolve_model(args.model, parse_params(args.params), need_params=False)
    if not 0 < args.ci < 1:
        raise UsageError("--ci must lie in (0, 1)")
    data = read_data(args.data)
    rep = estimate(data, spec, named=named, ci_level=args.ci)
    header = ["n", "mu", "sigma", "se_mu", "se_sigma", "cov_mu_mu", "cov_mu_sigma", "cov_sigma_sigma",
              "ci_level", "mu_lower", "mu_upper", "sigma_lower", "sigma_upper"]
    row = [fmt(rep.n), fmt(rep.mu_hat), fmt(rep.sigma_hat)]
    if rep.covariance is None:
        row += [""] * 5 + [fmt(rep.ci_level)] + [""] * 4
    else:
        c = rep.covariance
        row += [fmt(v) for v in (*rep.std_errors, c[0, 0], c[0, 1], c[1, 1], rep.ci_level,
                                 *rep.ci_mu, *rep.ci_sigma)]
    if rep.native_estimates:
        header += list(rep.native_estimates)
        row += [fmt(v) for v in rep.native_estimates.values()]
    if args.bootstrap:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = bootstrap_bias_reduce(data, spec, BootstrapConfig(args.bootstrap, args.scheme,
                                                                    SeededStream(args.seed)), named=named)
        header += ["bootstrap_B", "bootstrap_used", "bootstrap_failures"]
        row += [fmt(args.bootstrap), fmt(res.replicates_used), fmt(res.failures)]
        header += [f"{k}_reduced" for k in res.names]
        row += [fmt(v) for v in res.reduced]
    if args.mle:
        p = mle_numeric(data, spec, init=rep.params)
        header += ["mle_mu", "mle_sigma"]
        row += [fmt(p.mu), fmt(p.sigma)]
        if named:
            native = to_named(named, spec, p, strict=False)
            header += [f"mle_{k}" for k in native]
            row += [fmt(v) for v in native.values()]
    _csv([header, row], out)


def cmd_moments(args, out):
    spec, params, _ = resolve_model(args.model, parse_params(args.params))
    try:
        qs = [float(q) for q in args.q.split(",") if q.strip()] if args.q else []
    except ValueError:
        raise UsageError(f"--q must be a comma-separated list of numbers, got {args.q!r}") from None
    h = population_h(spec, params)
    rows = [["quantity", "value"], ["h1", fmt(h.h1)], ["h2", fmt(h.h2)], ["h3", fmt(h.h3)],
            ["h4", fmt(h.h4)], ["E[log X]", fmt(log_moment(spec, params))]]
    for q in qs:
        try:
            rows.append([f"E[X^{fmt(q)}]", fmt(moment(spec, params, q))])
        except MomentUndefined:
            rows.append([f"E[X^{fmt(q)}]", "undefined"])
    _csv(rows, out)


def cmd_simulate(args, out):
    try:
        scenario = read_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except (ValueError, DomainError) as exc:
        raise UsageError(str(exc)) from None
    if args.seed is not None:
        scenario.master_seed = args.seed
    threads = args.threads if args.threads else default_threads()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    records = simulate_estimates(scenario, threads)
    rows = aggregate(scenario, records)
    write_metrics(outdir / "metrics.csv", scenario, rows)
    write_estimates(outdir / "estimates.csv", scenario, records)
    flagged = sum(r.flagged for r in rows)
    print(f"wrote {len(rows)} metric rows to {outdir / 'metrics.csv'} ({flagged} flagged)", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weightedexp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    models = f"{GENERIC} or one of: {', '.join(NAMED_MODELS)}"

    p = sub.add_parser("sample", help="draw variates")
    p.add_argument("--model", required=True, help=models)
    p.add_argument("--params", required=True, help="native parameters, k=v,...")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="fit a sample")
    p.add_argument("--model", required=True, help=models)
    p.add_argument("--params", default="", help="parameters fixing the generator (e.g. k for weibull)")
    p.add_argument("--data", required=True, help="file with one value per line, or - for stdin")
    p.add_argument("--bootstrap", type=int, default=0, metavar="B")
    p.add_argument("--scheme", choices=SCHEMES, default="nonparametric")
    p.add_argument("--mle", action="store_true")
    p.add_argument("--ci", type=float, default=0.95, metavar="LEVEL")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("moments", help="population h-vector and moments")
    p.add_argument("--model", required=True, help=models)
    p.add_argument("--params", required=True)
    p.add_argument("--q", default="", help="comma-separated moment orders")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("simulate", help="Monte Carlo study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except UsageError as exc:
        print(f"weightedexp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DomainError) as exc:
        print(f"weightedexp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationFailed as exc:
        print(f"weightedexp: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
