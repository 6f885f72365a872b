"""Command-line entry point.

    lhvpov verify     [--d 2..4] [--samples N] [--seed S] [--workers W] [--alpha-override A] [--out report.json]
    lhvpov simulate   --spec spec.yaml [--runs N] [--samples N] [--seed S] [--alpha A]
                      [--channel-a ch.yaml] [--channel-b ch.yaml] [--out table.csv]
    lhvpov integrals  [--d 2..8] [--samples N] [--seed S] [--workers W] [--out table.csv]

Exit status is 0 on success and 1 on any failed check or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .channels import apply_channel_to_state, pullback_measurement
from .errors import DomainError, LhvError
from .model import frequency_table, simulate_runs
from .oracle import born_prob
from .simplex import j0_closed, j0_quad, j1_closed, j1_quad, jnu_closed, alpha_closed, model_table_closed, moments_mc
from .specfile import load_channel, load_spec
from .verify import run_verify, summarize
from .werner import WernerState, paper_alpha

MAX_DIM = 8


def parse_dims(text: str) -> list[int]:
    """``"3"``, ``"2..4"``, ``"2-4"`` or ``"2,3,5"``."""
    text = text.strip()
    try:
        for sep in ("..", "-"):
            if sep in text:
                lo, hi = (int(t) for t in text.split(sep, 1))
                dims = list(range(lo, hi + 1))
                break
        else:
            dims = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read dimension range {text!r}") from None
    if not dims:
        raise argparse.ArgumentTypeError(f"empty dimension range {text!r}")
    return dims


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.12g}"


def _check_dims(dims: Sequence[int], hi: int = MAX_DIM) -> None:
    for d in dims:
        if d < 2 or d > hi:
            raise DomainError(f"dimension {d} outside the supported range 2..{hi}")


def cmd_verify(args) -> int:
    _check_dims(args.d)
    if args.alpha_override is not None and not 0.0 <= args.alpha_override <= 1.0:
        raise DomainError("--alpha-override must lie in [0, 1]")
    checks = run_verify(args.d, args.samples, args.seed, args.workers, args.alpha_override)
    counts = summarize(checks)
    report = {
        "parameters": {
            "d": list(args.d),
            "samples": args.samples,
            "seed": args.seed,
            "workers": args.workers,
            "alpha_override": args.alpha_override,
        },
        "summary": counts,
        "checks": [c.as_dict() for c in checks],
    }
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    width = max(len(c.name) for c in checks)
    for c in checks:
        obs = "" if c.observed is None else f"{c.observed:.6g}"
        exp = "" if c.expected is None else f"{c.expected:.6g}"
        line = f"{c.status.upper():<12} {c.name:<{width}}  observed={obs:<12} expected={exp:<12}"
        if c.detail:
            line += f"  {c.detail}"
        print(line)
    print(", ".join(f"{k}: {v}" for k, v in counts.items()))
    return 1 if counts["fail"] else 0


def simulate_table(spec, n_runs: int, seed: int, workers: int = 1, alpha: float | None = None,
                   channel_a=None, channel_b=None) -> str:
    """CSV text with empirical, model and Born-rule columns for one measurement spec."""
    d = spec.d
    state_alpha = spec.alpha if alpha is None else alpha
    ch_a = channel_a if channel_a is not None else spec.channel_a
    ch_b = channel_b if channel_b is not None else spec.channel_b
    with_channels = ch_a is not None or ch_b is not None
    povm_a, povm_b = spec.povm_a, spec.povm_b
    if ch_a is not None:
        povm_a = pullback_measurement(povm_a, ch_a)
    if ch_b is not None:
        povm_b = pullback_measurement(povm_b, ch_b)

    runs = simulate_runs(povm_a, povm_b, n_runs, seed, workers)
    freq = frequency_table(runs, povm_a.n_outcomes, povm_b.n_outcomes)
    se = np.sqrt(freq * (1.0 - freq) / n_runs) if n_runs else np.full_like(freq, math.inf)
    model = model_table_closed(povm_a, povm_b)
    rho1 = WernerState(d, state_alpha).materialize()
    quantum = born_prob(rho1, povm_a, povm_b)
    columns = ["i", "j", "empirical", "empirical_se", "model_analytic", "quantum"]
    if with_channels:
        from .channels import KrausChannel

        rho2 = apply_channel_to_state(rho1, ch_a or KrausChannel.identity(d), ch_b or KrausChannel.identity(d))
        quantum2 = born_prob(rho2, spec.povm_a, spec.povm_b)
        columns.append("quantum_rho2")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for i in range(povm_a.n_outcomes):
        for j in range(povm_b.n_outcomes):
            row = [i, j, _fmt(freq[i, j]), _fmt(se[i, j]), _fmt(model[i, j]), _fmt(quantum[i, j])]
            if with_channels:
                row.append(_fmt(quantum2[i, j]))
            w.writerow(row)
    return buf.getvalue()


def cmd_simulate(args) -> int:
    if not args.spec:
        raise DomainError("--spec is required")
    spec = load_spec(args.spec)
    ch_a = load_channel(args.channel_a, spec.d) if args.channel_a else None
    ch_b = load_channel(args.channel_b, spec.d) if args.channel_b else None
    if args.alpha is not None and not 0.0 <= args.alpha <= 1.0:
        raise DomainError("--alpha must lie in [0, 1]")
    text = simulate_table(spec, args.runs, args.seed, args.workers, args.alpha, ch_a, ch_b)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def integrals_table(dims: Sequence[int], n_samples: int, seed: int, workers: int = 1) -> str:
    columns = [
        "d",
        "J0_closed", "J0_quad", "J0_mc", "J0_se",
        "J1_closed", "J1_quad", "J1_mc", "J1_se",
        "Jnu_closed", "Jnu_mc", "Jnu_se",
        "alpha_moments", "alpha_formula", "alpha_mc", "alpha_se",
    ]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for d in dims:
        est = moments_mc(d, n_samples, seed + d, workers)
        w.writerow([
            d,
            _fmt(j0_closed(d)), _fmt(j0_quad(d)), _fmt(est.J0), _fmt(est.se_J0),
            _fmt(j1_closed(d)), _fmt(j1_quad(d)), _fmt(est.J1), _fmt(est.se_J1),
            _fmt(jnu_closed(d)), _fmt(est.Jnu), _fmt(est.se_Jnu),
            _fmt(alpha_closed(d)), _fmt(paper_alpha(d)), _fmt(est.alpha), _fmt(est.se_alpha),
        ])
    return buf.getvalue()


def cmd_integrals(args) -> int:
    _check_dims(args.d, hi=16)
    text = integrals_table(args.d, args.samples, args.seed, args.workers)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=12345)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo sample count")
    common.add_argument("--out", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(prog="lhvpov", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the verification suites")
    p.add_argument("--d", type=parse_dims, default=[2, 3, 4], help="dimension or range, e.g. 2..4")
    p.add_argument("--alpha-override", type=float, default=None,
                   help="compare the model against Werner(d, A) instead of the simulated state")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="sample runs for a measurement spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--alpha", type=float, default=None, help="Werner weight for the quantum column")
    p.add_argument("--channel-a", default=None)
    p.add_argument("--channel-b", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("integrals", parents=[common], help="tabulate the simplex integrals")
    p.add_argument("--d", type=parse_dims, default=list(range(2, 9)))
    p.set_defaults(func=cmd_integrals)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    if args.samples < 1:
        parser.error("--samples must be >= 1")
    try:
        return args.func(args)
    except LhvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        cause = exc.__cause__
        if cause is not None:
            print(f"  caused by {type(cause).__name__}: {cause}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
