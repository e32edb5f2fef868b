"""Command-line front end for :mod:`rowsample.experiment`.

Exit status is 0 on success, 2 for invalid input or configuration and 3 when
more than 10% of trials hit a numerical failure.
"""
import argparse
import sys

from . import __version__
from .errors import InvalidInputError
from .experiment import NUMERICAL_FAILURE_LIMIT, TASKS, ExperimentConfig, emit_report, run_experiment, summary_line

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="rowsample-bench",
        description="Seeded Monte-Carlo checks of row-sampling sketches against exact oracles.",
    )
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--input", help="matrix A (MatrixMarket or headerless CSV)")
    p.add_argument("--input-b", help="second matrix for product, target vector for regress")
    p.add_argument("--format", choices=("mm", "csv"), help="input format (default: from file extension)")
    p.add_argument("--generate", metavar="M,D,SPECTRUM,COHERENCE",
                   help='synthetic A, e.g. "2000,10,linear:10:1,uniform" or "1000,8,ones,planted:0"')
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=1.0,
                   help="extra factor in (0, 1] applied to the distribution's dominance certificate")
    p.add_argument("--k", type=int, help="target rank for lowrank")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r-override", type=int, help="fixed sample size; the report is marked as carrying no guarantee")
    p.add_argument("--out", default="report.json", help="JSON report path")
    p.add_argument("--csv", help="optional per-trial CSV path")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = ExperimentConfig(
        task=args.task, epsilon=args.epsilon, delta=args.delta, beta=args.beta, k=args.k,
        trials=args.trials, seed=args.seed, r_override=args.r_override, input=args.input,
        input_b=args.input_b, format=args.format, generate=args.generate,
    )
    try:
        rep = run_experiment(cfg)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        emit_report(rep, args.out, args.csv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(summary_line(rep))
    if rep.trials and rep.numerical_failures / rep.trials > NUMERICAL_FAILURE_LIMIT:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
