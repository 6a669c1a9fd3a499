from __future__ import annotations

import argparse
from typing import TYPE_CHECKING, Any

from haarlab import __version__
from haarlab.lab import experiments
from haarlab.lab.report import write_report

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from haarlab.lab.report import ExperimentReport

SUBCOMMANDS = (
    "sparse-failure",
    "bad-weight",
    "complexity-separation",
    "sparse-domination",
    "weight-suite",
    "czd-demo",
    "weak-type",
)


def build_parser() -> argparse.ArgumentParser:
    """The haarlab argument parser."""
    parser = argparse.ArgumentParser(
        prog="haarlab",
        description="Haar shifts and weights on balanced measures, numerically",
    )
    parser.add_argument(
        "--version", action="version", version=f"haarlab {__version__}"
    )
    parser.add_argument("command", choices=SUBCOMMANDS, help="experiment to run")
    parser.add_argument(
        "--measure",
        default=None,
        help="lmp, uniform, random or a measure spec JSON file",
    )
    parser.add_argument("--depth", type=int, default=None, help="depth bound")
    parser.add_argument("--jmax", type=int, default=64, help="largest j on the chain")
    parser.add_argument("--kmax", type=int, default=10, help="largest bad weight k")
    parser.add_argument("--shift", default="hilbert", help="shift token or maximal:N")
    parser.add_argument("--p", type=float, default=2.0, help="Lebesgue exponent")
    parser.add_argument("--N", type=int, default=1, help="complexity of the C form")
    parser.add_argument("--trials", type=int, default=None, help="random trials")
    parser.add_argument(
        "--seed",
        type=int,
        default=experiments.default_seed(),
        help="base seed (CLI > env:HAARLAB_SEED > 0)",
    )
    parser.add_argument(
        "--mode",
        choices=("float", "rational"),
        default=None,
        help="arithmetic (CLI > env:HAARLAB_MODE > float)",
    )
    parser.add_argument(
        "--out", choices=("csv", "json"), default="json", help="output format"
    )
    parser.add_argument(
        "--output", default=None, help="write the report here instead of stdout"
    )
    parser.add_argument("--verbose", action="store_true", help="print progress")
    parser.add_argument(
        "--wandb-path",
        default=None,
        help="log to Weights and Biases as project/run_name",
    )
    return parser


def _random_kwargs(args: argparse.Namespace) -> dict[str, Any]:
    kwargs: dict[str, Any] = {"seed": args.seed}
    if args.measure is not None:
        kwargs["measure"] = args.measure
    if args.trials is not None:
        kwargs["trials"] = args.trials
    if args.depth is not None:
        kwargs["depth"] = args.depth
    return kwargs


def _dispatch(args: argparse.Namespace) -> Callable[..., ExperimentReport]:
    common = {
        "mode": args.mode,
        "verbose": args.verbose,
        "wandb_path": args.wandb_path,
    }
    random_kwargs = _random_kwargs(args)
    runners: dict[str, Callable[[], ExperimentReport]] = {
        "sparse-failure": lambda: experiments.run_sparse_failure(args.jmax, **common),
        "complexity-separation": lambda: experiments.run_complexity_separation(
            args.jmax, **common
        ),
        "bad-weight": lambda: experiments.run_bad_weight(args.kmax, **common),
        "sparse-domination": lambda: experiments.run_sparse_domination(
            shift=args.shift, **random_kwargs, **common
        ),
        "weight-suite": lambda: experiments.run_weight_suite(
            p=args.p, N=args.N, **random_kwargs, **common
        ),
        "czd-demo": lambda: experiments.run_czd_demo(**random_kwargs, **common),
        "weak-type": lambda: experiments.run_weak_type(
            N=args.N, **random_kwargs, **common
        ),
    }
    return runners[args.command]


def main(argv: Sequence[str] | None = None) -> int:
    """Run one experiment and emit its report.

    Returns:
        int: 0 if every acceptance check passed, 1 otherwise
    """
    args = build_parser().parse_args(argv)
    report = _dispatch(args)()
    text = write_report(report, args.out, args.output)
    if args.output is None:
        print(text)
    elif args.verbose:
        print(f"report written to {args.output}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
