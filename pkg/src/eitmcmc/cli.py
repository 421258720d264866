"""Command-line entry point wrapping the pipeline stages.

Every subcommand takes ``--config <file>`` and ``--out <dir>``; stage
outputs land in the out directory under fixed names so the stages chain
without extra plumbing (``run-mcmc`` picks up ``observation.txt`` and
``surrogate.txt`` from there unless told otherwise).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline
from .config import RunConfig


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out", default=None, help="output directory (default: output.dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitmcmc",
        description="Surrogate-accelerated Bayesian inversion for electrode tomography.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("generate-data", help="write a noisy synthetic observation"))
    _add_common(sub.add_parser("build-surrogate", help="run the adaptive offline stage"))

    mcmc = sub.add_parser("run-mcmc", help="sample the posterior")
    _add_common(mcmc)
    mcmc.add_argument(
        "--plain",
        action="store_true",
        help="solve the forward problem at every step instead of using a surrogate",
    )
    mcmc.add_argument("--observation", default=None, help="observation file to invert")
    mcmc.add_argument("--surrogate", default=None, help="surrogate file for the online stage")

    _add_common(sub.add_parser("benchmark", help="time offline and online stages against N"))
    _add_common(
        sub.add_parser("compare-index-sets", help="adaptive versus isotropic index sets")
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_file(args.config)
        out = Path(args.out) if args.out is not None else Path(config.out_dir)

        if args.command == "generate-data":
            written = [pipeline.generate_data(config, out)]
        elif args.command == "build-surrogate":
            written = list(pipeline.build_surrogate(config, out))
        elif args.command == "run-mcmc":
            observation = args.observation or out / pipeline.OBSERVATION_FILE
            surrogate = None
            if not args.plain:
                surrogate = args.surrogate or out / pipeline.SURROGATE_FILE
            written = list(
                pipeline.run_inversion(
                    config, out, observation, surrogate_path=surrogate, plain=args.plain
                )
            )
        elif args.command == "benchmark":
            written = [pipeline.benchmark(config, out)]
        else:
            written = [pipeline.compare_index_sets(config, out)]
    except Exception as exc:  # noqa: BLE001 - CLI boundary turns failures into exit codes
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
