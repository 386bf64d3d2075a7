"""Main entry point for the specsense command-line tool."""

import argparse
import sys
from typing import Any, Dict, List, Optional

from specsense import __version__
from specsense.cli.commands import CommandHandler, UsageError, emit
from specsense.config import ConfigError, SimulationSettings, load_config
from specsense.moments.exact import InvalidDims
from specsense.utils.logging import bind_run_context, get_logger, setup_logging
from specsense.wishart.core import NumericalError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class SpecSenseCLI:
    """Resolves settings, runs one command and writes its outputs."""

    def __init__(self, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None):
        """Initialize the CLI.

        Args:
            config_path: Optional path to a JSON configuration file
            overrides: Settings given as command-line flags; these win over
                      environment variables and the file

        Raises:
            ConfigError: If the configuration cannot be loaded
        """
        self.config = load_config(config_path)
        settings = self.config.simulation
        updates = {key: value for key, value in (overrides or {}).items() if value is not None}
        if updates:
            try:
                settings = SimulationSettings(**{**settings.model_dump(), **updates})
            except ValueError as e:
                raise UsageError(str(e)) from e
        self.settings = settings

        self.logger = setup_logging(
            log_level=self.settings.log_level,
            log_file=self.settings.log_file,
            json_format=True
        )
        self.handler = CommandHandler(self.settings)

        self.logger.debug("CLI initialized", extra={
            "config_path": config_path,
            "seed": self.settings.seed,
            "threads": self.settings.threads,
            "chunk_size": self.settings.chunk_size
        })

    def run(self, args: argparse.Namespace) -> int:
        """Run the parsed command and return its exit code."""
        bind_run_context(self.logger, command=args.command, version=__version__)
        self.logger.info("Running command")
        result = self.handler.handle(args)
        manifest = emit(result, args.output, args.format)
        self.logger.info("Command completed", extra={
            "output": args.output,
            "outputs": sorted(manifest.outputs),
            **manifest.results
        })
        return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="Path to configuration file", default=None)
    common.add_argument("--seed", type=int, default=None, help="Random seed (falls back to SPECSENSE_SEED)")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    common.add_argument("--threads", type=int, default=None, help="Worker threads")
    common.add_argument("--output", default=None, help="Output file (prefix for roc); stdout when omitted")
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="Output format")
    common.add_argument("--log-file", default=None, help="Also write JSON logs to this file")
    common.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="specsense",
        description="Multi-antenna spectrum sensing with John's detector"
    )
    parser.add_argument(
        "--version",
        help="Show version",
        action="version",
        version=f"%(prog)s {__version__}"
    )
    common = _common_options()
    subparsers = parser.add_subparsers(dest="command", required=True)

    moments = subparsers.add_parser("moments", parents=[common], help="Exact H0 moments of John's statistic")
    moments.add_argument("--K", type=int, required=True, help="Number of sensors")
    moments.add_argument("--N", type=int, required=True, help="Number of samples")
    moments.add_argument("--m-max", dest="m_max", type=int, default=4, help="Highest moment order")

    threshold = subparsers.add_parser("threshold", parents=[common], help="Analytic threshold for a target P_fa")
    threshold.add_argument("--K", type=int, required=True, help="Number of sensors")
    threshold.add_argument("--N", type=int, required=True, help="Number of samples")
    threshold.add_argument("--target-pfa", dest="target_pfa", type=float, required=True,
                           help="Target false alarm probability")

    curve = subparsers.add_parser("pfa-curve", parents=[common], help="Analytic (and simulated) P_fa curve")
    curve.add_argument("--K", type=int, required=True, help="Number of sensors")
    curve.add_argument("--N", type=int, required=True, help="Number of samples")
    curve.add_argument("--zeta-lo", dest="zeta_lo", type=float, default=None, help="Lowest threshold (default 1/K)")
    curve.add_argument("--zeta-hi", dest="zeta_hi", type=float, default=None, help="Highest threshold (default 1)")
    curve.add_argument("--points", type=int, default=100, help="Grid points")
    curve.add_argument("--simulate", action="store_true", help="Add Monte Carlo estimates")

    roc = subparsers.add_parser("roc", parents=[common], help="ROC curves for a scenario file")
    roc.add_argument("scenario", help="Path to a scenario JSON file")
    roc.add_argument("--detectors", default=None, help="Comma-separated detectors (john,st,sle,er,le)")
    roc.add_argument("--pfa-grid", dest="pfa_grid", default=None, help="Comma-separated target P_fa values")

    study = subparsers.add_parser("study", parents=[common], help="Approximation error against sample size")
    study.add_argument("--K", type=int, required=True, help="Number of sensors")
    study.add_argument("--N-list", dest="N_list", required=True, help="Comma-separated sample sizes")
    study.add_argument("--zeta-lo", dest="zeta_lo", type=float, required=True, help="Lowest threshold")
    study.add_argument("--zeta-hi", dest="zeta_hi", type=float, required=True, help="Highest threshold")
    study.add_argument("--points", type=int, default=100, help="Grid points")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logger = setup_logging(log_level="DEBUG" if args.verbose else "INFO", json_format=True)
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "threads": args.threads,
        "log_file": args.log_file,
        "log_level": "DEBUG" if args.verbose else None,
    }

    try:
        cli = SpecSenseCLI(config_path=args.config, overrides=overrides)
        return cli.run(args)
    except (ConfigError, UsageError, InvalidDims) as e:
        logger.error("Invalid input", extra={"command": args.command, "error": str(e)})
        print(f"specsense: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        logger.error("Numerical failure", extra={
            "command": args.command,
            "error_type": type(e).__name__,
            "error": str(e)
        })
        print(f"specsense: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_FAILURE
    except Exception as e:
        get_logger("main").exception("Unexpected error", extra={"error": str(e)})
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
