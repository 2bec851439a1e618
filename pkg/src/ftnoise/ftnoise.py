"""A command-line tool for bounding the effective strength of correlated
Hamiltonian noise

ftnoise reads a YAML description of a noise model and reports whether it
is weak enough for fault-tolerant scaling:

    ftnoise analyze model.yaml --out report.json
    ftnoise verify instance.yaml
    ftnoise sweep model.yaml --table sweep.csv

The library can be used directly as well:

    from ftnoise.noise_model import eta_profile
    from ftnoise.bound_engine import corollary1

    report = corollary1(eta_profile(model), m=2)
    print(report.epsilon, report.verdict)

Exit codes: 0 success, 1 a conclusive bound violation was found by verify,
2 configuration error, 3 numerical or resource failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Tuple

from ftnoise import __version__
from ftnoise.bound_engine import Verdict, bound_report
from ftnoise.config import Config, load_config
from ftnoise.constants import (
    DEFAULT_MAX_R,
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VIOLATION,
)
from ftnoise.contraction import contraction_diagnostics
from ftnoise.dyson import instance_bound, verify_instance
from ftnoise.errors import ConfigError, DivergenceError, InputError, ResourceError
from ftnoise.noise_model import eta_profile
from ftnoise.report import RunReport, SweepRow, write_sweep_table

__author__ = "Mike Lynch"
__copyright__ = "The University of Sydney"
__license__ = "MIT"

_logger = logging.getLogger(__name__)

COMMANDS = ["analyze", "verify", "sweep"]


def parse_args(args):
    """Parse command line parameters

    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["analyze", "model.yaml"]``).

    Returns:
      :obj:`argparse.Namespace`: command line parameters namespace
    """
    parser = argparse.ArgumentParser(
        description="Effective noise strength bounds for correlated Hamiltonian noise"
    )
    parser.add_argument(
        "--version",
        action="version",
        version="ftnoise {ver}".format(ver=__version__),
    )
    parser.add_argument(
        "-v",
        "--verbose",
        dest="loglevel",
        help="set loglevel to INFO",
        action="store_const",
        const=logging.INFO,
    )
    parser.add_argument(
        "-vv",
        "--very-verbose",
        dest="loglevel",
        help="set loglevel to DEBUG",
        action="store_const",
        const=logging.DEBUG,
    )
    parser.add_argument("command", type=str, choices=COMMANDS)
    parser.add_argument("config", type=Path, help="YAML configuration file")
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Write the structured report to this file as JSON",
    )
    parser.add_argument(
        "--quiet", action="store_true", help="Don't print the text report"
    )
    parser.add_argument(
        "--table",
        type=Path,
        default=None,
        help="Write the sweep table to this file as CSV (default stdout)",
    )
    parser.set_defaults(loglevel=logging.WARNING)
    return parser.parse_args(args)


def setup_logging(loglevel):
    """Setup basic logging

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
    logging.basicConfig(
        level=loglevel, stream=sys.stderr, format=logformat, datefmt="%Y-%m-%d %H:%M:%S"
    )


def output_stream(outfile):
    """Either opens a file for output, or returns stdout if the filename is
    empty.

    Args:
      outfile (str): a filename or ''
    Return:
      :obj:`_io.TextIOWrapper`: an output stream
    """
    if outfile:
        return open(outfile, "w", newline="")
    else:
        return sys.stdout


def cmd_analyze(config: Config) -> Tuple[RunReport, int]:
    """Evaluates the bound for the configured noise model

    The verdict is data: the exit code is 0 whenever epsilon could be
    computed, and 3 when it could not (2 alpha >= 1 or a divergent sum).
    """
    report = RunReport(command="analyze", config_hash=config.config_hash)
    try:
        profile = eta_profile(config.noise_model(), budget=config.enumeration_budget)
    except ResourceError as e:
        _logger.error(str(e))
        report.errors.append(str(e))
        return report, EXIT_NUMERICAL
    report.profile = profile
    bound = bound_report(
        profile, config.envelope, config.m, config.epsilon0, config.alpha0
    )
    report.bound = bound
    if bound.epsilon is None:
        report.errors.append("numerical precondition failed")
        _logger.error(f"numerical precondition failed: {bound.caveats[-1]}")
        return report, EXIT_NUMERICAL
    try:
        report.contraction = contraction_diagnostics(
            profile, bound.alpha, bound.g, envelope=config.envelope
        )
    except (DivergenceError, ResourceError) as e:
        _logger.warning(f"contraction diagnostics skipped: {e}")
    return report, EXIT_OK


def cmd_verify(config: Config) -> Tuple[RunReport, int]:
    """Computes the exact fault-path norms of the configured instance and
    compares them with the bound. Exit code 1 if any conclusive bound is
    exceeded."""
    report = RunReport(command="verify", config_hash=config.config_hash)
    section = config.verify
    max_r = section.max_r if section is not None else DEFAULT_MAX_R
    try:
        bound = instance_bound(section.instance, config.epsilon0, config.alpha0)
        report.bound = bound
        report.verification = verify_instance(section.instance, max_r, bound)
    except (ResourceError, DivergenceError) as e:
        _logger.error(str(e))
        report.errors.append(str(e))
        return report, EXIT_NUMERICAL
    if report.violations:
        _logger.error(f"{len(report.violations)} fault queries exceed the bound")
        return report, EXIT_VIOLATION
    return report, EXIT_OK


def cmd_sweep(config: Config) -> Tuple[RunReport, int]:
    """Re-derives the profile and bound for every sweep value. Points which
    fail numerically are reported as inconclusive rows."""
    report = RunReport(command="sweep", config_hash=config.config_hash)
    sweep = config.sweep
    report.sweep_parameter = sweep.parameter
    base = config.noise_model()
    for value in sweep.values:
        if sweep.parameter == "t0":
            model = base.with_t0(value)
        else:
            model = base.scaled(value)
        try:
            profile = eta_profile(model, budget=config.enumeration_budget)
            bound = bound_report(
                profile, config.envelope, config.m, config.epsilon0, config.alpha0
            )
            row = SweepRow(value, bound.alpha, bound.epsilon, bound.verdict)
        except (DivergenceError, ResourceError, InputError) as e:
            _logger.warning(f"{sweep.parameter} = {value}: {e}")
            row = SweepRow(value, None, None, Verdict.INCONCLUSIVE)
        _logger.info(f"{sweep.parameter} = {value}: {row.verdict.value}")
        report.sweep.append(row)
    return report, EXIT_OK


def main(args) -> int:
    """
    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["--verbose", "analyze", "model.yaml"]``).

    Returns:
      int: the exit code
    """
    args = parse_args(args)
    setup_logging(args.loglevel)
    try:
        config = load_config(args.config, args.command)
    except ConfigError as e:
        _logger.error(str(e))
        return EXIT_CONFIG
    except ResourceError as e:
        _logger.error(str(e))
        return EXIT_NUMERICAL
    if args.command == "analyze":
        report, code = cmd_analyze(config)
    elif args.command == "verify":
        report, code = cmd_verify(config)
    else:
        report, code = cmd_sweep(config)
    # a sweep table on stdout has to stay parseable as CSV
    table_on_stdout = args.command == "sweep" and not args.table
    if table_on_stdout and not args.quiet:
        _logger.info("sweep table goes to stdout, text report suppressed")
    elif not args.quiet:
        print(report.format_text())
    if args.out:
        report.write_json(args.out)
    if args.command == "sweep":
        fh = output_stream(args.table)
        try:
            write_sweep_table(report.sweep, fh)
        finally:
            if fh is not sys.stdout:
                fh.close()
    return code


def run():
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`

    This function can be used as entry point to create console scripts with setuptools.
    """
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
