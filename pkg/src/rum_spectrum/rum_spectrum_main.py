"""
Command line tool for the RUM spectrum of gain frameworks

Usage:
    rum_spectrum spectrum frieze_lq.yml --samples 4096
    rum_spectrum joint-points c3h_euclidean.yml
    rum_spectrum flex c3h_cylindrical.yml --character "1,0" --window 2
    rum_spectrum verify frieze_lq.yml --flex flex.json
    rum_spectrum cover c3h_euclidean.yml --window 0
    rum_spectrum ap-rigidity frieze_lq_g1.yml

A framework argument is either a path to a framework file or the name of a bundled framework. The
results are written as JSON to stdout (or to --out); logging goes to stderr.

Exit codes: 0 success (also for a failed verification), 2 invalid framework file, 3 unsupported
input, 4 bad argument.
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import yaml

from rum_spectrum import LOGGER_BASE_NAME
from rum_spectrum.ap import RIGIDITY_WINDOW, check_ap_rigidity
from rum_spectrum.exceptions import (ContractViolationError, DegenerateConstraintError,
                                     StructuralError, UnsupportedError, UsageError,
                                     ValidationError)
from rum_spectrum.flex import (WindowedField, chi_flex_basis, evaluate_chi_vector,
                               flex_dimension_report, flex_to_dict, translation_space, verify_flex)
from rum_spectrum.framework_file import bundled_framework_path, load_framework
from rum_spectrum.gain import (DEFAULT_SAMPLES, MAX_REFINED_RANK, joint_spectral_points,
                               rum_spectrum_finite, rum_spectrum_scan, spectrum_bound_report)
from rum_spectrum.geometry import (build_covering, normalised_gain_data, quotient_gain_framework,
                                   symmetry_defect)
from rum_spectrum.group import parse_character, window
from rum_spectrum.linalg import DEFAULT_KERNEL_TOL
from rum_spectrum.utils import complex_to_pairs, dump_json, records_to_frame, setup_logging, \
    write_table

try:
    from rum_spectrum import __version__
except ImportError:
    __version__ = "unknown"

EXIT_OK = 0
EXIT_INVALID_FILE = 2
EXIT_UNSUPPORTED = 3
EXIT_BAD_ARGUMENT = 4

DEFAULT_FLEX_WINDOW = 2

logger = logging.getLogger(LOGGER_BASE_NAME)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument errors become usage errors so they map onto the bad-argument exit code"""

    def error(self, message):
        raise UsageError(message)


def _parse_the_command_line_arguments(args):
    def check_positive(value):
        """ local function to test if an argument is larger than zero"""
        ivalue = int(value)
        if ivalue <= 0:
            raise argparse.ArgumentTypeError("{} is an invalid positive int value".format(value))
        return ivalue

    def check_not_negative(value):
        """ local function to test if an argument is not negative"""
        ivalue = int(value)
        if ivalue < 0:
            raise argparse.ArgumentTypeError("{} is an invalid negative int value".format(value))
        return ivalue

    def check_positive_float(value):
        fvalue = float(value)
        if not fvalue > 0:
            raise argparse.ArgumentTypeError("{} is an invalid positive float value".format(value))
        return fvalue

    # ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
    # parse the command line to set some options
    # ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
    common = _ArgumentParser(add_help=False)
    common.add_argument('-d', '--debug', help="Print lots of debugging statements",
                        action="store_const", dest="log_level", const=logging.DEBUG,
                        default=logging.INFO)
    common.add_argument('-v', '--verbose', help="Be verbose", action="store_const",
                        dest="log_level", const=logging.INFO)
    common.add_argument('-q', '--quiet', help="Be quiet: only warnings", action="store_const",
                        dest="log_level", const=logging.WARNING)
    common.add_argument('--progressbar', help="Show a progress bar", action="store_true")
    common.add_argument("--write_log_to_file", action="store_true", default=False,
                        help="Write the logging information to file")
    common.add_argument("--log_file_base", default="log_rum_spectrum",
                        help="Default logging name")
    common.add_argument('--log_file_debug', help="Be very verbose to file",
                        action="store_const", dest="log_level_file", const=logging.DEBUG,
                        default=logging.INFO)
    common.add_argument("--settings", help="Yaml settings file with scan, flex and ap defaults")
    common.add_argument("--out", help="Write the result to this file instead of stdout")

    parser = _ArgumentParser(description='RUM spectrum, joint spectral points and flexes of '
                                         'gain frameworks',
                             formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", help="Show the current version", action="version",
                        version="{}\nPart of rum_spectrum version {}".format(
                            os.path.basename(__file__), __version__))
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    def add_command(name, help_text):
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text,
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        sub.add_argument("framework", help="Framework file or name of a bundled framework")
        return sub

    def add_scan_arguments(sub):
        sub.add_argument("--samples", type=check_positive,
                         help=f"Grid points per circle of the dual group (default "
                              f"{DEFAULT_SAMPLES})")
        sub.add_argument("--tol", type=check_positive_float,
                         help=f"Kernel tolerance (default {DEFAULT_KERNEL_TOL})")
        sub.add_argument("--n_processes", type=check_positive,
                         help="Number of processes for the grid evaluation")

    spectrum = add_command("spectrum", "Compute the RUM spectrum")
    add_scan_arguments(spectrum)
    spectrum.add_argument("--format", choices=("json", "csv"), default="json",
                          help="Output format of the spectrum records")
    spectrum.add_argument("--trace", help="Write the scan trace as CSV to this file")

    add_command("joint-points", "Compute the joint spectral points of the representation")

    flex = add_command("flex", "Export a basis of chi-symmetric flexes")
    flex.add_argument("--character", help="Character as 'angles=...;torsion=...' or a comma "
                                          "separated list, e.g. 'pi,1'")
    flex.add_argument("--translations", action="store_true",
                      help="Export the translation space instead of a character")
    flex.add_argument("--window", type=check_not_negative,
                      help=f"Window radius of the exported fields (default "
                           f"{DEFAULT_FLEX_WINDOW})")
    flex.add_argument("--tol", type=check_positive_float,
                      help=f"Kernel tolerance (default {DEFAULT_KERNEL_TOL})")

    verify = add_command("verify", "Verify exported flexes")
    verify.add_argument("--flex", required=True, help="JSON file written by the flex command")
    verify.add_argument("--tol", type=check_positive_float,
                        help="Residual tolerance (default 1e-9 (1 + max ||phi||))")

    cover = add_command("cover", "Export the covering framework on a window")
    cover.add_argument("--window", type=check_not_negative, default=0,
                       help="Window radius")

    ap_rigidity = add_command("ap-rigidity", "Certify almost periodic rigidity")
    add_scan_arguments(ap_rigidity)
    ap_rigidity.add_argument("--window", type=check_not_negative,
                             help=f"Window radius of the translation check (default "
                                  f"{RIGIDITY_WINDOW})")

    # parse the command line
    parsed_arguments = parser.parse_args(args)

    return parsed_arguments, parser


def read_settings(file_name):
    """Read the optional yaml settings file; missing sections are empty"""
    if file_name is None:
        return dict()
    with open(file_name, "r") as stream:
        try:
            settings = yaml.safe_load(stream=stream) or dict()
        except yaml.YAMLError as err:
            raise UsageError(f"cannot parse settings file {file_name}: {err}")
    if not isinstance(settings, dict):
        raise UsageError(f"settings file {file_name} must contain a mapping")
    return settings


def _setting(value, settings, section, key, default):
    """Command line value if given, else the settings file, else the default"""
    if value is not None:
        return value
    return (settings.get(section) or dict()).get(key, default)


def _framework_path(name):
    path = Path(name)
    if path.exists():
        return path
    try:
        return bundled_framework_path(name)
    except UsageError:
        raise FileNotFoundError(f"no framework file or bundled framework named {name}")


def _write_result(result, args):
    if args.out is not None:
        dump_json(result, file_name=args.out)
    else:
        dump_json(result)


def cmd_spectrum(document, args, settings):
    G0 = document.G0
    tol = _setting(args.tol, settings, "scan", "tol", DEFAULT_KERNEL_TOL)
    if G0.group.is_finite:
        points = rum_spectrum_finite(G0, tol)
        samples = None
    else:
        if G0.group.free_rank > MAX_REFINED_RANK:
            raise UnsupportedError(f"the scan refines at most {MAX_REFINED_RANK} free factors, "
                                   f"group {G0.group} has {G0.group.free_rank}")
        samples = _setting(args.samples, settings, "scan", "samples_per_circle", DEFAULT_SAMPLES)
        n_processes = _setting(args.n_processes, settings, "scan", "n_processes", None)
        result = rum_spectrum_scan(G0, samples, tol, n_processes=n_processes,
                                   progress_bar=args.progressbar)
        points = result.points
        if args.trace is not None:
            write_table(result.trace, file_name=args.trace)
    records = [point.to_dict() for point in points]
    if args.format == "csv":
        write_table(records_to_frame(records), file_name=args.out)
        return EXIT_OK
    _write_result(dict(group=G0.group.to_dict(), samples_per_circle=samples, spectrum=records,
                       bounds=spectrum_bound_report(G0, [point.character for point in points]),
                       flexes=flex_dimension_report(G0, points)), args)
    return EXIT_OK


def cmd_joint_points(document, args, settings):
    points = []
    for point in joint_spectral_points(document.G0):
        points.append(dict(character=point.character.to_dict(),
                           eigenvalues=complex_to_pairs(point.eigenpair.lambdas),
                           eigenvectors=complex_to_pairs(point.eigenpair.eigenspace.T)))
    _write_result(dict(group=document.G0.group.to_dict(), joint_points=points), args)
    return EXIT_OK


def cmd_flex(document, args, settings):
    G0 = document.G0
    radius = _setting(args.window, settings, "flex", "window", DEFAULT_FLEX_WINDOW)
    tol = _setting(args.tol, settings, "flex", "tol", DEFAULT_KERNEL_TOL)
    if args.translations == (args.character is not None):
        raise UsageError("give exactly one of --character and --translations")
    if args.translations:
        basis = translation_space(G0)
    else:
        chi = parse_character(G0.group, args.character)
        basis = chi_flex_basis(G0, chi, tol)
        if not basis:
            raise UsageError(f"character {chi} is not in the RUM spectrum")
    target = window(G0.group, radius)
    flexes = [flex_to_dict(z, evaluate_chi_vector(z, target)) for z in basis]
    logger.info(f"Exporting {len(flexes)} flexes on window radius {radius}")
    _write_result(dict(group=G0.group.to_dict(), flexes=flexes), args)
    return EXIT_OK


def _read_flexes(file_name, spec):
    with open(file_name, "r") as stream:
        try:
            data = json.load(stream)
        except json.JSONDecodeError as err:
            raise UsageError(f"cannot parse flex file {file_name}: {err}")
    entries = data.get("flexes", [data]) if isinstance(data, dict) else None
    if not entries:
        raise UsageError(f"flex file {file_name} contains no flexes")
    try:
        return [WindowedField.from_dict(spec, entry) for entry in entries]
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, UsageError):
            raise
        raise UsageError(f"malformed flex in {file_name}: {err}")


def cmd_verify(document, args, settings):
    G0 = document.G0
    results = [verify_flex(G0, f, args.tol).to_dict() for f in _read_flexes(args.flex, G0.group)]
    passed = all(result["pass"] for result in results)
    logger.info(f"Verified {len(results)} flexes: {'pass' if passed else 'FAIL'}")
    _write_result({"results": results, "pass": passed}, args)
    return EXIT_OK


def cmd_cover(document, args, settings):
    G0 = document.G0
    covering = build_covering(G0, document.placement, window(G0.group, args.window),
                              norm=document.norm)
    result = covering.to_dict()
    result["symmetry_defect"] = symmetry_defect(covering)
    quotient = quotient_gain_framework(covering)
    result["quotient_matches"] = normalised_gain_data(quotient) == normalised_gain_data(G0)
    _write_result(result, args)
    return EXIT_OK


def cmd_ap_rigidity(document, args, settings):
    samples = _setting(args.samples, settings, "scan", "samples_per_circle", DEFAULT_SAMPLES)
    tol = _setting(args.tol, settings, "ap", "tol",
                   _setting(None, settings, "scan", "tol", DEFAULT_KERNEL_TOL))
    radius = _setting(args.window, settings, "ap", "window", RIGIDITY_WINDOW)
    n_processes = _setting(args.n_processes, settings, "scan", "n_processes", None)
    certificate = check_ap_rigidity(document.G0, samples, tol, window_radius=radius,
                                    n_processes=n_processes, progress_bar=args.progressbar)
    _write_result(certificate.to_dict(), args)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "joint-points": cmd_joint_points,
    "flex": cmd_flex,
    "verify": cmd_verify,
    "cover": cmd_cover,
    "ap-rigidity": cmd_ap_rigidity,
}


def main(args_in):
    """
    Run one sub command

    Parameters
    ----------
    args_in: list of str
        Command line arguments without the program name

    Returns
    -------
    int:
        The exit code
    """
    try:
        args, parser = _parse_the_command_line_arguments(args_in)
    except UsageError as err:
        sys.stderr.write(f"rum_spectrum: {err}\n")
        return EXIT_BAD_ARGUMENT

    _logger = setup_logging(
        write_log_to_file=args.write_log_to_file,
        log_file_base=args.log_file_base,
        log_level_file=args.log_level_file,
        log_level=args.log_level,
        progress_bar=args.progressbar
    )
    _logger.debug("Enter run with python version {}".format(sys.base_prefix))
    _logger.debug("ARGV_IN: {}".format(" ".join(args_in)))

    try:
        settings = read_settings(args.settings)
        document = load_framework(_framework_path(args.framework))
        return COMMANDS[args.command](document, args, settings)
    except (ValidationError, StructuralError, ContractViolationError,
            DegenerateConstraintError, FileNotFoundError) as err:
        _logger.error(f"Invalid input: {err}")
        return EXIT_INVALID_FILE
    except UnsupportedError as err:
        _logger.error(f"Unsupported: {err}")
        return EXIT_UNSUPPORTED
    except UsageError as err:
        _logger.error(f"Bad argument: {err}")
        return EXIT_BAD_ARGUMENT


def _run():
    """Entry point for console_scripts
    """
    start = time.time()
    exit_code = main(sys.argv[1:])
    duration = time.time() - start
    logger.debug(f"Total processing time: {duration:.2f} seconds ")
    sys.exit(exit_code)


if __name__ == '__main__':
    _run()
