"""Command line interface for the fixpoint laboratory."""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

from . import __version__, messages
from .checks import (
    FAIL,
    PASS,
    CheckReport,
    assert_unique_fixed_point,
    check_asymptotic_pseudocontractivity,
    check_lipschitz,
    check_star_condition,
    check_uniform_lipschitz,
    estimate_power_lipschitz,
    sample_pairs,
    sample_points,
)
from .config import CheckPlan, ExperimentConfig, load_config
from .counterexample import (
    DEFAULT_HORIZON,
    DEFAULT_THRESHOLD,
    corrected_demo,
    exact,
    sample_indices,
    verify_note_claims,
)
from .errors import ConfigError, ConsistencyError, DivergenceError, FixpointError, PreconditionError, RangeError
from .operators import known_fixed_points
from .report import REPORT_SCHEMA_VERSION, save_trace, write_report
from .scheme import (
    classify_hypotheses,
    classify_operators,
    compare_two_operator_reduction,
    run,
    termination_reason,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_CHECK_FAILED = 3

# Sweep outcome precedence: config errors first, then divergence, then failed checks.
SEVERITY = {EXIT_CONFIG: 3, EXIT_DIVERGENCE: 2, EXIT_CHECK_FAILED: 1, EXIT_OK: 0}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors, which is reserved for divergence here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        messages.print_error(message)
        sys.exit(EXIT_CONFIG)


def _load(config_path: str, section: str) -> ExperimentConfig:
    """Load a config that must carry the given section."""
    config = load_config(config_path)
    if getattr(config, section) is None:
        raise ConfigError(section, f"section '{section}' is required for this command")
    return config


def cmd_iterate(config_path: str, out: Optional[str] = None, compare_reduced: bool = False) -> int:
    """Run the scheme from a config and write one CSV row per step."""
    try:
        config = _load(config_path, "iteration")
    except ConfigError as e:
        messages.print_error(f"Configuration error: {e}")
        return EXIT_CONFIG
    iteration = config.iteration
    out = out or config.output or str(Path(config_path).with_suffix(".csv"))

    messages.print_test_header(f"scheme with p={iteration.p} in R^{config.dim}, l_{config.norm.p:g} norm")
    messages.format_hypotheses(classify_hypotheses(iteration), classify_operators(iteration))

    try:
        trace = run(iteration)
    except DivergenceError as e:
        if e.trace:
            save_trace(out, e.trace, config.dim, iteration.p)
            messages.print_info(f"Partial trace ({len(e.trace)} rows) written to {out}")
        messages.print_error(str(e))
        return EXIT_DIVERGENCE

    save_trace(out, trace, config.dim, iteration.p)
    messages.print_success(f"Terminated: {termination_reason(iteration, trace)}")
    messages.print_info(f"Trace ({len(trace)} rows) written to {out}")

    if compare_reduced:
        try:
            comparison = compare_two_operator_reduction(iteration)
        except DivergenceError as e:
            messages.print_warning(f"Two-operator comparison diverged: {e}")
        else:
            messages.print_info(
                f"Max deviation from the T_1, T_2 truncation: {comparison.max_deviation:.6g} "
                f"at n = {comparison.deviation_at}"
            )
            for note in comparison.notes:
                messages.print_info(note)
    return EXIT_OK


def _run_check(check: CheckPlan, config: ExperimentConfig, pairs, points,
               star_passed: Optional[bool]) -> CheckReport:
    T, tag, seed, params = config.classify.operator, config.norm, config.seed, check.params
    if check.name == "power_lipschitz":
        estimate = estimate_power_lipschitz(T, params["n"], pairs, tag)
        return CheckReport("power_lipschitz", PASS, params["n"], len(pairs), params["n"],
                           None, seed, {"n": params["n"], "estimate": estimate})
    if check.name == "lipschitz":
        return check_lipschitz(T, params["L"], pairs, tag, seed)
    if check.name == "uniform_lipschitz":
        return check_uniform_lipschitz(T, params["L"], params["n_max"], pairs, tag, seed)
    if check.name == "asymptotic_pseudocontractivity":
        return check_asymptotic_pseudocontractivity(T, params["k"], params["n_max"], pairs, tag, seed)
    if check.name == "star_condition":
        try:
            return check_star_condition(T, params["xstar"], params["k"], params["psi"],
                                        params["n_max"], points + [params["xstar"]], tag, seed)
        except PreconditionError as e:
            return CheckReport("star_condition", FAIL, 0, 0, params["n_max"], None, seed,
                               {"precondition": str(e), "residual": e.residual})
    candidates = points[: params["candidates"]] + known_fixed_points(T, config.dim)
    report = assert_unique_fixed_point(T, params["xstar"], candidates, tag, seed)
    report.metadata["star_condition_passed"] = star_passed
    return report


def run_checks(config: ExperimentConfig) -> List[CheckReport]:
    """Evaluate every selected check on seeded samples."""
    plan, seed = config.classify, config.seed
    pairs = sample_pairs(config.dim, plan.samples, seed, plan.sample_radius)
    points = sample_points(config.dim, plan.samples, seed, plan.sample_radius)
    reports: List[CheckReport] = []
    star_passed = None
    for check in plan.checks:
        logger.debug("running check %s", check.name)
        try:
            report = _run_check(check, config, pairs, points, star_passed)
        except RangeError as e:
            # Leaving the float range counts as a failed check.
            report = CheckReport(check.name, FAIL, 0, 0, check.params.get("n_max", 1), None, seed,
                                 {"overflow": str(e)})
        if check.name == "star_condition":
            star_passed = report.passed
        reports.append(report)
    return reports


def cmd_classify(config_path: str, out: Optional[str] = None) -> int:
    """Run the selected operator-class checks and write a JSON report."""
    try:
        config = _load(config_path, "classify")
    except ConfigError as e:
        messages.print_error(f"Configuration error: {e}")
        return EXIT_CONFIG
    out = out or config.output or str(Path(config_path).with_suffix(".report.json"))
    operator = config.classify.operator

    messages.print_test_header(f"operator checks for {operator.kind} (seed {config.seed})")
    try:
        reports = run_checks(config)
    except FixpointError as e:
        messages.print_error(str(e))
        return EXIT_CONFIG
    for report in reports:
        messages.format_check_report(report)

    write_report(out, {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": Path(config_path).name,
        "seed": config.seed,
        "seed_from_env": config.seed_from_env,
        "norm_p": config.norm.p,
        "dim": config.dim,
        "operator": operator.to_dict(),
        "checks": [report.to_dict() for report in reports],
    })
    messages.print_info(f"Report written to {out}")
    if all(report.passed for report in reports):
        messages.print_success("All selected checks passed")
        return EXIT_OK
    messages.print_error("At least one check failed")
    return EXIT_CHECK_FAILED


def cmd_counterexample(N: int = DEFAULT_HORIZON, epsilon: Optional[str] = None,
                       ratio: str = "1/2", threshold: Optional[str] = None, out: Optional[str] = None) -> int:
    """Verify the doubling-map counterexample and the corrected condition exactly."""
    try:
        eps = exact(epsilon) if epsilon is not None else None
        r = exact(ratio)
        limit = exact(threshold) if threshold is not None else DEFAULT_THRESHOLD
        if N < 1:
            raise ConfigError("--n", f"must be >= 1, got {N}")
    except (ValueError, ZeroDivisionError, FixpointError) as e:
        messages.print_error(f"Invalid flag: {e}")
        return EXIT_CONFIG

    messages.print_test_header(f"exact counterexample verification for n <= {N}")
    try:
        note = verify_note_claims(N, eps)
        messages.format_note_report(note)
        corrected = corrected_demo(r, N, 1, 1, limit)
        picks = sample_indices(N)
        if corrected.first_below is not None:
            picks = sorted(set(picks) | {corrected.first_below})
        messages.format_corrected_report(corrected, picks)
        if out:
            write_report(out, {
                "schema_version": REPORT_SCHEMA_VERSION,
                "note": note.to_dict(),
                "corrected": corrected.to_dict(picks),
            })
            messages.print_info(f"Exact values written to {out}")
    except ConsistencyError as e:
        messages.print_error(f"Exact check failed: {e}")
        return EXIT_CHECK_FAILED
    except FixpointError as e:
        messages.print_error(f"Invalid flag: {e}")
        return EXIT_CONFIG
    return EXIT_OK if note.passed and corrected.passed else EXIT_CHECK_FAILED


def _sweep_one(path: str) -> Tuple[str, int]:
    """Run every section of one config; returns its most severe exit code."""
    try:
        config = load_config(path)
    except ConfigError as e:
        messages.print_error(f"{path}: {e}")
        return path, EXIT_CONFIG
    codes = []
    if config.iteration is not None:
        codes.append(cmd_iterate(path, str(Path(path).with_suffix(".csv"))))
    if config.classify is not None:
        codes.append(cmd_classify(path, str(Path(path).with_suffix(".report.json"))))
    return path, max(codes, key=SEVERITY.get)


def cmd_sweep(directory: str, jobs: int = 1) -> int:
    """Run every *.json config in a directory; configs share nothing and may run in parallel."""
    folder = Path(directory)
    if not folder.is_dir():
        messages.print_error(f"Not a directory: {directory}")
        return EXIT_CONFIG
    paths = [str(p) for p in sorted(folder.glob("*.json")) if not p.name.endswith(".report.json")]
    if not paths:
        messages.print_warning(f"No configs found in {directory}")
        return EXIT_OK
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, paths))
    else:
        results = [_sweep_one(p) for p in paths]
    for path, code in results:
        (messages.print_success if code == EXIT_OK else messages.print_warning)(f"{path}: exit {code}")
    return max((code for _, code in results), key=SEVERITY.get)


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with all subcommands."""
    parser = _Parser(
        prog="fixpoint",
        description="Fixed-point iteration laboratory: multi-step schemes, operator-class checks "
                    "and an exact counterexample verifier",
    )
    parser.add_argument("--verbose", action="store_true", help="Show debug logging")
    parser.add_argument("--version", action="version", version=f"fixpoint-lab v{__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    iterate = sub.add_parser("iterate", help="Run the multi-step scheme and write a CSV trace")
    iterate.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
    iterate.add_argument("--out", metavar="CSV", help="Trace output path")
    iterate.add_argument("--compare-reduced", action="store_true",
                         help="Also run the family truncated to T_1, T_2 and report the deviation")

    counter = sub.add_parser("counterexample", help="Verify the doubling-map counterexample exactly")
    counter.add_argument("--n", type=int, default=DEFAULT_HORIZON, metavar="N", help="Horizon (default 4096)")
    counter.add_argument("--epsilon", metavar="E", help="Report the first n with pair gap 2/n < E")
    counter.add_argument("--ratio", default="1/2", metavar="R", help="Contraction ratio for the corrected demo")
    counter.add_argument("--threshold", metavar="T", help="Tail-maximum threshold (default 1/1000000)")
    counter.add_argument("--out", metavar="REPORT", help="Also write the exact values as JSON")

    classify = sub.add_parser("classify", help="Check operator-class hypotheses and write a JSON report")
    classify.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
    classify.add_argument("--out", metavar="REPORT", help="Report output path")

    sweep = sub.add_parser("sweep", help="Run every config in a directory")
    sweep.add_argument("--dir", required=True, metavar="PATH", help="Directory of JSON configs")
    sweep.add_argument("--jobs", type=int, default=1, help="Configs to run concurrently")
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parse arguments and dispatch to a subcommand; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    messages.setup_logging(args.verbose)

    if args.command == "iterate":
        return cmd_iterate(args.config, args.out, args.compare_reduced)
    if args.command == "classify":
        return cmd_classify(args.config, args.out)
    if args.command == "counterexample":
        return cmd_counterexample(args.n, args.epsilon, args.ratio, args.threshold, args.out)
    if args.command == "sweep":
        return cmd_sweep(args.dir, args.jobs)
    parser.print_help()
    return EXIT_CONFIG


def main():
    """Main entry point for the CLI."""
    try:
        code = run_cli()
    except KeyboardInterrupt:
        messages.print_error("Operation cancelled by user")
        code = EXIT_CONFIG
    sys.exit(code)


if __name__ == "__main__":
    main()
