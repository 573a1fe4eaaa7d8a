"""
Command-line interface

    schur-realize <command> [inputs] [--config FILE] [--seed N] [--samples N] ...

Each command builds a Report. The machine report (JSON, sorted keys) or
the text summary goes to stdout or --out; logs go to stderr. Exit codes:
0 when every check passes, 1 when a check fails, 2 on input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from . import __version__
from .colligation import Colligation, OutputPair, classify, sample_points
from .completion import CompletionParameter, check_completion, classify_family, parrott_complete
from .config import LOG_LEVELS, OUTPUT_FORMATS, JobConfig, load_config_file, resolve_settings
from .exceptions import ConfigError, DimensionMismatch, RealizationError
from .kernels import GramCertificate, PairKernel, SchurKernel, gram_certify
from .numerics import max_abs
from .overlap import overlap_demo
from .realization import (
    completion_pipeline,
    enumerate_representers,
    example33_suite,
    gleason_check,
    observability_and_equivalence,
    realize_from_pair_cholesky,
)
from .report import CheckOutcome, Report
from .serialization import dump_colligation, parse_inputs
from .worked_examples import example_pair, example_schur

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT_ERROR = 2

# Command-line flag -> setting name
_SETTING_FLAGS = {
    "seed": "rng_seed",
    "samples": "sample_count",
    "radius": "sample_radius",
    "threads": "threads",
    "degree_cap": "degree_cap",
    "tol_rank": "rank_tol",
    "tol_psd": "psd_tol",
    "tol_eq": "eq_tol",
    "format": "format",
    "log_level": "log_level",
}

_INPUT_FLAGS = ("colligation", "pair", "other_pair", "s", "points", "q", "isometry")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("settings")
    group.add_argument("--config", "-c", type=Path, help="YAML settings file")
    group.add_argument("--seed", type=int, help="Seed of all sampling (default: 42)")
    group.add_argument("--samples", type=int, help="Points per sample (default: 50)")
    group.add_argument("--radius", type=float, help="Sample radius in (0, 1) (default: 0.9)")
    group.add_argument("--threads", type=int, help="Worker threads for point sweeps (default: 1)")
    group.add_argument("--degree-cap", type=int, help="Largest Taylor degree (default: 2*d*dimX)")
    group.add_argument("--tol-rank", type=float, help="Relative rank tolerance")
    group.add_argument("--tol-psd", type=float, help="Positivity tolerance")
    group.add_argument("--tol-eq", type=float, help="Identity-check tolerance")
    group.add_argument("--out", "-o", type=Path, help="Write the report here instead of stdout")
    group.add_argument("--format", choices=OUTPUT_FORMATS, help="Report format (default: json)")
    group.add_argument("--log-level", choices=LOG_LEVELS, help="Log level (default: WARNING)")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per workflow."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="schur-realize",
        description="Construct and verify transfer-function realizations of Schur multipliers on the ball",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text)

    p = command("classify", "Classify a colligation or an output pair")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--colligation", type=Path, help="Colligation file")
    source.add_argument("--pair", type=Path, help="Pair file")

    p = command("kernel-check", "Certify positivity of K_S or K_{C,A}, and their equality when both are given")
    p.add_argument("--s", type=Path, help="Schur function file")
    p.add_argument("--pair", type=Path, help="Pair file")
    p.add_argument("--points", type=Path, help="Point file (default: seeded sample)")

    p = command("realize-from-pair", "Coisometric realization of a contractive pair by pivoted Cholesky")
    p.add_argument("--pair", type=Path, required=True, help="Pair file")
    p.add_argument("--dim-u", type=int, help="Input dimension (default: d*dimX + dimY)")
    p.add_argument("--colligation-out", type=Path, help="Write the colligation here")

    p = command("realize-with-pair", "Realize S with a prescribed output pair")
    p.add_argument("--s", type=Path, required=True, help="Schur function file")
    p.add_argument("--pair", type=Path, required=True, help="Pair file")
    p.add_argument("--q", type=Path, help="Completion parameter file {\"Q\": ...} (default: Q = 0)")
    p.add_argument("--colligation-out", type=Path, help="Write the colligation here")

    p = command("representers", "Build a Schur function whose kernel is K_{C,A}")
    p.add_argument("--pair", type=Path, required=True, help="Pair file")
    p.add_argument("--dim-u", type=int, required=True, help="Input dimension")
    p.add_argument("--isometry", type=Path, help="Isometry file {\"G\": ...} (default: [I; 0])")
    p.add_argument("--colligation-out", type=Path, help="Write the realization here")

    p = command("complete", "Complete with an explicit parameter Q and classify the family")
    p.add_argument("--s", type=Path, required=True, help="Schur function file")
    p.add_argument("--pair", type=Path, required=True, help="Pair file")
    p.add_argument("--q", type=Path, required=True, help="Completion parameter file {\"Q\": ...}")
    p.add_argument("--colligation-out", type=Path, help="Write the colligation here")

    p = command("gleason", "Gleason identity, contractivity and canonical sections")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--colligation", type=Path, help="Colligation file")
    source.add_argument("--pair", type=Path, help="Pair file")

    p = command("equivalence", "Observability of two pairs and unitary equivalence")
    p.add_argument("--pair", type=Path, required=True, help="First pair file")
    p.add_argument("--other-pair", type=Path, required=True, help="Second pair file")

    p = command("overlap-demo", "Overlapping spaces of the two worked constructions")
    p.add_argument("--s", type=Path, help="Schur function file (default: the worked example)")
    p.add_argument("--pair", type=Path, help="Pair with K_S = K_{C,A} (default: the worked example)")

    command("example33", "Regression suite for the two-variable worked example")
    return parser


def job_from_args(args: argparse.Namespace) -> JobConfig:
    """
    Resolve settings (defaults, then --config, then flags) into a JobConfig.

    Raises:
        ConfigError: Invalid settings file or values
    """
    file_data = load_config_file(args.config) if args.config else {}
    overrides = {setting: getattr(args, flag) for flag, setting in _SETTING_FLAGS.items()}
    tolerances, sampling, output = resolve_settings(file_data, overrides)
    inputs = {flag: getattr(args, flag) for flag in _INPUT_FLAGS if getattr(args, flag, None) is not None}
    options = {}
    for key in ("dim_u", "colligation_out"):
        if getattr(args, key, None) is not None:
            options[key] = getattr(args, key)
    return JobConfig(
        command=args.command,
        inputs=inputs,
        options=options,
        tolerances=tolerances,
        sampling=sampling,
        output=args.out,
        output_format=output["format"],
        log_level=output["log_level"],
    )


def _kernel_outcome(cert: GramCertificate, eq_tol: float) -> CheckOutcome:
    passed = cert.psd
    if cert.max_diff is not None:
        passed = passed and cert.max_diff <= eq_tol * max(1.0, max_abs(cert.sample.gram))
    return passed, cert.max_diff if cert.max_diff is not None else cert.min_eig, cert.to_dict()


def _run_classify(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    obj: Colligation | OutputPair
    if "colligation" in inputs:
        obj = inputs["colligation"]
    else:
        obj = inputs["pair"]

    def check() -> CheckOutcome:
        result = classify(obj, job.tolerances)
        report.results["classification"] = result.to_dict()
        if isinstance(obj, Colligation):
            return result.contractive, result.norm - 1.0, result.to_dict()  # type: ignore[union-attr]
        return result.contractive_pair, result.min_eigenvalue, result.to_dict()  # type: ignore[union-attr]

    report.record("contractive", check)


def _run_kernel_check(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    s = inputs.get("s")
    p = inputs.get("pair")
    if s is None and p is None:
        raise ConfigError("kernel-check needs --s, --pair or both")
    d = s.d if s is not None else p.d  # type: ignore[union-attr]
    if "points" in inputs:
        points = inputs["points"]
        if points[0].d != d:
            raise DimensionMismatch(f"points lie in C^{points[0].d}, expected d={d}")
    else:
        points = sample_points(d, job.sampling)

    def check() -> CheckOutcome:
        k1 = SchurKernel(s) if s is not None else PairKernel(p)  # type: ignore[arg-type]
        k2 = PairKernel(p) if s is not None and p is not None else None
        cert = gram_certify(k1, points, job.tolerances, k2=k2, threads=job.sampling.threads)
        return _kernel_outcome(cert, job.tolerances.eq_tol)

    report.record("kernel", check)


def _write_colligation(job: JobConfig, report: Report, c: Colligation) -> None:
    out = job.options.get("colligation_out")
    if out is not None:
        report.results["colligation_file"] = str(dump_colligation(c, out))


def _run_realize_from_pair(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    p = inputs["pair"]

    def check() -> CheckOutcome:
        dim_u = job.options.get("dim_u")
        if dim_u is None:
            dim_u = p.d * p.dim_x + p.dim_y
        c = realize_from_pair_cholesky(p, dim_u, job.tolerances)
        result = classify(c, job.tolerances)
        report.results["colligation"] = c.to_dict()
        _write_colligation(job, report, c)
        return result.coisometric, result.coisometry_residual, result.to_dict()  # type: ignore[union-attr]

    report.record("coisometric", check)


def _run_completion(job: JobConfig, report: Report, inputs: dict[str, Any], family: bool) -> None:
    s = inputs["s"]
    p = inputs["pair"]
    q_matrix = inputs["q"] if "q" in inputs else None

    def check() -> CheckOutcome:
        blocks = completion_pipeline(s, p, job.sampling, job.tolerances)
        report.results["blocks"] = blocks.to_dict()
        q = None if q_matrix is None else CompletionParameter(q_matrix, job.tolerances)
        completion = parrott_complete(blocks, q)
        _write_colligation(job, report, completion.colligation)
        result = check_completion(completion.colligation, blocks.dsub, s, job.sampling, job.tolerances)
        if family:
            report.results["family"] = classify_family(blocks).to_dict()
        passed = result.weakly_coisometric and result.reproduction_error <= job.tolerances.eq_tol
        residual = max(result.weak_coisometry_residual, result.reproduction_error)
        return passed, residual, {**result.to_dict(), **completion.to_dict()}

    report.record("completion", check)


def _run_representers(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    p = inputs["pair"]
    g = inputs["isometry"] if "isometry" in inputs else None

    def check() -> CheckOutcome:
        rep = enumerate_representers(p, job.options["dim_u"], g, job.sampling, job.tolerances)
        _write_colligation(job, report, rep.colligation)
        report.results["representer"] = rep.to_dict()
        passed = rep.certificate.psd and rep.formula_residual <= job.tolerances.eq_tol
        return passed, rep.formula_residual, rep.to_dict()

    report.record("representer", check)


def _run_gleason(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    obj: Colligation | OutputPair
    if "colligation" in inputs:
        obj = inputs["colligation"]
    else:
        obj = inputs["pair"]
    result: dict[str, Any] = {}

    def run_once() -> dict[str, Any]:
        if not result:
            result.update(gleason_check(obj, job.sampling, job.tolerances).to_dict())
        return result

    report.record("dop1", lambda: (run_once()["dop1"], run_once()["dop1_residual"], {}))
    report.record("dop2", lambda: (run_once()["dop2"], run_once()["min_eigenvalue"], {}))
    report.record(
        "canonical",
        lambda: (run_once()["canonical"], run_once()["canonical_residual"], {"kernel": run_once()["kernel"]}),
    )
    if result:
        report.results["gleason"] = result


def _run_equivalence(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    p1 = inputs["pair"]
    p2 = inputs["other_pair"]

    def check() -> CheckOutcome:
        result = observability_and_equivalence(p1, p2, job.tolerances)
        report.results["equivalence"] = result.to_dict()
        return True, result.residual, {"equivalent": result.equivalent, "kernels_equal": result.kernels_equal}

    report.record("equivalence_decided", check)
    equivalence = report.results.get("equivalence")
    if equivalence is not None:
        report.add("observable[pair]", equivalence["observable1"])
        report.add("observable[other_pair]", equivalence["observable2"])


def _run_overlap_demo(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    s = inputs["s"] if "s" in inputs else example_schur()
    p = inputs["pair"] if "pair" in inputs else example_pair(0.0)
    report.merge(overlap_demo(s, p, job.sampling, job.tolerances))


def _run_example33(job: JobConfig, report: Report, inputs: dict[str, Any]) -> None:
    report.merge(example33_suite(job.sampling, job.tolerances))


_COMMANDS: dict[str, Callable[[JobConfig, Report, dict[str, Any]], None]] = {
    "classify": _run_classify,
    "kernel-check": _run_kernel_check,
    "realize-from-pair": _run_realize_from_pair,
    "realize-with-pair": lambda job, report, inputs: _run_completion(job, report, inputs, family=False),
    "representers": _run_representers,
    "complete": lambda job, report, inputs: _run_completion(job, report, inputs, family=True),
    "gleason": _run_gleason,
    "equivalence": _run_equivalence,
    "overlap-demo": _run_overlap_demo,
    "example33": _run_example33,
}


def run(job: JobConfig) -> Report:
    """
    Execute one job.

    Errors raised inside a check become failed records; errors while
    reading inputs propagate.

    Raises:
        ConfigError: Unknown command
        ParseError: Malformed input file
    """
    if job.command not in _COMMANDS:
        raise ConfigError(f"unknown command {job.command!r}")
    report = Report(
        job.command,
        settings={"tolerances": job.tolerances.to_dict(), "sampling": job.sampling.to_dict()},
    )
    logger.info(f"Running {job.command} with inputs {sorted(job.inputs)}")
    _COMMANDS[job.command](job, report, parse_inputs(job.inputs))
    return report


def emit(report: Report, job: JobConfig) -> None:
    """Write the report in the requested format to --out or stdout."""
    text = report.to_json() + "\n" if job.output_format == "json" else report.render_text()
    if job.output is None:
        sys.stdout.write(text)
        return
    job.output.parent.mkdir(parents=True, exist_ok=True)
    job.output.write_text(text)
    logger.info(f"Report written to: {job.output}")


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the schur-realize command."""
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    logging.basicConfig(level=job.log_level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        report = run(job)
        emit(report, job)
    except RealizationError as e:
        print(f"Input error ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
