"""Command-line front end: validate, score, analyze, simulate.

Human-readable summaries go to stdout; machine artifacts (TSV, JSON,
figures) are written under ``--out``.  Exit codes: 0 success, 1 content
or validation failure, 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, figures, formats, simulate
from .errors import ToolkitError
from .scoring import ApplicationSet, DEFAULT_APPS, Scope, c_primary
from .trial import PartitionSpec, TrialKey, partition

logger = logging.getLogger(__name__)


def _add_key_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--key", required=True, help="trial key TSV")
    parser.add_argument("--meta", help="segment metadata TSV")


def _add_scoring_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--apps",
        type=ApplicationSet.parse,
        default=DEFAULT_APPS,
        metavar="c_miss:c_fa:p_target[,...]",
        help="application parameter sets (default: 1:1:0.5,1:1:0.1)",
    )
    parser.add_argument(
        "--scope",
        type=Scope,
        choices=list(Scope),
        default=Scope.PER_TARGET,
        metavar="global|target|pair",
        help="threshold scope for the minimum cost (default: target)",
    )
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lideval",
        description="Score language-detection submissions with the pairwise detection-cost protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a submission file against a key")
    p.add_argument("submission", help="submission TSV")
    _add_key_flags(p)
    p.add_argument("--out", help="directory for the JSON validation report")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="score one or more submissions")
    p.add_argument("submissions", nargs="+", help="submission TSVs")
    _add_key_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    _add_scoring_flags(p)
    p.add_argument(
        "--keep-going",
        action="store_true",
        help="score the remaining submissions when one fails validation",
    )
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="confusion / partition / per-language analyses")
    p.add_argument("submission", help="submission TSV")
    _add_key_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    _add_scoring_flags(p)
    p.add_argument(
        "--partition",
        metavar="source_type|duration|field:NAME",
        help="score each metadata cell separately",
    )
    p.add_argument(
        "--bins",
        metavar="e1,e2,...",
        help="duration bin edges in seconds (with --partition duration)",
    )
    p.add_argument("--confusion", action="store_true", help="emit the confusion matrix")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="generate a synthetic campaign")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="campaign config file (key = value lines)")
    group.add_argument("--preset", choices=sorted(simulate.PRESETS), help="built-in campaign")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the campaign seed")
    p.set_defaults(func=cmd_simulate)

    return parser


def _load_key(args: argparse.Namespace) -> TrialKey:
    return formats.parse_key(args.key, meta_path=args.meta)


def _print_issues(report: formats.ValidationReport, path: str) -> None:
    for issue in report.issues:
        print(f"{issue.severity}\t{issue.code}\t{issue.location}\t{issue.message}")
    status = "OK" if report.ok else "FAILED"
    print(f"{path}: {status} ({len(report.errors())} error(s), {len(report.warnings())} warning(s))")


def cmd_validate(args: argparse.Namespace) -> int:
    key = _load_key(args)
    report = formats.validate(args.submission, key)
    _print_issues(report, args.submission)
    if args.out:
        out = Path(args.out)
        formats.write_validation(report, out / "validation.json")
    return 0 if report.ok else 1


def cmd_score(args: argparse.Namespace) -> int:
    key = _load_key(args)
    out = Path(args.out)
    reports = []
    failed = []
    for path in args.submissions:
        vreport = formats.validate(path, key)
        for issue in vreport.errors():
            logger.error("%s: %s (%s)", issue.code, issue.message, issue.location)
        for issue in vreport.warnings():
            logger.warning("%s: %s (%s)", issue.code, issue.message, issue.location)
        if not vreport.ok:
            failed.append(path)
            if args.keep_going:
                continue
            print(f"{path}: validation failed; stopping (use --keep-going to continue)",
                  file=sys.stderr)
            return 1
        scores = formats.parse_submission(path, key)
        report = c_primary(scores, key, args.apps, args.scope)
        formats.write_report(report, out)
        reports.append(report)

    if reports:
        board = analysis.leaderboard(reports)
        for row in board.rows:
            print(
                f"{row.system_id}\tact={row.act_c_primary:.6f}"
                f"\tmin={row.min_c_primary:.6f}\tgap={row.calibration_gap:.6f}"
            )
        if len(board.rows) > 1:
            formats.write_leaderboard(board.rows, out / "leaderboard.tsv")
            if not args.no_figures:
                figures.save_leaderboard_figure(board, out / "leaderboard.png")
            rows = analysis.language_dispersion(reports)
            formats.write_language_costs(rows, out / "language_costs.tsv")
            if not args.no_figures:
                figures.save_dispersion_figure(rows, out / "language_costs.png")
    return 1 if failed else 0


def _partition_spec(args: argparse.Namespace) -> PartitionSpec | None:
    if args.partition is None:
        if args.bins is not None:
            raise ValueError("--bins only applies with --partition duration")
        return None
    edges = None
    if args.bins is not None:
        if args.partition != "duration":
            raise ValueError("--bins only applies with --partition duration")
        edges = [float(e) for e in args.bins.split(",")]
    if args.partition == "source_type":
        return PartitionSpec.by_source_type()
    if args.partition == "duration":
        return PartitionSpec.by_duration(edges)
    if args.partition.startswith("field:"):
        return PartitionSpec.by_extra_field(args.partition.split(":", 1)[1])
    raise ValueError(
        f"bad --partition {args.partition!r}; expected source_type, duration, or field:NAME"
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    spec = _partition_spec(args)
    key = _load_key(args)
    out = Path(args.out)

    vreport = formats.validate(args.submission, key)
    if not vreport.ok:
        _print_issues(vreport, args.submission)
        return 1
    scores = formats.parse_submission(args.submission, key)

    report = c_primary(scores, key, args.apps, args.scope)
    formats.write_report(report, out)
    rows = analysis.language_dispersion([report])
    formats.write_language_costs(rows, out / "language_costs.tsv")
    if not args.no_figures:
        figures.save_language_costs_figure(report, out / f"language_costs_{formats.safe_name(report.system_id)}.png")
    print(
        f"{report.system_id}\tact={report.act_c_primary:.6f}"
        f"\tmin={report.min_c_primary:.6f}\tgap={report.calibration_gap:.6f}"
    )

    if args.confusion:
        conf = analysis.confusion(scores, key, app=args.apps.apps[0])
        stem = f"confusion_{formats.safe_name(conf.app.label())}"
        formats.write_confusion(conf, out / f"{stem}.tsv")
        if not args.no_figures:
            figures.save_confusion_figure(conf, out / f"{stem}.png")

    if spec is not None:
        cells = partition(key, spec)
        sizes = {label: len(rows_) for label, rows_ in cells}
        results = analysis.partition_scores(
            scores, key, spec, args.apps, args.scope, cells=cells
        )
        summary = [(label, sizes[label], cell_report) for label, cell_report in results]
        name = spec.kind.value if spec.field_name is None else f"field_{spec.field_name}"
        formats.write_partition_summary(summary, out / f"partition_{name}.tsv")
        if not args.no_figures and summary:
            figures.save_partition_figure(summary, out / f"partition_{name}.png", name)
        for label, n_segments, cell_report in summary:
            print(
                f"[{label}] segments={n_segments}\tact={cell_report.act_c_primary:.6f}"
                f"\tmin={cell_report.min_c_primary:.6f}"
            )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.config:
        config, specs = simulate.parse_sim_config(args.config)
    else:
        config, specs = simulate.load_preset(args.preset)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    campaign = simulate.simulate_campaign(config, specs)
    out = Path(args.out)
    formats.write_key(out / "key.tsv", campaign.key)
    formats.write_metadata(out / "metadata.tsv", campaign.key)
    for scores in campaign.scoresets:
        formats.write_submission(
            out / "submissions" / f"{formats.safe_name(scores.system_id)}.tsv",
            scores,
            campaign.key,
        )
    print(
        f"simulated {len(campaign.key)} segments, {len(config.languages)} languages, "
        f"{len(campaign.scoresets)} system(s) -> {out}"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_exit() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_exit()
