"""Strict file formats: keys, metadata, submissions, reports.

All files are UTF-8 TSV with LF line endings, a required header, and
exactly one TAB between fields -- no other whitespace tolerance.  A
trailing newline is required.  Scores are written with 17 significant
digits so write -> parse round-trips bit-exactly; report TSVs print
floats with ``%.6f``; JSON keeps full precision.

``validate`` mirrors the strict parser but never raises on content: it
collects every defect as an issue, so a submission passing validation
is guaranteed to parse.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    DuplicateSegment,
    HeaderMismatch,
    LanguageMismatch,
    Malformed,
    MissingSegment,
    NonFiniteScore,
    ToolkitError,
    UnknownSegment,
)
from .scoring import ScoreReport
from .trial import (
    EMPTY_META,
    LanguageSet,
    ScoreSet,
    SegmentMeta,
    SourceType,
    TrialKey,
    build_key,
)

logger = logging.getLogger(__name__)

KEY_HEADER = "segmentid\tlanguage"
META_HEADER_BASE = ("segmentid", "source_type", "sad_duration")
UNKNOWN_FIELD = "-"

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")
_NONFINITE_RE = re.compile(r"[+-]?(?:nan|inf(?:inity)?)\Z", re.IGNORECASE)


def _read_lines(path: str | Path) -> list[str]:
    """File contents as a list of lines under the strict grammar."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise Malformed(None, f"not valid UTF-8 ({exc.reason} at byte {exc.start})") from None
    if not text:
        raise Malformed(None, "empty file")
    if "\r" in text:
        line_no = text[: text.index("\r")].count("\n") + 1
        raise Malformed(line_no, "carriage return found; lines must end with LF only")
    if not text.endswith("\n"):
        raise Malformed(text.count("\n") + 1, "missing trailing newline")
    return text.split("\n")[:-1]


def _write_lines(path: str | Path, lines: Iterable[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")
    return path


def _parse_score_token(token: str) -> float | None:
    """Value of a score cell, or None if the token is not a number.

    Plain and scientific decimal notation are accepted, as are the
    usual non-finite spellings (which parse but fail the finite check
    downstream).  Anything else -- surrounding whitespace, underscores,
    empty fields -- is malformed.
    """
    if _NUMBER_RE.match(token) or _NONFINITE_RE.match(token):
        return float(token)
    return None


def parse_key(
    key_path: str | Path,
    meta_path: str | Path | None = None,
    languages: LanguageSet | None = None,
) -> TrialKey:
    """Read a key file (and optional metadata file) into a TrialKey.

    The language set is taken from ``languages`` when given, otherwise
    derived from the codes present in the file, sorted.  Metadata is
    joined on segment id; rows for segments the key does not contain
    are ignored with a logged warning, and key segments without
    metadata get unknown metadata.
    """
    lines = _read_lines(key_path)
    if lines[0] != KEY_HEADER:
        raise HeaderMismatch(f"key header must be {KEY_HEADER!r}, got {lines[0]!r}")
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            raise Malformed(line_no, "blank line")
        fields = line.split("\t")
        if len(fields) != 2:
            raise Malformed(line_no, f"expected 2 tab-separated fields, got {len(fields)}")
        sid, code = fields
        if not sid:
            raise Malformed(line_no, "empty segment id")
        if not code:
            raise Malformed(line_no, "empty language code")
        if sid in seen:
            raise DuplicateSegment(sid, line_no)
        seen.add(sid)
        rows.append((sid, code))
    if not rows:
        raise Malformed(None, "key has no data rows")
    metas = parse_metadata(meta_path, known_ids=seen) if meta_path is not None else {}
    return build_key(
        [(sid, code, metas.get(sid, EMPTY_META)) for sid, code in rows],
        languages=languages,
    )


def parse_metadata(
    path: str | Path,
    known_ids: set[str] | None = None,
) -> dict[str, SegmentMeta]:
    """Read a metadata file into a segment-id -> SegmentMeta mapping.

    Columns beyond the three fixed ones are free-form audit fields
    named by the header.  ``-`` marks an unknown value.
    """
    lines = _read_lines(path)
    header = lines[0].split("\t")
    if tuple(header[:3]) != META_HEADER_BASE:
        raise HeaderMismatch(
            f"metadata header must start with {list(META_HEADER_BASE)}, got {header[:3]}"
        )
    if any(not name for name in header) or len(set(header)) != len(header):
        raise HeaderMismatch("metadata column names must be non-empty and unique")
    extra_names = header[3:]
    out: dict[str, SegmentMeta] = {}
    seen: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            raise Malformed(line_no, "blank line")
        fields = line.split("\t")
        if len(fields) != len(header):
            raise Malformed(
                line_no, f"expected {len(header)} tab-separated fields, got {len(fields)}"
            )
        sid = fields[0]
        if not sid:
            raise Malformed(line_no, "empty segment id")
        if sid in seen:
            raise DuplicateSegment(sid, line_no)
        seen.add(sid)

        if fields[1] == UNKNOWN_FIELD:
            source = None
        else:
            try:
                source = SourceType(fields[1])
            except ValueError:
                raise Malformed(line_no, f"unknown source type {fields[1]!r}") from None

        if fields[2] == UNKNOWN_FIELD:
            duration = None
        else:
            value = _parse_score_token(fields[2])
            if value is None or not math.isfinite(value) or value <= 0.0:
                raise Malformed(line_no, f"sad_duration must be a positive real, got {fields[2]!r}")
            duration = value

        extra = {
            name: value
            for name, value in zip(extra_names, fields[3:])
            if value != UNKNOWN_FIELD
        }
        if any(not v for v in extra.values()):
            raise Malformed(line_no, "empty field (use '-' for unknown values)")

        if known_ids is not None and sid not in known_ids:
            logger.warning(
                "metadata row for segment %r ignored: not in the key (%s line %d)",
                sid, path, line_no,
            )
            continue
        out[sid] = SegmentMeta(source_type=source, sad_duration=duration, extra=extra)
    return out


@dataclass(frozen=True)
class Issue:
    """One validation finding."""

    severity: str  # "ERROR" or "WARNING"
    code: str
    message: str
    location: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating one submission file."""

    ok: bool
    issues: tuple[Issue, ...]

    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "ERROR"]

    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "WARNING"]


def submission_header(languages: LanguageSet) -> str:
    return "segmentid\t" + "\t".join(languages.codes)


def _scan_submission(
    path: str | Path,
    key: TrialKey,
    issues: list[Issue] | None,
) -> np.ndarray | None:
    """Shared submission reader.

    With ``issues is None`` the first defect raises; otherwise every
    defect is appended as an ERROR issue and scanning continues.
    Returns the score matrix in key order, or None when it could not be
    assembled.
    """
    strict = issues is None

    def record(exc: ToolkitError) -> None:
        if strict:
            raise exc
        line_no = getattr(exc, "line_no", None)
        location = f"{path}:{line_no}" if line_no is not None else str(path)
        issues.append(Issue("ERROR", exc.code, str(exc), location))

    try:
        lines = _read_lines(path)
    except Malformed as exc:
        record(exc)
        return None

    expected = submission_header(key.languages)
    if lines[0] != expected:
        record(HeaderMismatch(
            "submission header must name the key languages in key order; "
            f"expected {expected!r}, got {lines[0]!r}"
        ))
        return None

    n_langs = len(key.languages)
    matrix = np.zeros((len(key), n_langs), dtype=np.float64)
    seen = np.zeros(len(key), dtype=bool)
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            record(Malformed(line_no, "blank line"))
            continue
        fields = line.split("\t")
        if len(fields) != n_langs + 1:
            record(Malformed(
                line_no, f"expected {n_langs + 1} tab-separated fields, got {len(fields)}"
            ))
            continue
        sid = fields[0]
        if not sid:
            record(Malformed(line_no, "empty segment id"))
            continue
        if sid not in key:
            record(UnknownSegment(sid, line_no))
            continue
        row = key.row(sid)
        if seen[row]:
            record(DuplicateSegment(sid, line_no))
            continue
        # the segment is present from here on, even if its cells turn
        # out bad -- a defective row must not also count as missing
        seen[row] = True
        values = np.empty(n_langs, dtype=np.float64)
        row_ok = True
        for col, token in enumerate(fields[1:]):
            value = _parse_score_token(token)
            if value is None:
                record(Malformed(
                    line_no,
                    f"bad number {token!r} in column {key.languages.codes[col]!r}",
                ))
                row_ok = False
                break
            if not math.isfinite(value):
                record(NonFiniteScore(sid, key.languages.codes[col], line_no))
                row_ok = False
            values[col] = value
        if not row_ok:
            continue
        matrix[row] = values

    for row in np.flatnonzero(~seen):
        record(MissingSegment(key.segment_ids[row]))

    if not strict and issues:
        return None
    return matrix


def parse_submission(
    path: str | Path,
    key: TrialKey,
    system_id: str | None = None,
    condition_tag: str = "",
) -> ScoreSet:
    """Read a submission file into a ScoreSet aligned to the key.

    Rows may appear in any order in the file; the result is reordered
    to key order.  The first defect raises a typed error.
    """
    matrix = _scan_submission(path, key, None)
    assert matrix is not None
    return ScoreSet(
        system_id=system_id if system_id is not None else Path(path).stem,
        languages=key.languages,
        scores=matrix,
        condition_tag=condition_tag,
    )


def validate(path: str | Path, key: TrialKey) -> ValidationReport:
    """Check a submission against the key without raising on content.

    Every parse defect becomes an ERROR issue with its location; a file
    with no ERROR issues is guaranteed to parse.  Degenerate but legal
    content (a score column that never varies) is a WARNING.
    """
    issues: list[Issue] = []
    matrix = _scan_submission(path, key, issues)
    ok = not any(issue.severity == "ERROR" for issue in issues)
    if ok and matrix is not None and matrix.shape[0] >= 2:
        constant = [
            key.languages.codes[j]
            for j in range(matrix.shape[1])
            if matrix[:, j].max() == matrix[:, j].min()
        ]
        if constant:
            issues.append(Issue(
                "WARNING",
                "CONSTANT_SCORES",
                "score column(s) with zero variance: " + ", ".join(constant),
                str(path),
            ))
    return ValidationReport(ok=ok, issues=tuple(issues))


def validation_to_json(report: ValidationReport) -> dict:
    return {
        "ok": report.ok,
        "issues": [
            {
                "severity": i.severity,
                "code": i.code,
                "message": i.message,
                "location": i.location,
            }
            for i in report.issues
        ],
    }


def write_key(path: str | Path, key: TrialKey) -> Path:
    """Write a key file (segmentid, language)."""
    lines = [KEY_HEADER]
    for sid, label in zip(key.segment_ids, key.labels):
        lines.append(f"{sid}\t{key.languages.codes[label]}")
    return _write_lines(path, lines)


def write_metadata(path: str | Path, key: TrialKey) -> Path:
    """Write a metadata file for a key; ``-`` marks unknown values.

    Durations are written with full round-trip precision so a rewritten
    key reproduces downstream numbers exactly.
    """
    extra_names = sorted({name for meta in key.metas for name in meta.extra})
    lines = ["\t".join(META_HEADER_BASE + tuple(extra_names))]
    for sid, meta in zip(key.segment_ids, key.metas):
        fields = [
            sid,
            meta.source_type.value if meta.source_type is not None else UNKNOWN_FIELD,
            repr(meta.sad_duration) if meta.sad_duration is not None else UNKNOWN_FIELD,
        ]
        fields.extend(meta.extra.get(name, UNKNOWN_FIELD) for name in extra_names)
        lines.append("\t".join(fields))
    return _write_lines(path, lines)


def write_submission(path: str | Path, scores: ScoreSet, key: TrialKey) -> Path:
    """Write a submission file; values keep 17 significant digits."""
    if scores.languages != key.languages or len(scores) != len(key):
        raise LanguageMismatch("scores are not aligned to the key")
    lines = [submission_header(key.languages)]
    for sid, row in zip(key.segment_ids, scores.scores):
        lines.append(sid + "\t" + "\t".join("%.17g" % v for v in row))
    return _write_lines(path, lines)


def _json_float(x: float) -> float | str:
    """Floats for JSON; infinities become the strings 'inf' / '-inf'."""
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def report_to_json(report: ScoreReport) -> dict:
    return {
        "system_id": report.system_id,
        "apps": [
            {
                "params": {
                    "c_miss": app.params.c_miss,
                    "c_fa": app.params.c_fa,
                    "p_target": app.params.p_target,
                },
                "pairs": [
                    {
                        "target": o.target,
                        "nontarget": o.nontarget,
                        "n_target_trials": o.n_target_trials,
                        "n_nontarget_trials": o.n_nontarget_trials,
                        "act": {
                            "threshold": _json_float(o.act_threshold),
                            "p_miss": o.act_p_miss,
                            "p_fa": o.act_p_fa,
                            "cost": o.act_cost,
                        },
                        "min": {
                            "threshold": _json_float(o.min_threshold),
                            "p_miss": o.min_p_miss,
                            "p_fa": o.min_p_fa,
                            "cost": o.min_cost,
                        },
                    }
                    for o in app.pairs
                ],
                "per_language": [
                    {
                        "language": lang.language,
                        "act_cost": lang.act_cost,
                        "min_cost": lang.min_cost,
                    }
                    for lang in app.per_language
                ],
                "aggregate": {"act": app.act_cost, "min": app.min_cost},
            }
            for app in report.apps
        ],
        "act_c_primary": report.act_c_primary,
        "min_c_primary": report.min_c_primary,
        "calibration_gap": report.calibration_gap,
    }


def _write_json(path: str | Path, obj: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(obj, handle, indent=2)
        handle.write("\n")
    return path


def safe_name(name: str) -> str:
    """A string usable as a file-name fragment."""
    return re.sub(r"[^\w.+-]", "_", name)


PAIRS_TSV_HEADER = (
    "app\ttarget\tnontarget\tn_target_trials\tn_nontarget_trials"
    "\tact_threshold\tact_p_miss\tact_p_fa\tact_cost"
    "\tmin_threshold\tmin_p_miss\tmin_p_fa\tmin_cost"
)


def write_report(report: ScoreReport, out_dir: str | Path) -> list[Path]:
    """Write one system's full report: JSON plus pair and language TSVs.

    Output is deterministic: rerunning the same scoring yields
    byte-identical files.
    """
    out_dir = Path(out_dir)
    stem = safe_name(report.system_id)
    paths = [_write_json(out_dir / f"{stem}.report.json", report_to_json(report))]

    pair_lines = [PAIRS_TSV_HEADER]
    for app in report.apps:
        label = app.params.label()
        for o in app.pairs:
            pair_lines.append(
                f"{label}\t{o.target}\t{o.nontarget}"
                f"\t{o.n_target_trials}\t{o.n_nontarget_trials}"
                f"\t{o.act_threshold:.6f}\t{o.act_p_miss:.6f}\t{o.act_p_fa:.6f}\t{o.act_cost:.6f}"
                f"\t{o.min_threshold:.6f}\t{o.min_p_miss:.6f}\t{o.min_p_fa:.6f}\t{o.min_cost:.6f}"
            )
    paths.append(_write_lines(out_dir / f"{stem}.pairs.tsv", pair_lines))

    lang_lines = ["app\tlanguage\tact_cost\tmin_cost"]
    for app in report.apps:
        label = app.params.label()
        for lang in app.per_language:
            lang_lines.append(
                f"{label}\t{lang.language}\t{lang.act_cost:.6f}\t{lang.min_cost:.6f}"
            )
    paths.append(_write_lines(out_dir / f"{stem}.languages.tsv", lang_lines))
    return paths


def write_leaderboard(rows, path: str | Path) -> Path:
    """Leaderboard TSV: one row per system, sorted as given."""
    lines = ["system_id\tact_c_primary\tmin_c_primary\tcalibration_gap"]
    for row in rows:
        lines.append(
            f"{row.system_id}\t{row.act_c_primary:.6f}"
            f"\t{row.min_c_primary:.6f}\t{row.calibration_gap:.6f}"
        )
    return _write_lines(path, lines)


def write_language_costs(rows, path: str | Path) -> Path:
    """Long-format per-language actual costs (plotting source data)."""
    lines = ["system_id\tlanguage\tact_cost"]
    for row in rows:
        lines.append(f"{row.system_id}\t{row.language}\t{row.act_cost:.6f}")
    return _write_lines(path, lines)


def write_confusion(conf, path: str | Path) -> Path:
    """Confusion TSV: header row/column of language codes.

    Cell [i][j] is P_miss of language i on the diagonal and
    P_fa(i as target, j as non-target) off it, at the Bayes threshold
    of the matrix's application.  N+1 rows and columns counting the
    headers.
    """
    codes = conf.languages.codes
    lines = ["target\t" + "\t".join(codes)]
    for i, code in enumerate(codes):
        lines.append(code + "\t" + "\t".join(f"{v:.6f}" for v in conf.cells[i]))
    return _write_lines(path, lines)


def write_partition_summary(results, path: str | Path) -> Path:
    """Per-cell aggregate costs of a partitioned scoring run.

    ``results`` holds (label, n_segments, ScoreReport) triples; an
    empty list produces a header-only file.
    """
    lines = ["label\tsegments\tact_c_primary\tmin_c_primary\tcalibration_gap"]
    for label, n_segments, report in results:
        lines.append(
            f"{label}\t{n_segments}\t{report.act_c_primary:.6f}"
            f"\t{report.min_c_primary:.6f}\t{report.calibration_gap:.6f}"
        )
    return _write_lines(path, lines)


def write_validation(report: ValidationReport, path: str | Path) -> Path:
    return _write_json(path, validation_to_json(report))
