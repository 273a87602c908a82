"""Immutable data model: languages, segments, ground truth, and scores.

Everything downstream (parsing, scoring, analysis, simulation) works in
terms of these types.  They are frozen after construction and safe to
share across threads; array fields are marked read-only.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DuplicateSegment, MissingDuration, UnknownLanguage

logger = logging.getLogger(__name__)

#: Default speech-duration bin edges (seconds) for partitioned analyses.
#: Spans the nominal 3-35 s segment range at roughly 5 s granularity.
DEFAULT_DURATION_EDGES: tuple[float, ...] = (3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0)


class SourceType(str, enum.Enum):
    """Audio source type of a segment."""

    CTS = "CTS"
    BNBS = "BNBS"
    OTHER = "OTHER"


@dataclass(frozen=True)
class LanguageSet:
    """Ordered, unique language codes.

    The order is fixed at construction and defines the column order of
    every score matrix and confusion matrix downstream.
    """

    codes: tuple[str, ...]

    def __post_init__(self) -> None:
        codes = tuple(self.codes)
        object.__setattr__(self, "codes", codes)
        if len(codes) < 2:
            raise ValueError("a language set needs at least two codes")
        if any(not isinstance(c, str) or not c for c in codes):
            raise ValueError("language codes must be non-empty strings")
        index = {c: i for i, c in enumerate(codes)}
        if len(index) != len(codes):
            raise ValueError("language codes must be unique")
        object.__setattr__(self, "_index", index)

    def index(self, code: str) -> int:
        """0-based position of ``code``; raises UnknownLanguage otherwise."""
        try:
            return self._index[code]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownLanguage(code) from None

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[str]:
        return iter(self.codes)

    def __contains__(self, code: object) -> bool:
        return code in self._index  # type: ignore[attr-defined]


@dataclass(frozen=True)
class SegmentMeta:
    """Per-segment audit metadata.

    Unknown values are represented explicitly as ``None`` (never
    defaulted), so partitions cannot silently misclassify a segment.
    ``sad_duration`` is seconds of detected speech and must be positive
    when present.
    """

    source_type: SourceType | None = None
    sad_duration: float | None = None
    extra: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.sad_duration is not None:
            d = float(self.sad_duration)
            if not math.isfinite(d) or d <= 0.0:
                raise ValueError(f"sad_duration must be a positive real, got {self.sad_duration!r}")
            object.__setattr__(self, "sad_duration", d)


#: Metadata for a segment nothing is known about.
EMPTY_META = SegmentMeta()


@dataclass(frozen=True, eq=False)
class TrialKey:
    """Ground truth: segment ids, true-language labels, and metadata.

    Rows are stored in construction order; ``labels`` indexes into
    ``languages``.  Segment ids are unique.
    """

    languages: LanguageSet
    segment_ids: tuple[str, ...]
    labels: np.ndarray
    metas: tuple[SegmentMeta, ...]

    def __post_init__(self) -> None:
        ids = tuple(self.segment_ids)
        metas = tuple(self.metas)
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        labels.setflags(write=False)
        object.__setattr__(self, "segment_ids", ids)
        object.__setattr__(self, "metas", metas)
        object.__setattr__(self, "labels", labels)
        n_rows = len(ids)
        if labels.shape != (n_rows,) or len(metas) != n_rows:
            raise ValueError("segment_ids, labels and metas must have equal length")
        if n_rows and (labels.min() < 0 or labels.max() >= len(self.languages)):
            raise ValueError("language label out of range")
        row_index: dict[str, int] = {}
        for i, sid in enumerate(ids):
            if sid in row_index:
                raise DuplicateSegment(sid)
            row_index[sid] = i
        object.__setattr__(self, "_row_index", row_index)

    def __len__(self) -> int:
        return len(self.segment_ids)

    def row(self, segment_id: str) -> int:
        """Row number of a segment id (KeyError if absent)."""
        return self._row_index[segment_id]  # type: ignore[attr-defined]

    def __contains__(self, segment_id: object) -> bool:
        return segment_id in self._row_index  # type: ignore[attr-defined]

    def language_counts(self) -> np.ndarray:
        """Number of trials per language, in language-set order."""
        return np.bincount(self.labels, minlength=len(self.languages))

    def durations(self) -> np.ndarray:
        """Per-row SAD durations; NaN where unknown."""
        return np.array(
            [m.sad_duration if m.sad_duration is not None else np.nan for m in self.metas],
            dtype=np.float64,
        )

    def subset(self, rows: Sequence[int] | np.ndarray) -> "TrialKey":
        """New key holding the given rows, in the given order."""
        rows = np.asarray(rows, dtype=np.int64)
        return TrialKey(
            languages=self.languages,
            segment_ids=tuple(self.segment_ids[i] for i in rows),
            labels=self.labels[rows],
            metas=tuple(self.metas[i] for i in rows),
        )


def build_key(
    rows: Iterable[tuple[str, str, SegmentMeta | None]],
    languages: LanguageSet | None = None,
) -> TrialKey:
    """Build a TrialKey from (segment_id, language_code, meta) triples.

    Entry order is preserved.  When ``languages`` is not declared, the
    set is derived from the codes present, in sorted order.
    """
    rows = list(rows)
    if languages is None:
        codes = sorted({code for _sid, code, _meta in rows})
        languages = LanguageSet(tuple(codes))
    ids: list[str] = []
    labels: list[int] = []
    metas: list[SegmentMeta] = []
    for sid, code, meta in rows:
        ids.append(sid)
        labels.append(languages.index(code))
        metas.append(meta if meta is not None else EMPTY_META)
    return TrialKey(
        languages=languages,
        segment_ids=tuple(ids),
        labels=np.asarray(labels, dtype=np.int64),
        metas=tuple(metas),
    )


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """One system's log-likelihood scores, aligned to a key.

    ``scores`` has one row per key segment (key order) and one column
    per language (language-set order).  Values are raw log-likelihoods;
    detection LLRs are derived in scoring.  All values must be finite.
    """

    system_id: str
    languages: LanguageSet
    scores: np.ndarray
    condition_tag: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.scores, dtype=np.float64).copy()
        if arr.ndim != 2 or arr.shape[1] != len(self.languages):
            raise ValueError(
                f"score matrix must be (segments, {len(self.languages)}), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("score matrix contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    def __len__(self) -> int:
        return self.scores.shape[0]


class PartitionKind(str, enum.Enum):
    """Axis along which a key is partitioned."""

    SOURCE_TYPE = "source_type"
    DURATION = "duration"
    EXTRA_FIELD = "field"


@dataclass(frozen=True)
class PartitionSpec:
    """How to split a key into analysis cells.

    Duration cells are half-open ``[lo, hi)`` except the final bin,
    which is closed so the top endpoint is not lost; labels always use
    the ``[lo,hi)`` form.
    """

    kind: PartitionKind
    field_name: str | None = None
    bin_edges: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind is PartitionKind.DURATION:
            edges = self.bin_edges if self.bin_edges is not None else DEFAULT_DURATION_EDGES
            edges = tuple(float(e) for e in edges)
            if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
                raise ValueError("bin_edges must be strictly ascending with at least 2 entries")
            object.__setattr__(self, "bin_edges", edges)
        elif self.bin_edges is not None:
            raise ValueError("bin_edges only apply to duration partitions")
        if self.kind is PartitionKind.EXTRA_FIELD:
            if not self.field_name:
                raise ValueError("field partitions need a field name")
        elif self.field_name is not None:
            raise ValueError("field_name only applies to field partitions")

    @classmethod
    def by_source_type(cls) -> "PartitionSpec":
        return cls(PartitionKind.SOURCE_TYPE)

    @classmethod
    def by_duration(cls, bin_edges: Sequence[float] | None = None) -> "PartitionSpec":
        return cls(PartitionKind.DURATION, bin_edges=tuple(bin_edges) if bin_edges else None)

    @classmethod
    def by_extra_field(cls, name: str) -> "PartitionSpec":
        return cls(PartitionKind.EXTRA_FIELD, field_name=name)


def _duration_cells(key: TrialKey, edges: tuple[float, ...]) -> list[tuple[str, np.ndarray]]:
    durations = np.empty(len(key), dtype=np.float64)
    for i, meta in enumerate(key.metas):
        if meta.sad_duration is None:
            raise MissingDuration(key.segment_ids[i])
        durations[i] = meta.sad_duration
    e = np.asarray(edges)
    bin_of = np.searchsorted(e, durations, side="right") - 1
    bin_of[durations == e[-1]] = len(e) - 2  # final bin is closed on the right
    bin_of[(durations < e[0]) | (durations > e[-1])] = -1
    cells = []
    for b in range(len(e) - 1):
        rows = np.flatnonzero(bin_of == b)
        if rows.size:
            cells.append((f"[{e[b]:g},{e[b + 1]:g})", rows))
    _warn_dropped(key, np.flatnonzero(bin_of == -1), "outside the duration bins")
    return cells


def _warn_dropped(key: TrialKey, rows: np.ndarray, why: str) -> None:
    if rows.size:
        shown = ", ".join(key.segment_ids[i] for i in rows[:5])
        more = "" if rows.size <= 5 else ", ..."
        logger.warning("%d segment(s) fall in no partition cell (%s): %s%s", rows.size, why, shown, more)


def partition(key: TrialKey, spec: PartitionSpec) -> list[tuple[str, np.ndarray]]:
    """Split a key into labeled, disjoint row-index cells.

    Rows that match no cell (unknown metadata, out-of-range durations,
    values absent for a field partition) are left out and logged.
    Empty cells are omitted.  Returns (label, row_indices) pairs.
    """
    if spec.kind is PartitionKind.SOURCE_TYPE:
        by_type = {st: [] for st in SourceType}
        unknown = []
        for i, meta in enumerate(key.metas):
            if meta.source_type is None:
                unknown.append(i)
            else:
                by_type[meta.source_type].append(i)
        _warn_dropped(key, np.asarray(unknown, dtype=np.int64), "unknown source type")
        return [
            (st.value, np.asarray(rows, dtype=np.int64))
            for st, rows in by_type.items()
            if rows
        ]

    if spec.kind is PartitionKind.DURATION:
        assert spec.bin_edges is not None
        return _duration_cells(key, spec.bin_edges)

    assert spec.kind is PartitionKind.EXTRA_FIELD and spec.field_name
    by_value: dict[str, list[int]] = {}
    unknown = []
    for i, meta in enumerate(key.metas):
        value = meta.extra.get(spec.field_name)
        if value is None:
            unknown.append(i)
        else:
            by_value.setdefault(value, []).append(i)
    _warn_dropped(key, np.asarray(unknown, dtype=np.int64), f"no {spec.field_name!r} value")
    return [
        (value, np.asarray(rows, dtype=np.int64))
        for value, rows in sorted(by_value.items())
    ]
