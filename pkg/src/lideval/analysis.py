"""Cross-system and factor analyses over score reports.

Leaderboards, language confusion matrices, per-language cost
dispersion, and scoring partitioned by segment metadata (source type,
duration bins, free-form fields).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .scoring import (
    ApplicationParams,
    ApplicationSet,
    DEFAULT_APPS,
    Scope,
    ScoreReport,
    bayes_threshold,
    c_primary,
    llr_matrix,
    pair_rates,
)
from .trial import LanguageSet, PartitionSpec, ScoreSet, TrialKey, partition

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Pairwise error rates at one application's Bayes threshold.

    ``cells[i][i]`` is P_miss of language i; ``cells[i][j]`` (i != j)
    is P_fa with i as target and j as non-target.
    """

    languages: LanguageSet
    app: ApplicationParams
    cells: np.ndarray


def confusion(
    scores: ScoreSet | np.ndarray,
    key: TrialKey,
    app: ApplicationParams = ApplicationParams(1.0, 1.0, 0.5),
) -> ConfusionMatrix:
    """Language confusion of one system at the Bayes threshold of ``app``."""
    matrix = scores.scores if isinstance(scores, ScoreSet) else np.asarray(scores)
    llrs = llr_matrix(matrix)
    threshold = bayes_threshold(app)
    n = len(key.languages)
    cells = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rates = pair_rates(llrs, key, i, j, threshold)
            cells[i, j] = rates.p_fa
            cells[i, i] = rates.p_miss
    return ConfusionMatrix(languages=key.languages, app=app, cells=cells)


@dataclass(frozen=True)
class LeaderboardRow:
    system_id: str
    act_c_primary: float
    min_c_primary: float
    calibration_gap: float


@dataclass(frozen=True)
class Leaderboard:
    """Systems ranked by actual primary cost (ties by system id)."""

    rows: tuple[LeaderboardRow, ...]


def leaderboard(reports: list[ScoreReport]) -> Leaderboard:
    """Rank systems by actual cost, ascending; stable tie-break by id."""
    if not reports:
        raise ValueError("leaderboard needs at least one report")
    rows = [
        LeaderboardRow(
            system_id=r.system_id,
            act_c_primary=r.act_c_primary,
            min_c_primary=r.min_c_primary,
            calibration_gap=r.calibration_gap,
        )
        for r in reports
    ]
    rows.sort(key=lambda row: (row.act_c_primary, row.system_id))
    return Leaderboard(rows=tuple(rows))


def partition_scores(
    scores: ScoreSet,
    key: TrialKey,
    spec: PartitionSpec,
    apps: ApplicationSet = DEFAULT_APPS,
    scope: Scope = Scope.PER_TARGET,
    *,
    cells: list[tuple[str, np.ndarray]] | None = None,
) -> list[tuple[str, ScoreReport]]:
    """Score each partition cell independently.

    Cells keep the full language set; pairs whose classes have no
    trials in a cell are dropped from that cell's means.  Cells with
    trials from fewer than two languages are skipped with a warning.
    Pass precomputed ``cells`` to reuse an earlier ``partition`` call.
    """
    if scores.languages != key.languages or len(scores) != len(key):
        raise ValueError("scores are not aligned to the key")
    if cells is None:
        cells = partition(key, spec)
    results = []
    for label, rows in cells:
        cell_key = key.subset(rows)
        counts = cell_key.language_counts()
        if np.count_nonzero(counts) < 2:
            logger.warning(
                "partition cell %r skipped: only %d language(s) have trials",
                label, int(np.count_nonzero(counts)),
            )
            continue
        cell_scores = ScoreSet(
            system_id=scores.system_id,
            languages=scores.languages,
            scores=scores.scores[rows],
            condition_tag=scores.condition_tag,
        )
        results.append((
            label,
            c_primary(cell_scores, cell_key, apps, scope, drop_empty=True),
        ))
    return results


@dataclass(frozen=True)
class DispersionRow:
    system_id: str
    language: str
    act_cost: float


def language_dispersion(reports: list[ScoreReport]) -> list[DispersionRow]:
    """Long-format per-language actual costs across systems.

    The cost per language is the mean over the report's applications of
    that language's actual cost (the same averaging the primary cost
    uses), emitted one row per (system, language) for plotting.
    """
    rows = []
    for report in reports:
        by_language: dict[str, list[float]] = {}
        for app in report.apps:
            for lang in app.per_language:
                by_language.setdefault(lang.language, []).append(lang.act_cost)
        for language, costs in by_language.items():
            rows.append(DispersionRow(
                system_id=report.system_id,
                language=language,
                act_cost=sum(costs) / len(costs),
            ))
    return rows
