"""Detection-cost metric core.

Turns a matrix of per-segment log-likelihood scores into pairwise
detection log-likelihood ratios, measures miss / false-alarm rates at
Bayes and empirically optimal thresholds, combines them with the linear
cost model, normalizes by the no-information floor, and aggregates the
result into actual and minimum primary costs plus the calibration gap.

Cost of one ordered pair (target L_T, non-target L_N) at a threshold:

    raw  = c_miss * p_target * P_miss(L_T)
         + c_fa * (1 - p_target) * P_fa(L_T, L_N)
    cost = raw / min(c_miss * p_target, c_fa * (1 - p_target))

The primary cost is the mean of ``cost`` over all N(N-1) ordered pairs,
averaged over the configured application parameter sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import EmptyClass, LanguageMismatch
from .trial import LanguageSet, ScoreSet, TrialKey


@dataclass(frozen=True)
class ApplicationParams:
    """One cost-model parameter triple (C_Miss, C_FA, P_Target)."""

    c_miss: float = 1.0
    c_fa: float = 1.0
    p_target: float = 0.5

    def __post_init__(self) -> None:
        if not (self.c_miss > 0 and self.c_fa > 0):
            raise ValueError("c_miss and c_fa must be positive")
        if not (0.0 < self.p_target < 1.0):
            raise ValueError("p_target must lie strictly inside (0, 1)")

    @property
    def floor(self) -> float:
        """Cost of the better no-information policy (accept-all / reject-all)."""
        return min(self.c_miss * self.p_target, self.c_fa * (1.0 - self.p_target))

    def label(self) -> str:
        return f"{self.c_miss:g}:{self.c_fa:g}:{self.p_target:g}"

    @classmethod
    def parse(cls, text: str) -> "ApplicationParams":
        """Parse ``c_miss:c_fa:p_target``, e.g. ``1:1:0.5``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected c_miss:c_fa:p_target, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), float(parts[2]))


@dataclass(frozen=True)
class ApplicationSet:
    """Non-empty list of application parameter triples."""

    apps: tuple[ApplicationParams, ...]

    def __post_init__(self) -> None:
        apps = tuple(self.apps)
        if not apps:
            raise ValueError("at least one application parameter set is required")
        object.__setattr__(self, "apps", apps)

    def __iter__(self) -> Iterator[ApplicationParams]:
        return iter(self.apps)

    def __len__(self) -> int:
        return len(self.apps)

    @classmethod
    def parse(cls, text: str) -> "ApplicationSet":
        """Parse a comma-separated list of ``c_miss:c_fa:p_target`` triples."""
        return cls(tuple(ApplicationParams.parse(part) for part in text.split(",")))


#: The two standard operating points: equal-prior and 0.1 target prior.
DEFAULT_APPS = ApplicationSet((ApplicationParams(1.0, 1.0, 0.5), ApplicationParams(1.0, 1.0, 0.1)))


class Scope(str, Enum):
    """How many empirical thresholds the minimum cost may use.

    GLOBAL uses one threshold everywhere, PER_TARGET one per target
    language (the default), PER_PAIR one per ordered language pair.
    Narrower scopes can only lower the minimum cost.
    """

    GLOBAL = "global"
    PER_TARGET = "target"
    PER_PAIR = "pair"


def llr_matrix(scores: np.ndarray | ScoreSet) -> np.ndarray:
    """Detection log-likelihood ratios, one per (segment, target).

    llr[t, i] = s[t, i] - log( (1/(N-1)) * sum_{j != i} exp(s[t, j]) )

    i.e. the log ratio of the target likelihood to a uniform mixture of
    the non-target likelihoods.  Rows are shifted by their maximum
    before any transcendentals, so the result depends only on
    within-row score differences: adding a constant to a row cannot
    change its llrs (bit-exactly so whenever the shifted scores are
    unchanged, e.g. for scores on a dyadic grid).
    """
    s = scores.scores if isinstance(scores, ScoreSet) else np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] < 2:
        raise ValueError(f"need a (segments, N>=2) score matrix, got shape {s.shape}")
    n = s.shape[1]
    z = s - s.max(axis=1, keepdims=True)
    out = np.empty_like(z)
    log_nm1 = math.log(n - 1)
    columns = np.arange(n)
    for i in range(n):
        rest = z[:, columns != i]
        out[:, i] = z[:, i] - (logsumexp(rest, axis=1) - log_nm1)
    return out


def llr(scores: np.ndarray | ScoreSet, row: int, target: int) -> float:
    """The detection llr of a single trial; see ``llr_matrix``."""
    s = scores.scores if isinstance(scores, ScoreSet) else np.asarray(scores, dtype=np.float64)
    return float(llr_matrix(s[row : row + 1])[0, target])


def bayes_threshold(app: ApplicationParams) -> float:
    """Decision threshold minimizing the expected cost for calibrated llrs:

    ln( c_fa * (1 - p_target) / (c_miss * p_target) )
    """
    return math.log(app.c_fa * (1.0 - app.p_target) / (app.c_miss * app.p_target))


@dataclass(frozen=True)
class PairRates:
    """Miss / false-alarm rates of one ordered language pair."""

    target: int
    nontarget: int
    p_miss: float
    p_fa: float
    n_target_trials: int
    n_nontarget_trials: int


def _class_sizes(key: TrialKey) -> np.ndarray:
    return key.language_counts()


def pair_rates(
    llrs: np.ndarray,
    key: TrialKey,
    target: int,
    nontarget: int,
    threshold: float,
) -> PairRates:
    """Rates for one ordered pair at a threshold.

    The decision rule is accept iff llr >= threshold (ties accept), so

    p_miss = #(target trials with llr < threshold) / #target trials
    p_fa   = #(non-target trials with llr >= threshold) / #non-target trials

    using the llr column of the target language for both classes.
    """
    column = llrs[:, target]
    target_vals = column[key.labels == target]
    nontarget_vals = column[key.labels == nontarget]
    if target_vals.size == 0:
        raise EmptyClass(key.languages.codes[target])
    if nontarget_vals.size == 0:
        raise EmptyClass(key.languages.codes[nontarget])
    p_miss = np.count_nonzero(target_vals < threshold) / target_vals.size
    p_fa = np.count_nonzero(nontarget_vals >= threshold) / nontarget_vals.size
    return PairRates(
        target=target,
        nontarget=nontarget,
        p_miss=float(p_miss),
        p_fa=float(p_fa),
        n_target_trials=int(target_vals.size),
        n_nontarget_trials=int(nontarget_vals.size),
    )


def pair_cost(rates: PairRates, app: ApplicationParams) -> float:
    """Normalized linear detection cost of one pair's rates."""
    raw = app.c_miss * app.p_target * rates.p_miss + app.c_fa * (1.0 - app.p_target) * rates.p_fa
    return raw / app.floor


def _candidate_thresholds(values: np.ndarray) -> np.ndarray:
    """-inf, midpoints between consecutive distinct values, +inf.

    The cost is piecewise constant between distinct llrs, so these
    candidates reach every achievable operating point.
    """
    distinct = np.unique(values)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    return np.concatenate(([-np.inf], mids, [np.inf]))


def _counts_below(
    llrs: np.ndarray,
    labels: np.ndarray,
    target: int,
    classes: Sequence[int],
    candidates: np.ndarray,
) -> dict[int, np.ndarray]:
    """#values of the target llr column strictly below each candidate,
    per language class.  Counting matches ``pair_rates`` exactly."""
    column = llrs[:, target]
    out = {}
    for cls in classes:
        vals = np.sort(column[labels == cls])
        out[cls] = np.searchsorted(vals, candidates, side="left")
    return out


def _sweep(
    llrs: np.ndarray,
    key: TrialKey,
    pairs: Sequence[tuple[int, int]],
    pool: np.ndarray,
    app: ApplicationParams,
) -> tuple[float, float]:
    """Minimize the mean pair cost over shared candidate thresholds.

    Returns (threshold, cost); ties break toward the smallest
    threshold.  ``pool`` holds the llr values the candidates are drawn
    from.
    """
    candidates = _candidate_thresholds(pool)
    sizes = _class_sizes(key)
    by_target: dict[int, list[int]] = {}
    for t, n in pairs:
        by_target.setdefault(t, []).append(n)
    miss_term = np.zeros(len(candidates))
    fa_term = np.zeros(len(candidates))
    for t, nontargets in by_target.items():
        counts = _counts_below(llrs, key.labels, t, [t, *nontargets], candidates)
        if sizes[t] == 0:
            raise EmptyClass(key.languages.codes[t])
        miss_term += len(nontargets) * counts[t] / sizes[t]
        for n in nontargets:
            if sizes[n] == 0:
                raise EmptyClass(key.languages.codes[n])
            fa_term += (sizes[n] - counts[n]) / sizes[n]
    n_pairs = len(pairs)
    cost = (
        app.c_miss * app.p_target * miss_term / n_pairs
        + app.c_fa * (1.0 - app.p_target) * fa_term / n_pairs
    ) / app.floor
    k = int(np.argmin(cost))
    return float(candidates[k]), float(cost[k])


def min_pair_cost(
    llrs: np.ndarray,
    key: TrialKey,
    target: int | None,
    app: ApplicationParams,
    scope: Scope = Scope.PER_TARGET,
    nontarget: int | None = None,
) -> tuple[float, float]:
    """Empirically optimal threshold for the given scope and the cost it achieves.

    PER_PAIR needs ``nontarget`` and minimizes that single ordered
    pair's cost; PER_TARGET minimizes the mean cost over all pairs with
    this target; GLOBAL ignores ``target`` and minimizes the mean over
    all ordered pairs.  Candidate thresholds are -inf, +inf, and the
    midpoints of consecutive distinct pooled llrs.
    """
    n = len(key.languages)
    labels = key.labels
    if scope is Scope.PER_PAIR:
        if target is None or nontarget is None:
            raise ValueError("PER_PAIR scope needs target and nontarget")
        mask = (labels == target) | (labels == nontarget)
        pool = llrs[mask, target]
        return _sweep(llrs, key, [(target, nontarget)], pool, app)
    if scope is Scope.PER_TARGET:
        if target is None:
            raise ValueError("PER_TARGET scope needs a target")
        pairs = [(target, j) for j in range(n) if j != target]
        return _sweep(llrs, key, pairs, llrs[:, target], app)
    pairs = [(i, j) for i in range(n) for j in range(n) if j != i]
    return _sweep(llrs, key, pairs, llrs.ravel(), app)


@dataclass(frozen=True)
class PairOutcome:
    """Actual and minimum operating points of one ordered pair (one app)."""

    target: str
    nontarget: str
    n_target_trials: int
    n_nontarget_trials: int
    act_threshold: float
    act_p_miss: float
    act_p_fa: float
    act_cost: float
    min_threshold: float
    min_p_miss: float
    min_p_fa: float
    min_cost: float


@dataclass(frozen=True)
class LanguageOutcome:
    """Mean actual / minimum cost over one target language's pairs."""

    language: str
    act_cost: float
    min_cost: float


@dataclass(frozen=True)
class AppReport:
    """All pair, language, and aggregate costs for one application."""

    params: ApplicationParams
    bayes_threshold: float
    pairs: tuple[PairOutcome, ...]
    per_language: tuple[LanguageOutcome, ...]
    act_cost: float
    min_cost: float


@dataclass(frozen=True)
class ScoreReport:
    """Full scoring output of one system."""

    system_id: str
    languages: LanguageSet
    scope: Scope
    apps: tuple[AppReport, ...]
    act_c_primary: float
    min_c_primary: float

    @property
    def calibration_gap(self) -> float:
        return self.act_c_primary - self.min_c_primary


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def c_primary_from_llrs(
    llrs: np.ndarray,
    key: TrialKey,
    apps: ApplicationSet = DEFAULT_APPS,
    scope: Scope = Scope.PER_TARGET,
    *,
    system_id: str = "system",
    drop_empty: bool = False,
) -> ScoreReport:
    """Score a matrix of detection llrs against a key.

    This is the back half of ``c_primary`` for callers that already
    have detection scores.  With ``drop_empty`` pairs involving a
    language that has no trials are left out of every mean (at least
    two languages must remain); otherwise such languages raise
    EmptyClass.  Pair results and all means are accumulated in
    (target, nontarget) lexicographic order, so output is deterministic
    down to the bit.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    n = len(key.languages)
    if llrs.shape != (len(key), n):
        raise LanguageMismatch(
            f"llr matrix shape {llrs.shape} does not match key ({len(key)}, {n})"
        )
    sizes = _class_sizes(key)
    present = [i for i in range(n) if sizes[i] > 0]
    if not drop_empty:
        for i in range(n):
            if sizes[i] == 0:
                raise EmptyClass(key.languages.codes[i])
    if len(present) < 2:
        raise EmptyClass("fewer than two languages have trials")
    ordered_pairs = [(i, j) for i in present for j in present if j != i]

    app_reports = []
    for app in apps:
        act_thr = bayes_threshold(app)
        min_thresholds: dict[tuple[int, int], float] = {}
        if scope is Scope.GLOBAL:
            pool = llrs[:, present].ravel()
            thr, _ = _sweep(llrs, key, ordered_pairs, pool, app)
            for pair in ordered_pairs:
                min_thresholds[pair] = thr
        elif scope is Scope.PER_TARGET:
            for i in present:
                pairs_i = [(i, j) for j in present if j != i]
                thr, _ = _sweep(llrs, key, pairs_i, llrs[:, i], app)
                for pair in pairs_i:
                    min_thresholds[pair] = thr
        else:
            for pair in ordered_pairs:
                i, j = pair
                mask = (key.labels == i) | (key.labels == j)
                thr, _ = _sweep(llrs, key, [pair], llrs[mask, i], app)
                min_thresholds[pair] = thr

        outcomes = []
        for i, j in ordered_pairs:
            act = pair_rates(llrs, key, i, j, act_thr)
            thr = min_thresholds[(i, j)]
            mn = pair_rates(llrs, key, i, j, thr)
            outcomes.append(
                PairOutcome(
                    target=key.languages.codes[i],
                    nontarget=key.languages.codes[j],
                    n_target_trials=act.n_target_trials,
                    n_nontarget_trials=act.n_nontarget_trials,
                    act_threshold=act_thr,
                    act_p_miss=act.p_miss,
                    act_p_fa=act.p_fa,
                    act_cost=pair_cost(act, app),
                    min_threshold=thr,
                    min_p_miss=mn.p_miss,
                    min_p_fa=mn.p_fa,
                    min_cost=pair_cost(mn, app),
                )
            )
        per_language = []
        for i in present:
            code = key.languages.codes[i]
            mine = [o for o in outcomes if o.target == code]
            per_language.append(
                LanguageOutcome(
                    language=code,
                    act_cost=_mean([o.act_cost for o in mine]),
                    min_cost=_mean([o.min_cost for o in mine]),
                )
            )
        app_reports.append(
            AppReport(
                params=app,
                bayes_threshold=act_thr,
                pairs=tuple(outcomes),
                per_language=tuple(per_language),
                act_cost=_mean([o.act_cost for o in outcomes]),
                min_cost=_mean([o.min_cost for o in outcomes]),
            )
        )

    return ScoreReport(
        system_id=system_id,
        languages=key.languages,
        scope=scope,
        apps=tuple(app_reports),
        act_c_primary=_mean([a.act_cost for a in app_reports]),
        min_c_primary=_mean([a.min_cost for a in app_reports]),
    )


def c_primary(
    scores: ScoreSet | np.ndarray,
    key: TrialKey,
    apps: ApplicationSet = DEFAULT_APPS,
    scope: Scope = Scope.PER_TARGET,
    *,
    drop_empty: bool = False,
) -> ScoreReport:
    """Score one system against a key.

    Derives detection llrs from the raw log-likelihood scores, measures
    every ordered pair at the Bayes threshold of each application
    (actual cost) and at empirically optimal thresholds for the chosen
    scope (minimum cost), and averages: pair costs -> per-app cost ->
    mean over applications.
    """
    if isinstance(scores, ScoreSet):
        if scores.languages != key.languages:
            raise LanguageMismatch(
                "score languages do not match the key "
                f"({list(scores.languages)} vs {list(key.languages)})"
            )
        matrix = scores.scores
        system_id = scores.system_id
    else:
        matrix = np.asarray(scores, dtype=np.float64)
        system_id = "system"
    if matrix.shape != (len(key), len(key.languages)):
        raise LanguageMismatch(
            f"score matrix shape {matrix.shape} does not match key "
            f"({len(key)}, {len(key.languages)})"
        )
    return c_primary_from_llrs(
        llr_matrix(matrix),
        key,
        apps,
        scope,
        system_id=system_id,
        drop_empty=drop_empty,
    )
