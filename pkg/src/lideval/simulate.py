"""Seeded synthetic campaigns for testing and trend studies.

Segments get a true language, a speech duration, and a source type;
scores come from a Gaussian prototype model: each trial draws an
embedding around its language's prototype with a per-trial noise level
that shrinks with duration and grows on CTS audio, and every language
is scored with the log-density exponent under that model.  With the
calibration knobs at their neutral values the emitted scores are
calibrated log-likelihoods by construction (the common per-row
normalizer cancels in the llr), so the Bayes threshold is near-optimal
and the calibration gap is small.

The miscalibration knobs warp the detection scores: the true llr
vector is mapped through ``a * llr + b`` and re-emitted through the
per-language posterior construction

    s'[j] = log sigmoid(a * llr[j] + b - ln(N-1))

which is exactly llr-preserving at (a=1, b=0) and otherwise yields a
genuinely miscalibrated system (no emitted score vector can realize an
exact affine llr warp: computed llrs always satisfy
``sum_j sigmoid(llr[j] - ln(N-1)) = 1``).

Every draw is derived from per-trial substreams of the config seed, so
rows are independent and reruns are bit-identical regardless of
generation order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .scoring import llr_matrix
from .trial import LanguageSet, ScoreSet, SegmentMeta, SourceType, TrialKey

#: The 14 target language codes of the 2022 evaluation (Table-1 order).
LRE22_CODES = (
    "afr-afr", "ara-aeb", "ara-arq", "ara-ayl", "eng-ens", "eng-iaf", "fra-ntf",
    "nbl-nbl", "orm-orm", "tir-tir", "tso-tso", "ven-ven", "xho-xho", "zul-zul",
)

#: Spacing of the default language prototypes, tuned so the neutral
#: configuration lands near an actual primary cost of 0.2.
DEFAULT_PROTOTYPE_SCALE = 2.4

#: Per-language segment counts shaped like the evaluation test set:
#: within [383, 2769] per language and 26,473 segments in total.
TEST_LIKE_COUNTS = (
    2769, 2600, 2500, 2400, 2300, 2200, 2100,
    2000, 1900, 1800, 1521, 1200, 800, 383,
)

_KEY_STREAM = 0
_SCORE_STREAM = 1


def default_means(n_languages: int, embed_dim: int, scale: float) -> np.ndarray:
    """Language prototypes: centered hypercube corners scaled by ``scale``.

    The first ``n_languages`` corners of the unit hypercube in
    ``embed_dim`` dimensions, centered at the origin.  When there are
    more languages than corners, the remainder is filled from a fixed
    pseudo-random stream so the layout stays deterministic.
    """
    corners = min(n_languages, 2 ** embed_dim)
    bits = ((np.arange(corners)[:, None] >> np.arange(embed_dim)) & 1).astype(np.float64)
    means = bits - 0.5
    if n_languages > corners:
        rng = np.random.default_rng(np.random.SeedSequence(181093))
        filler = rng.uniform(-0.5, 0.5, size=(n_languages - corners, embed_dim))
        means = np.vstack([means, filler])
    return means * scale


@dataclass(frozen=True)
class SimConfig:
    """Generative model of one synthetic campaign."""

    languages: LanguageSet
    per_language_counts: tuple[int, ...]
    embed_dim: int = 4
    means: np.ndarray | None = None
    prototype_scale: float = DEFAULT_PROTOTYPE_SCALE
    noise_sigma: float = 1.0
    duration_range: tuple[float, float] = (3.0, 35.0)
    duration_ref: float = 15.0
    duration_exponent: float = 0.5
    cts_fraction: float = 0.5
    cts_extra_sigma: float = 0.0
    miscal_scale: float = 1.0
    miscal_offset: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.per_language_counts)
        object.__setattr__(self, "per_language_counts", counts)
        if len(counts) != len(self.languages):
            raise ValueError("need one segment count per language")
        if any(c < 1 for c in counts):
            raise ValueError("per-language counts must be at least 1")
        if self.embed_dim < 1:
            raise ValueError("embed_dim must be positive")
        if self.means is not None:
            means = np.asarray(self.means, dtype=np.float64)
            if means.shape != (len(self.languages), self.embed_dim):
                raise ValueError(
                    f"means must be ({len(self.languages)}, {self.embed_dim}), got {means.shape}"
                )
            means = means.copy()
            means.setflags(write=False)
            object.__setattr__(self, "means", means)
        lo, hi = self.duration_range
        if not (0.0 < lo < hi):
            raise ValueError("duration_range must satisfy 0 < lo < hi")
        object.__setattr__(self, "duration_range", (float(lo), float(hi)))
        if self.noise_sigma <= 0 or self.duration_ref <= 0:
            raise ValueError("noise_sigma and duration_ref must be positive")
        if not (0.0 <= self.cts_fraction <= 1.0):
            raise ValueError("cts_fraction must lie in [0, 1]")
        if self.cts_extra_sigma < 0:
            raise ValueError("cts_extra_sigma must be non-negative")
        if self.miscal_scale <= 0:
            raise ValueError("miscal_scale must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def resolved_means(self) -> np.ndarray:
        if self.means is not None:
            return self.means
        return default_means(len(self.languages), self.embed_dim, self.prototype_scale)

    @property
    def n_segments(self) -> int:
        return sum(self.per_language_counts)


@dataclass(frozen=True)
class SystemSpec:
    """One synthetic system: overrides on top of the campaign config."""

    system_id: str
    noise_sigma: float | None = None
    miscal_scale: float | None = None
    miscal_offset: float | None = None
    seed: int | None = None
    condition_tag: str = ""

    def apply(self, config: SimConfig) -> SimConfig:
        overrides = {
            name: value
            for name, value in (
                ("noise_sigma", self.noise_sigma),
                ("miscal_scale", self.miscal_scale),
                ("miscal_offset", self.miscal_offset),
                ("seed", self.seed),
            )
            if value is not None
        }
        return replace(config, **overrides) if overrides else config


@dataclass(frozen=True)
class SimCampaign:
    """A simulated key plus one ScoreSet per synthetic system."""

    key: TrialKey
    scoresets: tuple[ScoreSet, ...]


def _trial_sigmas(config: SimConfig, key: TrialKey) -> np.ndarray:
    durations = key.durations()
    cts = np.array(
        [m.source_type is SourceType.CTS for m in key.metas], dtype=np.float64
    )
    return (
        config.noise_sigma
        * (config.duration_ref / durations) ** config.duration_exponent
        * (1.0 + config.cts_extra_sigma * cts)
    )


def simulate_key(config: SimConfig) -> TrialKey:
    """Generate the ground-truth key for a campaign.

    Durations are uniform over the configured range; each segment is
    CTS with probability ``cts_fraction`` and BNBS otherwise.
    Deterministic given the seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(_KEY_STREAM,)))
    total = config.n_segments
    lo, hi = config.duration_range
    durations = rng.uniform(lo, hi, size=total)
    is_cts = rng.random(total) < config.cts_fraction

    ids = []
    labels = np.empty(total, dtype=np.int64)
    metas = []
    t = 0
    for lang_index, count in enumerate(config.per_language_counts):
        for _ in range(count):
            ids.append(f"seg{t:06d}")
            labels[t] = lang_index
            metas.append(SegmentMeta(
                source_type=SourceType.CTS if is_cts[t] else SourceType.BNBS,
                sad_duration=float(durations[t]),
            ))
            t += 1
    return TrialKey(
        languages=config.languages,
        segment_ids=tuple(ids),
        labels=labels,
        metas=tuple(metas),
    )


def simulate_scores(config: SimConfig, key: TrialKey, system_id: str = "sim") -> ScoreSet:
    """Generate one system's score matrix for a simulated key.

    Each trial draws its embedding from a substream derived from
    (seed, trial index), so any subset of rows can be regenerated
    independently and reruns are bit-identical.
    """
    means = config.resolved_means()
    sigmas = _trial_sigmas(config, key)
    total = len(key)
    eps = np.empty((total, config.embed_dim), dtype=np.float64)
    root = config.seed
    for t in range(total):
        rng = np.random.default_rng(np.random.SeedSequence(root, spawn_key=(_SCORE_STREAM, t)))
        eps[t] = rng.standard_normal(config.embed_dim)
    x = means[key.labels] + sigmas[:, None] * eps
    sq_dist = ((x[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    scores = -sq_dist / (2.0 * sigmas[:, None] ** 2)
    if config.miscal_scale != 1.0 or config.miscal_offset != 0.0:
        scores = _miscalibrate(scores, config.miscal_scale, config.miscal_offset)
    return ScoreSet(
        system_id=system_id,
        languages=config.languages,
        scores=scores,
        condition_tag="",
    )


def _miscalibrate(scores: np.ndarray, a: float, b: float) -> np.ndarray:
    """Warp the detection scores of a score matrix by ``a * llr + b``.

    Emits s'[j] = log sigmoid(a*llr[j] + b - ln(N-1)); see the module
    docstring for why the warp cannot be made exact.
    """
    n = scores.shape[1]
    warped = a * llr_matrix(scores) + b - math.log(n - 1)
    return -np.logaddexp(0.0, -warped)


def simulate_campaign(config: SimConfig, system_specs: Sequence[SystemSpec]) -> SimCampaign:
    """One shared key plus a ScoreSet per system spec."""
    key = simulate_key(config)
    scoresets = tuple(
        simulate_scores(spec.apply(config), key, system_id=spec.system_id)
        for spec in system_specs
    )
    return SimCampaign(key=key, scoresets=scoresets)


def lre22_languages() -> LanguageSet:
    return LanguageSet(LRE22_CODES)


def preset_dev_like(seed: int = 0, **overrides) -> SimConfig:
    """14 languages, 300 segments each (development-set shape)."""
    overrides.setdefault("per_language_counts", (300,) * 14)
    return SimConfig(languages=lre22_languages(), seed=seed, **overrides)


def preset_test_like(seed: int = 0, **overrides) -> SimConfig:
    """14 languages, 26,473 segments with uneven per-language counts."""
    overrides.setdefault("per_language_counts", TEST_LIKE_COUNTS)
    return SimConfig(languages=lre22_languages(), seed=seed, **overrides)


def preset_ladder_specs() -> tuple[SystemSpec, ...]:
    """Three systems whose noise levels fix their quality ranking."""
    return (
        SystemSpec("strong", noise_sigma=0.5),
        SystemSpec("baseline", noise_sigma=1.0),
        SystemSpec("weak", noise_sigma=2.0),
    )


def preset_miscalibrated_specs() -> tuple[SystemSpec, ...]:
    """A calibrated system next to a score-warped twin."""
    return (
        SystemSpec("calibrated"),
        SystemSpec("shifted", miscal_offset=3.0),
    )


def preset_miscalibrated(seed: int = 0, **overrides) -> SimConfig:
    """Dev-set shape tuned so an offset visibly inflates the gap.

    Flat difficulty (no duration effect) keeps detection scores near
    the decision band, where a fixed offset flips the most decisions;
    the per-trial renormalization otherwise absorbs much of the shift.
    """
    overrides.setdefault("noise_sigma", 1.2)
    overrides.setdefault("duration_exponent", 0.0)
    return preset_dev_like(seed=seed, **overrides)


PRESETS = {
    "dev-like": (preset_dev_like, preset_ladder_specs),
    "test-like": (preset_test_like, preset_ladder_specs),
    "miscalibrated": (preset_miscalibrated, preset_miscalibrated_specs),
}


def load_preset(name: str, seed: int | None = None) -> tuple[SimConfig, tuple[SystemSpec, ...]]:
    try:
        config_fn, specs_fn = PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
    config = config_fn(seed=seed if seed is not None else 0)
    return config, specs_fn()


_CONFIG_SCALARS = {
    "embed_dim": int,
    "prototype_scale": float,
    "noise_sigma": float,
    "duration_ref": float,
    "duration_exponent": float,
    "cts_fraction": float,
    "cts_extra_sigma": float,
    "miscal_scale": float,
    "miscal_offset": float,
    "seed": int,
}

_SYSTEM_OVERRIDES = {
    "noise_sigma": float,
    "miscal_scale": float,
    "miscal_offset": float,
    "seed": int,
}


def parse_sim_config(path: str | Path) -> tuple[SimConfig, tuple[SystemSpec, ...]]:
    """Read a campaign config from a flat ``key = value`` text file.

    Grammar (one setting per line, ``#`` starts a comment):

        languages = lre22            # or a comma-separated code list
        counts = 300                 # one count for all, or one per language
        duration_range = 3, 35
        noise_sigma = 1.0            # any scalar field of SimConfig
        system = strong noise_sigma=0.5
        system = shifted miscal_offset=3

    ``system`` lines may repeat, one per synthetic system; without any,
    a single system named ``baseline`` is used.
    """
    languages: LanguageSet | None = None
    counts_raw: list[int] | None = None
    duration_range: tuple[float, float] | None = None
    scalars: dict[str, object] = {}
    specs: list[SystemSpec] = []

    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        name, value = (part.strip() for part in line.split("=", 1))
        try:
            if name == "languages":
                if value == "lre22":
                    languages = lre22_languages()
                else:
                    languages = LanguageSet(tuple(v.strip() for v in value.split(",")))
            elif name == "counts":
                counts_raw = [int(v) for v in value.split(",")]
            elif name == "duration_range":
                lo, hi = (float(v) for v in value.split(","))
                duration_range = (lo, hi)
            elif name == "system":
                specs.append(_parse_system_spec(value))
            elif name in _CONFIG_SCALARS:
                scalars[name] = _CONFIG_SCALARS[name](value)
            else:
                raise ValueError(f"unknown setting {name!r}")
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from None

    if languages is None:
        raise ValueError(f"{path}: 'languages' is required")
    if counts_raw is None:
        raise ValueError(f"{path}: 'counts' is required")
    if len(counts_raw) == 1:
        counts = tuple(counts_raw) * len(languages)
    elif len(counts_raw) != len(languages):
        raise ValueError(
            f"{path}: 'counts' needs 1 or {len(languages)} values, got {len(counts_raw)}"
        )
    else:
        counts = tuple(counts_raw)
    # Keys written to disk list languages in sorted code order, so
    # canonicalize here to keep generated submissions round-trippable.
    order = sorted(range(len(languages)), key=lambda i: languages.codes[i])
    languages = LanguageSet(tuple(languages.codes[i] for i in order))
    counts = tuple(counts[i] for i in order)
    if duration_range is not None:
        scalars["duration_range"] = duration_range
    config = SimConfig(languages=languages, per_language_counts=counts, **scalars)
    if not specs:
        specs = [SystemSpec("baseline")]
    return config, tuple(specs)


def _parse_system_spec(value: str) -> SystemSpec:
    tokens = value.split()
    if not tokens or not re.fullmatch(r"[\w.+-]+", tokens[0]):
        raise ValueError(f"system line needs a label first, got {value!r}")
    overrides: dict[str, object] = {}
    for token in tokens[1:]:
        if "=" not in token:
            raise ValueError(f"system override must be key=value, got {token!r}")
        key, val = token.split("=", 1)
        if key not in _SYSTEM_OVERRIDES:
            raise ValueError(
                f"unknown system override {key!r}; allowed: {', '.join(sorted(_SYSTEM_OVERRIDES))}"
            )
        overrides[key] = _SYSTEM_OVERRIDES[key](val)
    return SystemSpec(tokens[0], **overrides)
