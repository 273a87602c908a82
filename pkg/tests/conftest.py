"""Shared fixtures and generators for the test suite."""

import numpy as np
import pytest

from lideval.trial import LanguageSet, SegmentMeta, SourceType, build_key

CODES3 = ("deu", "eng", "fra")


def make_key(labels, codes=CODES3, durations=None, sources=None, extra=None):
    """Build a TrialKey from integer labels and optional metadata lists."""
    rows = []
    for i, label in enumerate(labels):
        meta = None
        if durations is not None or sources is not None or extra is not None:
            meta = SegmentMeta(
                source_type=None if sources is None else sources[i],
                sad_duration=None if durations is None else durations[i],
                extra={} if extra is None else extra[i],
            )
        rows.append((f"seg{i:04d}", codes[label], meta))
    return build_key(rows, languages=LanguageSet(tuple(codes)))


def random_labels(rng, n_classes, total):
    """Labels covering every class at least twice, in shuffled order."""
    assert total >= 2 * n_classes
    labels = list(range(n_classes)) * 2
    labels += rng.integers(0, n_classes, size=total - len(labels)).tolist()
    rng.shuffle(labels)
    return labels


def random_instance(rng, n_min=3, n_max=5, t_max=200, signal=None):
    """A random (scores, labels, key) triple with informative scores."""
    n = int(rng.integers(n_min, n_max + 1))
    total = int(rng.integers(2 * n, t_max + 1))
    labels = random_labels(rng, n, total)
    if signal is None:
        signal = float(rng.uniform(0.0, 4.0))
    scores = rng.normal(size=(total, n))
    scores[np.arange(total), labels] += signal
    codes = tuple(f"l{i:02d}" for i in range(n))
    return scores, labels, make_key(labels, codes)


def dyadic_instance(rng, n, total, grid=2.0 ** -18, span=2 ** 12):
    """Scores on a dyadic grid so additive offsets stay exact in float64."""
    labels = random_labels(rng, n, total)
    scores = rng.integers(-span, span, size=(total, n)).astype(np.float64) * grid
    codes = tuple(f"l{i:02d}" for i in range(n))
    return scores, labels, make_key(labels, codes)


@pytest.fixture
def rng():
    return np.random.default_rng(20220915)


@pytest.fixture
def key6():
    """Six segments over three languages, two per class, with metadata."""
    return make_key(
        [0, 1, 2, 0, 1, 2],
        durations=[4.0, 12.0, 33.0, 7.5, 19.0, 35.0],
        sources=[SourceType.CTS, SourceType.BNBS, SourceType.CTS,
                 SourceType.BNBS, SourceType.CTS, SourceType.BNBS],
        extra=[{"cond": "a"}, {"cond": "b"}, {"cond": "a"},
               {"cond": "b"}, {"cond": "a"}, {"cond": "b"}],
    )


def as_tsv_bytes(lines):
    return ("\n".join(lines) + "\n").encode("utf-8")
