from lideval.analysis import confusion, language_dispersion, leaderboard, partition_scores
from lideval.figures import (
    save_confusion_figure,
    save_dispersion_figure,
    save_language_costs_figure,
    save_leaderboard_figure,
    save_partition_figure,
)
from lideval.scoring import c_primary
from lideval.trial import PartitionSpec, ScoreSet, SourceType

from conftest import make_key, random_instance

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def assert_png(path):
    data = path.read_bytes()
    assert data.startswith(PNG_MAGIC) and len(data) > 1000


def two_reports(rng):
    reports = []
    for name, signal in (("alpha", 3.0), ("beta", 0.8)):
        scores, _, key = random_instance(rng, n_min=3, n_max=3, t_max=40, signal=signal)
        reports.append(c_primary(ScoreSet(name, key.languages, scores), key))
    return reports


def test_leaderboard_figure(tmp_path, rng):
    board = leaderboard(two_reports(rng))
    assert_png(save_leaderboard_figure(board, tmp_path / "lb.png"))


def test_language_costs_figure(tmp_path, rng):
    report = two_reports(rng)[0]
    assert_png(save_language_costs_figure(report, tmp_path / "lc.png"))


def test_dispersion_figure(tmp_path, rng):
    rows = language_dispersion(two_reports(rng))
    assert_png(save_dispersion_figure(rows, tmp_path / "disp.png"))


def test_confusion_figure(tmp_path, rng):
    scores, _, key = random_instance(rng, n_min=3, n_max=3, t_max=30)
    conf = confusion(ScoreSet("x", key.languages, scores), key)
    assert_png(save_confusion_figure(conf, tmp_path / "conf.png"))


def test_partition_figure(tmp_path, rng):
    scores, labels, _ = random_instance(rng, n_min=3, n_max=3, t_max=60)
    sources = [SourceType.CTS if i % 2 else SourceType.BNBS for i in range(len(labels))]
    key = make_key(labels, sources=sources)
    ss = ScoreSet("x", key.languages, scores)
    results = partition_scores(ss, key, PartitionSpec.by_source_type())
    triples = [(label, 1, rep) for label, rep in results]
    assert_png(save_partition_figure(triples, tmp_path / "part.png", "source_type"))


def test_figures_create_parent_dirs(tmp_path, rng):
    board = leaderboard(two_reports(rng))
    out = tmp_path / "deep" / "nested" / "lb.png"
    assert_png(save_leaderboard_figure(board, out))
