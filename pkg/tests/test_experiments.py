"""Experiment harness: regimes, grouping, determinism."""

import pytest

from diacritizer.errors import InvalidConfig
from diacritizer.experiments import ExperimentSpec, run_experiment, split_train_validation
from diacritizer.synth import SynthConfig, synth_generate

PAIR = synth_generate(
    SynthConfig(vocab_size=40, verse_count=60, mean_verse_len=5), 21
)
CORPORA = (PAIR.corpus_a, PAIR.corpus_b)


def spec(**kwargs):
    defaults = dict(corpora=CORPORA, model="lookup", regime="uni", k=3, seed=2)
    defaults.update(kwargs)
    return ExperimentSpec(**defaults)


def test_validation():
    with pytest.raises(InvalidConfig):
        spec(model="svm").validate()
    with pytest.raises(InvalidConfig):
        spec(regime="diagonal").validate()
    with pytest.raises(InvalidConfig):
        spec(regime="cross", corpora=CORPORA[:1]).validate()


@pytest.mark.parametrize("regime", ["uni", "cross", "joint"])
def test_cell_layout(regime):
    result = run_experiment(spec(regime=regime))
    assert len(result.cells) == 2 * 3  # two dialects/directions x three folds
    labels = {(c.train_label, c.test_label) for c in result.cells}
    if regime == "uni":
        assert labels == {("SYN-A", "SYN-A"), ("SYN-B", "SYN-B")}
    elif regime == "cross":
        assert labels == {("SYN-A", "SYN-B"), ("SYN-B", "SYN-A")}
    else:
        assert labels == {("SYN-A+SYN-B", "SYN-A"), ("SYN-A+SYN-B", "SYN-B")}
    assert set(result.means()) == labels


def test_table_lines_shape():
    result = run_experiment(spec())
    lines = result.table_lines()
    assert lines[0].startswith("model\tregime")
    assert len(lines) == 1 + 6 + 2  # header, cells, means
    assert sum(1 for line in lines if "\tmean\t" in line) == 2


def test_deterministic_per_seed():
    a = run_experiment(spec())
    b = run_experiment(spec())
    assert a.table_lines() == b.table_lines()
    c = run_experiment(spec(seed=3))
    assert a.table_lines() != c.table_lines()


def test_parallel_matches_sequential():
    a = run_experiment(spec(regime="joint"))
    b = run_experiment(spec(regime="joint", jobs=2))
    assert a.table_lines() == b.table_lines()


def test_lookup_uni_scores_seen_types_perfectly():
    # ambiguity 0: every seen test token matches its modal training form
    result = run_experiment(spec())
    from diacritizer.corpus import make_folds
    from diacritizer.seeds import sub_seed

    for cell in result.cells:
        corpus = {"SYN-A": PAIR.corpus_a, "SYN-B": PAIR.corpus_b}[cell.test_label]
        folds = make_folds(corpus, 3, sub_seed(2, f"split:{cell.test_label}"))
        fold = folds[cell.fold]
        train_bases = {w.base for w in fold.select(corpus, "train")}
        train_bases |= {w.base for w in fold.select(corpus, "validation")}
        for g, p in zip(cell.gold, cell.predicted):
            if g.base in train_bases:
                assert g == p


def test_split_train_validation_ratio():
    train, validation = split_train_validation(PAIR.corpus_a, seed=4)
    total = len(train) + len(validation)
    assert total == PAIR.corpus_a.word_count()
    assert abs(len(train) - 7 * len(validation)) <= 7 * 10  # within one verse
