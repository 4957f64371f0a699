"""Corpus I/O, fold splitting, and lexical statistics."""

import random

import pytest

from conftest import tiny_corpus
from diacritizer.corpus import (
    compute_stats,
    cross_dialect_overlap,
    form_counts,
    load_corpus,
    make_folds,
    most_frequent_form,
    overlap_stats,
    save_corpus,
)
from diacritizer.errors import (
    CorpusParseError,
    DuplicateVerseId,
    EmptyInput,
    TooFewVerses,
)
from diacritizer.script import strip_word


def words(*texts):
    return [strip_word(t) for t in texts]


def write(tmp_path, text, name="c.tsv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_load_corpus_basic(tmp_path):
    path = write(tmp_path, "v1\thaA*aA yiT~ahoruwA\nv2\tmanoToqapo\n")
    corpus = load_corpus(path, "buckwalter", "X")
    assert corpus.dialect_label == "X"
    assert [v.id for v in corpus.verses] == ["v1", "v2"]
    assert corpus.word_count() == 3
    assert corpus.verses[0].tokens[0].base == "hA*A"


def test_load_skips_blank_lines_and_extra_spaces(tmp_path):
    path = write(tmp_path, "v1\tba  bi\n\nv2\tdo\n")
    corpus = load_corpus(path, "buckwalter", "X")
    assert corpus.word_count() == 3


def test_save_load_round_trip(tmp_path):
    corpus = tiny_corpus("t", random.Random(5))
    for encoding in ("buckwalter", "arabic"):
        path = str(tmp_path / f"{encoding}.tsv")
        save_corpus(corpus, path, encoding)
        again = load_corpus(path, encoding, "t")
        assert again.verses == corpus.verses


def test_load_reports_line_and_column(tmp_path):
    path = write(tmp_path, "v1\tba\nv2 no tab here\n")
    with pytest.raises(CorpusParseError) as exc:
        load_corpus(path, "buckwalter", "X")
    assert exc.value.line == 2

    path = write(tmp_path, "v1\tba ~bad\n")
    with pytest.raises(CorpusParseError) as exc:
        load_corpus(path, "buckwalter", "X")
    assert exc.value.line == 1
    assert exc.value.column == 7  # offset of the leading diacritic


def test_load_rejects_duplicate_verse_id(tmp_path):
    path = write(tmp_path, "v1\tba\nv1\tbi\n")
    with pytest.raises(DuplicateVerseId) as exc:
        load_corpus(path, "buckwalter", "X")
    assert exc.value.line == 2


def test_make_folds_partition_properties():
    corpus = tiny_corpus("t", random.Random(1), n_verses=40)
    ids = {v.id for v in corpus.verses}
    folds = make_folds(corpus, 5, seed=7)
    assert len(folds) == 5
    # test slices partition the corpus
    all_test = [vid for f in folds for vid in f.test]
    assert sorted(all_test) == sorted(ids)
    for f in folds:
        assert f.train | f.validation | f.test == ids
        assert not (f.train & f.validation)
        assert not (f.train & f.test)
        assert not (f.validation & f.test)
        train_tok = sum(len(v.tokens) for v in corpus.verses if v.id in f.train)
        val_tok = sum(len(v.tokens) for v in corpus.verses if v.id in f.validation)
        # 7:1 within one verse of token mass
        assert abs(train_tok - 7 * val_tok) <= 7 * max(len(v.tokens) for v in corpus.verses)


def test_make_folds_deterministic():
    corpus = tiny_corpus("t", random.Random(2), n_verses=30)
    assert make_folds(corpus, 4, 9) == make_folds(corpus, 4, 9)
    assert make_folds(corpus, 4, 9) != make_folds(corpus, 4, 10)


def test_make_folds_errors():
    corpus = tiny_corpus("t", random.Random(3), n_verses=3)
    with pytest.raises(TooFewVerses):
        make_folds(corpus, 5, 0)
    with pytest.raises(ValueError):
        make_folds(corpus, 1, 0)


def test_form_counts_and_modal_form():
    table = form_counts(words("ba", "ba", "bi", "do"))
    assert table["b"] == {"ba": 2, "bi": 1}
    assert table["d"] == {"do": 1}
    assert most_frequent_form(table["b"]) == "ba"
    # ties break lexicographically
    assert most_frequent_form({"bi": 2, "ba": 2}) == "ba"


def test_compute_stats_hand_fixture():
    # types: b has forms {ba:2, bi:1}, d has {do:2}, k has {ko:1}
    stats = compute_stats(words("ba", "ba", "bi", "do", "do", "ko"))
    hist = stats.forms_per_word_histogram
    assert hist["1"] == pytest.approx(100.0 * 2 / 3)
    assert hist["2"] == pytest.approx(100.0 * 1 / 3)
    assert hist["3"] == hist["4"] == hist[">=5"] == 0.0
    # modal forms cover 2+2+1 of 6 tokens
    assert stats.most_freq_accuracy == pytest.approx(100.0 * 5 / 6)
    # one multi-form type with dominant share 2/3
    assert stats.dominant_form_ge99_pct == 0.0
    assert stats.dominant_form_lt70_pct == 100.0
    with pytest.raises(EmptyInput):
        compute_stats([])


def test_overlap_stats_hand_fixture():
    train = words("ba", "ba", "bi", "do")
    test = words("ba", "bi", "ko")
    seen, covered = overlap_stats(train, test)
    assert seen == pytest.approx(100.0 * 2 / 3)
    assert covered == pytest.approx(100.0 * 1 / 3)
    with pytest.raises(EmptyInput):
        overlap_stats([], test)


def test_cross_dialect_overlap_hand_fixture():
    # a has types {b, d}; b has {b (differing form), k}
    from diacritizer.corpus import Corpus, Verse

    a = Corpus("A", (Verse("a1", tuple(words("ba", "do"))),))
    b = Corpus("B", (Verse("b1", tuple(words("bi", "ko"))),))
    vocab, agree = cross_dialect_overlap(a, b)
    assert vocab == pytest.approx(50.0)
    assert agree == pytest.approx(0.0)

    b2 = Corpus("B", (Verse("b1", tuple(words("ba", "ko"))),))
    vocab, agree = cross_dialect_overlap(a, b2)
    assert vocab == pytest.approx(50.0)
    assert agree == pytest.approx(100.0)
