"""Character-level CRF baseline."""

import numpy as np
import pytest

from diacritizer.brown import brown_cluster
from diacritizer.crf import (
    crf_decode,
    crf_log_partition,
    crf_train,
    extract_features,
    load_crf,
    save_crf,
)
from diacritizer.errors import EmptyInput, EmptySequence, PositionOutOfRange
from diacritizer.script import induce_tagset, strip_word


def words(*texts):
    return [strip_word(t) for t in texts]

# distinct bases only, so the data is separable; "ba" duplicated on purpose
TRAIN = words("ba", "ba", "dor", "kamil", "yiT~ahoruwA", "manoToqapo")


def test_extract_features_ngram_keys():
    keys = extract_features("ba", 0)
    assert len(keys) == 10
    assert keys == [
        "u|b", "b1|[b", "b2|ba", "t1|[[b", "t2|[ba", "t3|ba]",
        "q1|[[[b", "q2|[[ba", "q3|[ba]", "q4|ba]]",
    ]


def test_extract_features_with_clusters():
    clusters = brown_cluster([["ba", "ka"], ["ba", "ka"]], 2)
    keys = extract_features("ba", 1, clusters)
    assert len(keys) == 13
    path = clusters.path_of("ba")
    assert keys[10:] == [f"cp4|{path[:4]}", f"cp6|{path[:6]}", f"cpf|{path}"]
    # unknown word falls back to a placeholder path
    assert extract_features("zz", 0, clusters)[10] == "cp4|?"


def test_extract_features_position_bounds():
    with pytest.raises(PositionOutOfRange):
        extract_features("ba", 2)
    with pytest.raises(PositionOutOfRange):
        extract_features("ba", -1)


def test_training_memorizes_separable_data():
    model = crf_train(TRAIN, induce_tagset(TRAIN), max_iter=200)
    for w in TRAIN:
        assert crf_decode(w.base, model) == w


def test_training_is_deterministic():
    a = crf_train(TRAIN, induce_tagset(TRAIN))
    b = crf_train(TRAIN, induce_tagset(TRAIN))
    assert np.array_equal(a.state_weights, b.state_weights)
    assert np.array_equal(a.transitions, b.transitions)


def test_weaker_regularization_grows_weights():
    tagset = induce_tagset(TRAIN)
    small = crf_train(TRAIN, tagset, c=0.1)
    large = crf_train(TRAIN, tagset, c=100.0)
    assert np.linalg.norm(large.state_weights) > np.linalg.norm(small.state_weights)


def test_log_partition_marginals():
    model = crf_train(TRAIN, induce_tagset(TRAIN))
    logz, unary = crf_log_partition(TRAIN[0], model)
    assert np.isfinite(logz)
    assert unary.shape == (len(TRAIN[0].base), len(model.tagset))
    assert np.allclose(unary.sum(axis=1), 1.0)


def test_save_load_round_trip(tmp_path):
    clusters = brown_cluster([[w.base for w in TRAIN]] * 3, 2)
    for cl in (None, clusters):
        model = crf_train(TRAIN, induce_tagset(TRAIN), clusters=cl)
        path = str(tmp_path / "model.diac")
        save_crf(model, path)
        again = load_crf(path)
        assert again.feature_keys == model.feature_keys
        assert np.array_equal(again.state_weights, model.state_weights)
        for w in TRAIN:
            assert crf_decode(w.base, again) == crf_decode(w.base, model)


def test_errors():
    with pytest.raises(EmptyInput):
        crf_train([], induce_tagset(TRAIN))
    model = crf_train(TRAIN[:2], induce_tagset(TRAIN[:2]))
    with pytest.raises(EmptySequence):
        crf_decode("", model)
