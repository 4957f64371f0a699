"""BiLSTM-CRF tagger: initialization, gradients, decoding, training."""

import itertools
import math

import numpy as np
import pytest

from diacritizer import chain
from diacritizer.errors import EmptyInput, EmptySequence, InvalidConfig
from diacritizer.neural import (
    PAD,
    UNK,
    NeuralConfig,
    decode,
    decode_many,
    forward,
    grad_check,
    init_model,
    load_neural,
    parameter_count,
    predict_text,
    save_neural,
    sequence_nll,
    train,
)
from diacritizer.script import induce_tagset, strip_word

SMALL = NeuralConfig(embedding_dim=6, lstm_state=5, batch_size=2,
                     dropout_rate=0.25, max_epochs=3)


def words(*texts):
    return [strip_word(t) for t in texts]

# distinct bases only, so a model can fit the set exactly
TRAIN = words("ba", "zi", "dor", "kamil", "yiT~ahoruwA", "manoToqapo")


def make_model(seed=0, config=SMALL):
    tagset = induce_tagset(TRAIN)
    chars = sorted({c for w in TRAIN for c in w.base})
    return init_model(config, [PAD, UNK] + chars, tagset, seed)


def test_init_is_deterministic_and_bounded():
    a = make_model(1)
    b = make_model(1)
    c = make_model(2)
    for name in a.params:
        assert np.array_equal(a.params[name], b.params[name])
    assert any(not np.array_equal(a.params[n], c.params[n]) for n in a.params)
    for name, arr in a.params.items():
        if name.endswith("_b"):
            continue
        assert np.all(np.abs(arr) <= 0.1)


def test_forget_gate_bias_is_one():
    model = make_model()
    h = model.config.lstm_state
    for layer in range(model.config.num_bilstm_layers):
        for d in ("f", "b"):
            bias = model.params[f"lstm{layer}{d}_b"]
            assert np.all(bias[h:2 * h] == 1.0)
            assert np.all(bias[:h] == 0.0)
            assert np.all(bias[2 * h:] == 0.0)


def test_parameter_count_closed_form():
    model = make_model()
    cfg = model.config
    v, d, h, t = len(model.vocab), cfg.embedding_dim, cfg.lstm_state, len(model.tagset)
    expected = v * d
    for layer in range(cfg.num_bilstm_layers):
        din = d if layer == 0 else 2 * h
        expected += 2 * (4 * h * din + 4 * h * h + 4 * h)  # both directions
    expected += 2 * h * t + t  # emission projection
    expected += t * t + 2 * t  # transitions, start, stop
    assert parameter_count(model) == expected


def test_config_validation():
    with pytest.raises(InvalidConfig):
        NeuralConfig(dropout_rate=1.0).validate()
    with pytest.raises(InvalidConfig):
        NeuralConfig(max_epochs=0).validate()
    with pytest.raises(InvalidConfig):
        NeuralConfig(learning_rate=0.0).validate()


def test_sequence_nll_uniform_model():
    # zero emissions and transitions: p(any path) = T^-L, nll = L * ln T
    t, n = 4, 3
    nll = sequence_nll(np.zeros((n, t)), np.zeros((t, t)), [1, 2, 0])
    assert nll == pytest.approx(n * math.log(t))


def test_forward_eval_equals_zero_dropout_train():
    model = make_model()
    eval_out = forward(model, "b*d", mode="eval")
    no_drop = make_model(config=NeuralConfig(embedding_dim=6, lstm_state=5,
                                             batch_size=2, dropout_rate=0.0,
                                             max_epochs=3))
    train_out = forward(no_drop, "b*d", mode="train", dropout_seed=7)
    assert np.allclose(eval_out, train_out)
    # dropout in train mode changes the output
    assert not np.allclose(eval_out, forward(model, "b*d", mode="train", dropout_seed=7))


def test_decode_matches_exhaustive_argmax():
    model = make_model()
    base = "b*d"
    emissions = forward(model, base, mode="eval")
    p = model.params
    best, best_score = None, -np.inf
    for path in itertools.product(range(len(model.tagset)), repeat=len(base)):
        s = chain.sequence_score(emissions, p["transitions"], list(path),
                                 p["start"], p["stop"])
        if s > best_score:
            best, best_score = path, s
    assert decode(model, base).tags == tuple(model.tagset[i] for i in best)


def test_decode_many_matches_decode():
    model = make_model()
    bases = [w.base for w in TRAIN]
    assert decode_many(model, bases, batch=2) == [decode(model, b) for b in bases]


def test_unknown_characters_map_to_unk():
    model = make_model()
    ids = model.encode("b!")
    assert ids[1] == model.char_to_id[UNK]
    decode(model, "b!")  # must not raise


def test_grad_check_passes_without_dropout():
    model = make_model(3)
    err = grad_check(model, TRAIN[:3], n_coords=60, seed=1, dropout=False)
    assert err < 1e-6


def test_grad_check_dropout_negative_control():
    model = make_model(3)
    err = grad_check(model, TRAIN[:3], n_coords=30, seed=1, dropout=True)
    assert err > 1e-2


def test_train_overfits_tiny_dataset():
    config = NeuralConfig(embedding_dim=16, lstm_state=16, batch_size=2,
                          dropout_rate=0.0, max_epochs=120, patience=120)
    model, history = train(config, TRAIN, TRAIN, seed=5)
    assert history.epochs[-1].train_loss < history.epochs[0].train_loss
    assert history.best_epoch >= 0
    for w in TRAIN:
        assert decode(model, w.base) == w


def test_train_is_deterministic():
    config = NeuralConfig(embedding_dim=6, lstm_state=5, batch_size=2, max_epochs=2)
    m1, h1 = train(config, TRAIN, TRAIN[:2], seed=9)
    m2, h2 = train(config, TRAIN, TRAIN[:2], seed=9)
    for name in m1.params:
        assert np.array_equal(m1.params[name], m2.params[name])
    assert h1.report_lines() == h2.report_lines()


def test_train_rejects_empty_inputs():
    with pytest.raises(EmptyInput):
        train(SMALL, [], TRAIN, seed=0)
    with pytest.raises(EmptyInput):
        train(SMALL, TRAIN, [], seed=0)


def test_save_load_round_trip(tmp_path):
    model = make_model()
    path = str(tmp_path / "model.diac")
    save_neural(model, path)
    again = load_neural(path)
    assert again.vocab == model.vocab
    assert again.tagset == model.tagset
    assert decode(again, "b*d") == decode(model, "b*d")
    save_neural(again, str(tmp_path / "again.diac"))
    assert (tmp_path / "model.diac").read_bytes() == (tmp_path / "again.diac").read_bytes()


def test_predict_text_preserves_whitespace():
    model = make_model()
    out = predict_text(model, "bd  dr\tkml")
    stripped = "".join(c for c in out if c not in "~auio")
    assert stripped == "bd  dr\tkml"


def test_empty_sequence_raises():
    model = make_model()
    with pytest.raises(EmptySequence):
        decode(model, "")
