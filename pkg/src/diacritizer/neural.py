"""Character-level BiLSTM-CRF tagger with manual reverse-mode gradients.

Architecture: embedding lookup, two stacked bidirectional LSTM layers, a
linear emission projection, and a linear-chain CRF output layer with
start/stop transition vectors.  Training uses Adam with inverse-time
learning-rate decay, inverted dropout on the embedding output and the
inter-layer concatenation, and early stopping on validation word error
rate.  Everything is double precision and deterministic per seed; the
analytic gradients are verifiable against central finite differences via
grad_check.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import chain
from .errors import (
    EmptyInput,
    EmptySequence,
    InvalidConfig,
    LengthMismatch,
    NonFiniteLoss,
)
from .script import TaggedWord, TagSet, induce_tagset
from .seeds import sub_seed
from .serialize import load_container, save_container

PAD, UNK = "<pad>", "<unk>"
ADAM_BETA1, ADAM_BETA2, ADAM_EPS = 0.9, 0.999, 1e-8


@dataclass(frozen=True)
class NeuralConfig:
    embedding_dim: int = 100
    lstm_state: int = 200  # per direction
    num_bilstm_layers: int = 2
    dropout_rate: float = 0.25
    batch_size: int = 5
    learning_rate: float = 0.01
    decay_rate: float = 0.05
    patience: int = 10
    max_epochs: int = 100
    grad_clip: float = 0.0  # 0 disables; set to e.g. 5.0 after a NonFiniteLoss

    def validate(self) -> None:
        for name in (
            "embedding_dim", "lstm_state", "num_bilstm_layers",
            "batch_size", "patience", "max_epochs",
        ):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"{name} must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InvalidConfig("dropout_rate must be in [0, 1)")
        if self.learning_rate <= 0 or self.decay_rate < 0:
            raise InvalidConfig("learning_rate must be positive, decay_rate >= 0")


@dataclass
class NeuralModel:
    config: NeuralConfig
    vocab: List[str]  # index 0 = PAD, 1 = UNK
    tagset: TagSet
    params: Dict[str, np.ndarray]
    char_to_id: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.char_to_id:
            self.char_to_id = {c: i for i, c in enumerate(self.vocab)}

    def encode(self, base: str) -> np.ndarray:
        unk = self.char_to_id[UNK]
        return np.array([self.char_to_id.get(c, unk) for c in base], dtype=np.intp)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    validation_loss: float
    validation_wer: float
    learning_rate: float


@dataclass
class TrainHistory:
    epochs: List[EpochStats]
    best_epoch: int
    stopped_early: bool

    def report_lines(self) -> List[str]:
        lines = ["epoch\ttrain_loss\tval_loss\tval_wer\tlr"]
        for e in self.epochs:
            lines.append(
                f"{e.epoch}\t{e.train_loss:.6f}\t{e.validation_loss:.6f}"
                f"\t{e.validation_wer:.4f}\t{e.learning_rate:.6f}"
            )
        lines.append(f"best_epoch\t{self.best_epoch}")
        lines.append(f"stopped_early\t{int(self.stopped_early)}")
        return lines


def _param_shapes(config: NeuralConfig, vocab_size: int, n_tags: int) -> Dict[str, tuple]:
    d, h = config.embedding_dim, config.lstm_state
    shapes = {"embedding": (vocab_size, d)}
    for layer in range(config.num_bilstm_layers):
        din = d if layer == 0 else 2 * h
        for direction in ("f", "b"):
            p = f"lstm{layer}{direction}"
            shapes[f"{p}_wx"] = (4 * h, din)
            shapes[f"{p}_wh"] = (4 * h, h)
            shapes[f"{p}_b"] = (4 * h,)
    shapes["emission_w"] = (2 * h, n_tags)
    shapes["emission_b"] = (n_tags,)
    shapes["transitions"] = (n_tags, n_tags)
    shapes["start"] = (n_tags,)
    shapes["stop"] = (n_tags,)
    return shapes


def init_model(config: NeuralConfig, vocab: Sequence[str], tagset: TagSet, seed: int) -> NeuralModel:
    """Uniform [-0.1, 0.1] weights, zero biases except forget-gate bias 1."""
    config.validate()
    if not vocab or len(tagset) == 0:
        raise InvalidConfig("vocab and tagset must be non-empty")
    if list(vocab[:2]) != [PAD, UNK]:
        vocab = [PAD, UNK] + [c for c in vocab if c not in (PAD, UNK)]
    rng = np.random.default_rng(seed)
    h = config.lstm_state
    params = {}
    for name, shape in _param_shapes(config, len(vocab), len(tagset)).items():
        if name.endswith("_b") or name == "emission_b":
            arr = np.zeros(shape)
            if name.startswith("lstm"):
                arr[h : 2 * h] = 1.0  # forget gate bias; gate order i,f,g,o
        else:
            arr = rng.uniform(-0.1, 0.1, size=shape)
        params[name] = arr
    return NeuralModel(config=config, vocab=list(vocab), tagset=tagset, params=params)


def parameter_count(model: NeuralModel) -> int:
    return sum(p.size for p in model.params.values())


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _lstm_forward(wx, wh, b, inputs, mask, reverse):
    """One direction over a padded batch; masked steps carry state through."""
    bsz, length, _ = inputs.shape
    h_dim = wh.shape[1]
    h = np.zeros((bsz, h_dim))
    c = np.zeros((bsz, h_dim))
    hs = np.zeros((bsz, length, h_dim))
    steps = []
    times = range(length - 1, -1, -1) if reverse else range(length)
    for t in times:
        x = inputs[:, t, :]
        m = mask[:, t][:, None]
        pre = x @ wx.T + h @ wh.T + b
        gi = _sigmoid(pre[:, :h_dim])
        gf = _sigmoid(pre[:, h_dim : 2 * h_dim])
        gg = np.tanh(pre[:, 2 * h_dim : 3 * h_dim])
        go = _sigmoid(pre[:, 3 * h_dim :])
        c_new = gf * c + gi * gg
        tc = np.tanh(c_new)
        h_new = go * tc
        h_out = m * h_new + (1.0 - m) * h
        c_out = m * c_new + (1.0 - m) * c
        steps.append((t, h, c, gi, gf, gg, go, tc, m))
        hs[:, t, :] = h_out
        h, c = h_out, c_out
    return hs, steps


def _lstm_backward(wx, wh, d_hs, inputs, steps):
    """BPTT for one direction; returns (d_inputs, d_wx, d_wh, d_b)."""
    bsz, length, _ = inputs.shape
    h_dim = wh.shape[1]
    d_inputs = np.zeros_like(inputs)
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(4 * h_dim)
    dh = np.zeros((bsz, h_dim))
    dc = np.zeros((bsz, h_dim))
    for t, h_prev, c_prev, gi, gf, gg, go, tc, m in reversed(steps):
        dh_total = dh + d_hs[:, t, :]
        dh_new = m * dh_total
        dc_new = m * dc
        d_go = dh_new * tc
        dc_total = dc_new + dh_new * go * (1.0 - tc * tc)
        d_gi = dc_total * gg
        d_gf = dc_total * c_prev
        d_gg = dc_total * gi
        d_pre = np.concatenate(
            [
                d_gi * gi * (1.0 - gi),
                d_gf * gf * (1.0 - gf),
                d_gg * (1.0 - gg * gg),
                d_go * go * (1.0 - go),
            ],
            axis=1,
        )
        x = inputs[:, t, :]
        d_wx += d_pre.T @ x
        d_wh += d_pre.T @ h_prev
        d_b += d_pre.sum(axis=0)
        d_inputs[:, t, :] = d_pre @ wx
        dh = (1.0 - m) * dh_total + d_pre @ wh
        dc = (1.0 - m) * dc + dc_total * gf
    return d_inputs, d_wx, d_wh, d_b


def _forward_batch(model, ids, mask, train, drop_rng):
    """Emissions for a padded batch; returns (emissions, cache for backprop)."""
    p = model.params
    cfg = model.config
    rate = cfg.dropout_rate if train else 0.0
    x = p["embedding"][ids]
    drop_masks = []
    if rate > 0.0:
        dm = (drop_rng.random(x.shape) >= rate) / (1.0 - rate)
        x = x * dm
        drop_masks.append(dm)
    layer_inputs = [x]
    layer_steps = []
    out = x
    for layer in range(cfg.num_bilstm_layers):
        hs_f, steps_f = _lstm_forward(
            p[f"lstm{layer}f_wx"], p[f"lstm{layer}f_wh"], p[f"lstm{layer}f_b"],
            out, mask, reverse=False,
        )
        hs_b, steps_b = _lstm_forward(
            p[f"lstm{layer}b_wx"], p[f"lstm{layer}b_wh"], p[f"lstm{layer}b_b"],
            out, mask, reverse=True,
        )
        out = np.concatenate([hs_f, hs_b], axis=2)
        layer_steps.append((steps_f, steps_b))
        if layer < cfg.num_bilstm_layers - 1 and rate > 0.0:
            dm = (drop_rng.random(out.shape) >= rate) / (1.0 - rate)
            out = out * dm
            drop_masks.append(dm)
        layer_inputs.append(out)
    emissions = out @ p["emission_w"] + p["emission_b"]
    cache = (ids, mask, layer_inputs, layer_steps, drop_masks, rate)
    return emissions, cache


def _backward_batch(model, d_emissions, cache):
    """Gradients of all parameters given d(loss)/d(emissions)."""
    p = model.params
    cfg = model.config
    ids, mask, layer_inputs, layer_steps, drop_masks, rate = cache
    grads = {name: np.zeros_like(arr) for name, arr in p.items()}
    final = layer_inputs[-1]
    grads["emission_w"] = np.einsum("blh,blt->ht", final, d_emissions)
    grads["emission_b"] = d_emissions.sum(axis=(0, 1))
    d_out = d_emissions @ p["emission_w"].T
    mask_idx = len(drop_masks) - 1
    for layer in range(cfg.num_bilstm_layers - 1, -1, -1):
        if layer < cfg.num_bilstm_layers - 1 and rate > 0.0:
            d_out = d_out * drop_masks[mask_idx]
            mask_idx -= 1
        h_dim = cfg.lstm_state
        steps_f, steps_b = layer_steps[layer]
        inputs = layer_inputs[layer]
        d_in_f, d_wx_f, d_wh_f, d_b_f = _lstm_backward(
            p[f"lstm{layer}f_wx"], p[f"lstm{layer}f_wh"], d_out[:, :, :h_dim], inputs, steps_f
        )
        d_in_b, d_wx_b, d_wh_b, d_b_b = _lstm_backward(
            p[f"lstm{layer}b_wx"], p[f"lstm{layer}b_wh"], d_out[:, :, h_dim:], inputs, steps_b
        )
        grads[f"lstm{layer}f_wx"] = d_wx_f
        grads[f"lstm{layer}f_wh"] = d_wh_f
        grads[f"lstm{layer}f_b"] = d_b_f
        grads[f"lstm{layer}b_wx"] = d_wx_b
        grads[f"lstm{layer}b_wh"] = d_wh_b
        grads[f"lstm{layer}b_b"] = d_b_b
        d_out = d_in_f + d_in_b
    if rate > 0.0:
        d_out = d_out * drop_masks[0]
    d_out = d_out * mask[:, :, None]
    np.add.at(grads["embedding"], ids, d_out)
    return grads


def forward(model: NeuralModel, char_sequence, mode: str = "eval", dropout_seed: int = 0) -> np.ndarray:
    """Emissions (length x tags) for a single sequence.

    char_sequence is a string or an id array; unseen chars map to UNK.
    mode 'train' applies inverted dropout with masks from dropout_seed.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    ids = model.encode(char_sequence) if isinstance(char_sequence, str) else np.asarray(char_sequence)
    if ids.size == 0:
        raise EmptySequence("empty character sequence")
    batch = ids[None, :]
    mask = np.ones((1, ids.size))
    rng = np.random.default_rng(dropout_seed)
    emissions, _ = _forward_batch(model, batch, mask, mode == "train", rng)
    return emissions[0]


def sequence_nll(
    emissions: np.ndarray,
    transitions: np.ndarray,
    gold_tags: Sequence[int],
    start: Optional[np.ndarray] = None,
    stop: Optional[np.ndarray] = None,
) -> float:
    """CRF negative log-likelihood: logZ minus the gold path score."""
    if emissions.shape[0] != len(gold_tags):
        raise LengthMismatch(
            f"{emissions.shape[0]} emission rows vs {len(gold_tags)} gold tags"
        )
    logz, _ = chain.forward_pass(emissions, transitions, start, stop)
    return logz - chain.sequence_score(emissions, transitions, list(gold_tags), start, stop)


def decode(model: NeuralModel, base: str) -> TaggedWord:
    """Viterbi decode one word; tie-break toward the lower tag index."""
    if not base:
        raise EmptySequence("empty word")
    emissions = forward(model, base, mode="eval")
    path, _ = chain.viterbi(
        emissions, model.params["transitions"], model.params["start"], model.params["stop"]
    )
    return TaggedWord(base, tuple(model.tagset[i] for i in path))


def decode_many(model: NeuralModel, bases: Sequence[str], batch: int = 64) -> List[TaggedWord]:
    """Batched eval-mode decoding (identical results to decode, just faster)."""
    results = []
    p = model.params
    for lo in range(0, len(bases), batch):
        group = bases[lo : lo + batch]
        ids, mask, _ = _pad_batch(model, group)
        rng = np.random.default_rng(0)
        emissions, _ = _forward_batch(model, ids, mask, False, rng)
        for b, base in enumerate(group):
            path, _ = chain.viterbi(
                emissions[b, : len(base)], p["transitions"], p["start"], p["stop"]
            )
            results.append(TaggedWord(base, tuple(model.tagset[i] for i in path)))
    return results


def _pad_batch(model: NeuralModel, bases: Sequence[str], words: Optional[Sequence[TaggedWord]] = None):
    max_len = max(len(b) for b in bases)
    bsz = len(bases)
    ids = np.zeros((bsz, max_len), dtype=np.intp)  # 0 = PAD
    mask = np.zeros((bsz, max_len))
    golds = []
    for i, base in enumerate(bases):
        enc = model.encode(base)
        ids[i, : len(base)] = enc
        mask[i, : len(base)] = 1.0
        if words is not None:
            golds.append([model.tagset.index(t) for t in words[i].tags])
    return ids, mask, golds


def _batch_loss_and_grads(model, words, train, drop_rng):
    """Mean per-word NLL over the batch and gradients of every parameter."""
    p = model.params
    bases = [w.base for w in words]
    ids, mask, golds = _pad_batch(model, bases, words)
    emissions, cache = _forward_batch(model, ids, mask, train, drop_rng)
    d_emissions = np.zeros_like(emissions)
    scale = 1.0 / len(words)
    total = 0.0
    d_trans = np.zeros_like(p["transitions"])
    d_start = np.zeros_like(p["start"])
    d_stop = np.zeros_like(p["stop"])
    for b, gold in enumerate(golds):
        n = len(gold)
        emis = emissions[b, :n]
        logz, unary, pairwise, _ = chain.marginals(
            emis, p["transitions"], p["start"], p["stop"]
        )
        total += logz - chain.sequence_score(
            emis, p["transitions"], gold, p["start"], p["stop"]
        )
        d = unary.copy()
        d[np.arange(n), gold] -= 1.0
        d_emissions[b, :n] = d * scale
        if n > 1:
            d_trans += scale * pairwise.sum(axis=0)
            np.add.at(d_trans, (np.array(gold[:-1]), np.array(gold[1:])), -scale)
        d_start += scale * unary[0]
        d_start[gold[0]] -= scale
        d_stop += scale * unary[-1]
        d_stop[gold[-1]] -= scale
    grads = _backward_batch(model, d_emissions, cache)
    grads["transitions"] += d_trans
    grads["start"] += d_start
    grads["stop"] += d_stop
    return total * scale, grads


def _clip(grads: Dict[str, np.ndarray], max_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm > 0:
        factor = max_norm / total
        for g in grads.values():
            g *= factor


def validation_wer(model: NeuralModel, words: Sequence[TaggedWord]) -> float:
    predicted = decode_many(model, [w.base for w in words])
    wrong = sum(1 for g, p in zip(words, predicted) if g.tags != p.tags)
    return 100.0 * wrong / len(words)


def _validation_loss(model: NeuralModel, words: Sequence[TaggedWord]) -> float:
    p = model.params
    total = 0.0
    n = 0
    for lo in range(0, len(words), 64):
        group = [w for w in words[lo : lo + 64] if all(t in model.tagset for t in w.tags)]
        if not group:
            continue
        ids, mask, golds = _pad_batch(model, [w.base for w in group], group)
        emissions, _ = _forward_batch(model, ids, mask, False, np.random.default_rng(0))
        for b, gold in enumerate(golds):
            total += sequence_nll(
                emissions[b, : len(gold)], p["transitions"], gold, p["start"], p["stop"]
            )
            n += 1
    return total / n if n else float("nan")


def train(
    config: NeuralConfig,
    train_words: Sequence[TaggedWord],
    validation_words: Sequence[TaggedWord],
    seed: int,
) -> Tuple[NeuralModel, TrainHistory]:
    """Adam training with early stopping on validation WER.

    Deterministic per seed: initialization, epoch shuffles, and dropout
    masks all derive from named sub-seeds.  Returns the parameters from
    the best epoch (ties favor the earlier epoch).
    """
    config.validate()
    if not train_words or not validation_words:
        raise EmptyInput("training and validation sets must be non-empty")
    tagset = induce_tagset(train_words)
    chars = sorted({c for w in train_words for c in w.base})
    vocab = [PAD, UNK] + chars
    model = init_model(config, vocab, tagset, sub_seed(seed, "init"))

    shuffle_rng = np.random.default_rng(sub_seed(seed, "shuffle"))
    dropout_rng = np.random.default_rng(sub_seed(seed, "dropout"))
    adam_m = {k: np.zeros_like(v) for k, v in model.params.items()}
    adam_v = {k: np.zeros_like(v) for k, v in model.params.items()}
    step = 0

    history: List[EpochStats] = []
    best_wer = float("inf")
    best_epoch = -1
    best_params = None
    since_best = 0
    stopped_early = False

    order = np.arange(len(train_words))
    for epoch in range(config.max_epochs):
        lr = config.learning_rate / (1.0 + config.decay_rate * epoch)
        shuffle_rng.shuffle(order)
        epoch_loss = 0.0
        n_batches = 0
        for batch_no, lo in enumerate(range(0, len(order), config.batch_size)):
            batch = [train_words[i] for i in order[lo : lo + config.batch_size]]
            loss, grads = _batch_loss_and_grads(model, batch, True, dropout_rng)
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, batch_no)
            if config.grad_clip > 0:
                _clip(grads, config.grad_clip)
            step += 1
            bc1 = 1.0 - ADAM_BETA1 ** step
            bc2 = 1.0 - ADAM_BETA2 ** step
            for name, g in grads.items():
                m = adam_m[name]
                v = adam_v[name]
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * g
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * g * g
                model.params[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
            epoch_loss += loss
            n_batches += 1
        val_wer = validation_wer(model, validation_words)
        val_loss = _validation_loss(model, validation_words)
        history.append(
            EpochStats(epoch, epoch_loss / n_batches, val_loss, val_wer, lr)
        )
        if val_wer < best_wer:
            best_wer = val_wer
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in model.params.items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                stopped_early = True
                break
    if best_params is not None:
        model.params = best_params
    return model, TrainHistory(epochs=history, best_epoch=best_epoch, stopped_early=stopped_early)


def grad_check(
    model: NeuralModel,
    sample_batch: Sequence[TaggedWord],
    epsilon: float = 1e-5,
    n_coords: int = 200,
    seed: int = 0,
    dropout: bool = False,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Samples at least n_coords coordinates spanning every parameter block.
    dropout=True is a negative control: resampled masks make the numeric
    estimate disagree, so a healthy harness must report a large error.
    """
    if not sample_batch:
        raise EmptyInput("empty sample batch")
    rng = np.random.default_rng(seed)

    def loss() -> float:
        drop = np.random.default_rng(rng.integers(2**63)) if dropout else np.random.default_rng(0)
        value, _ = _batch_loss_and_grads(model, sample_batch, dropout, drop)
        return value

    _, grads = _batch_loss_and_grads(
        model, sample_batch, dropout, np.random.default_rng(0)
    )
    names = sorted(model.params)
    per_block = max(2, -(-n_coords // len(names)))
    worst = 0.0
    for name in names:
        arr = model.params[name]
        flat = arr.reshape(-1)
        count = min(per_block, flat.size)
        idx = rng.choice(flat.size, size=count, replace=False)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss()
            flat[i] = orig - epsilon
            down = loss()
            flat[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            analytic = grads[name].reshape(-1)[i]
            err = abs(analytic - numeric) / max(1.0, abs(analytic) + abs(numeric))
            worst = max(worst, err)
    return worst


_WS = re.compile(r"(\s+)")


def predict_text(model: NeuralModel, undiacritized_line: str) -> str:
    """Diacritize a whitespace-tokenized line, preserving whitespace."""
    parts = _WS.split(undiacritized_line)
    out = []
    for part in parts:
        if not part or part.isspace():
            out.append(part)
        else:
            out.append(decode(model, part).render())
    return "".join(out)


def save_neural(model: NeuralModel, path: str) -> None:
    meta = {
        "config": {
            k: getattr(model.config, k) for k in NeuralConfig.__dataclass_fields__
        },
        "vocab": model.vocab,
        "tagset": model.tagset.renderings(),
    }
    save_container(path, "neural", meta, model.params)


def load_neural(path: str) -> NeuralModel:
    kind, meta, arrays = load_container(path)
    if kind != "neural":
        raise ValueError(f"{path}: expected a neural model, found {kind!r}")
    config = NeuralConfig(**meta["config"])
    return NeuralModel(
        config=config,
        vocab=list(meta["vocab"]),
        tagset=TagSet.from_renderings(meta["tagset"]),
        params=dict(arrays),
    )
