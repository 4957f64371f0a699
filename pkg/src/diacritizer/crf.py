"""Character-level linear-chain CRF baseline.

Trained on individual words out of context with character n-gram features
(one unigram, two bigrams, three trigrams, four 4-grams, with boundary
sentinels) plus optional Brown-cluster path prefixes of the containing
word.  The L2 penalty follows the CRF++ convention ||w||^2 / (2C), so a
larger C means weaker regularization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from . import chain
from .brown import BrownClustering
from .errors import (
    EmptyInput,
    EmptySequence,
    NonFiniteObjective,
    PositionOutOfRange,
)
from .script import TaggedWord, TagSet
from .serialize import load_container, save_container

# boundary sentinels outside the Buckwalter alphabet
LEFT = "["
RIGHT = "]"

# (template name, left offset, right offset), both inclusive around position 0
_NGRAM_TEMPLATES = [
    ("u", 0, 0),
    ("b1", -1, 0),
    ("b2", 0, 1),
    ("t1", -2, 0),
    ("t2", -1, 1),
    ("t3", 0, 2),
    ("q1", -3, 0),
    ("q2", -2, 1),
    ("q3", -1, 2),
    ("q4", 0, 3),
]

_CLUSTER_PREFIXES = [("cp4", 4), ("cp6", 6), ("cpf", None)]


def extract_features(
    word_chars: Sequence[str],
    position: int,
    clusters: Optional[BrownClustering] = None,
) -> List[str]:
    """Feature keys for one character position (10 n-grams, + 3 cluster keys)."""
    n = len(word_chars)
    if not 0 <= position < n:
        raise PositionOutOfRange(f"position {position} outside word of length {n}")

    def char(i: int) -> str:
        if i < 0:
            return LEFT
        if i >= n:
            return RIGHT
        return word_chars[i]

    keys = [
        f"{name}|{''.join(char(position + d) for d in range(lo, hi + 1))}"
        for name, lo, hi in _NGRAM_TEMPLATES
    ]
    if clusters is not None:
        path = clusters.path_of("".join(word_chars)) or "?"
        for name, length in _CLUSTER_PREFIXES:
            keys.append(f"{name}|{path if length is None else path[:length]}")
    return keys


@dataclass
class CrfModel:
    tagset: TagSet
    feature_keys: List[str]  # sorted; index in this list = feature id
    key_to_id: Dict[str, int]
    state_weights: np.ndarray  # (F, T)
    transitions: np.ndarray  # (T, T)
    c: float
    clusters: Optional[BrownClustering] = None


def _feature_ids(base: str, model_index: Dict[str, int], clusters) -> List[List[int]]:
    """Per-position known-feature ids; unseen keys are dropped (zero weight)."""
    ids = []
    for pos in range(len(base)):
        keys = extract_features(base, pos, clusters)
        ids.append([model_index[k] for k in keys if k in model_index])
    return ids


def _emissions(base: str, model: CrfModel) -> np.ndarray:
    emis = np.zeros((len(base), len(model.tagset)))
    for pos, ids in enumerate(_feature_ids(base, model.key_to_id, model.clusters)):
        if ids:
            emis[pos] = model.state_weights[ids].sum(axis=0)
    return emis


def crf_log_partition(word: TaggedWord, model: CrfModel) -> Tuple[float, np.ndarray]:
    """(logZ, per-position tag marginals) for one word under the model."""
    if not word.base:
        raise EmptySequence("empty word")
    emis = _emissions(word.base, model)
    logz, unary, _, _ = chain.marginals(emis, model.transitions)
    return logz, unary


def crf_decode(base: str, model: CrfModel) -> TaggedWord:
    """Viterbi decode; ties go to the lower tag index."""
    if not base:
        raise EmptySequence("empty word")
    emis = _emissions(base, model)
    path, _ = chain.viterbi(emis, model.transitions)
    return TaggedWord(base, tuple(model.tagset[i] for i in path))


def crf_train(
    train: Sequence[TaggedWord],
    tagset: TagSet,
    c: float = 10.0,
    max_iter: int = 200,
    tol: float = 1e-4,
    clusters: Optional[BrownClustering] = None,
) -> CrfModel:
    """Maximize sum log p(tags|chars) - ||w||^2/(2C) with L-BFGS.

    Words are independent training units; duplicate (base, tags) pairs are
    collapsed with counts, which leaves the objective unchanged.
    """
    if not train:
        raise EmptyInput("no training words")
    t = len(tagset)

    grouped: Dict[Tuple[str, tuple], int] = {}
    for w in train:
        key = (w.base, w.tags)
        grouped[key] = grouped.get(key, 0) + 1

    keys = set()
    for base, _ in grouped:
        for pos in range(len(base)):
            keys.update(extract_features(base, pos, clusters))
    feature_keys = sorted(keys)
    key_to_id = {k: i for i, k in enumerate(feature_keys)}
    f = len(feature_keys)

    # precompute per example: id matrix per position, gold tag indices, count
    examples = []
    def example_key(kv):
        (base, tags), _ = kv
        return base, tuple(t.render() for t in tags)

    for (base, tags), count in sorted(grouped.items(), key=example_key):
        ids = _feature_ids(base, key_to_id, clusters)
        gold = np.array([tagset.index(tag) for tag in tags], dtype=np.intp)
        examples.append((ids, gold, count))

    def objective(w: np.ndarray):
        state = w[: f * t].reshape(f, t)
        trans = w[f * t :].reshape(t, t)
        grad_state = np.zeros_like(state)
        grad_trans = np.zeros_like(trans)
        ll = 0.0
        for ids, gold, count in examples:
            emis = np.zeros((len(gold), t))
            for pos, fid in enumerate(ids):
                emis[pos] = state[fid].sum(axis=0)
            logz, unary, pairwise, _ = chain.marginals(emis, trans)
            gold_score = chain.sequence_score(emis, trans, list(gold))
            ll += count * (gold_score - logz)
            d_emis = unary.copy()
            d_emis[np.arange(len(gold)), gold] -= 1.0
            for pos, fid in enumerate(ids):
                grad_state[fid] += count * d_emis[pos]
            if len(gold) > 1:
                grad_trans += count * pairwise.sum(axis=0)
                np.add.at(grad_trans, (gold[:-1], gold[1:]), -count)
        obj = -(ll - w.dot(w) / (2.0 * c))
        grad = np.concatenate([grad_state.ravel(), grad_trans.ravel()]) + w / c
        if not np.isfinite(obj) or not np.all(np.isfinite(grad)):
            raise NonFiniteObjective("CRF objective diverged")
        return obj, grad

    w0 = np.zeros(f * t + t * t)
    result = minimize(
        objective, w0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-12},
    )
    w = result.x
    return CrfModel(
        tagset=tagset,
        feature_keys=feature_keys,
        key_to_id=key_to_id,
        state_weights=w[: f * t].reshape(f, t).copy(),
        transitions=w[f * t :].reshape(t, t).copy(),
        c=c,
        clusters=clusters,
    )


def save_crf(model: CrfModel, path: str) -> None:
    meta = {
        "tagset": model.tagset.renderings(),
        "feature_keys": model.feature_keys,
        "c": model.c,
        "cluster_paths": sorted(model.clusters.paths.items()) if model.clusters else None,
        "cluster_k": model.clusters.k if model.clusters else None,
    }
    save_container(
        path, "crf", meta,
        {"state_weights": model.state_weights, "transitions": model.transitions},
    )


def load_crf(path: str) -> CrfModel:
    kind, meta, arrays = load_container(path)
    if kind != "crf":
        raise ValueError(f"{path}: expected a crf model, found {kind!r}")
    clusters = None
    if meta.get("cluster_paths") is not None:
        clusters = BrownClustering(paths=dict(meta["cluster_paths"]), k=meta["cluster_k"])
    tagset = TagSet.from_renderings(meta["tagset"])
    return CrfModel(
        tagset=tagset,
        feature_keys=list(meta["feature_keys"]),
        key_to_id={k: i for i, k in enumerate(meta["feature_keys"])},
        state_weights=arrays["state_weights"],
        transitions=arrays["transitions"],
        c=meta["c"],
        clusters=clusters,
    )
