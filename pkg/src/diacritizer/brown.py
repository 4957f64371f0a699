"""Greedy agglomerative Brown clustering over word types.

Standard frequency-capped procedure: the top-k frequent types seed the
clusters, every remaining type (in frequency order) joins the cluster
whose merge keeps average mutual information highest, and the k clusters
are then merged down to a single root while recording the binary tree.
Each type's bitstring is the root-to-leaf path of its cluster.  Ties break
by frequency (descending) then lexicographically, so the output is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import VocabTooSmall


@dataclass(frozen=True)
class BrownClustering:
    paths: Dict[str, str]  # word -> bitstring path
    k: int

    def path_of(self, word: str) -> Optional[str]:
        return self.paths.get(word)


def _ami(counts: np.ndarray) -> float:
    """Average mutual information of an adjacent-cluster bigram count matrix."""
    n = counts.sum()
    if n == 0:
        return 0.0
    left = counts.sum(axis=1)
    right = counts.sum(axis=0)
    rows, cols = (counts > 0).nonzero()
    p = counts[rows, cols] / n
    return float(np.sum(p * np.log(p * n * n / (left[rows] * right[cols]))))


def _merged(counts: np.ndarray, i: int, j: int) -> np.ndarray:
    """Count matrix after merging cluster j into cluster i (j removed)."""
    m = counts.copy()
    m[i, :] += m[j, :]
    m[:, i] += m[:, j]
    return np.delete(np.delete(m, j, axis=0), j, axis=1)


def brown_cluster(verses: Iterable[Sequence[str]], k: int) -> BrownClustering:
    """Cluster base strings from verse contexts into k classes with bitstrings."""
    if k < 2:
        raise VocabTooSmall("k must be >= 2")
    unigram: Dict[str, int] = {}
    bigram: Dict[tuple, int] = {}
    for verse in verses:
        prev = None
        for word in verse:
            unigram[word] = unigram.get(word, 0) + 1
            if prev is not None:
                bigram[(prev, word)] = bigram.get((prev, word), 0) + 1
            prev = word
    vocab = sorted(unigram, key=lambda w: (-unigram[w], w))
    if len(vocab) < k:
        raise VocabTooSmall(f"vocabulary size {len(vocab)} < k={k}")

    cluster_of = {w: i for i, w in enumerate(vocab[:k])}
    members: List[List[str]] = [[w] for w in vocab[:k]]

    # bigram counts between the current clusters, built incrementally
    counts = np.zeros((k, k))
    for (a, b), n in bigram.items():
        ia, ib = cluster_of.get(a), cluster_of.get(b)
        if ia is not None and ib is not None:
            counts[ia, ib] += n

    out_adj: Dict[str, Dict[str, int]] = {}
    in_adj: Dict[str, Dict[str, int]] = {}
    for (a, b), n in bigram.items():
        out_adj.setdefault(a, {})[b] = n
        in_adj.setdefault(b, {})[a] = n

    # attach remaining types one by one, counting only already-assigned neighbors
    for word in vocab[k:]:
        row = np.zeros(k)
        col = np.zeros(k)
        self_count = float(out_adj.get(word, {}).get(word, 0))
        for b, n in out_adj.get(word, {}).items():
            if b != word and b in cluster_of:
                row[cluster_of[b]] += n
        for a, n in in_adj.get(word, {}).items():
            if a != word and a in cluster_of:
                col[cluster_of[a]] += n
        ext = np.zeros((k + 1, k + 1))
        ext[:k, :k] = counts
        ext[k, :k] = row
        ext[:k, k] = col
        ext[k, k] = self_count
        best_i, best_ami = 0, -np.inf
        for i in range(k):
            ami = _ami(_merged(ext, i, k))
            if ami > best_ami + 1e-12:
                best_i, best_ami = i, ami
        cluster_of[word] = best_i
        members[best_i].append(word)
        counts[best_i, :] += row
        counts[:, best_i] += col
        counts[best_i, best_i] += self_count

    # agglomerative merges down to one root, recording the binary tree
    paths = {w: "" for w in vocab}

    def freq(group: List[str]) -> int:
        return sum(unigram[w] for w in group)

    node_members = [list(m) for m in members]
    while len(node_members) > 1:
        best = (0, 1)
        best_ami = -np.inf
        for a in range(len(node_members)):
            for b in range(a + 1, len(node_members)):
                ami = _ami(_merged(counts, a, b))
                if ami > best_ami + 1e-12:
                    best, best_ami = (a, b), ami
        a, b = best
        ma, mb = node_members[a], node_members[b]
        # heavier (then lexicographically earlier) side takes bit 0
        first, second = sorted((ma, mb), key=lambda g: (-freq(g), min(g)))
        for w in first:
            paths[w] = "0" + paths[w]
        for w in second:
            paths[w] = "1" + paths[w]
        counts = _merged(counts, a, b)
        node_members[a] = ma + mb
        del node_members[b]
    return BrownClustering(paths=paths, k=k)
