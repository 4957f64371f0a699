"""Log-space dynamic programming for linear-chain models.

Shared by the CRF baseline and the neural tagger's CRF output layer.
All scores are raw log-potentials; `start` and `stop` are optional extra
scores on the first and last label (zeros when omitted).  Everything runs
in double precision without scaling tricks.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from .errors import EmptySequence


def _check(emissions: np.ndarray) -> None:
    if emissions.ndim != 2 or emissions.shape[0] == 0:
        raise EmptySequence("emissions must be a non-empty (length, tags) matrix")


def logsumexp(a: np.ndarray, axis=None):
    """Stable log-sum-exp (hand-rolled; this is the DP inner loop)."""
    m = np.max(a, axis=axis, keepdims=True)
    r = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return r.item()
    return np.squeeze(r, axis=axis)


def forward_pass(
    emissions: np.ndarray,
    transitions: np.ndarray,
    start: Optional[np.ndarray] = None,
    stop: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """Left-to-right recursion; returns (logZ, alpha of shape (L, T))."""
    _check(emissions)
    n, t = emissions.shape
    alpha = np.empty((n, t))
    alpha[0] = emissions[0] + (start if start is not None else 0.0)
    for i in range(1, n):
        # alpha[i][y] = logsum_y' alpha[i-1][y'] + trans[y', y] + emis[i][y]
        alpha[i] = logsumexp(alpha[i - 1][:, None] + transitions, axis=0) + emissions[i]
    final = alpha[-1] + (stop if stop is not None else 0.0)
    return float(logsumexp(final)), alpha


def backward_pass(
    emissions: np.ndarray,
    transitions: np.ndarray,
    stop: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Right-to-left recursion; beta[i][y] sums over completions after i."""
    _check(emissions)
    n, t = emissions.shape
    beta = np.empty((n, t))
    beta[-1] = stop if stop is not None else 0.0
    for i in range(n - 2, -1, -1):
        beta[i] = logsumexp(transitions + (emissions[i + 1] + beta[i + 1])[None, :], axis=1)
    return beta


def log_partition_backward(
    emissions: np.ndarray,
    transitions: np.ndarray,
    start: Optional[np.ndarray] = None,
    stop: Optional[np.ndarray] = None,
) -> float:
    """logZ computed from the backward recursion (consistency check)."""
    beta = backward_pass(emissions, transitions, stop)
    first = emissions[0] + beta[0] + (start if start is not None else 0.0)
    return float(logsumexp(first))


def marginals(
    emissions: np.ndarray,
    transitions: np.ndarray,
    start: Optional[np.ndarray] = None,
    stop: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Posterior tag marginals via forward-backward.

    Returns (logZ, unary (L, T), pairwise (L-1, T, T), alpha).
    """
    logz, alpha = forward_pass(emissions, transitions, start, stop)
    beta = backward_pass(emissions, transitions, stop)
    unary = np.exp(alpha + beta - logz)
    n, t = emissions.shape
    pairwise = np.empty((max(n - 1, 0), t, t))
    for i in range(n - 1):
        joint = (
            alpha[i][:, None]
            + transitions
            + (emissions[i + 1] + beta[i + 1])[None, :]
        )
        pairwise[i] = np.exp(joint - logz)
    return logz, unary, pairwise, alpha


def sequence_score(
    emissions: np.ndarray,
    transitions: np.ndarray,
    tags: List[int],
    start: Optional[np.ndarray] = None,
    stop: Optional[np.ndarray] = None,
) -> float:
    """Raw log-potential of one tag sequence."""
    _check(emissions)
    score = emissions[np.arange(len(tags)), tags].sum()
    score += transitions[tags[:-1], tags[1:]].sum() if len(tags) > 1 else 0.0
    if start is not None:
        score += start[tags[0]]
    if stop is not None:
        score += stop[tags[-1]]
    return float(score)


def viterbi(
    emissions: np.ndarray,
    transitions: np.ndarray,
    start: Optional[np.ndarray] = None,
    stop: Optional[np.ndarray] = None,
) -> Tuple[List[int], float]:
    """Highest-scoring tag sequence; ties break toward the lower tag index."""
    _check(emissions)
    n, t = emissions.shape
    score = emissions[0] + (start if start is not None else 0.0)
    back = np.empty((n, t), dtype=np.intp)
    for i in range(1, n):
        cand = score[:, None] + transitions  # (from, to)
        back[i] = np.argmax(cand, axis=0)  # argmax picks the lowest index on ties
        score = cand[back[i], np.arange(t)] + emissions[i]
    if stop is not None:
        score = score + stop
    last = int(np.argmax(score))
    best = float(score[last])
    path = [last]
    for i in range(n - 1, 0, -1):
        last = int(back[i, last])
        path.append(last)
    path.reverse()
    return path, best
