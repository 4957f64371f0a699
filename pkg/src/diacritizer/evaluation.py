"""Metrics, confusion matrices, and error analytics.

CER counts every base character position, including positions whose gold
tag is NONE; a word is wrong if any of its character tags is wrong.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import AlignmentMismatch
from .script import DiacriticTag, TaggedWord, TagSet, apply_tags

BASE_DIACRITICS = ("a", "u", "i", "o", "~")


@dataclass(frozen=True)
class EvalReport:
    cer: float
    wer: float
    token_count: int
    char_count: int

    def report_lines(self) -> List[str]:
        return [
            f"cer\t{self.cer:.4f}",
            f"wer\t{self.wer:.4f}",
            f"token_count\t{self.token_count}",
            f"char_count\t{self.char_count}",
        ]


@dataclass(frozen=True)
class ConfusionMatrix:
    tagset: TagSet
    counts: np.ndarray  # (gold, predicted)

    def grid_lines(self) -> List[str]:
        labels = [r or "NONE" for r in self.tagset.renderings()]
        lines = ["gold\\pred\t" + "\t".join(labels)]
        for i, label in enumerate(labels):
            lines.append(label + "\t" + "\t".join(str(int(c)) for c in self.counts[i]))
        return lines

    def render_heatmap(self, path: str) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        labels = [r or "NONE" for r in self.tagset.renderings()]
        fig, ax = plt.subplots(figsize=(6, 5))
        total = self.counts.sum()
        shares = self.counts / total if total else self.counts
        im = ax.imshow(shares, cmap="Blues")
        ax.set_xticks(range(len(labels)), labels)
        ax.set_yticks(range(len(labels)), labels)
        ax.set_xlabel("predicted")
        ax.set_ylabel("gold")
        fig.colorbar(im)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


@dataclass(frozen=True)
class ErrorBreakdown:
    # base diacritic -> % of error positions whose gold or predicted tag contains it
    shares: Dict[str, float] = field(default_factory=dict)

    def report_lines(self) -> List[str]:
        return [f"errors_involving_{d}\t{self.shares[d]:.4f}" for d in BASE_DIACRITICS]


def _check_alignment(gold: Sequence[TaggedWord], predicted: Sequence[TaggedWord]) -> None:
    if len(gold) != len(predicted):
        raise AlignmentMismatch(min(len(gold), len(predicted)), "length mismatch")
    for i, (g, p) in enumerate(zip(gold, predicted)):
        if g.base != p.base:
            raise AlignmentMismatch(i, f"base {g.base!r} vs {p.base!r}")


def score(gold: Sequence[TaggedWord], predicted: Sequence[TaggedWord]) -> EvalReport:
    """Character and word error rates over aligned word collections."""
    _check_alignment(gold, predicted)
    char_errors = 0
    word_errors = 0
    chars = 0
    for g, p in zip(gold, predicted):
        wrong = sum(1 for tg, tp in zip(g.tags, p.tags) if tg != tp)
        char_errors += wrong
        word_errors += 1 if wrong else 0
        chars += len(g.base)
    return EvalReport(
        cer=100.0 * char_errors / chars if chars else 0.0,
        wer=100.0 * word_errors / len(gold) if gold else 0.0,
        token_count=len(gold),
        char_count=chars,
    )


def mean_report(reports: Sequence[EvalReport]) -> EvalReport:
    """Arithmetic mean of per-fold error rates."""
    return EvalReport(
        cer=float(np.mean([r.cer for r in reports])),
        wer=float(np.mean([r.wer for r in reports])),
        token_count=sum(r.token_count for r in reports),
        char_count=sum(r.char_count for r in reports),
    )


def confusion(
    gold: Sequence[TaggedWord], predicted: Sequence[TaggedWord], tagset: TagSet
) -> ConfusionMatrix:
    """Counts per (gold tag, predicted tag) pair."""
    _check_alignment(gold, predicted)
    counts = np.zeros((len(tagset), len(tagset)))
    for g, p in zip(gold, predicted):
        for tg, tp in zip(g.tags, p.tags):
            counts[tagset.index(tg), tagset.index(tp)] += 1
    return ConfusionMatrix(tagset=tagset, counts=counts)


def top_errors(
    gold: Sequence[TaggedWord],
    predicted: Sequence[TaggedWord],
    n: int,
) -> List[Tuple[DiacriticTag, DiacriticTag, float, List[Tuple[str, str]]]]:
    """Most common (gold tag -> predicted tag) confusions.

    Each entry is (gold tag, predicted tag, share of all errors in percent,
    up to 3 example (gold word, predicted word) pairs), sorted by share
    descending with deterministic tie-break on the rendered tags.
    """
    _check_alignment(gold, predicted)
    cells: Dict[Tuple[DiacriticTag, DiacriticTag], int] = {}
    examples: Dict[Tuple[DiacriticTag, DiacriticTag], List[Tuple[str, str]]] = {}
    total = 0
    for g, p in zip(gold, predicted):
        for tg, tp in zip(g.tags, p.tags):
            if tg == tp:
                continue
            total += 1
            key = (tg, tp)
            cells[key] = cells.get(key, 0) + 1
            ex = examples.setdefault(key, [])
            pair = (apply_tags(g), apply_tags(p))
            if len(ex) < 3 and pair not in ex:
                ex.append(pair)
    if total == 0:
        return []
    ranked = sorted(
        cells.items(),
        key=lambda kv: (-kv[1], kv[0][0].render(), kv[0][1].render()),
    )
    return [
        (tg, tp, 100.0 * count / total, examples[(tg, tp)])
        for (tg, tp), count in ranked[:n]
    ]


def diacritic_breakdown(
    gold: Sequence[TaggedWord], predicted: Sequence[TaggedWord]
) -> ErrorBreakdown:
    """Per-diacritic involvement in errors; combinations count every member."""
    _check_alignment(gold, predicted)
    involved = {d: 0 for d in BASE_DIACRITICS}
    errors = 0
    for g, p in zip(gold, predicted):
        for tg, tp in zip(g.tags, p.tags):
            if tg == tp:
                continue
            errors += 1
            both = tg.render() + tp.render()
            for d in BASE_DIACRITICS:
                if d in both:
                    involved[d] += 1
    shares = {
        d: (100.0 * c / errors if errors else 0.0) for d, c in involved.items()
    }
    return ErrorBreakdown(shares=shares)
