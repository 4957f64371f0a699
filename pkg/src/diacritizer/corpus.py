"""Corpus ingestion, k-fold splitting, and lexical statistics.

Corpus files are UTF-8 text, one verse per line:

    verse-id <TAB> diacritized tokens separated by single spaces

Tokens may be Buckwalter or Arabic script (the loader transliterates the
latter).  Statistics treat the exact undiacritized base string as the type
key; most-frequent-form ties break lexicographically on the diacritized
Buckwalter string.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .errors import (
    CorpusParseError,
    DiacritizerError,
    DuplicateVerseId,
    EmptyInput,
    TooFewVerses,
)
from .script import TaggedWord, apply_tags, strip_word, transliterate


@dataclass(frozen=True)
class Verse:
    id: str
    tokens: Tuple[TaggedWord, ...]


@dataclass(frozen=True)
class Corpus:
    dialect_label: str
    verses: Tuple[Verse, ...]

    def words(self) -> List[TaggedWord]:
        return [w for v in self.verses for w in v.tokens]

    def word_count(self) -> int:
        return sum(len(v.tokens) for v in self.verses)

    def verse_map(self) -> Dict[str, Verse]:
        return {v.id: v for v in self.verses}


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train: frozenset
    validation: frozenset
    test: frozenset

    def select(self, corpus: Corpus, part: str) -> List[TaggedWord]:
        ids = getattr(self, part)
        return [w for v in corpus.verses if v.id in ids for w in v.tokens]


@dataclass(frozen=True)
class CorpusStats:
    forms_per_word_histogram: Dict[str, float]  # buckets "1".."4", ">=5" -> % of types
    most_freq_accuracy: float
    dominant_form_ge99_pct: float  # among multi-form types
    dominant_form_lt70_pct: float  # among multi-form types

    def report_lines(self) -> List[str]:
        lines = [f"most_freq_accuracy\t{self.most_freq_accuracy:.4f}"]
        for bucket in ("1", "2", "3", "4", ">=5"):
            lines.append(f"forms_{bucket}\t{self.forms_per_word_histogram[bucket]:.4f}")
        lines.append(f"dominant_form_ge99_pct\t{self.dominant_form_ge99_pct:.4f}")
        lines.append(f"dominant_form_lt70_pct\t{self.dominant_form_lt70_pct:.4f}")
        return lines


def load_corpus(path: str, encoding: str, dialect_label: str) -> Corpus:
    """Parse a verse-per-line corpus file.

    encoding is 'buckwalter' or 'arabic'; Arabic text is transliterated to
    Buckwalter before stripping.
    """
    if encoding not in ("buckwalter", "arabic"):
        raise ValueError(f"unknown encoding {encoding!r}")
    verses = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise CorpusParseError(lineno, 1, "missing TAB after verse id")
            verse_id, text = line.split("\t", 1)
            if verse_id in seen_ids:
                raise DuplicateVerseId(verse_id, lineno)
            seen_ids.add(verse_id)
            tokens = []
            column = len(verse_id) + 2
            for token in text.split(" "):
                if not token:
                    column += 1
                    continue
                try:
                    if encoding == "arabic":
                        token_bw = transliterate(token, "to_buckwalter")
                    else:
                        token_bw = token
                    tokens.append(strip_word(token_bw))
                except DiacritizerError as exc:
                    offset = getattr(exc, "position", 0) or 0
                    raise CorpusParseError(lineno, column + offset, str(exc)) from exc
                column += len(token) + 1
            if not tokens:
                raise CorpusParseError(lineno, len(verse_id) + 2, "verse has no tokens")
            verses.append(Verse(id=verse_id, tokens=tuple(tokens)))
    return Corpus(dialect_label=dialect_label, verses=tuple(verses))


def save_corpus(corpus: Corpus, path: str, encoding: str = "buckwalter") -> None:
    """Write a corpus back out in the load_corpus line format."""
    with open(path, "w", encoding="utf-8") as fh:
        for verse in corpus.verses:
            rendered = " ".join(apply_tags(w) for w in verse.tokens)
            if encoding == "arabic":
                rendered = transliterate(rendered, "to_arabic")
            fh.write(f"{verse.id}\t{rendered}\n")


def make_folds(corpus: Corpus, k: int, seed: int) -> List[FoldSplit]:
    """Shuffle verses and build k cross-validation splits.

    Fold i's test set is slice i of the shuffled verses; the remainder is
    split 7:1 train:validation by greedy token-count assignment.
    Deterministic for fixed (corpus, k, seed).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(corpus.verses) < k:
        raise TooFewVerses(f"{len(corpus.verses)} verses < k={k}")
    order = list(corpus.verses)
    random.Random(seed).shuffle(order)
    n = len(order)
    bounds = [round(i * n / k) for i in range(k + 1)]
    folds = []
    for i in range(k):
        test = order[bounds[i] : bounds[i + 1]]
        rest = order[: bounds[i]] + order[bounds[i + 1] :]
        train_ids, val_ids = set(), set()
        train_tok = val_tok = 0
        # keep val at 1/8 of assigned token mass (train:val = 7:1)
        for verse in rest:
            tok = len(verse.tokens)
            if val_tok * 7 < train_tok:
                val_ids.add(verse.id)
                val_tok += tok
            else:
                train_ids.add(verse.id)
                train_tok += tok
        folds.append(
            FoldSplit(
                fold_index=i,
                train=frozenset(train_ids),
                validation=frozenset(val_ids),
                test=frozenset(v.id for v in test),
            )
        )
    return folds


def form_counts(words: Sequence[TaggedWord]) -> Dict[str, Dict[str, int]]:
    """base string -> {diacritized form -> token count}."""
    table: Dict[str, Dict[str, int]] = {}
    for w in words:
        table.setdefault(w.base, {})
        form = apply_tags(w)
        table[w.base][form] = table[w.base].get(form, 0) + 1
    return table


def most_frequent_form(forms: Dict[str, int]) -> str:
    """Modal form; ties break lexicographically on the rendered string."""
    return min(forms, key=lambda f: (-forms[f], f))


def compute_stats(training_words: Sequence[TaggedWord]) -> CorpusStats:
    """Forms-per-type histogram and most-frequent-form self-accuracy."""
    if not training_words:
        raise EmptyInput("no training words")
    table = form_counts(training_words)
    n_types = len(table)
    buckets = {"1": 0, "2": 0, "3": 0, "4": 0, ">=5": 0}
    correct = 0
    total = 0
    multi = 0
    ge99 = 0
    lt70 = 0
    for forms in table.values():
        nf = len(forms)
        buckets[str(nf) if nf < 5 else ">=5"] += 1
        best = most_frequent_form(forms)
        type_total = sum(forms.values())
        correct += forms[best]
        total += type_total
        if nf > 1:
            multi += 1
            share = forms[best] / type_total
            if share > 0.99:
                ge99 += 1
            if share < 0.70:
                lt70 += 1
    return CorpusStats(
        forms_per_word_histogram={b: 100.0 * c / n_types for b, c in buckets.items()},
        most_freq_accuracy=100.0 * correct / total,
        dominant_form_ge99_pct=100.0 * ge99 / multi if multi else 0.0,
        dominant_form_lt70_pct=100.0 * lt70 / multi if multi else 0.0,
    )


def overlap_stats(
    train: Sequence[TaggedWord], test: Sequence[TaggedWord]
) -> Tuple[float, float]:
    """(seen_fraction, lookup_coverage) of test tokens against training.

    seen_fraction: % of test tokens whose base occurs in train.
    lookup_coverage: % of test tokens matching the train most-frequent form.
    """
    if not train or not test:
        raise EmptyInput("train and test must both be non-empty")
    table = form_counts(train)
    best = {base: most_frequent_form(forms) for base, forms in table.items()}
    seen = covered = 0
    for w in test:
        if w.base in best:
            seen += 1
            if apply_tags(w) == best[w.base]:
                covered += 1
    n = len(test)
    return 100.0 * seen / n, 100.0 * covered / n


def cross_dialect_overlap(a: Corpus, b: Corpus) -> Tuple[float, float]:
    """(vocab_overlap, form_agreement) between two corpora.

    vocab_overlap: % of a's base-string types also present in b.
    form_agreement: among shared types, % whose most-frequent forms match.
    """
    words_a, words_b = a.words(), b.words()
    if not words_a or not words_b:
        raise EmptyInput("both corpora must be non-empty")
    table_a = form_counts(words_a)
    table_b = form_counts(words_b)
    shared = [base for base in table_a if base in table_b]
    if not table_a:
        raise EmptyInput("corpus a has no types")
    vocab_overlap = 100.0 * len(shared) / len(table_a)
    if not shared:
        return vocab_overlap, 0.0
    agree = sum(
        1
        for base in shared
        if most_frequent_form(table_a[base]) == most_frequent_form(table_b[base])
    )
    return vocab_overlap, 100.0 * agree / len(shared)
