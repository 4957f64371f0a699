"""Shared fixtures and helpers for the test suite."""

import random

from diacritizer.corpus import Corpus, Verse
from diacritizer.script import ALL_CANONICAL_TAGS, TaggedWord

LETTERS = "btvjHxd*rzs$SDTZEgfqklmnhwyA"


def random_word(rng: random.Random, min_len: int = 1, max_len: int = 8) -> TaggedWord:
    length = rng.randint(min_len, max_len)
    base = "".join(rng.choice(LETTERS) for _ in range(length))
    tags = tuple(rng.choice(list(ALL_CANONICAL_TAGS)) for _ in range(length))
    return TaggedWord(base, tags)


def tiny_corpus(label: str, rng: random.Random, n_verses: int = 20,
                verse_len: int = 5, vocab: int = 12) -> Corpus:
    words = [random_word(rng, 2, 5) for _ in range(vocab)]
    verses = []
    for i in range(n_verses):
        tokens = tuple(rng.choice(words) for _ in range(verse_len))
        verses.append(Verse(id=f"{label}{i:03d}", tokens=tokens))
    return Corpus(dialect_label=label, verses=tuple(verses))
