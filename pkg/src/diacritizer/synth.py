"""Synthetic two-dialect corpus generator.

Stands in for corpora that cannot be redistributed.  Produces a pair of
corpora over partially shared vocabularies with known ground truth, so the
statistics and learning pipelines can be validated against the generator's
own parameters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .corpus import Corpus, Verse
from .errors import InvalidConfig
from .script import NONE_TAG, DiacriticTag, TaggedWord

# Letters used for synthetic base strings (a subset of Buckwalter consonants).
_LETTERS = "btvjHxd*rzs$SDTZEgfqklmnhwyA"

# Tag inventory with rough dialect-like frequencies; NONE and sukun dominate.
_TAG_CHOICES = [
    (NONE_TAG, 0.30),
    (DiacriticTag(vowel="a"), 0.18),
    (DiacriticTag(vowel="i"), 0.10),
    (DiacriticTag(vowel="o"), 0.22),
    (DiacriticTag(vowel="u"), 0.08),
    (DiacriticTag(shadda=True), 0.03),
    (DiacriticTag(shadda=True, vowel="a"), 0.04),
    (DiacriticTag(shadda=True, vowel="i"), 0.01),
    (DiacriticTag(shadda=True, vowel="o"), 0.03),
    (DiacriticTag(shadda=True, vowel="u"), 0.01),
]
_TAGS = [t for t, _ in _TAG_CHOICES]
_TAG_WEIGHTS = [w for _, w in _TAG_CHOICES]


@dataclass(frozen=True)
class SynthConfig:
    vocab_size: int = 800
    verse_count: int = 1000
    mean_verse_len: int = 8
    ambiguity_rate: float = 0.0
    pair_overlap: float = 0.61
    pair_form_divergence: float = 0.35
    # When set, dominant forms follow a (previous char, char) -> tag rule
    # shared by both dialects, so unseen words are learnable; divergence and
    # ambiguity then mutate a single position instead of resampling whole
    # forms.  Default off: forms are i.i.d. random per type.
    char_conditioned: bool = False

    def validate(self) -> None:
        for name in ("ambiguity_rate", "pair_overlap", "pair_form_divergence"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {v}")
        for name in ("vocab_size", "verse_count", "mean_verse_len"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"{name} must be positive")


@dataclass(frozen=True)
class SynthResult:
    corpus_a: Corpus
    corpus_b: Corpus
    # ground truth: base -> (dominant TaggedWord, optional secondary TaggedWord)
    lexicon_a: Dict[str, Tuple[TaggedWord, TaggedWord | None]] = field(repr=False, default_factory=dict)
    lexicon_b: Dict[str, Tuple[TaggedWord, TaggedWord | None]] = field(repr=False, default_factory=dict)


def _random_base(rng: random.Random, taken: set) -> str:
    while True:
        length = rng.randint(3, 8)
        base = "".join(rng.choice(_LETTERS) for _ in range(length))
        if base not in taken:
            taken.add(base)
            return base


def _random_tags(rng: random.Random, length: int) -> Tuple[DiacriticTag, ...]:
    return tuple(rng.choices(_TAGS, weights=_TAG_WEIGHTS, k=length))


def _different_tags(rng: random.Random, base: str, avoid) -> Tuple[DiacriticTag, ...]:
    while True:
        tags = _random_tags(rng, len(base))
        if tags != avoid:
            return tags


def _mutate_one(rng: random.Random, tags: Tuple[DiacriticTag, ...]) -> Tuple[DiacriticTag, ...]:
    pos = rng.randrange(len(tags))
    while True:
        tag = rng.choices(_TAGS, weights=_TAG_WEIGHTS, k=1)[0]
        if tag != tags[pos]:
            return tags[:pos] + (tag,) + tags[pos + 1 :]


class _TagRule:
    """Lazily sampled deterministic (previous char, char) -> tag mapping."""

    def __init__(self, rng: random.Random):
        self._rng = rng
        self._table: Dict[Tuple[str, str], DiacriticTag] = {}

    def tags_for(self, base: str) -> Tuple[DiacriticTag, ...]:
        tags = []
        prev = "^"
        for ch in base:
            key = (prev, ch)
            if key not in self._table:
                self._table[key] = self._rng.choices(_TAGS, weights=_TAG_WEIGHTS, k=1)[0]
            tags.append(self._table[key])
            prev = ch
        return tuple(tags)


def _build_lexicon(
    rng: random.Random,
    bases: List[str],
    ambiguity_rate: float,
    rule: Optional[_TagRule] = None,
) -> Dict[str, Tuple[TaggedWord, Optional[TaggedWord]]]:
    lex = {}
    for base in bases:
        tags = rule.tags_for(base) if rule is not None else _random_tags(rng, len(base))
        dominant = TaggedWord(base, tags)
        secondary = None
        if rng.random() < ambiguity_rate:
            if rule is not None:
                secondary = TaggedWord(base, _mutate_one(rng, dominant.tags))
            else:
                secondary = TaggedWord(base, _different_tags(rng, base, dominant.tags))
        lex[base] = (dominant, secondary)
    return lex


def _build_corpus(
    rng: random.Random,
    label: str,
    lexicon: Dict[str, Tuple[TaggedWord, TaggedWord | None]],
    config: SynthConfig,
) -> Corpus:
    bases = list(lexicon)
    total_tokens = config.verse_count * config.mean_verse_len
    # every type appears at least 3 times so dominant forms stay strictly modal
    min_occ = 3 if total_tokens >= 3 * len(bases) else 1
    occurrences = {b: min_occ for b in bases}
    for _ in range(total_tokens - min_occ * len(bases)):
        occurrences[rng.choice(bases)] += 1
    tokens: List[TaggedWord] = []
    for base in bases:
        dominant, secondary = lexicon[base]
        n = occurrences[base]
        n_sec = 0
        if secondary is not None and n >= 3:
            share = rng.uniform(0.1, 0.45)
            n_sec = min(max(1, round(share * n)), (n - 1) // 2)
        tokens.extend([secondary] * n_sec)
        tokens.extend([dominant] * (n - n_sec))
    rng.shuffle(tokens)
    verses = []
    pos = 0
    vid = 0
    while pos < len(tokens):
        length = rng.randint(max(1, config.mean_verse_len - 2), config.mean_verse_len + 2)
        chunk = tokens[pos : pos + length]
        pos += length
        verses.append(Verse(id=f"{label.lower()}{vid:05d}", tokens=tuple(chunk)))
        vid += 1
    return Corpus(dialect_label=label, verses=tuple(verses))


def synth_generate(config: SynthConfig, seed: int) -> SynthResult:
    """Generate a dialect pair with known lexicons; deterministic per seed."""
    config.validate()
    rng = random.Random(seed)
    taken: set = set()
    n_shared = round(config.pair_overlap * config.vocab_size)
    n_private = config.vocab_size - n_shared
    shared = [_random_base(rng, taken) for _ in range(n_shared)]
    private_a = [_random_base(rng, taken) for _ in range(n_private)]
    private_b = [_random_base(rng, taken) for _ in range(n_private)]

    rule = _TagRule(rng) if config.char_conditioned else None
    lex_a = _build_lexicon(rng, shared + private_a, config.ambiguity_rate, rule)
    lex_b: Dict[str, Tuple[TaggedWord, Optional[TaggedWord]]] = {}
    for base in shared:
        dominant_a, _ = lex_a[base]
        if rng.random() < config.pair_form_divergence:
            if rule is not None:
                dominant = TaggedWord(base, _mutate_one(rng, dominant_a.tags))
            else:
                dominant = TaggedWord(base, _different_tags(rng, base, dominant_a.tags))
        else:
            dominant = dominant_a
        secondary = None
        if rng.random() < config.ambiguity_rate:
            if rule is not None:
                secondary = TaggedWord(base, _mutate_one(rng, dominant.tags))
            else:
                secondary = TaggedWord(base, _different_tags(rng, base, dominant.tags))
        lex_b[base] = (dominant, secondary)
    lex_b.update(_build_lexicon(rng, private_b, config.ambiguity_rate, rule))

    corpus_a = _build_corpus(rng, "SYN-A", lex_a, config)
    corpus_b = _build_corpus(rng, "SYN-B", lex_b, config)
    return SynthResult(corpus_a=corpus_a, corpus_b=corpus_b, lexicon_a=lex_a, lexicon_b=lex_b)
