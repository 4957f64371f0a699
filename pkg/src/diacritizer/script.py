"""Arabic/Buckwalter text model.

Buckwalter is the canonical internal representation; Arabic script is
handled only at I/O boundaries.  Diacritized tokens decompose into a base
character string plus one tag per base character, where a tag is either
nothing, a single vowel/sukun, a bare shadda, or a shadda+vowel
combination rendered shadda-first (e.g. "~o").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import (
    EmptyInput,
    LeadingDiacritic,
    LengthMismatch,
    MalformedCombination,
    UnmappableCharacter,
)

# The five dialectal diacritics in Buckwalter: fatha, damma, kasra, sukun, shadda.
VOWELS = "auio"
SHADDA = "~"
DIACRITICS = VOWELS + SHADDA

# One-to-one Buckwalter <-> Arabic table (letters + the five diacritics).
# Alternate ASCII aliases (O, W, I for hamza forms) are deliberately left out
# so the mapping stays bijective.
BUCKWALTER_TO_ARABIC = {
    "'": "ء",  # hamza
    "|": "آ",  # alef madda
    ">": "أ",  # alef hamza above
    "&": "ؤ",  # waw hamza
    "<": "إ",  # alef hamza below
    "}": "ئ",  # yeh hamza
    "A": "ا",  # alef
    "b": "ب",
    "p": "ة",  # teh marbuta
    "t": "ت",
    "v": "ث",
    "j": "ج",
    "H": "ح",
    "x": "خ",
    "d": "د",
    "*": "ذ",
    "r": "ر",
    "z": "ز",
    "s": "س",
    "$": "ش",
    "S": "ص",
    "D": "ض",
    "T": "ط",
    "Z": "ظ",
    "E": "ع",
    "g": "غ",
    "_": "ـ",  # tatweel
    "f": "ف",
    "q": "ق",
    "k": "ك",
    "l": "ل",
    "m": "م",
    "n": "ن",
    "h": "ه",
    "w": "و",
    "Y": "ى",  # alef maqsura
    "y": "ي",
    "{": "ٱ",  # alef wasla
    "a": "َ",  # fatha
    "u": "ُ",  # damma
    "i": "ِ",  # kasra
    "~": "ّ",  # shadda
    "o": "ْ",  # sukun
}
ARABIC_TO_BUCKWALTER = {v: k for k, v in BUCKWALTER_TO_ARABIC.items()}
assert len(ARABIC_TO_BUCKWALTER) == len(BUCKWALTER_TO_ARABIC)

# Whitespace passes through transliteration untouched.
_PASSTHROUGH = " \t\n"


@dataclass(frozen=True)
class DiacriticTag:
    """One label per base character: shadda flag plus optional vowel/sukun."""

    shadda: bool = False
    vowel: Optional[str] = None

    def __post_init__(self):
        if self.vowel is not None and self.vowel not in VOWELS:
            raise ValueError(f"invalid vowel {self.vowel!r}")

    def render(self) -> str:
        """Canonical Buckwalter rendering, shadda first ('' for NONE)."""
        return (SHADDA if self.shadda else "") + (self.vowel or "")

    @classmethod
    def parse(cls, text: str) -> "DiacriticTag":
        """Parse a rendered tag; order-insensitive ('o~' == '~o')."""
        shadda = SHADDA in text
        vowels = [c for c in text if c in VOWELS]
        rest = [c for c in text if c not in DIACRITICS]
        if rest or len(vowels) > 1:
            raise ValueError(f"not a diacritic tag: {text!r}")
        return cls(shadda=shadda, vowel=vowels[0] if vowels else None)

    def __str__(self) -> str:
        return self.render() or "·"


NONE_TAG = DiacriticTag()


@dataclass(frozen=True)
class TaggedWord:
    """Parallel base characters and tags; the unit of training and scoring."""

    base: str
    tags: tuple

    def __post_init__(self):
        if len(self.base) != len(self.tags):
            raise LengthMismatch(
                f"base length {len(self.base)} != tags length {len(self.tags)}"
            )
        for ch in self.base:
            if ch in DIACRITICS:
                raise LengthMismatch(f"diacritic {ch!r} in base string")

    def render(self) -> str:
        return apply_tags(self)


class TagSet:
    """Ordered distinct tags with stable integer indexing; NONE at index 0."""

    def __init__(self, tags: Sequence[DiacriticTag]):
        ordered = [NONE_TAG] + sorted(
            {t for t in tags if t != NONE_TAG}, key=lambda t: t.render()
        )
        self._tags = tuple(ordered)
        self._index = {t: i for i, t in enumerate(self._tags)}

    def __len__(self) -> int:
        return len(self._tags)

    def __iter__(self):
        return iter(self._tags)

    def __getitem__(self, i: int) -> DiacriticTag:
        return self._tags[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, TagSet) and self._tags == other._tags

    def index(self, tag: DiacriticTag) -> int:
        return self._index[tag]

    def __contains__(self, tag: DiacriticTag) -> bool:
        return tag in self._index

    def renderings(self) -> list:
        return [t.render() for t in self._tags]

    @classmethod
    def from_renderings(cls, renderings: Iterable[str]) -> "TagSet":
        return cls([DiacriticTag.parse(r) for r in renderings])


def transliterate(text: str, direction: str) -> str:
    """Convert between Arabic script and Buckwalter.

    direction is 'to_arabic' or 'to_buckwalter'.  Bijective on the covered
    alphabet; raises UnmappableCharacter for anything outside the table.
    """
    if direction == "to_arabic":
        table = BUCKWALTER_TO_ARABIC
    elif direction == "to_buckwalter":
        table = ARABIC_TO_BUCKWALTER
    else:
        raise ValueError(f"unknown direction {direction!r}")
    out = []
    for pos, ch in enumerate(text):
        if ch in _PASSTHROUGH:
            out.append(ch)
        elif ch in table:
            out.append(table[ch])
        else:
            raise UnmappableCharacter(pos, ch)
    return "".join(out)


def strip_word(diacritized: str) -> TaggedWord:
    """Split a diacritized Buckwalter token into (base, tags).

    Duplicate identical diacritics on one letter collapse silently; two
    distinct vowels on one letter raise MalformedCombination.
    """
    base = []
    tags = []
    shadda = False
    vowel = None
    have_letter = False
    for pos, ch in enumerate(diacritized):
        if ch in DIACRITICS:
            if not have_letter:
                raise LeadingDiacritic(pos)
            if ch == SHADDA:
                shadda = True
            elif vowel is None or vowel == ch:
                vowel = ch
            else:
                raise MalformedCombination(pos)
        else:
            if have_letter:
                tags.append(DiacriticTag(shadda=shadda, vowel=vowel))
                shadda, vowel = False, None
            base.append(ch)
            have_letter = True
    if have_letter:
        tags.append(DiacriticTag(shadda=shadda, vowel=vowel))
    return TaggedWord(base="".join(base), tags=tuple(tags))


def apply_tags(word: TaggedWord) -> str:
    """Re-compose a diacritized token; inverse of strip_word."""
    if len(word.base) != len(word.tags):
        raise LengthMismatch("base/tags length mismatch")
    return "".join(ch + tag.render() for ch, tag in zip(word.base, word.tags))


def induce_tagset(words: Iterable[TaggedWord]) -> TagSet:
    """Collect all observed tags into a deterministic TagSet (NONE first)."""
    seen = set()
    empty = True
    for w in words:
        empty = False
        seen.update(w.tags)
    if empty:
        raise EmptyInput("no words to induce a tag set from")
    return TagSet(sorted(seen, key=lambda t: t.render()))


#: All tags expressible in the canonical combination algebra.
ALL_CANONICAL_TAGS = TagSet(
    [NONE_TAG]
    + [DiacriticTag(vowel=v) for v in VOWELS]
    + [DiacriticTag(shadda=True)]
    + [DiacriticTag(shadda=True, vowel=v) for v in VOWELS]
)
