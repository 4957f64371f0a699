"""Most-frequent-diacritized-form lookup baseline and the lookup-first hybrid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

from .corpus import form_counts, most_frequent_form
from .errors import DiacriticsInQuery, EmptyInput
from .script import DIACRITICS, NONE_TAG, TaggedWord, strip_word


@dataclass(frozen=True)
class LookupEntry:
    best_form: TaggedWord
    count: int
    total: int


@dataclass(frozen=True)
class LookupTable:
    entries: Dict[str, LookupEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, base: str) -> bool:
        return base in self.entries


def build_lookup(training_words: Sequence[TaggedWord]) -> LookupTable:
    """One entry per base type; modal form with lexicographic tie-break."""
    if not training_words:
        raise EmptyInput("no training words")
    table = form_counts(training_words)
    entries = {}
    for base, forms in table.items():
        best = most_frequent_form(forms)
        entries[base] = LookupEntry(
            best_form=strip_word(best), count=forms[best], total=sum(forms.values())
        )
    return LookupTable(entries=entries)


def lookup_diacritize(base: str, table: LookupTable) -> Optional[TaggedWord]:
    """Modal form for a seen base string, or None for unseen words."""
    if any(c in DIACRITICS for c in base):
        raise DiacriticsInQuery(f"query {base!r} contains diacritics")
    entry = table.entries.get(base)
    return entry.best_form if entry else None


def identity_fallback(base: str) -> TaggedWord:
    """All-NONE tagging used when the pure baseline meets an unseen word."""
    return TaggedWord(base, (NONE_TAG,) * len(base))


def hybrid_diacritize(
    base: str, table: LookupTable, model_fallback: Callable[[str], TaggedWord]
) -> TaggedWord:
    """Lookup answer for seen words, model answer otherwise."""
    hit = lookup_diacritize(base, table)
    return hit if hit is not None else model_fallback(base)


def save_lookup(table: LookupTable, path: str) -> None:
    """Serialize as sorted 'base<TAB>form<TAB>count<TAB>total' lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for base in sorted(table.entries):
            e = table.entries[base]
            fh.write(f"{base}\t{e.best_form.render()}\t{e.count}\t{e.total}\n")


def load_lookup(path: str) -> LookupTable:
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            base, form, count, total = line.split("\t")
            entries[base] = LookupEntry(
                best_form=strip_word(form), count=int(count), total=int(total)
            )
    return LookupTable(entries=entries)
