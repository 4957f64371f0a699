"""Exception hierarchy shared by all diacritizer modules."""


class DiacritizerError(Exception):
    """Base class for all errors raised by this package."""


class UnmappableCharacter(DiacritizerError):
    def __init__(self, position: int, codepoint: str):
        self.position = position
        self.codepoint = codepoint
        super().__init__(
            f"unmappable character {codepoint!r} (U+{ord(codepoint):04X}) at position {position}"
        )


class LeadingDiacritic(DiacritizerError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"diacritic with no preceding base letter at position {position}")


class MalformedCombination(DiacritizerError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"two distinct vowels on one letter at position {position}")


class LengthMismatch(DiacritizerError):
    pass


class EmptyInput(DiacritizerError):
    pass


class EmptySequence(DiacritizerError):
    pass


class DuplicateVerseId(DiacritizerError):
    def __init__(self, verse_id: str, line: int):
        self.verse_id = verse_id
        self.line = line
        super().__init__(f"duplicate verse id {verse_id!r} on line {line}")


class CorpusParseError(DiacritizerError):
    """Wraps a script-level parse error with file position."""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class TooFewVerses(DiacritizerError):
    pass


class InvalidConfig(DiacritizerError):
    pass


class PositionOutOfRange(DiacritizerError):
    pass


class VocabTooSmall(DiacritizerError):
    pass


class NonFiniteObjective(DiacritizerError):
    pass


class NonFiniteLoss(DiacritizerError):
    def __init__(self, epoch: int, batch: int):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")


class AlignmentMismatch(DiacritizerError):
    def __init__(self, index: int, detail: str = ""):
        self.index = index
        super().__init__(f"gold/predicted misaligned at index {index}" + (f": {detail}" if detail else ""))


class DiacriticsInQuery(DiacritizerError):
    pass
