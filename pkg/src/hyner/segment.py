"""Rule-based sentence segmentation and tokenization for Armenian text.

Both are pluggable approximations: a terminator-plus-uppercase splitter
with an abbreviation exception list, and a regex tokenizer driven by a
small rule table (which characters stay attached inside a word).
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .errors import InputDataError
from .models import Token

TERMINATORS = "։.?!"  # ։ . ? !


def is_capitalized(text: str) -> bool:
    return bool(text) and unicodedata.category(text[0]) == "Lu"


def _is_upper(ch: str) -> bool:
    return unicodedata.category(ch) == "Lu"


@dataclass(frozen=True)
class TokenizerRules:
    """Characters kept word-internal / word-attached, from the rule table."""

    attach: tuple[str, ...] = ("-", "’", "'", "՚", "ՙ")
    emphasis: tuple[str, ...] = ("՜", "՛", "՞")

    @classmethod
    def from_text(cls, text: str) -> "TokenizerRules":
        attach: list[str] = []
        emphasis: list[str] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            kind, *chars = line.split()
            if kind == "attach":
                attach.extend(chars)
            elif kind == "emphasis":
                emphasis.extend(chars)
            else:
                raise InputDataError(f"tokenizer rule table line {lineno}: unknown kind {kind!r}")
        return cls(tuple(attach), tuple(emphasis))


class Tokenizer:
    """Whitespace split, punctuation peeled into single-character tokens."""

    def __init__(self, rules: TokenizerRules | None = None) -> None:
        self.rules = rules or TokenizerRules()
        attach = re.escape("".join(self.rules.attach + self.rules.emphasis))
        emphasis = re.escape("".join(self.rules.emphasis))
        word = rf"[^\W_]+(?:[{attach}][^\W_]+)*"
        if emphasis:
            word += rf"[{emphasis}]?"
        # A word, a dot run, or any single non-space character.
        self._token_re = re.compile(rf"{word}|\.+|\S")

    def __call__(self, text: str) -> list[Token]:
        return [Token(m.group(0), m.start(), m.end()) for m in self._token_re.finditer(text)]


def tokenize(text: str, rules: TokenizerRules | None = None) -> list[Token]:
    return Tokenizer(rules)(text)


class SentenceSegmenter:
    """Boundaries at terminator + whitespace + uppercase; newlines are hard."""

    def __init__(self, abbreviations: frozenset[str] | None = None) -> None:
        self.abbreviations = abbreviations if abbreviations is not None else frozenset()

    @classmethod
    def from_text(cls, text: str) -> "SentenceSegmenter":
        abbrevs = frozenset(
            line.strip().lower()
            for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        )
        return cls(abbrevs)

    def __call__(self, text: str) -> list[tuple[int, int]]:
        ranges: list[tuple[int, int]] = []
        start = 0
        i = 0
        n = len(text)
        while i < n:
            ch = text[i]
            if ch == "\n":
                self._push(text, start, i, ranges)
                start = i + 1
                i += 1
                continue
            if ch in TERMINATORS:
                j = i + 1
                while j < n and text[j] in " \t":
                    j += 1
                boundary = j > i + 1 and j < n and _is_upper(text[j])
                if boundary and ch == "." and self._abbreviation_before(text, i):
                    boundary = False
                if boundary:
                    self._push(text, start, i + 1, ranges)
                    start = j
                    i = j
                    continue
            i += 1
        self._push(text, start, n, ranges)
        return ranges

    def _abbreviation_before(self, text: str, dot: int) -> bool:
        j = dot
        while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "."):
            j -= 1
        word = text[j:dot].strip(".").lower()
        return word in self.abbreviations

    @staticmethod
    def _push(text: str, start: int, end: int, ranges: list[tuple[int, int]]) -> None:
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            ranges.append((start, end))


def segment_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[tuple[int, int]]:
    return SentenceSegmenter(abbreviations)(text)
