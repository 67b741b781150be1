"""Core value types passed between pipeline stages."""
from __future__ import annotations

from dataclasses import dataclass, field

NE_TYPES = ("PER", "ORG", "LOC")

# Canonical tag order; "O" first so that score ties resolve to "O".
IOB_TAGS = ("O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG")

EXPLICIT = "explicit"
INFERRED = "inferred"


@dataclass(frozen=True)
class RawArticle:
    """One page from a Wikipedia dump, title-normalized."""

    title: str
    namespace: int
    redirect_target: str | None
    wikitext: str

    @property
    def is_redirect(self) -> bool:
        return self.redirect_target is not None


@dataclass(frozen=True)
class EntityRecord:
    """One Wikidata item reduced to what classification needs."""

    id: str
    instance_of: tuple[str, ...]
    subclass_of: tuple[str, ...]
    sitelink: str | None
    is_disambiguation: bool


@dataclass(frozen=True)
class Token:
    """A token with character offsets into its sentence text."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class CharLinkSpan:
    """A link occurrence as character offsets into an article's clean text."""

    start: int
    end: int
    target: str
    anchor: str


@dataclass
class LinkSpan:
    """A labeled token region; ``netype`` is None for coverage-only spans."""

    start_token: int
    end_token: int
    target: str
    anchor: str
    origin: str = EXPLICIT
    netype: str | None = None

    def overlaps(self, other: "LinkSpan") -> bool:
        return self.start_token <= other.end_token and other.start_token <= self.end_token


@dataclass
class LabeledSentence:
    tokens: list[Token]
    tags: list[str]
    source_article: str = ""

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.tags):
            raise ValueError("one tag per token required")

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


@dataclass
class AnnotatedCorpus:
    sentences: list[LabeledSentence] = field(default_factory=list)
    provenance: tuple[str, ...] = ()


@dataclass
class CorpusStats:
    sentence_count: int = 0
    token_count: int = 0
    entity_counts: dict[str, int] = field(default_factory=lambda: {t: 0 for t in NE_TYPES})

    def __add__(self, other: "CorpusStats") -> "CorpusStats":
        merged = {t: self.entity_counts.get(t, 0) + other.entity_counts.get(t, 0) for t in NE_TYPES}
        return CorpusStats(
            self.sentence_count + other.sentence_count,
            self.token_count + other.token_count,
            merged,
        )


def tokens_from_texts(texts: list[str]) -> list[Token]:
    """Rebuild offset-carrying tokens for text read back from CoNLL files."""
    tokens = []
    pos = 0
    for text in texts:
        tokens.append(Token(text, pos, pos + len(text)))
        pos += len(text) + 1
    return tokens
