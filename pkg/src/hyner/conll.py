"""CoNLL-format corpora: read, write, validate, count, split.

Files are UTF-8 with LF line endings, one ``token tag`` pair per line and
a blank line after every sentence. The writer emits exactly two
space-separated columns; the reader accepts any whitespace runs and two
or more columns, taking the first and last. Lines starting with ``#`` are
treated as comments.
"""
from __future__ import annotations

import random
from pathlib import Path
from typing import IO

from .errors import InputDataError
from .models import (
    IOB_TAGS,
    NE_TYPES,
    AnnotatedCorpus,
    CorpusStats,
    LabeledSentence,
    tokens_from_texts,
)

_TAGSET = frozenset(IOB_TAGS)


def write_conll(corpus: AnnotatedCorpus, sink: IO[str] | str | Path) -> None:
    close_after = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w", encoding="utf-8", newline="\n")
        close_after = True
    try:
        for line in corpus.provenance:
            sink.write(f"# {line}\n")
        for sentence in corpus.sentences:
            if not sentence.tokens:
                raise InputDataError("refusing to write an empty sentence")
            for token, tag in zip(sentence.tokens, sentence.tags):
                sink.write(f"{token.text} {tag}\n")
            sink.write("\n")
    finally:
        if close_after:
            sink.close()


def read_conll(source: IO[str] | str | Path) -> AnnotatedCorpus:
    close_after = False
    name = "<stream>"
    if isinstance(source, (str, Path)):
        name = str(source)
        try:
            source = open(source, "r", encoding="utf-8")
        except OSError as exc:
            raise InputDataError(f"cannot read corpus {source}: {exc}") from exc
        close_after = True
    corpus = AnnotatedCorpus()
    provenance: list[str] = []
    texts: list[str] = []
    tags: list[str] = []

    def flush() -> None:
        if texts:
            corpus.sentences.append(
                LabeledSentence(tokens_from_texts(texts), list(tags))
            )
            texts.clear()
            tags.clear()

    in_header = True
    try:
        for lineno, line in enumerate(source, start=1):
            line = line.rstrip("\r\n")
            # Comment lines are only recognized in the file header; later
            # on a leading "#" is a real token.
            if in_header and line.startswith("#"):
                provenance.append(line.lstrip("#").strip())
                continue
            if not line.strip():
                flush()
                continue
            in_header = False
            fields = line.split()
            if len(fields) < 2:
                raise InputDataError(f"{name}:{lineno}: expected token and tag, got {line!r}")
            token, tag = fields[0], fields[-1]
            if tag not in _TAGSET:
                raise InputDataError(f"{name}:{lineno}: unknown tag {tag!r}")
            texts.append(token)
            tags.append(tag)
        flush()
    finally:
        if close_after:
            source.close()
    corpus.provenance = tuple(provenance)
    return corpus


def validate_iob(corpus: AnnotatedCorpus) -> list[tuple[int, int, str]]:
    """IOB2 violations as (sentence index, token index, reason)."""
    violations: list[tuple[int, int, str]] = []
    for si, sentence in enumerate(corpus.sentences):
        prev = "O"
        for ti, tag in enumerate(sentence.tags):
            if tag not in _TAGSET:
                violations.append((si, ti, f"unknown tag {tag!r}"))
                prev = "O"
                continue
            if tag.startswith("I-"):
                netype = tag[2:]
                if prev not in (f"B-{netype}", f"I-{netype}"):
                    violations.append((si, ti, f"{tag} follows {prev}"))
            prev = tag
    return violations


def corpus_stats(corpus: AnnotatedCorpus) -> CorpusStats:
    stats = CorpusStats()
    stats.sentence_count = len(corpus.sentences)
    for sentence in corpus.sentences:
        stats.token_count += len(sentence.tokens)
        for tag in sentence.tags:
            if tag.startswith("B-"):
                stats.entity_counts[tag[2:]] += 1
    return stats


def split_corpus(
    corpus: AnnotatedCorpus, train_fraction: float, seed: int
) -> tuple[AnnotatedCorpus, AnnotatedCorpus]:
    """Seeded sentence-level shuffle split; same seed, same split."""
    if not 0 < train_fraction < 1:
        raise InputDataError(f"train fraction must be in (0, 1), got {train_fraction}")
    n = len(corpus.sentences)
    if n == 0:
        raise InputDataError("cannot split an empty corpus")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    k = int(train_fraction * n + 0.5)
    train = AnnotatedCorpus([corpus.sentences[i] for i in order[:k]], corpus.provenance)
    dev = AnnotatedCorpus([corpus.sentences[i] for i in order[k:]], corpus.provenance)
    return train, dev


def stats_lines(stats: CorpusStats) -> list[str]:
    lines = [f"sentences\t{stats.sentence_count}", f"tokens\t{stats.token_count}"]
    lines.extend(f"{t}\t{stats.entity_counts.get(t, 0)}" for t in ("LOC", "ORG", "PER"))
    return lines


def entity_total(stats: CorpusStats) -> int:
    return sum(stats.entity_counts.get(t, 0) for t in NE_TYPES)
