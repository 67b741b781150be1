"""Per-article alias lists used to infer unlinked entity mentions.

An article's aliases are its own title, the titles of disambiguation
pages linking to it, the titles of redirects to it, and the anchor texts
of links targeting it. Only articles classified PER/ORG/LOC get aliases.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .classify import classify_article, resolve_redirect
from .config import GeneratorConfig
from .diagnostics import Diagnostics
from .errors import InputDataError
from .models import NE_TYPES, RawArticle, Token
from .segment import Tokenizer, TokenizerRules, is_capitalized
from .wikitext import extract_links

SOURCES = ("title", "redirect_title", "disambiguation_title", "anchor_text")
_SOURCE_RANK = {s: i for i, s in enumerate(SOURCES)}
_QUALIFIER_RE = re.compile(r"\s*\([^()]*\)\s*$")


@dataclass(frozen=True)
class AliasEntry:
    alias: str
    target: str
    netype: str
    source: str
    frequency: int


@dataclass
class AliasDictionary:
    """Alias surface -> entry, plus a token-sequence index for matching."""

    entries: dict[str, AliasEntry] = field(default_factory=dict)
    config: GeneratorConfig = field(default_factory=GeneratorConfig)
    _token_index: dict[tuple[str, ...], AliasEntry] = field(default_factory=dict, repr=False)
    _max_tokens: int = 0

    def index_with(self, tokenizer: Tokenizer, diagnostics: Diagnostics | None = None) -> None:
        self._token_index = {}
        self._max_tokens = 0
        for alias in sorted(self.entries):
            entry = self.entries[alias]
            key = tuple(t.text for t in tokenizer(alias))
            if not key:
                continue
            other = self._token_index.get(key)
            if other is not None and other.alias != entry.alias:
                if diagnostics is not None:
                    diagnostics.incr("alias_token_collisions")
                if (other.frequency, entry.alias) >= (entry.frequency, other.alias):
                    continue
            self._token_index[key] = entry
            self._max_tokens = max(self._max_tokens, len(key))

    def __len__(self) -> int:
        return len(self.entries)


def collect_link_anchors(
    articles: Iterable[RawArticle], diagnostics: Diagnostics | None = None
) -> Counter:
    """Multiset of (anchor text, target title) over every explicit link."""
    anchors: Counter = Counter()
    for article in articles:
        if article.is_redirect:
            continue
        for anchor, target in extract_links(article.wikitext, diagnostics):
            anchors[(anchor, target)] += 1
    return anchors


def _alias_ok(alias: str, config: GeneratorConfig) -> bool:
    if len(alias) < config.min_alias_length:
        return False
    if config.require_capitalized_alias and not is_capitalized(alias):
        return False
    return True


def build_dictionary(
    anchors: Counter,
    articles: Iterable[RawArticle],
    classes: Mapping[str, str],
    site_index: Mapping[str, str],
    disambig_titles: Iterable[str] = (),
    config: GeneratorConfig | None = None,
    diagnostics: Diagnostics | None = None,
) -> AliasDictionary:
    config = config or GeneratorConfig()
    diag = diagnostics if diagnostics is not None else Diagnostics()
    disambig = set(disambig_titles)

    redirects: dict[str, str] = {}
    disambig_links: dict[str, list[str]] = {}
    for article in articles:
        if article.is_redirect:
            redirects[article.title] = article.redirect_target or ""
        elif article.title in disambig:
            disambig_links[article.title] = [t for _, t in extract_links(article.wikitext)]

    def classified(title: str) -> tuple[str, str] | None:
        resolved = resolve_redirect(title, redirects, diag)
        netype = classify_article(resolved, site_index, classes, None, diag)
        if netype is None:
            return None
        return resolved, netype

    # (alias, target) -> [frequency, best source rank]
    tallies: dict[tuple[str, str], list[int]] = {}

    def add(alias: str, target: str, source: str, count: int = 1) -> None:
        alias = alias.strip()
        if not alias or not _alias_ok(alias, config):
            return
        cell = tallies.setdefault((alias, target), [0, _SOURCE_RANK[source]])
        cell[0] += count
        cell[1] = min(cell[1], _SOURCE_RANK[source])

    for title in sorted(site_index):
        hit = classified(title)
        if hit is not None and title not in disambig:
            add(title, hit[0], "title")

    if config.include_redirect_aliases:
        for rtitle in sorted(redirects):
            hit = classified(redirects[rtitle])
            if hit is not None:
                add(rtitle, hit[0], "redirect_title")

    for dtitle in sorted(disambig_links):
        stripped = _QUALIFIER_RE.sub("", dtitle)
        for target in disambig_links[dtitle]:
            hit = classified(target)
            if hit is None:
                continue
            add(dtitle, hit[0], "disambiguation_title")
            if stripped and stripped != dtitle:
                add(stripped, hit[0], "disambiguation_title")

    for (anchor, target), count in sorted(anchors.items()):
        hit = classified(target)
        if hit is not None:
            add(anchor, hit[0], "anchor_text", count)

    # Competing targets: highest frequency wins, exact ties drop the alias.
    by_alias: dict[str, list[tuple[str, list[int]]]] = {}
    for (alias, target), cell in tallies.items():
        by_alias.setdefault(alias, []).append((target, cell))

    dictionary = AliasDictionary(config=config)
    for alias in sorted(by_alias):
        candidates = sorted(by_alias[alias], key=lambda tc: (-tc[1][0], tc[0]))
        if len(candidates) > 1 and candidates[0][1][0] == candidates[1][1][0]:
            diag.incr("alias_ties_dropped")
            continue
        if len(candidates) > 1:
            diag.incr("alias_conflicts_resolved")
        target, (freq, source_rank) = candidates[0]
        netype = classify_article(target, site_index, classes)
        assert netype in NE_TYPES
        dictionary.entries[alias] = AliasEntry(alias, target, netype, SOURCES[source_rank], freq)

    dictionary.index_with(Tokenizer(TokenizerRules.from_text(config.rules_text())), diag)
    return dictionary


def _match_tokens(entry_key: tuple[str, ...], window: list[str], suffixes: tuple[str, ...]) -> bool:
    if entry_key == tuple(window):
        return True
    if not suffixes:
        return False
    for alias_tok, tok in zip(entry_key, window):
        if alias_tok == tok:
            continue
        if any(tok == alias_tok + s for s in suffixes):
            continue
        return False
    return True


def lookup_longest(
    dictionary: AliasDictionary, tokens: list[Token] | list[str], start: int, limit: int | None = None
) -> tuple[AliasEntry, int] | None:
    """Longest alias matching the token span at ``start``; None if nothing does."""
    texts = [t.text if isinstance(t, Token) else t for t in tokens]
    if not 0 <= start < len(texts):
        raise IndexError(f"start {start} out of range")
    end = len(texts) if limit is None else min(len(texts), start + limit)
    longest = min(dictionary._max_tokens, end - start)
    suffixes = dictionary.config.strip_suffixes
    for k in range(longest, 0, -1):
        window = texts[start : start + k]
        entry = dictionary._token_index.get(tuple(window))
        if entry is not None:
            return entry, k
        if suffixes:
            for key, candidate in dictionary._token_index.items():
                if len(key) == k and _match_tokens(key, window, suffixes):
                    return candidate, k
    return None


def write_dictionary(dictionary: AliasDictionary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as sink:
        for alias in sorted(dictionary.entries):
            e = dictionary.entries[alias]
            sink.write(f"{e.alias}\t{e.target}\t{e.netype}\t{e.source}\t{e.frequency}\n")


def read_dictionary(path: str | Path, config: GeneratorConfig | None = None) -> AliasDictionary:
    config = config or GeneratorConfig()
    dictionary = AliasDictionary(config=config)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputDataError(f"cannot read alias dictionary {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise InputDataError(f"{path}:{lineno}: expected 5 tab-separated fields")
        alias, target, netype, source, freq = parts
        if netype not in NE_TYPES:
            raise InputDataError(f"{path}:{lineno}: unknown NE type {netype!r}")
        if source not in SOURCES:
            raise InputDataError(f"{path}:{lineno}: unknown source {source!r}")
        try:
            frequency = int(freq)
        except ValueError as exc:
            raise InputDataError(f"{path}:{lineno}: bad frequency {freq!r}") from exc
        dictionary.entries[alias] = AliasEntry(alias, target, netype, source, frequency)
    dictionary.index_with(Tokenizer(TokenizerRules.from_text(config.rules_text())))
    return dictionary
