"""Wikitext to clean text, keeping internal links as character spans.

Handles the constructs that matter for corpus extraction: comments,
ref/nowiki-style extension tags, templates, tables, headings, list
markers, bold/italic quoting, internal and external links, file and
category inclusions. Template expansion and parser functions are out of
scope; balanced constructs are removed, unbalanced ones cost the
enclosing paragraph.
"""
from __future__ import annotations

import html
import re

from .diagnostics import Diagnostics
from .models import CharLinkSpan

# Namespace prefixes whose links are dropped wholesale (with nested markup).
DROP_LINK_PREFIXES = frozenset(
    {"file", "image", "category", "պատկեր", "կատեգորիա", "media"}
)

# Letters MediaWiki blends into the preceding link's anchor text.
LINKTRAIL_RE = re.compile(r"[a-zա-և]+")

_COMMENT_RE = re.compile(r"<!--.*?(-->|\Z)", re.DOTALL)
_DROP_TAG_RE = re.compile(
    r"<(ref|nowiki|math|gallery|timeline|source|syntaxhighlight|pre|code)\b[^>]*?/>"
    r"|<(ref|nowiki|math|gallery|timeline|source|syntaxhighlight|pre|code)\b[^>]*>.*?"
    r"(</\2\s*>|\Z)",
    re.DOTALL | re.IGNORECASE,
)
_TEMPLATE_RE = re.compile(r"\{\{[^{}]*\}\}", re.DOTALL)
_TABLE_RE = re.compile(r"\{\|(?:(?!\{\||\|\}).)*\|\}", re.DOTALL)
_HTML_TAG_RE = re.compile(r"</?[A-Za-z][A-Za-z0-9]*(\s[^<>]*)?/?>")
_HEADING_RE = re.compile(r"^\s*=+.*=+\s*$")
_LIST_PREFIX_RE = re.compile(r"^[*#:;]+\s*")
_EMPTY_PARENS_RE = re.compile(r"\(\s*\)")
_EXTERNAL_LINK_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]+(\s+(?P<label>[^\]]*))?\]")


def normalize_title(raw: str) -> str:
    """Canonical article-title form: underscores to spaces, runs collapsed."""
    title = raw.replace("_", " ")
    title = re.sub(r"\s+", " ", title).strip()
    return title


def _strip_balanced(text: str, pattern: re.Pattern[str]) -> str:
    prev = None
    while prev != text:
        prev = text
        text = pattern.sub("", text)
    return text


def _link_prefix(target: str) -> str | None:
    head, sep, _ = target.partition(":")
    if not sep:
        return None
    return head.strip().lower()


class _Emitter:
    """Builds clean output text while recording link spans."""

    def __init__(self) -> None:
        self.parts: list[str] = []
        self.length = 0
        self.spans: list[CharLinkSpan] = []
        self._pending_space = False

    def text(self, chunk: str) -> None:
        for ch in chunk:
            if ch.isspace():
                self._pending_space = self.length > 0
                continue
            if self._pending_space:
                self.parts.append(" ")
                self.length += 1
                self._pending_space = False
            self.parts.append(ch)
            self.length += 1

    def link(self, anchor: str, target: str) -> None:
        # The anchor surfaces verbatim; spans must cover exactly its text.
        if not anchor:
            return
        if self._pending_space:
            self.parts.append(" ")
            self.length += 1
            self._pending_space = False
        start = self.length
        self.parts.append(anchor)
        self.length += len(anchor)
        self.spans.append(CharLinkSpan(start, self.length, target, anchor))

    def result(self) -> tuple[str, list[CharLinkSpan]]:
        return "".join(self.parts), self.spans


def _find_link_end(text: str, start: int) -> int:
    """Index just past the ``]]`` matching the ``[[`` at ``start``; -1 if none."""
    depth = 0
    i = start
    n = len(text)
    while i < n - 1:
        pair = text[i : i + 2]
        if pair == "[[":
            depth += 1
            i += 2
        elif pair == "]]":
            depth -= 1
            i += 2
            if depth == 0:
                return i
        else:
            i += 1
    return -1


def _clean_anchor(raw: str) -> str:
    text = re.sub(r"'{2,}", "", raw)
    text = _HTML_TAG_RE.sub("", text)
    return re.sub(r"\s+", " ", text).strip()


def _pipe_trick(target: str) -> str:
    # [[A (b)|]] and [[A, b|]] display just "A".
    anchor = re.sub(r"\s*\([^()]*\)\s*$", "", target)
    anchor = anchor.split(",")[0].strip()
    return anchor or target


def _emit_paragraph(par: str, emitter: _Emitter) -> None:
    i = 0
    n = len(par)
    while i < n:
        ch = par[i]
        if par.startswith("[[", i):
            end = _find_link_end(par, i)
            if end == -1:
                emitter.text(ch)
                i += 1
                continue
            inner = par[i + 2 : end - 2]
            target_part, sep, anchor_part = inner.partition("|")
            target = normalize_title(target_part.split("#")[0])
            prefix = _link_prefix(target_part)
            if prefix in DROP_LINK_PREFIXES:
                i = end
                continue
            if not target:
                # Section self-link: keep the display text, no span.
                emitter.text(_clean_anchor(anchor_part))
                i = end
                continue
            if sep:
                anchor = _clean_anchor(anchor_part) or _pipe_trick(target)
            else:
                anchor = _clean_anchor(target_part)
            trail = LINKTRAIL_RE.match(par, end)
            if trail:
                anchor += trail.group(0)
                end = trail.end()
            emitter.link(anchor, target)
            i = end
            continue
        if ch == "[":
            m = _EXTERNAL_LINK_RE.match(par, i)
            if m:
                label = m.group("label")
                if label:
                    emitter.text(label)
                i = m.end()
                continue
        if ch == "<":
            m = _HTML_TAG_RE.match(par, i)
            if m:
                i = m.end()
                continue
        if ch == "'" and par.startswith("''", i):
            j = i
            while j < n and par[j] == "'":
                j += 1
            i = j
            continue
        emitter.text(ch)
        i += 1


def parse_wikitext(
    raw: str, diagnostics: Diagnostics | None = None
) -> tuple[str, list[CharLinkSpan]]:
    """Return (clean text, link spans into it); paragraphs joined by newlines."""
    diag = diagnostics if diagnostics is not None else Diagnostics()
    text = _COMMENT_RE.sub("", raw)
    text = _DROP_TAG_RE.sub(" ", text)
    text = html.unescape(text)
    text = _strip_balanced(text, _TEMPLATE_RE)
    text = _strip_balanced(text, _TABLE_RE)
    text = _EMPTY_PARENS_RE.sub("", text)

    pieces: list[str] = []
    spans: list[CharLinkSpan] = []
    offset = 0
    for block in re.split(r"\n\s*\n", text):
        for par in _paragraph_units(block):
            if "{{" in par or "}}" in par or "{|" in par or "|}" in par:
                diag.incr("paragraphs_discarded")
                continue
            emitter = _Emitter()
            _emit_paragraph(par, emitter)
            clean, par_spans = emitter.result()
            if not clean:
                continue
            if pieces:
                offset += 1  # joining newline
            pieces.append(clean)
            spans.extend(
                CharLinkSpan(s.start + offset, s.end + offset, s.target, s.anchor)
                for s in par_spans
            )
            offset += len(clean)
    return "\n".join(pieces), spans


def _paragraph_units(block: str) -> list[str]:
    """Split a blank-line block into units: joined prose plus one per list item."""
    units: list[str] = []
    prose: list[str] = []
    for line in block.splitlines():
        stripped = line.strip()
        if not stripped or _HEADING_RE.match(stripped):
            continue
        if stripped[0] in "|!":  # stray table rows
            continue
        m = _LIST_PREFIX_RE.match(stripped)
        if m:
            units.append(stripped[m.end() :])
        else:
            prose.append(stripped)
    if prose:
        units.insert(0, " ".join(prose))
    return units


def extract_links(raw: str, diagnostics: Diagnostics | None = None) -> list[tuple[str, str]]:
    """All (anchor text, target title) pairs of one article body."""
    _, spans = parse_wikitext(raw, diagnostics)
    return [(s.anchor, s.target) for s in spans]
