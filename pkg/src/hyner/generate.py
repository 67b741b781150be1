"""Turn article wikitext into selected, labeled, boundary-adjusted IOB sentences.

Stages per article: parse wikitext, segment sentences, tokenize, map link
character ranges to token spans and type them, infer extra spans from the
alias dictionary, adjust span boundaries at parentheses and commas, keep
sentences that pass the selection rule, emit IOB2 tags.

Residue cut off a span during boundary adjustment stays as an untyped
coverage span: those words did carry an outgoing link, so they must not
fail the selection rule's capitalized-word check.
"""
from __future__ import annotations

from typing import Iterable, Mapping

from . import __version__ as _version
from .aliases import AliasDictionary, lookup_longest
from .classify import classify_article
from .config import GeneratorConfig
from .diagnostics import Diagnostics
from .errors import InvariantError
from .models import (
    EXPLICIT,
    INFERRED,
    NE_TYPES,
    AnnotatedCorpus,
    CharLinkSpan,
    LabeledSentence,
    LinkSpan,
    RawArticle,
    Token,
)
from .segment import SentenceSegmenter, Tokenizer, TokenizerRules, is_capitalized
from .wikitext import parse_wikitext


def spans_to_tokens(
    tokens: list[Token],
    char_spans: Iterable[CharLinkSpan],
    diagnostics: Diagnostics | None = None,
) -> list[LinkSpan]:
    """Project character spans onto token indices, snapping outward."""
    diag = diagnostics if diagnostics is not None else Diagnostics()
    spans: list[LinkSpan] = []
    starts = {t.start for t in tokens}
    ends = {t.end for t in tokens}
    for span in char_spans:
        covered = [
            i for i, t in enumerate(tokens) if t.start < span.end and t.end > span.start
        ]
        if not covered:
            diag.incr("spans_without_tokens")
            continue
        if span.start not in starts or span.end not in ends:
            diag.incr("spans_snapped")
        spans.append(LinkSpan(covered[0], covered[-1], span.target, span.anchor, EXPLICIT))
    return spans


def _drop_overlaps(spans: list[LinkSpan], diag: Diagnostics) -> list[LinkSpan]:
    """Keep the first of any explicit spans that collide after snapping."""
    kept: list[LinkSpan] = []
    for span in sorted(spans, key=lambda s: (s.start_token, -s.end_token)):
        if kept and span.start_token <= kept[-1].end_token:
            diag.incr("spans_overlap_dropped")
            continue
        kept.append(span)
    return kept


def label_links(
    spans: list[LinkSpan],
    classes: Mapping[str, str],
    site_index: Mapping[str, str],
    redirects: Mapping[str, str] | None = None,
    diagnostics: Diagnostics | None = None,
) -> list[LinkSpan]:
    """Set each span's type from its target article; unknown targets stay None."""
    for span in spans:
        span.netype = classify_article(span.target, site_index, classes, redirects, diagnostics)
    return spans


def infer_alias_links(
    tokens: list[Token],
    spans: list[LinkSpan],
    dictionary: AliasDictionary,
) -> list[LinkSpan]:
    """Longest-match alias spans over positions free of explicit spans."""
    inferred: list[LinkSpan] = []
    if not tokens or not dictionary.entries:
        return inferred
    occupied = sorted(spans, key=lambda s: s.start_token)
    next_span = 0
    i = 0
    n = len(tokens)
    while i < n:
        while next_span < len(occupied) and occupied[next_span].end_token < i:
            next_span += 1
        if next_span < len(occupied) and occupied[next_span].start_token <= i:
            i = occupied[next_span].end_token + 1
            continue
        gap_end = occupied[next_span].start_token if next_span < len(occupied) else n
        hit = lookup_longest(dictionary, tokens, i, limit=gap_end - i)
        if hit is None:
            i += 1
            continue
        entry, length = hit
        anchor = " ".join(t.text for t in tokens[i : i + length])
        inferred.append(
            LinkSpan(i, i + length - 1, entry.target, anchor, INFERRED, entry.netype)
        )
        i += length
    return inferred


def adjust_boundaries(
    span: LinkSpan,
    tokens: list[Token],
    dictionary: AliasDictionary,
    diagnostics: Diagnostics | None = None,
) -> list[LinkSpan]:
    """Trim a typed span at parentheses and commas.

    Returns the replacement spans; trimmed-off tokens come back as untyped
    coverage spans. A span whose label empties out is dropped (counted).
    """
    diag = diagnostics if diagnostics is not None else Diagnostics()
    if span.netype not in NE_TYPES:
        raise InvariantError(f"adjust_boundaries needs a typed span, got {span.netype!r}")

    def residue(start: int, end: int) -> LinkSpan:
        return LinkSpan(start, end, span.target, span.anchor, span.origin, None)

    def texts(a: int, b: int) -> list[str]:
        return [t.text for t in tokens[a : b + 1]]

    out: list[LinkSpan] = []
    start, end = span.start_token, span.end_token

    paren = next((i for i in range(start, end + 1) if tokens[i].text == "("), None)
    if paren is not None:
        if paren > start:
            out.append(residue(paren, end))
            end = paren - 1
        else:
            diag.incr("spans_dropped_empty")
            return [residue(start, end)]

    commas = [i for i in range(start, end + 1) if tokens[i].text == ","]
    if not commas:
        out.insert(0, LinkSpan(start, end, span.target, span.anchor, span.origin, span.netype))
        return out

    segments: list[tuple[int, int]] = []
    seg_start = start
    for c in commas + [end + 1]:
        if c > seg_start:
            segments.append((seg_start, c - 1))
        seg_start = c + 1
    complete = len(segments) == len(commas) + 1

    matched: list[tuple[int, int, str, str]] = []
    if complete:
        for a, b in segments:
            hit = lookup_longest(dictionary, tokens, a, limit=b - a + 1) if dictionary.entries else None
            if hit is None or hit[1] != b - a + 1:
                matched = []
                break
            matched.append((a, b, hit[0].target, hit[0].netype))

    if matched:
        for a, b, target, netype in matched:
            out.insert(0, LinkSpan(a, b, target, " ".join(texts(a, b)), span.origin, netype))
        out.sort(key=lambda s: s.start_token)
        return out

    cut = commas[0]
    if cut == start:
        diag.incr("spans_dropped_empty")
        out.insert(0, residue(start, end))
        out.sort(key=lambda s: s.start_token)
        return out
    out.insert(0, LinkSpan(start, cut - 1, span.target, span.anchor, span.origin, span.netype))
    out.append(residue(cut, end))
    merged = _merge_residues(out)
    return merged


def _merge_residues(spans: list[LinkSpan]) -> list[LinkSpan]:
    spans = sorted(spans, key=lambda s: s.start_token)
    merged: list[LinkSpan] = []
    for s in spans:
        if (
            merged
            and merged[-1].netype is None
            and s.netype is None
            and merged[-1].end_token + 1 >= s.start_token
        ):
            merged[-1].end_token = max(merged[-1].end_token, s.end_token)
        else:
            merged.append(s)
    return merged


def select_sentence(
    tokens: list[Token],
    spans: list[LinkSpan],
    config: GeneratorConfig | None = None,
) -> bool:
    """At least one typed span, and every capitalized word linked or exempt."""
    config = config or GeneratorConfig()
    if not any(s.netype in NE_TYPES for s in spans):
        return False
    covered = set()
    for s in spans:
        covered.update(range(s.start_token, s.end_token + 1))
    for i, token in enumerate(tokens):
        if not is_capitalized(token.text):
            continue
        if i in covered:
            continue
        if i == 0 and config.sentence_initial_exemption:
            continue
        if token.text in config.stoplist:
            continue
        return False
    return True


def emit_iob(
    tokens: list[Token], spans: list[LinkSpan], source_article: str = ""
) -> LabeledSentence:
    """IOB2 tags from non-overlapping typed spans; untyped spans are ignored."""
    tags = ["O"] * len(tokens)
    typed = sorted((s for s in spans if s.netype in NE_TYPES), key=lambda s: s.start_token)
    last_end = -1
    for span in typed:
        if span.start_token <= last_end:
            raise InvariantError(
                f"overlapping spans at token {span.start_token} in {source_article!r}"
            )
        if not 0 <= span.start_token <= span.end_token < len(tokens):
            raise InvariantError(f"span out of range in {source_article!r}")
        tags[span.start_token] = f"B-{span.netype}"
        for i in range(span.start_token + 1, span.end_token + 1):
            tags[i] = f"I-{span.netype}"
        last_end = span.end_token
    return LabeledSentence(list(tokens), tags, source_article)


def generate_article(
    article: RawArticle,
    classes: Mapping[str, str],
    site_index: Mapping[str, str],
    dictionary: AliasDictionary,
    config: GeneratorConfig,
    redirects: Mapping[str, str] | None = None,
    tokenizer: Tokenizer | None = None,
    segmenter: SentenceSegmenter | None = None,
    diagnostics: Diagnostics | None = None,
) -> list[LabeledSentence]:
    """All selected, labeled sentences of one article."""
    diag = diagnostics if diagnostics is not None else Diagnostics()
    tokenizer = tokenizer or Tokenizer(TokenizerRules.from_text(config.rules_text()))
    segmenter = segmenter or SentenceSegmenter.from_text(config.abbrev_text())

    text, char_spans = parse_wikitext(article.wikitext, diag)
    sentences: list[LabeledSentence] = []
    for s_start, s_end in segmenter(text):
        diag.incr("sentences_seen")
        sentence_text = text[s_start:s_end]
        tokens = tokenizer(sentence_text)
        if not tokens:
            continue
        local = []
        for span in char_spans:
            if span.end <= s_start or span.start >= s_end:
                continue
            if span.start < s_start or span.end > s_end:
                diag.incr("spans_cross_sentence")
                continue
            local.append(
                CharLinkSpan(span.start - s_start, span.end - s_start, span.target, span.anchor)
            )
        spans = spans_to_tokens(tokens, local, diag)
        spans = _drop_overlaps(spans, diag)
        label_links(spans, classes, site_index, redirects, diag)
        spans.extend(infer_alias_links(tokens, spans, dictionary))
        adjusted: list[LinkSpan] = []
        for span in sorted(spans, key=lambda s: s.start_token):
            if span.netype in NE_TYPES:
                adjusted.extend(adjust_boundaries(span, tokens, dictionary, diag))
            else:
                adjusted.append(span)
        if not select_sentence(tokens, adjusted, config):
            if any(s.netype in NE_TYPES for s in adjusted):
                diag.incr("sentences_rejected_uncovered")
            else:
                diag.incr("sentences_rejected_no_entity")
            continue
        diag.incr("sentences_selected")
        sentences.append(emit_iob(tokens, adjusted, article.title))
    return sentences


def generate_corpus(
    articles: Iterable[RawArticle],
    classes: Mapping[str, str],
    site_index: Mapping[str, str],
    dictionary: AliasDictionary,
    config: GeneratorConfig | None = None,
    redirects: Mapping[str, str] | None = None,
    disambig_titles: Iterable[str] = (),
    diagnostics: Diagnostics | None = None,
    jobs: int = 1,
) -> AnnotatedCorpus:
    """Concatenate per-article results over the dump, in dump order."""
    config = config or GeneratorConfig()
    diag = diagnostics if diagnostics is not None else Diagnostics()
    skip_titles = set(disambig_titles)
    tokenizer = Tokenizer(TokenizerRules.from_text(config.rules_text()))
    segmenter = SentenceSegmenter.from_text(config.abbrev_text())

    def wanted(article: RawArticle) -> bool:
        diag.incr("articles_seen")
        if article.is_redirect:
            diag.incr("articles_skipped_redirect")
            return False
        if article.title in skip_titles:
            diag.incr("articles_skipped_disambiguation")
            return False
        return True

    corpus = AnnotatedCorpus()
    if config.emit_provenance:
        corpus.provenance = (
            f"generated-by hyner {_version}",
            f"config-digest {config.digest()}",
        )
    if jobs > 1:
        corpus.sentences = _generate_parallel(
            [a for a in articles if wanted(a)],
            classes, site_index, dictionary, config, redirects, jobs, diag,
        )
        return corpus
    for article in articles:
        if not wanted(article):
            continue
        corpus.sentences.extend(
            generate_article(
                article, classes, site_index, dictionary, config,
                redirects, tokenizer, segmenter, diag,
            )
        )
    return corpus


_POOL_STATE: dict = {}


def _pool_init(classes, site_index, dictionary, config, redirects) -> None:
    _POOL_STATE["args"] = (classes, site_index, dictionary, config, redirects)


def _pool_work(article: RawArticle) -> list[LabeledSentence]:
    classes, site_index, dictionary, config, redirects = _POOL_STATE["args"]
    return generate_article(article, classes, site_index, dictionary, config, redirects)


def _generate_parallel(
    articles: list[RawArticle],
    classes, site_index, dictionary, config, redirects,
    jobs: int,
    diag: Diagnostics,
) -> list[LabeledSentence]:
    import multiprocessing

    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(
        jobs, initializer=_pool_init,
        initargs=(classes, site_index, dictionary, config, redirects),
    ) as pool:
        sentences: list[LabeledSentence] = []
        for chunk in pool.imap(_pool_work, articles, chunksize=8):
            diag.incr("sentences_selected", len(chunk))
            sentences.extend(chunk)
        return sentences
