"""Streaming readers for Wikipedia page dumps and Wikidata entity dumps.

Both readers work on decompressed streams; decompression is the caller's
job. Memory stays bounded by the largest single record: pages are parsed
with an incremental XML parser and the element tree is cleared after
every page, entities are read line by line.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as etree
from pathlib import Path
from typing import IO, Iterable, Iterator

from .diagnostics import Diagnostics
from .errors import DumpFormatError
from .models import EntityRecord, RawArticle
from .wikitext import normalize_title

INSTANCE_OF = "P31"
SUBCLASS_OF = "P279"

# Items whose presence among instance-of values marks a disambiguation page.
DEFAULT_DISAMBIGUATION_CLASSES = frozenset({"Q4167410"})


def _local_name(tag: str) -> str:
    return tag.rpartition("}")[2]


def stream_articles(
    source: IO[bytes] | str | Path,
    namespaces: Iterable[int] = (0,),
    max_record_bytes: int | None = None,
    diagnostics: Diagnostics | None = None,
) -> Iterator[RawArticle]:
    """Yield pages of the requested namespaces in dump order.

    Redirect pages come out with ``redirect_target`` set and an empty body.
    """
    diag = diagnostics if diagnostics is not None else Diagnostics()
    wanted = frozenset(namespaces)
    close_after = False
    if isinstance(source, (str, Path)):
        source = open(source, "rb")
        close_after = True
    try:
        title: str | None = None
        ns = 0
        redirect: str | None = None
        text = ""
        in_revision = False
        saw_page = False
        root: etree.Element | None = None
        try:
            for event, elem in etree.iterparse(source, events=("start", "end")):
                name = _local_name(elem.tag)
                if event == "start":
                    if root is None:
                        root = elem
                    if name == "page":
                        title, ns, redirect, text = None, 0, None, ""
                        in_revision = False
                        saw_page = True
                    elif name == "revision":
                        in_revision = True
                    continue
                if name == "title":
                    title = normalize_title(elem.text or "")
                elif name == "ns":
                    ns = int(elem.text or "0")
                elif name == "redirect":
                    redirect = normalize_title(elem.attrib.get("title", ""))
                elif name == "text" and in_revision:
                    text = elem.text or ""
                elif name == "revision":
                    in_revision = False
                elif name == "page":
                    if not title:
                        raise DumpFormatError("page without a title in dump")
                    if max_record_bytes is not None:
                        size = len(text.encode("utf-8"))
                        if size > max_record_bytes:
                            raise DumpFormatError(
                                f"record {title!r} exceeds the {max_record_bytes}-byte cap ({size})"
                            )
                    if ns in wanted:
                        body = "" if redirect is not None else text
                        yield RawArticle(title, ns, redirect, body)
                    else:
                        diag.incr("pages_outside_namespaces")
                    elem.clear()
                    if root is not None:
                        root.clear()
        except etree.ParseError as exc:
            position = getattr(exc, "position", None)
            if position is not None:
                where = f"line {position[0]}, column {position[1]}"
            else:
                where = "unknown offset"
            if "no element found" in str(exc):
                raise DumpFormatError(
                    f"truncated page dump: stream ended mid-record ({where})"
                ) from exc
            raise DumpFormatError(f"malformed page dump at {where}: {exc}") from exc
        if not saw_page:
            raise DumpFormatError("page dump contains no pages")
    finally:
        if close_after:
            source.close()


class ArticleSource:
    """Re-iterable article stream; each iteration re-reads the file."""

    def __init__(self, path: str | Path, namespaces: Iterable[int] = (0,)) -> None:
        self.path = Path(path)
        self.namespaces = tuple(namespaces)

    def __iter__(self) -> Iterator[RawArticle]:
        return stream_articles(self.path, self.namespaces)


def _claim_targets(entity: dict, prop: str) -> tuple[str, ...]:
    values: list[str] = []
    for claim in entity.get("claims", {}).get(prop, []):
        snak = claim.get("mainsnak", {})
        value = snak.get("datavalue", {}).get("value")
        if isinstance(value, dict) and "id" in value:
            target = value["id"]
            if target not in values:
                values.append(target)
    return tuple(values)


def stream_entities(
    source: IO[str] | str | Path,
    wiki_code: str = "hywiki",
    disambiguation_classes: frozenset[str] = DEFAULT_DISAMBIGUATION_CLASSES,
    max_record_bytes: int | None = None,
    diagnostics: Diagnostics | None = None,
) -> Iterator[EntityRecord]:
    """Yield one record per parseable entity line, in dump order.

    Unparseable lines are skipped and counted; a dump where nothing parses
    is an error.
    """
    diag = diagnostics if diagnostics is not None else Diagnostics()
    close_after = False
    if isinstance(source, (str, Path)):
        source = open(source, "r", encoding="utf-8")
        close_after = True
    parsed = 0
    try:
        for line in source:
            stripped = line.strip()
            if stripped in ("", "[", "]"):
                continue
            stripped = stripped.rstrip(",")
            if max_record_bytes is not None and len(stripped.encode("utf-8")) > max_record_bytes:
                raise DumpFormatError(
                    f"entity record exceeds the {max_record_bytes}-byte cap"
                )
            try:
                entity = json.loads(stripped)
                entity_id = entity["id"]
            except (json.JSONDecodeError, KeyError, TypeError):
                diag.incr("entity_lines_skipped")
                continue
            instance_of = _claim_targets(entity, INSTANCE_OF)
            subclass_of = _claim_targets(entity, SUBCLASS_OF)
            sitelinks = entity.get("sitelinks", {})
            sitelink = None
            if isinstance(sitelinks, dict) and wiki_code in sitelinks:
                sitelink = normalize_title(sitelinks[wiki_code].get("title", "")) or None
            yield EntityRecord(
                id=entity_id,
                instance_of=instance_of,
                subclass_of=subclass_of,
                sitelink=sitelink,
                is_disambiguation=any(v in disambiguation_classes for v in instance_of),
            )
            parsed += 1
    finally:
        if close_after:
            source.close()
    if parsed == 0:
        raise DumpFormatError("entity dump contains no parseable records")


def build_site_index(
    entities: Iterable[EntityRecord], diagnostics: Diagnostics | None = None
) -> dict[str, str]:
    """Map article title to entity id; later duplicates win and are counted."""
    diag = diagnostics if diagnostics is not None else Diagnostics()
    index: dict[str, str] = {}
    for entity in entities:
        if entity.sitelink is None:
            continue
        if entity.sitelink in index:
            diag.incr("duplicate_sitelink_titles")
        index[entity.sitelink] = entity.id
    return index
