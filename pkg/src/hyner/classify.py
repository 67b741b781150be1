"""Rule-based PER/ORG/LOC classification of Wikidata-backed articles.

An article's type is decided from the subclass-of values of the first
instance-of target of its item. The taxonomy-value-to-type map ships as
a data file keyed by item ids, one row per value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .diagnostics import Diagnostics
from .errors import InputDataError
from .models import NE_TYPES, EntityRecord

DEFAULT_PRIORITY = ("PER", "ORG", "LOC")


@dataclass(frozen=True)
class TypeMapping:
    """Taxonomy item id -> NE type, plus the conflict-resolution order."""

    entries: Mapping[str, str]
    priority: tuple[str, ...] = DEFAULT_PRIORITY

    def __post_init__(self) -> None:
        if sorted(self.priority) != sorted(NE_TYPES):
            raise InputDataError(f"priority must permute {NE_TYPES}, got {self.priority}")

    def rank(self, netype: str) -> int:
        return self.priority.index(netype)


def lint_mapping_lines(lines: Iterable[str]) -> tuple[dict[str, str], list[str]]:
    """Parse mapping lines; return (entries, problems)."""
    entries: dict[str, str] = {}
    problems: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) < 2:
            problems.append(f"line {lineno}: expected id<TAB>type, got {stripped!r}")
            continue
        item_id, netype = parts[0].strip(), parts[1].strip()
        if not (item_id.startswith("Q") and item_id[1:].isdigit()):
            problems.append(f"line {lineno}: bad item id {item_id!r}")
            continue
        if netype not in NE_TYPES:
            problems.append(f"line {lineno}: unknown NE type {netype!r}")
            continue
        if item_id in entries:
            problems.append(f"line {lineno}: duplicate id {item_id} (rows must be unique)")
            continue
        entries[item_id] = netype
    return entries, problems


def load_type_mapping(
    path: str | Path | None = None, priority: tuple[str, ...] = DEFAULT_PRIORITY
) -> TypeMapping:
    """Load the mapping file; the packaged default is used when no path given."""
    if path is None:
        text = resources.files("hyner").joinpath("data", "type_mapping.tsv").read_text("utf-8")
        source = "packaged type_mapping.tsv"
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputDataError(f"cannot read mapping {path}: {exc}") from exc
        source = str(path)
    entries, problems = lint_mapping_lines(text.splitlines())
    if problems:
        raise InputDataError(f"{source}: " + "; ".join(problems))
    if not entries:
        raise InputDataError(f"{source}: mapping file has no entries")
    return TypeMapping(entries, priority)


def classify_entity(
    entity: EntityRecord,
    taxonomy: Mapping[str, EntityRecord],
    mapping: TypeMapping,
) -> str | None:
    """Type of one entity, or None when the rule does not fire.

    Only the first instance-of value is consulted; its subclass-of values
    vote through the mapping and the highest-priority collected type wins.
    """
    if not entity.instance_of:
        return None
    first = entity.instance_of[0]
    parent = taxonomy.get(first)
    if parent is None:
        return None
    collected = {mapping.entries[v] for v in parent.subclass_of if v in mapping.entries}
    if not collected:
        return None
    return min(collected, key=mapping.rank)


def classify_all(
    entities: Iterable[EntityRecord], mapping: TypeMapping
) -> dict[str, str]:
    """Classify every entity; the result holds only the classified ones.

    Two passes: the first indexes the taxonomy, the second classifies, so
    the input must be re-iterable (list, ``ArticleSource``-style wrapper...).
    """
    taxonomy = {e.id: e for e in entities}
    classes: dict[str, str] = {}
    for entity in taxonomy.values():
        netype = classify_entity(entity, taxonomy, mapping)
        if netype is not None:
            classes[entity.id] = netype
    return classes


def resolve_redirect(
    title: str,
    redirects: Mapping[str, str] | None,
    diagnostics: Diagnostics | None = None,
) -> str:
    """Follow at most one redirect hop; a hop landing on a redirect is counted."""
    if not redirects or title not in redirects:
        return title
    target = redirects[title]
    if target in redirects:
        if diagnostics is not None:
            diagnostics.incr("redirect_unresolved")
    return target


def classify_article(
    title: str,
    site_index: Mapping[str, str],
    classes: Mapping[str, str],
    redirects: Mapping[str, str] | None = None,
    diagnostics: Diagnostics | None = None,
) -> str | None:
    """Compose title -> item id -> type, resolving one redirect hop."""
    resolved = resolve_redirect(title, redirects, diagnostics)
    item = site_index.get(resolved)
    if item is None and resolved and resolved[0].islower():
        # Link targets are case-insensitive in their first letter.
        item = site_index.get(resolved[0].upper() + resolved[1:])
    if item is None:
        return None
    return classes.get(item)


@dataclass
class ClassifiedSite:
    """The classification artifact: typed items, their titles, disambig titles."""

    classes: dict[str, str] = field(default_factory=dict)
    site_index: dict[str, str] = field(default_factory=dict)
    disambig_titles: set[str] = field(default_factory=set)

    def write(self, path: str | Path) -> None:
        titles_by_item = {item: title for title, item in self.site_index.items()}
        with open(path, "w", encoding="utf-8") as sink:
            for item, netype in self.classes.items():
                sink.write(f"{item}\t{netype}\t{titles_by_item.get(item, '')}\n")
            for title in sorted(self.disambig_titles):
                sink.write(f"-\tDISAMBIG\t{title}\n")

    @classmethod
    def read(cls, path: str | Path) -> "ClassifiedSite":
        site = cls()
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise InputDataError(f"cannot read classification file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise InputDataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            item, netype, title = parts
            if netype == "DISAMBIG":
                site.disambig_titles.add(title)
                continue
            if netype not in NE_TYPES:
                raise InputDataError(f"{path}:{lineno}: unknown NE type {netype!r}")
            site.classes[item] = netype
            if title:
                site.site_index[title] = item
        return site


def build_classified_site(
    entities: Iterable[EntityRecord],
    mapping: TypeMapping,
    diagnostics: Diagnostics | None = None,
) -> ClassifiedSite:
    """One-stop classification pass used by the CLI."""
    pool = list(entities)
    site = ClassifiedSite()
    site.classes = classify_all(pool, mapping)
    site.site_index = build_site_index_from(pool, diagnostics)
    site.disambig_titles = {
        e.sitelink for e in pool if e.is_disambiguation and e.sitelink is not None
    }
    return site


def build_site_index_from(
    entities: Iterable[EntityRecord], diagnostics: Diagnostics | None = None
) -> dict[str, str]:
    from .dump_ingest import build_site_index

    return build_site_index(entities, diagnostics)
