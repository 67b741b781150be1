"""Pipeline configuration: key=value files, defaults, stable digests."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .errors import InputDataError

_BOOL_KEYS = {
    "sentence_initial_exemption",
    "require_capitalized_alias",
    "include_redirect_aliases",
    "emit_provenance",
}
_INT_KEYS = {"min_alias_length"}
_PATH_KEYS = {"stoplist", "tokenizer_rules", "abbreviations"}
_LIST_KEYS = {"strip_suffixes"}


def _package_data(name: str) -> str:
    return resources.files("hyner").joinpath("data", name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for alias building, sentence selection and tokenization."""

    min_alias_length: int = 2
    require_capitalized_alias: bool = True
    include_redirect_aliases: bool = True
    sentence_initial_exemption: bool = True
    emit_provenance: bool = True
    strip_suffixes: tuple[str, ...] = ()
    stoplist: frozenset[str] = frozenset()
    # None means "use the table shipped with the package"
    tokenizer_rules_text: str | None = None
    abbreviations_text: str | None = None
    sources: tuple[str, ...] = field(default_factory=tuple)

    def digest(self) -> str:
        h = hashlib.sha256()
        for f in sorted(self.canonical_items()):
            h.update(f.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()[:12]

    def canonical_items(self) -> list[str]:
        items = [
            f"min_alias_length={self.min_alias_length}",
            f"require_capitalized_alias={str(self.require_capitalized_alias).lower()}",
            f"include_redirect_aliases={str(self.include_redirect_aliases).lower()}",
            f"sentence_initial_exemption={str(self.sentence_initial_exemption).lower()}",
            f"emit_provenance={str(self.emit_provenance).lower()}",
            "strip_suffixes=" + ",".join(self.strip_suffixes),
            "stoplist=" + ",".join(sorted(self.stoplist)),
            "tokenizer_rules=" + (self.tokenizer_rules_text or ""),
            "abbreviations=" + (self.abbreviations_text or ""),
        ]
        return items

    def rules_text(self) -> str:
        if self.tokenizer_rules_text is not None:
            return self.tokenizer_rules_text
        return _package_data("tokenizer_rules.txt")

    def abbrev_text(self) -> str:
        if self.abbreviations_text is not None:
            return self.abbreviations_text
        return _package_data("abbreviations.txt")


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise InputDataError(f"config key {key!r}: expected a boolean, got {raw!r}")


def load_config(path: str | Path) -> GeneratorConfig:
    """Read a key=value config file; relative paths resolve against the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputDataError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    cfg = GeneratorConfig(sources=(str(path),))
    updates: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputDataError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in _BOOL_KEYS:
            updates[key] = _parse_bool(raw, key)
        elif key in _INT_KEYS:
            try:
                updates[key] = int(raw)
            except ValueError as exc:
                raise InputDataError(f"{path}:{lineno}: {key} must be an integer") from exc
        elif key in _LIST_KEYS:
            updates[key] = tuple(s for s in (p.strip() for p in raw.split(",")) if s)
        elif key in _PATH_KEYS:
            target = (base / raw).resolve() if raw else None
            if target is None:
                continue
            try:
                content = target.read_text(encoding="utf-8")
            except OSError as exc:
                raise InputDataError(f"{path}:{lineno}: cannot read {target}: {exc}") from exc
            if key == "stoplist":
                words = frozenset(
                    w.strip() for w in content.splitlines() if w.strip() and not w.startswith("#")
                )
                updates["stoplist"] = words
            elif key == "tokenizer_rules":
                updates["tokenizer_rules_text"] = content
            else:
                updates["abbreviations_text"] = content
        else:
            raise InputDataError(f"{path}:{lineno}: unknown config key {key!r}")
    valid = {f.name for f in fields(GeneratorConfig)}
    assert set(updates) <= valid
    return replace(cfg, **updates)
