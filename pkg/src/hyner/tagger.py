"""Linear sequence tagger: hashed features, Viterbi decoding, averaged perceptron.

Feature templates follow the classic lexical/contextual recipe: current,
previous and next word identities, character prefixes and suffixes up to
a configurable length, and a collapsed word-shape signature. Decoding is
first-order Viterbi constrained to IOB2-valid transitions, so the output
always validates. Training is the averaged structured perceptron with a
seeded shuffle per epoch, deterministic for a fixed seed.
"""
from __future__ import annotations

import hashlib
import random
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InputDataError, InvariantError
from .models import IOB_TAGS, AnnotatedCorpus, LabeledSentence

BEGIN = "<s>"
END = "</s>"

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class FeatureTemplateConfig:
    use_current_word: bool = True
    use_prev_next_words: bool = True
    max_ngram: int = 6
    use_word_shape: bool = True
    window: int = 1

    def __post_init__(self) -> None:
        if self.max_ngram < 1:
            raise InputDataError("max_ngram must be >= 1")
        if self.window < 1:
            raise InputDataError("window must be >= 1")


def word_shape(word: str) -> str:
    """Collapsed class signature: uppercase X, lowercase x, digit 9, other #."""
    out: list[str] = []
    for ch in word:
        cat = unicodedata.category(ch)
        if cat == "Lu":
            cls = "X"
        elif cat in ("Ll", "Lm", "Lo", "Lt"):
            cls = "x"
        elif ch.isdigit():
            cls = "9"
        else:
            cls = "#"
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def extract_features(
    tokens: list[str], position: int, config: FeatureTemplateConfig | None = None
) -> list[str]:
    config = config or FeatureTemplateConfig()
    if not 0 <= position < len(tokens):
        raise IndexError(f"position {position} out of range")
    word = tokens[position]
    features: list[str] = []
    if config.use_current_word:
        features.append(f"w={word}")
    if config.use_prev_next_words:
        for off in range(1, config.window + 1):
            prev = tokens[position - off] if position - off >= 0 else BEGIN
            nxt = tokens[position + off] if position + off < len(tokens) else END
            tag = "" if off == 1 else str(off)
            features.append(f"p{tag}={prev}")
            features.append(f"n{tag}={nxt}")
    for length in range(1, min(config.max_ngram, len(word)) + 1):
        features.append(f"pre={word[:length]}")
        features.append(f"suf={word[-length:]}")
    if config.use_word_shape:
        features.append(f"sh={word_shape(word)}")
    return features


def feature_id(name: str) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "big")


_TAG_INDEX = {t: i for i, t in enumerate(IOB_TAGS)}


def _allowed_prev(tag: str) -> tuple[str, ...]:
    if tag.startswith("I-"):
        netype = tag[2:]
        return (f"B-{netype}", f"I-{netype}")
    return IOB_TAGS


@dataclass
class TaggerModel:
    weights: dict[int, dict[str, float]] = field(default_factory=dict)
    transitions: dict[tuple[str, str], float] = field(default_factory=dict)
    feature_names: dict[int, str] = field(default_factory=dict)
    config: FeatureTemplateConfig = field(default_factory=FeatureTemplateConfig)
    epochs: int = 0
    seed: int = 0
    collisions: int = 0

    def register(self, name: str) -> int:
        fid = feature_id(name)
        seen = self.feature_names.get(fid)
        if seen is None:
            self.feature_names[fid] = name
        elif seen != name:
            self.collisions += 1
        return fid

    def collision_rate(self) -> float:
        total = len(self.feature_names) + self.collisions
        return self.collisions / total if total else 0.0


def _emission_scores(model: TaggerModel, feature_ids: list[int]) -> dict[str, float]:
    scores = dict.fromkeys(IOB_TAGS, 0.0)
    for fid in feature_ids:
        row = model.weights.get(fid)
        if row:
            for tag, weight in row.items():
                scores[tag] += weight
    return scores


def _sentence_features(
    model: TaggerModel, texts: list[str], register: bool = False
) -> list[list[int]]:
    # Registration (name bookkeeping, collision counting) happens only while
    # training; decoding must stay read-only on the model.
    make = model.register if register else feature_id
    return [
        [make(f) for f in extract_features(texts, i, model.config)]
        for i in range(len(texts))
    ]


def viterbi_decode(model: TaggerModel, tokens: list[str]) -> list[str]:
    """Best IOB2-valid tag sequence; ties resolve to the earliest tag (O first)."""
    if not tokens:
        raise InputDataError("cannot decode an empty sentence")
    features = _sentence_features(model, tokens)
    return _decode(model, features)


def _decode(model: TaggerModel, features: list[list[int]]) -> list[str]:
    n = len(features)
    emit0 = _emission_scores(model, features[0])
    scores = {tag: (emit0[tag] if not tag.startswith("I-") else _NEG_INF) for tag in IOB_TAGS}
    back: list[dict[str, str]] = []
    for i in range(1, n):
        emit = _emission_scores(model, features[i])
        nxt: dict[str, float] = {}
        choice: dict[str, str] = {}
        for tag in IOB_TAGS:
            best_prev = None
            best = _NEG_INF
            for prev in _allowed_prev(tag):
                candidate = scores[prev] + model.transitions.get((prev, tag), 0.0)
                if candidate > best:
                    best = candidate
                    best_prev = prev
            nxt[tag] = best + emit[tag] if best_prev is not None else _NEG_INF
            choice[tag] = best_prev if best_prev is not None else "O"
        scores = nxt
        back.append(choice)
    last = max(IOB_TAGS, key=lambda t: (scores[t], -_TAG_INDEX[t]))
    path = [last]
    for choice in reversed(back):
        path.append(choice[path[-1]])
    path.reverse()
    return path


class _Averaged:
    """Lazily averaged weights, textbook averaged-perceptron bookkeeping."""

    def __init__(self) -> None:
        self.weights: dict[tuple, float] = {}
        self.totals: dict[tuple, float] = {}
        self.stamps: dict[tuple, int] = {}
        self.step = 0

    def update(self, key: tuple, delta: float) -> None:
        current = self.weights.get(key, 0.0)
        self.totals[key] = self.totals.get(key, 0.0) + (self.step - self.stamps.get(key, 0)) * current
        self.stamps[key] = self.step
        self.weights[key] = current + delta

    def average(self, key: tuple) -> float:
        current = self.weights.get(key, 0.0)
        total = self.totals.get(key, 0.0) + (self.step - self.stamps.get(key, 0)) * current
        return total / self.step if self.step else 0.0


def train(
    corpus: AnnotatedCorpus,
    epochs: int,
    seed: int,
    config: FeatureTemplateConfig | None = None,
) -> TaggerModel:
    """Averaged structured perceptron over the corpus, deterministic per seed."""
    if epochs < 1:
        raise InputDataError(f"epochs must be >= 1, got {epochs}")
    if not corpus.sentences:
        raise InputDataError("cannot train on an empty corpus")
    config = config or FeatureTemplateConfig()
    model = TaggerModel(config=config, epochs=epochs, seed=seed)
    features = [_sentence_features(model, s.texts(), register=True) for s in corpus.sentences]
    golds = [list(s.tags) for s in corpus.sentences]

    averaged = _Averaged()
    rng = random.Random(seed)
    order = list(range(len(corpus.sentences)))
    for _ in range(epochs):
        rng.shuffle(order)
        for si in order:
            averaged.step += 1
            sent_features = features[si]
            gold = golds[si]
            predicted = _decode(model, sent_features)
            if predicted == gold:
                continue
            for i, (gtag, ptag) in enumerate(zip(gold, predicted)):
                if gtag == ptag:
                    continue
                for fid in sent_features[i]:
                    _bump(model, averaged, ("E", fid, gtag), +1.0)
                    _bump(model, averaged, ("E", fid, ptag), -1.0)
            for i in range(1, len(gold)):
                gkey = (gold[i - 1], gold[i])
                pkey = (predicted[i - 1], predicted[i])
                if gkey != pkey:
                    _bump(model, averaged, ("T",) + gkey, +1.0)
                    _bump(model, averaged, ("T",) + pkey, -1.0)

    _finalize_averages(model, averaged)
    return model


def _bump(model: TaggerModel, averaged: _Averaged, key: tuple, delta: float) -> None:
    averaged.update(key, delta)
    if key[0] == "E":
        _, fid, tag = key
        row = model.weights.setdefault(fid, {})
        row[tag] = row.get(tag, 0.0) + delta
    else:
        _, prev, cur = key
        tkey = (prev, cur)
        model.transitions[tkey] = model.transitions.get(tkey, 0.0) + delta


def _finalize_averages(model: TaggerModel, averaged: _Averaged) -> None:
    # Replace raw training weights with their averages everywhere.
    weights: dict[int, dict[str, float]] = {}
    transitions: dict[tuple[str, str], float] = {}
    for key in averaged.weights:
        value = averaged.average(key)
        if not value:
            continue
        if key[0] == "E":
            _, fid, tag = key
            weights.setdefault(fid, {})[tag] = value
        else:
            transitions[(key[1], key[2])] = value
    model.weights = weights
    model.transitions = transitions


def tag_corpus(model: TaggerModel, corpus: AnnotatedCorpus) -> AnnotatedCorpus:
    """Replace gold tags with decoded tags; tokens untouched."""
    out = AnnotatedCorpus(provenance=corpus.provenance)
    for sentence in corpus.sentences:
        tags = viterbi_decode(model, sentence.texts())
        out.sentences.append(LabeledSentence(list(sentence.tokens), tags, sentence.source_article))
    return out


_HEADER_PREFIX = "hyner-tagger-model"
_FORMAT_VERSION = 1


def save_model(model: TaggerModel, path: str | Path) -> None:
    c = model.config
    header = (
        f"{_HEADER_PREFIX}\t{_FORMAT_VERSION}"
        f"\tmax_ngram={c.max_ngram}\twindow={c.window}"
        f"\tuse_current_word={int(c.use_current_word)}"
        f"\tuse_prev_next_words={int(c.use_prev_next_words)}"
        f"\tuse_word_shape={int(c.use_word_shape)}"
        f"\tepochs={model.epochs}\tseed={model.seed}"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as sink:
        sink.write(header + "\n")
        rows = []
        for fid, row in model.weights.items():
            name = model.feature_names.get(fid, "")
            for tag, weight in row.items():
                if weight:
                    rows.append((name, tag, weight))
        for name, tag, weight in sorted(rows):
            sink.write(f"{name}\t{tag}\t{weight!r}\n")
        for (prev, cur), weight in sorted(model.transitions.items()):
            if weight:
                sink.write(f"TRANS\t{prev}\t{cur}\t{weight!r}\n")


def load_model(path: str | Path) -> TaggerModel:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputDataError(f"cannot read model {path}: {exc}") from exc
    if not lines or not lines[0].startswith(_HEADER_PREFIX + "\t"):
        raise InputDataError(f"{path}: not a tagger model file")
    fields = lines[0].split("\t")
    if fields[1] != str(_FORMAT_VERSION):
        raise InputDataError(f"{path}: unsupported model format version {fields[1]!r}")
    params = dict(f.split("=", 1) for f in fields[2:])
    config = FeatureTemplateConfig(
        use_current_word=bool(int(params.get("use_current_word", 1))),
        use_prev_next_words=bool(int(params.get("use_prev_next_words", 1))),
        max_ngram=int(params.get("max_ngram", 6)),
        use_word_shape=bool(int(params.get("use_word_shape", 1))),
        window=int(params.get("window", 1)),
    )
    model = TaggerModel(
        config=config,
        epochs=int(params.get("epochs", 0)),
        seed=int(params.get("seed", 0)),
    )
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if parts[0] == "TRANS":
            if len(parts) != 4:
                raise InputDataError(f"{path}:{lineno}: bad transition line")
            model.transitions[(parts[1], parts[2])] = float(parts[3])
            continue
        if len(parts) != 3:
            raise InputDataError(f"{path}:{lineno}: bad weight line")
        name, tag, weight = parts
        if tag not in _TAG_INDEX:
            raise InputDataError(f"{path}:{lineno}: unknown tag {tag!r}")
        fid = model.register(name)
        model.weights.setdefault(fid, {})[tag] = float(weight)
    return model
