"""Chunk-level precision/recall/F1 and token-level confusion matrix.

A predicted chunk is correct only when a gold chunk matches both type and
boundaries exactly. Precision or recall with a zero denominator is 0, as
in the reference CoNLL scorer; a bare I-X with no valid predecessor opens
a new chunk (lenient repair).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputDataError
from .models import NE_TYPES, AnnotatedCorpus

# Confusion-matrix display order (predicted columns).
CONFUSION_TAG_ORDER = ("O", "B-PER", "B-ORG", "B-LOC", "I-ORG", "I-PER", "I-LOC")


@dataclass(frozen=True)
class ChunkSpan:
    netype: str
    sentence: int
    start_token: int
    end_token: int


@dataclass
class EvalReport:
    per_type: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    overall: tuple[float, float, float] = (0.0, 0.0, 0.0)
    support: dict[str, int] = field(default_factory=dict)


@dataclass
class ConfusionMatrix:
    tags: tuple[str, ...] = CONFUSION_TAG_ORDER
    counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def get(self, actual: str, predicted: str) -> int:
        return self.counts.get((actual, predicted), 0)

    def precision_row(self) -> dict[str, float]:
        row = {}
        for predicted in self.tags:
            column = sum(self.get(a, predicted) for a in self.tags)
            row[predicted] = 100.0 * self.get(predicted, predicted) / column if column else 0.0
        return row

    def total(self) -> int:
        return sum(self.counts.values())


def extract_chunks(tags: list[str], sentence: int = 0) -> list[ChunkSpan]:
    """Maximal typed runs; B- always starts, orphan I- starts too."""
    chunks: list[ChunkSpan] = []
    current: str | None = None
    start = 0
    for i, tag in enumerate(tags):
        if tag == "O":
            if current is not None:
                chunks.append(ChunkSpan(current, sentence, start, i - 1))
                current = None
            continue
        kind, netype = tag.split("-", 1)
        begins = kind == "B" or current != netype
        if begins:
            if current is not None:
                chunks.append(ChunkSpan(current, sentence, start, i - 1))
            current = netype
            start = i
    if current is not None:
        chunks.append(ChunkSpan(current, sentence, start, len(tags) - 1))
    return chunks


def _check_alignment(gold: AnnotatedCorpus, pred: AnnotatedCorpus) -> None:
    if len(gold.sentences) != len(pred.sentences):
        raise InputDataError(
            f"sentence count mismatch: gold {len(gold.sentences)}, pred {len(pred.sentences)}"
        )
    for si, (g, p) in enumerate(zip(gold.sentences, pred.sentences)):
        if len(g.tokens) != len(p.tokens):
            raise InputDataError(
                f"sentence {si}: token count mismatch (gold {len(g.tokens)}, pred {len(p.tokens)})"
            )
        for ti, (gt, pt) in enumerate(zip(g.texts(), p.texts())):
            if gt != pt:
                raise InputDataError(
                    f"sentence {si}, token {ti}: text mismatch (gold {gt!r}, pred {pt!r})"
                )


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    precision = 100.0 * correct / predicted if predicted else 0.0
    recall = 100.0 * correct / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def score(gold: AnnotatedCorpus, pred: AnnotatedCorpus) -> EvalReport:
    """Exact-boundary chunk P/R/F1, per type and micro-averaged."""
    _check_alignment(gold, pred)
    gold_chunks: set[ChunkSpan] = set()
    pred_chunks: set[ChunkSpan] = set()
    for si, (g, p) in enumerate(zip(gold.sentences, pred.sentences)):
        gold_chunks.update(extract_chunks(g.tags, si))
        pred_chunks.update(extract_chunks(p.tags, si))
    report = EvalReport()
    total_correct = 0
    for netype in NE_TYPES:
        g = {c for c in gold_chunks if c.netype == netype}
        p = {c for c in pred_chunks if c.netype == netype}
        correct = len(g & p)
        total_correct += correct
        report.per_type[netype] = _prf(correct, len(p), len(g))
        report.support[netype] = len(g)
    report.overall = _prf(total_correct, len(pred_chunks), len(gold_chunks))
    return report


def confusion(gold: AnnotatedCorpus, pred: AnnotatedCorpus) -> ConfusionMatrix:
    """counts[actual, predicted] over aligned tokens."""
    _check_alignment(gold, pred)
    matrix = ConfusionMatrix()
    for g, p in zip(gold.sentences, pred.sentences):
        for gt, pt in zip(g.tags, p.tags):
            matrix.counts[(gt, pt)] = matrix.counts.get((gt, pt), 0) + 1
    return matrix


def render_report(report: EvalReport) -> str:
    """Aligned table plus machine-readable type<TAB>P<TAB>R<TAB>F1 lines."""
    width = max(len("overall"), *(len(t) for t in report.per_type)) if report.per_type else 8
    lines = [f"{'':<{width}}  {'Precision':>9}  {'Recall':>9}  {'F1':>9}  {'Support':>7}"]
    for netype in NE_TYPES:
        if netype not in report.per_type:
            continue
        p, r, f1 = report.per_type[netype]
        lines.append(
            f"{netype:<{width}}  {p:>9.2f}  {r:>9.2f}  {f1:>9.2f}  {report.support.get(netype, 0):>7}"
        )
    p, r, f1 = report.overall
    total = sum(report.support.values())
    lines.append(f"{'overall':<{width}}  {p:>9.2f}  {r:>9.2f}  {f1:>9.2f}  {total:>7}")
    lines.append("")
    for netype in NE_TYPES:
        if netype in report.per_type:
            tp, tr, tf = report.per_type[netype]
            lines.append(f"{netype}\t{tp:.2f}\t{tr:.2f}\t{tf:.2f}")
    lines.append(f"overall\t{p:.2f}\t{r:.2f}\t{f1:.2f}")
    return "\n".join(lines) + "\n"


def render_confusion(matrix: ConfusionMatrix) -> str:
    tags = matrix.tags
    width = max(len(t) for t in tags) + 2
    head = " " * (width + 2) + "".join(f"{t:>{width}}" for t in tags)
    lines = [head]
    for actual in tags:
        row = "".join(f"{matrix.get(actual, p):>{width}}" for p in tags)
        lines.append(f"{actual:<{width + 2}}{row}")
    precision = matrix.precision_row()
    row = "".join(f"{precision[p]:>{width}.2f}" for p in tags)
    lines.append(f"{'precision%':<{width + 2}}{row}")
    return "\n".join(lines) + "\n"
