"""Subcommand front-end for reproducible batch runs.

Every file-writing run leaves a ``<output>.manifest`` with the inputs,
config digest, seed, tool version and diagnostic counters. Exit codes:
0 success, 1 input error, 2 internal invariant failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import __version__
from .aliases import build_dictionary, collect_link_anchors, read_dictionary, write_dictionary
from .classify import ClassifiedSite, build_classified_site, load_type_mapping
from .config import GeneratorConfig, load_config
from .conll import (
    corpus_stats,
    read_conll,
    split_corpus,
    stats_lines,
    validate_iob,
    write_conll,
)
from .diagnostics import Diagnostics
from .dump_ingest import ArticleSource, stream_articles, stream_entities
from .errors import InputDataError, InvariantError
from .evaluate import confusion, render_confusion, render_report, score
from .generate import generate_corpus
from .tagger import FeatureTemplateConfig, load_model, save_model, tag_corpus, train

CONFIG_ENV_VAR = "HYNER_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise InputDataError(message)


def _load_effective_config(path: str | None) -> GeneratorConfig:
    if path:
        return load_config(path)
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return load_config(env)
    return GeneratorConfig()


def _write_manifest(
    output: str | None,
    subcommand: str,
    inputs: dict[str, str],
    outputs: dict[str, str],
    config: GeneratorConfig | None,
    seed: int | None,
    diag: Diagnostics,
) -> None:
    if not output:
        return
    lines = [
        f"subcommand={subcommand}",
        f"tool_version={__version__}",
    ]
    if config is not None:
        lines.append(f"config_digest={config.digest()}")
    if seed is not None:
        lines.append(f"seed={seed}")
    lines.extend(f"input.{k}={v}" for k, v in sorted(inputs.items()))
    lines.extend(f"output.{k}={v}" for k, v in sorted(outputs.items()))
    lines.extend(f"counter.{k}={diag[k]}" for k in sorted(diag))
    Path(output + ".manifest").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_classify(args: argparse.Namespace, diag: Diagnostics) -> int:
    mapping = load_type_mapping(args.mapping, tuple(args.priority.split(",")))
    entities = list(
        stream_entities(args.wikidata_dump, wiki_code=args.wiki, diagnostics=diag)
    )
    site = build_classified_site(entities, mapping, diag)
    site.write(args.output)
    diag.incr("entities_seen", len(entities))
    diag.incr("entities_classified", len(site.classes))
    _write_manifest(
        args.output, "classify",
        {"wikidata_dump": args.wikidata_dump, "mapping": args.mapping or "<packaged>"},
        {"classes": args.output}, None, None, diag,
    )
    return 0


def _cmd_aliases(args: argparse.Namespace, diag: Diagnostics) -> int:
    config = _load_effective_config(args.config)
    site = ClassifiedSite.read(args.classes)
    source = ArticleSource(args.wiki_dump)
    anchors = collect_link_anchors(source, diag)
    dictionary = build_dictionary(
        anchors, source, site.classes, site.site_index,
        site.disambig_titles, config, diag,
    )
    write_dictionary(dictionary, args.output)
    diag.incr("aliases_written", len(dictionary))
    _write_manifest(
        args.output, "aliases",
        {"wiki_dump": args.wiki_dump, "classes": args.classes},
        {"aliases": args.output}, config, None, diag,
    )
    return 0


def _cmd_generate(args: argparse.Namespace, diag: Diagnostics) -> int:
    config = _load_effective_config(args.config)
    site = ClassifiedSite.read(args.classes)
    dictionary = read_dictionary(args.aliases, config)
    redirects = {
        a.title: a.redirect_target
        for a in stream_articles(args.wiki_dump)
        if a.redirect_target is not None
    }
    corpus = generate_corpus(
        stream_articles(args.wiki_dump),
        site.classes,
        site.site_index,
        dictionary,
        config,
        redirects,
        site.disambig_titles,
        diag,
        jobs=args.jobs,
    )
    write_conll(corpus, args.output)
    _write_manifest(
        args.output, "generate",
        {"wiki_dump": args.wiki_dump, "classes": args.classes, "aliases": args.aliases},
        {"corpus": args.output}, config, None, diag,
    )
    return 0


def _cmd_stats(args: argparse.Namespace, diag: Diagnostics) -> int:
    stats = corpus_stats(read_conll(args.input))
    text = "\n".join(stats_lines(stats)) + "\n"
    _emit(text, args.output)
    _write_manifest(
        args.output, "stats", {"corpus": args.input},
        {"report": args.output} if args.output else {}, None, None, diag,
    )
    return 0


def _cmd_validate(args: argparse.Namespace, diag: Diagnostics) -> int:
    violations = validate_iob(read_conll(args.input))
    lines = [f"{si}\t{ti}\t{reason}" for si, ti, reason in violations]
    lines.append(f"violations\t{len(violations)}")
    _emit("\n".join(lines) + "\n", args.output)
    _write_manifest(
        args.output, "validate", {"corpus": args.input},
        {"report": args.output} if args.output else {}, None, None, diag,
    )
    return 0 if not violations else 1


def _cmd_split(args: argparse.Namespace, diag: Diagnostics) -> int:
    corpus = read_conll(args.input)
    train_part, dev_part = split_corpus(corpus, args.train_fraction, args.seed)
    write_conll(train_part, args.train_output)
    write_conll(dev_part, args.dev_output)
    diag.incr("train_sentences", len(train_part.sentences))
    diag.incr("dev_sentences", len(dev_part.sentences))
    _write_manifest(
        args.train_output, "split", {"corpus": args.input},
        {"train": args.train_output, "dev": args.dev_output},
        None, args.seed, diag,
    )
    return 0


def _cmd_train(args: argparse.Namespace, diag: Diagnostics) -> int:
    corpus = read_conll(args.train)
    config = FeatureTemplateConfig(max_ngram=args.max_ngram, window=args.window)
    model = train(corpus, args.epochs, args.seed, config)
    save_model(model, args.model_output)
    diag.incr("feature_collisions", model.collisions)
    diag.incr("features", len(model.feature_names))
    if model.collision_rate() > 0.001:
        raise InvariantError(
            f"feature hash collision rate {model.collision_rate():.4%} exceeds 0.1%"
        )
    _write_manifest(
        args.model_output, "train", {"train": args.train},
        {"model": args.model_output}, None, args.seed, diag,
    )
    return 0


def _cmd_tag(args: argparse.Namespace, diag: Diagnostics) -> int:
    model = load_model(args.model)
    corpus = read_conll(args.input)
    predicted = tag_corpus(model, corpus)
    write_conll(predicted, args.output)
    diag.incr("sentences_tagged", len(predicted.sentences))
    _write_manifest(
        args.output, "tag", {"model": args.model, "corpus": args.input},
        {"corpus": args.output}, None, None, diag,
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace, diag: Diagnostics) -> int:
    gold = read_conll(args.gold)
    pred = read_conll(args.pred)
    report = score(gold, pred)
    text = render_report(report)
    if args.confusion:
        text += "\n" + render_confusion(confusion(gold, pred))
    _emit(text, args.output)
    _write_manifest(
        args.output, "evaluate", {"gold": args.gold, "pred": args.pred},
        {"report": args.output} if args.output else {}, None, None, diag,
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="hyner", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hyner {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("classify", help="classify dump entities into PER/ORG/LOC")
    p.add_argument("--wikidata-dump", required=True)
    p.add_argument("--mapping", default=None, help="taxonomy mapping file (default: packaged)")
    p.add_argument("--wiki", default="hywiki", help="sitelink wiki code")
    p.add_argument("--priority", default="PER,ORG,LOC")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("aliases", help="compile the alias dictionary")
    p.add_argument("--wiki-dump", required=True)
    p.add_argument("--classes", required=True, help="output of the classify step")
    p.add_argument("--config", default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_aliases)

    p = sub.add_parser("generate", help="generate the annotated corpus")
    p.add_argument("--wiki-dump", required=True)
    p.add_argument("--classes", required=True)
    p.add_argument("--aliases", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("stats", help="sentence/token/entity counts of a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("validate", help="check IOB2 validity")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("split", help="seeded train/dev split")
    p.add_argument("--input", required=True)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--train-output", required=True)
    p.add_argument("--dev-output", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train the baseline tagger")
    p.add_argument("--train", required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-ngram", type=int, default=6)
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--model-output", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("tag", help="tag a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("evaluate", help="chunk-level P/R/F1 of pred vs gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--confusion", action="store_true")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_evaluate)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    diag = Diagnostics()
    started = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        status = args.func(args, diag)
    except InvariantError as exc:
        print(f"hyner: internal invariant violated: {exc}", file=sys.stderr)
        return 2
    except InputDataError as exc:
        print(f"hyner: {exc}", file=sys.stderr)
        return 1
    diag.incr("elapsed_ms", int((time.perf_counter() - started) * 1000))
    diag.report(sys.stderr)
    return status


def main() -> None:
    sys.exit(run())
