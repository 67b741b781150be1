"""Silver-standard Armenian NER corpora from Wikipedia/Wikidata dumps.

The pipeline: stream dumps, classify articles into PER/ORG/LOC through
their Wikidata items, compile alias dictionaries, extract and select
sentences, emit IOB2 CoNLL files; plus corpus statistics, a seeded
train/dev split, a chunk-level scorer, and a perceptron baseline tagger.
"""

__version__ = "0.1.0"

from .models import (  # noqa: F401
    IOB_TAGS,
    NE_TYPES,
    AnnotatedCorpus,
    CorpusStats,
    EntityRecord,
    LabeledSentence,
    LinkSpan,
    RawArticle,
    Token,
)
