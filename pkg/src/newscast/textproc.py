"""Deterministic text pipeline: tokens -> stems -> tf-idf vectors -> cosine.

Documents are an article's title concatenated with its body.  Vectors are
kept sparse (column -> weight dicts) because news vocabularies are wide
and individual articles short.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DomainError, LookupError_
from .lancaster import LancasterStemmer

_TOKEN_RE = re.compile(r"[0-9a-zA-Z]+")


def load_stopwords() -> frozenset[str]:
    """The shipped English stopword list (one word per line, # comments)."""
    text = resources.files("newscast.data").joinpath("stopwords_en.txt").read_text("utf-8")
    words = [w.strip() for w in text.splitlines()]
    return frozenset(w for w in words if w and not w.startswith("#"))


@dataclass(frozen=True)
class TokenPipelineConfig:
    stopwords: frozenset[str] = field(default_factory=load_stopwords)
    min_token_length: int = 2
    lowercase: bool = True


_DEFAULT_STEMMER = LancasterStemmer()


def preprocess(text: str, config: TokenPipelineConfig | None = None) -> list[str]:
    """Tokenize, filter and stem a raw string.

    Splits on any non-alphanumeric character, discards digits-only tokens,
    short tokens and stopwords, then stems the survivors.  Pure function:
    identical input always yields the identical stem sequence.
    """
    if config is None:
        config = TokenPipelineConfig()
    if config.lowercase:
        text = text.lower()
    stems = []
    for token in _TOKEN_RE.findall(text):
        if token.isdigit():
            continue
        if len(token) < config.min_token_length:
            continue
        if token in config.stopwords:
            continue
        stems.append(_DEFAULT_STEMMER.stem(token))
    return stems


@dataclass
class TfIdfIndex:
    """Corpus-wide tf-idf vectors over stems of title + body.

    tf is the raw stem count in a document, idf = ln(n / df).  Stems present
    in every document get idf 0 and therefore weight 0; they stay in the
    vocabulary so that column indices are stable.
    """

    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_vectors: dict[str, dict[int, float]]
    config: TokenPipelineConfig

    def vector_norms(self) -> dict[str, float]:
        return {a: math.sqrt(sum(w * w for w in v.values())) for a, v in self.doc_vectors.items()}

    def vectorize(self, stems: list[str]) -> dict[int, float]:
        """tf-idf vector for an arbitrary stem sequence; unknown stems ignored."""
        counts: dict[int, int] = {}
        for s in stems:
            col = self.vocabulary.get(s)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        return {c: n * self.idf[c] for c, n in counts.items() if self.idf[c] > 0.0}


def document_text(article) -> str:
    return article.title + " " + article.body


def build_tfidf(corpus, config: TokenPipelineConfig | None = None) -> TfIdfIndex:
    """Build the tf-idf index over every article in the corpus."""
    if config is None:
        config = TokenPipelineConfig()
    if corpus.n == 0:
        raise DomainError("cannot build tf-idf index over an empty corpus")

    doc_stems = {a.id: preprocess(document_text(a), config) for a in corpus.articles.values()}
    if all(len(s) == 0 for s in doc_stems.values()):
        raise DomainError("no document has any stems after preprocessing")

    df: dict[str, int] = {}
    for stems in doc_stems.values():
        for s in set(stems):
            df[s] = df.get(s, 0) + 1
    vocabulary = {s: i for i, s in enumerate(sorted(df))}

    n = corpus.n
    idf = np.zeros(len(vocabulary))
    for s, col in vocabulary.items():
        idf[col] = math.log(n / df[s])

    doc_vectors = {}
    for aid, stems in doc_stems.items():
        counts: dict[int, int] = {}
        for s in stems:
            col = vocabulary[s]
            counts[col] = counts.get(col, 0) + 1
        doc_vectors[aid] = {c: cnt * idf[c] for c, cnt in counts.items() if idf[c] > 0.0}

    return TfIdfIndex(vocabulary=vocabulary, idf=idf, doc_vectors=doc_vectors, config=config)


def cosine_sparse(u: dict[int, float], v: dict[int, float]) -> float:
    """Cosine of two sparse non-negative vectors; zero vectors compare as 0."""
    if not u or not v:
        return 0.0
    if len(v) < len(u):
        u, v = v, u
    dot = sum(w * v[c] for c, w in u.items() if c in v)
    if dot == 0.0:
        return 0.0
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    return min(dot / (nu * nv), 1.0)


def cosine(index: TfIdfIndex, a: str, b: str) -> float:
    """Cosine similarity between two indexed articles."""
    try:
        u = index.doc_vectors[a]
        v = index.doc_vectors[b]
    except KeyError as exc:
        raise LookupError_(f"article {exc.args[0]!r} is not in the tf-idf index") from None
    return cosine_sparse(u, v)
