"""Tokenization, dictionary, bag-of-words and TF-IDF vectorization.

Stacktraces are matched on identifier-level tokens: lowercased maximal
runs of ``[a-z0-9_]``. Error codes and line numbers are tokens in their
own right, and there is deliberately no stopword removal; ubiquitous
terms are neutralized by their idf of log2(N/df) instead.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

TOKENIZER_SPEC = "lowercase:[a-z0-9_]+:v1"

_TOKEN_RE = re.compile(r"[a-z0-9_]+")

# (term_id, count) pairs, term_ids strictly increasing
BagOfWords = list[tuple[int, int]]
# (term_id, weight) pairs, term_ids strictly increasing, unit L2 norm or empty
SparseVector = list[tuple[int, float]]


class EmptyCorpus(ValueError):
    """TF-IDF fitting needs at least one document."""


def tokenize(text: str) -> list[str]:
    """Lowercase, then emit maximal [a-z0-9_] runs; everything else delimits."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Dictionary:
    """token -> dense term id, in first-occurrence order."""

    token_to_id: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.token_to_id)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def add(self, token: str) -> int:
        term_id = self.token_to_id.get(token)
        if term_id is None:
            term_id = len(self.token_to_id)
            self.token_to_id[token] = term_id
        return term_id

    def get(self, token: str) -> int | None:
        return self.token_to_id.get(token)

    def tokens_by_id(self) -> list[str]:
        ordered = [""] * len(self.token_to_id)
        for token, term_id in self.token_to_id.items():
            ordered[term_id] = token
        return ordered

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as out:
            for term_id, token in enumerate(self.tokens_by_id()):
                out.write(f"{token}\t{term_id}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Dictionary":
        mapping: dict[str, int] = {}
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                token, _, term_id = line.rpartition("\t")
                mapping[token] = int(term_id)
        dictionary = cls(mapping)
        ids = sorted(mapping.values())
        if ids != list(range(len(ids))):
            raise ValueError("dictionary term ids are not dense")
        return dictionary


def build_dictionary(token_streams: Iterable[Iterable[str]]) -> Dictionary:
    """Assign dense ids in first-occurrence order over one corpus pass."""
    dictionary = Dictionary()
    for tokens in token_streams:
        for token in tokens:
            dictionary.add(token)
    return dictionary


def to_bow(tokens: Iterable[str], dictionary: Dictionary) -> BagOfWords:
    """Count known tokens; unknown ones (query-side) are dropped."""
    counts = Counter()
    for token in tokens:
        term_id = dictionary.get(token)
        if term_id is not None:
            counts[term_id] += 1
    return sorted(counts.items())


@dataclass
class TfIdfModel:
    """Document frequencies over the corpus; idf(t) = log2(N / df(t))."""

    n_docs: int
    df: dict[int, int]

    def idf(self, term_id: int) -> float:
        df = self.df.get(term_id)
        if not df:
            return 0.0
        return math.log2(self.n_docs / df)

    def save(self, path: str | Path, vocab_size: int) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as out:
            out.write(f"{self.n_docs}\t{vocab_size}\n")
            for term_id in sorted(self.df):
                out.write(f"{term_id}\t{self.df[term_id]}\n")

    @classmethod
    def load(cls, path: str | Path) -> tuple["TfIdfModel", int]:
        with open(path, "r", encoding="utf-8") as handle:
            header = handle.readline().split("\t")
            n_docs, vocab_size = int(header[0]), int(header[1])
            df: dict[int, int] = {}
            for line in handle:
                line = line.strip()
                if line:
                    term_id, value = line.split("\t")
                    df[int(term_id)] = int(value)
        return cls(n_docs=n_docs, df=df), vocab_size


def fit_tfidf(corpus_bags: Iterable[BagOfWords]) -> TfIdfModel:
    """Document frequencies from corpus bags; raises EmptyCorpus on no docs."""
    df: Counter = Counter()
    n_docs = 0
    for bag in corpus_bags:
        n_docs += 1
        for term_id, _count in bag:
            df[term_id] += 1
    if n_docs == 0:
        raise EmptyCorpus("cannot fit a tf-idf model on an empty corpus")
    return TfIdfModel(n_docs=n_docs, df=dict(df))


def vectorize(bag: BagOfWords, model: TfIdfModel) -> SparseVector:
    """count x idf per term, zero weights dropped, L2-normalized."""
    weighted = []
    for term_id, count in bag:
        weight = count * model.idf(term_id)
        if weight > 0.0:
            weighted.append((term_id, weight))
    if not weighted:
        return []
    norm = math.sqrt(sum(w * w for _, w in weighted))
    return [(term_id, w / norm) for term_id, w in weighted]
