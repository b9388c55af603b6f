"""Build orchestration and the loaded end-to-end search pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import extract, index as index_mod, ingest, summarize, textproc
from .extract import CodeDocument, PostMeta
from .index import InvertedIndex, config_digest, query_topk
from .ingest import PostType
from .ranking import DEFAULT_DISPLAY_K, ThreadResult, aggregate_threads, rank_threads
from .textproc import Dictionary, TfIdfModel

META_FILE = "meta.jsonl"


@dataclass
class BuildReport:
    doc_count: int
    vocab_size: int
    postings_count: int
    seconds: float


@dataclass
class RenderedResult:
    question_id: int
    title: str | None
    url: str
    similarity: float
    summary: str | None
    has_accepted_answer: bool
    view_count: int | None
    score: int | None


@dataclass
class SearchOutcome:
    results: list[RenderedResult]
    query_tokens_total: int
    query_tokens_known: int
    reason: str | None = None


def build_components(
    documents: list[CodeDocument],
) -> tuple[Dictionary, TfIdfModel, list[textproc.SparseVector]]:
    """Dictionary, fitted model and per-document unit vectors for a corpus."""
    dictionary = textproc.build_dictionary(
        textproc.tokenize(doc.text) for doc in documents
    )
    model = textproc.fit_tfidf(
        textproc.to_bow(textproc.tokenize(doc.text), dictionary) for doc in documents
    )
    vectors = [
        textproc.vectorize(textproc.to_bow(textproc.tokenize(doc.text), dictionary), model)
        for doc in documents
    ]
    return dictionary, model, vectors


def build_index_from_documents(
    documents: list[CodeDocument],
) -> tuple[InvertedIndex, Dictionary, TfIdfModel]:
    dictionary, model, vectors = build_components(documents)
    digest = config_digest(dictionary, model)
    inverted = index_mod.build_index(
        vectors,
        doc_table=[doc.post_id for doc in documents],
        vocab_size=len(dictionary),
        digest=digest,
    )
    return inverted, dictionary, model


def build_index_dir(rows_path: str | Path, index_dir: str | Path) -> BuildReport:
    """rows file -> extracted corpus -> fitted model -> saved index directory."""
    started = time.perf_counter()
    documents, meta = extract.build_corpus(ingest.read_rows(rows_path))
    if not documents:
        raise textproc.EmptyCorpus("no posts with code blocks in input")
    inverted, dictionary, model = build_index_from_documents(documents)

    index_dir = Path(index_dir)
    index_dir.mkdir(parents=True, exist_ok=True)
    extract.write_meta(meta.values(), index_dir / META_FILE)
    index_mod.save_index(index_dir, inverted, dictionary, model, extra_names=[META_FILE])
    return BuildReport(
        doc_count=inverted.n_docs,
        vocab_size=len(dictionary),
        postings_count=inverted.postings_count,
        seconds=time.perf_counter() - started,
    )


class SearchEngine:
    """Immutable bundle of everything one query needs; safe to share across threads."""

    def __init__(
        self,
        dictionary: Dictionary,
        model: TfIdfModel,
        inverted: InvertedIndex,
        meta: Mapping[int, PostMeta],
    ):
        self.dictionary = dictionary
        self.model = model
        self.index = inverted
        self.meta = meta

    @classmethod
    def load(cls, index_dir: str | Path) -> "SearchEngine":
        """Load a saved index directory; raises CorruptIndex on any damage."""
        index_dir = Path(index_dir)
        inverted = index_mod.load_index(index_dir)
        dictionary = Dictionary.load(index_dir / index_mod.DICTIONARY_FILE)
        model, _ = TfIdfModel.load(index_dir / index_mod.MODEL_FILE)
        meta_path = index_dir / META_FILE
        if not meta_path.is_file():
            raise index_mod.CorruptIndex(f"missing {META_FILE}")
        meta = extract.read_meta(meta_path)
        return cls(dictionary, model, inverted, meta)

    def search(
        self,
        stacktrace: str,
        k: int = DEFAULT_DISPLAY_K,
        k_retrieve: int = index_mod.DEFAULT_K,
    ) -> SearchOutcome:
        """vectorize -> top-k retrieval -> thread ranking -> summaries."""
        tokens = textproc.tokenize(stacktrace)
        bag = textproc.to_bow(tokens, self.dictionary)
        known = sum(count for _, count in bag)
        vector = textproc.vectorize(bag, self.model)
        if not vector:
            return SearchOutcome(
                results=[],
                query_tokens_total=len(tokens),
                query_tokens_known=known,
                reason="no_known_terms",
            )
        hits = query_topk(
            self.index, vector, k_retrieve, expected_digest=self.index.config_digest
        )
        threads = aggregate_threads(hits, self.meta)
        ranked = rank_threads(threads, k)
        return SearchOutcome(
            results=[self._render(thread) for thread in ranked],
            query_tokens_total=len(tokens),
            query_tokens_known=known,
        )

    def _render(self, thread: ThreadResult) -> RenderedResult:
        summary = None
        question_meta = self.meta.get(thread.question_id)
        if question_meta is not None and question_meta.desc:
            summary = summarize.summarize(question_meta.desc, self.model, self.dictionary).text
        return RenderedResult(
            question_id=thread.question_id,
            title=thread.title,
            url=thread.url,
            similarity=thread.similarity,
            summary=summary,
            has_accepted_answer=thread.has_accepted_answer,
            view_count=thread.view_count,
            score=thread.score,
        )

    def lookup_question(self, question_id: int) -> tuple[PostMeta, str | None] | None:
        """Metadata plus on-demand summary; only question posts are addressable."""
        question_meta = self.meta.get(question_id)
        if question_meta is None or question_meta.post_type is not PostType.QUESTION:
            return None
        summary = None
        if question_meta.desc:
            summary = summarize.summarize(question_meta.desc, self.model, self.dictionary).text
        return question_meta, summary

    def stats(self) -> dict:
        postings_count = self.index.postings_count
        # 8 bytes per posting pair plus rough per-term container overhead.
        resident_bytes = postings_count * 8 + len(self.index.postings) * 120
        return {
            "doc_count": self.index.n_docs,
            "vocab_size": len(self.dictionary),
            "postings_count": postings_count,
            "resident_index_bytes": resident_bytes,
        }
