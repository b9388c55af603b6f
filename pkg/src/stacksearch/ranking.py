"""Grouping per-post hits into question threads and ordering them.

Similarity dominates; a thread where both the question and one of its
answers matched gets a small multiplicative boost, and accepted answers
break ties. The displayed similarity stays the raw max cosine so the
UI's percentage is honest; rank_score is internal ordering only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .extract import PostMeta
from .index import SearchHit
from .ingest import PostType

CO_MATCH_BOOST = 0.05
QUESTION_URL_TEMPLATE = "https://stackoverflow.com/q/{}"
DEFAULT_DISPLAY_K = 3


@dataclass
class MatchedPost:
    post_id: int
    role: str  # "question" | "answer"
    similarity: float


@dataclass
class ThreadResult:
    question_id: int
    similarity: float
    rank_score: float
    co_match: bool
    has_accepted_answer: bool
    matched_posts: list[MatchedPost] = field(default_factory=list)
    title: str | None = None
    view_count: int | None = None
    score: int | None = None

    @property
    def url(self) -> str:
        return QUESTION_URL_TEMPLATE.format(self.question_id)


def aggregate_threads(
    hits: list[SearchHit], meta: Mapping[int, PostMeta]
) -> list[ThreadResult]:
    """Group hits by their question thread; one ThreadResult per thread.

    Answer hits whose parent question is missing from the metadata store
    still form a thread under their parent_id, with display fields
    absent. Output is sorted by question_id; rank_threads orders it.
    """
    groups: dict[int, list[MatchedPost]] = {}
    for hit in hits:
        post_meta = meta.get(hit.post_id)
        if post_meta is None:
            continue
        if post_meta.post_type is PostType.QUESTION:
            thread_id, role = hit.post_id, "question"
        elif post_meta.parent_id is not None:
            thread_id, role = post_meta.parent_id, "answer"
        else:
            continue
        groups.setdefault(thread_id, []).append(
            MatchedPost(post_id=hit.post_id, role=role, similarity=hit.similarity)
        )

    threads = []
    for question_id in sorted(groups):
        matched = sorted(groups[question_id], key=lambda m: (-m.similarity, m.post_id))
        similarity = matched[0].similarity
        roles = {m.role for m in matched}
        co_match = roles == {"question", "answer"}
        rank_score = min(1.0, similarity * (1.0 + CO_MATCH_BOOST)) if co_match else similarity
        question_meta = meta.get(question_id)
        threads.append(
            ThreadResult(
                question_id=question_id,
                similarity=similarity,
                rank_score=rank_score,
                co_match=co_match,
                has_accepted_answer=(
                    question_meta is not None and question_meta.accepted_answer_id is not None
                ),
                matched_posts=matched,
                title=question_meta.title if question_meta else None,
                view_count=question_meta.view_count if question_meta else None,
                score=question_meta.score if question_meta else None,
            )
        )
    return threads


def rank_threads(threads: list[ThreadResult], n: int = DEFAULT_DISPLAY_K) -> list[ThreadResult]:
    """Order: rank_score desc, accepted answer first, view_count desc, id asc."""
    if n <= 0:
        raise ValueError("n must be positive")
    ordered = sorted(
        threads,
        key=lambda t: (
            -t.rank_score,
            not t.has_accepted_answer,
            -(t.view_count or 0),
            t.question_id,
        ),
    )
    return ordered[:n]
