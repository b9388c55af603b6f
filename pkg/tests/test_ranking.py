from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest

from stacksearch.extract import PostMeta
from stacksearch.index import SearchHit
from stacksearch.ingest import PostType
from stacksearch.ranking import ThreadResult, aggregate_threads, rank_threads

_DATE = datetime(2012, 1, 1, tzinfo=timezone.utc)


def _meta(post_id, post_type=PostType.QUESTION, **kwargs) -> PostMeta:
    return PostMeta(post_id=post_id, post_type=post_type, creation_date=_DATE, score=kwargs.pop("score", 0), **kwargs)


def _store(*metas: PostMeta) -> dict[int, PostMeta]:
    return {m.post_id: m for m in metas}


def _hit(post_id, similarity, doc_id=0) -> SearchHit:
    return SearchHit(doc_id=doc_id, post_id=post_id, similarity=similarity)


class TestAggregate:
    def test_co_match_boost(self):
        meta = _store(
            _meta(1, title="q1", accepted_answer_id=None),
            _meta(11, PostType.ANSWER, parent_id=1),
        )
        threads = aggregate_threads([_hit(1, 0.80), _hit(11, 0.85, doc_id=1)], meta)
        assert len(threads) == 1
        thread = threads[0]
        assert thread.similarity == 0.85
        assert thread.co_match
        assert thread.rank_score == pytest.approx(0.8925)
        assert thread.url == "https://stackoverflow.com/q/1"

    def test_question_only_no_boost(self):
        meta = _store(_meta(1, title="q1"))
        (thread,) = aggregate_threads([_hit(1, 0.6)], meta)
        assert not thread.co_match
        assert thread.rank_score == thread.similarity == 0.6

    def test_orphan_answers_group_under_parent(self):
        meta = _store(
            _meta(11, PostType.ANSWER, parent_id=7),
            _meta(12, PostType.ANSWER, parent_id=7),
        )
        (thread,) = aggregate_threads([_hit(11, 0.4), _hit(12, 0.55, doc_id=1)], meta)
        assert thread.question_id == 7
        assert not thread.co_match
        assert thread.similarity == 0.55
        assert thread.title is None
        assert thread.score is None

    def test_rank_score_capped_at_one(self):
        meta = _store(_meta(1), _meta(11, PostType.ANSWER, parent_id=1))
        (thread,) = aggregate_threads([_hit(1, 0.99), _hit(11, 0.97, doc_id=1)], meta)
        assert thread.rank_score == 1.0

    def test_matched_posts_record_roles(self):
        meta = _store(_meta(1), _meta(11, PostType.ANSWER, parent_id=1))
        (thread,) = aggregate_threads([_hit(1, 0.5), _hit(11, 0.9, doc_id=1)], meta)
        assert [(m.post_id, m.role) for m in thread.matched_posts] == [(11, "answer"), (1, "question")]
        assert thread.similarity == max(m.similarity for m in thread.matched_posts)

    def test_accepted_answer_flag_from_question_meta(self):
        meta = _store(_meta(1, accepted_answer_id=11), _meta(2))
        threads = aggregate_threads([_hit(1, 0.5), _hit(2, 0.4, doc_id=1)], meta)
        flags = {t.question_id: t.has_accepted_answer for t in threads}
        assert flags == {1: True, 2: False}


def _thread(question_id, rank_score, accepted=False, view_count=None) -> ThreadResult:
    return ThreadResult(
        question_id=question_id,
        similarity=rank_score,
        rank_score=rank_score,
        co_match=False,
        has_accepted_answer=accepted,
        view_count=view_count,
    )


class TestRankThreads:
    def test_accepted_answer_wins_tie(self):
        t1 = _thread(1, 0.9, accepted=False)
        t2 = _thread(2, 0.9, accepted=True)
        assert [t.question_id for t in rank_threads([t1, t2], 2)] == [2, 1]

    def test_similarity_dominates_accepted(self):
        t1 = _thread(1, 0.95, accepted=False)
        t2 = _thread(2, 0.9, accepted=True)
        assert [t.question_id for t in rank_threads([t1, t2], 2)] == [1, 2]

    def test_final_tie_break_is_question_id(self):
        t1 = _thread(10, 0.5)
        t2 = _thread(7, 0.5)
        assert [t.question_id for t in rank_threads([t1, t2], 2)] == [7, 10]

    def test_view_count_breaks_before_id(self):
        t1 = _thread(1, 0.5, view_count=10)
        t2 = _thread(2, 0.5, view_count=900)
        assert [t.question_id for t in rank_threads([t1, t2], 2)] == [2, 1]

    def test_top_n_prefix(self):
        threads = [_thread(i, 0.1 * i) for i in range(1, 8)]
        top = rank_threads(threads, 3)
        assert [t.question_id for t in top] == [7, 6, 5]

    def test_permutation_invariance(self):
        rng = random.Random(2024)
        threads = [
            _thread(
                qid,
                rank_score=rng.choice([0.3, 0.5, 0.5, 0.9]),
                accepted=rng.random() < 0.5,
                view_count=rng.choice([None, 5, 5, 100]),
            )
            for qid in range(50)
        ]
        reference = [t.question_id for t in rank_threads(threads, 10)]
        for _ in range(20):
            shuffled = threads[:]
            rng.shuffle(shuffled)
            assert [t.question_id for t in rank_threads(shuffled, 10)] == reference

    def test_no_threads_invented_or_duplicated(self):
        threads = [_thread(i, 0.2) for i in range(5)]
        out = rank_threads(threads, 10)
        assert sorted(t.question_id for t in out) == list(range(5))

    def test_monotonicity_of_rank_score(self):
        rng = random.Random(9)
        threads = [_thread(i, rng.random()) for i in range(30)]
        base = rank_threads(threads, 30)
        target = base[15]
        boosted = [
            _thread(t.question_id, t.rank_score + (0.2 if t.question_id == target.question_id else 0.0), t.has_accepted_answer, t.view_count)
            for t in threads
        ]
        new_positions = [t.question_id for t in rank_threads(boosted, 30)]
        assert new_positions.index(target.question_id) <= [t.question_id for t in base].index(target.question_id)

    def test_boost_bound(self):
        meta = _store(_meta(1), _meta(11, PostType.ANSWER, parent_id=1))
        for sim in (0.1, 0.5, 0.96, 1.0):
            (thread,) = aggregate_threads([_hit(1, sim), _hit(11, sim - 0.05, doc_id=1)], meta)
            assert thread.rank_score <= min(1.0, 1.05 * thread.similarity) + 1e-12
            assert thread.rank_score >= thread.similarity
