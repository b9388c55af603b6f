from __future__ import annotations

import random

from stacksearch.summarize import split_sentences, summarize
from stacksearch.textproc import build_dictionary, fit_tfidf, to_bow, tokenize


class TestSplitSentences:
    def test_punctuation_boundaries(self):
        assert split_sentences("A. B! C?") == ["A.", "B!", "C?"]

    def test_newlines(self):
        assert split_sentences("line1\nline2") == ["line1", "line2"]

    def test_abbreviation_limitation_accepted(self):
        assert split_sentences("e.g. value") == ["e.g.", "value"]

    def test_empty_segments_dropped(self):
        assert split_sentences("one.\n\n\n  \ntwo.") == ["one.", "two."]

    def test_no_split_without_whitespace(self):
        assert split_sentences("v1.2.3 fails") == ["v1.2.3 fails"]


def _model_with_idf_levels():
    # "rare" df=1/N=8 -> idf 3; "midd" df=4 -> idf 1; everything else common.
    docs = [["rare", "midd", "pad"], ["midd", "pad"], ["midd", "pad"], ["midd", "pad"]] + [
        ["pad"]
    ] * 4
    d = build_dictionary(docs)
    model = fit_tfidf([to_bow(tokens, d) for tokens in docs])
    assert model.idf(d.get("rare")) == 3.0
    assert model.idf(d.get("midd")) == 1.0
    return d, model


class TestSummarize:
    def test_short_text_unchanged(self):
        d, model = _model_with_idf_levels()
        text = "short text " * 10  # 110 chars, below threshold
        result = summarize(text, model, d)
        assert result.text == text
        assert result.ratio_achieved == 1.0
        assert result.summary_chars == result.original_chars

    def test_highest_mean_idf_sentence_selected(self):
        d, model = _model_with_idf_levels()
        filler = "pad " * 19  # 76 chars of known low-idf tokens
        s1 = f"rare {filler}one."  # mean idf dominated by "rare"
        s2 = f"midd {filler}two."
        s3 = f"midd {filler}six."
        s4 = f"midd {filler}ten."
        assert len(s1) == len(s2) == len(s3) == len(s4)
        text = " ".join([s2, s1, s3, s4])  # best sentence not first
        assert len(text) > 280
        result = summarize(text, model, d, ratio=0.25)
        assert result.text == s1

    def test_all_unknown_tokens_fall_back_to_order(self):
        d, model = _model_with_idf_levels()
        sentences = [f"zz{i} unknownwords here number {i}." for i in range(12)]
        text = " ".join(sentences)
        assert len(text) > 280
        result = summarize(text, model, d, ratio=0.25)
        # scores all zero -> earliest sentences selected
        assert result.text.startswith(sentences[0])
        chosen = [s for s in sentences if s in result.text]
        assert chosen == sentences[: len(chosen)]

    def test_properties_on_random_texts(self):
        d, model = _model_with_idf_levels()
        rng = random.Random(77)
        vocab = ["rare", "midd", "pad", "novel", "qqq", "alpha9"]
        for _ in range(60):
            sentences = []
            for i in range(rng.randrange(4, 15)):
                words = [f"s{i}u{rng.randrange(1000)}"] + rng.choices(vocab, k=rng.randrange(2, 12))
                sentences.append(" ".join(words) + rng.choice([".", "!", "?"]))
            text = " ".join(sentences)
            if len(text) <= 280:
                continue
            result = summarize(text, model, d, ratio=0.25)
            out_sentences = [s for s in sentences if s in result.text]
            # extractive + order preserving
            assert result.text == " ".join(out_sentences)
            # length bound
            longest_selected = max(len(s) for s in out_sentences)
            assert result.summary_chars < 0.25 * result.original_chars + longest_selected
            assert result.summary_chars <= result.original_chars
            # deterministic
            again = summarize(text, model, d, ratio=0.25)
            assert again == result
