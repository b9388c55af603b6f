"""Deterministic extractive summarization of question descriptions.

Sentences are scored by the mean idf of their known tokens (rare,
specific wording scores high; boilerplate scores low) and selected until
the summary reaches the target fraction of the original length. Output
sentences are verbatim and keep their original order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .textproc import Dictionary, TfIdfModel, tokenize

DEFAULT_RATIO = 0.25
# Below this many characters the text is returned as-is; summarizing a
# short problem statement only destroys information.
NO_SUMMARIZE_THRESHOLD = 280

_SENTENCE_BREAK_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass
class Summary:
    text: str
    original_chars: int
    summary_chars: int
    ratio_achieved: float


def split_sentences(text: str) -> list[str]:
    """Split at newline runs and after [.!?] followed by whitespace."""
    sentences: list[str] = []
    for line in text.splitlines():
        for piece in _SENTENCE_BREAK_RE.split(line):
            piece = piece.strip()
            if piece:
                sentences.append(piece)
    return sentences


def summarize(
    text: str,
    model: TfIdfModel,
    dictionary: Dictionary,
    ratio: float = DEFAULT_RATIO,
    threshold: int = NO_SUMMARIZE_THRESHOLD,
) -> Summary:
    """Extractive summary at roughly ``ratio`` of the original length.

    Sentence score is the mean idf of its dictionary-known tokens (0 when
    none are known); selection is by descending score, earlier sentence
    winning ties, until the accumulated length (one separator accounted
    per sentence) reaches ratio x original length.
    """
    original_chars = len(text)
    if original_chars <= threshold:
        return Summary(
            text=text,
            original_chars=original_chars,
            summary_chars=original_chars,
            ratio_achieved=1.0,
        )

    sentences = split_sentences(text)
    scored = []
    for position, sentence in enumerate(sentences):
        idfs = [
            model.idf(term_id)
            for term_id in (dictionary.get(token) for token in tokenize(sentence))
            if term_id is not None
        ]
        score = sum(idfs) / len(idfs) if idfs else 0.0
        scored.append((-score, position, sentence))
    scored.sort()

    target = ratio * original_chars
    selected_positions: list[int] = []
    accumulated = 0
    for _neg_score, position, sentence in scored:
        selected_positions.append(position)
        accumulated += len(sentence) + 1
        if accumulated >= target:
            break

    selected_positions.sort()
    summary_text = " ".join(sentences[p] for p in selected_positions)
    return Summary(
        text=summary_text,
        original_chars=original_chars,
        summary_chars=len(summary_text),
        ratio_achieved=len(summary_text) / original_chars if original_chars else 1.0,
    )
