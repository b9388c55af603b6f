"""Code-block and metadata extraction from raw posts.

A post enters the search corpus only if its body carries at least one
non-empty ``<code>`` block; the concatenated block text is the document
that gets indexed. Everything else about the post (type, parent, accepted
answer, title, counters, and the prose describing the problem) goes into
the metadata store that powers ranking and result display.
"""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .ingest import PostType, RawPost

_CODE_OPEN_RE = re.compile(r"<code(?=[\s>/])[^>]*>", re.IGNORECASE)
_CODE_CLOSE_RE = re.compile(r"</code\s*>", re.IGNORECASE)
_TAG_RE = re.compile(r"<[^>]*>")
_WS_RE = re.compile(r"[ \t\r\f\v]+")


@dataclass
class CodeDocument:
    doc_id: int
    post_id: int
    text: str


@dataclass
class PostMeta:
    post_id: int
    post_type: PostType
    creation_date: datetime
    score: int
    parent_id: int | None = None
    accepted_answer_id: int | None = None
    view_count: int | None = None
    title: str | None = None
    desc: str | None = None


def extract_code_blocks(body_html: str) -> list[str]:
    """Return the inner text of each ``<code>`` span, in document order.

    Tolerates garbage: tags may be unbalanced, and a trailing unclosed
    ``<code>`` captures to the end of the input. Markup inside a span is
    stripped before entities are decoded, so code like ``&lt;b&gt;``
    survives as literal ``<b>``.
    """
    blocks: list[str] = []
    pos = 0
    while True:
        open_match = _CODE_OPEN_RE.search(body_html, pos)
        if open_match is None:
            return blocks
        close_match = _CODE_CLOSE_RE.search(body_html, open_match.end())
        if close_match is None:
            inner = body_html[open_match.end() :]
            pos = len(body_html)
        else:
            inner = body_html[open_match.end() : close_match.start()]
            pos = close_match.end()
        blocks.append(html.unescape(_TAG_RE.sub("", inner)))
        if close_match is None:
            return blocks


def build_code_document(post: RawPost, doc_id: int = -1) -> CodeDocument | None:
    """One indexable document per post, or None when it has no usable code."""
    if post.post_type not in (PostType.QUESTION, PostType.ANSWER):
        return None
    blocks = [b for b in extract_code_blocks(post.body_html) if b.strip()]
    if not blocks:
        return None
    return CodeDocument(doc_id=doc_id, post_id=post.post_id, text="\n".join(blocks))


def strip_html(body_html: str) -> str:
    """Prose text of a body: code blocks removed, tags stripped, entities decoded."""
    without_code = []
    pos = 0
    while True:
        open_match = _CODE_OPEN_RE.search(body_html, pos)
        if open_match is None:
            without_code.append(body_html[pos:])
            break
        without_code.append(body_html[pos : open_match.start()])
        close_match = _CODE_CLOSE_RE.search(body_html, open_match.end())
        if close_match is None:
            break
        pos = close_match.end()
    text = html.unescape(_TAG_RE.sub(" ", "".join(without_code)))
    lines = [_WS_RE.sub(" ", ln).strip() for ln in text.split("\n")]
    return "\n".join(ln for ln in lines if ln).strip()


def build_meta(post: RawPost) -> PostMeta:
    """Field-for-field metadata projection; questions also keep their prose."""
    desc = strip_html(post.body_html) if post.post_type is PostType.QUESTION else None
    return PostMeta(
        post_id=post.post_id,
        post_type=post.post_type,
        creation_date=post.creation_date,
        score=post.score,
        parent_id=post.parent_id,
        accepted_answer_id=post.accepted_answer_id,
        view_count=post.view_count,
        title=post.title,
        desc=desc or None,
    )


def build_corpus(posts: Iterable[RawPost]) -> tuple[list[CodeDocument], dict[int, PostMeta]]:
    """Assemble the index corpus and metadata store from ingested posts.

    doc_ids are assigned densely in post_id order so rebuilds over the
    same input are reproducible regardless of input ordering.
    """
    pending: list[CodeDocument] = []
    meta: dict[int, PostMeta] = {}
    for post in posts:
        if post.post_type is PostType.OTHER:
            continue
        if post.post_id in meta:
            raise ValueError(f"duplicate post_id {post.post_id}")
        meta[post.post_id] = build_meta(post)
        doc = build_code_document(post)
        if doc is not None:
            pending.append(doc)
    pending.sort(key=lambda d: d.post_id)
    documents = [
        CodeDocument(doc_id=i, post_id=d.post_id, text=d.text) for i, d in enumerate(pending)
    ]
    return documents, meta


def _iso_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def write_corpus(documents: Iterable[CodeDocument], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as out:
        for doc in documents:
            record = {"doc_id": doc.doc_id, "post_id": doc.post_id, "text": doc.text}
            out.write(json.dumps(record, ensure_ascii=False))
            out.write("\n")
            count += 1
    return count


def read_corpus(path: str | Path) -> Iterator[CodeDocument]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                record = json.loads(line)
                yield CodeDocument(record["doc_id"], record["post_id"], record["text"])


def meta_to_record(meta: PostMeta) -> dict:
    record: dict = {
        "post_id": meta.post_id,
        "post_type": meta.post_type.value,
        "creation_date": _iso_utc(meta.creation_date),
        "score": meta.score,
    }
    for name in ("parent_id", "accepted_answer_id", "view_count", "title", "desc"):
        value = getattr(meta, name)
        if value is not None:
            record[name] = value
    return record


def record_to_meta(record: dict) -> PostMeta:
    raw_date = record["creation_date"]
    if raw_date.endswith("Z"):
        raw_date = raw_date[:-1] + "+00:00"
    return PostMeta(
        post_id=record["post_id"],
        post_type=PostType(record["post_type"]),
        creation_date=datetime.fromisoformat(raw_date),
        score=record["score"],
        parent_id=record.get("parent_id"),
        accepted_answer_id=record.get("accepted_answer_id"),
        view_count=record.get("view_count"),
        title=record.get("title"),
        desc=record.get("desc"),
    )


def write_meta(metas: Iterable[PostMeta], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as out:
        for meta in sorted(metas, key=lambda m: m.post_id):
            out.write(json.dumps(meta_to_record(meta), ensure_ascii=False))
            out.write("\n")
            count += 1
    return count


def read_meta(path: str | Path) -> dict[int, PostMeta]:
    store: dict[int, PostMeta] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                meta = record_to_meta(json.loads(line))
                store[meta.post_id] = meta
    return store
