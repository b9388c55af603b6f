"""Streaming ingest of Stack Exchange style XML post dumps.

The dump is a single XML document whose payload is a flat sequence of
self-closing ``<row .../>`` elements. Files can be tens of gigabytes, and
real dumps contain occasional broken rows, so parsing is a byte-level
scan with constant memory: a malformed row is counted and skipped, never
fatal.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator


class UnreadableSource(Exception):
    """Raised when the input stream or file itself cannot be read."""


class RowError(ValueError):
    """A structurally valid row that fails the post schema."""

    def __init__(self, kind: str, field: str):
        super().__init__(f"{kind}: {field}")
        self.kind = kind
        self.field = field

    @classmethod
    def missing(cls, field: str) -> "RowError":
        return cls("missing_field", field)

    @classmethod
    def bad_value(cls, field: str) -> "RowError":
        return cls("bad_value", field)


class PostType(Enum):
    QUESTION = "q"
    ANSWER = "a"
    OTHER = "other"


@dataclass
class RawPost:
    post_id: int
    post_type: PostType
    type_code: int
    creation_date: datetime
    body_html: str
    score: int = 0
    parent_id: int | None = None
    accepted_answer_id: int | None = None
    view_count: int | None = None
    title: str | None = None
    tags: str | None = None


@dataclass
class IngestStats:
    rows_seen: int = 0
    rows_emitted: int = 0
    rows_skipped_malformed: int = 0
    rows_skipped_schema: int = 0
    bytes_read: int = 0

    def conserved(self) -> bool:
        return self.rows_seen == (
            self.rows_emitted + self.rows_skipped_malformed + self.rows_skipped_schema
        )


_ENTITY_RE = re.compile(r"&(lt|gt|amp|quot|apos|#[0-9]+|#x[0-9a-fA-F]+);")
_NAMED_ENTITIES = {"lt": "<", "gt": ">", "amp": "&", "quot": '"', "apos": "'"}
_ATTR_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.:-]*")

_ROW_START = b"<row"
_ROW_END = b"/>"
_CHUNK_SIZE = 1 << 16


def decode_entities(value: str) -> str:
    """Decode XML entity references, rejecting bare or unknown ``&``."""
    if "&" not in value:
        return value
    out: list[str] = []
    pos = 0
    while True:
        amp = value.find("&", pos)
        if amp < 0:
            out.append(value[pos:])
            return "".join(out)
        m = _ENTITY_RE.match(value, amp)
        if m is None:
            raise ValueError(f"invalid entity reference at offset {amp}")
        out.append(value[pos:amp])
        ref = m.group(1)
        if ref in _NAMED_ENTITIES:
            out.append(_NAMED_ENTITIES[ref])
        elif ref.startswith("#x"):
            out.append(chr(int(ref[2:], 16)))
        else:
            out.append(chr(int(ref[1:])))
        pos = m.end()


def parse_attributes(text: str) -> dict[str, str]:
    """Parse ``name="value"`` pairs; raises ValueError on any broken syntax."""
    attrs: dict[str, str] = {}
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return attrs
        m = _ATTR_NAME_RE.match(text, pos)
        if m is None:
            raise ValueError(f"expected attribute name at offset {pos}")
        name = m.group(0)
        pos = m.end()
        if pos >= n or text[pos] != "=":
            raise ValueError(f"expected '=' after attribute {name!r}")
        pos += 1
        if pos >= n or text[pos] not in "\"'":
            raise ValueError(f"expected quoted value for attribute {name!r}")
        quote = text[pos]
        end = text.find(quote, pos + 1)
        if end < 0:
            raise ValueError(f"unterminated value for attribute {name!r}")
        attrs[name] = decode_entities(text[pos + 1 : end])
        pos = end + 1
    return attrs


def _parse_int(attrs: dict[str, str], name: str, minimum: int | None = None) -> int:
    try:
        value = int(attrs[name])
    except ValueError:
        raise RowError.bad_value(name) from None
    if minimum is not None and value < minimum:
        raise RowError.bad_value(name)
    return value


def _parse_date(attrs: dict[str, str], name: str) -> datetime:
    raw = attrs[name].strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError:
        raise RowError.bad_value(name) from None
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def parse_row(attrs: dict[str, str]) -> RawPost:
    """Map raw attribute strings to a typed RawPost.

    Unknown attributes are ignored. Raises RowError when Id, PostTypeId or
    Body is absent, or when a numeric/date field does not parse.
    """
    for required in ("Id", "PostTypeId", "Body"):
        if not attrs.get(required):
            raise RowError.missing(required)

    post_id = _parse_int(attrs, "Id", minimum=1)
    type_code = _parse_int(attrs, "PostTypeId")
    if type_code == 1:
        post_type = PostType.QUESTION
    elif type_code == 2:
        post_type = PostType.ANSWER
    else:
        post_type = PostType.OTHER

    if "CreationDate" not in attrs:
        raise RowError.missing("CreationDate")
    creation_date = _parse_date(attrs, "CreationDate")

    score = _parse_int(attrs, "Score") if "Score" in attrs else 0
    view_count = _parse_int(attrs, "ViewCount", minimum=0) if "ViewCount" in attrs else None

    parent_id = None
    if post_type is PostType.ANSWER:
        if "ParentId" not in attrs:
            raise RowError.missing("ParentId")
        parent_id = _parse_int(attrs, "ParentId", minimum=1)

    accepted_answer_id = None
    if post_type is PostType.QUESTION and "AcceptedAnswerId" in attrs:
        accepted_answer_id = _parse_int(attrs, "AcceptedAnswerId", minimum=1)

    return RawPost(
        post_id=post_id,
        post_type=post_type,
        type_code=type_code,
        creation_date=creation_date,
        body_html=attrs["Body"],
        score=score,
        parent_id=parent_id,
        accepted_answer_id=accepted_answer_id,
        view_count=view_count,
        title=attrs.get("Title"),
        tags=attrs.get("Tags"),
    )


def _row_boundary_ok(buffer: bytes, pos: int) -> bool:
    # "<row" must be a whole tag name, not a prefix of e.g. "<rowset".
    end = pos + len(_ROW_START)
    if end >= len(buffer):
        return True
    return buffer[end : end + 1] in (b" ", b"\t", b"\r", b"\n", b"/", b">")


def stream_rows(source: BinaryIO, stats: IngestStats | None = None) -> Iterator[RawPost]:
    """Yield RawPost records from an XML dump stream, in file order.

    ``stats`` is updated in place while iterating and is final once the
    iterator is exhausted. Memory use is bounded by the largest single
    row, not by the file size. Malformed rows (broken quoting, bad entity
    references, truncation) are counted and skipped.
    """
    if stats is None:
        stats = IngestStats()

    buffer = b""
    scan_from = 0
    eof = False

    def fill() -> bool:
        nonlocal buffer, eof
        try:
            chunk = source.read(_CHUNK_SIZE)
        except OSError as exc:
            raise UnreadableSource(str(exc)) from exc
        if not chunk:
            eof = True
            return False
        stats.bytes_read += len(chunk)
        buffer += chunk
        return True

    while True:
        start = buffer.find(_ROW_START, scan_from)
        if start < 0:
            if eof:
                return
            # Keep only the tail that could hold a split "<row" token.
            keep = max(len(buffer) - len(_ROW_START) + 1, 0)
            buffer = buffer[keep:]
            scan_from = 0
            if not fill():
                if buffer.find(_ROW_START) < 0:
                    return
            continue
        if not _row_boundary_ok(buffer, start):
            scan_from = start + 1
            continue
        if start + len(_ROW_START) >= len(buffer) and not eof:
            # Boundary byte not available yet; trim and refill.
            buffer = buffer[start:]
            scan_from = 0
            fill()
            continue

        # Locate the end of this row: the first "/>", unless another row
        # begins earlier (truncated row) or the stream ends first.
        search_at = start + len(_ROW_START)
        while True:
            end = buffer.find(_ROW_END, search_at)
            nxt = buffer.find(_ROW_START, search_at)
            while nxt >= 0 and not _row_boundary_ok(buffer, nxt):
                nxt = buffer.find(_ROW_START, nxt + 1)
            if end >= 0 and (nxt < 0 or end < nxt):
                row_bytes = buffer[start + len(_ROW_START) : end]
                resume = end + len(_ROW_END)
                break
            if nxt >= 0 and (end < 0 or nxt < end):
                # New row started before this one closed.
                row_bytes = None
                resume = nxt
                break
            if eof:
                row_bytes = None
                resume = len(buffer)
                break
            # Back off far enough to re-see either token split by the refill.
            search_at = max(len(buffer) - len(_ROW_START) + 1, start + len(_ROW_START))
            fill()

        stats.rows_seen += 1
        if row_bytes is None:
            stats.rows_skipped_malformed += 1
        else:
            try:
                attrs = parse_attributes(row_bytes.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                stats.rows_skipped_malformed += 1
            else:
                try:
                    post = parse_row(attrs)
                except RowError:
                    stats.rows_skipped_schema += 1
                else:
                    stats.rows_emitted += 1
                    yield post

        buffer = buffer[resume:]
        scan_from = 0


def _iso_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def post_to_record(post: RawPost) -> dict:
    """Intermediate-file fields, in their fixed order; absent optionals omitted."""
    record: dict = {
        "post_id": post.post_id,
        "post_type": post.post_type.value,
    }
    if post.parent_id is not None:
        record["parent_id"] = post.parent_id
    if post.accepted_answer_id is not None:
        record["accepted_answer_id"] = post.accepted_answer_id
    record["creation_date"] = _iso_utc(post.creation_date)
    record["score"] = post.score
    if post.view_count is not None:
        record["view_count"] = post.view_count
    if post.title is not None:
        record["title"] = post.title
    record["body_html"] = post.body_html
    if post.tags is not None:
        record["tags"] = post.tags
    return record


def record_to_post(record: dict) -> RawPost:
    post_type = PostType(record["post_type"])
    raw_date = record["creation_date"]
    if raw_date.endswith("Z"):
        raw_date = raw_date[:-1] + "+00:00"
    return RawPost(
        post_id=record["post_id"],
        post_type=post_type,
        type_code=1 if post_type is PostType.QUESTION else 2,
        creation_date=datetime.fromisoformat(raw_date),
        body_html=record["body_html"],
        score=record["score"],
        parent_id=record.get("parent_id"),
        accepted_answer_id=record.get("accepted_answer_id"),
        view_count=record.get("view_count"),
        title=record.get("title"),
        tags=record.get("tags"),
    )


def write_rows(
    records: Iterable[RawPost], sink: str | Path, stats: IngestStats | None = None
) -> IngestStats:
    """Write question/answer records as one JSON object per line.

    Other-typed rows cannot be represented in the intermediate format and
    are dropped here (they are excluded downstream anyway). Writes go
    through a ``.partial`` file that is renamed on success and removed on
    failure. Returns the shared ingest stats when ``records`` is a live
    stream updating one, else a synthesized count of written rows.
    """
    sink = Path(sink)
    partial = sink.with_name(sink.name + ".partial")
    written = 0
    try:
        with open(partial, "w", encoding="utf-8") as out:
            for post in records:
                if post.post_type is PostType.OTHER:
                    continue
                out.write(json.dumps(post_to_record(post), ensure_ascii=False))
                out.write("\n")
                written += 1
    except BaseException:
        if partial.exists():
            os.unlink(partial)
        raise
    os.replace(partial, sink)
    if stats is None:
        stats = IngestStats(rows_seen=written, rows_emitted=written)
    return stats


def read_rows(path: str | Path) -> Iterator[RawPost]:
    """Re-read an intermediate file written by write_rows."""
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise UnreadableSource(str(exc)) from exc
    with handle:
        for line in handle:
            line = line.strip()
            if line:
                yield record_to_post(json.loads(line))


def convert(xml_path: str | Path, out_path: str | Path) -> IngestStats:
    """Run the full ingest: XML dump in, intermediate row file out."""
    stats = IngestStats()
    try:
        source = open(xml_path, "rb")
    except OSError as exc:
        raise UnreadableSource(str(exc)) from exc
    with source:
        write_rows(stream_rows(source, stats), out_path, stats)
    return stats
