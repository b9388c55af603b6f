"""Sparse inverted index with exact top-k cosine retrieval.

Document vectors are L2-normalized before they are transposed into
postings, so a query similarity is a plain dot product accumulated over
the query's posting lists. Weights are quantized to float32 at build
time (the on-disk width); score accumulation is double precision.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .textproc import TOKENIZER_SPEC, Dictionary, SparseVector, TfIdfModel

FORMAT_NAME = "stacksearch-index"
FORMAT_VERSION = 1

MANIFEST_FILE = "manifest.json"
DICTIONARY_FILE = "dictionary.txt"
MODEL_FILE = "model.txt"
POSTINGS_FILE = "postings.bin"
DOC_TABLE_FILE = "doctable.txt"

_POSTINGS_MAGIC = b"STKPOST1"
_PAIR_DTYPE = np.dtype([("doc", "<u4"), ("weight", "<f4")])

DEFAULT_K = 30


class DimensionMismatch(ValueError):
    """A vector term id exceeds the model vocabulary."""


class ConfigMismatch(ValueError):
    """Query was vectorized under a different tokenizer/model configuration."""


class CorruptIndex(Exception):
    """Index directory is missing, truncated, or fails verification."""


@dataclass
class SearchHit:
    doc_id: int
    post_id: int
    similarity: float


class InvertedIndex:
    def __init__(
        self,
        n_docs: int,
        postings: dict[int, tuple[np.ndarray, np.ndarray]],
        doc_table: np.ndarray,
        config_digest: str,
    ):
        self.n_docs = n_docs
        self.postings = postings
        self.doc_table = doc_table
        self.config_digest = config_digest

    @property
    def postings_count(self) -> int:
        return sum(ids.size for ids, _ in self.postings.values())


def config_digest(dictionary: Dictionary, model: TfIdfModel) -> str:
    """Fingerprint of everything a query vector depends on."""
    hasher = hashlib.sha256()
    hasher.update(TOKENIZER_SPEC.encode("utf-8"))
    hasher.update(struct.pack("<q", model.n_docs))
    for token in dictionary.tokens_by_id():
        hasher.update(token.encode("utf-8"))
        hasher.update(b"\x00")
    for term_id in sorted(model.df):
        hasher.update(struct.pack("<qq", term_id, model.df[term_id]))
    return hasher.hexdigest()


def build_index(
    vectors: Mapping[int, SparseVector] | Sequence[SparseVector],
    doc_table: Sequence[int],
    vocab_size: int,
    digest: str,
) -> InvertedIndex:
    """Transpose per-document vectors into term postings.

    ``vectors`` is keyed by dense doc_id; documents with a zero vector
    stay in the doc table but get no postings. Raises DimensionMismatch
    when a term id falls outside the vocabulary.
    """
    n_docs = len(doc_table)
    acc_ids: dict[int, list[int]] = {}
    acc_weights: dict[int, list[float]] = {}
    items = vectors.items() if isinstance(vectors, Mapping) else enumerate(vectors)
    for doc_id, vector in sorted(items):
        if not 0 <= doc_id < n_docs:
            raise ValueError(f"doc_id {doc_id} outside doc table")
        for term_id, weight in vector:
            if term_id >= vocab_size:
                raise DimensionMismatch(
                    f"term id {term_id} >= vocabulary size {vocab_size}"
                )
            acc_ids.setdefault(term_id, []).append(doc_id)
            acc_weights.setdefault(term_id, []).append(weight)
    postings = {
        term_id: (
            np.asarray(acc_ids[term_id], dtype=np.uint32),
            np.asarray(acc_weights[term_id], dtype=np.float32),
        )
        for term_id in acc_ids
    }
    return InvertedIndex(
        n_docs=n_docs,
        postings=postings,
        doc_table=np.asarray(doc_table, dtype=np.int64),
        config_digest=digest,
    )


def query_topk(
    index: InvertedIndex,
    query: SparseVector,
    k: int = DEFAULT_K,
    expected_digest: str | None = None,
) -> list[SearchHit]:
    """Exact top-k by cosine, descending; ties broken by doc_id ascending."""
    if k <= 0:
        raise ValueError("k must be positive")
    if expected_digest is not None and expected_digest != index.config_digest:
        raise ConfigMismatch("query model digest does not match index digest")
    if not query or index.n_docs == 0:
        return []

    scores = np.zeros(index.n_docs, dtype=np.float64)
    for term_id, q_weight in query:
        posting = index.postings.get(term_id)
        if posting is not None:
            ids, weights = posting
            scores[ids] += q_weight * weights

    nonzero = np.flatnonzero(scores > 0.0)
    if nonzero.size == 0:
        return []
    if nonzero.size <= k:
        chosen = nonzero
    else:
        subset = scores[nonzero]
        part = np.argpartition(-subset, k - 1)[:k]
        threshold = subset[part].min()
        above = nonzero[subset > threshold]
        ties = nonzero[subset == threshold]
        chosen = np.concatenate([above, ties[: k - above.size]])

    order = np.lexsort((chosen, -scores[chosen]))
    chosen = chosen[order]
    return [
        SearchHit(
            doc_id=int(doc_id),
            post_id=int(index.doc_table[doc_id]),
            similarity=min(float(scores[doc_id]), 1.0),
        )
        for doc_id in chosen
    ]


def _sha256_file(path: Path) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def _write_postings(index: InvertedIndex, path: Path) -> None:
    with open(path, "wb") as out:
        out.write(_POSTINGS_MAGIC)
        out.write(struct.pack("<I", len(index.postings)))
        for term_id in sorted(index.postings):
            ids, weights = index.postings[term_id]
            out.write(struct.pack("<II", term_id, ids.size))
            pairs = np.empty(ids.size, dtype=_PAIR_DTYPE)
            pairs["doc"] = ids
            pairs["weight"] = weights
            out.write(pairs.tobytes())


def _read_postings(
    path: Path, n_docs: int, vocab_size: int
) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    blob = path.read_bytes()
    if blob[: len(_POSTINGS_MAGIC)] != _POSTINGS_MAGIC:
        raise CorruptIndex("postings file: bad magic")
    offset = len(_POSTINGS_MAGIC)
    try:
        (term_count,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        postings: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for _ in range(term_count):
            term_id, size = struct.unpack_from("<II", blob, offset)
            offset += 8
            end = offset + size * _PAIR_DTYPE.itemsize
            if end > len(blob):
                raise CorruptIndex("postings file: truncated posting list")
            pairs = np.frombuffer(blob, dtype=_PAIR_DTYPE, count=size, offset=offset)
            offset = end
            if term_id in postings or term_id >= vocab_size:
                raise CorruptIndex(f"postings file: invalid term id {term_id}")
            ids = pairs["doc"].astype(np.uint32)
            if ids.size and (ids[-1] >= n_docs or np.any(np.diff(ids.astype(np.int64)) <= 0)):
                raise CorruptIndex("postings file: doc ids not strictly increasing")
            postings[term_id] = (ids, pairs["weight"].astype(np.float32))
    except struct.error as exc:
        raise CorruptIndex("postings file: truncated") from exc
    if offset != len(blob):
        raise CorruptIndex("postings file: trailing bytes")
    return postings


def save_index(
    directory: str | Path,
    index: InvertedIndex,
    dictionary: Dictionary,
    model: TfIdfModel,
    extra_names: Iterable[str] = (),
) -> None:
    """Persist the index directory; output bytes are input-deterministic.

    ``extra_names`` are files already present in the directory (for
    example the metadata store) to cover with manifest checksums.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dictionary.save(directory / DICTIONARY_FILE)
    model.save(directory / MODEL_FILE, vocab_size=len(dictionary))
    _write_postings(index, directory / POSTINGS_FILE)
    with open(directory / DOC_TABLE_FILE, "w", encoding="utf-8", newline="\n") as out:
        for doc_id, post_id in enumerate(index.doc_table):
            out.write(f"{doc_id}\t{int(post_id)}\n")

    names = [DICTIONARY_FILE, MODEL_FILE, POSTINGS_FILE, DOC_TABLE_FILE, *extra_names]
    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "doc_count": index.n_docs,
        "vocab_size": len(dictionary),
        "config_digest": index.config_digest,
        "checksums": {name: _sha256_file(directory / name) for name in names},
    }
    with open(directory / MANIFEST_FILE, "w", encoding="utf-8", newline="\n") as out:
        json.dump(manifest, out, indent=2, sort_keys=True)
        out.write("\n")


def verify_index_dir(directory: str | Path) -> dict:
    """Manifest + checksum verification; returns the parsed manifest."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_FILE
    if not manifest_path.is_file():
        raise CorruptIndex(f"missing {MANIFEST_FILE} in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise CorruptIndex("manifest is not valid JSON") from exc
    if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_NAME:
        raise CorruptIndex("manifest format mismatch")
    if manifest.get("version") != FORMAT_VERSION:
        raise CorruptIndex(f"unsupported index version {manifest.get('version')!r}")
    checksums = manifest.get("checksums")
    required = {DICTIONARY_FILE, MODEL_FILE, POSTINGS_FILE, DOC_TABLE_FILE}
    if not isinstance(checksums, dict) or not required.issubset(checksums):
        raise CorruptIndex("manifest checksums incomplete")
    for name, expected in checksums.items():
        target = directory / name
        if not target.is_file():
            raise CorruptIndex(f"missing index file {name}")
        if _sha256_file(target) != expected:
            raise CorruptIndex(f"checksum mismatch for {name}")
    return manifest


def load_index(directory: str | Path) -> InvertedIndex:
    """Load and fully verify a saved index.

    Raises CorruptIndex on any inconsistency: checksum or digest
    mismatch, truncation, or cross-file disagreement.
    """
    directory = Path(directory)
    manifest = verify_index_dir(directory)

    dictionary = _load_checked(Dictionary.load, directory / DICTIONARY_FILE)
    model, model_vocab = _load_checked(TfIdfModel.load, directory / MODEL_FILE)
    doc_table = _load_doc_table(directory / DOC_TABLE_FILE)

    if len(doc_table) != manifest.get("doc_count"):
        raise CorruptIndex("doc table length disagrees with manifest")
    if len(dictionary) != manifest.get("vocab_size") or model_vocab != len(dictionary):
        raise CorruptIndex("vocabulary size disagrees with manifest")
    digest = config_digest(dictionary, model)
    if digest != manifest.get("config_digest"):
        raise CorruptIndex("config digest mismatch")

    postings = _read_postings(
        directory / POSTINGS_FILE, n_docs=len(doc_table), vocab_size=len(dictionary)
    )
    return InvertedIndex(
        n_docs=len(doc_table),
        postings=postings,
        doc_table=doc_table,
        config_digest=digest,
    )


def _load_checked(loader, path: Path):
    try:
        return loader(path)
    except (ValueError, IndexError) as exc:
        raise CorruptIndex(f"{path.name}: {exc}") from exc


def _load_doc_table(path: Path) -> np.ndarray:
    post_ids: list[int] = []
    with open(path, "r", encoding="utf-8") as handle:
        for expected_doc_id, line in enumerate(handle):
            line = line.strip()
            if not line:
                continue
            try:
                doc_id_text, post_id_text = line.split("\t")
                doc_id, post_id = int(doc_id_text), int(post_id_text)
            except ValueError as exc:
                raise CorruptIndex(f"doc table: bad line {expected_doc_id}") from exc
            if doc_id != expected_doc_id:
                raise CorruptIndex("doc table: doc ids not dense")
            post_ids.append(post_id)
    return np.asarray(post_ids, dtype=np.int64)
