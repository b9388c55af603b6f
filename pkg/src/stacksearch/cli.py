"""Operator command line: convert, extract, build, query, serve, stats.

Machine-readable key=value stat lines go to stdout; logs go to stderr.
Exit codes: 0 success, 1 query with no results, 2 unreadable/corrupt
input, 3 unwritable output, 4 empty corpus, 5 bind failure.
"""

from __future__ import annotations

import argparse
import logging
import socket
import sys
from pathlib import Path

from . import engine as engine_mod
from . import extract, index as index_mod, ingest
from .ranking import DEFAULT_DISPLAY_K
from .textproc import EmptyCorpus

log = logging.getLogger("stacksearch")

EXIT_OK = 0
EXIT_NO_RESULTS = 1
EXIT_UNREADABLE = 2
EXIT_UNWRITABLE = 3
EXIT_EMPTY_CORPUS = 4
EXIT_BIND_FAILURE = 5


def _stats_line(**fields) -> str:
    return " ".join(f"{key}={value}" for key, value in fields.items())


def cmd_convert(args: argparse.Namespace) -> int:
    try:
        stats = ingest.convert(args.xml_path, args.out_path)
    except ingest.UnreadableSource as exc:
        log.error("cannot read %s: %s", args.xml_path, exc)
        return EXIT_UNREADABLE
    print(
        _stats_line(
            rows_seen=stats.rows_seen,
            rows_emitted=stats.rows_emitted,
            rows_skipped_malformed=stats.rows_skipped_malformed,
            rows_skipped_schema=stats.rows_skipped_schema,
            bytes_read=stats.bytes_read,
        )
    )
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    try:
        documents, meta = extract.build_corpus(ingest.read_rows(args.rows_path))
    except ingest.UnreadableSource as exc:
        log.error("cannot read %s: %s", args.rows_path, exc)
        return EXIT_UNREADABLE
    try:
        n_docs = extract.write_corpus(documents, args.corpus_path)
        n_meta = extract.write_meta(meta.values(), args.meta_path)
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_UNWRITABLE
    print(_stats_line(documents=n_docs, meta_records=n_meta))
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    try:
        report = engine_mod.build_index_dir(args.rows_path, args.index_dir)
    except ingest.UnreadableSource as exc:
        log.error("cannot read %s: %s", args.rows_path, exc)
        return EXIT_UNREADABLE
    except EmptyCorpus as exc:
        log.error("empty corpus: %s", exc)
        return EXIT_EMPTY_CORPUS
    except OSError as exc:
        log.error("cannot write index to %s: %s", args.index_dir, exc)
        return EXIT_UNWRITABLE
    print(
        _stats_line(
            docs=report.doc_count,
            vocab=report.vocab_size,
            postings=report.postings_count,
            seconds=f"{report.seconds:.3f}",
        )
    )
    return EXIT_OK


def _load_engine(index_dir: str) -> engine_mod.SearchEngine | None:
    try:
        return engine_mod.SearchEngine.load(index_dir)
    except (index_mod.CorruptIndex, OSError) as exc:
        log.error("cannot load index from %s: %s", index_dir, exc)
        return None


def cmd_query(args: argparse.Namespace) -> int:
    loaded = _load_engine(args.index_dir)
    if loaded is None:
        return EXIT_UNREADABLE
    stacktrace = sys.stdin.read()
    outcome = loaded.search(stacktrace, k=args.k)
    log.info(
        "query tokens: %d total, %d known",
        outcome.query_tokens_total,
        outcome.query_tokens_known,
    )
    for rank, result in enumerate(outcome.results, start=1):
        title = result.title or ""
        print(f"{rank}\t{result.question_id}\t{result.similarity:.6f}\t{result.url}\t{title}")
    return EXIT_OK if outcome.results else EXIT_NO_RESULTS


def _parse_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args: argparse.Namespace) -> int:
    loaded = _load_engine(args.index_dir)
    if loaded is None:
        return EXIT_UNREADABLE
    host, port = _parse_bind(args.bind)
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
        probe.close()
    except OSError as exc:
        log.error("cannot bind %s:%d: %s", host, port, exc)
        return EXIT_BIND_FAILURE

    from .service import create_app
    import uvicorn

    ui_dir = args.ui_dir if args.ui_dir and Path(args.ui_dir).is_dir() else None
    if args.ui_dir and ui_dir is None:
        log.warning("ui directory %s not found; serving API only", args.ui_dir)
    app = create_app(engine=loaded, ui_dir=ui_dir, default_k=args.k)
    log.info("serving on http://%s:%d", host, port)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        log.error("server failed to bind: %s", exc)
        return EXIT_BIND_FAILURE
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    loaded = _load_engine(args.index_dir)
    if loaded is None:
        return EXIT_UNREADABLE
    print(_stats_line(**loaded.stats()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stacksearch",
        description="Stacktrace similarity search over Stack Exchange post dumps",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="XML dump -> intermediate row file")
    p.add_argument("xml_path")
    p.add_argument("out_path")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("extract", help="row file -> corpus and metadata files")
    p.add_argument("rows_path")
    p.add_argument("corpus_path")
    p.add_argument("meta_path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build", help="row file -> searchable index directory")
    p.add_argument("rows_path")
    p.add_argument("index_dir")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="search an index with a stacktrace from stdin")
    p.add_argument("index_dir")
    p.add_argument("-k", type=int, default=DEFAULT_DISPLAY_K, help="results to show")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="run the HTTP search service")
    p.add_argument("index_dir")
    p.add_argument("--bind", default="127.0.0.1:8080", help="host:port")
    p.add_argument("-k", type=int, default=DEFAULT_DISPLAY_K, help="default display k")
    p.add_argument("--ui-dir", default=None, help="static web UI bundle to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("stats", help="print index statistics")
    p.add_argument("index_dir")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
