from __future__ import annotations

import io

import pytest

import fixture_gen
from stacksearch import engine, extract, ingest
from stacksearch.extract import CodeDocument


@pytest.fixture(scope="session")
def paper_xml_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("dump") / "paper_posts.xml"
    path.write_text(fixture_gen.paper_xml(), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def malformed_xml_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("dump") / "malformed_posts.xml"
    path.write_text(fixture_gen.malformed_xml(), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def paper_posts():
    raw = fixture_gen.paper_xml().encode("utf-8")
    return list(ingest.stream_rows(io.BytesIO(raw)))


@pytest.fixture(scope="session")
def paper_corpus(paper_posts):
    return extract.build_corpus(paper_posts)


@pytest.fixture(scope="session")
def paper_engine(paper_corpus):
    documents, meta = paper_corpus
    inverted, dictionary, model = engine.build_index_from_documents(documents)
    return engine.SearchEngine(dictionary, model, inverted, meta)


@pytest.fixture()
def tiny_documents():
    # Two-document corpus: "a b a" and "a c"; df(a)=2 df(b)=1 df(c)=1.
    return [
        CodeDocument(doc_id=0, post_id=101, text="a b a"),
        CodeDocument(doc_id=1, post_id=102, text="a c"),
    ]
