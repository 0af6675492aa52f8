"""Parsing and chunking behavior, including the arithmetic invariants."""

import json

import pytest

from embedsim import corpus
from embedsim.errors import ParseError, ValidationError


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


class TestParseCorpus:
    def test_basic_fields(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        write_jsonl(f, [{"_id": "d1", "title": "T", "text": "hello world"}])
        docs = corpus.parse_corpus(f)
        assert docs == [corpus.Document("d1", "T", "hello world")]

    def test_empty_file(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        f.write_text("")
        assert corpus.parse_corpus(f) == []

    def test_title_optional(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        write_jsonl(f, [{"_id": "d1", "text": "x"}])
        assert corpus.parse_corpus(f)[0].title == ""

    def test_duplicate_id_rejected(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        write_jsonl(f, [{"_id": "d1", "text": "a"}, {"_id": "d1", "text": "b"}])
        with pytest.raises(ParseError, match="line 2.*duplicate"):
            corpus.parse_corpus(f)

    def test_malformed_line_names_line_number(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        f.write_text('{"_id": "d1", "text": "ok"}\nnot json at all\n')
        with pytest.raises(ParseError, match="line 2"):
            corpus.parse_corpus(f)

    def test_missing_text_rejected(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        write_jsonl(f, [{"_id": "d1", "title": "T"}])
        with pytest.raises(ParseError, match="text"):
            corpus.parse_corpus(f)

    def test_order_preserved(self, tmp_path):
        f = tmp_path / "corpus.jsonl"
        ids = [f"d{i}" for i in range(50)]
        write_jsonl(f, [{"_id": i, "text": "t"} for i in ids])
        assert [d.doc_id for d in corpus.parse_corpus(f)] == ids


class TestParseQueries:
    def test_single_line(self, tmp_path):
        f = tmp_path / "queries.jsonl"
        write_jsonl(f, [{"_id": "q1", "text": "what is x"}])
        qs = corpus.parse_queries(f, dataset_id="ds")
        assert qs.queries == [("q1", "what is x")]
        assert qs.dataset_id == "ds"

    def test_dataset_id_defaults_to_parent_dir(self, tmp_path):
        d = tmp_path / "nfcorpus"
        d.mkdir()
        f = d / "queries.jsonl"
        write_jsonl(f, [{"_id": "q1", "text": "t"}])
        assert corpus.parse_queries(f).dataset_id == "nfcorpus"

    def test_missing_text_is_parse_error(self, tmp_path):
        f = tmp_path / "queries.jsonl"
        write_jsonl(f, [{"_id": "q1"}])
        with pytest.raises(ParseError):
            corpus.parse_queries(f)


class TestTokenize:
    def test_whitespace_collapses_runs(self):
        assert corpus.tokenize("a b  c", "whitespace") == ["a", "b", "c"]

    def test_empty_string(self):
        assert corpus.tokenize("", "whitespace") == []

    def test_unknown_tokenizer(self):
        with pytest.raises(ValidationError, match="no-such-tok"):
            corpus.tokenize("x", "no-such-tok")

    def test_registration(self):
        corpus.register_tokenizer("chars-test", list)
        assert corpus.tokenize("ab", "chars-test") == ["a", "b"]
        del corpus._TOKENIZERS["chars-test"]


def make_doc(n_tokens, doc_id="d"):
    return corpus.Document(doc_id, "", " ".join(f"t{i}" for i in range(n_tokens)))


class TestChunkDocument:
    def test_600_tokens_chunked_at_256(self):
        chunks = corpus.chunk_document(make_doc(600), 256)
        assert [c.token_count for c in chunks] == [256, 256, 88]
        assert [c.key.chunk_index for c in chunks] == [0, 1, 2]

    def test_exact_fit_single_chunk(self):
        chunks = corpus.chunk_document(make_doc(256), 256)
        assert len(chunks) == 1
        assert chunks[0].key == corpus.ChunkKey("d", 0)

    def test_short_doc_keeps_partial(self):
        chunks = corpus.chunk_document(make_doc(10), 256)
        assert [c.token_count for c in chunks] == [10]

    def test_empty_doc_yields_nothing(self):
        assert corpus.chunk_document(corpus.Document("d", "", ""), 256) == []

    def test_title_prepended(self):
        doc = corpus.Document("d", "alpha beta", "gamma")
        chunks = corpus.chunk_document(doc, 2)
        assert chunks[0].text == "alpha beta"
        assert chunks[1].text == "gamma"

    def test_bad_chunk_size(self):
        with pytest.raises(ValidationError):
            corpus.chunk_document(make_doc(5), 0)

    def test_token_counts_sum_to_document_total(self):
        import random

        rng = random.Random(3)
        for _ in range(30):
            n = rng.randint(0, 700)
            size = rng.randint(1, 300)
            doc = make_doc(n)
            chunks = corpus.chunk_document(doc, size)
            assert sum(c.token_count for c in chunks) == n
            # all but the last chunk are full
            assert all(c.token_count == size for c in chunks[:-1])
            assert all(c.token_count <= size for c in chunks)

    def test_reconstruction_is_lossless_for_whitespace(self):
        doc = make_doc(123)
        chunks = corpus.chunk_document(doc, 50)
        rebuilt = " ".join(c.text for c in chunks)
        assert rebuilt.split() == (doc.title + " " + doc.text).split()


class TestChunkCorpus:
    def test_order_and_determinism(self):
        docs = [make_doc(40, f"d{i}") for i in range(5)]
        c1 = corpus.chunk_corpus(docs, "ds", 16)
        c2 = corpus.chunk_corpus(docs, "ds", 16)
        assert c1 == c2
        keys = c1.keys()
        assert keys == sorted(keys, key=lambda k: (docs_index(docs, k), k.chunk_index))
        assert len(set(keys)) == len(keys)

    def test_round_trip_through_file(self, tmp_path):
        docs = [make_doc(33, f"d{i}") for i in range(4)]
        c1 = corpus.chunk_corpus(docs, "ds", 10)
        path = tmp_path / "chunks.jsonl"
        corpus.save_chunked_corpus(c1, path)
        c2 = corpus.load_chunked_corpus(path)
        assert c1 == c2
        # byte-identical re-save
        first = path.read_bytes()
        corpus.save_chunked_corpus(c2, path)
        assert path.read_bytes() == first


def docs_index(docs, key):
    return [d.doc_id for d in docs].index(key.doc_id)
