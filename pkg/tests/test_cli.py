"""CLI pipeline tests against mock providers, plus exit-code contracts."""

import filecmp
import json
import os

import pytest

from embedsim.cli import main


def write_fixture(root, n_docs=12, n_queries=4, two_datasets=False):
    """Tiny BEIR-format tree plus a config with two mock models."""
    datasets = ["ds1", "ds2"] if two_datasets else ["ds1"]
    for ds in datasets:
        d = root / ds
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "corpus.jsonl", "w") as fh:
            for i in range(n_docs):
                rec = {
                    "_id": f"{ds}-doc{i:03d}",
                    "title": f"title {i}",
                    "text": " ".join(f"{ds}w{i}t{t}" for t in range(20)),
                }
                fh.write(json.dumps(rec) + "\n")
        with open(d / "queries.jsonl", "w") as fh:
            for i in range(n_queries):
                fh.write(json.dumps({"_id": f"q{i:02d}", "text": f"{ds} query {i}"}) + "\n")
    cfg = root / "run.toml"
    dataset_blocks = "\n".join(
        f'[[datasets]]\nid = "{ds}"\ncorpus = "{ds}/corpus.jsonl"\n'
        f'queries = "{ds}/queries.jsonl"\n'
        for ds in datasets
    )
    cfg.write_text(
        '[run]\nchunk_size = 8\nstore = "store"\nk = 3\nnum_queries = 3\n\n'
        + dataset_blocks
        + '\n[[models]]\nid = "mockA"\nendpoint = "mock://?dim=16&seed=1"\n'
        + '\n[[models]]\nid = "mockB"\nendpoint = "mock://?dim=12&seed=2"\n'
    )
    return cfg


def run_pipeline(root, cfg):
    assert main(["ingest", "--config", str(cfg)]) == 0
    for ds in ("ds1",):
        for model in ("mockA", "mockB"):
            assert main(
                ["embed", "--config", str(cfg), "--dataset", ds, "--model", model]
            ) == 0


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["no-such-command"])
        assert exc.value.code == 1

    def test_missing_required_flag_is_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["ingest"])  # --config required
        assert exc.value.code == 1

    def test_data_error_is_2(self, tmp_path):
        missing = tmp_path / "none.toml"
        assert main(["ingest", "--config", str(missing)]) == 2

    def test_provider_error_is_3(self, tmp_path):
        cfg = write_fixture(tmp_path)
        text = cfg.read_text().replace(
            'endpoint = "mock://?dim=16&seed=1"',
            'endpoint = "http://127.0.0.1:9/v1/embeddings"\n'
            "max_retries = 0\ntimeout = 0.5",
        )
        cfg.write_text(text)
        assert main(["ingest", "--config", str(cfg)]) == 0
        rc = main(["embed", "--config", str(cfg), "--dataset", "ds1", "--model", "mockA"])
        assert rc == 3

    def test_embed_before_ingest_is_2(self, tmp_path):
        cfg = write_fixture(tmp_path)
        rc = main(["embed", "--config", str(cfg), "--dataset", "ds1", "--model", "mockA"])
        assert rc == 2


class TestPipeline:
    def test_ingest_embed_compare_sweep(self, tmp_path):
        cfg = write_fixture(tmp_path)
        run_pipeline(tmp_path, cfg)
        out = tmp_path / "out"

        for measure in ("cka", "jaccard", "rank"):
            rc = main(
                ["compare", "--config", str(cfg), measure, "--dataset", "ds1",
                 "--out-dir", str(out)]
            )
            assert rc == 0
        jc = out / "jaccard_ds1_k3.csv"
        assert jc.exists()
        head = jc.read_text().splitlines()[0]
        assert "num_queries=3" in head and "k=3" in head
        assert (out / "cka_ds1.svg").exists()
        assert (out / "cka_ds1.dendrogram.json").exists()

        rc = main(
            ["sweep", "--config", str(cfg), "--dataset", "ds1", "mockA", "mockB",
             "--queries", "2", "--out-dir", str(out)]
        )
        assert rc == 0
        sweep = out / "sweep_ds1_mockA_vs_mockB.csv"
        lines = sweep.read_text().splitlines()
        assert lines[0] == "query_id,k,jaccard,rank_sim"
        n_chunks = 12 * 3  # 20+20 title+text tokens at chunk_size 8 -> 3 chunks/doc
        assert len(lines) == 1 + 2 * n_chunks

    def test_compare_is_idempotent_byte_for_byte(self, tmp_path):
        cfg = write_fixture(tmp_path)
        run_pipeline(tmp_path, cfg)
        a, b = tmp_path / "out_a", tmp_path / "out_b"
        for out in (a, b):
            assert main(
                ["compare", "--config", str(cfg), "jaccard", "--dataset", "ds1",
                 "--out-dir", str(out)]
            ) == 0
        for name in os.listdir(a):
            assert filecmp.cmp(a / name, b / name, shallow=False), name

    def test_compare_mean_over_datasets(self, tmp_path):
        cfg = write_fixture(tmp_path, two_datasets=True)
        assert main(["ingest", "--config", str(cfg)]) == 0
        for ds in ("ds1", "ds2"):
            for model in ("mockA", "mockB"):
                assert main(
                    ["embed", "--config", str(cfg), "--dataset", ds, "--model", model]
                ) == 0
        out = tmp_path / "out"
        assert main(
            ["compare", "--config", str(cfg), "cka", "--mean", "--out-dir", str(out)]
        ) == 0
        head = (out / "cka_mean.csv").read_text().splitlines()[0]
        assert "dataset=mean" in head

    def test_embed_skips_existing(self, tmp_path, caplog):
        cfg = write_fixture(tmp_path)
        run_pipeline(tmp_path, cfg)
        import logging

        with caplog.at_level(logging.INFO, logger="embedsim"):
            assert main(
                ["embed", "--config", str(cfg), "--dataset", "ds1", "--model", "mockA"]
            ) == 0
        assert "skipping" in caplog.text

    def test_export_import_round_trip(self, tmp_path):
        cfg = write_fixture(tmp_path)
        run_pipeline(tmp_path, cfg)
        store = tmp_path / "store"
        exported = tmp_path / "x.esf1"
        assert main(
            ["export", "--store", str(store), "ds1", "mockA", "chunks", str(exported)]
        ) == 0
        store2 = tmp_path / "store2"
        assert main(["import", "--store", str(store2), str(exported)]) == 0
        assert (store2 / "ds1" / "mockA.chunks.esf1").read_bytes() == exported.read_bytes()
        # second import without --overwrite must fail as data error
        assert main(["import", "--store", str(store2), str(exported)]) == 2
        assert main(["import", "--store", str(store2), str(exported), "--overwrite"]) == 0


class TestMockDemo:
    def test_runs_and_produces_reports(self, tmp_path):
        out = tmp_path / "demo"
        rc = main(
            ["mock-demo", "--out-dir", str(out), "--chunks", "60", "--models", "3",
             "--dim", "16", "--queries", "6", "--k", "4"]
        )
        assert rc == 0
        reports = out / "reports"
        expected = {
            "cka_mockset.csv", "cka_mockset.svg", "cka_mockset.dendrogram.json",
            "jaccard_mockset_k4.csv", "jaccard_mockset_k4.svg",
            "jaccard_mockset_k4.dendrogram.json",
            "rank_mockset_k4.csv", "rank_mockset_k4.svg",
            "rank_mockset_k4.dendrogram.json",
            "sweep_mockset_mock-00_vs_mock-02.csv",
            "mock-00.chunks.esf1",
        }
        assert expected <= set(os.listdir(reports))
        assert (out / "store" / "manifest.json").exists()

    def test_chunk_count_is_exact(self, tmp_path):
        out = tmp_path / "demo"
        assert main(
            ["mock-demo", "--out-dir", str(out), "--chunks", "37", "--models", "2",
             "--dim", "8", "--queries", "4"]
        ) == 0
        from embedsim.corpus import load_chunked_corpus

        corpus = load_chunked_corpus(out / "store" / "mockset" / "chunks.jsonl")
        assert len(corpus.chunks) == 37
