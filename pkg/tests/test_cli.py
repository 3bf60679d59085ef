"""CLI commands: outputs, determinism, error handling."""

import hashlib
import json

import pytest

from riskvol.cli import main

from cli_fixtures import write_config, write_dataset


def run(args):
    return main([str(a) for a in args])


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def out_hashes(out_dir):
    return {
        p.name: digest(p) for p in sorted(out_dir.iterdir()) if p.is_file()
    }


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_data")
    data = write_dataset(root)
    return root, data


@pytest.fixture(scope="module")
def ingested(dataset):
    root, data = dataset
    config = write_config(root, data, out_name="base_out")
    assert run(["ingest", "--config", config]) == 0
    assert run(["labels", "--config", config]) == 0
    return root, data, config, root / "base_out"


class TestIngest:
    def test_writes_corpus_and_log(self, ingested):
        _, _, _, out = ingested
        corpus = (out / "corpus.jsonl").read_text().strip().splitlines()
        assert len(corpus) == 20
        record = json.loads(corpus[0])
        assert {"doc_id", "company_id", "issue_date", "sector", "tokens"} <= set(record)
        log = (out / "ingest_log.txt").read_text()
        assert "documents written: 20" in log

    def test_document_without_section_logged_not_fatal(self, tmp_path):
        data = write_dataset(tmp_path, n_companies=4)
        # break one filing: no Item 1A at all
        (data / "filings" / "c01.html").write_text(
            "<html><body><p>nothing of interest here</p></body></html>"
        )
        config = write_config(tmp_path, data)
        assert run(["ingest", "--config", config]) == 0
        out = tmp_path / "out"
        assert len((out / "corpus.jsonl").read_text().strip().splitlines()) == 3
        log = (out / "ingest_log.txt").read_text()
        assert "documents dropped: 1" in log
        assert "NoSectionFound" in log

    def test_bad_manifest_is_fatal(self, tmp_path):
        data = write_dataset(tmp_path, n_companies=2)
        (data / "manifest.csv").write_text("doc_id,company_id\nbroken,row\n")
        config = write_config(tmp_path, data)
        assert run(["ingest", "--config", config]) == 1

    def test_rerun_byte_identical(self, dataset, tmp_path):
        root, data = dataset
        c1 = write_config(tmp_path, data, out_name="o1", config_name="c1.cfg")
        c2 = write_config(tmp_path, data, out_name="o2", config_name="c2.cfg")
        assert run(["ingest", "--config", c1]) == 0
        assert run(["ingest", "--config", c2]) == 0
        assert out_hashes(tmp_path / "o1") == out_hashes(tmp_path / "o2")


class TestLabels:
    def test_labels_file_structure(self, ingested):
        _, _, _, out = ingested
        lines = (out / "labels.tsv").read_text().strip().splitlines()
        header = lines[0].split("\t")
        assert header[:2] == ["doc_id", "sector"]
        assert "y1" in header and "y8" in header
        assert len(lines) == 21  # header + 20 docs

    def test_missing_horizons_flagged(self, ingested):
        _, _, _, out = ingested
        log = (out / "labels_log.txt").read_text()
        # 2015 filings lack the later quarters in the shipped price window
        assert "missing-horizons" in log

    def test_rerun_byte_identical(self, ingested, tmp_path):
        root, data, config, out = ingested
        c2 = write_config(tmp_path, data, out_name="lab2")
        assert run(["ingest", "--config", c2]) == 0
        assert run(["labels", "--config", c2]) == 0
        assert digest(tmp_path / "lab2" / "labels.tsv") == digest(out / "labels.tsv")


class TestEvaluate:
    def test_single_spec_outputs(self, ingested):
        root, data, config, out = ingested
        assert run(["evaluate", "--config", config]) == 0
        report = json.loads((out / "eval_TC_Lex_text_only.json").read_text())
        assert report["per_horizon"]["1"]["r2"] is not None
        table = (out / "eval_TC_Lex_text_only.txt").read_text()
        assert "horizon" in table

    def test_deterministic_rerun(self, ingested, tmp_path):
        root, data, config, out = ingested
        name = "eval_TC_Lex_text_only.json"
        first = digest(out / name)
        assert run(["evaluate", "--config", config]) == 0
        assert digest(out / name) == first

    def test_stacking_and_extended_via_overrides(self, ingested):
        root, data, config, out = ingested
        assert run(
            [
                "evaluate", "--config", config,
                "--set", "experiment.fusion=stacking",
                "--set", "experiment.extended=true",
                "--set", "experiment.lexicon_mode=LexExt",
            ]
        ) == 0
        report = json.loads(
            (out / "eval_ext-TC_LexExt_stacking.json").read_text()
        )
        assert report["per_horizon"]["1"]["mse"] is not None

    def test_grid_preset(self, ingested):
        root, data, config, out = ingested
        assert run(["evaluate", "--config", config, "--set", "experiment.grid=true"]) == 0
        summary = json.loads((out / "eval_summary.json").read_text())
        assert len(summary) == 8
        for row in summary.values():
            assert set(row) == {"text", "text+market"}
        table = (out / "eval_summary.txt").read_text()
        assert "ext-BM25" in table and "TF" in table

    def test_temporal_split(self, ingested):
        root, data, config, out = ingested
        assert run(
            [
                "evaluate", "--config", config,
                "--set", "experiment.split=temporal",
                "--set", "experiment.test_year=2014",
            ]
        ) == 0

    def test_missing_seed_is_validation_error(self, dataset, tmp_path, capsys):
        root, data = dataset
        config = write_config(tmp_path, data)
        text = config.read_text().replace("seeds.cv = 11\n", "")
        config.write_text(text)
        assert run(["evaluate", "--config", config]) == 1
        assert "seeds.cv" in capsys.readouterr().err

    def test_missing_path_is_validation_error(self, dataset, tmp_path):
        root, data = dataset
        config = write_config(
            tmp_path, data, **{"paths.lexicon": str(tmp_path / "absent.csv")}
        )
        (tmp_path / "out").mkdir(exist_ok=True)
        assert run(["ingest", "--config", config]) == 0
        assert run(["labels", "--config", config]) == 0
        assert run(["evaluate", "--config", config]) == 1


class TestDrift:
    def test_matrix_written(self, ingested):
        root, data, config, out = ingested
        assert run(["drift", "--config", config]) == 0
        lines = (out / "drift.tsv").read_text().strip().splitlines()
        assert lines[0].split("\t") == ["year", "2013", "2014", "2015"]
        matrix = [line.split("\t")[1:] for line in lines[1:]]
        assert float(matrix[0][0]) == 1.0
        assert float(matrix[0][1]) == float(matrix[1][0])

    def test_deterministic(self, ingested):
        root, data, config, out = ingested
        first = digest(out / "drift.tsv")
        assert run(["drift", "--config", config]) == 0
        assert digest(out / "drift.tsv") == first


class TestSectors:
    def test_reports_written(self, ingested):
        root, data, config, out = ingested
        assert run(["sectors", "--config", config]) == 0
        payload = json.loads((out / "sectors.json").read_text())
        assert set(payload["sectors"]) == {"ene", "fin"}
        for entry in payload["sectors"].values():
            assert "general" in entry
            assert "sector_specific" in entry
            assert "sector_agnostic" in entry
            assert entry["top_terms"]
        table = (out / "sectors.txt").read_text()
        assert "general" in table
        coef = (out / "coefficients.tsv").read_text().strip().splitlines()
        assert coef[0] == "sector\trank\tterm\tcoefficient"
        assert len(coef) > 2

    def test_planted_drivers_rank_first(self, ingested):
        root, data, config, out = ingested
        payload = json.loads((out / "sectors.json").read_text())
        assert payload["sectors"]["ene"]["top_terms"][0]["term"] == "fire"
        assert payload["sectors"]["fin"]["top_terms"][0]["term"] == "crisi"

    def test_deterministic(self, ingested):
        root, data, config, out = ingested
        first = digest(out / "sectors.json")
        assert run(["sectors", "--config", config]) == 0
        assert digest(out / "sectors.json") == first

    def test_small_sector_skipped(self, ingested, tmp_path):
        root, data, config, out = ingested
        skipout = tmp_path / "skipout"
        skipout.mkdir()
        for name in ("corpus.jsonl", "labels.tsv"):
            (skipout / name).write_bytes((out / name).read_bytes())
        assert run(
            ["sectors", "--config", config,
             "--set", "engine.min_sector_docs=50",
             "--out", str(skipout)]
        ) == 0
        payload = json.loads((skipout / "sectors.json").read_text())
        assert payload["sectors"] == {}
        assert len(payload["skipped"]) == 2


class TestInputImmutability:
    def test_commands_never_touch_input_files(self, dataset, tmp_path):
        root, data = dataset
        config = write_config(tmp_path, data, config_name="imm.cfg")
        before = {
            p: digest(p) for p in sorted(data.rglob("*")) if p.is_file()
        }
        for command in ("ingest", "labels", "evaluate", "drift", "sectors"):
            assert run([command, "--config", config]) == 0
        after = {
            p: digest(p) for p in sorted(data.rglob("*")) if p.is_file()
        }
        assert before == after


class TestArgumentHandling:
    def test_unknown_command_rejected(self):
        with pytest.raises(SystemExit):
            main(["frobnicate", "--config", "x"])

    def test_bad_set_syntax(self, dataset, tmp_path):
        root, data = dataset
        config = write_config(tmp_path, data)
        assert run(["ingest", "--config", config, "--set", "oops"]) == 1

    def test_missing_config_file(self):
        assert main(["ingest", "--config", "/nonexistent/run.cfg"]) == 1
