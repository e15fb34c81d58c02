import json

import numpy as np
import pytest

from topicbench.cli import main
from topicbench.harness import plan_from_dict
from topicbench.interchange import import_corpus, import_result, read_scores


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def corpus_files(tmp_path):
    out = tmp_path / "corpus.txt"
    code = run_cli(
        "generate", "--num-topics", 3, "--num-docs", 25, "--doc-length", 15,
        "--vocab-size", 40, "--c", 0.9, "--seed", 5, "--out", out,
    )
    assert code == 0
    return tmp_path


class TestGenerate:
    def test_writes_three_files(self, corpus_files):
        assert (corpus_files / "corpus.txt").exists()
        assert (corpus_files / "corpus.labels.txt").exists()
        assert (corpus_files / "corpus.truth.txt").exists()
        loaded = import_corpus(corpus_files / "corpus.txt")
        assert loaded.header.num_documents == 25
        assert loaded.num_tokens == 25 * 15

    def test_blind_mode(self, tmp_path):
        out = tmp_path / "blind.txt"
        assert run_cli("generate", "--num-docs", 5, "--doc-length", 5,
                       "--vocab-size", 30, "--no-truth", "--out", out) == 0
        assert out.exists()
        assert not (tmp_path / "blind.labels.txt").exists()

    def test_config_file_equivalent(self, tmp_path):
        config = tmp_path / "gen.json"
        config.write_text(json.dumps({
            "num_topics": 4, "num_docs": 10, "doc_length": 6, "vocab_size": 25,
            "c": 0.5, "seed": 11,
        }))
        out = tmp_path / "c.txt"
        assert run_cli("generate", "--config", config, "--out", out) == 0
        loaded = import_corpus(out)
        assert loaded.header.num_topics == 4
        assert loaded.header.seed == 11
        # explicit flag wins over the config value
        out2 = tmp_path / "c2.txt"
        assert run_cli("generate", "--config", config, "--seed", 12, "--out", out2) == 0
        assert import_corpus(out2).header.seed == 12

    def test_invalid_spec_exits_nonzero(self, tmp_path):
        code = run_cli("generate", "--num-topics", 0, "--out", tmp_path / "x.txt")
        assert code == 2

    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for out in (a, b):
            run_cli("generate", "--num-docs", 8, "--doc-length", 4,
                    "--vocab-size", 20, "--seed", 3, "--out", out)
        assert a.read_bytes() == b.read_bytes()


class TestInferScore:
    def test_full_pipeline(self, corpus_files, tmp_path):
        result = tmp_path / "result.txt"
        assert run_cli(
            "infer", "--corpus", corpus_files / "corpus.txt", "--ka", 3,
            "--sweeps", 60, "--seed", 2, "--out", result,
        ) == 0
        loaded = import_result(result)
        assert loaded.num_topics == 3
        assert loaded.hyperparams["alpha"] == pytest.approx(5 / 3)

        scores = tmp_path / "scores.csv"
        assert run_cli(
            "score", "--corpus", corpus_files / "corpus.txt",
            "--labels", corpus_files / "corpus.labels.txt",
            "--result", result, "--truth", corpus_files / "corpus.truth.txt",
            "--out", scores, "--experiment-id", "cli",
        ) == 0
        rows = read_scores(scores)
        assert len(rows) == 1
        assert rows[0]["experiment_id"] == "cli"
        assert 0 <= rows[0]["nmi"] <= 1
        assert rows[0]["m_d"] == 15

    def test_exclude_stopwords_requires_truth(self, corpus_files, tmp_path):
        result = tmp_path / "r.txt"
        run_cli("infer", "--corpus", corpus_files / "corpus.txt", "--ka", 3,
                "--sweeps", 5, "--seed", 2, "--out", result)
        with pytest.raises(SystemExit):
            run_cli("score", "--corpus", corpus_files / "corpus.txt",
                    "--labels", corpus_files / "corpus.labels.txt",
                    "--result", result, "--out", tmp_path / "s.csv",
                    "--exclude-stopwords")

    def test_preset_flag(self, corpus_files, tmp_path):
        result = tmp_path / "r.txt"
        assert run_cli("infer", "--corpus", corpus_files / "corpus.txt", "--ka", 5,
                       "--preset", "ldavb_default", "--sweeps", 5, "--seed", 1,
                       "--out", result) == 0
        assert import_result(result).hyperparams["alpha"] == pytest.approx(0.2)


class TestSweepCli:
    def test_plan_then_sweep(self, tmp_path):
        plan_path = tmp_path / "plan.json"
        plan_dict = {
            "experiment_id": "cli-sweep",
            "base_spec": {
                "num_topics": 3, "num_documents": 20, "doc_length": 10,
                "vocab_size": 30, "seed": 4,
            },
            "swept": "c",
            "values": [0.3, 1.0],
            "realizations": 2,
            "algorithms": [{"name": "gibbs", "num_topics": 3, "sweeps": 15}],
        }
        plan_path.write_text(json.dumps(plan_dict))
        out = tmp_path / "sweepout"
        assert run_cli("sweep", "--plan", plan_path, "--out", out) == 0
        rows = read_scores(out / "scores.csv")
        assert len(rows) == 4
        assert (out / "summary.csv").exists()

    def test_recipes_emit_valid_plans(self, tmp_path):
        for recipe in ("structure", "ka", "hyperparams", "stopwords", "doclength"):
            path = tmp_path / f"{recipe}.json"
            assert run_cli("plan", "--recipe", recipe, "--out", path) == 0
            plan = plan_from_dict(json.loads(path.read_text()))
            assert plan.realizations >= 1
            assert len(plan.values) >= 2

    def test_full_scale_plan(self, tmp_path):
        path = tmp_path / "p.json"
        assert run_cli("plan", "--recipe", "structure", "--full-scale", "--out", path) == 0
        plan = plan_from_dict(json.loads(path.read_text()))
        assert plan.base_spec.num_documents == 10_000
        assert plan.realizations == 10


class TestReproCli:
    def test_repro_table(self, tmp_path):
        out = tmp_path / "repro.csv"
        code = run_cli(
            "repro", "--num-topics", 3, "--num-docs", 20, "--doc-length", 10,
            "--vocab-size", 30, "--c", 1.0, "--ka", 3, "--sweeps", 15,
            "--realizations", 2, "--seed", 8, "--out", out,
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("realization,")
        assert len(lines) == 3


class TestCompareDistCli:
    def test_grids_written(self, corpus_files, tmp_path):
        result = tmp_path / "r.txt"
        run_cli("infer", "--corpus", corpus_files / "corpus.txt", "--ka", 3,
                "--sweeps", 30, "--seed", 2, "--out", result)
        prefix = tmp_path / "grids" / "cmp"
        assert run_cli("compare-dist", "--truth", corpus_files / "corpus.truth.txt",
                       "--result", result, "--out-prefix", prefix) == 0
        grid = np.loadtxt(f"{prefix}.word_topic.inferred.csv", delimiter=",")
        assert grid.shape == (3, 40)
