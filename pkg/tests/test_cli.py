"""End-to-end tests of the command-line interface on synthetic corpora."""

import csv
import json
from pathlib import Path

import pytest

from bait.cli import main

from conftest import make_corpus, write_corpus_files
from fixtures_negation import MINI_WORDNET_DATA, MINI_WORDNET_INDEX, to_conllu

DIMS = dict(sim_dim=16, nli_dim=24)


@pytest.fixture(scope="module")
def corpus_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    corpus = make_corpus(n_samples=260, seed=31, **DIMS)
    paths = write_corpus_files(corpus, root)
    return corpus, {k: str(v) for k, v in paths.items()}


def _common_flags(paths):
    return [
        "--stances", paths["stances"],
        "--sidecar", paths["sidecar"],
        "--sim-head-store", paths["sim_head_store"],
        "--nli-head-store", paths["nli_head_store"],
        "--sim-body-store", paths["sim_body_store"],
        "--nli-body-store", paths["nli_body_store"],
        "--sim-dim", "16", "--nli-dim", "24", "--body-len", "12",
    ]


class TestIngest:
    def test_valid_corpus(self, corpus_files, capsys):
        corpus, paths = corpus_files
        code = main(["ingest", *_common_flags(paths), "--bodies", paths["bodies"]])
        out = capsys.readouterr().out
        assert code == 0
        assert f"samples: {len(corpus.samples)}" in out
        assert "unrelated" in out

    def test_missing_file_exits_2(self, corpus_files):
        _, paths = corpus_files
        flags = _common_flags(paths)
        flags[flags.index(paths["stances"])] = "/nonexistent/stances.csv"
        assert main(["ingest", *flags]) == 2

    def test_dim_mismatch_exits_2(self, corpus_files):
        _, paths = corpus_files
        flags = _common_flags(paths)
        flags[flags.index("16")] = "384"
        assert main(["ingest", *flags]) == 2

    def test_store_corpus_id_mismatch_exits_2(self, corpus_files, tmp_path):
        _, paths = corpus_files
        stances = tmp_path / "extra.csv"
        with open(paths["stances"], encoding="utf-8") as fh:
            content = fh.read()
        stances.write_text(content + "Totally new headline,99999,agree\n",
                           encoding="utf-8")
        flags = _common_flags(paths)
        flags[flags.index(paths["stances"])] = str(stances)
        assert main(["ingest", *flags]) == 2


@pytest.fixture(scope="module")
def trained(corpus_files, tmp_path_factory):
    _, paths = corpus_files
    out = tmp_path_factory.mktemp("train")
    base = [*_common_flags(paths), "--out-dir", str(out), "--seed", "0",
            "--epochs", "25", "--patience", "25", "--lr", "3e-3",
            "--batch-size", "32", "--validation-fraction", "0.3"]
    assert main(["train", "--model", "relatednet", *base]) == 0
    assert main(["train", "--model", "topknet", *base]) == 0
    return out


class TestTrain:
    def test_writes_checkpoint_history_and_config(self, trained):
        assert (trained / "relatednet.ckpt").exists()
        assert (trained / "topknet.ckpt").exists()
        history = json.loads((trained / "topknet_history.json").read_text())
        assert history["model"] == "topknet"
        assert history["epochs"], "per-epoch metric log must be nonempty"
        assert (trained / "run_config.txt").exists()

    def test_default_topknet_accounting_in_history(self, corpus_files,
                                                   tmp_path, capsys):
        # parameter count is reported from the checkpointed model
        _, paths = corpus_files
        code = main(["train", "--model", "topknet", *_common_flags(paths),
                     "--out-dir", str(tmp_path), "--epochs", "1"])
        assert code == 0
        history = json.loads((tmp_path / "topknet_history.json").read_text())
        # toy dims: (3+1)*24 -> 60,60,60 -> 60 -> 3
        assert history["parameter_count"] > 0

    def test_weighted_loss_logs_identity(self, corpus_files, tmp_path):
        _, paths = corpus_files
        code = main(["train", "--model", "topknet", *_common_flags(paths),
                     "--out-dir", str(tmp_path), "--epochs", "2",
                     "--weighted-loss"])
        assert code == 0
        history = json.loads((tmp_path / "topknet_history.json").read_text())
        weights = history["class_weight"]
        assert weights is not None and len(weights) == 3

    def test_synthetic_samples_with_known_headlines_merge(self, corpus_files,
                                                          tmp_path):
        corpus, paths = corpus_files
        # synthetic rows reference headlines already present in the sidecar,
        # as produced by re-running the extraction tool on an augmented corpus
        extra = tmp_path / "synthetic.csv"
        with open(extra, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["Headline", "Body ID", "Stance"])
            for s in corpus.samples[:6]:
                if s.stance.text != "unrelated":
                    writer.writerow([corpus.headlines[s.headline_id], s.body_id,
                                     "disagree"])
        code = main(["train", "--model", "topknet", *_common_flags(paths),
                     "--out-dir", str(tmp_path / "out"), "--epochs", "1",
                     "--synthetic", str(extra)])
        assert code == 0

    def test_synthetic_samples_with_unknown_headline_exit_2(self, corpus_files,
                                                            tmp_path):
        _, paths = corpus_files
        extra = tmp_path / "synthetic.csv"
        extra.write_text("Headline,Body ID,Stance\nNot in any store,0,disagree\n",
                         encoding="utf-8")
        code = main(["train", "--model", "topknet", *_common_flags(paths),
                     "--out-dir", str(tmp_path / "out"), "--epochs", "1",
                     "--synthetic", str(extra)])
        assert code == 2

    def test_seeded_rerun_reproduces_metrics_and_checkpoint(self, corpus_files,
                                                            tmp_path):
        _, paths = corpus_files
        args = ["train", "--model", "topknet", *_common_flags(paths),
                "--epochs", "3", "--seed", "7"]
        assert main([*args, "--out-dir", str(tmp_path / "a")]) == 0
        assert main([*args, "--out-dir", str(tmp_path / "b")]) == 0
        a = json.loads((tmp_path / "a" / "topknet_history.json").read_text())
        b = json.loads((tmp_path / "b" / "topknet_history.json").read_text())
        assert a["epochs"] == b["epochs"]
        assert (tmp_path / "a" / "topknet.ckpt").read_bytes() == \
            (tmp_path / "b" / "topknet.ckpt").read_bytes()


class TestEval:
    def test_eval_report_schema_and_accuracy(self, corpus_files, trained,
                                             tmp_path, capsys):
        _, paths = corpus_files
        code = main(["eval", *_common_flags(paths), "--out-dir", str(tmp_path),
                     "--relatednet", str(trained / "relatednet.ckpt"),
                     "--stage2", str(trained / "topknet.ckpt")])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert set(report) == {"per_class_accuracy", "overall_accuracy",
                               "fnc_score", "confusion_matrix", "class_order"}
        assert report["class_order"] == ["agree", "disagree", "discuss",
                                         "unrelated"]
        assert report["overall_accuracy"] > 0.72  # beats majority class
        out = capsys.readouterr().out
        assert "overall accuracy" in out

    def test_checkpoint_mismatch_exits_3(self, corpus_files, trained, tmp_path):
        _, paths = corpus_files
        code = main(["eval", *_common_flags(paths), "--out-dir", str(tmp_path),
                     "--relatednet", str(trained / "topknet.ckpt"),
                     "--stage2", str(trained / "topknet.ckpt")])
        assert code == 3


class TestAugmentCommand:
    @pytest.fixture()
    def augment_inputs(self, tmp_path):
        stances = tmp_path / "stances.csv"
        with open(stances, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["Headline", "Body ID", "Stance"])
            writer.writerow(["Israel has opened the dams", 0, "agree"])
            writer.writerow(["Big news", 1, "agree"])
        parses = tmp_path / "headlines.conllu"
        from fixtures_negation import PRECEDENCE_FIXTURES

        conllu = (
            "# headline_id = 0\n"
            "1\tIsrael\tIsrael\tPROPN\t_\t_\t3\tnsubj\t_\t_\n"
            "2\thas\thave\tAUX\t_\t_\t3\taux\t_\t_\n"
            "3\topened\topen\tVERB\t_\t_\t0\troot\t_\t_\n"
            "4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\t_\n"
            "5\tdams\tdam\tNOUN\t_\t_\t3\tobj\t_\t_\n\n"
            "# headline_id = 1\n"
            "1\tBig\tbig\tADJ\t_\t_\t2\tamod\t_\t_\n"
            "2\tnews\tnews\tNOUN\t_\t_\t0\troot\t_\t_\n"
        )
        parses.write_text(conllu, encoding="utf-8")
        wn_dir = tmp_path / "wn"
        wn_dir.mkdir()
        (wn_dir / "index.verb").write_text(MINI_WORDNET_INDEX, encoding="utf-8")
        (wn_dir / "data.verb").write_text(MINI_WORDNET_DATA, encoding="utf-8")
        return stances, parses, wn_dir

    def test_negation_synthesis_outputs(self, augment_inputs, tmp_path, capsys):
        stances, parses, wn_dir = augment_inputs
        out = tmp_path / "aug"
        code = main(["augment", "--stances", str(stances), "--parses", str(parses),
                     "--wn-index", str(wn_dir / "index.verb"),
                     "--wn-data", str(wn_dir / "data.verb"),
                     "--out-dir", str(out)])
        assert code == 0
        rows = list(csv.DictReader(open(out / "synthetic_stances.csv",
                                        encoding="utf-8")))
        assert len(rows) == 1
        assert rows[0]["Stance"] == "disagree"
        assert rows[0]["Headline"] == "Israel has not opened the dams"
        log_lines = (out / "synthesis_log.jsonl").read_text().splitlines()
        assert len(log_lines) == 1
        entry = json.loads(log_lines[0])
        assert entry["method"] in ("remove_not", "insert_not", "antonym_swap")

    def test_rerun_is_byte_identical(self, augment_inputs, tmp_path):
        stances, parses, wn_dir = augment_inputs
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["augment", "--stances", str(stances),
                         "--parses", str(parses),
                         "--wn-index", str(wn_dir / "index.verb"),
                         "--wn-data", str(wn_dir / "data.verb"),
                         "--out-dir", str(out)]) == 0
            outputs.append({
                p.name: p.read_bytes()
                for p in sorted(out.iterdir()) if p.name != "run_config.txt"
            })
        assert outputs[0] == outputs[1]

    def test_arc_adaptation_outputs(self, tmp_path):
        arc = tmp_path / "arc.csv"
        with open(arc, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["topic", "post", "claim", "opposing_claim",
                             "support"])
            for i in range(12):
                writer.writerow([f"t{i % 4}", f"post {i}", f"claim {i}",
                                 f"anti {i}", ["claim", "opposing", "neither"][i % 3]])
        out = tmp_path / "aug"
        assert main(["augment", "--arc", str(arc), "--out-dir", str(out)]) == 0
        rows = list(csv.DictReader(open(out / "arc_stances.csv", encoding="utf-8")))
        stances = {r["Stance"] for r in rows}
        assert stances == {"agree", "disagree", "discuss", "unrelated"}

    def test_missing_lexicon_exits_2(self, augment_inputs, tmp_path):
        stances, parses, wn_dir = augment_inputs
        code = main(["augment", "--stances", str(stances), "--parses", str(parses),
                     "--wn-index", str(wn_dir / "missing.verb"),
                     "--wn-data", str(wn_dir / "data.verb"),
                     "--out-dir", str(tmp_path / "x")])
        assert code == 2


class TestTuneCommand:
    def test_budget_one_single_history_line(self, corpus_files, tmp_path):
        _, paths = corpus_files
        code = main(["tune", "--model", "topknet", *_common_flags(paths),
                     "--out-dir", str(tmp_path), "--budget", "1",
                     "--trial-epochs", "1"])
        assert code == 0
        lines = (tmp_path / "tune_history.jsonl").read_text().splitlines()
        assert len(lines) == 1

    def test_resume_completes_budget_without_duplicates(self, corpus_files,
                                                        tmp_path, capsys):
        _, paths = corpus_files
        base = ["tune", "--model", "topknet", *_common_flags(paths),
                "--out-dir", str(tmp_path), "--trial-epochs", "1", "--seed", "5"]
        assert main([*base, "--budget", "2"]) == 0
        assert main([*base, "--budget", "4"]) == 0
        lines = (tmp_path / "tune_history.jsonl").read_text().splitlines()
        assert len(lines) == 4
        out = capsys.readouterr().out
        best = max(json.loads(l)["objective"] for l in lines
                   if json.loads(l)["objective"] is not None)
        assert f"{best:.4f}" in out

    def test_invalid_space_exits_2(self, corpus_files, tmp_path):
        _, paths = corpus_files
        space = tmp_path / "space.json"
        space.write_text(json.dumps([{"name": "lr", "kind": "warp"}]))
        code = main(["tune", "--model", "topknet", *_common_flags(paths),
                     "--out-dir", str(tmp_path), "--budget", "1",
                     "--space", str(space)])
        assert code == 2


class TestPredict:
    def test_round_trip(self, corpus_files, trained, tmp_path):
        corpus, paths = corpus_files
        pairs = tmp_path / "pairs.csv"
        with open(pairs, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["Headline", "Body ID"])
            for s in corpus.samples[:12]:
                writer.writerow([corpus.headlines[s.headline_id], s.body_id])
        code = main(["predict", *_common_flags(paths), "--input", str(pairs),
                     "--out-dir", str(tmp_path),
                     "--relatednet", str(trained / "relatednet.ckpt"),
                     "--stage2", str(trained / "topknet.ckpt")])
        assert code == 0
        rows = list(csv.DictReader(open(tmp_path / "predictions.csv",
                                        encoding="utf-8")))
        assert len(rows) == 12
        assert all(r["Stance"] in ("agree", "disagree", "discuss", "unrelated")
                   for r in rows)

    def test_unknown_headline_exits_2(self, corpus_files, trained, tmp_path):
        _, paths = corpus_files
        pairs = tmp_path / "pairs.csv"
        pairs.write_text("Headline,Body ID\nNever seen before,0\n",
                         encoding="utf-8")
        code = main(["predict", *_common_flags(paths), "--input", str(pairs),
                     "--out-dir", str(tmp_path),
                     "--relatednet", str(trained / "relatednet.ckpt"),
                     "--stage2", str(trained / "topknet.ckpt")])
        assert code == 2


class TestConfigFile:
    def test_config_file_with_cli_override(self, corpus_files, tmp_path, capsys):
        _, paths = corpus_files
        config = tmp_path / "run.cfg"
        config.write_text(
            "\n".join([
                f"stances = {paths['stances']}",
                f"sidecar = {paths['sidecar']}",
                f"sim_head_store = {paths['sim_head_store']}",
                f"nli_head_store = {paths['nli_head_store']}",
                f"sim_body_store = {paths['sim_body_store']}",
                f"nli_body_store = {paths['nli_body_store']}",
                "sim_dim = 999  # overridden on the command line",
                "nli_dim = 24",
                "body_len = 12",
            ]) + "\n", encoding="utf-8")
        assert main(["ingest", "--config", str(config), "--sim-dim", "16"]) == 0
