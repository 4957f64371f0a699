"""Command-line interface: exit codes, artifacts, reproducibility."""

import json
import os

from diacritizer.cli import main

SYNTH = {"vocab_size": 30, "verse_count": 50, "mean_verse_len": 5}


def write_config(tmp_path, name="config.json", **overrides):
    cfg = {"seed": 1, "synth": SYNTH}
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_synth_then_stats(tmp_path, capsys):
    out = str(tmp_path / "synth")
    assert main(["synth", "--seed", "3", "--out", out]) == 0
    for name in ("syn_a.tsv", "syn_b.tsv", "syn_a.lexicon.tsv", "syn_b.lexicon.tsv"):
        assert os.path.exists(os.path.join(out, name))
    stats_out = str(tmp_path / "stats")
    code = main(["stats", os.path.join(out, "syn_a.tsv"),
                 os.path.join(out, "syn_b.tsv"), "--k", "3", "--out", stats_out])
    assert code == 0
    report = capsys.readouterr().out
    assert "cross.vocab_overlap" in report
    assert read(os.path.join(stats_out, "stats.tsv")).decode() in report + ""


def test_unknown_config_key_exits_2(tmp_path, capsys):
    path = write_config(tmp_path, modle="crf")
    assert main(["train", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{nope", encoding="utf-8")
    assert main(["train", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "o")]) == 2


def test_missing_corpora_exits_2(tmp_path, capsys):
    path = tmp_path / "empty.json"
    path.write_text("{}", encoding="utf-8")
    assert main(["train", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_train_crf_and_predict(tmp_path, capsys):
    config = write_config(tmp_path, model="crf", crf={"max_iter": 60})
    out = str(tmp_path / "run")
    assert main(["train", "--config", config, "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "model.diac"))
    assert os.path.exists(os.path.join(out, "lookup.tsv"))
    assert os.path.exists(os.path.join(out, "config.json"))

    # build an undiacritized query from the lookup table itself
    bases = [line.split("\t")[0] for line in
             open(os.path.join(out, "lookup.tsv"), encoding="utf-8")][:5]
    query = tmp_path / "query.txt"
    query.write_text(" ".join(bases) + "\n", encoding="utf-8")
    pred = str(tmp_path / "pred.txt")
    assert main(["predict", "--model", os.path.join(out, "model.diac"),
                 str(query), "--out", pred]) == 0
    line = open(pred, encoding="utf-8").read().strip()
    assert len(line.split(" ")) == len(bases)

    # hybrid mode must reproduce the lookup's modal forms for seen words
    pred2 = str(tmp_path / "pred2.txt")
    assert main(["predict", "--model", os.path.join(out, "model.diac"),
                 "--hybrid", os.path.join(out, "lookup.tsv"),
                 str(query), "--out", pred2]) == 0
    forms = {line.split("\t")[0]: line.split("\t")[1] for line in
             open(os.path.join(out, "lookup.tsv"), encoding="utf-8")}
    assert open(pred2, encoding="utf-8").read().split() == [forms[b] for b in bases]


def test_predict_rejects_diacritized_input(tmp_path, capsys):
    config = write_config(tmp_path, model="crf", crf={"max_iter": 30})
    out = str(tmp_path / "run")
    assert main(["train", "--config", config, "--out", out]) == 0
    query = tmp_path / "query.txt"
    query.write_text("ba\n", encoding="utf-8")
    assert main(["predict", "--model", os.path.join(out, "model.diac"),
                 str(query)]) == 2


def test_train_rerun_is_byte_identical(tmp_path):
    config = write_config(tmp_path, model="crf", crf={"max_iter": 60})
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    assert main(["train", "--config", config, "--out", out1]) == 0
    assert main(["train", "--config", config, "--out", out2]) == 0
    for name in ("model.diac", "lookup.tsv", "config.json"):
        assert read(os.path.join(out1, name)) == read(os.path.join(out2, name))


def test_experiment_lookup(tmp_path):
    config = write_config(tmp_path, model="lookup", regime="uni", k=2)
    out1, out2 = str(tmp_path / "e1"), str(tmp_path / "e2")
    assert main(["experiment", "--config", config, "--out", out1]) == 0
    results = open(os.path.join(out1, "results.tsv"), encoding="utf-8").read()
    assert results.startswith("model\tregime")
    confusions = [n for n in os.listdir(out1) if n.startswith("confusion.")]
    assert len(confusions) == 4  # two dialects x two folds
    assert main(["experiment", "--config", config, "--out", out2]) == 0
    assert read(os.path.join(out1, "results.tsv")) == read(os.path.join(out2, "results.tsv"))


def test_train_dnn_writes_history(tmp_path):
    config = write_config(
        tmp_path, model="dnn",
        neural={"embedding_dim": 6, "lstm_state": 5, "batch_size": 8, "max_epochs": 2},
    )
    out = str(tmp_path / "dnn")
    assert main(["train", "--config", config, "--out", out]) == 0
    history = open(os.path.join(out, "history.tsv"), encoding="utf-8").read()
    assert history.startswith("epoch\t")
    assert "best_epoch" in history
