"""Command-line behavior: outputs, messages, exit codes."""

import json

import pytest

from qualityexport.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return str(path)


def test_score_criteria_happy_path(docs5_path, tmp_path, capsys):
    out = tmp_path / "scores.txt"
    code = run_cli("score-criteria", "--corpus", docs5_path,
                   "--model", "toy-base", "--output", out)
    assert code == 0
    stdout = capsys.readouterr().out
    assert "5 criterion rows" in stdout
    assert "toy-base" in stdout
    assert len(out.read_text(encoding="utf-8").splitlines()) == 5


def test_score_criteria_with_artifact_path(docs5_path, labeled_path, tmp_path, capsys):
    model = tmp_path / "model.json"
    assert run_cli("finetune-toy", "--dataset", labeled_path,
                   "--output", model, "--epochs", 80) == 0
    out = tmp_path / "scores.txt"
    assert run_cli("score-criteria", "--corpus", docs5_path,
                   "--model", model, "--output", out) == 0
    assert "toy-finetuned" in capsys.readouterr().out
    for line in out.read_text(encoding="utf-8").splitlines():
        assert line.split()[5] == "toy-finetuned"


def test_score_criteria_missing_corpus(tmp_path, capsys):
    code = run_cli("score-criteria", "--corpus", tmp_path / "nope.jsonl",
                   "--model", "toy-base", "--output", tmp_path / "o.txt")
    assert code == 2
    assert "nope.jsonl" in capsys.readouterr().err


def test_score_criteria_unknown_model(docs5_path, tmp_path, capsys):
    code = run_cli("score-criteria", "--corpus", docs5_path,
                   "--model", "imaginary", "--output", tmp_path / "o.txt")
    assert code == 1
    assert "imaginary" in capsys.readouterr().err


def test_score_criteria_bad_device(docs5_path, tmp_path, capsys):
    code = run_cli("score-criteria", "--corpus", docs5_path, "--model", "toy-base",
                   "--output", tmp_path / "o.txt", "--device", "tpu")
    assert code == 1
    assert "only cpu" in capsys.readouterr().err


def test_embed_happy_path(docs5_path, tmp_path, capsys):
    out = tmp_path / "emb.txt"
    code = run_cli("embed", "--corpus", docs5_path, "--output", out, "--dim", 16)
    assert code == 0
    assert "5 vectors (dim 16)" in capsys.readouterr().out
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "16"
    assert len(lines) == 6


def test_embed_with_topics(docs5_path, tmp_path):
    topics = write_jsonl(tmp_path / "t.jsonl", [
        {"topic_id": "t1", "query": "honey cough"},
        {"topic_id": "t2", "query": "zinc colds"},
    ])
    out = tmp_path / "emb.txt"
    assert run_cli("embed", "--corpus", docs5_path, "--topics", topics,
                   "--output", out, "--dim", 8) == 0
    ids = [line.split()[0] for line in out.read_text(encoding="utf-8").splitlines()[1:]]
    assert ids == ["d1", "d2", "d3", "d4", "d5", "t1", "t2"]


def test_embed_bad_dim(docs5_path, tmp_path, capsys):
    code = run_cli("embed", "--corpus", docs5_path,
                   "--output", tmp_path / "e.txt", "--dim", 0)
    assert code == 1
    assert "dimension" in capsys.readouterr().err


def test_finetune_toy_prints_per_criterion_accuracy(labeled_path, tmp_path, capsys):
    out = tmp_path / "model.json"
    assert run_cli("finetune-toy", "--dataset", labeled_path, "--output", out) == 0
    stdout = capsys.readouterr().out
    for criterion in (1, 2, 7, 8):
        assert f"criterion {criterion}: train accuracy" in stdout
    assert "wrote model artifact" in stdout
    assert out.exists()


def test_finetune_toy_bad_dataset(tmp_path, capsys):
    path = write_jsonl(tmp_path / "bad.jsonl", [{"text": "x", "labels": [0, 1]}])
    code = run_cli("finetune-toy", "--dataset", path, "--output", tmp_path / "m.json")
    assert code == 1
    assert "4 values" in capsys.readouterr().err


def test_finetune_toy_unwritable_output(labeled_path, tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory", encoding="utf-8")
    code = run_cli("finetune-toy", "--dataset", labeled_path,
                   "--output", blocker / "m.json")
    assert code == 2
    assert "io error" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    assert run_cli() == 1
    assert run_cli("no-such-command") == 1
    assert run_cli("embed") == 1
    assert run_cli("score-criteria", "--corpus", "c.jsonl") == 1
    err = capsys.readouterr().err
    assert "usage error" in err
