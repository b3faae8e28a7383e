"""Export operations: validation order, atomic writes, file contents."""

import json
import os

import numpy as np
import pytest

from qualityexport.errors import ExportError
from qualityexport.export import (
    ExporterJob,
    export_criterion_scores,
    export_embeddings,
    finetune_toy,
)
from qualityexport.writers import atomic_write, write_criterion_file, write_embedding_file


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return str(path)


def read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


class TestExporterJob:
    def test_rejects_unknown_mode(self):
        with pytest.raises(ExportError, match="mode must be one of"):
            ExporterJob(mode="classify", corpus_path="c", output_path="o", model="toy-base")

    def test_requires_paths(self):
        with pytest.raises(ExportError, match="required"):
            ExporterJob(mode="criteria", corpus_path="", output_path="o", model="m")

    def test_criteria_needs_model(self):
        with pytest.raises(ExportError, match="needs a model"):
            ExporterJob(mode="criteria", corpus_path="c", output_path="o")

    def test_criteria_rejects_topics(self):
        with pytest.raises(ExportError, match="documents only"):
            ExporterJob(
                mode="criteria", corpus_path="c", output_path="o",
                model="toy-base", topics_path="t",
            )

    def test_numeric_bounds(self):
        with pytest.raises(ExportError, match="batch size"):
            ExporterJob(mode="embeddings", corpus_path="c", output_path="o", batch_size=0)
        with pytest.raises(ExportError, match="max sentences"):
            ExporterJob(mode="embeddings", corpus_path="c", output_path="o", max_sentences=0)
        with pytest.raises(ExportError, match="dimension"):
            ExporterJob(mode="embeddings", corpus_path="c", output_path="o", dim=0)

    def test_only_cpu_device(self):
        with pytest.raises(ExportError, match="only cpu"):
            ExporterJob(
                mode="criteria", corpus_path="c", output_path="o",
                model="toy-base", device="gpu",
            )

    def test_mode_mismatch_between_job_and_operation(self, docs5_path, tmp_path):
        embed_job = ExporterJob(
            mode="embeddings", corpus_path=docs5_path,
            output_path=str(tmp_path / "e.txt"),
        )
        with pytest.raises(ExportError, match="expected criteria"):
            export_criterion_scores(embed_job)
        score_job = ExporterJob(
            mode="criteria", corpus_path=docs5_path,
            output_path=str(tmp_path / "s.txt"), model="toy-base",
        )
        with pytest.raises(ExportError, match="expected embeddings"):
            export_embeddings(score_job)


class TestCriterionExport:
    def test_five_doc_fixture_gives_five_lines(self, docs5_path, tmp_path):
        out = tmp_path / "scores.txt"
        result = export_criterion_scores(
            ExporterJob(mode="criteria", corpus_path=docs5_path,
                        output_path=str(out), model="toy-base")
        )
        assert result.count == 5
        assert result.source_tag == "toy-base"
        lines = read_lines(out)
        assert len(lines) == 5
        for line in lines:
            parts = line.split()
            assert len(parts) == 6
            assert parts[5] == "toy-base"
            for cell in parts[1:5]:
                value = float(cell)
                assert 0.0 <= value <= 1.0

    def test_deterministic_bytes(self, docs5_path, tmp_path):
        paths = []
        for name in ("a.txt", "b.txt"):
            out = tmp_path / name
            export_criterion_scores(
                ExporterJob(mode="criteria", corpus_path=docs5_path,
                            output_path=str(out), model="toy-large")
            )
            paths.append(out.read_bytes())
        assert paths[0] == paths[1]

    def test_empty_document_still_scored(self, docs5_path, tmp_path):
        out = tmp_path / "scores.txt"
        export_criterion_scores(
            ExporterJob(mode="criteria", corpus_path=docs5_path,
                        output_path=str(out), model="toy-base")
        )
        empty_row = [line for line in read_lines(out) if line.startswith("d4 ")]
        assert len(empty_row) == 1
        # zero bias puts the featureless document at 0.5 everywhere
        assert empty_row[0].split()[1:5] == ["0.500000"] * 4

    def test_model_swap_changes_tag_and_values(self, docs5_path, tmp_path):
        base = tmp_path / "base.txt"
        large = tmp_path / "large.txt"
        for out, model in ((base, "toy-base"), (large, "toy-large")):
            export_criterion_scores(
                ExporterJob(mode="criteria", corpus_path=docs5_path,
                            output_path=str(out), model=model)
            )
        base_lines = read_lines(base)
        large_lines = read_lines(large)
        assert all(line.endswith("toy-base") for line in base_lines)
        assert all(line.endswith("toy-large") for line in large_lines)
        assert base_lines != large_lines

    def test_bad_corpus_aborts_before_writing(self, tmp_path):
        corpus = write_jsonl(tmp_path / "c.jsonl", [{"doc_id": "d"}])
        out = tmp_path / "scores.txt"
        with pytest.raises(ExportError, match="doc_id and text"):
            export_criterion_scores(
                ExporterJob(mode="criteria", corpus_path=corpus,
                            output_path=str(out), model="toy-base")
            )
        assert not out.exists()
        assert not list(tmp_path.glob(".qx-tmp-*"))

    def test_model_load_failure_aborts_before_writing(self, docs5_path, tmp_path):
        out = tmp_path / "scores.txt"
        with pytest.raises(ExportError, match="neither a bundled identifier"):
            export_criterion_scores(
                ExporterJob(mode="criteria", corpus_path=docs5_path,
                            output_path=str(out), model="missing-model")
            )
        assert not out.exists()

    def test_existing_output_survives_a_failed_run(self, docs5_path, tmp_path):
        out = tmp_path / "scores.txt"
        out.write_text("precious\n", encoding="utf-8")
        bad_corpus = write_jsonl(tmp_path / "c.jsonl", [{"text": "no id"}])
        with pytest.raises(ExportError):
            export_criterion_scores(
                ExporterJob(mode="criteria", corpus_path=bad_corpus,
                            output_path=str(out), model="toy-base")
            )
        assert out.read_text(encoding="utf-8") == "precious\n"


class TestEmbeddingExport:
    def test_three_docs_two_topics_five_vectors(self, tmp_path):
        corpus = write_jsonl(tmp_path / "c.jsonl", [
            {"doc_id": "d1", "text": "honey for cough."},
            {"doc_id": "d2", "text": "steam inhalation."},
            {"doc_id": "d3", "text": "zinc lozenges."},
        ])
        topics = write_jsonl(tmp_path / "t.jsonl", [
            {"topic_id": "t1", "query": "honey cough"},
            {"topic_id": "t2", "query": "zinc colds"},
        ])
        out = tmp_path / "emb.txt"
        result = export_embeddings(
            ExporterJob(mode="embeddings", corpus_path=corpus,
                        topics_path=topics, output_path=str(out), dim=12)
        )
        assert result.count == 5
        assert result.dim == 12
        lines = read_lines(out)
        assert lines[0] == "12"
        assert len(lines) == 6
        assert [line.split()[0] for line in lines[1:]] == ["d1", "d2", "d3", "t1", "t2"]
        for line in lines[1:]:
            assert len(line.split()) == 13

    def test_identical_texts_identical_lines(self, tmp_path):
        corpus = write_jsonl(tmp_path / "c.jsonl", [
            {"doc_id": "a", "text": "same words here."},
            {"doc_id": "b", "text": "same words here."},
        ])
        out = tmp_path / "emb.txt"
        export_embeddings(
            ExporterJob(mode="embeddings", corpus_path=corpus,
                        output_path=str(out), dim=8)
        )
        lines = read_lines(out)
        assert lines[1].split()[1:] == lines[2].split()[1:]

    def test_truncation_limits_document_influence(self, tmp_path):
        # beyond max_sentences the texts differ, so vectors must not
        head = "first sentence. " * 3
        corpus = write_jsonl(tmp_path / "c.jsonl", [
            {"doc_id": "a", "text": head + "tail about honey."},
            {"doc_id": "b", "text": head + "tail about gardening."},
        ])
        out = tmp_path / "emb.txt"
        export_embeddings(
            ExporterJob(mode="embeddings", corpus_path=corpus,
                        output_path=str(out), dim=8, max_sentences=3)
        )
        lines = read_lines(out)
        assert lines[1].split()[1:] == lines[2].split()[1:]

    def test_embed_description_changes_topic_vector(self, tmp_path):
        corpus = write_jsonl(tmp_path / "c.jsonl", [{"doc_id": "d", "text": "x."}])
        topics = write_jsonl(tmp_path / "t.jsonl", [
            {"topic_id": "t1", "query": "honey", "description": "for cough relief"},
        ])
        plain = tmp_path / "plain.txt"
        enriched = tmp_path / "desc.txt"
        for out, flag in ((plain, False), (enriched, True)):
            export_embeddings(
                ExporterJob(mode="embeddings", corpus_path=corpus, topics_path=topics,
                            output_path=str(out), dim=8, embed_description=flag)
            )
        assert read_lines(plain)[2] != read_lines(enriched)[2]

    def test_id_shared_between_corpus_and_topics_rejected(self, tmp_path):
        corpus = write_jsonl(tmp_path / "c.jsonl", [{"doc_id": "x", "text": "a."}])
        topics = write_jsonl(tmp_path / "t.jsonl", [{"topic_id": "x", "query": "q"}])
        out = tmp_path / "emb.txt"
        with pytest.raises(ExportError, match="both a document and a topic"):
            export_embeddings(
                ExporterJob(mode="embeddings", corpus_path=corpus,
                            topics_path=topics, output_path=str(out))
            )
        assert not out.exists()

    def test_deterministic_bytes(self, docs5_path, tmp_path):
        blobs = []
        for name in ("a.txt", "b.txt"):
            out = tmp_path / name
            export_embeddings(
                ExporterJob(mode="embeddings", corpus_path=docs5_path,
                            output_path=str(out), dim=16)
            )
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]


class TestFinetuneToy:
    def test_writes_loadable_artifact_and_reports_accuracy(self, labeled_path, tmp_path):
        out = tmp_path / "model.json"
        accuracy = finetune_toy(labeled_path, str(out), epochs=120)
        assert set(accuracy) == {1, 2, 7, 8}
        assert all(0.0 <= v <= 1.0 for v in accuracy.values())
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert payload["format"] == "qualityexport.model.v1"
        assert payload["model_id"] == "toy-finetuned"

    def test_rejects_small_dataset(self, tmp_path):
        rows = [{"text": f"row {i}", "labels": [i % 2, 0, 1, 0]} for i in range(19)]
        path = write_jsonl(tmp_path / "small.jsonl", rows)
        with pytest.raises(ExportError, match="at least 20"):
            finetune_toy(path, str(tmp_path / "m.json"))

    def test_rejects_bad_model_id(self, labeled_path, tmp_path):
        with pytest.raises(ExportError, match="model id"):
            finetune_toy(labeled_path, str(tmp_path / "m.json"), model_id="has space")

    def test_dataset_schema_violation_aborts(self, tmp_path):
        path = write_jsonl(tmp_path / "bad.jsonl", [{"text": "a", "labels": [2, 0, 0, 0]}])
        out = tmp_path / "m.json"
        with pytest.raises(ExportError, match="not 0 or 1"):
            finetune_toy(path, str(out))
        assert not out.exists()


class TestWriters:
    def test_atomic_write_replaces_in_one_step(self, tmp_path):
        out = tmp_path / "file.txt"
        atomic_write(str(out), lambda fh: fh.write("one\n"))
        atomic_write(str(out), lambda fh: fh.write("two\n"))
        assert out.read_text(encoding="utf-8") == "two\n"
        assert os.listdir(tmp_path) == ["file.txt"]

    def test_atomic_write_cleans_temp_on_failure(self, tmp_path):
        out = tmp_path / "file.txt"

        def boom(fh):
            fh.write("partial")
            raise RuntimeError("mid-render failure")

        with pytest.raises(RuntimeError):
            atomic_write(str(out), boom)
        assert os.listdir(tmp_path) == []

    def test_write_criterion_file_validates_range(self, tmp_path):
        out = tmp_path / "s.txt"
        probs = np.array([[0.2, 0.3, 1.4, 0.5]])
        with pytest.raises(ExportError, match="outside"):
            write_criterion_file(str(out), ["d"], probs, "tag", (1, 2, 7, 8))
        assert not out.exists()

    def test_write_criterion_file_validates_tag_and_shape(self, tmp_path):
        out = tmp_path / "s.txt"
        good = np.full((1, 4), 0.5)
        with pytest.raises(ExportError, match="source tag"):
            write_criterion_file(str(out), ["d"], good, "bad tag", (1, 2, 7, 8))
        with pytest.raises(ExportError, match="shape"):
            write_criterion_file(str(out), ["d1", "d2"], good, "tag", (1, 2, 7, 8))

    def test_write_embedding_file_validates(self, tmp_path):
        out = tmp_path / "e.txt"
        with pytest.raises(ExportError, match="components"):
            write_embedding_file(str(out), [("a", np.zeros(3))], dim=4)
        with pytest.raises(ExportError, match="non-finite"):
            write_embedding_file(str(out), [("a", np.array([np.inf] * 4))], dim=4)
        with pytest.raises(ExportError, match="duplicate"):
            write_embedding_file(
                str(out), [("a", np.zeros(4)), ("a", np.zeros(4))], dim=4
            )
        assert not out.exists()
