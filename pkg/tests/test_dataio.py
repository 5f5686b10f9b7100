"""Tests for the dataset and result text formats."""

import numpy as np
import pytest

from pdinfer import DatasetFormatError, read_dataset, write_dataset
from pdinfer.dataio import write_classification


class TestRoundTrip:
    def test_unlabeled(self, tmp_path):
        path = tmp_path / "data.tsv"
        write_dataset(path, [0, 1, 1, 2], metadata={"seed": 7})
        dataset = read_dataset(path)
        assert dataset.kind == "unlabeled"
        assert dataset.labels is None
        assert dataset.values.tolist() == [0, 1, 1, 2]
        assert dataset.metadata["seed"] == "7"
        assert path.read_text().startswith("# pd-infer v1 unlabeled n=4\n")

    def test_labeled(self, tmp_path):
        path = tmp_path / "data.tsv"
        write_dataset(path, [5, 0, 5], labels=[0, 1, 1])
        dataset = read_dataset(path)
        assert dataset.kind == "labeled"
        assert dataset.labels.tolist() == [0, 1, 1]
        assert dataset.values.tolist() == [5, 0, 5]

    def test_mismatched_lengths_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_dataset(tmp_path / "x.tsv", [1, 2], labels=[0])


class TestParseErrors:
    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("0\n1\n")
        with pytest.raises(DatasetFormatError, match="line 1"):
            read_dataset(path)

    def test_bad_field_count_names_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("# pd-infer v1 unlabeled n=2\n0\n1 2\n")
        with pytest.raises(DatasetFormatError, match="line 3"):
            read_dataset(path)

    def test_non_integer_field_names_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("# pd-infer v1 labeled n=1\n0\tx\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            read_dataset(path)

    def test_negative_id_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("# pd-infer v1 unlabeled n=1\n-3\n")
        with pytest.raises(DatasetFormatError, match="non-negative"):
            read_dataset(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("# pd-infer v1 unlabeled n=3\n0\n1\n")
        with pytest.raises(DatasetFormatError, match="n=3"):
            read_dataset(path)


class TestClassificationWriter:
    def test_format(self, tmp_path):
        path = tmp_path / "result.tsv"
        write_classification(
            path,
            labeling=np.array([2, 0]),
            per_item_log=np.array([-1.5, -0.25]),
            log_score=-1.75,
            sweeps=3,
            converged=True,
            metadata={"mode": "simultaneous"},
        )
        lines = path.read_text().splitlines()
        assert lines[0] == "# pd-infer v1 classification n=2"
        assert "# mode = simultaneous" in lines
        assert lines[-3] == "# total_log_score = -1.75"
        assert lines[-2] == "# sweeps = 3"
        assert lines[-1] == "# converged = true"
        records = [line for line in lines if not line.startswith("#")]
        assert records[0].split("\t")[:2] == ["0", "2"]
        assert records[1].split("\t")[:2] == ["1", "0"]
