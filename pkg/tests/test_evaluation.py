"""Ingestion, splits, 1-NN scoring, the protocol, and the exporters."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from men.alignment import SampleSet
from men.config import MenConfig
from men.datasets import (
    ingest,
    make_face_like,
    make_informative_classes,
    read_pgm,
    write_pgm,
)
from men.errors import DataError
from men.evaluation import (
    SplitSpec,
    evaluate,
    export_bases,
    export_paths,
    nn_classify,
    path_csv_lines,
    split_indices,
)
from men.pipeline import fit, project

from oracles import exhaustive_nn, replay_path


FIT_CFG = MenConfig(alpha=0.01, kappa=0.5, lambda2=1.0, d=2, K=6, pca_retain=0)


class TestIngestCsv:
    def test_two_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,0\n3,4,1\n")
        s = ingest(path, "csv-matrix")
        assert_allclose(s.data, [[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(s.labels, [0, 1])

    def test_ragged_row_named(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,0\n3,4\n")
        with pytest.raises(DataError, match="d.csv:2"):
            ingest(path, "csv-matrix")

    def test_bad_label_named(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,0\n3,4,x\n")
        with pytest.raises(DataError, match="d.csv:2"):
            ingest(path, "csv-matrix")

    def test_noncompact_labels_remapped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,5\n3,4,9\n5,6,5\n")
        s = ingest(path, "csv-matrix")
        assert np.array_equal(s.labels, [0, 1, 0])


class TestGraymaps:
    def test_roundtrip(self, tmp_path):
        image = np.arange(12, dtype=np.uint8).reshape(3, 4)
        write_pgm(tmp_path / "i.pgm", image)
        assert np.array_equal(read_pgm(tmp_path / "i.pgm"), image)

    def test_flatten_and_scale(self, tmp_path):
        image = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        class_dir = tmp_path / "c0"
        class_dir.mkdir()
        write_pgm(class_dir / "a.pgm", image)
        write_pgm(class_dir / "b.pgm", image)
        (tmp_path / "c1").mkdir()
        write_pgm(tmp_path / "c1" / "a.pgm", 255 - image)
        s = ingest(tmp_path, "raw-gray-images")
        assert_allclose(s.data[0], [0.0, 1.0, 1.0, 0.0])
        assert np.array_equal(s.labels, [0, 0, 1])

    def test_forty_by_forty_dimension(self, tmp_path):
        rng = np.random.default_rng(0)
        for k in range(2):
            d = tmp_path / f"class{k}"
            d.mkdir()
            for i in range(2):
                write_pgm(
                    d / f"{i}.pgm",
                    rng.integers(0, 256, size=(40, 40)).astype(np.uint8),
                )
        s = ingest(tmp_path, "raw-gray-images")
        assert s.p == 1600

    def test_manifest(self, tmp_path):
        image = np.full((2, 2), 7, dtype=np.uint8)
        write_pgm(tmp_path / "img0.pgm", image)
        write_pgm(tmp_path / "img1.pgm", image + 1)
        manifest = tmp_path / "list.txt"
        manifest.write_text("img0.pgm,3\nimg1.pgm,8\n")
        s = ingest(manifest, "raw-gray-images")
        assert np.array_equal(s.labels, [0, 1])

    def test_manifest_bad_label(self, tmp_path):
        write_pgm(tmp_path / "img0.pgm", np.zeros((2, 2), dtype=np.uint8))
        manifest = tmp_path / "list.txt"
        manifest.write_text("img0.pgm,notanint\n")
        with pytest.raises(DataError, match="list.txt:1"):
            ingest(manifest, "raw-gray-images")

    def test_mismatched_shapes(self, tmp_path):
        d = tmp_path / "c0"
        d.mkdir()
        write_pgm(d / "a.pgm", np.zeros((2, 2), dtype=np.uint8))
        write_pgm(d / "b.pgm", np.zeros((3, 3), dtype=np.uint8))
        with pytest.raises(DataError, match="shape"):
            ingest(tmp_path, "raw-gray-images")


class TestSplits:
    def test_sizes_and_reproducibility(self):
        s = make_informative_classes(10, 6, [0, 1, 2], n_classes=3, seed=1)
        spec = SplitSpec(per_class_train=6, seed=42, repeats=2)
        tr1, te1 = split_indices(s, spec, 0)
        tr2, te2 = split_indices(s, spec, 0)
        assert np.array_equal(tr1, tr2) and np.array_equal(te1, te2)
        assert len(tr1) == 18 and len(te1) == 12
        assert np.array_equal(np.sort(np.concatenate([tr1, te1])), np.arange(30))
        tr3, _ = split_indices(s, spec, 1)
        assert not np.array_equal(tr1, tr3)

    def test_train_too_large(self):
        s = make_informative_classes(5, 6, [0, 1, 2], n_classes=3, seed=2)
        with pytest.raises(DataError, match="per_class_train"):
            split_indices(s, SplitSpec(per_class_train=5), 0)


class TestNnClassify:
    def test_exact_match_wins(self):
        train = np.array([[0.0, 0.0], [5.0, 5.0]])
        labels = np.array([0, 1])
        assert nn_classify(train, labels, np.array([[5.0, 5.0]]))[0] == 1

    def test_self_test_is_perfect(self):
        rng = np.random.default_rng(3)
        embed = rng.normal(size=(20, 3))
        labels = rng.integers(0, 4, 20)
        assert np.array_equal(nn_classify(embed, labels, embed), labels)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(4)
        train = rng.normal(size=(30, 4))
        labels = rng.integers(0, 3, 30)
        test = rng.normal(size=(25, 4))
        assert np.array_equal(
            nn_classify(train, labels, test), exhaustive_nn(train, labels, test)
        )

    def test_tie_smallest_index(self):
        train = np.array([[1.0], [1.0]])
        labels = np.array([1, 0])
        assert nn_classify(train, labels, np.array([[1.0]]))[0] == 1

    def test_empty_training_error(self):
        with pytest.raises(DataError, match="empty"):
            nn_classify(np.zeros((0, 2)), np.zeros(0, dtype=int), np.zeros((1, 2)))


class TestEvaluate:
    def test_matches_manual_composition(self):
        s = make_informative_classes(12, 8, [0, 1, 2], n_classes=3, separation=1.0, seed=5)
        spec = SplitSpec(per_class_train=8, seed=7, repeats=1)
        result = evaluate(s, FIT_CFG, spec, [2])
        train_idx, test_idx = split_indices(s, spec, 0)
        train = s.subset(train_idx)
        model, _ = fit(train, FIT_CFG.with_overrides(d=2))
        pred = nn_classify(
            project(model, train),
            s.labels[train_idx],
            project(model, s.subset(test_idx)),
        )
        manual = float(np.mean(pred == s.labels[test_idx]))
        assert result.rates[0, 0] == pytest.approx(manual)

    def test_separable_dataset_rate(self):
        s = make_informative_classes(20, 12, [0, 2, 4], n_classes=3, separation=1.5, seed=6)
        result = evaluate(s, FIT_CFG, SplitSpec(per_class_train=10, seed=0, repeats=3), [1, 2])
        assert result.mean_rates[-1] >= 0.95
        assert result.best_dim in (1, 2)

    def test_reproducible(self):
        s = make_informative_classes(10, 8, [0, 1, 2], n_classes=3, seed=8)
        spec = SplitSpec(per_class_train=6, seed=3, repeats=2)
        r1 = evaluate(s, FIT_CFG, spec, [1, 2])
        r2 = evaluate(s, FIT_CFG, spec, [1, 2])
        assert np.array_equal(r1.rates, r2.rates)

    def test_empty_grid(self):
        s = make_informative_classes(6, 6, [0, 1], n_classes=2, seed=9)
        with pytest.raises(DataError, match="dim_grid"):
            evaluate(s, FIT_CFG, SplitSpec(per_class_train=3), [])

    def test_boxplot_five_numbers(self):
        s = make_informative_classes(10, 8, [0, 1, 2], n_classes=3, seed=10)
        result = evaluate(s, FIT_CFG, SplitSpec(per_class_train=6, seed=1, repeats=4), [1, 2])
        assert result.boxplot.shape == (2, 5)
        for gi in range(2):
            column = result.rates[:, gi]
            assert result.boxplot[gi, 0] == column.min()
            assert result.boxplot[gi, 4] == column.max()
            assert result.boxplot[gi, 2] == np.percentile(column, 50)


class TestExportBases:
    def _model(self, tmp_path, **overrides):
        s = make_informative_classes(8, 16, [0, 1, 2], n_classes=3, seed=11)
        cfg = FIT_CFG.with_overrides(**overrides) if overrides else FIT_CFG
        model, report = fit(s, cfg)
        return model, report

    def test_constant_column_mid_gray(self, tmp_path):
        model, _ = self._model(tmp_path)
        model.values[:, 0] = 3.7
        paths = export_bases(model, (4, 4), tmp_path / "bases")
        image = read_pgm(paths[0])
        assert np.all(image == 128)

    def test_one_hot_column(self, tmp_path):
        model, _ = self._model(tmp_path)
        model.values[:, 0] = 0.0
        model.values[5, 0] = 1.0
        image = read_pgm(export_bases(model, (4, 4), tmp_path / "b")[0])
        flat = image.reshape(-1)
        assert flat[5] == 255
        assert np.all(np.delete(flat, 5) == 0)

    def test_support_coincides(self, tmp_path):
        model, _ = self._model(tmp_path)
        image = read_pgm(export_bases(model, (4, 4), tmp_path / "b")[0]).reshape(-1)
        column = model.values[:, 0]
        zero_level = np.round((0.0 - column.min()) / (column.max() - column.min()) * 255)
        nonzero_pixels = set(np.flatnonzero(image != zero_level))
        assert nonzero_pixels <= set(np.flatnonzero(column != 0))
        assert nonzero_pixels  # something is visible

    def test_quantization_roundtrip(self, tmp_path):
        model, _ = self._model(tmp_path)
        column = model.values[:, 1].copy()
        image = read_pgm(export_bases(model, (4, 4), tmp_path / "b")[1]).reshape(-1)
        low, high = column.min(), column.max()
        recovered = image / 255.0 * (high - low) + low
        assert np.abs(recovered - column).max() <= (high - low) / 255.0 * 0.5 + 1e-12

    def test_shape_mismatch(self, tmp_path):
        model, _ = self._model(tmp_path)
        with pytest.raises(DataError, match="shape"):
            export_bases(model, (5, 5), tmp_path / "b")

    def test_raw_space_with_pca(self, tmp_path):
        s = make_face_like(4, n_classes=3, side=8, seed=12)
        model, _ = fit(s, MenConfig(alpha=0.01, kappa=0.5, lambda2=1.0, d=2, K=4))
        paths = export_bases(model, (8, 8), tmp_path / "b")
        assert len(paths) == 2
        assert read_pgm(paths[0]).shape == (8, 8)


class TestExportPaths:
    def test_k_one_two_rows(self, tmp_path):
        s = make_informative_classes(8, 10, [0, 1, 2], n_classes=3, seed=13)
        _, report = fit(s, FIT_CFG.with_overrides(d=1, K=1))
        out = export_paths(report, tmp_path)
        lines = out[0].read_text().strip().splitlines()
        assert len(lines) == 3  # header, init row, one enter row
        assert lines[1].split(",")[1] == "init"
        assert lines[2].split(",")[1] == "enter"

    def test_l1_column_consistent(self, tmp_path):
        s = make_informative_classes(8, 10, [0, 1, 2], n_classes=3, seed=14)
        _, report = fit(s, FIT_CFG.with_overrides(d=2, K=5))
        for cpath in report.paths:
            for line in path_csv_lines(cpath)[1:]:
                fields = line.split(",")
                l1 = float(fields[3])
                coeffs = np.array([float(v) for v in fields[5:]])
                assert abs(np.abs(coeffs).sum() - l1) <= 1e-12

    def test_replay_reproduces_final(self, tmp_path):
        s = make_informative_classes(8, 10, [0, 1, 2], n_classes=3, seed=15)
        model, report = fit(s, FIT_CFG.with_overrides(d=1, K=6))
        cpath = report.paths[0]
        final = replay_path(cpath)
        assert_allclose(final, cpath.final_coefficients(), atol=1e-10)

    def test_coefficients_zero_before_enter(self, tmp_path):
        s = make_informative_classes(8, 10, [0, 1, 2], n_classes=3, seed=16)
        _, report = fit(s, FIT_CFG.with_overrides(d=1, K=6))
        rows = path_csv_lines(report.paths[0])[1:]
        seen = set()
        for line in rows:
            fields = line.split(",")
            event, variable = fields[1], int(fields[2])
            coeffs = [float(v) for v in fields[5:]]
            for j in range(len(coeffs)):
                if j not in seen and not (event == "enter" and variable == j):
                    assert coeffs[j] == 0.0
            if event == "enter":
                seen.add(variable)
