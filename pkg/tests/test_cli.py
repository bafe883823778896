import numpy as np
import pytest

from biarch import read_csv, read_model
from biarch.cli import cli_main

from oracles import best_biarchetype_match_error


def run(argv):
    return cli_main([str(a) for a in argv])


@pytest.fixture()
def toy_csv(tmp_path):
    path = tmp_path / "toy.csv"
    assert run(["simulate", "--preset", "toy", "--out", path]) == 0
    return path


class TestSimulate:
    def test_toy_round_trip(self, toy_csv):
        dm = read_csv(toy_csv)
        np.testing.assert_array_equal(dm.values.ravel(), np.arange(1.0, 26.0))

    def test_block_gaussian_with_labels(self, tmp_path):
        data = tmp_path / "g.csv"
        labels = tmp_path / "labels.csv"
        code = run(
            ["simulate", "--preset", "block-gaussian", "--n", 10, "--m", 8,
             "--seed", 3, "--out", data, "--labels-out", labels]
        )
        assert code == 0
        assert read_csv(data).values.shape == (10, 8)
        lab = read_csv(labels)
        assert lab.column_names == ("axis", "index", "label")
        assert lab.values.shape == (18, 3)

    def test_planted_values_flag(self, tmp_path):
        data = tmp_path / "p.csv"
        code = run(
            ["simulate", "--preset", "planted", "--n", 4, "--m", 4,
             "--noise", 0, "--values", "0,1,1,0", "--out", data]
        )
        assert code == 0
        v = read_csv(data).values
        np.testing.assert_array_equal(v[:2, :2], 0.0)
        np.testing.assert_array_equal(v[:2, 2:], 1.0)

    def test_bad_values_flag_is_usage_error(self, tmp_path):
        code = run(
            ["simulate", "--preset", "planted", "--values", "1,2,3",
             "--out", tmp_path / "x.csv"]
        )
        assert code == 1


class TestFit:
    def test_toy_fit_emits_expected_z(self, toy_csv, tmp_path):
        out = tmp_path / "model.doc"
        zcsv = tmp_path / "z.csv"
        code = run(
            ["fit", toy_csv, "--k", 2, "--c", 2, "--seed", 1, "--out", out,
             "--emit-z", zcsv]
        )
        assert code == 0
        z = read_csv(zcsv).values
        assert best_biarchetype_match_error(
            z, np.array([[1.0, 5.0], [21.0, 25.0]])
        ) <= 1e-2
        model = read_model(out)
        assert model.rss <= 1e-4

    def test_emitted_csvs_reingest(self, toy_csv, tmp_path):
        paths = {name: tmp_path / f"{name}.csv" for name in
                 ("alpha", "gamma", "recon")}
        code = run(
            ["fit", toy_csv, "--k", 2, "--c", 2, "--seed", 1,
             "--out", tmp_path / "m.doc",
             "--emit-alpha", paths["alpha"],
             "--emit-gamma", paths["gamma"],
             "--emit-recon", paths["recon"]]
        )
        assert code == 0
        assert read_csv(paths["alpha"]).values.shape == (5, 2)
        assert read_csv(paths["gamma"]).values.shape == (2, 5)
        np.testing.assert_allclose(
            read_csv(paths["recon"]).values, read_csv(toy_csv).values, atol=1e-2
        )

    def test_missing_input_is_data_error(self, tmp_path):
        code = run(
            ["fit", tmp_path / "missing.csv", "--k", 2, "--c", 2,
             "--out", tmp_path / "m.doc"]
        )
        assert code == 2

    def test_usage_error_without_required_flags(self, toy_csv, tmp_path):
        assert run(["fit", toy_csv, "--k", 2, "--out", tmp_path / "m.doc"]) == 1

    def test_bad_k_is_usage_error(self, toy_csv, tmp_path):
        assert run(
            ["fit", toy_csv, "--k", 0, "--c", 1, "--out", tmp_path / "m.doc"]
        ) == 1

    def test_k_too_large_is_data_error(self, toy_csv, tmp_path):
        assert run(
            ["fit", toy_csv, "--k", 9, "--c", 1, "--out", tmp_path / "m.doc"]
        ) == 2

    def test_reproducible_documents_across_threads(self, toy_csv, tmp_path):
        out1 = tmp_path / "m1.doc"
        out2 = tmp_path / "m2.doc"
        base = ["fit", toy_csv, "--k", 2, "--c", 2, "--seed", 9,
                "--restarts", 4]
        assert run(base + ["--out", out1, "--threads", 1]) == 0
        assert run(base + ["--out", out2, "--threads", 3]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_standardize_flag(self, tmp_path):
        data = tmp_path / "g.csv"
        run(["simulate", "--preset", "block-gaussian", "--n", 12, "--m", 6,
             "--seed", 1, "--out", data])
        code = run(["fit", data, "--k", 2, "--c", 2, "--standardize",
                    "--out", tmp_path / "m.doc"])
        assert code == 0

    def test_threads_env_fallback(self, toy_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("BIARCH_THREADS", "2")
        out1 = tmp_path / "env.doc"
        assert run(["fit", toy_csv, "--k", 2, "--c", 2, "--seed", 7,
                    "--out", out1]) == 0
        monkeypatch.delenv("BIARCH_THREADS")
        out2 = tmp_path / "plain.doc"
        assert run(["fit", toy_csv, "--k", 2, "--c", 2, "--seed", 7,
                    "--out", out2]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestAa:
    def test_aa_model_has_identity_columns(self, toy_csv, tmp_path):
        out = tmp_path / "aa.doc"
        assert run(["aa", toy_csv, "--k", 2, "--seed", 4, "--out", out]) == 0
        model = read_model(out)
        np.testing.assert_array_equal(model.gamma.values, np.eye(5))


class TestSurface:
    def test_toy_elbow_printed(self, toy_csv, tmp_path, capsys):
        out = tmp_path / "surface.csv"
        code = run(
            ["surface", toy_csv, "--k-min", 1, "--k-max", 3,
             "--c-min", 1, "--c-max", 3, "--seed", 5, "--restarts", 3,
             "--out", out]
        )
        assert code == 0
        assert "elbow k=2 c=2" in capsys.readouterr().out
        surf = read_csv(out)
        assert surf.column_names == ("k", "c", "rss")
        assert surf.values.shape == (9, 3)
        row11 = surf.values[(surf.values[:, 0] == 1) & (surf.values[:, 1] == 1)]
        assert row11[0, 2] == pytest.approx(1300.0, abs=1e-6)

    def test_no_elbow_reported(self, tmp_path, capsys):
        # a steep geometric surface never flattens inside a tiny grid
        rng = np.random.default_rng(0)
        data = tmp_path / "r.csv"
        lines = ["c1,c2,c3,c4,c5,c6"]
        for i in range(12):
            lines.append(",".join(str(v) for v in rng.normal(size=6)))
        data.write_text("\n".join(lines) + "\n")
        code = run(
            ["surface", data, "--k-min", 1, "--k-max", 2, "--c-min", 1,
             "--c-max", 2, "--threshold", 1e-9, "--restarts", 1,
             "--max-iter", 20, "--out", tmp_path / "s.csv"]
        )
        assert code == 0
        assert "elbow none" in capsys.readouterr().out


class TestBaseline:
    def test_assignments_csv(self, tmp_path):
        data = tmp_path / "p.csv"
        run(["simulate", "--preset", "planted", "--n", 12, "--m", 8,
             "--noise", 0.01, "--seed", 4, "--out", data])
        out = tmp_path / "assign.csv"
        assert run(["baseline", data, "--k", 2, "--c", 2, "--out", out]) == 0
        table = read_csv(out)
        assert table.column_names == ("axis", "index", "label")
        rows = table.values[table.values[:, 0] == 0]
        cols = table.values[table.values[:, 0] == 1]
        assert rows.shape[0] == 12 and cols.shape[0] == 8
        assert set(rows[:, 2]) <= {1.0, 2.0}


class TestTopLevel:
    def test_no_command_is_usage_error(self):
        assert run([]) == 1

    def test_unknown_command_is_usage_error(self):
        assert run(["frobnicate"]) == 1

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "biarch" in capsys.readouterr().out
