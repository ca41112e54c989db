import io
import math
import subprocess
import sys

import numpy as np
import pytest

from corrmetric.cli import fmt, main, parse_table
from corrmetric.index import brute_force_knn

PLANAR = "a,1,0\nb,0,1\nc,1,1\n"


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def write(tmp_path):
    def _write(text, name="data.csv"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


def read_matrix(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    labels = lines[0].split(",")[1:]
    rows = [ln.split(",") for ln in lines[1:]]
    assert [r[0] for r in rows] == labels
    return labels, np.array([[float(v) for v in r[1:]] for r in rows])


class TestParseTable:
    def test_header_and_labels(self):
        t = parse_table("name,x,y\na,1,2\nb,3,4\n")
        assert t.labels == ["a", "b"] and t.columns == ["name", "x", "y"]
        np.testing.assert_array_equal(t.rows, [[1, 2], [3, 4]])

    def test_unlabelled(self):
        t = parse_table("1,2\n3,4\n")
        assert t.labels == ["row0", "row1"] and t.columns is None

    def test_header_without_labels(self):
        t = parse_table("x,y\n1,2\n")
        assert t.labels == ["row0"] and t.columns == ["x", "y"]


class TestMatrix:
    def test_planar_angles(self, write):
        code, text = run(["matrix", write(PLANAR), "--sim", "cosine", "--transform", "angular"])
        assert code == 0
        labels, D = read_matrix(text)
        assert labels == ["a", "b", "c"]
        assert D[0, 1] == pytest.approx(math.pi / 2, rel=1e-12)
        assert D[0, 2] == pytest.approx(math.pi / 4, rel=1e-12)
        assert D[1, 2] == pytest.approx(math.pi / 4, rel=1e-12)

    def test_output_file(self, write, tmp_path):
        dest = tmp_path / "out.csv"
        code, text = run(["matrix", write(PLANAR), "-o", str(dest)])
        assert code == 0 and text == ""
        assert dest.read_text().startswith(",a,b,c\n")

    def test_constant_row_exit_3(self, write, capsys):
        code, _ = run(["matrix", write("p,1,2,3\nflat,4,4,4\n"), "--sim", "pearson"])
        assert code == 3
        assert "'flat'" in capsys.readouterr().err

    def test_non_numeric_field_exit_2(self, write, capsys):
        code, _ = run(["matrix", write("1,2\n3,x\n")])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_ragged_exit_2(self, write, capsys):
        code, _ = run(["matrix", write("a,1,2\nb,3\n")])
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_duplicate_labels_exit_2(self, write):
        assert run(["matrix", write("a,1,2\na,3,4\n")])[0] == 2

    def test_missing_file_exit_2(self, tmp_path):
        assert run(["matrix", str(tmp_path / "nope.csv")])[0] == 2

    def test_bad_flags_exit_2(self, write):
        assert run(["matrix", write(PLANAR), "--sim", "kendall"])[0] == 2
        assert run(["matrix", write(PLANAR), "--transform", "power-sine:3"])[0] == 2

    def test_one_minus_warning(self, write):
        code, text = run(["matrix", write(PLANAR), "--transform", "one-minus"])
        assert code == 0
        assert text.splitlines()[0].startswith("# WARNING: non-metric transform")
        _, D = read_matrix(text)
        assert D[0, 1] == pytest.approx(1.0, abs=1e-15)
        assert D[0, 2] == pytest.approx(1 - math.sqrt(0.5), abs=1e-15)

    @pytest.mark.parametrize("sim", ["cosine", "pearson", "spearman"])
    @pytest.mark.parametrize("kind", ["angular", "correlation", "acute-angular", "absolute-correlation"])
    def test_round_trip(self, write, sim, kind):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((12, 5))
        body = "".join(f"r{i}," + ",".join(fmt(v) for v in row) + "\n" for i, row in enumerate(X))
        code, text = run(["matrix", write(body), "--sim", sim, "--transform", kind])
        assert code == 0
        _, D = read_matrix(text)
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0.0)


class TestVerify:
    def test_pass(self):
        code, text = run(["verify", "--sim", "pearson", "--transform", "correlation", "--trials", "2000", "--seed", "42"])
        assert code == 0
        assert "violations: 0" in text and "seed: 42" in text and text.endswith("result: pass\n")

    def test_fail_shows_worst_triple(self):
        code, text = run(["verify", "--sim", "cosine", "--transform", "one-minus", "--trials", "2000", "--seed", "42"])
        assert code == 1
        assert "worst_x: " in text and text.endswith("result: FAIL\n")

    @pytest.mark.parametrize(
        "argv",
        [["--trials", "0"], ["--dims", "2,x"], ["--dims", "0"], ["--transform", "sine"], ["--sim", "pearson", "--dims", "1"]],
    )
    def test_usage_errors(self, argv):
        assert run(["verify", *argv])[0] == 2

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("CORRMETRIC_SEED", "7")
        code, text = run(["verify", "--trials", "100"])
        assert code == 0 and "seed: 7" in text
        monkeypatch.setenv("CORRMETRIC_SEED", "seven")
        assert run(["verify", "--trials", "100"])[0] == 2

    def test_default_seed(self, monkeypatch):
        monkeypatch.delenv("CORRMETRIC_SEED", raising=False)
        assert "seed: 42" in run(["verify", "--trials", "100"])[1]


class TestClassify:
    @pytest.mark.parametrize(
        "name, label",
        [("f2", "CaseA"), ("f4", "CaseB"), ("f5:0.5", "CaseB"), ("one-minus-cos", "NonMetricPreserving")],
    )
    def test_named(self, name, label):
        code, text = run(["classify", name])
        assert code == 0
        assert text.splitlines()[-1] == f"classification: {label}"

    def test_unknown_exit_2(self):
        assert run(["classify", "tanh"])[0] == 2
        assert run(["classify", "f2", "--grid", "4"])[0] == 2


class TestKnn:
    def test_self_match(self, write):
        code, text = run(["knn", write(PLANAR), "--query", "c", "-k", "1"])
        assert code == 0
        lines = text.splitlines()
        assert lines[0] == "# query: c"
        assert lines[1] == "c,0"
        assert lines[2].startswith("# distance_evaluations: ")

    def test_one_minus_refused(self, write, capsys):
        assert run(["knn", write(PLANAR), "--query", "a", "--transform", "one-minus"])[0] == 4
        assert "refusing to build index on non-metric transform" in capsys.readouterr().err

    def test_errors(self, write):
        path = write(PLANAR)
        assert run(["knn", path, "--query", "zz"])[0] == 2
        assert run(["knn", path, "--query", "a", "-k", "4"])[0] == 2
        assert run(["knn", path, "--query", "a", "--leaf-size", "0"])[0] == 2
        assert run(["knn", path])[0] == 2
        assert run(["knn", path, "--query-file", write("q,1,2,3\n", "q.csv")])[0] == 2

    def test_matches_brute_force_reference(self, write):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((1000, 6))
        Q = rng.standard_normal((5, 6))
        data = write("".join(f"p{i}," + ",".join(fmt(v) for v in row) + "\n" for i, row in enumerate(X)))
        queries = write("".join(f"q{i}," + ",".join(fmt(v) for v in row) + "\n" for i, row in enumerate(Q)), "q.csv")
        code, text = run(["knn", data, "--query-file", queries, "-k", "10", "--sim", "spearman", "--transform", "correlation"])
        assert code == 0
        got = [ln for ln in text.splitlines() if not ln.startswith("#")]
        expected = []
        for q in Q:
            expected += [f"p{i},{fmt(d)}" for i, d in brute_force_knn(X, q, 10, "spearman", "correlation")]
        assert got == expected


class TestDeterminism:
    def test_repeated_commands_identical(self, write):
        rng = np.random.default_rng(1)
        path = write("".join(f"r{i}," + ",".join(fmt(v) for v in row) + "\n" for i, row in enumerate(rng.standard_normal((200, 4)))))
        for argv in (
            ["verify", "--sim", "spearman", "--trials", "1000", "--seed", "3"],
            ["knn", path, "--query", "r5", "-k", "4", "--seed", "9"],
            ["matrix", path, "--transform", "absolute-correlation"],
            ["classify", "f5:0.25"],
        ):
            assert run(argv) == run(argv)

    def test_module_entry_point(self, write):
        cmd = [sys.executable, "-m", "corrmetric", "classify", "f1"]
        a = subprocess.run(cmd, capture_output=True)
        b = subprocess.run(cmd, capture_output=True)
        assert a.returncode == 0 and a.stdout == b.stdout
        assert a.stdout.endswith(b"classification: CaseA\n")
