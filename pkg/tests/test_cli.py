import json
import subprocess
import sys

import numpy as np

from gmmsearch import EmSettings, SearchConfig
from gmmsearch.cli import build_parser

CLI = [sys.executable, "-m", "gmmsearch.cli"]


def run_cli(*args, cwd=None):
    return subprocess.run(
        CLI + [str(a) for a in args], capture_output=True, text=True, cwd=cwd, timeout=600
    )


class TestFlagDefaults:
    def test_fit_defaults_match_library_defaults(self):
        args = build_parser().parse_args(["fit", "data.csv"])
        config = SearchConfig()
        assert args.kmin == config.kmin
        assert args.kmax == config.kmax
        assert tuple(args.affinities) == config.affinities
        assert tuple(args.linkages) == config.linkages
        assert tuple(args.constraints) == config.constraints
        assert args.criterion == config.criterion
        assert args.subset_cap == config.subset_cap
        assert args.kmeans_reps == config.kmeans_reps
        assert args.seed == config.seed
        em = EmSettings()
        assert args.max_iter == em.max_iter
        assert args.tol == em.tol

    def test_unknown_flag_rejected_with_exit_1(self):
        result = run_cli("fit", "data.csv", "--frobnicate")
        assert result.returncode == 1


class TestSynthFit:
    def test_three_component_pipeline(self, tmp_path):
        synth = run_cli("synth", "--kind", "three_component", "--seed", "7",
                        "--out", tmp_path / "d.csv")
        assert synth.returncode == 0, synth.stderr
        assert (tmp_path / "d.csv").exists()
        assert (tmp_path / "d_truth.csv").exists()

        fit = run_cli("fit", tmp_path / "d.csv", "--seed", "7",
                      "--out-dir", tmp_path / "out")
        assert fit.returncode == 0, fit.stderr
        summary = fit.stdout.strip()
        assert "k=3" in summary
        assert "constraint=spherical" in summary
        assert "criterion=bic" in summary
        assert "reg_covar=" in summary
        for name in ("labels.csv", "model.json", "grid.csv"):
            assert (tmp_path / "out" / name).exists()
        labels = (tmp_path / "out" / "labels.csv").read_text().strip().splitlines()
        assert len(labels) == 100
        grid = (tmp_path / "out" / "grid.csv").read_text().strip().splitlines()
        assert len(grid) == 1 + 11 * 4 * 19

    def test_missing_file_exit_1_names_path(self, tmp_path):
        result = run_cli("fit", tmp_path / "missing.csv")
        assert result.returncode == 1
        assert "missing.csv" in result.stderr

    def test_search_failure_exit_2(self, tmp_path):
        data = tmp_path / "tiny.csv"
        data.write_text("0,0\n1,1\n2,0\n3,1\n")
        result = run_cli("fit", data, "--kmin", "10", "--kmax", "10",
                         "--out-dir", tmp_path / "out")
        assert result.returncode == 2
        assert "search failed" in result.stderr


class TestDeterminism:
    def test_identical_seeds_byte_identical_outputs_across_threads(self, tmp_path):
        synth = run_cli("synth", "--kind", "three_component", "--seed", "3",
                        "--out", tmp_path / "d.csv")
        assert synth.returncode == 0
        outputs = {}
        for name, extra in (("a", []), ("b", []), ("c", ["--threads", "8"])):
            out = tmp_path / name
            result = run_cli("fit", tmp_path / "d.csv", "--seed", "3", "--kmin", "2",
                             "--kmax", "5", "--out-dir", out, *extra)
            assert result.returncode == 0, result.stderr
            outputs[name] = {
                f: (out / f).read_bytes() for f in ("labels.csv", "model.json", "grid.csv")
            }
        assert outputs["a"] == outputs["b"]
        assert outputs["a"] == outputs["c"]

    def test_synth_regeneration_is_byte_identical(self, tmp_path):
        run_cli("synth", "--kind", "hierarchy", "--seed", "11", "--out", tmp_path / "h1.csv")
        run_cli("synth", "--kind", "hierarchy", "--seed", "11", "--out", tmp_path / "h2.csv")
        assert (tmp_path / "h1.csv").read_bytes() == (tmp_path / "h2.csv").read_bytes()


class TestAri:
    def test_identical_files_print_one(self, tmp_path):
        labels = tmp_path / "a.csv"
        labels.write_text("0\n0\n1\n1\n2\n")
        result = run_cli("ari", labels, labels)
        assert result.returncode == 0
        assert float(result.stdout.strip()) == 1.0

    def test_known_zero(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("0\n0\n1\n1\n")
        b.write_text("0\n0\n0\n1\n")
        result = run_cli("ari", a, b)
        assert abs(float(result.stdout.strip())) < 1e-12


class TestHfit:
    def test_writes_dendrogram_and_cuts(self, tmp_path):
        synth = run_cli("synth", "--kind", "hierarchy", "--seed", "0", "--out", tmp_path / "h.csv")
        assert synth.returncode == 0
        result = run_cli("hfit", tmp_path / "h.csv", "--max-components", "2",
                         "--affinities", "l2", "--linkages", "single",
                         "--out-dir", tmp_path / "out")
        assert result.returncode == 0, result.stderr
        assert "leaves=" in result.stdout
        record = json.loads((tmp_path / "out" / "dendrogram.json").read_text())
        assert record["size"] == 800
        cuts = (tmp_path / "out" / "cuts.csv").read_text().strip().splitlines()
        assert len(cuts) == 800
        first = cuts[0].split(",")
        assert first[0] == "0"  # depth-0 cut puts everything in cluster 0


class TestBench:
    def test_writes_report(self, tmp_path):
        data = tmp_path / "d.csv"
        truth = tmp_path / "t.csv"
        rng = np.random.default_rng(0)
        x = np.vstack([rng.normal(-8, 0.5, (20, 2)), rng.normal(8, 0.5, (20, 2))])
        data.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in x) + "\n")
        truth.write_text("\n".join("0" if i < 20 else "1" for i in range(40)) + "\n")
        result = run_cli("bench", data, truth, "--reps", "2", "--kmin", "2", "--kmax", "2",
                         "--affinities", "l2", "--linkages", "ward",
                         "--constraints", "spherical", "--out-dir", tmp_path / "out")
        assert result.returncode == 0, result.stderr
        lines = (tmp_path / "out" / "benchmark.csv").read_text().strip().splitlines()
        assert lines[0] == "config,rep,status,ari,seconds"
        assert len(lines) == 3
        summary = json.loads((tmp_path / "out" / "benchmark.json").read_text())
        assert summary["meta"]["reps"] == 2
