import csv
import json
from pathlib import Path

import numpy as np
import pytest

from incfs.cli import main


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestInject:
    def test_masked_cell_count_on_wine(self, wine_path, tmp_path):
        out = tmp_path / "wine_missing.csv"
        code = main(["inject", "--dataset", str(wine_path), "--mechanism", "mcar",
                     "--rate", "0.05", "--seed", "1", "--output", str(out)])
        assert code == 0
        rows = read_rows(out)[1:]
        empty = sum(1 for row in rows for cell in row if cell == "")
        assert empty == int(0.05 * 178 * 13)  # 115

    def test_invalid_rate_exits_config_error(self, tiny_csv, tmp_path):
        code = main(["inject", "--dataset", str(tiny_csv), "--mechanism", "mcar",
                     "--rate", "1.5", "--output", str(tmp_path / "x.csv")])
        assert code == 2

    def test_same_seed_byte_identical(self, tiny_csv, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["inject", "--dataset", str(tiny_csv), "--mechanism", "mnar",
                         "--rate", "0.1", "--seed", "3", "--output", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestImputeSelect:
    def test_impute_mean_writes_complete_csv(self, tiny_csv, tmp_path):
        injected = tmp_path / "inj.csv"
        main(["inject", "--dataset", str(tiny_csv), "--mechanism", "mcar",
              "--rate", "0.1", "--output", str(injected)])
        out = tmp_path / "imp.csv"
        assert main(["impute", "--dataset", str(injected), "--method", "mean",
                     "--output", str(out)]) == 0
        rows = read_rows(out)[1:]
        assert all(cell != "" for row in rows for cell in row)

    def test_impute_ewmc_emits_trace(self, tiny_csv, tmp_path):
        injected = tmp_path / "inj.csv"
        main(["inject", "--dataset", str(tiny_csv), "--mechanism", "mcar",
              "--rate", "0.1", "--output", str(injected)])
        out = tmp_path / "imp.csv"
        trace = tmp_path / "trace.csv"
        assert main(["impute", "--dataset", str(injected), "--method", "ewmc",
                     "--output", str(out), "--trace", str(trace)]) == 0
        rows = read_rows(trace)
        assert rows[0] == ["iteration", "objective"]
        assert len(rows) > 1

    def test_select_emits_sorted_weights(self, tiny_csv, tmp_path):
        out = tmp_path / "weights.csv"
        assert main(["select", "--dataset", str(tiny_csv), "--method", "mu-reliefa",
                     "--output", str(out)]) == 0
        rows = read_rows(out)
        assert rows[0] == ["feature_name", "weight"]
        weights = [float(w) for _, w in rows[1:]]
        assert weights == sorted(weights, reverse=True)
        assert len(rows) == 5  # 4 features + header


class TestRun:
    def run_tiny(self, tiny_csv, outdir, seed="5"):
        return main(["run", "--dataset", str(tiny_csv), "--mechanism", "mcar",
                     "--rate", "0.1", "--seed", seed, "--runs", "1", "--folds", "2",
                     "--methods", "ewmc+mu-reliefa", "--max-outer", "3", "--k", "3",
                     "--output-dir", str(outdir)])

    def test_outputs_exist(self, tiny_csv, tmp_path):
        outdir = tmp_path / "out"
        assert self.run_tiny(tiny_csv, outdir) == 0
        for name in ("config.json", "weights.csv", "zeta_trace.csv", "imputed.csv",
                     "accuracy.csv", "summary.csv"):
            assert (outdir / name).exists(), name

    def test_rerun_is_byte_identical(self, tiny_csv, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.run_tiny(tiny_csv, a) == 0
        assert self.run_tiny(tiny_csv, b) == 0
        for name in ("weights.csv", "zeta_trace.csv", "imputed.csv",
                     "accuracy.csv", "summary.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_rerun_from_persisted_config(self, tiny_csv, tmp_path):
        a = tmp_path / "a"
        assert self.run_tiny(tiny_csv, a) == 0
        b = tmp_path / "b"
        code = main(["run", "--config", str(a / "config.json"),
                     "--dataset", str(tiny_csv), "--output-dir", str(b)])
        assert code == 0
        assert (a / "accuracy.csv").read_bytes() == (b / "accuracy.csv").read_bytes()

    def test_infinite_delta_single_outer_iteration(self, tiny_csv, tmp_path):
        outdir = tmp_path / "out"
        code = main(["run", "--dataset", str(tiny_csv), "--mechanism", "mcar",
                     "--rate", "0.1", "--runs", "1", "--folds", "2",
                     "--methods", "ewmc+mu-reliefa", "--delta", "inf",
                     "--output-dir", str(outdir)])
        assert code == 0
        assert len(read_rows(outdir / "zeta_trace.csv")) == 2  # header + one row

    def test_missing_dataset_is_config_error(self, tmp_path):
        code = main(["run", "--dataset", str(tmp_path / "absent.csv"),
                     "--mechanism", "mcar", "--output-dir", str(tmp_path / "o")])
        assert code == 2


class TestSweep:
    def test_single_point_grid(self, tiny_csv, tmp_path):
        out = tmp_path / "grid.csv"
        code = main(["sweep", "--dataset", str(tiny_csv), "--ranks", "2",
                     "--gammas", "1.0", "--runs", "1", "--folds", "2",
                     "--rate", "0.1", "--k", "3", "--output", str(out)])
        assert code == 0
        rows = read_rows(out)
        assert rows[0] == ["rank", "gamma", "accuracy"]
        assert len(rows) == 2

    def test_default_grid_is_25_cells(self):
        from incfs.cli import build_parser
        args = build_parser().parse_args(
            ["sweep", "--dataset", "x.csv", "--output", "y.csv"])
        assert len(args.ranks) * len(args.gammas) == 25


class TestCompare:
    def write_acc(self, path, values):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "accuracy"])
            for v in values:
                writer.writerow(["d", repr(float(v))])

    def test_identical_files_give_p_one(self, tmp_path):
        a, b, out = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "w.csv"
        self.write_acc(a, [0.5, 0.6, 0.7])
        self.write_acc(b, [0.5, 0.6, 0.7])
        assert main(["compare", "--a", str(a), "--b", str(b), "--output", str(out)]) == 0
        header, row = read_rows(out)
        assert header[4] == "p_value"
        assert float(row[4]) == 1.0
        assert row[5] == "no"

    def test_length_mismatch_is_error(self, tmp_path):
        a, b, out = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "w.csv"
        self.write_acc(a, [0.5, 0.6])
        self.write_acc(b, [0.5])
        assert main(["compare", "--a", str(a), "--b", str(b), "--output", str(out)]) == 2

    def test_uniform_improvement_has_zero_r_minus(self, tmp_path):
        a, b, out = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "w.csv"
        base = np.linspace(0.4, 0.8, 20)
        self.write_acc(a, base + 0.1)
        self.write_acc(b, base)
        assert main(["compare", "--a", str(a), "--b", str(b), "--output", str(out)]) == 0
        row = read_rows(out)[1]
        assert float(row[3]) == 0.0  # r_minus
        assert float(row[4]) < 0.05
        assert row[5] == "yes"


class TestConfigPrecedence:
    def test_flags_override_config_file(self, tiny_csv, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"rate": 0.2, "seed": 4}))
        out = tmp_path / "inj.csv"
        code = main(["inject", "--dataset", str(tiny_csv), "--mechanism", "mcar",
                     "--rate", "0.1", "--config", str(cfg), "--output", str(out)])
        assert code == 0
        rows = read_rows(out)[1:]
        empty = sum(1 for row in rows for cell in row if cell == "")
        assert empty == int(0.1 * 24 * 4)  # flag wins over config's 0.2
