"""Tests for the experiment harness, record persistence, and the CLI."""

import csv
import json
import math

import pytest

from tomoreduce import (
    ExperimentConfig,
    ExperimentKind,
    fit_scaling,
    run_experiment,
    write_records,
)
from tomoreduce.cli import main
from tomoreduce.harness import OUTPUT_DIR_ENV_VAR, _cell_summary, experiment_cells


def small_sweep_config(**overrides):
    base = dict(
        experiment=ExperimentKind.CHAIN_SWEEP,
        r_values=(1, 2),
        d_values=(2, 4),
        eps_values=(0.1,),
        trials=10,
        master_seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def strip_wall_time_csv(path) -> list[list[str]]:
    rows = read_csv(path)
    idx = rows[0].index("wall_time")
    return [row[:idx] + row[idx + 1 :] for row in rows]


def strip_wall_time_jsonl(path) -> list[dict]:
    out = []
    with open(path) as f:
        for line in f:
            rec = json.loads(line)
            rec.pop("wall_time")
            out.append(rec)
    return out


class TestConfigValidation:
    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            small_sweep_config(r_values=())

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            small_sweep_config(eps_values=(0.0,))

    def test_rejects_unknown_backend(self):
        with pytest.raises(ValueError):
            small_sweep_config(backend="guess")

    def test_rejects_unknown_format(self):
        with pytest.raises(ValueError):
            small_sweep_config(out_format="xml")

    def test_rejects_grid_with_no_valid_cell(self):
        with pytest.raises(ValueError, match="no cell"):
            small_sweep_config(r_values=(3,), d_values=(2,))

    def test_crossed_grid_filters_r_above_d(self):
        cfg = small_sweep_config(r_values=(1, 3), d_values=(2, 4))
        cells = experiment_cells(cfg)
        assert all(c["r"] <= c["d"] for c in cells)
        assert {(c["r"], c["d"]) for c in cells} == {(1, 2), (1, 4), (3, 4)}


class TestChainSweep:
    def test_forty_records_zero_violations(self, tmp_path):
        out = tmp_path / "sweep.csv"
        summary = run_experiment(small_sweep_config(out_path=str(out)))
        assert len(summary.records) == 40
        assert summary.violations_total == 0
        assert summary.failures_total == 0
        rows = read_csv(out)
        assert len(rows) == 41  # header + one row per trial
        assert rows[0][0] == "experiment"

    def test_guaranteed_bound_columns(self, tmp_path):
        config = small_sweep_config()
        summary = run_experiment(config)
        for rec in summary.records:
            assert rec["final_vs_guaranteed_ok"] is True
            assert rec["keep_vs_mixed_fidelity_ok"] is True
            assert rec["projection_identity_ok"] is True
            assert rec["samples_total"] == config.n_copies + rec["extra_copies"]
            assert rec["guaranteed_bound"] == pytest.approx(1 - 16 * rec["epsilon"])


class TestDeterminism:
    def test_csv_reproducible_modulo_wall_time(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(small_sweep_config(out_path=str(a)))
        run_experiment(small_sweep_config(out_path=str(b)))
        assert strip_wall_time_csv(a) == strip_wall_time_csv(b)

    def test_jsonl_reproducible_modulo_wall_time(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        cfg = dict(out_format="jsonl", trials=5)
        run_experiment(small_sweep_config(out_path=str(a), **cfg))
        run_experiment(small_sweep_config(out_path=str(b), **cfg))
        assert strip_wall_time_jsonl(a) == strip_wall_time_jsonl(b)

    def test_different_seed_changes_records(self, tmp_path):
        a = run_experiment(small_sweep_config(trials=3, master_seed=1))
        b = run_experiment(small_sweep_config(trials=3, master_seed=2))
        fa = [r["final_fidelity"] for r in a.records]
        fb = [r["final_fidelity"] for r in b.records]
        assert fa != fb


class TestOtherExperiments:
    def test_scaling_pure_cells_and_records(self):
        cfg = ExperimentConfig(
            experiment=ExperimentKind.SCALING_PURE,
            d_values=(2,),
            n_values=(100, 1000),
            trials=5,
            master_seed=3,
        )
        summary = run_experiment(cfg)
        assert len(summary.records) == 10
        for rec in summary.records:
            assert 0.0 <= rec["infidelity"] <= 1.0

    def test_scaling_mixed_budget_floor_cells_dropped(self):
        cfg = ExperimentConfig(
            experiment=ExperimentKind.SCALING_MIXED,
            r_values=(1,),
            d_values=(4,),
            n_values=(10, 100),  # 10 < d^2 = 16 is dropped
            trials=2,
            master_seed=4,
        )
        cells = experiment_cells(cfg)
        assert [c["n"] for c in cells] == [100]

    def test_gentle_records(self):
        cfg = ExperimentConfig(
            experiment=ExperimentKind.GENTLE_MEASUREMENT,
            r_values=(1,),
            d_values=(4,),
            delta_values=(0.01,),
            trials=5,
            master_seed=5,
        )
        summary = run_experiment(cfg)
        assert len(summary.records) == 5
        for rec in summary.records:
            assert not rec["skipped"]
            assert rec["trace_distance"] <= 3 * math.sqrt(0.01)

    def test_prop_search_records(self):
        cfg = ExperimentConfig(
            experiment=ExperimentKind.PROPOSITION_SEARCH,
            d_values=(2, 3),
            eps_values=(0.1,),
            trials=2,
            prop_batch=500,
            master_seed=6,
        )
        summary = run_experiment(cfg)
        assert len(summary.records) == 4
        assert summary.violations_total == 0
        for rec in summary.records:
            assert rec["checked"] == 500
            assert rec["min_slack"] >= -1e-9


class TestCellSummary:
    def test_violation_count_matches_records(self):
        # the summary counts records with any unsatisfied analytic inequality
        cell = {"r": 1, "d": 2, "epsilon": 0.1}
        base = {
            "final_fidelity": 0.9,
            "keep_probability": 0.95,
            "samples_total": 100,
            "error": "",
        }
        records = [
            {**base, "violations": 0},
            {**base, "violations": 2},
            {**base, "violations": 1},
            {**base, "violations": 0, "error": "support estimate disjoint"},
        ]
        summary = _cell_summary(ExperimentKind.CHAIN_SWEEP, cell, records)
        assert summary.violations == 2
        assert summary.failures == 1
        assert summary.trials == 4


class TestWriteRecords:
    def test_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            write_records([], tmp_path / "x.csv", "csv")

    def test_csv_none_becomes_empty_cell(self, tmp_path):
        out = tmp_path / "x.csv"
        write_records([{"a": None, "b": 1.5, "c": True}], out, "csv")
        rows = read_csv(out)
        assert rows[1] == ["", "1.5", "true"]

    def test_jsonl_round_trip(self, tmp_path):
        out = tmp_path / "x.jsonl"
        recs = [{"a": None, "b": 1.5, "c": False, "d": "x"}]
        write_records(recs, out, "jsonl")
        with open(out) as f:
            assert json.loads(f.readline()) == recs[0]


class TestFitScaling:
    def test_exact_inverse_law(self):
        records = [{"n": n, "infidelity": 3.0 / n} for n in (10, 100, 1000) for _ in range(5)]
        fit = fit_scaling(records)
        assert fit.slope == pytest.approx(-1.0, abs=1e-6)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-6)
        assert max(abs(r) for r in fit.residuals) < 1e-9

    def test_exact_inverse_square_law(self):
        records = [{"n": n, "infidelity": 2.0 / n**2} for n in (10, 100, 1000)]
        fit = fit_scaling(records)
        assert fit.slope == pytest.approx(-2.0, abs=1e-6)

    def test_requires_three_budgets(self):
        records = [{"n": n, "infidelity": 1.0 / n} for n in (10, 100)]
        with pytest.raises(ValueError):
            fit_scaling(records)


class TestCli:
    def test_chain_sweep_success_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(
            [
                "chain-sweep",
                "--r",
                "1",
                "--d",
                "2,3",
                "--eps",
                "0.1",
                "--trials",
                "3",
                "--seed",
                "11",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert out.exists()
        captured = capsys.readouterr()
        assert "0 bound violation(s)" in captured.out

    def test_invalid_grid_exit_two(self, capsys):
        code = main(["chain-sweep", "--r", "3", "--d", "2", "--trials", "1"])
        assert code == 2
        assert "configuration error" in capsys.readouterr().err

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(tmp_path))
        code = main(
            ["prop-search", "--d", "2", "--eps", "0.1", "--trials", "1", "--batch", "200"]
        )
        assert code == 0
        assert (tmp_path / "proposition_search.csv").exists()

    def test_scale_pure_prints_fit(self, tmp_path, capsys):
        code = main(
            [
                "scale-pure",
                "--d",
                "2",
                "--n",
                "100,1000,10000",
                "--trials",
                "5",
                "--seed",
                "13",
                "--out",
                str(tmp_path / "scale.csv"),
            ]
        )
        assert code == 0
        assert "scaling fit" in capsys.readouterr().out

    def test_reduce_and_gentle_smoke(self, tmp_path):
        assert (
            main(
                [
                    "reduce",
                    "--r",
                    "2",
                    "--d",
                    "3",
                    "--eps",
                    "0.2",
                    "--trials",
                    "2",
                    "--out",
                    str(tmp_path / "r.jsonl"),
                    "--format",
                    "jsonl",
                ]
            )
            == 0
        )
        assert (
            main(
                [
                    "gentle",
                    "--r",
                    "1",
                    "--d",
                    "4",
                    "--delta",
                    "0.01",
                    "--trials",
                    "3",
                    "--out",
                    str(tmp_path / "g.csv"),
                ]
            )
            == 0
        )
