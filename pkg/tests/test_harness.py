"""Tests for the replicated-experiment driver and its CSV exports."""

import numpy as np
import pytest

from layertail import (
    Constant,
    ExperimentPlan,
    GumbelCopula,
    ParameterError,
    ParetoTail,
    PolarMRV,
    REPORT_HEADER,
    TopCount,
    replication_rng,
    run_plan,
    run_replication,
    write_mse_csv,
    write_report_csv,
    write_scatter_csvs,
)

SMALL_PLAN = ExperimentPlan(
    scenarios=(GumbelCopula(theta=2.0), PolarMRV(Constant(0.5))),
    sizes=(300, 500),
    threshold=TopCount(20),
    replications=6,
    backend="pairwise",
    master_seed=99,
)


@pytest.fixture(scope="module")
def small_report():
    return run_plan(SMALL_PLAN)


class TestPlanValidation:
    def test_rejects_empty_grid(self):
        with pytest.raises(ParameterError):
            ExperimentPlan(scenarios=(), sizes=(100,))
        with pytest.raises(ParameterError):
            ExperimentPlan(scenarios=(GumbelCopula(theta=1.0),), sizes=())

    def test_rejects_bad_settings(self):
        sc = (GumbelCopula(theta=1.0),)
        with pytest.raises(ParameterError):
            ExperimentPlan(scenarios=sc, sizes=(100,), replications=0)
        with pytest.raises(ParameterError):
            ExperimentPlan(scenarios=sc, sizes=(100,), master_seed=-1)
        with pytest.raises(ParameterError):
            ExperimentPlan(scenarios=sc, sizes=(100,), backend="gpu")

    def test_rejects_threshold_too_large_for_smallest_size(self):
        with pytest.raises(ParameterError):
            ExperimentPlan(
                scenarios=(GumbelCopula(theta=1.0),),
                sizes=(50,),
                threshold=TopCount(100),
            )

    def test_cell_order_is_scenario_major(self):
        labels = [(type(sc).__name__, n) for sc, n in SMALL_PLAN.cells]
        assert labels == [
            ("GumbelCopula", 300),
            ("GumbelCopula", 500),
            ("PolarMRV", 300),
            ("PolarMRV", 500),
        ]


class TestRunPlan:
    def test_report_shape(self, small_report):
        assert len(small_report.cells) == 4
        for cell in small_report.cells:
            assert cell.n_reps == 6
            assert cell.lambda_w.shape == (6,)
            assert cell.lambda_d.shape == (6,)
            assert cell.t_n == 20
            assert cell.compute_seconds > 0.0

    def test_truth_sources(self, small_report):
        gumbel_cells = [c for c in small_report.cells if c.scenario.startswith("gumbel")]
        polar_cells = [c for c in small_report.cells if c.scenario.startswith("polar")]
        for c in gumbel_cells:
            assert c.truth == pytest.approx(2.0 - 2.0**0.5, abs=1e-12)
        for c in polar_cells:
            assert c.truth == pytest.approx(1.0, abs=1e-9)

    def test_matches_hand_assembled_replications(self, small_report):
        # cell 0 is (gumbel theta=2, N=300); replication ri uses the canonical rng
        cell = small_report.cells[0]
        for ri in range(cell.n_reps):
            rng = replication_rng(99, 0, ri)
            est_w, est_d = run_replication(
                GumbelCopula(theta=2.0), 300, TopCount(20), "pairwise", rng
            )
            assert cell.lambda_w[ri] == est_w.lambda_hat
            assert cell.lambda_d[ri] == est_d.lambda_hat

    def test_summary_recomputable_from_lambdas(self, small_report):
        for cell in small_report.cells:
            assert cell.mean_d == pytest.approx(cell.lambda_d.mean(), abs=1e-12)
            assert cell.mse_d == pytest.approx(
                np.mean((cell.lambda_d - cell.truth) ** 2), abs=1e-12
            )
            assert cell.scaledvar_d == pytest.approx(
                cell.t_n * cell.lambda_d.var(ddof=1), abs=1e-10
            )
            n = cell.n_reps
            bias_sq = (cell.mean_d - cell.truth) ** 2
            assert cell.mse_d == pytest.approx(
                bias_sq + (n - 1) / n * cell.scaledvar_d / cell.t_n, abs=1e-10
            )

    def test_constant_polar_weight_estimates_are_one(self, small_report):
        # equal weight columns: every weight-based estimate must be exactly 1
        for cell in small_report.cells:
            if cell.scenario.startswith("polar:constant"):
                assert np.all(cell.lambda_w == 1.0)

    def test_sequential_rerun_is_identical(self, small_report):
        again = run_plan(SMALL_PLAN)
        for a, b in zip(small_report.cells, again.cells):
            np.testing.assert_array_equal(a.lambda_w, b.lambda_w)
            np.testing.assert_array_equal(a.lambda_d, b.lambda_d)
            assert a.degenerate_count == b.degenerate_count

    def test_worker_pool_matches_sequential(self, small_report):
        pooled = run_plan(SMALL_PLAN, workers=2)
        for a, b in zip(small_report.cells, pooled.cells):
            np.testing.assert_array_equal(a.lambda_w, b.lambda_w)
            np.testing.assert_array_equal(a.lambda_d, b.lambda_d)
            assert a.mse_d == b.mse_d

    def test_degenerate_cells_warn_and_flag(self):
        # microscopic weight scale: every degree is 0, so every degree-based
        # estimate is degenerate and the cell must be flagged
        plan = ExperimentPlan(
            scenarios=(GumbelCopula(theta=2.0, marginal=ParetoTail(1.1, 1e-8)),),
            sizes=(200,),
            threshold=TopCount(10),
            replications=4,
            backend="pairwise",
            master_seed=5,
        )
        with pytest.warns(UserWarning, match="degenerate"):
            report = run_plan(plan)
        cell = report.cells[0]
        assert cell.degenerate_count == 4
        assert cell.flagged
        assert np.all(cell.lambda_d == 0.0)

    def test_healthy_cells_not_flagged(self, small_report):
        for cell in small_report.cells:
            assert not cell.flagged
            assert cell.degenerate_count == 0


class TestExports:
    def test_report_csv_layout(self, small_report, tmp_path):
        path = tmp_path / "report.csv"
        write_report_csv(small_report, path)
        lines = path.read_text().splitlines()
        assert lines[0] == REPORT_HEADER
        assert (
            REPORT_HEADER
            == "scenario,N,t_n,truth,mean_w,mean_d,mse_w,mse_d,"
            "scaledvar_w,scaledvar_d,n_reps,degenerate_count"
        )
        assert len(lines) == 1 + 4
        first = lines[1].split(",")
        assert first[0] == "gumbel:theta=2"
        assert first[1] == "300"
        assert first[2] == "20"
        assert float(first[3]) == pytest.approx(2.0 - 2.0**0.5, abs=1e-9)
        assert first[10] == "6"

    def test_report_csv_deterministic_bytes(self, small_report, tmp_path):
        p1, p2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        write_report_csv(small_report, p1)
        write_report_csv(run_plan(SMALL_PLAN), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_mse_csv_long_format(self, small_report, tmp_path):
        path = tmp_path / "mse.csv"
        write_mse_csv(small_report, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "scenario,N,target,mse"
        assert len(lines) == 1 + 2 * 4
        targets = [ln.split(",")[2] for ln in lines[1:]]
        assert targets == ["weights", "degrees"] * 4
        for ln, cell in zip(lines[1::2], small_report.cells):
            scen, n, _, mse = ln.split(",")
            assert scen == cell.scenario
            assert int(n) == cell.n_nodes
            assert float(mse) == pytest.approx(cell.mse_w, rel=1e-9)

    def test_scatter_files(self, small_report, tmp_path):
        written = write_scatter_csvs(small_report, tmp_path / "scatter")
        assert len(written) == 4
        names = sorted(p.name for p in written)
        assert names == [
            "scatter_gumbel_theta_2_N300.csv",
            "scatter_gumbel_theta_2_N500.csv",
            "scatter_polar_constant_0.5_N300.csv",
            "scatter_polar_constant_0.5_N500.csv",
        ]
        lines = written[0].read_text().splitlines()
        assert lines[0] == "rep,lambda_w,lambda_d"
        assert len(lines) == 1 + 6
        rep, lw, ld = lines[3].split(",")
        assert rep == "2"
        assert float(lw) == pytest.approx(small_report.cells[0].lambda_w[2], rel=1e-9)
        assert float(ld) == pytest.approx(small_report.cells[0].lambda_d[2], rel=1e-9)


class TestReplicationRng:
    def test_distinct_streams(self):
        a = replication_rng(1, 0, 0).random(4)
        b = replication_rng(1, 0, 1).random(4)
        c = replication_rng(1, 1, 0).random(4)
        d = replication_rng(2, 0, 0).random(4)
        rows = np.array([a, b, c, d])
        assert np.unique(rows, axis=0).shape[0] == 4

    def test_reproducible(self):
        np.testing.assert_array_equal(
            replication_rng(7, 3, 11).random(8), replication_rng(7, 3, 11).random(8)
        )
