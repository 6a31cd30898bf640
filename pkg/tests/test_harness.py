import logging

import allure
import numpy as np
import pandas as pd
import pytest

from hboa.bias.miner import distance_profile
from hboa.exceptions import ConfigError, InputError, ParseError, PlanError
from hboa.experiments.crossvalidation import audit_fold_hygiene, audit_output, crossvalidate, split_folds
from hboa.experiments.instances import OPTIMA_FILE, load_instances, prepare_instances, read_optima
from hboa.experiments.plan import load_plan
from hboa.experiments.plot_data import BY_KAPPA_FILE, PROFILE_FILE, emit_plot_data, read_plot_series
from hboa.experiments.results import read_stats, read_stats_frame, write_stats
from hboa.experiments.speedups import compute_speedups, read_report, write_report
from hboa.models import ExperimentPlan, PriorMode, RunStats
from hboa.problems.nk import solve_nk_dp
from tests.assertions import ResultAssertions
from tests.schemas import OPTIMA_ROW, PROFILE_ROW, RUN_STATS_ROW, SPEEDUP_ROW, SUMMARY_ROW

logger = logging.getLogger(__name__)


def stats_row(instance_id: str, kappa: float = 0.0, **fields) -> RunStats:
    values = dict(
        population_size=100, iterations=5, evaluations=600, hc_steps=40, wall_time=2.0, success=True
    )
    values.update(fields)
    mode = PriorMode.BIAS if kappa else PriorMode.PENALTY
    return RunStats(instance_id=instance_id, mode=mode, kappa=kappa, **values)


def tiny_plan(directory, **engine) -> ExperimentPlan:
    """Четыре экземпляра NK n=16, два фолда; без локального поиска модели строятся всегда"""
    settings = dict(
        hc_enabled=False, start_population=16, population_cap=8192, runs_per_size=2, seed=9
    )
    settings.update(engine)
    return ExperimentPlan.model_validate(
        {
            "problem": {"class": "nk", "n": 16, "k": 2},
            "instances": {"count": 4, "seed": 21},
            "crossvalidation": {"folds": 2, "fold_seed": 1, "kappas": [1.0, 2.0]},
            "engine": settings,
            "output": {"directory": str(directory)},
        }
    )


@allure.feature("Experiment Plans")
class TestPlans:
    @allure.title("Folds partition the instances into equal parts")
    @pytest.mark.smoke
    @pytest.mark.harness
    def test_split_folds(self, random_seed):
        ids = [f"nk-{i:04d}" for i in range(100)]
        folds = split_folds(ids, 10, random_seed)

        ResultAssertions.check_partition(folds, ids)
        assert all(len(fold) == 10 for fold in folds)
        assert folds == split_folds(ids, 10, random_seed)

        logger.info(f"Fold sizes: {[len(fold) for fold in folds]}")

    @allure.title("Indivisible instance count is a config error")
    @pytest.mark.harness
    @pytest.mark.parametrize("count, folds", [(99, 10), (10, 1)])
    def test_bad_folds(self, count, folds):
        with pytest.raises(ConfigError):
            split_folds([str(i) for i in range(count)], folds, 0)

        logger.info(f"{count} instances in {folds} folds rejected")

    @allure.title("Bundled plans load by name")
    @pytest.mark.smoke
    @pytest.mark.harness
    @pytest.mark.parametrize(
        "name, size, count, kappas",
        [("nk_desk", 60, 100, [1.0, 5.0]), ("sg_desk", 64, 100, [1.0, 3.0]), ("nk_smoke", 12, 4, [1.0])],
    )
    def test_bundled(self, name, size, count, kappas):
        plan = load_plan(name)
        assert plan.problem.size == size
        assert plan.instances.count == count
        assert plan.crossvalidation.kappas == kappas
        assert plan.instances_dir == plan.output.directory / "instances"

        logger.info(f"Plan {name} loaded")

    @allure.title("Broken plans map to parse, config and input errors")
    @pytest.mark.harness
    def test_broken_plans(self, tmp_path):
        syntax = tmp_path / "syntax.toml"
        syntax.write_text("[problem\nclass = 'nk'\n")
        with pytest.raises(ParseError) as error:
            load_plan(syntax)
        assert error.value.exit_code == 2

        invalid = tmp_path / "invalid.toml"
        invalid.write_text(
            "[problem]\nclass = 'nk'\nn = 20\nk = 2\n"
            "[instances]\ncount = 7\n"
            "[crossvalidation]\nfolds = 2\n"
        )
        with pytest.raises(ConfigError):
            load_plan(invalid)

        with pytest.raises(InputError):
            load_plan("no_such_plan")

        logger.info("Broken plans rejected")

    @allure.title("Prepared instances carry their exact optima")
    @pytest.mark.harness
    def test_prepare_instances(self, tmp_path):
        plan = tiny_plan(tmp_path)
        entries = prepare_instances(plan)

        assert [entry.instance_id for entry in entries] == [f"nk-{i:04d}" for i in range(4)]
        frame = read_optima(plan.instances_dir / OPTIMA_FILE)
        for row in frame.to_dict(orient="records"):
            assert OPTIMA_ROW == row
        for entry in entries:
            ResultAssertions.check_close(
                entry.optimum, solve_nk_dp(entry.load()).value, 1e-9, f"optimum of {entry.instance_id}"
            )
        assert [entry.optimum for entry in load_instances(plan)] == [e.optimum for e in entries]

        logger.info(f"Prepared {len(entries)} instances")

    @allure.title("Missing optima make the plan unrunnable")
    @pytest.mark.harness
    def test_missing_optima(self, tmp_path):
        with pytest.raises(PlanError) as error:
            load_instances(tiny_plan(tmp_path))
        assert error.value.exit_code == 4

        logger.info("Plan without optima refused")


@allure.feature("Speedups")
class TestSpeedups:
    @allure.title("Identical statistics give speedup 1 everywhere")
    @pytest.mark.smoke
    @pytest.mark.harness
    def test_identical(self):
        base = [stats_row(f"nk-{i:04d}") for i in range(3)]
        biased = [stats_row(f"nk-{i:04d}", kappa=1.0) for i in range(3)]
        report = compute_speedups(base, biased, n=60)

        for measure in ("cpu", "evaluations", "hc_steps", "population"):
            assert (report.per_instance[measure] == 1.0).all()
            assert report.median(measure, 1.0) == 1.0
        for row in report.per_instance.to_dict(orient="records"):
            assert SPEEDUP_ROW == row
        for row in report.summary.to_dict(orient="records"):
            assert SUMMARY_ROW == row

        logger.info("Unit speedups verified")

    @allure.title("Halved time gives CPU speedup 2")
    @pytest.mark.harness
    def test_cpu_speedup(self):
        report = compute_speedups(
            [stats_row("nk-0000", wall_time=10.0)], [stats_row("nk-0000", kappa=5.0, wall_time=5.0)]
        )
        assert report.per_instance.at[0, "cpu"] == 2.0
        assert report.median("cpu", 5.0) == 2.0

        logger.info("CPU speedup 2 verified")

    @allure.title("Speedups use per-instance means and the median across instances")
    @pytest.mark.harness
    def test_median(self):
        base, biased = [], []
        for index, ratio in enumerate((1, 2, 4)):
            name = f"sg-{index:04d}"
            base += [stats_row(name, evaluations=700 * ratio), stats_row(name, evaluations=900 * ratio)]
            biased += [stats_row(name, kappa=3.0, evaluations=800)] * 2
        report = compute_speedups(base, biased)

        assert sorted(report.per_instance["evaluations"].tolist()) == [1.0, 2.0, 4.0]
        assert report.median("evaluations", 3.0) == 2.0
        with pytest.raises(InputError):
            report.median("evaluations", 1.0)

        logger.info("Median speedup 2 verified")

    @allure.title("Unmatched instances are an input error")
    @pytest.mark.harness
    def test_unmatched(self):
        with pytest.raises(InputError):
            compute_speedups([stats_row("nk-0000")], [stats_row("nk-0001", kappa=1.0)])

        logger.info("Unmatched instance rejected")

    @allure.title("Unpaired runs leave the CPU speedup empty")
    @pytest.mark.harness
    def test_unpaired(self):
        report = compute_speedups(
            [stats_row("nk-0000")], [stats_row("nk-0000", kappa=1.0)], cpu_paired=False
        )
        assert report.per_instance["cpu"].isna().all()
        assert np.isnan(report.median("cpu", 1.0))
        assert report.median("evaluations", 1.0) == 1.0

        logger.info("CPU speedup withheld for unpaired runs")

    @allure.title("Report survives a write and read")
    @pytest.mark.harness
    def test_report_round_trip(self, tmp_path):
        base = [stats_row(f"nk-{i:04d}", evaluations=1000 + i) for i in range(4)]
        biased = [stats_row(f"nk-{i:04d}", kappa=k, evaluations=900) for i in range(4) for k in (1.0, 5.0)]
        report = compute_speedups(base, biased, cpu_paired=False, n=60)
        write_report(tmp_path, report)
        loaded = read_report(tmp_path)

        assert not loaded.cpu_paired
        pd.testing.assert_frame_equal(loaded.per_instance, report.per_instance, check_dtype=False)
        pd.testing.assert_frame_equal(loaded.summary, report.summary, check_dtype=False)

        logger.info("Report round trip verified")


@allure.feature("Run Statistics And Plot Data")
class TestOutputs:
    @allure.title("Run statistics CSV follows the row schema")
    @pytest.mark.smoke
    @pytest.mark.harness
    def test_stats_csv(self, tmp_path):
        first = [stats_row("nk-0000", seed=2**62 + 1), stats_row("nk-0001", kappa=1.0, run=3)]
        path = write_stats(tmp_path / "runs.csv", first)
        write_stats(path, [stats_row("nk-0002", success=False)], append=True)

        frame = read_stats_frame(path)
        assert len(frame) == 3
        for row in frame.to_dict(orient="records"):
            assert RUN_STATS_ROW == row
        assert read_stats(path)[:2] == first
        assert path.read_text().count("instance_id") == 1

        logger.info("Stats CSV verified")

    @allure.title("Missing stats columns are a parse error")
    @pytest.mark.harness
    def test_stats_columns(self, tmp_path):
        path = tmp_path / "runs.csv"
        path.write_text("instance_id,N\nnk-0000,10\n")
        with pytest.raises(ParseError):
            read_stats(path)

        logger.info("Incomplete stats rejected")

    @allure.title("Split proportions sum to one per series")
    @pytest.mark.harness
    def test_plot_data(self, tmp_path):
        first = pd.DataFrame({"d": [1, 2, 5], "splits": [6, 3, 1]})
        second = pd.DataFrame({"d": [1, 3], "splits": [1, 3]})
        profiles = {
            name: frame.assign(proportion=frame["splits"] / frame["splits"].sum())
            for name, frame in {"nk-n60": first, "sg-n64": second}.items()
        }
        report = compute_speedups([stats_row("nk-0000")], [stats_row("nk-0000", kappa=1.0)], n=60)
        written = emit_plot_data(tmp_path, profiles, [report])

        assert {path.name for path in written} == {PROFILE_FILE, BY_KAPPA_FILE, "speedups_by_size.csv"}
        series = read_plot_series(tmp_path / PROFILE_FILE)
        for row in series.to_dict(orient="records"):
            assert PROFILE_ROW == row
        for name, group in series.groupby("series"):
            ResultAssertions.check_close(group["proportion"].sum(), 1.0, 1e-12, f"proportions of {name}")
        assert len(read_plot_series(tmp_path / BY_KAPPA_FILE)) == 4

        logger.info("Plot series verified")

    @allure.title("No split counts give an empty profile")
    @pytest.mark.harness
    def test_empty_profile(self):
        assert distance_profile([]).empty

        logger.info("Empty profile verified")

    @allure.title("Fold hygiene audit reports overlapping instances")
    @pytest.mark.harness
    def test_fold_hygiene(self):
        assert audit_fold_hygiene(["a", "b"], ["c"]) == []
        assert audit_fold_hygiene(["c", "a", "b"], ["b", "c", "d"]) == ["b", "c"]

        logger.info("Hygiene audit verified")


@allure.feature("Crossvalidation")
class TestCrossvalidation:
    @allure.title("Small plan runs end to end without fold leakage")
    @pytest.mark.harness
    def test_end_to_end(self, tmp_path):
        plan = tiny_plan(tmp_path)
        result = crossvalidate(plan)

        assert len(result.folds) == 2
        ResultAssertions.check_partition(
            [fold.test_ids for fold in result.folds], [f"nk-{i:04d}" for i in range(4)]
        )
        for fold in result.folds:
            assert audit_fold_hygiene(fold.provenance, fold.test_ids) == []
            assert fold.table_path.exists()
        assert audit_output(tmp_path) == {0: [], 1: []}

        for name in ("folds.csv", "base_training.csv", "base.csv", "biased.csv", "speedups.csv",
                     "speedups_summary.csv"):
            assert (tmp_path / name).exists(), f"{name} was not written"
        assert (tmp_path / "plots" / PROFILE_FILE).exists()

        tested = 4 - len(result.skipped)
        assert len(result.report.per_instance) == tested * 2
        assert set(result.report.per_instance["kappa"]) == {1.0, 2.0}
        for stats in read_stats(tmp_path / "biased.csv"):
            assert stats.mode is PriorMode.BIAS
            assert stats.success
        ResultAssertions.attach_info(
            {"summary": result.report.summary.to_dict(orient="records")}, "Speedup summary"
        )

        logger.info(f"Crossvalidation finished with {len(result.skipped)} skipped instances")

    @allure.title("Leaked provenance is detected in saved output")
    @pytest.mark.harness
    def test_leak_detected(self, tmp_path):
        pd.DataFrame({"instance_id": ["a", "b", "c", "d"], "fold": [0, 0, 1, 1]}).to_csv(
            tmp_path / "folds.csv", index=False
        )
        (tmp_path / "provenance").mkdir()
        pd.DataFrame({"instance_id": ["c", "d"]}).to_csv(tmp_path / "provenance" / "fold-00.csv", index=False)
        pd.DataFrame({"instance_id": ["a", "d"]}).to_csv(tmp_path / "provenance" / "fold-01.csv", index=False)

        assert audit_output(tmp_path) == {0: [], 1: ["d"]}

        logger.info("Leak detected")
