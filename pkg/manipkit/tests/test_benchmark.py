import shutil

import pytest
from rich.console import Console

from manipkit.core.enums import PolicyKind
from manipkit.core.errors import EmptySuiteError
from manipkit.schemas.trace import SimConfig
from manipkit.services.benchmark import (
    dump_report,
    load_suite,
    render_table,
    run_benchmark,
    run_benchmark_async,
    trial_seed,
)
from manipkit.services.policies import run_policy

pytestmark = pytest.mark.sim

DESK_CATEGORIES = ["door", "drawer", "lid", "microwave", "oven", "refrigerator"]


@pytest.fixture
def drawer_suite(tmp_path, desk_suite_dir):
    root = tmp_path / "drawers"
    shutil.copytree(desk_suite_dir / "drawer", root / "drawer")
    return load_suite(root)


class TestLoadSuite:
    """Test suite discovery, categories and splits"""

    def test_desk_suite(self, desk_suite_dir):
        suite = load_suite(desk_suite_dir)
        assert suite.name == "desk"
        assert len(suite.scenes) == 12
        assert suite.categories == DESK_CATEGORIES
        assert suite.empty_categories == []

    def test_flat_scenes_use_their_own_category(self, tmp_path, desk_suite_dir):
        shutil.copy(desk_suite_dir / "door" / "door_left.json", tmp_path)
        suite = load_suite(tmp_path)
        assert suite.categories == ["door"]

    def test_empty_category_reported(self, tmp_path, desk_suite_dir):
        """Test that categories without scenes are listed separately"""
        shutil.copytree(desk_suite_dir / "drawer", tmp_path / "drawer")
        (tmp_path / "faucet").mkdir()
        suite = load_suite(tmp_path)
        assert suite.categories == ["drawer"]
        assert suite.empty_categories == ["faucet"]

    def test_no_scenes(self, tmp_path):
        (tmp_path / "faucet").mkdir()
        with pytest.raises(EmptySuiteError):
            load_suite(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(EmptySuiteError):
            load_suite(tmp_path / "nope")

    def test_duplicate_scene_names(self, tmp_path, desk_suite_dir):
        shutil.copytree(desk_suite_dir / "drawer", tmp_path / "a")
        shutil.copytree(desk_suite_dir / "drawer", tmp_path / "b")
        with pytest.raises(EmptySuiteError, match="duplicate"):
            load_suite(tmp_path)


@pytest.mark.integration
class TestRunBenchmark:
    """Test trial seeding, rate tables and the parallel runner"""

    def test_always_successful_suite(self, drawer_suite, oracle):
        report = run_benchmark(drawer_suite, [PolicyKind.ONESTEP], oracle, SimConfig(seed=5), trials=3)
        assert len(report.outcomes) == 6
        [summary] = report.policies
        assert summary.avg == 1.0
        assert [(r.group, r.trials, r.successes, r.rate) for r in summary.categories] == [("drawer", 6, 6, 1.0)]
        assert report.predictor == "oracle"

    def test_rates_recount(self, desk_suite_dir, oracle):
        suite = load_suite(desk_suite_dir)
        policies = [PolicyKind.ONESTEP, PolicyKind.RANDOM]
        report = run_benchmark(suite, policies, oracle, SimConfig(seed=9), trials=2)
        assert len(report.outcomes) == 2 * 12 * 2

        for summary in report.policies:
            mine = [o for o in report.outcomes if o.policy == summary.policy]
            rates = []
            for row in summary.categories:
                hits = [o for o in mine if o.category == row.group]
                assert row.trials == len(hits) == 4
                assert row.successes == sum(o.success for o in hits)
                rates.append(row.successes / row.trials)
            assert summary.avg == pytest.approx(sum(rates) / len(rates))
            assert sum(r.trials for r in summary.splits) == 24
            assert [r.group for r in summary.splits] == ["train", "test"]

    def test_seeds_follow_scene_and_trial(self, drawer_suite, oracle):
        report = run_benchmark(drawer_suite, [PolicyKind.RANDOM], oracle, SimConfig(), trials=2, seed=17)
        by_scene = {s.name: s for s in drawer_suite.scenes}
        for outcome in report.outcomes:
            assert outcome.seed == trial_seed(17, by_scene[outcome.scene], outcome.trial)

    def test_single_trial_matches_direct_rollout(self, desk_suite_dir, oracle):
        suite = load_suite(desk_suite_dir)
        cfg = SimConfig(seed=4)
        report = run_benchmark(suite, [PolicyKind.RANDOM], oracle, cfg, trials=1)
        for scene, outcome in zip(suite.scenes, report.outcomes):
            trace = run_policy("random", scene, oracle, cfg.model_copy(update={"seed": outcome.seed}))
            assert (trace.success, trace.total_dq) == (outcome.success, outcome.total_dq)

    def test_report_is_reproducible(self, desk_suite_dir, oracle):
        suite = load_suite(desk_suite_dir)
        run = lambda: dump_report(run_benchmark(suite, [PolicyKind.RANDOM], oracle, SimConfig(seed=2), trials=2))
        assert run() == run()

    def test_threaded_run_keeps_order(self, desk_suite_dir, oracle):
        suite = load_suite(desk_suite_dir)
        cfg = SimConfig(seed=2)
        serial = run_benchmark(suite, [PolicyKind.ONESTEP, PolicyKind.RANDOM], oracle, cfg, trials=1, workers=1)
        threaded = run_benchmark(suite, [PolicyKind.ONESTEP, PolicyKind.RANDOM], oracle, cfg, trials=1, workers=3)
        assert dump_report(serial) == dump_report(threaded)

    @pytest.mark.anyio
    async def test_async_matches_sync(self, drawer_suite, oracle):
        cfg = SimConfig(seed=8)
        expected = run_benchmark(drawer_suite, [PolicyKind.MULTISTEP], oracle, cfg, trials=2, workers=1)
        got = await run_benchmark_async(drawer_suite, [PolicyKind.MULTISTEP], oracle, cfg, trials=2, seed=8, workers=4)
        assert dump_report(got) == dump_report(expected)

    @pytest.mark.parametrize("trials", [0, -1])
    def test_rejects_non_positive_trials(self, drawer_suite, oracle, trials):
        with pytest.raises(ValueError):
            run_benchmark(drawer_suite, [PolicyKind.ONESTEP], oracle, trials=trials)

    def test_no_policies(self, drawer_suite, oracle):
        with pytest.raises(EmptySuiteError):
            run_benchmark(drawer_suite, [], oracle)

    def test_table(self, drawer_suite, oracle):
        report = run_benchmark(drawer_suite, [PolicyKind.ONESTEP, PolicyKind.RANDOM], oracle, SimConfig(seed=1))
        console = Console(record=True, width=120)
        console.print(render_table(report))
        text = console.export_text()
        assert "AVG" in text
        assert "onestep" in text and "random" in text
        assert "1.00" in text
