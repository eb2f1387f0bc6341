"""Seeded benchmark over a suite of scenes: per-policy, per-category and per-split success rates."""
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, Optional

import anyio
from anyio import to_thread
import orjson
from rich.table import Table

from manipkit.core.config import settings
from manipkit.core.enums import PolicyKind
from manipkit.core.errors import EmptySuiteError
from manipkit.schemas.benchmark import BenchmarkReport, PolicySummary, RateRow, TrialOutcome
from manipkit.schemas.trace import SimConfig
from manipkit.services.policies import run_policy
from manipkit.services.predictors import Predictor
from manipkit.services.scene import Scene, load_scene
from manipkit.utils.hashing import derive_seed

logger = logging.getLogger(__name__)


@dataclass
class Suite:
    name: str
    scenes: list[Scene]
    categories: list[str]
    empty_categories: list[str] = field(default_factory=list)


def load_suite(path: Path) -> Suite:
    """Scene JSONs grouped in one sub-directory per category, or lying flat in ``path``."""
    path = Path(path)
    if not path.is_dir():
        raise EmptySuiteError(f"Suite directory not found: {path}")

    scenes: list[Scene] = []
    empty: list[str] = []
    for scene_path in sorted(path.glob("*.json")):
        scenes.append(load_scene(scene_path))
    for category_dir in sorted(p for p in path.iterdir() if p.is_dir()):
        found = sorted(category_dir.glob("*.json"))
        if not found:
            empty.append(category_dir.name)
            logger.warning(f"Category '{category_dir.name}' has no scenes")
        scenes.extend(load_scene(p, category=category_dir.name) for p in found)

    if not scenes:
        raise EmptySuiteError(f"Suite {path} contains no scenes")
    names = [s.name for s in scenes]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise EmptySuiteError(f"Suite {path} has duplicate scene names: {duplicates}")

    categories = list(dict.fromkeys(s.category for s in scenes))
    logger.info(f"Loaded suite {path.name}: {len(scenes)} scenes in {len(categories)} categories")
    return Suite(name=path.name, scenes=scenes, categories=categories, empty_categories=empty)


def trial_seed(suite_seed: int, scene: Scene, trial: int) -> int:
    return derive_seed(suite_seed, scene.name, trial)


def _jobs(suite: Suite, policies: list[PolicyKind], trials: int, seed: int):
    for policy in policies:
        for scene in suite.scenes:
            for trial in range(trials):
                yield policy, scene, trial, trial_seed(seed, scene, trial)


def _run_trial(
    policy: PolicyKind,
    scene: Scene,
    trial: int,
    seed: int,
    predictor: Predictor,
    cfg: SimConfig,
) -> TrialOutcome:
    trace = run_policy(policy, scene, predictor, cfg.model_copy(update={"seed": seed}))
    return TrialOutcome(
        scene=scene.name,
        category=scene.category,
        split=scene.split,
        policy=policy,
        trial=trial,
        seed=seed,
        success=trace.success,
        total_dq=trace.total_dq,
        failure_reason=trace.failure_reason,
    )


def _rates(outcomes: list[TrialOutcome], key: str, groups: Iterable[str]) -> list[RateRow]:
    rows = []
    for group in groups:
        hits = [o for o in outcomes if getattr(o, key) == group]
        if not hits:
            continue
        successes = sum(o.success for o in hits)
        rows.append(RateRow(group=group, trials=len(hits), successes=successes, rate=successes / len(hits)))
    return rows


def summarize(
    suite: Suite,
    policies: list[PolicyKind],
    outcomes: list[TrialOutcome],
    seed: int,
    trials: int,
    predictor_name: str,
) -> BenchmarkReport:
    summaries = []
    splits = list(dict.fromkeys(s.split for s in suite.scenes))
    for policy in policies:
        mine = [o for o in outcomes if o.policy == policy]
        categories = _rates(mine, "category", suite.categories)
        avg = sum(r.rate for r in categories) / len(categories) if categories else None
        summaries.append(
            PolicySummary(policy=policy, categories=categories, splits=_rates(mine, "split", splits), avg=avg)
        )
    return BenchmarkReport(
        suite=suite.name,
        seed=seed,
        trials=trials,
        predictor=predictor_name,
        categories=suite.categories,
        empty_categories=suite.empty_categories,
        policies=summaries,
        outcomes=outcomes,
    )


def run_benchmark(
    suite: Suite,
    policies: list[PolicyKind],
    predictor: Predictor,
    cfg: Optional[SimConfig] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> BenchmarkReport:
    cfg = cfg or SimConfig()
    trials = settings.DEFAULT_TRIALS if trials is None else trials
    seed = cfg.seed if seed is None else seed
    workers = settings.BENCH_WORKERS if workers is None else workers
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not policies:
        raise EmptySuiteError("No policies to benchmark")

    if workers > 1:
        return anyio.run(partial(run_benchmark_async, suite, policies, predictor, cfg, trials, seed, workers))

    outcomes = [_run_trial(*job, predictor, cfg) for job in _jobs(suite, policies, trials, seed)]
    return summarize(suite, policies, outcomes, seed, trials, str(predictor.kind))


async def run_benchmark_async(
    suite: Suite,
    policies: list[PolicyKind],
    predictor: Predictor,
    cfg: SimConfig,
    trials: int,
    seed: int,
    workers: int = 4,
) -> BenchmarkReport:
    """Trials fan out over worker threads; outcomes keep job order regardless of completion order."""
    jobs = list(_jobs(suite, policies, trials, seed))
    outcomes: list[Optional[TrialOutcome]] = [None] * len(jobs)
    limiter = anyio.CapacityLimiter(max(1, workers))

    async def worker(index: int, job) -> None:
        outcomes[index] = await to_thread.run_sync(
            partial(_run_trial, *job, predictor, cfg), limiter=limiter
        )

    async with anyio.create_task_group() as tg:
        for index, job in enumerate(jobs):
            tg.start_soon(worker, index, job)

    return summarize(suite, policies, outcomes, seed, trials, str(predictor.kind))


def dump_report(report: BenchmarkReport) -> bytes:
    return orjson.dumps(report.model_dump(mode="json"), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


def render_table(report: BenchmarkReport) -> Table:
    table = Table(title=f"Success rate ({report.suite}, {report.trials} trial(s), seed {report.seed})")
    table.add_column("Policy")
    for category in report.categories:
        table.add_column(category, justify="right")
    table.add_column("AVG", justify="right")
    for summary in report.policies:
        by_category = {r.group: r.rate for r in summary.categories}
        cells = [f"{by_category[c]:.2f}" if c in by_category else "-" for c in report.categories]
        avg = "-" if summary.avg is None else f"{summary.avg:.2f}"
        table.add_row(str(summary.policy), *cells, avg)
    return table
