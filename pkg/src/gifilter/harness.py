"""Monte-Carlo campaign runner, metrics, and CSV emission.

Every run gets its own RNG substream derived from (master seed, run index),
so results are identical regardless of execution order or worker count. All
filters in a run consume the same simulated trajectory (common random
numbers).
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .filters import make_engine, predict, update
from .problems import Problem1, Problem2


class CampaignError(RuntimeError):
    """Numerical failure that aborts a whole campaign."""


@dataclass
class RunMetrics:
    """Per-run, per-filter error series and outcome flags."""

    abs_error: np.ndarray       # (n_step, n_components)
    failed: bool = False
    track_lost: bool = False
    exec_time: float = 0.0
    diverged: bool = False


@dataclass
class FilterSummary:
    rmse: np.ndarray            # (n_step, n_components), excludes flagged runs
    fail_pct: float
    track_loss_pct: float
    exec_time: float             # median per-run wall time, robust to host jitter
    rel_exec_time: float = math.nan
    runs: list = field(default_factory=list)  # RunMetrics, indexed by run


@dataclass
class CampaignSummary:
    problem: str
    n_runs: int
    xi: float | None
    step_times: np.ndarray      # (n_step,)
    components: tuple
    filters: dict               # name -> FilterSummary


def fail_flag(abs_error: np.ndarray, e_limit: float, window: int | None = None) -> bool:
    """Problem 1 failure: |error| above e_limit at the end of the run.

    With a window, the max error over the last `window` steps is used instead
    of the final step alone.
    """
    err = abs_error[:, 0]
    if not np.all(np.isfinite(err)):
        return True
    tail = err[-1] if window is None else err[-window:].max()
    return bool(tail > e_limit)


def track_loss_flag(abs_error: np.ndarray, threshold: float = 15.0) -> bool:
    """Problem 2 track loss: final-step position error above the threshold."""
    err = abs_error[:, 0]
    if not np.all(np.isfinite(err)):
        return True
    return bool(err[-1] > threshold)


def run_rng(seed: int, run_idx: int) -> np.random.Generator:
    """Substream RNG: master seed plus the run index as a spawn key."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(run_idx,)))


def _run_one(problem, engines: dict, run_idx: int, seed: int, xi: float | None):
    rng = run_rng(seed, run_idx)
    traj = problem.simulate(rng)
    n_step = problem.n_step
    ncomp = len(problem.components)
    out = {}
    for name, engine in engines.items():
        t0 = time.perf_counter()
        errors = np.full((n_step, ncomp), np.inf)
        diverged = False
        state = problem.init_state(xi) if xi is not None else problem.init_state()
        try:
            for k in range(1, n_step + 1):
                model = problem.model_for_step(k)
                state = predict(state, model, engine)
                state = update(state, model, engine, traj.measurements[k - 1])
                if not (np.all(np.isfinite(state.mean)) and np.all(np.isfinite(state.cov))):
                    diverged = True
                    break
                errors[k - 1] = np.abs(state.mean - traj.truth[k])
        except Exception:
            diverged = True
        out[name] = RunMetrics(
            abs_error=errors, exec_time=time.perf_counter() - t0, diverged=diverged
        )
    return out


def aggregate(
    problem,
    per_run: Sequence[dict],
    e_limit: float | None = None,
    fail_window: int | None = None,
    xi: float | None = None,
) -> CampaignSummary:
    """Flag runs, compute RMSE over the surviving ones, normalize exec times."""
    is_p1 = isinstance(problem, Problem1)
    if e_limit is None and is_p1:
        e_limit = problem.cfg.e_limit
    filters = {}
    names = list(per_run[0].keys())
    for name in names:
        runs = [r[name] for r in per_run]
        for m in runs:
            if is_p1:
                m.failed = m.diverged or fail_flag(m.abs_error, e_limit, fail_window)
            else:
                m.track_lost = m.diverged or track_loss_flag(
                    m.abs_error, problem.cfg.track_loss_threshold
                )
        kept = [m.abs_error for m in runs if not (m.failed or m.track_lost)]
        if kept:
            rmse = np.sqrt(np.mean(np.square(np.array(kept)), axis=0))
        else:
            rmse = np.full((problem.n_step, len(problem.components)), np.nan)
        filters[name] = FilterSummary(
            rmse=rmse,
            fail_pct=100.0 * sum(m.failed for m in runs) / len(runs),
            track_loss_pct=100.0 * sum(m.track_lost for m in runs) / len(runs),
            exec_time=float(np.median([m.exec_time for m in runs])),
            runs=runs,
        )
    base = filters.get("gif")
    denom = base.exec_time if base else max(f.exec_time for f in filters.values())
    for f in filters.values():
        f.rel_exec_time = f.exec_time / denom if denom > 0 else math.nan
    return CampaignSummary(
        problem=problem.name,
        n_runs=len(per_run),
        xi=xi,
        step_times=np.array([problem.step_time(k) for k in range(1, problem.n_step + 1)]),
        components=problem.components,
        filters=filters,
    )


def run_campaign(
    problem,
    filter_names: Sequence[str],
    n_runs: int,
    seed: int,
    e_limit: float | None = None,
    fail_window: int | None = None,
    xi: float | None = None,
    workers: int = 1,
    ghf_points: int = 3,
) -> CampaignSummary:
    """Run every filter over n_runs common trajectories and aggregate."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if not filter_names:
        raise ValueError("filter list must be non-empty")
    engines = {name: _make_named_engine(name, ghf_points) for name in filter_names}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_run = list(
                pool.map(lambda r: _run_one(problem, engines, r, seed, xi), range(n_runs))
            )
    else:
        per_run = [_run_one(problem, engines, r, seed, xi) for r in range(n_runs)]
    return aggregate(problem, per_run, e_limit=e_limit, fail_window=fail_window, xi=xi)


def _make_named_engine(name: str, ghf_points: int):
    if name == "ghf":
        return make_engine("ghf", points_per_axis=ghf_points)
    return make_engine(name)


def xi_sweep(
    problem2: Problem2,
    xi_values: Sequence[float],
    filter_names: Sequence[str],
    n_runs: int,
    seed: int,
    workers: int = 1,
) -> list[CampaignSummary]:
    """One BOT campaign per initial-covariance inflation value."""
    for xi in xi_values:
        if xi < 1.0:
            raise ValueError(f"xi must be >= 1, got {xi}")
    return [
        run_campaign(problem2, filter_names, n_runs, seed, xi=xi, workers=workers)
        for xi in xi_values
    ]


# -- CSV -------------------------------------------------------------------

RMSE_HEADER = ["problem", "filter", "step", "time_s", "component", "rmse"]
SUMMARY_HEADER = [
    "problem", "filter", "runs", "fail_pct", "track_loss_pct", "xi", "rel_exec_time",
]


def write_rmse_csv(summary: CampaignSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RMSE_HEADER)
        for name, fs in summary.filters.items():
            for k in range(fs.rmse.shape[0]):
                for ci, comp in enumerate(summary.components):
                    w.writerow(
                        [
                            summary.problem,
                            name,
                            k + 1,
                            repr(float(summary.step_times[k])),
                            comp,
                            repr(float(fs.rmse[k, ci])),
                        ]
                    )


def write_summary_csv(summaries: Sequence[CampaignSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for s in summaries:
            for name, fs in s.filters.items():
                w.writerow(
                    [
                        s.problem,
                        name,
                        s.n_runs,
                        repr(fs.fail_pct),
                        repr(fs.track_loss_pct),
                        "" if s.xi is None else repr(float(s.xi)),
                        repr(fs.rel_exec_time),
                    ]
                )


def read_csv_rows(path) -> list[dict]:
    """Parse a harness CSV back into typed rows (exact float round-trip)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                if key in ("step", "runs"):
                    row[key] = int(value)
                elif key in ("time_s", "rmse", "fail_pct", "track_loss_pct", "rel_exec_time"):
                    row[key] = float(value)
                elif key == "xi":
                    row[key] = float(value) if value else None
                else:
                    row[key] = value
            rows.append(row)
        return rows


def format_report(summaries: Sequence[CampaignSummary]) -> str:
    """Human-readable campaign report, including the execution-time ranking."""
    lines = []
    for s in summaries:
        tag = f"{s.problem}" + (f" (xi={s.xi:g})" if s.xi is not None else "")
        lines.append(f"== {tag}: {s.n_runs} runs ==")
        lines.append(
            f"{'filter':<8}{'fail %':>10}{'track loss %':>14}{'rel exec time':>15}"
        )
        for name, fs in s.filters.items():
            lines.append(
                f"{name:<8}{fs.fail_pct:>10.2f}{fs.track_loss_pct:>14.2f}"
                f"{fs.rel_exec_time:>15.3f}"
            )
        slowest = max(s.filters, key=lambda n: s.filters[n].exec_time)
        lines.append(f"slowest filter: {slowest}")
    return "\n".join(lines)
