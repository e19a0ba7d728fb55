"""Deterministic data-parallel execution and speed-up benchmarking.

Every parallel stage in the package goes through :func:`parallel_map`: the
index domain is cut into fixed contiguous chunks, each chunk is handed to a
pure task, and the per-chunk results come back in chunk order.  Because the
chunking never depends on timing and tasks only write their own output
slice, the assembled result is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import ParameterError, PipelineError

T = TypeVar("T")


@dataclass(frozen=True)
class ExecPlan:
    """How many workers to use and how finely to cut the index domain.

    ``chunk`` is the number of indices (rows, columns or pixels, depending on
    the stage) handed to a single task.  ``None`` picks a size that gives
    each worker a few tasks.
    """

    workers: int = 1
    chunk: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.chunk is not None and self.chunk < 1:
            raise ParameterError(f"chunk must be >= 1, got {self.chunk}")

    def chunks(self, n: int) -> list[tuple[int, int]]:
        """Split ``range(n)`` into contiguous ``(start, stop)`` pieces."""
        if n <= 0:
            return []
        size = self.chunk
        if size is None:
            # 4 tasks per worker smooths out uneven rows; 1 worker gets 1 task
            size = n if self.workers == 1 else max(1, -(-n // (4 * self.workers)))
        return [(s, min(s + size, n)) for s in range(0, n, size)]


SERIAL = ExecPlan(1)


def parallel_map(
    n: int,
    task: Callable[[int, int], T],
    plan: ExecPlan = SERIAL,
) -> list[T]:
    """Run ``task(start, stop)`` over the chunks of ``range(n)``.

    Results are returned in chunk order.  With ``plan.workers == 1`` the
    chunks run in a plain loop on the calling thread.  If any task raises,
    the remaining tasks are still allowed to finish and a
    :class:`PipelineError` chained to the first failure is raised.
    """
    pieces = plan.chunks(n)
    if plan.workers == 1 or len(pieces) <= 1:
        try:
            return [task(a, b) for a, b in pieces]
        except Exception as exc:
            raise PipelineError(f"task failed: {exc}") from exc

    with ThreadPoolExecutor(max_workers=plan.workers) as pool:
        futures = [pool.submit(task, a, b) for a, b in pieces]
        wait(futures)
    for fut in futures:
        exc = fut.exception()
        if exc is not None:
            raise PipelineError(f"task failed: {exc}") from exc
    return [fut.result() for fut in futures]


def map_rows(
    out: np.ndarray,
    fill: Callable[[int, int], np.ndarray],
    plan: ExecPlan = SERIAL,
    axis: int = 0,
) -> np.ndarray:
    """Fill ``out`` slice by slice along ``axis`` with ``fill(start, stop)``.

    Each task writes a disjoint slab, so no locking is needed.
    """

    def task(a: int, b: int) -> None:
        index = [slice(None)] * out.ndim
        index[axis] = slice(a, b)
        out[tuple(index)] = fill(a, b)

    parallel_map(out.shape[axis], task, plan)
    return out


# --------------------------------------------------------------------------
# benchmarking
# --------------------------------------------------------------------------


@dataclass
class StageTimer:
    """Accumulates wall-clock milliseconds per named stage."""

    ms: dict[str, float] = field(default_factory=dict)

    def add(self, stage: str, seconds: float) -> None:
        self.ms[stage] = self.ms.get(stage, 0.0) + seconds * 1000.0

    def time(self, stage: str):
        return _Lap(self, stage)

    @property
    def total(self) -> float:
        return sum(self.ms.values())


class _Lap:
    def __init__(self, timer: StageTimer, stage: str):
        self.timer = timer
        self.stage = stage

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timer.add(self.stage, time.perf_counter() - self.t0)
        return False


@dataclass
class BenchReport:
    """Timings of one plan against the serial baseline."""

    frames: int
    workers: int
    serial_ms: dict[str, float]
    parallel_ms: dict[str, float]

    @property
    def serial_total(self) -> float:
        return sum(self.serial_ms.values())

    @property
    def parallel_total(self) -> float:
        return sum(self.parallel_ms.values())

    @property
    def speedup(self) -> float:
        return speedup(self.serial_total, self.parallel_total)

    def stage_speedup(self, stage: str) -> float:
        return speedup(self.serial_ms[stage], self.parallel_ms[stage])

    def rows(self) -> list[dict]:
        out = []
        for stage in self.serial_ms:
            out.append(dict(frames=self.frames, workers=self.workers, stage=stage,
                            serial_ms=self.serial_ms[stage],
                            parallel_ms=self.parallel_ms[stage],
                            speedup=self.stage_speedup(stage)))
        out.append(dict(frames=self.frames, workers=self.workers, stage="total",
                        serial_ms=self.serial_total,
                        parallel_ms=self.parallel_total,
                        speedup=self.speedup))
        return out


CSV_COLUMNS = ("frames", "workers", "stage", "serial_ms", "parallel_ms", "speedup")


def speedup(serial_ms: float, parallel_ms: float) -> float:
    """Serial execution time divided by parallel execution time."""
    if serial_ms <= 0 or parallel_ms <= 0:
        raise ParameterError("execution times must be positive")
    return serial_ms / parallel_ms


def run_benchmark(
    frames: Sequence[tuple[np.ndarray, np.ndarray]],
    plans: Iterable[ExecPlan],
    cfg=None,
) -> list[BenchReport]:
    """Time the full depth pipeline over ``frames`` for each plan.

    One untimed warm-up frame precedes each plan.  The ``workers == 1`` plan
    is the serial baseline for every report, so its own report has speed-up
    exactly 1.0.
    """
    from .pipeline import PipelineConfig, estimate_depth

    if len(frames) == 0:
        raise ParameterError("need at least one frame to benchmark")
    plans = list(plans)
    if not any(p.workers == 1 for p in plans):
        raise ParameterError("plans must include workers=1 as the serial baseline")
    cfg = cfg or PipelineConfig()

    timings: dict[int, dict[str, float]] = {}
    for plan in plans:
        if plan.workers in timings:
            continue
        estimate_depth(*frames[0], cfg, plan)
        timer = StageTimer()
        for left, right in frames:
            estimate_depth(left, right, cfg, plan, timer=timer)
        # floor at 1 ns so per-stage ratios stay defined for trivial stages
        timings[plan.workers] = {k: max(v, 1e-6) for k, v in timer.ms.items()}

    serial = timings[1]
    return [
        BenchReport(len(frames), p.workers, dict(serial), dict(timings[p.workers]))
        for p in plans
    ]


def reports_to_csv(reports: Iterable[BenchReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        for row in rep.rows():
            writer.writerow({k: (f"{v:.3f}" if isinstance(v, float) else v)
                             for k, v in row.items()})
    return buf.getvalue()
