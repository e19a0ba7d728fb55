import csv
import io
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsedepth.errors import ParameterError, PipelineError
from sparsedepth.parallel import (
    CSV_COLUMNS,
    BenchReport,
    ExecPlan,
    StageTimer,
    map_rows,
    parallel_map,
    reports_to_csv,
    run_benchmark,
    speedup,
)
from sparsedepth.pipeline import PipelineConfig
from sparsedepth.synthetic import random_frames


@given(st.integers(0, 500), st.integers(1, 16), st.one_of(st.none(), st.integers(1, 50)))
def test_chunks_cover_the_domain_once(n, workers, chunk):
    pieces = ExecPlan(workers, chunk).chunks(n)
    covered = [i for a, b in pieces for i in range(a, b)]
    assert covered == list(range(n))
    assert sum(b - a for a, b in pieces) == n


def test_serial_plan_is_one_chunk():
    assert ExecPlan(1).chunks(10) == [(0, 10)]
    assert ExecPlan(1, chunk=4).chunks(10) == [(0, 4), (4, 8), (8, 10)]
    assert ExecPlan(2).chunks(0) == []


@pytest.mark.parametrize("workers, chunk", [(0, None), (2, 0)])
def test_plan_validation(workers, chunk):
    with pytest.raises(ParameterError):
        ExecPlan(workers, chunk)


@given(st.integers(0, 200), st.integers(1, 8), st.one_of(st.none(), st.integers(1, 13)))
@settings(max_examples=50)
def test_results_in_index_order(n, workers, chunk):
    got = parallel_map(n, lambda a, b: list(range(a, b)), ExecPlan(workers, chunk))
    assert [i for part in got for i in part] == list(range(n))


def test_serial_runs_on_calling_thread():
    seen = parallel_map(5, lambda a, b: threading.get_ident(), ExecPlan(1))
    assert seen == [threading.get_ident()]


def test_failure_waits_for_all_tasks_then_raises():
    done = []

    def task(a, b):
        if a == 0:
            raise ValueError("boom")
        done.append(a)
        return a

    with pytest.raises(PipelineError, match="boom") as info:
        parallel_map(8, task, ExecPlan(4, chunk=1))
    assert isinstance(info.value.__cause__, ValueError)
    assert sorted(done) == list(range(1, 8))
    with pytest.raises(PipelineError):
        parallel_map(8, task, ExecPlan(1))


def test_map_rows_along_both_axes():
    out = np.zeros((6, 5), dtype=np.int64)
    map_rows(out, lambda a, b: np.arange(a, b)[:, None] * np.ones(5, int), ExecPlan(3, chunk=1))
    assert (out == np.arange(6)[:, None]).all()
    out = np.zeros((6, 5), dtype=np.int64)
    map_rows(out, lambda a, b: np.arange(a, b)[None, :] * np.ones((6, 1), int), ExecPlan(3, chunk=2), axis=1)
    assert (out == np.arange(5)[None, :]).all()


def test_stage_timer():
    t = StageTimer()
    t.add("a", 0.001)
    with t.time("a"):
        pass
    t.add("b", 0.002)
    assert set(t.ms) == {"a", "b"}
    assert t.ms["a"] >= 1.0
    assert t.total == pytest.approx(t.ms["a"] + t.ms["b"])


def test_speedup_ratio():
    assert speedup(10.0, 4.0) == 2.5
    with pytest.raises(ParameterError):
        speedup(0.0, 1.0)
    with pytest.raises(ParameterError):
        speedup(1.0, -1.0)


def test_report_consistency():
    rep = BenchReport(3, 4, {"x": 30.0, "y": 10.0}, {"x": 10.0, "y": 5.0})
    assert rep.speedup == pytest.approx(40.0 / 15.0)
    assert rep.speedup * rep.parallel_total == pytest.approx(rep.serial_total)
    assert rep.stage_speedup("x") == 3.0
    rows = rep.rows()
    assert [r["stage"] for r in rows] == ["x", "y", "total"]


def test_csv_shape():
    text = reports_to_csv([BenchReport(2, 1, {"x": 1.0}, {"x": 1.0}),
                           BenchReport(2, 4, {"x": 1.0}, {"x": 0.5})])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert [(r["workers"], r["stage"], r["speedup"]) for r in rows] == [
        ("1", "x", "1.000"), ("1", "total", "1.000"), ("4", "x", "2.000"), ("4", "total", "2.000")]


def test_benchmark_single_frame_serial_is_exactly_one():
    frames = random_frames(1, 64, 48, d_max=8)
    cfg = PipelineConfig(d_max=8, window=5)
    (rep,) = run_benchmark(frames, [ExecPlan(1)], cfg)
    assert rep.speedup == 1.0
    assert rep.frames == 1
    assert all(v > 0 for v in rep.parallel_ms.values())
    assert list(rep.serial_ms) == ["lightness", "segmentation", "boundary", "morphology",
                                   "components", "matching", "fill", "peek"]


def test_benchmark_reports_every_plan():
    frames = random_frames(2, 64, 48, d_max=8)
    reps = run_benchmark(frames, [ExecPlan(1), ExecPlan(2)], PipelineConfig(d_max=8, window=5))
    assert [r.workers for r in reps] == [1, 2]
    assert reps[1].serial_ms == reps[0].serial_ms


def test_benchmark_preconditions():
    frames = random_frames(1, 64, 48, d_max=8)
    with pytest.raises(ParameterError):
        run_benchmark([], [ExecPlan(1)])
    with pytest.raises(ParameterError):
        run_benchmark(frames, [ExecPlan(2)])
