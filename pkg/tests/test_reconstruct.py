import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsedepth.errors import ParameterError
from sparsedepth.parallel import ExecPlan
from sparsedepth.reconstruct import (
    ReconstructionConfig,
    fill_scanlines,
    peek_columns,
    reconstruct,
)
from sparsedepth.stereo import UNKNOWN

import oracles

U = UNKNOWN


def row(values):
    return fill_scanlines(np.array([values]))[0].tolist()


def column(values, threshold):
    col = np.array(values)[:, None]
    return peek_columns(col, ReconstructionConfig(threshold))[:, 0].tolist()


def sparse_map(seed, h, w, density, d_max=16):
    rng = np.random.default_rng(seed)
    vals = rng.integers(0, d_max + 1, size=(h, w))
    # few distinct values so equal endpoints actually occur
    vals = np.where(rng.random((h, w)) < 0.5, vals % 3, vals)
    return np.where(rng.random((h, w)) < density, vals, U).astype(np.int32)


# scan-line fill


def test_equal_endpoints_fill():
    assert row([5, U, U, 5]) == [5, 5, 5, 5]


def test_unequal_endpoints_untouched():
    assert row([5, U, U, 7]) == [5, U, U, 7]


def test_mixed_gaps():
    assert row([3, U, 3, U, 9]) == [3, 3, 3, U, 9]


def test_ends_of_row_stay_unknown():
    assert row([U, 4, U, 4, U]) == [U, 4, 4, 4, U]


def test_only_consecutive_known_pixels_pair_up():
    assert row([2, U, 5, U, 2]) == [2, U, 5, U, 2]


# column peek


def test_large_spread_takes_smaller():
    assert column([4, U, 10], 1) == [4, 4, 10]


def test_equal_neighbours():
    for thr in (0, 1, 5):
        assert column([6, U, U, 6], thr) == [6, 6, 6, 6]


def test_mean_rounds_half_down():
    assert column([6, U, 7], 1) == [6, 6, 7]
    assert column([7, U, 6], 1) == [7, 6, 6]
    assert column([6, U, 7], 0) == [6, 6, 7]
    assert column([4, U, 8], 9) == [4, 6, 8]


def test_one_sided_uses_two_nearest():
    assert column([U, U, 3, 9], 1) == [3, 3, 3, 9]
    assert column([2, 3, U, U], 1) == [2, 3, 2, 2]


def test_single_known_copied_and_empty_column_stays_unknown():
    assert column([U, 8, U, U], 1) == [8, 8, 8, 8]
    assert column([U, U, U], 1) == [U, U, U]


def test_threshold_validation():
    with pytest.raises(ParameterError):
        ReconstructionConfig(-1)


def test_empty_input_stays_empty():
    empty = np.full((6, 7), U, dtype=np.int32)
    filled, dense = reconstruct(empty)
    assert (filled == U).all() and (dense == U).all()


def test_oracle_suites_on_100_random_rows_and_columns():
    rng = np.random.default_rng(2024)
    for i in range(100):
        n = int(rng.integers(1, 60))
        line = sparse_map(i, 1, n, rng.uniform(0.05, 0.6))[0]
        assert row(line.tolist()) == oracles.scanline_fill_row(line.tolist())
        for thr in (0, 1):
            assert column(line.tolist(), thr) == oracles.column_peek(line.tolist(), thr)


@given(
    st.integers(0, 2**32 - 1),
    st.integers(1, 30),
    st.integers(1, 30),
    st.floats(0.0, 0.8),
    st.sampled_from([0, 1, 2]),
)
@settings(max_examples=100)
def test_two_stage_matches_simulation(seed, h, w, density, thr):
    sparse = sparse_map(seed, h, w, density)
    filled, dense = reconstruct(sparse, ReconstructionConfig(thr))
    want_fill = np.array([oracles.scanline_fill_row(r) for r in sparse.tolist()]).reshape(h, w)
    np.testing.assert_array_equal(filled, want_fill)
    want_dense = np.array([oracles.column_peek(c, thr) for c in want_fill.T.tolist()]).T
    np.testing.assert_array_equal(dense, want_dense.reshape(h, w))
    # Known set only grows and known values never change
    k = sparse != U
    assert (filled[k] == sparse[k]).all()
    assert (dense[filled != U] == filled[filled != U]).all()


@given(st.integers(0, 2**32 - 1), st.sampled_from([0, 1]))
@settings(max_examples=40)
def test_peek_is_order_free(seed, thr):
    filled = sparse_map(seed, 20, 12, 0.3)
    cfg = ReconstructionConfig(thr)
    dense = peek_columns(filled, cfg)
    # visiting pixels bottom-up against the same snapshot changes nothing
    np.testing.assert_array_equal(np.flipud(peek_columns(np.flipud(filled), cfg)), dense)
    manual = filled.copy()
    for r in reversed(range(filled.shape[0])):
        for c in reversed(range(filled.shape[1])):
            if filled[r, c] == U:
                manual[r, c] = oracles.column_peek(filled[:, c].tolist(), thr)[r]
    np.testing.assert_array_equal(manual, dense)


@pytest.mark.parametrize("workers", [2, 4, 8])
def test_reconstruction_independent_of_workers(workers):
    sparse = sparse_map(7, 50, 70, 0.2)
    serial = reconstruct(sparse)
    for plan in (ExecPlan(workers), ExecPlan(workers, chunk=1)):
        for a, b in zip(serial, reconstruct(sparse, plan=plan)):
            assert a.tobytes() == b.tobytes()
