import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsedepth.boundary import (
    add_border_anchors,
    components_to_remove,
    detect_boundaries,
    label_components,
    morph_fill,
    morph_remove,
    prune_components,
    refine,
)
from sparsedepth.errors import ParameterError
from sparsedepth.parallel import ExecPlan

import oracles


def random_mask(seed, h, w, p=0.5):
    return (np.random.default_rng(seed).random((h, w)) < p).astype(np.uint8)


masks = st.builds(
    random_mask,
    st.integers(0, 2**32 - 1),
    st.integers(1, 64),
    st.integers(1, 64),
    st.floats(0.05, 0.95),
)

# every 3x3 neighbourhood, centre at index 4
ALL_3X3 = [np.array(bits, dtype=np.uint8).reshape(3, 3) for bits in itertools.product((0, 1), repeat=9)]


# detection


def test_constant_labels_have_no_boundary():
    assert not detect_boundaries(np.full((6, 7), 3)).any()


def test_half_split_marks_the_two_adjacent_columns():
    labels = np.zeros((5, 8), dtype=np.int32)
    labels[:, 4:] = 1
    mask = detect_boundaries(labels)
    expected = np.zeros((5, 8), dtype=np.uint8)
    expected[:, 3:5] = 1
    np.testing.assert_array_equal(mask, expected)


@given(st.integers(0, 2**32 - 1), st.integers(1, 32), st.integers(1, 32), st.integers(1, 4))
@settings(max_examples=80)
def test_detection_matches_neighbour_scan(seed, h, w, k):
    labels = np.random.default_rng(seed).integers(0, k, size=(h, w))
    np.testing.assert_array_equal(detect_boundaries(labels), oracles.boundaries(labels))


# fill and remove


def test_fill_ring_of_eight():
    m = np.ones((3, 3), dtype=np.uint8)
    m[1, 1] = 0
    assert morph_fill(m)[1, 1] == 1


def test_fill_needs_all_eight():
    m = np.ones((3, 3), dtype=np.uint8)
    m[1, 1] = 0
    m[0, 2] = 0
    np.testing.assert_array_equal(morph_fill(m), m)


def test_fill_of_empty_mask():
    assert not morph_fill(np.zeros((4, 4), dtype=np.uint8)).any()


def test_remove_solid_3x3_leaves_ring():
    out = morph_remove(np.ones((3, 3), dtype=np.uint8))
    expected = np.ones((3, 3), dtype=np.uint8)
    expected[1, 1] = 0
    np.testing.assert_array_equal(out, expected)


def test_remove_solid_5x5_clears_interior():
    m = np.zeros((7, 7), dtype=np.uint8)
    m[1:6, 1:6] = 1
    out = morph_remove(m)
    np.testing.assert_array_equal(out, oracles.remove(m))
    assert not out[2:5, 2:5].any()
    assert out[1:6, 1:6].sum() == 16


def test_remove_keeps_thin_lines():
    m = np.zeros((5, 9), dtype=np.uint8)
    m[2, :] = 1
    m[:, 4] = 1
    np.testing.assert_array_equal(morph_remove(m), oracles.remove(m))
    m2 = np.zeros((5, 9), dtype=np.uint8)
    m2[2, :] = 1
    np.testing.assert_array_equal(morph_remove(m2), m2)


def test_fill_truth_table_all_512_neighbourhoods():
    for nb in ALL_3X3:
        want = 1 if nb[1, 1] or nb.sum() == 8 else 0
        assert morph_fill(nb)[1, 1] == want, nb
        # padded into a larger frame the rule must not change
        big = np.zeros((5, 5), dtype=np.uint8)
        big[1:4, 1:4] = nb
        assert morph_fill(big)[2, 2] == want


def test_remove_truth_table_all_512_neighbourhoods():
    for nb in ALL_3X3:
        cross = nb[0, 1] and nb[1, 0] and nb[1, 2] and nb[2, 1]
        want = 1 if nb[1, 1] and not cross else 0
        assert morph_remove(nb)[1, 1] == want, nb


def test_border_pixels_never_fill_or_clear():
    ones = np.ones((4, 6), dtype=np.uint8)
    out = morph_remove(ones)
    assert out[0].all() and out[-1].all() and out[:, 0].all() and out[:, -1].all()
    hole = np.ones((4, 6), dtype=np.uint8)
    hole[0, 2] = 0
    assert morph_fill(hole)[0, 2] == 0


@given(masks)
@settings(max_examples=60)
def test_morphology_matches_oracles_and_direction(mask):
    filled = morph_fill(mask)
    removed = morph_remove(mask)
    np.testing.assert_array_equal(filled, oracles.fill(mask))
    np.testing.assert_array_equal(removed, oracles.remove(mask))
    assert (filled >= mask).all()
    assert (removed <= mask).all()


# components


def test_components_match_flood_fill_on_50_random_masks():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(1, 65, size=2)
        mask = random_mask(seed, h, w, rng.uniform(0.2, 0.7))
        table = label_components(mask)
        want, n = oracles.flood_fill_components(mask)
        np.testing.assert_array_equal(table.labels, want)
        assert table.count == n
        assert table.sizes.sum() == mask.sum()


def test_component_order_smallest_first_ties_by_label():
    m = np.zeros((3, 9), dtype=np.uint8)
    m[0, 0] = 1            # label 1, size 1
    m[0, 3:6] = 1          # label 2, size 3
    m[0, 8] = 1            # label 3, size 1
    table = label_components(m)
    assert table.sizes.tolist() == [1, 3, 1]
    assert table.order.tolist() == [1, 3, 2]


def test_diagonal_pixels_connect():
    m = np.eye(4, dtype=np.uint8)
    assert label_components(m).count == 1


def _blobs(sizes, width=120):
    m = np.zeros((3, width), dtype=np.uint8)
    x = 0
    for s in sizes:
        m[1, x:x + s] = 1
        x += s + 2
    return m


def test_prune_sizes_1_2_97():
    m = _blobs([97, 1, 2], width=110)
    out = prune_components(m, 0.04)
    assert out.sum() == 97
    assert out[1, :97].all()
    np.testing.assert_array_equal(out, oracles.prune(m, 0.04))


def test_prune_single_component_survives():
    m = _blobs([50])
    for f in (0.0, 0.5, 0.99):
        np.testing.assert_array_equal(prune_components(m, f), m)


def test_prune_zero_fraction_is_identity(rng):
    m = (rng.random((20, 20)) < 0.3).astype(np.uint8)
    np.testing.assert_array_equal(prune_components(m, 0.0), m)


def test_prune_stops_before_overshooting():
    # budget 4 of 100: sizes 2, 3 -> removing both would reach 5
    m = _blobs([2, 3, 95], width=120)
    out = prune_components(m, 0.04)
    assert out.sum() == 98


def test_components_to_remove_edges():
    assert components_to_remove(np.array([1, 2, 97]), 4.0) == 2
    assert components_to_remove(np.array([1, 2, 97]), 3.0) == 2
    assert components_to_remove(np.array([1, 2, 97]), 2.99) == 1
    assert components_to_remove(np.array([], dtype=np.int64), 5.0) == 0


@pytest.mark.parametrize("fraction", [-0.1, 1.0, 1.5])
def test_prune_fraction_bounds(fraction):
    with pytest.raises(ParameterError):
        prune_components(np.ones((2, 2)), fraction)


@given(masks, st.floats(0.0, 0.99))
@settings(max_examples=60)
def test_prune_matches_budget_simulation(mask, fraction):
    out = prune_components(mask, fraction)
    np.testing.assert_array_equal(out, oracles.prune(mask, fraction))
    assert (out <= mask).all()
    assert mask.sum() - out.sum() <= fraction * mask.sum() + 1e-9


# anchors


def test_anchors_10x10_margin_4():
    out = add_border_anchors(np.zeros((10, 10), dtype=np.uint8), 4)
    expected = np.zeros((10, 10), dtype=np.uint8)
    expected[4:6, 4] = 1
    expected[4:6, 5] = 1
    np.testing.assert_array_equal(out, expected)


def test_anchors_margin_zero_sets_outer_columns(rng):
    m = (rng.random((6, 9)) < 0.2).astype(np.uint8)
    out = add_border_anchors(m, 0)
    assert out[:, 0].all() and out[:, -1].all()
    np.testing.assert_array_equal(out[:, 1:-1], m[:, 1:-1])


def test_anchors_idempotent(rng):
    m = (rng.random((12, 15)) < 0.2).astype(np.uint8)
    once = add_border_anchors(m, 3)
    np.testing.assert_array_equal(add_border_anchors(once, 3), once)


def test_anchor_left_column_override():
    out = add_border_anchors(np.zeros((10, 20), dtype=np.uint8), 2, left_column=7)
    assert out[2:8, 7].all() and out[2:8, 17].all()
    assert out.sum() == 12


@pytest.mark.parametrize("margin, left", [(5, None), (6, None), (-1, None), (2, 1), (2, 18)])
def test_anchor_geometry_errors(margin, left):
    with pytest.raises(ParameterError):
        add_border_anchors(np.zeros((10, 10), dtype=np.uint8), margin, left)


# parallel bands


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_row_parallel_stages_are_identical(rng, workers):
    labels = rng.integers(0, 3, size=(41, 29))
    plan = ExecPlan(workers, chunk=1)
    raw = detect_boundaries(labels)
    assert detect_boundaries(labels, plan).tobytes() == raw.tobytes()
    serial = refine(raw, 0.04)
    for a, b in zip(serial, refine(raw, 0.04, plan)):
        assert a.tobytes() == b.tobytes()
