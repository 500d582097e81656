import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stainkit.errors import ParameterError
from stainkit.segmetrics import aji, connected_components, dice, evaluate, f1_at_iou, iou_matrix


def bars(*cols, shape=(1, 10)):
    """Row map with label ``k`` on the half-open column span ``cols[k-1]``."""
    out = np.zeros(shape, dtype=np.int64)
    for i, (a, b) in enumerate(cols, start=1):
        out[:, a:b] = i
    return out


def test_iou_identical():
    lab = bars((0, 3), (5, 9))
    assert iou_matrix(lab, lab) == {(1, 1): 1.0, (2, 2): 1.0}


def test_iou_disjoint():
    assert iou_matrix(bars((0, 3)), bars((0, 0), (5, 9))) == {}


def test_iou_partial():
    # pred 0..8, gt 2..10: intersection 6, union 10
    assert iou_matrix(bars((0, 8)), bars((2, 10))) == {(1, 1): 0.6}


def test_f1_threshold_is_strict():
    gt = bars((0, 5), (5, 10))
    pred = bars((0, 3), (3, 10))
    # pred1/gt1 IoU 3/5 matches, pred2/gt2 IoU 5/7 matches
    assert f1_at_iou(pred, gt)[:4] == (1.0, 2, 0, 0)
    half = np.zeros((1, 4), dtype=np.int64)
    half[0, :2] = 1
    wide = np.ones((1, 4), dtype=np.int64)
    assert f1_at_iou(half, wide) == (0.0, 0, 1, 1)


def test_f1_one_of_two():
    # IoU 0.6 matches, IoU 0.4 does not: tp 1, fp 1, fn 1
    gt = bars((0, 5), (5, 10), shape=(1, 20))
    pred = np.zeros((1, 20), dtype=np.int64)
    pred[0, 0:3] = 1
    pred[0, 5:7] = 2
    assert iou_matrix(pred, gt) == {(1, 1): 0.6, (2, 2): 0.4}
    assert f1_at_iou(pred, gt) == (0.5, 1, 1, 1)


def test_empty_conventions():
    empty = np.zeros((4, 4), dtype=np.int64)
    full = np.ones((4, 4), dtype=np.int64)
    assert evaluate(empty, empty).to_dict() == {"f1": 1.0, "aji": 1.0, "dice": 1.0, "tp": 0, "fp": 0, "fn": 0}
    assert evaluate(full, empty).f1 == 0.0 and evaluate(full, empty).aji == 0.0
    assert evaluate(empty, full).dice == 0.0 and evaluate(empty, full).aji == 0.0


def test_dice_hand_value():
    pred = bars((0, 4))
    gt = bars((2, 6))
    assert dice(pred, gt) == 0.5


def test_aji_hand_value():
    gt = bars((0, 4), (6, 10))
    pred = bars((0, 3), (9, 10))
    pred[0, 5] = 3  # stray prediction over background
    # gt1 <- pred1: I=3 U=4; gt2 <- pred2: I=1 U=4; pred3 unused adds 1
    assert aji(pred, gt) == pytest.approx(4 / 9)


def test_split_instance_penalized_by_aji_not_dice():
    gt = np.zeros((6, 6), dtype=np.int64)
    gt[1:5, 1:5] = 1
    pred = gt.copy()
    pred[1:5, 3:5] = 2
    assert dice(pred, gt) == 1.0
    assert aji(pred, gt) < 1.0


def test_shape_and_sign_checks():
    with pytest.raises(ParameterError):
        evaluate(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(ParameterError):
        evaluate(-np.ones((2, 2)), np.zeros((2, 2)))


def test_tie_stability():
    # two predictions tie on IoU 2/3 against one GT: the lower pred ID wins
    gt = bars((2, 6), shape=(1, 8))
    pred = np.zeros((1, 8), dtype=np.int64)
    pred[0, 0:4] = 7
    pred[0, 4:8] = 3
    f1, tp, fp, fn = f1_at_iou(pred, gt, threshold=0.3)
    assert (tp, fp, fn) == (1, 1, 0)
    assert aji(pred, gt) == aji(np.where(pred == 7, 9, pred), gt)


label_maps = arrays(np.int64, (12, 12), elements=st.integers(0, 4))


@settings(max_examples=60, deadline=None)
@given(label_maps, label_maps, st.permutations(range(1, 5)))
def test_relabel_invariance(pred, gt, perm):
    mapping = np.array([0] + list(perm), dtype=np.int64) * 11
    a = evaluate(pred, gt)
    b = evaluate(mapping[pred], gt)
    c = evaluate(pred, mapping[gt])
    assert a.f1 == b.f1 == c.f1
    assert a.dice == b.dice == c.dice
    assert a.aji == pytest.approx(b.aji, abs=1e-12) and a.aji == pytest.approx(c.aji, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(label_maps, label_maps, st.integers(0, 3), st.booleans())
def test_geometric_invariance(pred, gt, turns, flip):
    def t(x):
        x = np.rot90(x, turns)
        return x[:, ::-1] if flip else x

    a, b = evaluate(pred, gt), evaluate(t(pred), t(gt))
    assert a == b


@settings(max_examples=60, deadline=None)
@given(label_maps, label_maps)
def test_metric_ranges(pred, gt):
    rep = evaluate(pred, gt)
    for v in (rep.f1, rep.aji, rep.dice):
        assert 0.0 <= v <= 1.0
    assert evaluate(gt, gt).f1 == evaluate(gt, gt).aji == 1.0


# -- connected components ----------------------------------------------------


def flood_fill(mask, connectivity):
    """Straightforward BFS labeling in raster order of each component's first pixel."""
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.int32)
    steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if connectivity == 8:
        steps += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    label = 0
    for r in range(h):
        for c in range(w):
            if mask[r, c] and not out[r, c]:
                label += 1
                out[r, c] = label
                stack = [(r, c)]
                while stack:
                    y, x = stack.pop()
                    for dy, dx in steps:
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not out[ny, nx]:
                            out[ny, nx] = label
                            stack.append((ny, nx))
    return out


def test_diagonal_connectivity():
    mask = np.eye(4, dtype=bool)
    assert connected_components(mask, 8).max() == 1
    assert np.array_equal(connected_components(mask, 4), np.diag([1, 2, 3, 4]))


def test_u_shape_merges_late():
    mask = np.array([[1, 0, 1], [1, 0, 1], [1, 1, 1]], dtype=bool)
    assert np.array_equal(connected_components(mask, 4), mask.astype(np.int32))


@pytest.mark.parametrize("connectivity", [4, 8])
def test_matches_flood_fill(connectivity):
    rng = np.random.default_rng(connectivity)
    for density in (0.2, 0.45, 0.6, 0.8):
        for _ in range(25):
            mask = rng.random((16, 16)) < density
            assert np.array_equal(connected_components(mask, connectivity), flood_fill(mask, connectivity))


def test_components_validation():
    with pytest.raises(ParameterError):
        connected_components(np.ones((3, 3)), connectivity=6)
    with pytest.raises(ParameterError):
        connected_components(np.ones(3))
    assert connected_components(np.zeros((0, 5))).shape == (0, 5)
