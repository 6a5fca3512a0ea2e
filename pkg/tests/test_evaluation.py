import itertools

import numpy as np
import pytest

from tensoralign.errors import InvalidArgumentError
from tensoralign.evaluation import accuracy, intra_class_distance, nearest_centroid_fit_predict


def test_nearest_centroid_examples():
    X = np.array([[0.0, 0.0], [10.0, 0.0]])
    assert nearest_centroid_fit_predict(X, [0, 1], [[1.0, 0.0]])[0] == 0
    assert nearest_centroid_fit_predict(X, [0, 1], [[10.0, 0.0]])[0] == 1


def test_nearest_centroid_tie_goes_to_lowest_id():
    X = np.array([[0.0], [2.0]])
    assert nearest_centroid_fit_predict(X, [5, 2], [[1.0]])[0] == 2


def test_nearest_centroid_isometry_invariant(rng):
    X, y = rng.standard_normal((30, 4)), rng.integers(0, 3, 30)
    T = rng.standard_normal((10, 4))
    Q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    b = rng.standard_normal(4)
    np.testing.assert_array_equal(nearest_centroid_fit_predict(X, y, T),
                                  nearest_centroid_fit_predict(X @ Q + b, y, T @ Q + b))


def test_nearest_centroid_errors():
    with pytest.raises(InvalidArgumentError):
        nearest_centroid_fit_predict(np.ones((2, 2)), [0, 1], np.ones((1, 3)))
    with pytest.raises(InvalidArgumentError):
        nearest_centroid_fit_predict(np.ones((2, 2)), [0], np.ones((1, 2)))


def test_accuracy_examples(rng):
    assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
    assert accuracy([0, 0], [1, 1]) == 0.0
    assert accuracy([0, 1, 2, 3], [0, 1, 2, 0]) == 0.75
    p, t = rng.integers(0, 3, 20), rng.integers(0, 3, 20)
    perm = rng.permutation(20)
    assert accuracy(p, t) == accuracy(p[perm], t[perm])
    with pytest.raises(InvalidArgumentError):
        accuracy([1], [1, 2])
    with pytest.raises(InvalidArgumentError):
        accuracy([], [])


def test_intra_class_examples():
    F = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert intra_class_distance(F, [0, 0], F, [0, 0]) == 0.0
    assert intra_class_distance([[0.0, 0.0]], [0], [[3.0, 0.0]], [0]) == 3.0


def test_intra_class_matches_pairwise_loop(rng):
    Fs, ys = rng.standard_normal((7, 3)), np.array([0, 0, 1, 1, 1, 2, 2])
    Ft, yt = rng.standard_normal((5, 3)), np.array([1, 0, 1, 0, 3])
    per_class = []
    for c in (0, 1):
        ds = [np.sqrt(np.sum((Fs[i] - Ft[j]) ** 2))
              for i, j in itertools.product(np.flatnonzero(ys == c), np.flatnonzero(yt == c))]
        per_class.append(sum(ds) / len(ds))
    assert intra_class_distance(Fs, ys, Ft, yt) == pytest.approx(np.mean(per_class), rel=1e-12)


def test_intra_class_rotation_and_scale(rng):
    Fs, ys = rng.standard_normal((8, 3)), rng.integers(0, 2, 8)
    Ft, yt = rng.standard_normal((8, 3)), np.array([0, 1] * 4)
    d = intra_class_distance(Fs, ys, Ft, yt)
    Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    assert intra_class_distance(Fs @ Q, ys, Ft @ Q, yt) == pytest.approx(d, rel=1e-12)
    assert intra_class_distance(2.5 * Fs, ys, 2.5 * Ft, yt) == pytest.approx(2.5 * d, rel=1e-12)


def test_intra_class_needs_shared_class():
    with pytest.raises(InvalidArgumentError):
        intra_class_distance(np.ones((1, 2)), [0], np.ones((1, 2)), [1])
