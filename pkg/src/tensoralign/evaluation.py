"""Source-trained nearest-centroid classification and intra-class distance."""
import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidArgumentError


def nearest_centroid_fit_predict(train_features, train_labels, test_features):
    """Label each test row with the class whose training mean is closest.

    Ties go to the smallest class id.
    """
    X = np.asarray(train_features, dtype=np.float64)
    y = np.asarray(train_labels)
    T = np.asarray(test_features, dtype=np.float64)
    if X.ndim != 2 or T.ndim != 2 or X.shape[1] != T.shape[1]:
        raise InvalidArgumentError(f"train {X.shape} and test {T.shape} feature widths differ")
    if len(y) != X.shape[0]:
        raise InvalidArgumentError("one label per training row required")
    if len(y) == 0:
        raise InvalidArgumentError("empty training set")
    classes = np.unique(y)
    centroids = np.stack([X[y == c].mean(axis=0) for c in classes])
    d = cdist(T, centroids, "sqeuclidean")
    # argmin returns the first minimum, i.e. the lowest class id
    return classes[np.argmin(d, axis=1)]


def accuracy(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise InvalidArgumentError(f"need equal non-empty label vectors, got {pred.shape} and {truth.shape}")
    return float(np.mean(pred == truth))


def intra_class_distance(source_features, source_labels, target_features, target_labels):
    """Mean cross-domain Euclidean distance between same-class samples.

    For each class present in both domains the mean distance over all
    (source, target) pairs is taken; the result averages these per-class means.
    """
    Fs = np.asarray(source_features, dtype=np.float64)
    Ft = np.asarray(target_features, dtype=np.float64)
    ys, yt = np.asarray(source_labels), np.asarray(target_labels)
    if len(ys) != Fs.shape[0] or len(yt) != Ft.shape[0]:
        raise InvalidArgumentError("label counts do not match feature rows")
    shared = np.intersect1d(ys, yt)
    if shared.size == 0:
        raise InvalidArgumentError("source and target share no class")
    return float(np.mean([cdist(Fs[ys == c], Ft[yt == c]).mean() for c in shared]))
