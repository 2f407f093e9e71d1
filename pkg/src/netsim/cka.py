"""Linear CKA between activation matrices and layer-pair similarity matrices.

The production path works in feature space: with column-centered X, Y,

    CKA(X, Y) = ||Y^T X||_F^2 / (||X^T X||_F * ||Y^T Y||_F)

which equals the normalized HSIC of the linear Gram matrices. Cost scales
with feature counts rather than examples squared.
"""

import csv

import numpy as np

from .data import ActivationSet, SimilarityMatrix
from .errors import DataError, DegenerateActivationsError, ShapeError

DEGENERATE_TOLERANCE = 0.0  # a zero centered norm means truly constant activations


def center_columns(x: np.ndarray) -> np.ndarray:
    """Subtract each column's mean, so every column sums to zero."""
    x = np.asarray(x, dtype=np.float64)
    return x - x.mean(axis=0)


def _gram_sq_norm(centered: np.ndarray) -> float:
    """||X^T X||_F^2 for a column-centered X."""
    g = centered.T @ centered
    return float(np.sum(np.square(g)))


def _cross_sq_norm(left: np.ndarray, right: np.ndarray) -> float:
    """||left^T right||_F^2."""
    c = left.T @ right
    return float(np.sum(np.square(c)))


def _canonical(xc: np.ndarray, yc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Fix the evaluation orientation so cka(X, Y) and cka(Y, X) run the exact
    # same floating-point computation. Shape keys first, raw bytes on ties.
    kx, ky = (xc.shape[1], xc.shape[0]), (yc.shape[1], yc.shape[0])
    if kx != ky:
        return (xc, yc) if kx < ky else (yc, xc)
    if xc.tobytes() <= yc.tobytes():
        return xc, yc
    return yc, xc


def linear_cka(x: np.ndarray, y: np.ndarray) -> float:
    """Linear CKA score in [0, 1] between two activation matrices.

    Both matrices must have the same number of rows (input examples).
    Raises DegenerateActivationsError when either side is constant.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ShapeError("linear_cka expects 2-D activation matrices")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"row counts differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise ShapeError("need at least 2 examples")
    xc = center_columns(x)
    yc = center_columns(y)
    sxx = _gram_sq_norm(xc)
    syy = _gram_sq_norm(yc)
    if sxx <= DEGENERATE_TOLERANCE or syy <= DEGENERATE_TOLERANCE:
        raise DegenerateActivationsError("constant activations: CKA undefined")
    left, right = _canonical(xc, yc)
    return _cross_sq_norm(left, right) / np.sqrt(sxx * syy)


def flatten_layer(tensor: np.ndarray, mode: str = "flatten") -> np.ndarray:
    """Turn a raw activation block into an examples x features matrix.

    4-D blocks (examples, C, H, W) either flatten to C*H*W columns in
    row-major channel/spatial order, or reduce to C columns by averaging
    over the H*W positions ("spatial_mean"). 2-D input passes through.
    """
    if mode not in ("flatten", "spatial_mean"):
        raise ValueError(f"unknown flatten mode {mode!r}")
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.size == 0:
        raise ShapeError("activation block has a zero-sized dimension")
    if tensor.shape[0] < 2:
        raise ShapeError("need at least 2 examples")
    if tensor.ndim == 2:
        return tensor
    if tensor.ndim != 4:
        raise ShapeError(f"expected 2-D or 4-D activations, got {tensor.ndim}-D")
    if mode == "spatial_mean":
        return tensor.mean(axis=(2, 3))
    return tensor.reshape(tensor.shape[0], -1)


def layer_similarity_matrix(a: ActivationSet, b: ActivationSet) -> SimilarityMatrix:
    """All-pairs CKA grid between the layers of two networks.

    Degenerate (constant) layer pairs score 0 and are tallied in
    ``degenerate_pairs`` instead of aborting the whole matrix. Layers are
    centered once per network, so large sets stay affordable.
    """
    if a.num_examples != b.num_examples:
        raise DataError(f"example counts differ: {a.name} has {a.num_examples}, "
                        f"{b.name} has {b.num_examples}")
    a_centered = [center_columns(m) for m in a.matrices]
    b_centered = [center_columns(m) for m in b.matrices]
    a_norms = [_gram_sq_norm(m) for m in a_centered]
    b_norms = [_gram_sq_norm(m) for m in b_centered]
    values = np.zeros((a.num_layers, b.num_layers), dtype=np.float64)
    degenerate = 0
    for i, (xc, sxx) in enumerate(zip(a_centered, a_norms)):
        for j, (yc, syy) in enumerate(zip(b_centered, b_norms)):
            if sxx <= DEGENERATE_TOLERANCE or syy <= DEGENERATE_TOLERANCE:
                degenerate += 1
                continue
            values[i, j] = _cross_sq_norm(xc, yc) / np.sqrt(sxx * syy)
    return SimilarityMatrix(net_a=a.name, net_b=b.name, values=values,
                            degenerate_pairs=degenerate)


def write_similarity_csv(matrix: SimilarityMatrix, path) -> None:
    """Matrix CSV: first row/column carry layer indices, 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [str(j) for j in range(matrix.m)])
        for i in range(matrix.n):
            writer.writerow([str(i)] + [f"{v:.17g}" for v in matrix.values[i]])


def read_similarity_csv(path, net_a: str = "", net_b: str = "") -> SimilarityMatrix:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "":
        raise DataError(f"{path}: not a similarity matrix CSV")
    m = len(rows[0]) - 1
    values = np.empty((len(rows) - 1, m), dtype=np.float64)
    for i, row in enumerate(rows[1:]):
        if len(row) != m + 1 or row[0] != str(i):
            raise DataError(f"{path}: malformed row {i}")
        values[i] = [float(tok) for tok in row[1:]]
    return SimilarityMatrix(net_a=net_a, net_b=net_b, values=values)
