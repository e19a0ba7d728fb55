"""K-Means over the 256-bin lightness histogram.

Clustering the histogram instead of the raw pixels gives the same result as
per-pixel Lloyd iteration as long as both sides share the initialisation,
the tie rule and exact integer accumulation of the cluster sums: a bin is
just all of its pixels at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PipelineError
from .imaging import as_plane
from .parallel import SERIAL, ExecPlan, parallel_map

NBINS = 256
UNASSIGNED = -1


@dataclass(frozen=True)
class Clustering:
    centers: np.ndarray        # (k,) float64
    bin_assignment: np.ndarray  # (256,) int, UNASSIGNED for empty bins
    iterations_run: int

    @property
    def k(self) -> int:
        return len(self.centers)


def build_histogram(image: np.ndarray, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Count pixels per lightness value; partial row histograms are summed."""
    image = as_plane(image)
    parts = parallel_map(
        image.shape[0],
        lambda a, b: np.bincount(image[a:b].ravel(), minlength=NBINS),
        plan,
    )
    return np.sum(parts, axis=0).astype(np.int64)


def initial_centers(occupied: np.ndarray, k: int) -> np.ndarray:
    """``k`` centers evenly spaced over [lowest, highest] occupied bin."""
    return np.linspace(float(occupied.min()), float(occupied.max()), k)


def nearest_center(values: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the closest center by absolute difference, lowest index on ties."""
    dist = np.abs(values.astype(np.float64)[:, None] - centers[None, :])
    return np.argmin(dist, axis=1)


def kmeans_histogram(
    hist: np.ndarray,
    k: int,
    max_iter: int = 100,
    tol: float = 0.5,
) -> Clustering:
    """Lloyd iteration on histogram bins weighted by their counts.

    Each round assigns occupied bins to their nearest center and moves each
    center to the count-weighted mean of its bins; a cluster that loses all
    its bins keeps its old center.  Iteration stops once no center moves by
    ``tol`` or more, or after ``max_iter`` rounds.  The returned assignment
    is recomputed against the final centers.
    """
    hist = np.asarray(hist, dtype=np.int64)
    if hist.shape != (NBINS,) or (hist < 0).any():
        raise ParameterError("histogram must hold 256 non-negative counts")
    occupied = np.flatnonzero(hist)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")
    if k > len(occupied):
        raise ParameterError(f"k={k} exceeds the {len(occupied)} occupied bins")

    weights = hist[occupied]
    centers = initial_centers(occupied, k)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        assign = nearest_center(occupied, centers)
        new = _update_centers(occupied, weights, assign, centers)
        moved = np.max(np.abs(new - centers))
        centers = new
        if moved < tol:
            break

    bin_assignment = np.full(NBINS, UNASSIGNED, dtype=np.int64)
    bin_assignment[occupied] = nearest_center(occupied, centers)
    return Clustering(centers, bin_assignment, iterations)


def _update_centers(values, weights, assign, centers):
    k = len(centers)
    # exact integer sums keep the histogram and per-pixel paths bit-identical
    sums = np.zeros(k, dtype=np.int64)
    np.add.at(sums, assign, weights * values)
    counts = np.zeros(k, dtype=np.int64)
    np.add.at(counts, assign, weights)
    new = centers.copy()
    nonempty = counts > 0
    new[nonempty] = sums[nonempty] / counts[nonempty]
    return new


def assign_pixels(image: np.ndarray, clustering: Clustering) -> np.ndarray:
    """Per-pixel cluster label, looked up through the pixel's bin."""
    image = as_plane(image)
    labels = clustering.bin_assignment[image]
    if (labels == UNASSIGNED).any():
        missing = np.unique(image[labels == UNASSIGNED])
        raise PipelineError(f"lightness values {missing.tolist()} have no cluster")
    return labels.astype(np.int32)


def segment(image: np.ndarray, k: int, plan: ExecPlan = SERIAL,
            max_iter: int = 100, tol: float = 0.5) -> tuple[np.ndarray, Clustering]:
    """Histogram, cluster and label a lightness plane in one call."""
    hist = build_histogram(image, plan)
    clustering = kmeans_histogram(hist, k, max_iter, tol)
    return assign_pixels(image, clustering), clustering


def within_cluster_cost(hist: np.ndarray, centers: np.ndarray, power: int = 2) -> float:
    """Count-weighted sum of ``|bin - nearest center| ** power``."""
    hist = np.asarray(hist, dtype=np.int64)
    occupied = np.flatnonzero(hist)
    assign = nearest_center(occupied, centers)
    dev = np.abs(occupied - centers[assign]) ** power
    return float(np.sum(hist[occupied] * dev))
