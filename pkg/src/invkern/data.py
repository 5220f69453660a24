"""Dataset containers, experiment generators, CSV I/O, mixing estimation.

The generators mirror three clustering problems where per-point sign or
scale indeterminacies hide the class structure from plain kernels: the
XOR corner layout, high-dimensional two-class blobs with random sign
flips, and 2-D points scattered along k lines through the origin (the
geometry of sparse mixture coefficients in overcomplete source
separation).
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import (
    DegenerateClusterError,
    FormatError,
    MetricSizeError,
    ParseError,
)


@dataclass
class Dataset:
    """Points (one per row), optional integer labels, generator metadata."""

    points: np.ndarray
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points)
        if self.points.ndim != 2:
            raise ValueError("points must be a 2-D array (one row per point)")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if len(self.labels) != len(self.points):
                raise ValueError("labels length must match point count")

    def __len__(self) -> int:
        return len(self.points)


def gen_xor(n_per_arm: int, spread: float, seed: int = 0) -> Dataset:
    """Four jittered corner blobs in the XOR layout.

    Class 0 sits on the equal-sign corners (1,1) and (-1,-1), class 1 on
    the opposite-sign corners, so negating any point moves it within its
    own class; only a sign-blind method can recover the labels.
    """
    if n_per_arm < 1:
        raise ValueError("n_per_arm must be at least 1")
    if not spread > 0:
        raise ValueError("spread must be positive")
    rng = np.random.default_rng(seed)
    corners = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    points = np.repeat(corners, n_per_arm, axis=0)
    points = points + spread * rng.standard_normal(points.shape)
    labels = np.repeat([0, 0, 1, 1], n_per_arm)
    meta = {"name": "xor", "n_per_arm": n_per_arm, "spread": spread, "seed": seed}
    return Dataset(points, labels, meta)


def gen_flipped_blobs(
    n_per_class: int,
    dim: int,
    separation: float = 6.0,
    noise: float = 0.09,
    flip_prob: float = 0.5,
    seed: int = 0,
) -> Dataset:
    """Two orthogonal-prototype blobs with independent per-point sign flips.

    Each class is a Gaussian blob around separation * u_c for a seeded
    orthonormal prototype pair (u_0, u_1); every point is then negated
    with probability ``flip_prob``.  Labels record the blob, never the
    flip, so flips are pure nuisance.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if not separation > 0:
        raise ValueError("separation must be positive")
    if not 0.0 <= flip_prob <= 1.0:
        raise ValueError("flip_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, 2)))
    prototypes = basis.T
    blocks = [
        separation * prototypes[c] + noise * rng.standard_normal((n_per_class, dim))
        for c in range(2)
    ]
    points = np.vstack(blocks)
    flips = rng.random(len(points)) < flip_prob
    points[flips] *= -1.0
    labels = np.repeat([0, 1], n_per_class)
    meta = {
        "name": "flipped_blobs",
        "n_per_class": n_per_class,
        "dim": dim,
        "separation": separation,
        "noise": noise,
        "flip_prob": flip_prob,
        "seed": seed,
    }
    return Dataset(points, labels, meta)


def gen_directions(
    k: int,
    n_points: int,
    angle_offset_deg: float = 10.0,
    scale_law=("lognormal", 0.0, 0.75),
    noise: float = 0.02,
    seed: int = 0,
):
    """2-D points scattered along k equally spaced lines through the origin.

    Each point is eps * r * d_c + eta with a uniform cluster c, random
    sign eps, radius r from ``scale_law`` (only ("lognormal", mu, sigma)
    is supported), and isotropic jitter of scale ``noise``.  Returns
    (dataset, directions): the ground-truth unit directions, spaced
    180/k degrees apart, sign-canonical (first nonzero coordinate
    positive).
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if n_points < k:
        raise ValueError("n_points must be at least k")
    law, mu, s = scale_law
    if law != "lognormal":
        raise ValueError(f"unsupported scale law {law!r}")
    rng = np.random.default_rng(seed)
    angles = np.radians(angle_offset_deg + 180.0 * np.arange(k) / k)
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    directions = np.array([canonical_direction(d) for d in directions])
    clusters = rng.integers(k, size=n_points)
    signs = 2.0 * rng.integers(2, size=n_points) - 1.0
    radii = rng.lognormal(mu, s, size=n_points)
    jitter = noise * rng.standard_normal((n_points, 2))
    points = (signs * radii)[:, None] * directions[clusters] + jitter
    meta = {
        "name": "directions",
        "k": k,
        "n_points": n_points,
        "angle_offset_deg": angle_offset_deg,
        "scale_law": list(scale_law),
        "noise": noise,
        "seed": seed,
        "directions": directions.tolist(),
    }
    return Dataset(points, clusters, meta), directions


def canonical_direction(v) -> np.ndarray:
    """Unit vector with its first nonzero coordinate positive."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot canonicalize the zero vector")
    v = v / norm
    for component in v:
        if component != 0.0:
            return -v if component < 0 else v
    return v


def load_csv(path, has_labels: bool = False) -> Dataset:
    """Load a rectangular numeric CSV as a dataset.

    A header row is assumed only when *every* cell of the first row
    fails to parse as a number.  NaN and infinite cells are rejected.
    With ``has_labels`` the last column holds nonnegative integer
    labels.  Line and column numbers in errors are 1-based.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        raw = [(i + 1, row) for i, row in enumerate(csv.reader(handle)) if row]
    if not raw:
        raise FormatError(f"{path}: empty file", line=1)

    def parse_cell(text, line, column):
        try:
            value = float(text)
        except ValueError:
            raise ParseError(
                f"{path}: non-numeric cell {text!r} at line {line}, column {column}",
                line=line,
                column=column,
            ) from None
        if not math.isfinite(value):
            raise ParseError(
                f"{path}: non-finite cell {text!r} at line {line}, column {column}",
                line=line,
                column=column,
            )
        return value

    first_line, first_row = raw[0]
    header = None
    if all(not _is_number(cell) for cell in first_row):
        header = [cell.strip() for cell in first_row]
        raw = raw[1:]
        if not raw:
            raise FormatError(f"{path}: no data rows after header", line=first_line)
    width = len(raw[0][1])
    if has_labels and width < 2:
        raise FormatError(f"{path}: need a feature column besides the labels", line=raw[0][0])
    rows = []
    labels = []
    for line, row in raw:
        if len(row) != width:
            raise FormatError(
                f"{path}: row at line {line} has {len(row)} cells, expected {width}",
                line=line,
            )
        values = [parse_cell(cell, line, col + 1) for col, cell in enumerate(row)]
        if has_labels:
            label = values[-1]
            if label != int(label) or label < 0:
                raise ParseError(
                    f"{path}: label {row[-1]!r} at line {line} is not a nonnegative integer",
                    line=line,
                    column=width,
                )
            labels.append(int(label))
            values = values[:-1]
        rows.append(values)
    meta = {"name": os.path.splitext(os.path.basename(str(path)))[0], "source": str(path)}
    if header is not None:
        meta["header"] = header
    return Dataset(np.array(rows), np.array(labels) if has_labels else None, meta)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def save_dataset(data: Dataset, path) -> None:
    """Write points (+ label column) as CSV with a .meta.json sidecar.

    Floats are written with repr so a reload reproduces them exactly.
    """
    if np.iscomplexobj(data.points):
        raise ValueError("CSV export supports real-valued datasets only")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        for i, row in enumerate(data.points):
            cells = [repr(float(v)) for v in row]
            if data.labels is not None:
                cells.append(str(int(data.labels[i])))
            writer.writerow(cells)
    sidecar = os.path.splitext(str(path))[0] + ".meta.json"
    with open(sidecar, "w", encoding="utf-8") as handle:
        json.dump(data.meta, handle, sort_keys=True, indent=2)
        handle.write("\n")


def top_norm_select(data: Dataset, count: int) -> Dataset:
    """Keep the ``count`` largest-norm points, ties to the lower index.

    The surviving points keep their original relative order.
    """
    n = len(data)
    if not 0 <= count <= n:
        raise ValueError(f"count must be in [0, {n}], got {count}")
    norms = np.linalg.norm(data.points, axis=1)
    ranked = np.lexsort((np.arange(n), -norms))
    chosen = np.sort(ranked[:count])
    labels = data.labels[chosen] if data.labels is not None else None
    meta = {**data.meta, "top_norm_count": count}
    return Dataset(data.points[chosen], labels, meta)


@dataclass
class MixingEstimate:
    """Per-cluster scatter directions, a sign/scale-blind mixing estimate."""

    directions: np.ndarray
    per_cluster_counts: np.ndarray
    angle_errors_deg: np.ndarray | None = None


def angle_between_lines_deg(u, v) -> float:
    """Angle between the lines spanned by u and v, in [0, 90] degrees."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cos = abs(float(u @ v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.degrees(math.acos(min(cos, 1.0)))


def estimate_mixing(data, labels, true_directions=None) -> MixingEstimate:
    """Dominant scatter direction of each cluster of 2-D points.

    The direction is the top eigenvector of sum x x', which ignores both
    per-point signs and global positive rescaling; that makes it the
    right centroid for data identified up to sign and scale.  With
    ``true_directions`` given, angle errors (mod 180) are reported under
    the best cluster-to-truth matching.
    """
    points = np.asarray(getattr(data, "points", data), dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("mixing estimation expects real 2-D data")
    labels = np.asarray(labels, dtype=int)
    k = int(labels.max()) + 1
    directions = np.zeros((k, 2))
    counts = np.zeros(k, dtype=int)
    for c in range(k):
        members = points[labels == c]
        counts[c] = len(members)
        if counts[c] < 2:
            raise DegenerateClusterError(f"cluster {c} has {counts[c]} point(s)")
        scatter = members.T @ members
        _, vectors = np.linalg.eigh(scatter)
        directions[c] = canonical_direction(vectors[:, -1])
    errors = None
    if true_directions is not None:
        truth = np.asarray(true_directions, dtype=float)
        if len(truth) != k:
            raise ValueError("ground truth must provide one direction per cluster")
        if k > 8:
            raise MetricSizeError(f"{k} clusters exceed the exhaustive matching limit of 8")
        best_perm, best_total = None, np.inf
        for perm in permutations(range(k)):
            total = sum(
                angle_between_lines_deg(directions[c], truth[perm[c]]) for c in range(k)
            )
            if total < best_total:
                best_perm, best_total = perm, total
        errors = np.array(
            [angle_between_lines_deg(directions[c], truth[best_perm[c]]) for c in range(k)]
        )
    return MixingEstimate(directions, counts, errors)
