"""Distance matrices, tours, and the exhaustive brute-force oracle.

City indices are 1-based in the public interface and in all error
messages; arrays are stored 0-based internally.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DimensionMismatch,
    InstanceError,
    InstanceTooLarge,
    NegativeDistance,
    NonzeroDiagonal,
    TriangleViolation,
)

MIN_CITIES = 3
ORACLE_MAX_CITIES = 10


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative city-to-city distances with zero diagonal."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries.flags.writeable = False

    def d(self, i: int, j: int) -> float:
        """Distance between cities i and j (1-based)."""
        return float(self.entries[i - 1, j - 1])


@dataclass(frozen=True)
class Tour:
    """Visiting order: position j holds the city visited jth (1-based)."""

    order: tuple[int, ...]

    def __post_init__(self):
        n = len(self.order)
        if sorted(self.order) != list(range(1, n + 1)):
            raise InstanceError(f"tour {self.order} is not a permutation of 1..{n}")

    @property
    def n(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class OracleResult:
    best_tour: Tour
    best_length: float
    all_lengths: dict[tuple[int, ...], float]


def validate_distance_matrix(entries, metric: bool = False) -> DistanceMatrix:
    """Check symmetry, nonnegativity, zero diagonal, and (optionally) the
    triangle inequality; returns the validated matrix.
    """
    mat = np.array(entries, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InstanceError(f"distance matrix must be square, got shape {mat.shape}")
    n = mat.shape[0]
    if n < MIN_CITIES:
        raise InstanceError(f"need at least {MIN_CITIES} cities, got n = {n}")
    for i in range(n):
        if mat[i, i] != 0.0:
            raise NonzeroDiagonal(i + 1, mat[i, i])
    for i in range(n):
        for j in range(i + 1, n):
            if mat[i, j] != mat[j, i]:
                raise AsymmetricMatrix(i + 1, j + 1, mat[i, j], mat[j, i])
            if mat[i, j] < 0.0:
                raise NegativeDistance(i + 1, j + 1, mat[i, j])
    if metric:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for k in range(n):
                    if k == i or k == j:
                        continue
                    if mat[i, j] > mat[i, k] + mat[k, j]:
                        raise TriangleViolation(
                            i + 1, j + 1, k + 1, mat[i, j], mat[i, k] + mat[k, j]
                        )
    return DistanceMatrix(n=n, entries=mat)


def tour_length(d: DistanceMatrix, t: Tour) -> float:
    """Cyclic tour length, including the closing edge back to the start."""
    if t.n != d.n:
        raise DimensionMismatch(f"tour has {t.n} cities, matrix has {d.n}")
    total = 0.0
    for j in range(t.n):
        total += d.entries[t.order[j] - 1, t.order[(j + 1) % t.n] - 1]
    return float(total)


def canonical_tour(t: Tour) -> Tour:
    """Rotate city 1 to the front, then pick the direction whose second
    city has the smaller index.
    """
    order = list(t.order)
    k = order.index(1)
    order = order[k:] + order[:k]
    if t.n >= 3 and order[-1] < order[1]:
        order = [order[0]] + order[:0:-1]
    return Tour(tuple(order))


def brute_force_optimum(d: DistanceMatrix, fix_first: bool = True) -> OracleResult:
    """Exhaustive enumeration of every tour, canonicalized by fixing city 1
    first and identifying the two travel directions.  Deterministic
    tie-break to the lexicographically smallest tour.
    """
    n = d.n
    if n > ORACLE_MAX_CITIES:
        raise InstanceTooLarge(f"n = {n} exceeds enumeration guard {ORACLE_MAX_CITIES}")
    if fix_first:
        candidates = ((1,) + rest for rest in itertools.permutations(range(2, n + 1)))
    else:
        candidates = itertools.permutations(range(1, n + 1))
    all_lengths: dict[tuple[int, ...], float] = {}
    for order in candidates:
        key = canonical_tour(Tour(order)).order
        if key not in all_lengths:
            all_lengths[key] = float(tour_length(d, Tour(key)))
    best_length = min(all_lengths.values())
    best_key = min(k for k, v in all_lengths.items() if v == best_length)
    return OracleResult(
        best_tour=Tour(best_key), best_length=best_length, all_lengths=all_lengths
    )


def random_euclidean_instance(n: int, seed: int) -> tuple[DistanceMatrix, np.ndarray]:
    """Points uniform in the unit square (PCG64 generator), pairwise
    Euclidean distances.  Identical seed gives bit-identical output.
    """
    if n < MIN_CITIES:
        raise InstanceError(f"need at least {MIN_CITIES} cities, got n = {n}")
    rng = np.random.default_rng(seed)
    points = rng.random((n, 2))
    return points_to_distance_matrix(points), points


def points_to_distance_matrix(points: np.ndarray) -> DistanceMatrix:
    """Exactly-symmetric Euclidean distance matrix of planar points."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dij = float(np.hypot(*(points[i] - points[j])))
            mat[i, j] = dij
            mat[j, i] = dij
    return DistanceMatrix(n=n, entries=mat)


def load_instance(path) -> tuple[DistanceMatrix, np.ndarray | None]:
    """Read `{"n": int, "d": [row-major reals], "points": optional}` JSON."""
    payload = json.loads(Path(path).read_text())
    return instance_from_dict(payload)


def instance_from_dict(payload: dict) -> tuple[DistanceMatrix, np.ndarray | None]:
    n = int(payload["n"])
    flat = payload["d"]
    if len(flat) != n * n:
        raise InstanceError(f"expected {n * n} entries in 'd', got {len(flat)}")
    d = validate_distance_matrix(np.array(flat, dtype=float).reshape(n, n))
    points = None
    if payload.get("points") is not None:
        points = np.array(payload["points"], dtype=float)
    return d, points


def save_instance(path, d: DistanceMatrix, points: np.ndarray | None = None) -> None:
    payload: dict = {"n": d.n, "d": [float(v) for v in d.entries.ravel()]}
    if points is not None:
        payload["points"] = [[float(x), float(y)] for x, y in points]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
