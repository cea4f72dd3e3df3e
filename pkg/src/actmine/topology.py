"""Sublevel-set persistence of a sampled function and landscape features.

Zero-dimensional persistent homology is computed on the path complex of a
real sequence: vertices carry the sample values, edges between neighbors
carry the max of their endpoints, and components appearing in the growing
sublevel sets are tracked with a union-find sweep. Diagrams are summarized
as persistence landscapes sampled on a shared grid so that every person's
feature vector lives in the same space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .walsh import WalshSpectrum

__all__ = [
    "PersistenceDiagram",
    "PersistenceLandscape",
    "spectrum_profile",
    "sublevel_persistence",
    "diagram_bounds",
    "landscape",
    "landscape_vector",
    "landscape_distance",
]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Birth-death pairs of a sublevel filtration.

    The essential class (the component of the global minimum) is kept with
    its death capped at the global maximum and flagged, so landscapes stay
    finite.
    """

    births: np.ndarray
    deaths: np.ndarray
    essential: np.ndarray

    def __post_init__(self):
        if not (len(self.births) == len(self.deaths) == len(self.essential)):
            raise ValueError("diagram arrays must share a length")
        if np.any(self.deaths < self.births):
            raise ValueError("every pair needs birth <= death")

    def __len__(self) -> int:
        return len(self.births)

    def pairs(self) -> list[tuple[float, float, bool]]:
        return [
            (float(b), float(d), bool(e))
            for b, d, e in zip(self.births, self.deaths, self.essential)
        ]


@dataclass(frozen=True)
class PersistenceLandscape:
    """Level functions lambda(k, t) sampled on a uniform grid."""

    k_levels: int
    grid: np.ndarray
    values: np.ndarray  # shape (k_levels, len(grid))

    def __post_init__(self):
        if self.values.shape != (self.k_levels, len(self.grid)):
            raise ValueError("landscape values must be k_levels x grid_size")

    @property
    def grid_step(self) -> float:
        if len(self.grid) < 2:
            return 0.0
        return float(self.grid[1] - self.grid[0])


def spectrum_profile(spectrum: WalshSpectrum) -> np.ndarray:
    """Function handed to the filtration: |F(m)| / t2 with the first
    (sequency-1) coefficient dropped.

    The first coefficient is t2 times the mean of the integer activity
    codes, an artifact of the arbitrary category numbering rather than of
    rhythm, so it is excluded.
    """
    return np.abs(spectrum.coefficients[1:]) / spectrum.t2


def sublevel_persistence(values) -> PersistenceDiagram:
    """0-dimensional persistence of the sublevel filtration on a path.

    Components are born at local minima and die when they merge into an
    older component (elder rule; equal births break toward the smaller
    vertex index). Zero-persistence merges (birth == death) are dropped;
    the surviving component is recorded as the essential pair
    (global minimum, global maximum).
    """
    f = np.asarray(values, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("sublevel_persistence expects a non-empty 1-D sequence")
    n = f.size

    parent = np.full(n, -1, dtype=np.int64)  # -1: vertex not yet in the filtration
    birth_val = np.empty(n)
    birth_idx = np.empty(n, dtype=np.int64)

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    births: list[float] = []
    deaths: list[float] = []

    for v in np.lexsort((np.arange(n), f)):
        parent[v] = v
        birth_val[v] = f[v]
        birth_idx[v] = v
        for nb in (v - 1, v + 1):
            if 0 <= nb < n and parent[nb] != -1:
                ra, rb = find(v), find(nb)
                if ra == rb:
                    continue
                if (birth_val[ra], birth_idx[ra]) <= (birth_val[rb], birth_idx[rb]):
                    elder, young = ra, rb
                else:
                    elder, young = rb, ra
                if f[v] > birth_val[young]:
                    births.append(float(birth_val[young]))
                    deaths.append(float(f[v]))
                parent[young] = elder

    order = np.lexsort((deaths, births)) if births else np.array([], dtype=np.int64)
    b = np.asarray(births)[order] if births else np.empty(0)
    d = np.asarray(deaths)[order] if deaths else np.empty(0)
    return PersistenceDiagram(
        births=np.append(b, f.min()),
        deaths=np.append(d, f.max()),
        essential=np.append(np.zeros(len(b), dtype=bool), True),
    )


def diagram_bounds(diagrams: Iterable[PersistenceDiagram]) -> tuple[float, float]:
    """Dataset-wide [min birth, max death] used for the shared grid."""
    lo, hi = np.inf, -np.inf
    for dgm in diagrams:
        if len(dgm):
            lo = min(lo, float(dgm.births.min()))
            hi = max(hi, float(dgm.deaths.max()))
    if lo > hi:
        raise ValueError("no non-empty diagram to take bounds from")
    return lo, hi


def landscape(
    diagram: PersistenceDiagram,
    k_levels: int,
    grid_size: int,
    t_min: float,
    t_max: float,
) -> PersistenceLandscape:
    """Sample the first ``k_levels`` landscape functions on a shared grid.

    lambda(k, t) is the k-th largest tent value over the diagram's pairs;
    levels beyond the number of pairs are zero. An empty diagram yields an
    all-zero landscape.
    """
    if k_levels < 1:
        raise ValueError("k_levels must be >= 1")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(t_min, t_max, grid_size)
    if len(diagram) == 0:
        return PersistenceLandscape(k_levels, grid, np.zeros((k_levels, grid_size)))

    b = diagram.births[:, None]
    d = diagram.deaths[:, None]
    tents = np.minimum(grid[None, :] - b, d - grid[None, :])
    np.maximum(tents, 0.0, out=tents)
    if tents.shape[0] < k_levels:
        tents = np.vstack([tents, np.zeros((k_levels - tents.shape[0], grid_size))])
    ordered = np.sort(tents, axis=0)[::-1]
    return PersistenceLandscape(k_levels, grid, np.ascontiguousarray(ordered[:k_levels]))


def landscape_vector(ls: PersistenceLandscape) -> np.ndarray:
    """Row-major flattening; length k_levels * grid_size."""
    return ls.values.reshape(-1).copy()


def landscape_distance(a: PersistenceLandscape, b: PersistenceLandscape) -> float:
    """Discretized L2 distance: Euclidean vector norm scaled by sqrt(step)."""
    if a.k_levels != b.k_levels or not np.array_equal(a.grid, b.grid):
        raise ValueError("landscapes must share grid and level count")
    step = a.grid_step
    return float(np.sqrt(step) * np.linalg.norm(a.values - b.values))
