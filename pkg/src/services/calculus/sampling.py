"""Seeded low-discrepancy sample sets over charts and sub-regions."""

from typing import Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from services.calculus.fields import Chart


def halton(n: int, seed: int, dim: int = 3) -> np.ndarray:
    """``n`` scrambled Halton points in the unit cube."""
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(n)


def sample_chart(chart: Chart, n: int, seed: int) -> np.ndarray:
    return qmc.scale(halton(n, seed), chart.lower, chart.upper)


def periodic_radius(points: np.ndarray, center: Sequence[float]) -> np.ndarray:
    """Distance from the circle ``center x S^1`` on the unit flat torus."""
    d = points[:, :2] - np.asarray(center)
    d -= np.round(d)
    return np.hypot(d[:, 0], d[:, 1])


def sample_disk(center: Sequence[float], radius: float, n: int, seed: int,
                t_range: Tuple[float, float] = (0.0, 1.0), r_min: float = 0.0) -> np.ndarray:
    """Area-uniform points of the annulus ``r_min <= r <= radius`` times an interval of t."""
    u = halton(n, seed)
    r = np.sqrt(r_min ** 2 + u[:, 0] * (radius ** 2 - r_min ** 2))
    theta = 2 * np.pi * u[:, 1]
    t = t_range[0] + u[:, 2] * (t_range[1] - t_range[0])
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta), t])


def sample_outside(center: Sequence[float], radius: float, n: int, seed: int) -> np.ndarray:
    """Points of the flat torus at periodic distance greater than ``radius`` from the circle."""
    points = np.empty((0, 3))
    batch = 2 * n
    offset = 0
    while len(points) < n:
        cand = halton(offset + batch, seed)[offset:]
        points = np.vstack([points, cand[periodic_radius(cand, center) > radius]])
        offset += batch
    return points[:n]


def sample_disk_seeds(center: Sequence[float], radius: float, n: int, seed: int) -> np.ndarray:
    """``(n, 2)`` seed points of a disk (section samples)."""
    return sample_disk(center, radius, n, seed)[:, :2]


def random_vectors(n: int, seed: int, count: int = 2) -> Tuple[np.ndarray, ...]:
    """``count`` independent standard normal ``(n, 3)`` arrays."""
    rng = np.random.default_rng(seed)
    return tuple(rng.standard_normal((n, 3)) for _ in range(count))
