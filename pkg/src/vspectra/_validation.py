"""Input checks shared by the estimators and the functional API."""

import numpy as np


def check_grid(grid, name="grid", positive=False):
    """Return ``grid`` as a 1-D float array; it must be strictly increasing."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(grid)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(np.diff(grid) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    if grid[0] < 0 or (positive and grid[0] <= 0):
        raise ValueError(f"{name} must be {'positive' if positive else 'non-negative'}")
    return grid


def check_nonneg(x, name):
    if np.any(np.asarray(x) < 0):
        raise ValueError(f"{name} must be non-negative")


def check_series(t, y, min_points=2):
    t = np.asarray(t, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if t.shape != y.shape:
        raise ValueError(f"t and y have different lengths ({t.size} vs {y.size})")
    if t.size < min_points:
        raise ValueError(f"need at least {min_points} points, got {t.size}")
    return t, y
