"""Small synthetic datasets used for exercising the classifiers.

The cross-planes set puts each class on one of two intersecting lines
(y = x and y = -x), sampled away from the crossing so the classes are
cleanly separable by proximity to their own line.  The mid-band variant
adds unlabeled rows along the positive x-axis, halfway between the class
lines.  The concentric-circles set is linearly inseparable and exists to
show the kernel variants earning their keep.
"""

from __future__ import annotations

import numpy as np

__all__ = ["concentric_circles", "cross_planes", "mid_band_universum"]


def _line_points(
    rng: np.random.Generator, n: int, slope: float, noise: float, offset: float
) -> np.ndarray:
    x = rng.uniform(offset, 1.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    y = slope * x + rng.normal(scale=noise, size=n)
    return np.column_stack([x, y])


def cross_planes(
    n_per_class: int = 50,
    noise: float = 0.05,
    seed: int = 0,
    offset: float = 0.15,
) -> tuple[np.ndarray, np.ndarray]:
    """Class +1 near y = x, class -1 near y = -x, |x| in [offset, 1]."""
    rng = np.random.default_rng(seed)
    X1 = _line_points(rng, n_per_class, 1.0, noise, offset)
    X2 = _line_points(rng, n_per_class, -1.0, noise, offset)
    return X1, X2


def mid_band_universum(
    n: int = 30, noise: float = 0.05, seed: int = 1, offset: float = 0.15
) -> np.ndarray:
    """Unlabeled rows along the positive x-axis, between the class lines."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(offset, 1.0, size=n)
    y = rng.normal(scale=noise, size=n)
    return np.column_stack([x, y])


def concentric_circles(
    n_per_class: int = 100,
    radii: tuple[float, float] = (1.0, 3.0),
    noise: float = 0.05,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Class +1 on the inner circle, class -1 on the outer one."""
    rng = np.random.default_rng(seed)
    out = []
    for radius in radii:
        angles = rng.uniform(0.0, 2.0 * np.pi, size=n_per_class)
        r = radius + rng.normal(scale=noise, size=n_per_class)
        out.append(np.column_stack([r * np.cos(angles), r * np.sin(angles)]))
    return out[0], out[1]
