import numpy as np
import pytest

from phenopix import PolygonMask


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


@pytest.fixture
def square():
    """Factory for axis-aligned squares: square(x, y, side)."""

    def make(x=0.0, y=0.0, side=10.0):
        return PolygonMask(
            np.array([[x, y], [x + side, y], [x + side, y + side], [x, y + side]])
        )

    return make


@pytest.fixture
def regular_polygon():
    """Factory for regular n-gons: regular_polygon(n, radius, cx, cy)."""

    def make(n=256, radius=50.0, cx=None, cy=None):
        if cx is None:
            cx = radius + 2
        if cy is None:
            cy = radius + 2
        ang = np.arange(n) / n * 2.0 * np.pi
        return PolygonMask(
            np.stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)], axis=1)
        )

    return make


@pytest.fixture
def random_polygon(rng):
    """Factory for random star-shaped polygons (simple by construction)."""

    def make(n=12, cx=20.0, cy=20.0, r_lo=5.0, r_hi=15.0):
        ang = np.sort(rng.uniform(0, 2 * np.pi, size=n))
        # reject near-duplicate angles so no two vertices coincide
        while np.any(np.diff(ang) < 1e-3):
            ang = np.sort(rng.uniform(0, 2 * np.pi, size=n))
        radii = rng.uniform(r_lo, r_hi, size=n)
        return PolygonMask(
            np.stack([cx + radii * np.cos(ang), cy + radii * np.sin(ang)], axis=1)
        )

    return make
