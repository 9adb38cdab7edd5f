import math

import numpy as np
import pytest

from phenopix import (
    PolygonMask,
    extents,
    point_to_polygon_distance,
    polygon_area,
    rasterize,
    rotate_polygon,
    sample_boundary,
    scanline_diameter,
    translate_polygon,
)
from phenopix.geometry import rotate_points


def test_polygon_needs_three_vertices():
    with pytest.raises(ValueError, match="3 vertices"):
        PolygonMask(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_polygon_rejects_consecutive_duplicates():
    with pytest.raises(ValueError, match="identical consecutive"):
        PolygonMask(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))


def test_polygon_rejects_closing_duplicate():
    # explicit closing vertex duplicates vertex 0 across the wrap-around edge
    with pytest.raises(ValueError, match="identical consecutive"):
        PolygonMask(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))


def test_polygon_rejects_zero_area():
    with pytest.raises(ValueError, match="zero area"):
        PolygonMask(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))


def test_extents(square):
    assert extents(square(2, 3, 4)) == (2, 6, 3, 7)


def test_area_unit_square(square):
    assert polygon_area(square(0, 0, 1)) == 1.0


def test_area_triangle_orientation_independent():
    tri = np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]])
    assert polygon_area(PolygonMask(tri)) == 6.0
    assert polygon_area(PolygonMask(tri[::-1])) == 6.0


def test_self_intersecting_polygon_warns():
    # two edges cross the base; lobes do not cancel, so construction succeeds
    crossed = PolygonMask(
        np.array([[0.0, 0.0], [10, 0], [10, 10], [5, -5], [0, 10]])
    )
    with pytest.warns(RuntimeWarning, match="self-intersecting"):
        polygon_area(crossed)


def test_touching_contour_does_not_warn(recwarn):
    # vertex touches an edge without crossing it
    poly = PolygonMask(np.array([[0, 0], [4, 0], [4, 4], [2, 0.0], [0, 4]]))
    polygon_area(poly)
    assert not [w for w in recwarn if w.category is RuntimeWarning]


def test_scanline_triangle_midheight():
    tri = PolygonMask(np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 4.0]]))
    assert scanline_diameter(tri, 2.0) == 2.0


def test_scanline_misses_polygon(square):
    assert scanline_diameter(square(0, 0, 4), 10.0) == 0.0
    assert scanline_diameter(square(0, 0, 4), -1.0) == 0.0


def test_scanline_on_horizontal_edge(square):
    # the flat bottom edge contributes its endpoints
    assert scanline_diameter(square(0, 0, 4), 0.0) == 4.0


def test_scanline_nonconvex_outer_extent():
    # U-shape: at mid height the outer extent spans both prongs
    u = PolygonMask(np.array(
        [[0, 0], [10, 0], [10, 8], [7, 8], [7, 3], [3, 3], [3, 8], [0, 8]], float
    ))
    assert scanline_diameter(u, 5.0) == 10.0


def test_rasterize_aligned_square(square):
    grid = rasterize(square(0, 0, 2), 4, 4)
    assert grid.sum() == 4
    assert grid[:2, :2].all()


def test_rasterize_pixel_center_rule():
    poly = PolygonMask(np.array([[0.4, 0.4], [1.6, 0.4], [1.6, 1.6], [0.4, 1.6]]))
    grid = rasterize(poly, 3, 3)
    assert grid.sum() == 4  # centers 0.5 and 1.5 fall inside, 2.5 does not
    poly = PolygonMask(np.array([[1.1, 1.1], [1.9, 1.1], [1.9, 1.9], [1.1, 1.9]]))
    grid = rasterize(poly, 3, 3)
    assert grid.sum() == 1 and grid[1, 1] == 1  # only center (1.5, 1.5) is covered


def test_rasterize_out_of_bounds_warns(square):
    with pytest.warns(RuntimeWarning, match="clip"):
        grid = rasterize(square(-2, -2, 6), 3, 3)
    assert grid.sum() == 9  # clipped to the visible quadrant


def test_rasterize_nonconvex_even_odd():
    u = PolygonMask(np.array(
        [[0, 0], [9, 0], [9, 9], [6, 9], [6, 3], [3, 3], [3, 9], [0, 9]], float
    ))
    grid = rasterize(u, 9, 9)
    assert grid[6, 4] == 0  # inside the notch
    assert grid[1, 4] == 1  # inside the bridge


def test_point_distance_interior(square):
    assert point_to_polygon_distance((1.0, 1.0), square(0, 0, 2)) == 1.0


def test_point_distance_outside_corner(square):
    assert point_to_polygon_distance((3.0, 3.0), square(0, 0, 2)) == pytest.approx(math.sqrt(2))


def test_point_distance_on_edge(square):
    assert point_to_polygon_distance((1.0, 0.0), square(0, 0, 2)) == 0.0


def test_sample_boundary_square_corners(square):
    pts = sample_boundary(square(0, 0, 4), 4)
    assert pts.tolist() == [[0, 0], [4, 0], [4, 4], [0, 4]]


def test_sample_boundary_triangle():
    tri = PolygonMask(np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]]))
    pts = sample_boundary(tri, 3)
    assert pts == pytest.approx(np.array([[0.0, 0.0], [3.0, 1.0], [2.4, 3.2]]))


def test_sample_boundary_points_lie_on_contour(random_polygon):
    poly = random_polygon(n=9)
    for p in sample_boundary(poly, 37):
        assert point_to_polygon_distance(p, poly) < 1e-9


def test_sample_boundary_minimum_count(square):
    with pytest.raises(ValueError, match="3"):
        sample_boundary(square(), 2)


def test_rotate_points_quarter_turn():
    out = rotate_points(np.array([[1.0, 0.0]]), (0.0, 0.0), math.pi / 2)
    assert out[0] == pytest.approx([0.0, 1.0], abs=1e-12)


def test_rotate_polygon_preserves_area(random_polygon):
    poly = random_polygon()
    area = polygon_area(poly)
    rotated = rotate_polygon(poly, (7.0, -3.0), 1.234)
    assert polygon_area(rotated) == pytest.approx(area, rel=1e-12)


def test_rotate_polygon_round_trip(random_polygon):
    poly = random_polygon()
    back = rotate_polygon(rotate_polygon(poly, (5, 5), 0.7), (5, 5), -0.7)
    assert np.allclose(back.vertices, poly.vertices, atol=1e-12)


def test_translate_polygon(square):
    assert extents(translate_polygon(square(0, 0, 2), 3, 4)) == (3, 5, 4, 6)


def test_rasterize_count_tracks_area(random_polygon):
    # pixel count differs from the true area by at most ~the perimeter
    for _ in range(5):
        poly = random_polygon(n=14)
        area = polygon_area(poly)
        v = np.vstack([poly.vertices, poly.vertices[:1]])
        perimeter = float(np.sum(np.sqrt(np.sum(np.diff(v, axis=0) ** 2, axis=1))))
        count = int(rasterize(poly, 40, 40).sum())
        assert abs(count - area) <= perimeter
