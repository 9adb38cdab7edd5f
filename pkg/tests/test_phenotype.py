import math

import numpy as np
import pytest

from phenopix import ImageBuffer, PolygonMask, crop_individual, measure, rasterize, translate_polygon


def _rect(x, y, w, h):
    return PolygonMask(np.array([[x, y], [x + w, y], [x + w, y + h], [x, y + h]], float))


def test_crop_full_image_is_identity(rng):
    data = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
    img = ImageBuffer(7, 5, 1, data)
    out = crop_individual(img, (0, 0, 7, 5))
    assert np.array_equal(out.data, data)


def test_crop_known_samples():
    img = ImageBuffer(4, 4, 1, np.arange(16, dtype=np.uint8).reshape(4, 4))
    out = crop_individual(img, (1, 1, 2, 2))
    assert out.data.tolist() == [[5, 6], [9, 10]]
    assert (out.width, out.height) == (2, 2)


def test_crop_is_a_copy():
    img = ImageBuffer(4, 4, 1, np.zeros((4, 4), np.uint8))
    out = crop_individual(img, (0, 0, 2, 2))
    out.data[0, 0] = 9
    assert img.data[0, 0] == 0


def test_crop_out_of_bounds():
    img = ImageBuffer(4, 4, 1, np.zeros((4, 4), np.uint8))
    with pytest.raises(ValueError, match="exceeds"):
        crop_individual(img, (2, 2, 3, 3))
    with pytest.raises(ValueError, match="positive"):
        crop_individual(img, (0, 0, 0, 2))


def test_measure_cylinder_rectangle():
    m = measure(_rect(0, 0, 10, 20))
    assert m.width_px == 10.0
    assert m.height_px == 20.0
    assert m.area_px2 == 200.0
    assert m.volume_px3 == pytest.approx(20 * math.pi * 25, rel=1e-12)


def test_measure_sphere_volume(regular_polygon):
    m = measure(regular_polygon(n=256, radius=50))
    analytic = 4.0 / 3.0 * math.pi * 50**3
    assert m.volume_px3 == pytest.approx(analytic, rel=0.02)
    assert m.width_px == pytest.approx(100.0, abs=0.1)


def test_measure_cone_volume():
    cone = PolygonMask(np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 20.0]]))
    analytic = math.pi * 25 * 20 / 3
    assert measure(cone).volume_px3 == pytest.approx(analytic, rel=0.03)


def test_measure_midpoint_rule_row_oracle():
    # independent row-by-row sum on a triangle whose scanline width is linear
    cone = PolygonMask(np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 20.0]]))
    expected = 0.0
    for r in range(0, 20):
        y = r + 0.5
        d = 10.0 * (1.0 - y / 20.0)  # similar triangles
        expected += math.pi * (d / 2.0) ** 2
    assert measure(cone).volume_px3 == pytest.approx(expected, rel=1e-12)


def test_measure_scale_covariance(regular_polygon):
    base = regular_polygon(n=128, radius=30, cx=40, cy=40)
    m1 = measure(base)
    s = 2.5
    m2 = measure(PolygonMask(base.vertices * s))
    assert m2.width_px == pytest.approx(s * m1.width_px, rel=1e-12)
    assert m2.height_px == pytest.approx(s * m1.height_px, rel=1e-12)
    assert m2.area_px2 == pytest.approx(s**2 * m1.area_px2, rel=1e-12)
    assert m2.volume_px3 == pytest.approx(s**3 * m1.volume_px3, rel=0.02)


def test_volume_invariant_under_horizontal_shift_and_mirror(random_polygon):
    poly = random_polygon(n=10)
    v = measure(poly).volume_px3
    shifted = translate_polygon(poly, 17.25, 0.0)
    assert measure(shifted).volume_px3 == pytest.approx(v, rel=1e-12)
    mirrored = PolygonMask(np.stack([-poly.vertices[:, 0], poly.vertices[:, 1]], axis=1))
    assert measure(mirrored).volume_px3 == pytest.approx(v, rel=1e-12)


def test_volume_bounded_by_enclosing_cylinder(random_polygon):
    for _ in range(5):
        poly = random_polygon(n=16)
        m = measure(poly)
        bound = math.pi / 4.0 * m.width_px**2 * m.height_px
        assert m.volume_px3 <= bound * (1 + 1e-12)


def test_measure_matches_on_rasterized_rectangle():
    rect = _rect(3, 2, 12, 25)
    m1 = measure(rect)
    grid = rasterize(rect, 20, 30)
    rows = np.any(grid, axis=1).nonzero()[0]
    cols = np.any(grid, axis=0).nonzero()[0]
    revector = _rect(cols[0], rows[0], cols[-1] - cols[0] + 1, rows[-1] - rows[0] + 1)
    m2 = measure(revector)
    assert abs(m2.width_px - m1.width_px) <= 1.0
    assert abs(m2.height_px - m1.height_px) <= 1.0
