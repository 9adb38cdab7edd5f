import numpy as np
import pytest

from phenopix import (
    CalibrationModel,
    CalibrationSample,
    DepthMap,
    MissingDepthError,
    PixelPhenotype,
    PolygonMask,
    depth_at,
    fit_calibration,
    fuse,
)


def grid_search_k(samples, lo, hi, step=0.01):
    """Brute-force 1-D minimization of the pixel-space least-squares
    objective; the oracle for the closed-form fit."""
    best_k, best_obj = None, float("inf")
    k = lo
    while k <= hi:
        obj = sum((s.pixels_per_cm - k / s.depth_cm) ** 2 for s in samples)
        if obj < best_obj:
            best_k, best_obj = k, obj
        k += step
    return best_k


def test_fit_exact_inverse_curve():
    samples = [CalibrationSample(20, 50), CalibrationSample(40, 25), CalibrationSample(100, 10)]
    model = fit_calibration(samples)
    assert model.k == pytest.approx(1000.0, rel=1e-12)
    assert model.rms_residual == pytest.approx(0.0, abs=1e-9)
    assert model.n_samples == 3


def test_fit_single_sample():
    model = fit_calibration([CalibrationSample(50, 20)])
    assert model.k == pytest.approx(1000.0, rel=1e-12)


def test_fit_noisy_matches_grid_search_oracle():
    samples = [CalibrationSample(20, 52), CalibrationSample(40, 24), CalibrationSample(100, 11)]
    model = fit_calibration(samples)
    k_oracle = grid_search_k(samples, 900.0, 1100.0, 0.01)
    assert abs(model.k - k_oracle) <= 0.01
    assert model.rms_residual > 0


def test_fit_recovers_k_from_exact_samples(rng):
    for n in (1, 2, 7, 23):
        k0 = float(rng.uniform(500, 9000))
        depths = rng.uniform(15, 120, size=n)
        samples = [CalibrationSample(float(d), k0 / float(d)) for d in depths]
        model = fit_calibration(samples)
        assert model.k == pytest.approx(k0, rel=1e-9)


def test_closed_form_beats_any_grid_candidate(rng):
    depths = rng.uniform(20, 100, size=6)
    pixels = rng.uniform(40, 300, size=6)
    samples = [CalibrationSample(float(d), float(p)) for d, p in zip(depths, pixels)]
    model = fit_calibration(samples)

    def objective(k):
        return sum((s.pixels_per_cm - k / s.depth_cm) ** 2 for s in samples)

    best = objective(model.k)
    for k in np.arange(model.k - 50, model.k + 50, 0.5):
        assert best <= objective(float(k)) + 1e-9


def test_fit_empty_errors():
    with pytest.raises(ValueError, match="at least one"):
        fit_calibration([])


def test_sample_validation():
    with pytest.raises(ValueError, match="positive"):
        CalibrationSample(-5, 10)
    with pytest.raises(ValueError, match="positive"):
        CalibrationSample(5, 0)


def _depth_const(value, w=10, h=10):
    return DepthMap(w, h, np.full((h, w), float(value)))


def test_depth_at_center_constant_field():
    assert depth_at(_depth_const(60), (2, 3, 5, 4)) == 60.0


def test_depth_at_center_sentinel_errors():
    d = _depth_const(60)
    d.values[5, 5] = 0.0
    with pytest.raises(MissingDepthError, match="center"):
        depth_at(d, (3, 3, 5, 5))  # center pixel is (3+2, 3+2) = (5, 5)


def test_depth_at_box_out_of_bounds():
    with pytest.raises(ValueError, match="exceeds"):
        depth_at(_depth_const(60), (8, 8, 5, 5))


def test_depth_at_mask_median_skips_zeros():
    # readings {50, 52, 54, 0, 56, 58} under the mask -> median of positives = 54
    values = np.zeros((2, 3))
    values[0] = [50.0, 52.0, 54.0]
    values[1] = [0.0, 56.0, 58.0]
    d = DepthMap(3, 2, values)
    poly = PolygonMask(np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 2.0], [0.0, 2.0]]))
    assert depth_at(d, (0, 0, 3, 2), "mask-median", polygon=poly) == 54.0


def test_depth_at_mask_median_requires_polygon():
    with pytest.raises(ValueError, match="polygon"):
        depth_at(_depth_const(60), (0, 0, 4, 4), "mask-median")


def test_depth_at_mask_median_all_zero_errors():
    d = _depth_const(0, 4, 4)
    poly = PolygonMask(np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]))
    with pytest.raises(MissingDepthError, match="mask"):
        depth_at(d, (0, 0, 4, 4), "mask-median", polygon=poly)


def test_depth_at_unknown_mode():
    with pytest.raises(ValueError, match="mode"):
        depth_at(_depth_const(60), (0, 0, 4, 4), "average")


def test_fuse_trivial_scale():
    model = CalibrationModel(5000.0, 3, 0.0)
    px = PixelPhenotype(250.0, 500.0, 10_000.0, 1_000_000.0)
    m = fuse(px, model, 50.0)
    assert m.scale_px_per_cm == pytest.approx(100.0, rel=1e-12)
    assert m.width_cm == pytest.approx(2.5, rel=1e-9)
    assert m.height_cm == pytest.approx(5.0, rel=1e-9)
    assert m.area_cm2 == pytest.approx(1.0, rel=1e-9)
    assert m.volume_cm3 == pytest.approx(1.0, rel=1e-9)
    assert m.depth_used_cm == 50.0


def test_fuse_rejects_nonpositive_depth():
    model = CalibrationModel(5000.0, 1, 0.0)
    with pytest.raises(ValueError, match="positive"):
        fuse(PixelPhenotype(1, 1, 1, 1), model, 0.0)


def test_fuse_scale_invariance(rng):
    # scaling pixel traits by (s, s, s^2, s^3) and k by s leaves metric output unchanged
    model = CalibrationModel(3200.0, 2, 0.1)
    px = PixelPhenotype(123.0, 456.0, 7890.0, 123456.0)
    d = 43.7
    base = fuse(px, model, d)
    for s in rng.uniform(0.2, 6.0, size=8):
        scaled_px = PixelPhenotype(px.width_px * s, px.height_px * s,
                                   px.area_px2 * s**2, px.volume_px3 * s**3)
        scaled_model = CalibrationModel(model.k * s, model.n_samples, model.rms_residual)
        out = fuse(scaled_px, scaled_model, d)
        assert out.width_cm == pytest.approx(base.width_cm, rel=1e-9)
        assert out.height_cm == pytest.approx(base.height_cm, rel=1e-9)
        assert out.area_cm2 == pytest.approx(base.area_cm2, rel=1e-9)
        assert out.volume_cm3 == pytest.approx(base.volume_cm3, rel=1e-9)


def test_model_validation():
    with pytest.raises(ValueError, match="positive"):
        CalibrationModel(0.0, 1, 0.0)
    with pytest.raises(ValueError, match="negative"):
        CalibrationModel(100.0, 1, -1.0)
