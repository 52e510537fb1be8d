import numpy as np
import pytest

from grtrecon import (DtbConfig, Image, ImageGrid, combined_dtb, compare,
                      extract_profile)


@pytest.fixture(scope="module")
def curve(sec9_fan):
    mu = (2 * np.pi / 300) / (2 * 3.7 * np.sqrt(2) / 450)
    r = np.linspace(-8.0, 8.0, 161)
    return combined_dtb(sec9_fan, DtbConfig(kappa=0.5, mu=mu, r_grid=r))


def linear_image(grid, a, b, c):
    xx, yy = np.meshgrid(grid.xs(), grid.ys(), indexing="ij")
    return Image(grid, a * xx + b * yy + c)


class TestExtractProfile:
    def test_linear_field_is_exact(self):
        # bilinear interpolation reproduces affine images exactly
        grid = ImageGrid.square(101, 3.7)
        img = linear_image(grid, 0.7, -0.3, 1.2)
        x0 = np.array([0.4, -0.9])
        theta = np.array([np.cos(0.5), np.sin(0.5)])
        xc = np.linspace(-5.0, 5.0, 41)
        eps = 0.05
        prof = extract_profile(img, x0, theta, eps, xc)
        pts = x0[None, :] + eps * xc[:, None] * theta[None, :]
        want = 0.7 * pts[:, 0] - 0.3 * pts[:, 1] + 1.2
        assert np.allclose(prof, want, atol=1e-12)

    def test_direction_scaling(self):
        grid = ImageGrid.square(101, 3.7)
        img = linear_image(grid, 1.0, 0.0, 0.0)
        xc = np.linspace(-2.0, 2.0, 9)
        a = extract_profile(img, (0.0, 0.0), (1.0, 0.0), 0.1, xc)
        b = extract_profile(img, (0.0, 0.0), (1.0, 0.0), 0.2, xc)
        assert np.allclose(b, 2.0 * a, atol=1e-12)

    def test_outside_grid_rejected(self):
        grid = ImageGrid.square(11, 1.0)
        img = Image.zeros(grid)
        with pytest.raises(ValueError):
            extract_profile(img, (0.0, 0.0), (1.0, 0.0), 1.0, [0.0, 5.0])


class TestCompare:
    def test_perfect_prediction_gives_zero_metrics(self, curve):
        xc = np.linspace(-6.0, 6.0, 121)
        delta_f = -1.0
        measured = 0.3 + delta_f * curve(xc)
        rep = compare(xc, measured, curve, delta_f, window=(-5.0, 5.0))
        assert rep.max_abs_dev == pytest.approx(0.0, abs=1e-14)
        assert rep.rms_dev == pytest.approx(0.0, abs=1e-14)
        assert np.allclose(rep.predicted, measured, atol=1e-14)

    def test_baseline_is_measured_at_zero(self, curve):
        xc = np.linspace(-6.0, 6.0, 121)
        measured = 0.25 - curve(xc)
        rep = compare(xc, measured, curve, -1.0, window=(-5.0, 5.0))
        # curve(0) = 0, so the baseline equals the measured value at 0
        assert rep.baseline == pytest.approx(0.25, abs=1e-12)

    def test_constant_offset_detected(self, curve):
        xc = np.linspace(-6.0, 6.0, 121)
        measured = -curve(xc)
        measured[xc > 0] += 0.02  # distort away from the prediction
        rep = compare(xc, measured, curve, -1.0, window=(-5.0, 5.0))
        assert 0.015 < rep.max_abs_dev <= 0.02 + 1e-12
        assert rep.rms_dev < rep.max_abs_dev

    def test_window_restricts_metrics(self, curve):
        xc = np.linspace(-6.0, 6.0, 121)
        measured = -curve(xc)
        measured[0] += 5.0  # corrupt a point outside the window
        rep = compare(xc, measured, curve, -1.0, window=(-5.0, 5.0))
        assert rep.max_abs_dev < 1e-12

    def test_translation_consistency(self, curve):
        xc = np.linspace(-6.0, 6.0, 121)
        rng = np.random.default_rng(3)
        measured = -curve(xc) + 0.01 * rng.standard_normal(xc.size)
        a = compare(xc, measured, curve, -1.0, window=(-5.0, 5.0))
        b = compare(xc, measured + 7.0, curve, -1.0, window=(-5.0, 5.0))
        assert b.baseline == pytest.approx(a.baseline + 7.0, abs=1e-12)
        assert np.allclose(b.predicted, a.predicted + 7.0, atol=1e-12)
        assert b.max_abs_dev == pytest.approx(a.max_abs_dev, abs=1e-14)
        assert b.rms_dev == pytest.approx(a.rms_dev, abs=1e-14)

    def test_far_field_sign(self, curve):
        # the measured far-field jump must share the sign of
        # delta_f * (curve(+) - curve(-))
        xc = np.linspace(-6.0, 6.0, 121)
        measured = -curve(xc)
        jump = measured[-1] - measured[0]
        assert jump * (-1.0) * (curve(6.0) - curve(-6.0)) > 0

    def test_grid_must_contain_zero(self, curve):
        xc = np.linspace(0.5, 6.0, 12)
        with pytest.raises(ValueError):
            compare(xc, np.zeros(12), curve, -1.0, window=(1.0, 5.0))

    def test_csv_and_metrics_files(self, curve, tmp_path):
        xc = np.linspace(-6.0, 6.0, 25)
        rep = compare(xc, -curve(xc), curve, -1.0, window=(-5.0, 5.0))
        p = tmp_path / "profile.csv"
        rep.save_csv(p)
        data = np.loadtxt(p, delimiter=",", skiprows=1)
        assert data.shape == (25, 3)
        m = tmp_path / "metrics.txt"
        rep.save_metrics(m)
        text = m.read_text()
        assert "max_abs_dev" in text and "rms_dev" in text
