import numpy as np
import pytest

from grtrecon import ConfigError, ExperimentConfig, Image, Sinogram
from grtrecon.cli import main


def write_cfg(path, **overrides):
    """Write a deliberately tiny configuration that runs in seconds."""
    base = {
        "model.kind": "circular",
        "model.scan_radius": 10.0,
        "phantom.center_x": 1.0,
        "phantom.center_y": 1.0,
        "phantom.radius": 2.0,
        "coarse.n_alpha": 30,
        "coarse.n_p": 41,
        "dense.n_alpha": 60,
        "dense.n_p": 81,
        "image.n": 65,
        "image.half_extent": 3.7,
        "solver.max_iters": 40,
        "dtb.r_min": -6.0,
        "dtb.r_max": 6.0,
        "dtb.r_step": 0.25,
        "compare.window_lo": -3.0,
        "compare.window_hi": 3.0,
        "output.dir": str(path.parent / "out"),
    }
    base.update(overrides)
    with open(path, "w") as f:
        for k, v in base.items():
            f.write(f"{k} = {v}\n")
    return str(path)


class TestConfigFile:
    def test_roundtrip(self, tmp_path):
        p = write_cfg(tmp_path / "a.cfg")
        cfg = ExperimentConfig.from_file(p)
        out = tmp_path / "b.cfg"
        cfg.write(out)
        again = ExperimentConfig.from_file(out)
        assert again == cfg

    def test_unknown_key_reports_line(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("model.kind = circular\nnot.a.key = 3\n")
        with pytest.raises(ConfigError, match="not.a.key"):
            ExperimentConfig.from_file(p)

    def test_bad_model_kind(self, tmp_path):
        p = write_cfg(tmp_path / "a.cfg", **{"model.kind": "spiral"})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(p)

    def test_phantom_must_fit_image(self, tmp_path):
        p = write_cfg(tmp_path / "a.cfg", **{"phantom.radius": 4.0})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(p)

    def test_derived_grids(self, tmp_path):
        cfg = ExperimentConfig.from_file(write_cfg(tmp_path / "a.cfg"))
        g = cfg.coarse_grid()
        assert g.n_alpha == 30 and g.n_p == 41
        lo = 10.0 - 3.7 * np.sqrt(2)
        hi = 10.0 + 3.7 * np.sqrt(2)
        assert g.p0 == pytest.approx(lo)
        assert g.p0 + g.d_p * (g.n_p - 1) == pytest.approx(hi)
        assert cfg.dtb_config().mu == pytest.approx(g.d_alpha / g.d_p)

    def test_radon_p_range_is_symmetric(self, tmp_path):
        cfg = ExperimentConfig.from_file(
            write_cfg(tmp_path / "a.cfg", **{"model.kind": "classical-radon"}))
        lo, hi = cfg.p_range()
        assert lo == pytest.approx(-3.7 * np.sqrt(2))
        assert hi == -lo


class TestCommands:
    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["--config", str(tmp_path / "nope.cfg"), "simulate"])
        assert rc == 4

    def test_config_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.cfg"
        p.write_text("bogus.key = 1\n")
        rc = main(["--config", str(p), "simulate"])
        assert rc == 2
        assert "bogus.key" in capsys.readouterr().err

    def test_simulate_prints_steps(self, tmp_path, capsys):
        p = write_cfg(tmp_path / "a.cfg")
        assert main(["--config", p, "simulate"]) == 0
        out = capsys.readouterr().out
        assert "eps" in out and "mu" in out
        s = Sinogram.load(tmp_path / "out" / "sinogram.grt")
        assert s.values.shape == (30, 41)

    def test_simulate_deterministic(self, tmp_path):
        p = write_cfg(tmp_path / "a.cfg")
        main(["--config", p, "--out", str(tmp_path / "o1"), "simulate"])
        main(["--config", p, "--out", str(tmp_path / "o2"), "simulate"])
        a = (tmp_path / "o1" / "sinogram.grt").read_bytes()
        b = (tmp_path / "o2" / "sinogram.grt").read_bytes()
        assert a == b

    def test_reconstruct_grid_mismatch(self, tmp_path, capsys):
        p = write_cfg(tmp_path / "a.cfg")
        main(["--config", p, "simulate"])
        p2 = write_cfg(tmp_path / "b.cfg", **{"coarse.n_p": 31})
        rc = main(["--config", p2, "reconstruct",
                   str(tmp_path / "out" / "sinogram.grt")])
        assert rc == 2

    def test_reconstruct_max_iters_zero(self, tmp_path):
        p = write_cfg(tmp_path / "a.cfg", **{"solver.max_iters": 0})
        main(["--config", p, "simulate"])
        rc = main(["--config", p, "reconstruct",
                   str(tmp_path / "out" / "sinogram.grt")])
        assert rc == 3  # cannot converge without iterating
        img = Image.load(tmp_path / "out" / "reconstruction.grt")
        assert np.all(img.values == 0.0)

    def test_predict_outputs(self, tmp_path):
        p = write_cfg(tmp_path / "a.cfg")
        assert main(["--config", p, "predict"]) == 0
        curve = np.loadtxt(tmp_path / "out" / "dtb_curve.csv",
                           delimiter=",", skiprows=1)
        assert curve.shape[0] == 49  # -6..6 step 0.25
        tang = np.loadtxt(tmp_path / "out" / "tangencies.csv",
                          delimiter=",", skiprows=1)
        assert tang.shape == (2, 5)
        nus = tang[:, 2]
        assert nus.sum() == pytest.approx(2.0, abs=1e-9)

    def test_full_run_pipeline(self, tmp_path, capsys):
        p = write_cfg(tmp_path / "a.cfg", **{"solver.max_iters": 400})
        rc = main(["--config", p, "--out", str(tmp_path / "run"), "run"])
        out = capsys.readouterr().out
        assert rc in (0, 3)
        for name in ("sinogram.grt", "dtb_curve.csv", "tangencies.csv",
                     "reconstruction.grt", "iterations.csv", "profile.csv",
                     "metrics.txt", "effective_config.cfg"):
            assert (tmp_path / "run" / name).exists(), name
        assert "compare:" in out
        # the effective config reloads to the same settings
        cfg = ExperimentConfig.from_file(p)
        eff = ExperimentConfig.from_file(tmp_path / "run" /
                                         "effective_config.cfg")
        assert eff == cfg
        # iteration log is monotone in cost
        log = np.loadtxt(tmp_path / "run" / "iterations.csv",
                         delimiter=",", skiprows=1)
        assert np.all(np.diff(log[:, 1]) <= 0)
