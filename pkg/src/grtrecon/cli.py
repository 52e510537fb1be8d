"""Command-line pipeline: simulate | reconstruct | predict | compare | run.

Exit codes: 0 ok, 2 config error, 3 non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, recon
from .config import ConfigError, ExperimentConfig
from .dtb import combined_dtb
from .geometry import find_tangencies
from .grids import Image, Sinogram
from .sampling import synthesize_sinogram, upsample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOCONV = 3
EXIT_IO = 4


def _out(cfg: ExperimentConfig, override, name: str) -> str:
    d = override if override else cfg.output_dir
    os.makedirs(d, exist_ok=True)
    return os.path.join(d, name)


def cmd_simulate(cfg: ExperimentConfig, out_dir=None) -> str:
    grid = cfg.coarse_grid()
    sino = synthesize_sinogram(cfg.model(), cfg.phantom(), grid)
    path = _out(cfg, out_dir, "sinogram.grt")
    sino.save(path)
    print(f"simulate: {grid.n_alpha} x {grid.n_p} sinogram, "
          f"eps = {grid.epsilon:.6f}, mu = {grid.mu:.6f} -> {path}")
    return path


def cmd_reconstruct(cfg: ExperimentConfig, sino_path, out_dir=None):
    coarse = Sinogram.load(sino_path)
    expected = cfg.coarse_grid()
    got = coarse.grid
    if (got.n_alpha, got.n_p) != (expected.n_alpha, expected.n_p) or \
            not np.allclose([got.alpha0, got.d_alpha, got.p0, got.d_p],
                            [expected.alpha0, expected.d_alpha,
                             expected.p0, expected.d_p]):
        raise ConfigError(f"sinogram grid in {sino_path} does not match the "
                          "configured coarse grid")
    dense = upsample(coarse, cfg.kernel("alpha"), cfg.kernel("p"),
                     cfg.dense_grid())
    img, log, converged = recon.solve(cfg.model(), dense, cfg.image_grid(),
                                      cfg.solver_config())
    img_path = _out(cfg, out_dir, "reconstruction.grt")
    img.save(img_path)
    recon.save_iteration_log(log, _out(cfg, out_dir, "iterations.csv"))
    status = "converged" if converged else "NOT converged"
    print(f"reconstruct: {len(log)} iterations, {status} -> {img_path}")
    return img_path, converged


def _predict_curve(cfg: ExperimentConfig):
    fan = find_tangencies(cfg.model(), cfg.phantom(), cfg.x0())
    if not fan:
        raise ConfigError("no tangent data point found at x0: the boundary "
                          "point is invisible in the data")
    return fan, combined_dtb(fan, cfg.dtb_config())


def cmd_predict(cfg: ExperimentConfig, out_dir=None) -> str:
    fan, curve = _predict_curve(cfg)
    path = _out(cfg, out_dir, "dtb_curve.csv")
    curve.save_csv(path)
    meta_path = _out(cfg, out_dir, "tangencies.csv")
    with open(meta_path, "w") as f:
        f.write("alpha_l,p_l,nu_l,grad_norm,dalpha_phi\n")
        for t in fan:
            f.write(f"{t.alpha_l:.17g},{t.p_l:.17g},{t.nu_l:.17g},"
                    f"{t.grad_norm:.17g},{t.dalpha:.17g}\n")
    for t in fan:
        print(f"predict: tangency alpha = {t.alpha_l:.6f}, p = {t.p_l:.6f}, "
              f"nu = {t.nu_l:.6f}")
    print(f"predict: curve -> {path}")
    return path


def cmd_compare(cfg: ExperimentConfig, image_path, out_dir=None,
                plot: bool = False):
    img = Image.load(image_path)
    ig = cfg.image_grid()
    if (img.grid.n_x, img.grid.n_y) != (ig.n_x, ig.n_y) or \
            not np.allclose([img.grid.x_min, img.grid.x_max],
                            [ig.x_min, ig.x_max]):
        raise ConfigError(f"image grid in {image_path} does not match the "
                          "configured image grid")
    _, curve = _predict_curve(cfg)
    eps = cfg.coarse_grid().epsilon
    x_check = cfg.x_check_grid()
    measured = analysis.extract_profile(img, cfg.x0(), cfg.theta0(), eps,
                                        x_check)
    report = analysis.compare(x_check, measured, curve, cfg.phantom().jump,
                              (cfg.compare_window_lo, cfg.compare_window_hi))
    report.save_csv(_out(cfg, out_dir, "profile.csv"))
    report.save_metrics(_out(cfg, out_dir, "metrics.txt"))
    print("compare: " + report.summary())
    if plot:
        _render_plots(cfg, img, report, out_dir)
    return report


def _render_plots(cfg: ExperimentConfig, img: Image, report, out_dir) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(report.x_check, report.measured, "g-", label="reconstruction")
    ax.plot(report.x_check, report.predicted, "b--", label="predicted")
    ax.set_xlabel("signed distance from x0 (units of eps)")
    ax.set_ylabel("value")
    ax.legend()
    fig.tight_layout()
    fig.savefig(_out(cfg, out_dir, "profile.png"), dpi=150)
    plt.close(fig)

    g = img.grid
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(img.values.T, origin="lower",
              extent=[g.x_min, g.x_max, g.y_min, g.y_max])
    ax.set_title("reconstruction")
    fig.tight_layout()
    fig.savefig(_out(cfg, out_dir, "reconstruction.png"), dpi=150)
    plt.close(fig)


def cmd_run(cfg: ExperimentConfig, out_dir=None, plot: bool = False) -> bool:
    sino_path = cmd_simulate(cfg, out_dir)
    cmd_predict(cfg, out_dir)
    img_path, converged = cmd_reconstruct(cfg, sino_path, out_dir)
    cmd_compare(cfg, img_path, out_dir, plot=plot)
    cfg.write(_out(cfg, out_dir, "effective_config.cfg"))
    return converged


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="grtrecon",
        description="GRT data synthesis, regularized reconstruction, and "
                    "edge-transition prediction")
    parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="numba thread count")
    parser.add_argument("--plot", action="store_true",
                        help="render PNG plots alongside the CSV outputs")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate")
    p_rec = sub.add_parser("reconstruct")
    p_rec.add_argument("sinogram", help="sinogram file from 'simulate'")
    sub.add_parser("predict")
    p_cmp = sub.add_parser("compare")
    p_cmp.add_argument("image", help="image file from 'reconstruct'")
    sub.add_parser("run")

    args = parser.parse_args(argv)
    if args.threads:
        import numba
        numba.set_num_threads(args.threads)

    try:
        cfg = ExperimentConfig.from_file(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "simulate":
            cmd_simulate(cfg, args.out)
        elif args.command == "reconstruct":
            _, converged = cmd_reconstruct(cfg, args.sinogram, args.out)
            if not converged:
                return EXIT_NOCONV
        elif args.command == "predict":
            cmd_predict(cfg, args.out)
        elif args.command == "compare":
            cmd_compare(cfg, args.image, args.out, plot=args.plot)
        elif args.command == "run":
            if not cmd_run(cfg, args.out, plot=args.plot):
                return EXIT_NOCONV
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
