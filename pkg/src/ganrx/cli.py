"""Command-line interface: synth / train / detect / eval / run / gradcheck.

Exit codes are a stable contract: 0 success, 1 runtime or data error
(missing files, numeric failures, bad file contents), 2 usage error (bad
flags or config). Every command is deterministic given explicit seeds;
whenever a seed is drawn instead, it is printed.
"""

import argparse
import os
import secrets
import sys

from . import gan, plots
from .config import (DEFAULT_METHODS, _parse_float_list, _parse_str_list,
                     build_config)
from .detect import (ae_detect, gan_rx_detect, rx_detect, save_score_map,
                     wrx_detect)
from .errors import GanrxError, UsageError
from .evaluation import multi_run, roc_curve, save_report, save_roc
from .hsi import load_cube, load_mask, normalize_cube, save_cube, save_mask
from .nn import load_network, run_gradchecks, save_network
from .synth import SceneSpec, build_scene


def _drawn_seed() -> int:
    seed = secrets.randbits(31)
    print(f"seed={seed} (drawn)")
    return seed


def _require_positive(cfg):
    for key in ("width", "height", "bands", "endmembers", "block"):
        if getattr(cfg, key) < 1:
            raise UsageError(f"--{key.replace('_', '-')} must be >= 1")
    if cfg.noise_sigma < 0:
        raise UsageError("--noise-sigma must be >= 0")


def _scene_from(cfg) -> SceneSpec:
    _require_positive(cfg)
    return SceneSpec(width=cfg.width, height=cfg.height, bands=cfg.bands,
                     endmembers=cfg.endmembers, noise_sigma=cfg.noise_sigma,
                     seed=cfg.scene_seed)


def _hyper_from(cfg, seed: int) -> gan.GanHyper:
    return gan.GanHyper(alpha=cfg.alpha, lr=cfg.lr, beta1=cfg.beta1,
                        beta2=cfg.beta2, batch_size=cfg.batch_size,
                        epochs=cfg.epochs, seed=seed)


def cmd_synth(args) -> int:
    cfg = build_config(args.config, {
        "width": args.width, "height": args.height, "bands": args.bands,
        "endmembers": args.endmembers, "noise_sigma": args.noise_sigma,
        "scene_seed": args.seed, "block": args.block,
        "abundances": args.abundances,
    })
    cube, mask = build_scene(_scene_from(cfg), cfg.block, cfg.abundances)
    cube_path = args.out + ".hsc"
    mask_path = args.out + "_mask.pgm"
    save_cube(cube, cube_path)
    save_mask(mask, mask_path)
    print(f"wrote {cube_path} ({cube.width}x{cube.height}x{cube.bands})")
    print(f"wrote {mask_path}")
    print(f"anomaly_pixels={mask.anomaly_count}")
    return 0


def cmd_train(args) -> int:
    cfg = build_config(args.config, {
        "alpha": args.alpha, "batch_size": args.batch_size,
        "epochs": args.epochs, "train_seed": args.seed,
    })
    seed = cfg.train_seed if cfg.train_seed is not None else _drawn_seed()
    cube = load_cube(args.cube)
    ncube, _ = normalize_cube(cube)
    hyper = _hyper_from(cfg, seed)
    if args.ae:
        generator, history = gan.train_autoencoder(ncube, hyper)
    else:
        generator, _, history = gan.train(ncube, hyper)
    metrics_path = args.metrics_out
    if metrics_path is None:
        base, _ = os.path.splitext(args.model_out)
        metrics_path = base + "_metrics.csv"
    save_network(generator, args.model_out)
    gan.save_metrics(history, metrics_path)
    final = history[-1]
    print(f"wrote {args.model_out}")
    print(f"wrote {metrics_path}")
    print(f"final_epoch={final.epoch} l1={final.l1:.6g} total={final.total:.6g}")
    return 0


def cmd_detect(args) -> int:
    cfg = build_config(args.config, {
        "ridge": args.ridge, "wrx_iterations": args.wrx_iterations,
    })
    cube = load_cube(args.cube)
    if args.method in ("ae", "gan-rx"):
        if args.model is None:
            raise UsageError(f"--model is required for method {args.method!r}")
        generator = load_network(args.model)
        if args.method == "ae":
            smap = ae_detect(cube, generator)
        else:
            smap = gan_rx_detect(cube, generator, ridge=cfg.ridge)
    elif args.method == "rx":
        smap = rx_detect(cube, ridge=cfg.ridge)
    else:  # wrx
        smap = wrx_detect(cube, iterations=cfg.wrx_iterations, ridge=cfg.ridge)
    hsc_path = args.out + ".hsc"
    pgm_path = args.out + ".pgm"
    save_score_map(smap, hsc_path, pgm_path)
    print(f"wrote {hsc_path}")
    print(f"wrote {pgm_path}")
    print(f"max_score={smap.scores.max():.6g}")
    return 0


def cmd_eval(args) -> int:
    scores = load_cube(args.scores)
    if scores.bands != 1:
        raise UsageError(
            f"--scores must be a single-band score cube, got {scores.bands} bands"
        )
    mask = load_mask(args.mask)
    if (mask.width, mask.height) != (scores.width, scores.height):
        raise UsageError(
            f"mask is {mask.width}x{mask.height} but scores are "
            f"{scores.width}x{scores.height}"
        )
    curve = roc_curve(scores.data[0].reshape(-1), mask.labels.reshape(-1))
    if args.roc_out:
        save_roc(curve, args.roc_out)
        print(f"wrote {args.roc_out}")
    print(f"auc={curve.auc:.6f}")
    return 0


def cmd_run(args) -> int:
    cfg = build_config(args.config, {
        "runs": args.runs, "methods": args.methods,
        "seed_base": args.seed_base, "epochs": args.epochs,
    })
    for m in cfg.methods:
        if m not in DEFAULT_METHODS:
            raise UsageError(
                f"unknown method {m!r}; valid methods: {', '.join(DEFAULT_METHODS)}"
            )
    if cfg.runs < 1:
        raise UsageError("--runs must be >= 1")
    cube, mask = build_scene(_scene_from(cfg), cfg.block, cfg.abundances)
    hyper = _hyper_from(cfg, seed=0)  # per-run seeds come from seed_base
    summaries = multi_run(cube, mask, cfg.methods, cfg.runs, hyper,
                          ridge=cfg.ridge, wrx_iterations=cfg.wrx_iterations,
                          seed_base=cfg.seed_base)
    os.makedirs(args.out_dir, exist_ok=True)
    report_path = os.path.join(args.out_dir, "report.csv")
    save_report(summaries, report_path)
    for s in summaries:
        save_roc(s.roc, os.path.join(args.out_dir, f"roc_{s.method}.csv"))
    plots.save_roc_figure(summaries, os.path.join(args.out_dir, "roc.png"))
    plots.save_auc_figure(summaries, os.path.join(args.out_dir, "auc.png"))
    for s in summaries:
        print(f"{s.method}: mean_auc={s.mean_auc:.6f} "
              f"std_auc={s.std_auc:.6f} runs={s.runs}")
    print(f"wrote {report_path}")
    return 0


def cmd_gradcheck(args) -> int:
    results = run_gradchecks(n_cases=args.cases, seed=args.seed)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed = failed or not r.passed
        print(f"{r.kind:<12} {status} max_rel_err={r.max_rel_err:.3g} "
              f"tol={r.tolerance:g} cases={r.cases}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ganrx",
        description="GAN-based hyperspectral anomaly detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene with implanted targets")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--bands", type=int)
    p.add_argument("--endmembers", type=int)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--seed", type=int, help="scene seed")
    p.add_argument("--block", type=int, help="implant block side length")
    p.add_argument("--abundances", type=_parse_float_list,
                   help="comma-separated abundance fractions")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True,
                   help="output prefix; writes <out>.hsc and <out>_mask.pgm")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the background reconstructor on a cube")
    p.add_argument("--cube", required=True, help="input HSC1 cube")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, help="training seed (drawn if omitted)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--alpha", type=float, help="reconstruction loss weight")
    p.add_argument("--ae", action="store_true",
                   help="train the reconstruction-only autoencoder baseline")
    p.add_argument("--model-out", required=True, help="output model path")
    p.add_argument("--metrics-out",
                   help="metrics CSV path (default: <model>_metrics.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="score a cube with a detector")
    p.add_argument("--method", required=True, choices=DEFAULT_METHODS)
    p.add_argument("--cube", required=True, help="input HSC1 cube")
    p.add_argument("--model", help="trained model (required for ae/gan-rx)")
    p.add_argument("--ridge", type=float, help="covariance ridge fraction")
    p.add_argument("--wrx-iterations", type=int)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True,
                   help="output prefix; writes <out>.hsc and <out>.pgm")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="ROC/AUC of a score map against a mask")
    p.add_argument("--scores", required=True, help="single-band HSC1 score cube")
    p.add_argument("--mask", required=True, help="ground-truth PGM mask")
    p.add_argument("--roc-out", help="write the ROC curve CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full multi-seed benchmark with report")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--runs", type=int, help="training runs per learned method")
    p.add_argument("--methods", type=_parse_str_list,
                   help="comma-separated subset of: " + ",".join(DEFAULT_METHODS))
    p.add_argument("--seed-base", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--out-dir", default=".",
                   help="where report.csv, ROC CSVs and figures go")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gradcheck", help="finite-difference check of every layer kind")
    p.add_argument("--cases", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GanrxError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
