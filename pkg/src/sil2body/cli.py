"""Batch command line: ``sil2body <command> [flags]``.

Every command writes ``<command>.manifest.json`` into its output directory,
holding the resolved configuration, the SHA-256 of every input file, the seed
and the list of outputs. A JSON ``--config`` file supplies defaults that
explicit flags override. ``S2S_THREADS`` and ``S2S_OUTPUT_DIR`` stand in for
``--threads`` and ``--out``.

Exit status: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from ._container import sha256_file
from .augment import CoeffDataset, load_coeffs, refine, write_coeffs
from .body_factory import DEFAULT_RANGES, feature_curves, load_population, sample_population, save_population
from .errors import NumericalError, Sil2BodyError
from .mesh import Mesh, save_obj
from .metrics import girth, summarize, vertex_errors, write_report
from .network import FusionNet, NetworkConfig, load_model, save_model
from .pipeline import RENDER_HEIGHT, build_training_set, sample_seed, space_from_population
from .shape_space import decode, decode_vertices, load_space, save_space, sidecar_path
from .silhouette import (CONTOUR_POINT_COUNTS, DEFAULT_M, JITTER_STD, VIEWS, Camera, extract_contour,
                         load_contours, place_on_floor, render_silhouette, resample_contour, save_contours)
from .trainer import TrainConfig, TrainingSet, mean_vertex_error, split_dataset, train, transfer

log = logging.getLogger("sil2body")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
ENV_THREADS = "S2S_THREADS"
ENV_OUTPUT = "S2S_OUTPUT_DIR"


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(ENV_OUTPUT) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(args) -> int | None:
    value = args.threads if args.threads is not None else os.environ.get(ENV_THREADS)
    if value in (None, ""):
        return None
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"thread count must be an integer, got {value!r}") from None
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _input_record(paths: dict) -> dict:
    rec = {}
    for name, p in paths.items():
        if p is None:
            continue
        p = Path(p)
        rec[name] = {"path": str(p), "sha256": sha256_file(p)}
        sc = sidecar_path(p)
        if sc.exists() and p.suffix == ".bin" and name == "space":
            rec[name + "_sidecar"] = {"path": str(sc), "sha256": sha256_file(sc)}
    return rec


def _write_manifest(out: Path, args, inputs: dict, outputs: list, extra: dict | None = None) -> Path:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out", "threads", "verbose")}
    doc = {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": config,
        "inputs": _input_record(inputs),
        "outputs": sorted(str(Path(o).relative_to(out)) if Path(o).is_relative_to(out) else str(o)
                          for o in outputs),
        **(extra or {}),
    }
    path = out / f"{args.command}.manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _load_views(front_path, side_path) -> tuple[list, list]:
    front, side = load_contours(front_path), load_contours(side_path)
    if len(front) != len(side):
        raise Sil2BodyError(f"{len(front)} front contours but {len(side)} side contours")
    if front and (front[0].view, side[0].view) != VIEWS:
        raise Sil2BodyError("front/side contour files are swapped or mislabelled")
    return front, side


def _training_set(args) -> tuple:
    space = load_space(args.space)
    coeffs = load_coeffs(args.coeffs).samples
    front, side = _load_views(args.front, args.side)
    if len(front) != len(coeffs):
        raise Sil2BodyError(f"{len(coeffs)} coefficient vectors but {len(front)} contour pairs")
    if coeffs.shape[1] != space.k:
        raise Sil2BodyError(f"coefficients have k={coeffs.shape[1]}, space has k={space.k}")
    return space, TrainingSet.from_contours(front, side, coeffs)


def _train_config(args, **over) -> TrainConfig:
    return TrainConfig(epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.lr,
                       seed=args.seed, split_ratio=args.split, val_every=args.val_every,
                       checkpoint_every=args.checkpoint_every, **over)


def _evaluate(model, space, data: TrainingSet, height_m: float):
    """Per-sample vertex errors and girth errors, in meters for a body of ``height_m``."""
    pred = model.predict(data.front, data.side)
    truth_v = decode_vertices(space, data.coeffs)
    pred_v = decode_vertices(space, pred)
    emax, eav = vertex_errors(truth_v, pred_v)
    girths = {}
    try:
        curves = feature_curves(space.template)
    except (Sil2BodyError, IndexError, ValueError):
        curves = {}
        log.info("template is not a generated body; girths skipped")
    for name, curve in curves.items():
        girths[name] = [height_m * (girth(Mesh(p, space.triangles), curve) - girth(Mesh(t, space.triangles), curve))
                        for p, t in zip(pred_v, truth_v)]
    return summarize(emax * height_m, eav * height_m, girths), pred


# -- commands ----------------------------------------------------------------

def cmd_gen_bodies(args) -> dict:
    out = _out_dir(args)
    ranges = dict(DEFAULT_RANGES)
    for item in args.range or []:
        try:
            name, span = item.split("=")
            lo, hi = (float(v) for v in span.split(","))
        except ValueError:
            raise UsageError(f"--range expects name=lo,hi, got {item!r}") from None
        if name not in ranges:
            raise UsageError(f"unknown range {name!r}; choose from {sorted(ranges)}")
        ranges[name] = (lo, hi)
    pop = sample_population(args.n, ranges, args.seed)
    manifest = save_population(pop, out)
    outputs = [manifest] + [out / f"body_{i:05d}.obj" for i in range(len(pop.meshes))]
    return {"out": out, "inputs": {}, "outputs": outputs}


def cmd_fit_space(args) -> dict:
    _require(args, "bodies")
    out = _out_dir(args)
    src = Path(args.bodies)
    if src.is_dir():
        src = src / "population.json"
    pop = load_population(src)
    space, coeffs = space_from_population(pop.meshes, args.variance)
    space.provenance["population_sha256"] = sha256_file(src)
    save_space(space, out / "space.bin")
    write_coeffs(CoeffDataset(coeffs), out / "coeffs.bin")
    log.info("k=%d capturing %.4f of the variance", space.k, space.variance_captured)
    return {"out": out, "inputs": {"bodies": src},
            "outputs": [out / "space.bin", sidecar_path(out / "space.bin"), out / "coeffs.bin"],
            "extra": {"k": space.k, "variance_captured": space.variance_captured}}


def cmd_augment(args) -> dict:
    _require(args, "coeffs")
    out = _out_dir(args)
    ds = load_coeffs(args.coeffs)
    history: list = []
    grown = refine(ds, args.factor, args.inserts, args.iterations, args.neighbors, history, args.rmin_policy)
    path = out / ("coeffs_aug.jsonl" if args.format == "jsonl" else "coeffs_aug.bin")
    write_coeffs(grown, path)
    log.info("augmented %d -> %d samples (%s per iteration)", len(ds), len(grown), history)
    return {"out": out, "inputs": {"coeffs": args.coeffs}, "outputs": [path],
            "extra": {"n_in": len(ds), "n_out": len(grown), "inserted_per_iteration": history}}


def cmd_render_sample(args) -> dict:
    _require(args, "space", "coeffs")
    out = _out_dir(args)
    space = load_space(args.space)
    coeffs = load_coeffs(args.coeffs).samples
    if coeffs.shape[1] != space.k:
        raise Sil2BodyError(f"coefficients have k={coeffs.shape[1]}, space has k={space.k}")
    data_front, data_side = [], []
    outputs = []
    for i, phi in enumerate(coeffs):
        body = place_on_floor(decode(space, phi), args.height)
        rng = np.random.default_rng(sample_seed(args.seed, i))
        views = []
        for view in VIEWS:
            cam = Camera(view=view, jitter_std=args.jitter)
            img = render_silhouette(body, cam, offset=cam.draw_offset(rng))
            views.append(resample_contour(extract_contour(img), args.M, view=view))
            if i < args.images:
                p = out / f"sil_{i:05d}_{view}.pbm"
                img.save_pbm(p)
                outputs.append(p)
        data_front.append(views[0])
        data_side.append(views[1])
        if i < args.images:
            from .plotting import plot_contours
            outputs.append(plot_contours(views[0], views[1], out / f"contours_{i:05d}.png"))
    save_contours(data_front, out / "front.cntr")
    save_contours(data_side, out / "side.cntr")
    outputs += [out / "front.cntr", out / "side.cntr"]
    return {"out": out, "inputs": {"space": args.space, "coeffs": args.coeffs}, "outputs": outputs,
            "extra": {"n": len(coeffs), "M": args.M}}


def cmd_train(args) -> dict:
    _require(args, "space", "coeffs", "front", "side")
    from .plotting import plot_training_curve

    out = _out_dir(args)
    space, data = _training_set(args)
    cfg = _train_config(args, checkpoint_dir=str(out / "checkpoints") if args.checkpoint_every else None)
    tr, va = split_dataset(data, cfg.split_ratio, cfg.seed)
    net = NetworkConfig(M=data.front.shape[2] - 2, k=space.k, fusion=not args.no_fusion,
                        whole_map_pooling=args.whole_map_pooling, seed=args.seed)
    model, hist = train(FusionNet(net), tr, cfg, space=space, val=va)
    save_model(model, out / "model.bin")
    (out / "history.json").write_text(json.dumps(hist.to_dict(), indent=2) + "\n")
    outputs = [out / "model.bin", out / "history.json", plot_training_curve(hist, out / "training_curve.png")]
    if cfg.checkpoint_every:
        outputs += sorted((out / "checkpoints").glob("*.bin"))
    extra = {"train_config": asdict(cfg), "network": asdict(net), "param_count": model.param_count(),
             "final_train_loss": hist.train_loss[-1] if hist.train_loss else None,
             "final_train_e_aver": hist.train_e_aver[-1] if hist.train_e_aver else None,
             "final_val_e_aver": hist.val_e_aver[-1] if hist.val_e_aver else None}
    return {"out": out, "inputs": {"space": args.space, "coeffs": args.coeffs, "front": args.front,
                                   "side": args.side}, "outputs": outputs, "extra": extra}


def cmd_transfer(args) -> dict:
    _require(args, "model", "space", "coeffs", "front", "side")
    from .plotting import plot_training_curve

    out = _out_dir(args)
    space, data = _training_set(args)
    base = load_model(args.model)
    cfg = _train_config(args)
    tr, va = split_dataset(data, cfg.split_ratio, cfg.seed)
    check = va if va is not None else tr
    before = mean_vertex_error(space, base.predict(check.front, check.side), check.coeffs)[0]
    model, hist = transfer(base, tr, cfg, space=space, val=va)
    after = mean_vertex_error(space, model.predict(check.front, check.side), check.coeffs)[0]
    save_model(model, out / "model_transfer.bin")
    (out / "history.json").write_text(json.dumps(hist.to_dict(), indent=2) + "\n")
    outputs = [out / "model_transfer.bin", out / "history.json",
               plot_training_curve(hist, out / "training_curve.png")]
    log.info("E_aver %.5f -> %.5f", before, after)
    return {"out": out, "inputs": {"model": args.model, "space": args.space, "coeffs": args.coeffs,
                                   "front": args.front, "side": args.side},
            "outputs": outputs, "extra": {"e_aver_before": before, "e_aver_after": after,
                                          "evaluated_on": "validation" if va is not None else "training"}}


def cmd_infer(args) -> dict:
    _require(args, "model", "space", "front", "side")
    out = _out_dir(args)
    model = load_model(args.model)
    space = load_space(args.space)
    if model.config.k != space.k:
        raise Sil2BodyError(f"model predicts k={model.config.k}, space has k={space.k}")
    front, side = _load_views(args.front, args.side)
    idx = range(len(front)) if args.index is None else [args.index]
    if args.index is not None and not 0 <= args.index < len(front):
        raise Sil2BodyError(f"--index {args.index} out of range for {len(front)} samples")
    F = np.stack([front[i].as_input() for i in idx])
    S = np.stack([side[i].as_input() for i in idx])
    pred = model.predict(F, S)
    if not np.isfinite(pred).all():
        raise NumericalError("network produced non-finite coefficients")
    outputs = []
    for i, phi in zip(idx, pred):
        mesh = decode(space, phi)
        p = out / f"pred_{i:05d}.obj"
        save_obj(mesh.with_vertices(mesh.vertices * args.height), p)
        outputs.append(p)
    (out / "coeffs.json").write_text(json.dumps({"index": list(idx), "coeffs": pred.tolist()}, indent=2) + "\n")
    outputs.append(out / "coeffs.json")
    return {"out": out, "inputs": {"model": args.model, "space": args.space, "front": args.front,
                                   "side": args.side}, "outputs": outputs}


def cmd_evaluate(args) -> dict:
    _require(args, "model", "space", "coeffs", "front", "side")
    from .plotting import plot_error_distributions

    out = _out_dir(args)
    space, data = _training_set(args)
    model = load_model(args.model)
    summary, _ = _evaluate(model, space, data, args.height)
    paths = write_report(summary, out, unit_scale=100.0, unit="cm")
    paths.update(plot_error_distributions(summary, out, unit_scale=100.0, unit="cm"))
    log.info("mean E_aver %.3f cm, mean E_max %.3f cm", 100 * summary.mean_e_aver, 100 * summary.mean_e_max)
    return {"out": out, "inputs": {"model": args.model, "space": args.space, "coeffs": args.coeffs,
                                   "front": args.front, "side": args.side},
            "outputs": list(paths.values()), "extra": {"summary_cm": summary.to_dict(100.0)}}


def cmd_sweep(args) -> dict:
    from .plotting import plot_sweep

    out = _out_dir(args)
    try:
        Ms = [int(m) for m in str(args.m).split(",") if m.strip()]
    except ValueError:
        raise UsageError(f"--m expects a comma-separated list of integers, got {args.m!r}") from None
    space = coeffs = None
    if args.space or args.coeffs:
        _require(args, "space", "coeffs")
        space = load_space(args.space)
        coeffs = load_coeffs(args.coeffs).samples
    k = space.k if space is not None else args.k
    rows = []
    for M in Ms:
        row = {"M": M, "param_count": FusionNet(NetworkConfig(M=M, k=k, seed=args.seed)).param_count()}
        if space is not None and args.epochs > 0:
            data = build_training_set(space, coeffs, M, args.seed, RENDER_HEIGHT,
                                      args.jitter)
            cfg = _train_config(args)
            tr, va = split_dataset(data, cfg.split_ratio, cfg.seed)
            model, _ = train(FusionNet(NetworkConfig(M=M, k=k, seed=args.seed)), tr, cfg, space=space)
            test = va if va is not None else tr
            summary, _ = _evaluate(model, space, test, args.height)
            row["e_aver_cm"] = 100 * summary.mean_e_aver
            row["e_max_cm"] = 100 * summary.mean_e_max
        rows.append(row)
        log.info("M=%d: %s", M, row)
    keys = ["M", "param_count"] + (["e_aver_cm", "e_max_cm"] if len(rows[0]) > 2 else [])
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, keys)
        w.writeheader()
        w.writerows(rows)
    (out / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n")
    outputs = [out / "sweep.csv", out / "sweep.json", plot_sweep(rows, out / "sweep.png")]
    return {"out": out, "inputs": {"space": args.space, "coeffs": args.coeffs}, "outputs": outputs,
            "extra": {"rows": rows}}


# -- parser ------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    g.add_argument("--out", help=f"output directory (env {ENV_OUTPUT}; default: current directory)")
    g.add_argument("--seed", type=int, default=0, help="random seed recorded in the manifest (default 0)")
    g.add_argument("--threads", type=int, help=f"BLAS/OpenMP thread limit (env {ENV_THREADS})")
    g.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return p


def _training_flags(p, epochs=500, lr=1e-5, split=0.8):
    g = p.add_argument_group("training")
    g.add_argument("--epochs", type=int, default=epochs, help=f"training epochs (default {epochs})")
    g.add_argument("--batch-size", type=int, default=128, help="mini-batch size (default 128)")
    g.add_argument("--lr", type=float, default=lr, help=f"Adam learning rate (default {lr:g})")
    g.add_argument("--split", type=float, default=split,
                   help=f"training fraction of the samples; 1 trains on all (default {split})")
    g.add_argument("--val-every", type=int, default=10, help="validation cadence in epochs (default 10)")
    g.add_argument("--checkpoint-every", type=int, default=0, help="save a checkpoint every N epochs (0: off)")


def _data_flags(p, coeffs=True, views=True):
    p.add_argument("--space", help="shape-space container (space.bin)")
    if coeffs:
        p.add_argument("--coeffs", help="coefficient container (.bin or .jsonl)")
    if views:
        p.add_argument("--front", help="front-view contour container (front.cntr)")
        p.add_argument("--side", help="side-view contour container (side.cntr)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = _common()
    parser = argparse.ArgumentParser(prog="sil2body", description="Silhouette-based 3D body reconstruction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    subs = {}

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("gen-bodies", cmd_gen_bodies, "Generate a synthetic body population (OBJ files + population.json).")
    p.add_argument("--n", type=int, default=100, help="number of bodies (default 100)")
    p.add_argument("--range", action="append", metavar="NAME=LO,HI",
                   help=f"override a parameter range; names: {', '.join(DEFAULT_RANGES)}")

    p = add("fit-space", cmd_fit_space, "Fit the PCA shape space and encode the population.")
    p.add_argument("--bodies", help="population directory or its population.json")
    p.add_argument("--variance", type=float, default=0.97, help="variance fraction to keep (default 0.97)")

    p = add("augment", cmd_augment, "Refinement augmentation of a coefficient dataset.")
    p.add_argument("--coeffs", help="input coefficient container")
    p.add_argument("--factor", type=float, default=1.8, help="threshold as a multiple of r_min (default 1.8)")
    p.add_argument("--inserts", type=int, default=1, help="points inserted per eligible pair (default 1)")
    p.add_argument("--iterations", type=int, default=2, help="refinement passes (default 2)")
    p.add_argument("--neighbors", type=int, default=11, help="K for the neighbouring radius (default 11)")
    p.add_argument("--rmin-policy", choices=("initial", "per_iteration"), default="initial",
                   help="measure r_min once on the input or at every pass (default initial)")
    p.add_argument("--format", choices=("bin", "jsonl"), default="bin", help="output container (default bin)")

    p = add("render-sample", cmd_render_sample, "Render silhouettes and sample front/side contours.")
    _data_flags(p, views=False)
    p.add_argument("--M", type=int, default=DEFAULT_M, help=f"contour points (default {DEFAULT_M})")
    p.add_argument("--height", type=float, default=RENDER_HEIGHT,
                   help=f"rendered body height in meters (default {RENDER_HEIGHT})")
    p.add_argument("--jitter", type=float, default=JITTER_STD,
                   help=f"camera position std-dev in meters (default {JITTER_STD})")
    p.add_argument("--images", type=int, default=0, help="also write PBM silhouettes and a PNG for the first N")

    p = add("train", cmd_train, "Train the fusion network on rendered contours.")
    _data_flags(p)
    _training_flags(p)
    p.add_argument("--no-fusion", action="store_true", help="ablation: drop the fusion pipeline")
    p.add_argument("--whole-map-pooling", action="store_true", help="max-pool each final feature map to one value")

    p = add("transfer", cmd_transfer, "Retrain only the FC head of a trained model on new data.")
    p.add_argument("--model", help="base model checkpoint")
    _data_flags(p)
    _training_flags(p, epochs=100)

    p = add("infer", cmd_infer, "Predict body meshes from contour pairs.")
    p.add_argument("--model", help="model checkpoint")
    _data_flags(p, coeffs=False)
    p.add_argument("--index", type=int, help="predict only this sample (default: all)")
    p.add_argument("--height", type=float, default=1.0, help="scale output meshes to this height (default 1)")

    p = add("evaluate", cmd_evaluate, "Vertex and girth errors of a model, with CSV/JSON/PNG reports.")
    p.add_argument("--model", help="model checkpoint")
    _data_flags(p)
    p.add_argument("--height", type=float, default=RENDER_HEIGHT,
                   help=f"body height in meters used to report errors (default {RENDER_HEIGHT})")

    p = add("sweep-contour-points", cmd_sweep, "Parameter count (and optionally accuracy) against M.")
    p.add_argument("--m", default=",".join(map(str, CONTOUR_POINT_COUNTS)),
                   help="comma-separated contour point counts (default 324,486,648,972)")
    p.add_argument("--k", type=int, default=22, help="output size when no space is given (default 22)")
    p.add_argument("--space", help="shape space; with --coeffs and --epochs > 0 each M is trained and evaluated")
    p.add_argument("--coeffs", help="coefficients to render, train and evaluate on")
    p.add_argument("--height", type=float, default=RENDER_HEIGHT, help="height for reported errors")
    p.add_argument("--jitter", type=float, default=JITTER_STD, help="camera jitter std-dev in meters")
    _training_flags(p, epochs=0)
    return parser, subs


def _apply_config(parser, subs, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        cfg.pop("command", None)
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser, subs = build_parser()
    try:
        args = _apply_config(parser, subs, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"sil2body: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        n_threads = _threads(args)
        if n_threads is None:
            result = args.func(args)
        else:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=n_threads):
                result = args.func(args)
        _write_manifest(result["out"], args, result["inputs"], result["outputs"], result.get("extra"))
    except UsageError as exc:
        print(f"sil2body: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError) as exc:
        print(f"sil2body: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (Sil2BodyError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"sil2body: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
