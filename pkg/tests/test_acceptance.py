"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are repeated in the "acceptance criteria" section of the pytest
terminal summary. Criteria 8-10 share one training fixture; together they take
roughly 25 minutes on a single desktop core.
"""
import json
import time
from contextlib import contextmanager
from functools import cached_property

import numpy as np
import pytest

from sil2body.augment import CoeffDataset, neighboring_radii, refine
from sil2body.body_factory import BodyParams, feature_curves, generate_body, sample_population
from sil2body.cli import main
from sil2body.metrics import girth
from sil2body.network import BatchNorm1d, Conv1d, FusionNet, Linear, MaxPool3, NetworkConfig, ReLU
from sil2body.pipeline import build_training_set, space_from_population
from sil2body.shape_space import decode, encode, encode_many, fit_pca, normalize_height
from sil2body.silhouette import (Camera, extract_contour, place_on_floor, render_silhouette, resample_contour,
                                 sample_views, signed_area)
from sil2body.trainer import TrainConfig, coeff_loss, mean_vertex_error, train, transfer, vertex_loss

from conftest import low_rank_meshes
from test_silhouette import box_mesh

GRAD_H = 1e-5
# denominator floor: entries with |g| < 1e-3 are held to an absolute error of 1e-7,
# well above the ~4e-9 rounding noise of a central difference on this loss
GRAD_FLOOR = 1e-3
GRAD_TOL = 1e-4

# overfit experiment (criteria 8-10)
OVERFIT_BODIES = 32
OVERFIT_SEED = 7
OVERFIT_EPOCHS = 2000
OVERFIT_CONFIG = dict(epochs=OVERFIT_EPOCHS, batch_size=32, learning_rate=1e-3, seed=0, val_every=100)
# training E_aver and epoch-2000 loss recorded for this exact configuration
PILOT_FUSION_E_AVER, PILOT_FUSION_LOSS = 5.87e-5, 3.88e-4
PILOT_ABLATED_E_AVER, PILOT_ABLATED_LOSS = 2.02e-5, 3.93e-5


def rel_err(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), GRAD_FLOOR)))


# -- 1 ---------------------------------------------------------------------------

def _layer_case(kind, rng):
    if kind == "conv_pad0":
        return Conv1d(3, 4, 0, rng, np.float64), rng.normal(size=(3, 2, 9))
    if kind == "conv_pad1":
        return Conv1d(3, 4, 1, rng, np.float64), rng.normal(size=(3, 2, 9))
    if kind in ("bn_train", "bn_eval"):
        bn = BatchNorm1d(3, np.float64)
        for key in ("gamma", "beta"):
            bn.params[key][:] = rng.normal(size=3)
        if kind == "bn_eval":
            bn.buffers["running_mean"][:] = rng.normal(size=3)
            bn.buffers["running_var"][:] = rng.uniform(0.5, 2.0, size=3)
            bn.training = False
        return bn, rng.normal(size=(3, 4, 7))
    if kind == "relu":
        x = rng.normal(size=(3, 2, 8))
        return ReLU(), x + 0.1 * np.sign(x)       # keep entries away from the kink
    if kind == "maxpool":
        return MaxPool3(), rng.permutation(54).reshape(3, 2, 9) * 0.1   # distinct values: no ties
    return Linear(6, 4, rng, np.float64), rng.normal(size=(3, 6))


def _layer_grad_error(kind, seed):
    rng = np.random.default_rng(seed)
    layer, x = _layer_case(kind, rng)
    w = rng.normal(size=layer.forward(x).shape)
    layer.cache = None

    def loss():
        out = layer.forward(x)
        layer.cache = None
        return float(np.sum(out * w))

    layer.zero_grad()
    layer.forward(x)
    worst = rel_err(layer.backward(w), _numeric(loss, x))
    for key, p in layer.params.items():
        worst = max(worst, rel_err(layer.grads[key], _numeric(loss, p)))
    return worst


def _numeric(loss, arr, idx=None):
    idx = list(np.ndindex(arr.shape)) if idx is None else idx
    g = np.zeros(len(idx))
    for n, i in enumerate(idx):
        old = arr[i]
        arr[i] = old + GRAD_H
        fp = loss()
        arr[i] = old - GRAD_H
        fm = loss()
        arr[i] = old
        g[n] = (fp - fm) / (2 * GRAD_H)
    return g if len(idx) != arr.size else g.reshape(arr.shape)


def _kink_layers(model):
    for blocks in (model.front_blocks, model.side_blocks, model.fusion_blocks):
        for block in blocks:
            yield from (layer for layer in block.layers if isinstance(layer, (ReLU, MaxPool3)))
    yield from model.fc_relus


def _same_pattern(model, pattern):
    """True when the last forward pass left the ReLU masks and max-pool winners of ``pattern``."""
    for layer, ref in zip(_kink_layers(model), pattern):
        pairs = [(layer.cache, ref)] if isinstance(layer, ReLU) else zip(layer.cache[:2], ref[:2])
        if not all(np.array_equal(x, y) for x, y in pairs):
            return False
    return True


@contextmanager
def _frozen_pattern(model, pattern):
    """Hold every ReLU mask and max-pool winner at ``pattern``.

    The network then evaluates the smooth piece that contains the base point,
    whose derivative there is exactly what backprop computes.
    """
    layers = list(_kink_layers(model))
    for layer, ref in zip(layers, pattern):
        if isinstance(layer, ReLU):
            layer.forward = lambda x, mask=ref: x * mask
        else:
            def pool(x, a=ref[0], b=ref[1]):
                win = x.reshape(x.shape[:-1] + (x.shape[-1] // 3, 3))
                return np.where(a, win[..., 0], np.where(b, win[..., 1], win[..., 2]))
            layer.forward = pool
    try:
        yield
    finally:
        for layer in layers:
            del layer.forward


def _model_grad_error(seed):
    """Reference config in float64, batch 2; random entries of every tensor and both inputs.

    A probe whose +-h step changes a ReLU mask or max-pool winner straddles a
    kink, where the difference quotient of the real forward pass is not a
    derivative. Such probes are evaluated with the activation pattern frozen.
    Kinks are common only in stage-0 tensors, whose entries move every
    downstream activation. Returns (worst error, probes, frozen probes).
    """
    rng = np.random.default_rng(seed)
    model = FusionNet(NetworkConfig(dtype="float64", seed=seed))
    for _, p, _ in model.parameters():
        if p.ndim == 1:
            p[...] = rng.normal(scale=0.2, size=p.shape) + (1.0 if rng.random() < 0.5 else 0.0)
    front = rng.normal(size=(2, 2, 650))
    side = rng.normal(size=(2, 2, 650))
    w = rng.normal(size=(2, 22))

    def loss():
        out = model.forward(front, side)
        model._cache = None
        return float(np.sum(out * w))

    model.zero_grad()
    model.forward(front, side)
    base = [layer.cache for layer in _kink_layers(model)]
    dfront, dside = model.backward(w)

    def central(arr, i, check):
        old, vals = arr[i], []
        for x in (old + GRAD_H, old - GRAD_H):
            arr[i] = x
            vals.append(loss())
            if check and not _same_pattern(model, base):
                arr[i] = old
                return None
        arr[i] = old
        return (vals[0] - vals[1]) / (2 * GRAD_H)

    worst, drawn, frozen = 0.0, 0, 0
    tensors = [(front, dfront, 3), (side, dside, 3)] + [(p, g, 2) for _, p, g in model.parameters()]
    for arr, grad, count in tensors:
        for _ in range(count):
            i = tuple(int(rng.integers(0, s)) for s in arr.shape)
            drawn += 1
            num = central(arr, i, check=True)
            if num is None:
                frozen += 1
                with _frozen_pattern(model, base):
                    num = central(arr, i, check=False)
            worst = max(worst, rel_err(np.array(grad[i]), np.array(num)))
    return worst, drawn, frozen


def test_criterion_01_gradient_suite(acceptance):
    t0 = time.perf_counter()
    kinds = ["conv_pad0", "conv_pad1", "bn_train", "bn_eval", "relu", "maxpool", "linear"]
    layer_worst = max(_layer_grad_error(k, s) for k in kinds for s in range(10))
    runs = [_model_grad_error(s) for s in range(10)]
    model_worst = max(r[0] for r in runs)
    drawn, frozen = sum(r[1] for r in runs), sum(r[2] for r in runs)
    elapsed = time.perf_counter() - t0
    ok = layer_worst < GRAD_TOL and model_worst < GRAD_TOL and elapsed < 120
    assert acceptance(1, ok, f"max rel err layers {layer_worst:.2e}, full model {model_worst:.2e} "
                             f"(tol {GRAD_TOL:g}; {frozen}/{drawn} probes straddled a kink and used the frozen "
                             f"activation pattern), "
                             f"{elapsed:.0f} s")


# -- 2 ---------------------------------------------------------------------------

def test_criterion_02_loss_identity(acceptance):
    t0 = time.perf_counter()
    meshes, _ = low_rank_meshes(n_meshes=40, n_vertices=200, rank=5, seed=2)
    space = fit_pca(meshes, 1.0)
    ortho = space.orthonormality_error()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 17))
        a = rng.normal(size=(n, space.k))
        b = rng.normal(size=(n, space.k))
        v, c = vertex_loss(space, a, b), coeff_loss(a, b)[0]
        worst = max(worst, abs(v - c) / max(v, 1e-12))
    # negative control: a non-orthonormal basis breaks the identity
    skew = space.components @ (np.eye(space.k) + 0.3 * rng.normal(size=(space.k, space.k)))
    import dataclasses
    bad = dataclasses.replace(space, components=skew)
    control = min(abs(vertex_loss(bad, a, b) - coeff_loss(a, b)[0]) / vertex_loss(bad, a, b)
                  for a, b in ((rng.normal(size=(4, space.k)), rng.normal(size=(4, space.k))) for _ in range(100)))
    elapsed = time.perf_counter() - t0
    ok = ortho <= 1e-8 and worst <= 1e-6 and control > 1e-6 and elapsed < 60
    assert acceptance(2, ok, f"orthonormality {ortho:.1e}, worst rel gap {worst:.1e}, "
                             f"negative control min gap {control:.2e}, {elapsed:.1f} s")


# -- 3, 4 ------------------------------------------------------------------------

def test_criterion_03_shape_algebra(acceptance):
    model = FusionNet(NetworkConfig())
    x = np.random.default_rng(0).normal(size=(2, 2, 650)).astype(np.float32)
    out = model.forward(x, x)
    conv = Conv1d(2, 4, 0, np.random.default_rng(0)).forward(np.zeros((2, 1, 650), np.float32))
    ok = model.lengths == [650, 648, 216, 72, 24, 8] and conv.shape[2] == 648 and out.shape == (2, 22)
    assert acceptance(3, ok, f"lengths {model.lengths}, padding-0 conv 650 -> {conv.shape[2]}")


def test_criterion_04_parameter_budget(acceptance):
    n = FusionNet(NetworkConfig()).param_count()
    assert acceptance(4, 2_000_000 <= n <= 2_800_000, f"param_count {n:,} (k=22, M=648)")


# -- 5 ---------------------------------------------------------------------------

def test_criterion_05_pca_properties(acceptance):
    t0 = time.perf_counter()
    pop = sample_population(60, seed=5)
    unit = [normalize_height(m)[0] for m in pop.meshes]
    space = fit_pca(unit, 0.97)
    ortho = space.orthonormality_error()
    rng = np.random.default_rng(1)
    trip = 0.0
    for _ in range(20):
        phi = rng.normal(size=space.k) * np.sqrt(space.variances)
        trip = max(trip, float(np.abs(encode(space, decode(space, phi)) - phi).max()))
    low, _ = low_rank_meshes(n_meshes=30, n_vertices=50, rank=3, seed=3)
    s3 = fit_pca(low, 0.97)
    s3_full = fit_pca(low, 1.0)
    elapsed = time.perf_counter() - t0
    ok = (ortho <= 1e-8 and trip <= 1e-9 and s3.k == 3 and s3_full.k == 3
          and abs(s3_full.variance_captured - 1.0) <= 1e-9 and elapsed < 30)
    assert acceptance(5, ok, f"orthonormality {ortho:.1e}, round trip {trip:.1e}, rank-3 k={s3_full.k} "
                             f"captured 1-{1 - s3_full.variance_captured:.1e}, {elapsed:.1f} s")


# -- 6 ---------------------------------------------------------------------------

def test_criterion_06_augmentation(acceptance):
    t0 = time.perf_counter()
    oracle_ok = True
    for seed in range(5):
        pts = np.random.default_rng(seed).normal(size=(100, 8))
        D = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        np.fill_diagonal(D, np.inf)
        brute = np.sort(D, axis=1)[:, :11].sum(axis=1) / 11
        oracle_ok &= bool(np.array_equal(neighboring_radii(pts, 11), brute))
    hull_err = 0.0
    grows = True
    for seed in range(3):
        rng = np.random.default_rng(10 + seed)
        ds = CoeffDataset(rng.normal(size=(300, 6)) * np.sqrt(np.exp(-np.arange(6) / 2)))
        history = []
        out = refine(ds, 1.2, 3, iterations=3, K=11, history=history)
        sizes = np.cumsum([len(ds)] + history)
        grows &= bool(np.all(np.diff(sizes) >= 0)) and len(out) == sizes[-1]
        grows &= bool(np.array_equal(out.samples[:len(ds)], ds.samples))
        for i, p in enumerate(out.provenance):
            if not p.is_original:
                combo = (1 - p.t) * out.samples[p.parent_a] + p.t * out.samples[p.parent_b]
                hull_err = max(hull_err, float(np.abs(out.samples[i] - combo).max()))
    elapsed = time.perf_counter() - t0
    ok = oracle_ok and hull_err == 0.0 and grows and elapsed < 30
    assert acceptance(6, ok, f"radius oracle exact={oracle_ok}, hull residual {hull_err:g}, "
                             f"monotone growth={grows}, {elapsed:.1f} s")


# -- 7 ---------------------------------------------------------------------------

def _arc_positions(boundary_pts, samples):
    closed = np.vstack([boundary_pts, boundary_pts[:1]])
    seg = closed[1:] - closed[:-1]
    seg_len = np.linalg.norm(seg, axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg_len)])
    out = []
    for p in samples:
        t = np.clip(np.einsum("ij,ij->i", p - closed[:-1], seg) / seg_len ** 2, 0, 1)
        d = np.linalg.norm(closed[:-1] + t[:, None] * seg - p, axis=1)
        i = int(np.argmin(d))
        out.append(arc[i] + t[i] * seg_len[i])
    return np.unwrap(np.array(out), period=arc[-1]), arc[-1]


def test_criterion_07_contour_geometry(acceptance):
    t0 = time.perf_counter()
    spacing = 0.0
    centroid = 0.0
    min_area = np.inf
    lengths_ok = True
    for i, params in enumerate((BodyParams(), BodyParams(height=1.6, waist_girth=1.05, hip_girth=1.15))):
        body = place_on_floor(generate_body(params), params.height)
        for view in ("front", "side"):
            b = extract_contour(render_silhouette(body, Camera(view=view), seed=i))
            for M in (324, 648, 972):
                c = resample_contour(b, M, view=view)
                lengths_ok &= c.points.shape == (M + 2, 2)
                centroid = max(centroid, float(np.abs(c.interior.mean(axis=0)).max()))
                min_area = min(min_area, signed_area(c.interior))
                px = resample_contour(b, M, body_height_px=1.0).interior
                top = b.points[b.points[:, 1] == b.points[:, 1].max()]
                mid = 0.5 * (b.points[:, 0].min() + b.points[:, 0].max())
                px = px + (top[np.argmin(np.abs(top[:, 0] - mid))] - px[0])
                s, total = _arc_positions(b.points, px)
                spacing = max(spacing, float(np.abs(np.diff(s) - total / M).max()))
    # analytic renders: box corners and a disk-like cylinder footprint
    box_err = 0.0
    for view in ("front", "side"):
        cam = Camera(view=view, jitter_std=0.0)
        box = box_mesh((-0.2, 0.3, -0.15), (0.25, 1.6, 0.1))
        rows, cols = np.nonzero(render_silhouette(box, cam).bits)
        uv, _ = cam.project(box.vertices)
        box_err = max(box_err, abs(cols.min() - (uv[:, 0].min() - 0.5)), abs(cols.max() - (uv[:, 0].max() - 0.5)),
                      abs(rows.min() - (uv[:, 1].min() - 0.5)), abs(rows.max() - (uv[:, 1].max() - 0.5)))
    n = 4000
    th = 2 * np.pi * np.arange(n) / n
    circ = resample_contour(200 * np.stack([np.cos(th), np.sin(th)], axis=1), 8, body_height_px=400)
    ang = np.unwrap(np.arctan2(circ.interior[:, 1], circ.interior[:, 0]))
    circle_err = float(np.abs(np.diff(ang) - np.pi / 4).max()) * 200   # in pixels along the circle
    elapsed = time.perf_counter() - t0
    ok = (spacing <= 0.75 and centroid <= 1e-9 and min_area > 0 and lengths_ok and box_err <= 1
          and circle_err <= 1 and elapsed < 60)
    assert acceptance(7, ok, f"max arc-gap deviation {spacing:.3f} px, centroid {centroid:.1e}, "
                             f"min area {min_area:.3f}, box bbox err {box_err:.2f} px, "
                             f"circle err {circle_err:.2e} px, {elapsed:.1f} s")


# -- 8, 9, 10 --------------------------------------------------------------------

class OverfitExperiment:
    """32 synthetic bodies, rendered and sampled once, trained with and without fusion."""

    def __init__(self):
        pop = sample_population(OVERFIT_BODIES, seed=OVERFIT_SEED)
        self.space, self.coeffs = space_from_population(pop.meshes, 0.97)
        self.data = build_training_set(self.space, self.coeffs, seed=OVERFIT_SEED)
        self.baseline = mean_vertex_error(self.space, np.zeros_like(self.coeffs), self.coeffs)[0]

    def _run(self, fusion):
        model = FusionNet(NetworkConfig(k=self.space.k, fusion=fusion, seed=0))
        t0 = time.perf_counter()
        model, hist = train(model, self.data, TrainConfig(**OVERFIT_CONFIG), space=self.space)
        return model, hist, time.perf_counter() - t0

    @cached_property
    def fusion(self):
        return self._run(True)

    @cached_property
    def ablated(self):
        return self._run(False)


@pytest.fixture(scope="module")
def overfit():
    return OverfitExperiment()


@pytest.mark.slow
def test_criterion_08_end_to_end_overfit(overfit, acceptance):
    model, hist, elapsed = overfit.fusion
    e_aver = mean_vertex_error(overfit.space, model.predict(overfit.data.front, overfit.data.side),
                               overfit.coeffs)[0]
    losses = np.array(hist.train_loss)
    # descent sanity: Adam at this rate has transient spikes, so compare end windows
    first, last = losses[:100].mean(), losses[-100:].mean()
    descent = bool(last <= 0.01 * first)
    ok = e_aver < 0.01 and e_aver <= 0.25 * overfit.baseline and descent and elapsed < 30 * 60
    pilot = f", pilot {PILOT_FUSION_E_AVER:.2e}"
    assert acceptance(8, ok, f"training E_aver {e_aver:.2e} (< 0.01; mean-body baseline {overfit.baseline:.5f}"
                             f"{pilot}), loss mean first/last 100 epochs {first:.3g} -> {last:.3g}, train {elapsed / 60:.1f} min")


@pytest.mark.slow
def test_criterion_09_fusion_ablation(overfit, acceptance):
    _, hist_f, _ = overfit.fusion
    model_a, hist_a, _ = overfit.ablated
    f, a = hist_f.train_loss[-1], hist_a.train_loss[-1]
    ea = hist_a.train_e_aver[-1]
    assert acceptance(9, f <= a, f"final training loss fusion {f:.4g} <= ablated {a:.4g} "
                                 f"(ablated E_aver {ea:.2e}; recorded {PILOT_FUSION_LOSS:.3g} vs {PILOT_ABLATED_LOSS:.3g}; "
                                 f"equal {OVERFIT_EPOCHS}-epoch budgets)")


@pytest.mark.slow
def test_criterion_10_transfer_direction(overfit, acceptance):
    base, _, _ = overfit.fusion
    shifted = {"waist_girth": (1.00, 1.20), "hip_girth": (1.12, 1.30), "chest_girth": (1.05, 1.25)}
    pop = sample_population(24, ranges=shifted, seed=11)
    coeffs = encode_many(overfit.space, [normalize_height(m)[0] for m in pop.meshes])
    data = build_training_set(overfit.space, coeffs, seed=11)
    tr, va = data.subset(np.arange(16)), data.subset(np.arange(16, 24))
    before = mean_vertex_error(overfit.space, base.predict(va.front, va.side), va.coeffs)[0]
    cfg = TrainConfig(epochs=300, batch_size=16, learning_rate=1e-3, seed=1, val_every=50)
    tuned, _ = transfer(base, tr, cfg, space=overfit.space, val=va)
    after = mean_vertex_error(overfit.space, tuned.predict(va.front, va.side), va.coeffs)[0]
    p0, p1 = base.param_dict(), tuned.param_dict()
    frozen = all(np.array_equal(p0[n], p1[n]) for n in p0 if base.is_block_param(n))
    buffers = all(np.array_equal(a, b) for (_, a), (_, b) in zip(base.buffers(), tuned.buffers()))
    changed = {n for n in p0 if not np.array_equal(p0[n], p1[n])}
    fc_only = changed == {n for n in p0 if n.startswith("fc.")}
    ok = after < before and frozen and buffers and fc_only
    assert acceptance(10, ok, f"shifted validation E_aver {before:.5f} -> {after:.5f}, blocks bitwise frozen="
                              f"{frozen and buffers}, changed set == FC params: {fc_only}")


# -- 11 --------------------------------------------------------------------------

def test_criterion_11_girth_fidelity(acceptance):
    pop = sample_population(50, seed=12)
    curves = feature_curves()
    worst = 0.0
    for mesh, p in zip(pop.meshes, pop.params):
        for name, target in (("chest", p.chest_girth), ("waist", p.waist_girth), ("hip", p.hip_girth)):
            worst = max(worst, abs(girth(mesh, curves[name]) - target) / target)
    equi = 0.0
    for mesh in pop.meshes[:10]:
        for s in (0.5, 1.7, 3.0):
            scaled = mesh.with_vertices(s * mesh.vertices)
            for c in curves.values():
                g = girth(mesh, c)
                equi = max(equi, abs(girth(scaled, c) - s * g) / (s * g))
    ok = worst <= 0.01 and equi <= 1e-12
    assert acceptance(11, ok, f"max girth deviation {100 * worst:.3f}% (<= 1%), scale equivariance {equi:.1e}")


# -- 12 --------------------------------------------------------------------------

CLI_RUN = [
    ["gen-bodies", "--n", "14", "--seed", "21", "--out", "pop"],
    ["fit-space", "--bodies", "pop", "--out", "sp"],
    ["augment", "--coeffs", "sp/coeffs.bin", "--factor", "1.2", "--out", "aug"],
    ["render-sample", "--space", "sp/space.bin", "--coeffs", "sp/coeffs.bin", "--M", "324", "--seed", "22",
     "--images", "1", "--out", "r"],
    ["train", "--space", "sp/space.bin", "--coeffs", "sp/coeffs.bin", "--front", "r/front.cntr",
     "--side", "r/side.cntr", "--epochs", "3", "--batch-size", "4", "--lr", "1e-3", "--seed", "23", "--out", "t"],
    ["transfer", "--model", "t/model.bin", "--space", "sp/space.bin", "--coeffs", "sp/coeffs.bin",
     "--front", "r/front.cntr", "--side", "r/side.cntr", "--epochs", "2", "--batch-size", "4", "--lr", "1e-3",
     "--seed", "24", "--out", "tr"],
    ["infer", "--model", "t/model.bin", "--space", "sp/space.bin", "--front", "r/front.cntr",
     "--side", "r/side.cntr", "--out", "inf"],
    ["evaluate", "--model", "t/model.bin", "--space", "sp/space.bin", "--coeffs", "sp/coeffs.bin",
     "--front", "r/front.cntr", "--side", "r/side.cntr", "--out", "ev"],
    ["sweep-contour-points", "--m", "324,486", "--space", "sp/space.bin", "--coeffs", "sp/coeffs.bin",
     "--epochs", "1", "--batch-size", "5", "--lr", "1e-3", "--seed", "25", "--out", "sw"],
]


def test_criterion_12_cli_determinism(tmp_path, monkeypatch, acceptance):
    monkeypatch.delenv("S2S_OUTPUT_DIR", raising=False)
    snaps = []
    for run in ("a", "b"):
        root = tmp_path / run
        root.mkdir()
        monkeypatch.chdir(root)
        codes = [main(argv) for argv in CLI_RUN]
        assert codes == [0] * len(CLI_RUN), codes
        snaps.append({str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()})
    a, b = snaps
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    manifests = [k for k in a if k.endswith(".manifest.json")]
    seeds_recorded = all("seed" in json.loads(a[k]) for k in manifests)
    ok = not differing and len(manifests) == len(CLI_RUN) and seeds_recorded
    assert acceptance(12, ok, f"{len(a)} files from {len(CLI_RUN)} commands bit-identical across two runs"
                              + (f"; differing: {differing}" if differing else ""))
