"""Losses, Adam, the training loop and FC-only transfer learning."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, NumericalError
from .metrics import vertex_errors
from .network import FusionNet, save_model
from .shape_space import ShapeSpace, decode_vertices

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 500
    batch_size: int = 128
    learning_rate: float = 1.0e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    split_ratio: float = 0.8
    freeze_blocks: bool = False
    val_every: int = 10
    checkpoint_every: int = 0
    checkpoint_dir: str | None = None

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.val_every < 1:
            raise InvalidInputError("epochs >= 0, batch_size >= 1 and val_every >= 1 required")
        if not self.learning_rate > 0 or self.eps <= 0:
            raise InvalidInputError("learning_rate and eps must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidInputError("Adam betas must lie in [0, 1)")
        if not 0 < self.split_ratio <= 1:
            raise InvalidInputError("split_ratio must lie in (0, 1]")


@dataclass
class TrainingSet:
    """Paired network inputs and targets: (n, 2, M+2) views and (n, k) coefficients."""

    front: np.ndarray
    side: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.front = np.asarray(self.front, dtype=np.float32)
        self.side = np.asarray(self.side, dtype=np.float32)
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=np.float64))
        if not (len(self.front) == len(self.side) == len(self.coeffs)):
            raise InvalidInputError("front, side and coeffs must have the same length")

    def __len__(self):
        return len(self.coeffs)

    def subset(self, idx) -> "TrainingSet":
        return TrainingSet(self.front[idx], self.side[idx], self.coeffs[idx])

    @classmethod
    def from_contours(cls, fronts, sides, coeffs) -> "TrainingSet":
        return cls(np.stack([c.as_input() for c in fronts]),
                   np.stack([c.as_input() for c in sides]), coeffs)


def split_indices(n: int, ratio: float = 0.8, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    cut = int(round(n * ratio))
    return np.sort(perm[:cut]), np.sort(perm[cut:])


def split_dataset(data: TrainingSet, ratio: float, seed: int = 0) -> tuple[TrainingSet, TrainingSet | None]:
    """Seeded train/validation split; ``ratio == 1`` keeps every sample for training."""
    if ratio >= 1:
        return data, None
    tr, va = split_indices(len(data), ratio, seed)
    return data.subset(tr), data.subset(va)


def coeff_loss(pred, truth) -> tuple[float, np.ndarray]:
    """Sum over the batch of squared coefficient differences, and its gradient."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise InvalidInputError(f"prediction {pred.shape} and truth {truth.shape} differ")
    diff = pred.astype(np.float64) - truth
    return float(np.sum(diff * diff)), 2.0 * diff


def vertex_loss(space: ShapeSpace, pred, truth) -> float:
    """Sum of squared vertex-to-vertex distances between decoded bodies."""
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if pred.shape != truth.shape:
        raise InvalidInputError(f"prediction {pred.shape} and truth {truth.shape} differ")
    d = decode_vertices(space, pred) - decode_vertices(space, truth)
    return float(np.sum(d * d))


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0


def adam_step(params: dict, grads: dict, state: AdamState, config: TrainConfig,
              names=None) -> AdamState:
    """Bias-corrected Adam update, in place, for ``names`` (default: all params)."""
    names = list(params) if names is None else list(names)
    for name in names:
        if params[name].shape != grads[name].shape:
            raise InvalidInputError(f"gradient shape mismatch for {name}")
    state.step += 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    for name in names:
        p, g = params[name], grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= (config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + config.eps)).astype(p.dtype)
    return state


def mean_vertex_error(space: ShapeSpace, pred, truth) -> tuple[float, float]:
    """Dataset means of E_aver and E_max (mesh units)."""
    emax, eav = vertex_errors(decode_vertices(space, truth), decode_vertices(space, pred))
    return float(eav.mean()), float(emax.mean())


@dataclass
class History:
    train_loss: list = field(default_factory=list)       # summed over samples per epoch
    val_epochs: list = field(default_factory=list)
    val_e_aver: list = field(default_factory=list)
    train_e_aver: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def train(model: FusionNet, data: TrainingSet, config: TrainConfig,
          space: ShapeSpace | None = None, val: TrainingSet | None = None,
          state: AdamState | None = None) -> tuple[FusionNet, History]:
    """Minimise the coefficient loss with shuffled mini-batches and Adam.

    With ``config.freeze_blocks`` the convolutional blocks keep their
    parameters and running statistics; only the FC head is updated.
    """
    if len(data) == 0:
        raise InvalidInputError("empty training set")
    if data.coeffs.shape[1] != model.config.k:
        raise InvalidInputError(f"targets have k={data.coeffs.shape[1]}, model outputs k={model.config.k}")
    hist = History()
    if config.epochs == 0:
        return model, hist
    rng = np.random.default_rng(config.seed)
    state = state or AdamState()
    params = model.param_dict()
    grads = model.grad_dict()
    names = [n for n in params if not (config.freeze_blocks and model.is_block_param(n))]

    model.train()
    if config.freeze_blocks:
        _freeze_block_statistics(model)
    n = len(data)
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        total = 0.0
        for idx in _batches(perm, config.batch_size):
            model.zero_grad()
            grads = model.grad_dict()
            pred = model.forward(data.front[idx], data.side[idx])
            loss, dpred = coeff_loss(pred, data.coeffs[idx])
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite training loss at epoch {epoch}")
            model.backward(dpred)
            adam_step(params, grads, state, config, names)
            total += loss
        hist.train_loss.append(total)
        if space is not None and (epoch % config.val_every == 0 or epoch == config.epochs):
            hist.val_epochs.append(epoch)
            hist.train_e_aver.append(mean_vertex_error(space, model.predict(data.front, data.side), data.coeffs)[0])
            if val is not None and len(val):
                hist.val_e_aver.append(mean_vertex_error(space, model.predict(val.front, val.side), val.coeffs)[0])
            model.train()
            if config.freeze_blocks:
                _freeze_block_statistics(model)
        if config.checkpoint_every and config.checkpoint_dir and epoch % config.checkpoint_every == 0:
            ckpt = Path(config.checkpoint_dir)
            ckpt.mkdir(parents=True, exist_ok=True)
            save_model(model, ckpt / f"epoch_{epoch:05d}.bin")
        if epoch % max(1, config.epochs // 10) == 0:
            log.info("epoch %d/%d loss %.6g", epoch, config.epochs, total)
    model.eval()
    return model, hist


def _batches(perm: np.ndarray, size: int) -> list:
    out = [perm[i:i + size] for i in range(0, len(perm), size)]
    # a one-sample batch cannot be batch-normalised; merge it into its neighbour
    if len(out) > 1 and len(out[-1]) == 1:
        last = out.pop()
        out[-1] = np.concatenate([out[-1], last])
    return out


def _freeze_block_statistics(model: FusionNet) -> None:
    for blocks in (model.front_blocks, model.side_blocks, model.fusion_blocks):
        for block in blocks:
            for layer in block.layers:
                layer.training = False


def transfer(model: FusionNet, data: TrainingSet, config: TrainConfig,
             space: ShapeSpace | None = None, val: TrainingSet | None = None) -> tuple[FusionNet, History]:
    """Retrain only the FC head of a copy of ``model`` on a small dataset."""
    if data.coeffs.shape[1] != model.config.k:
        raise InvalidInputError(f"targets have k={data.coeffs.shape[1]}, model outputs k={model.config.k}")
    cfg = TrainConfig(**{**asdict(config), "freeze_blocks": True})
    return train(model.copy(), data, cfg, space=space, val=val)


def write_manifest(path, config: TrainConfig, history: History, extra: dict | None = None) -> None:
    doc = {"config": asdict(config), "history": history.to_dict(), **(extra or {})}
    Path(path).write_text(json.dumps(doc, indent=2))
