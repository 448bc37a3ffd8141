"""Three-pipeline 1D fusion CNN with hand-written forward and backward passes.

The public model API takes (batch, channels, length) arrays; internally
feature maps are laid out (channels, batch, length) so each convolution is a
single matrix product and per-channel statistics reduce over contiguous
memory. Each layer caches what its backward pass needs during ``forward``;
calling ``backward`` without a preceding forward raises :class:`StateError`.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ._container import Reader, Writer
from .errors import InvalidInputError, StateError

BN_EPS = 1e-5
BN_MOMENTUM = 0.1
MODEL_MAGIC = "S2SMODL"
MODEL_VERSION = 1


class Layer:
    """Base layer: ``params``/``grads`` hold trainable arrays, ``buffers`` running state."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.cache = None
        self.training = True

    def _pop_cache(self):
        if self.cache is None:
            raise StateError(f"{type(self).__name__}.backward called before forward")
        cache, self.cache = self.cache, None
        return cache

    def zero_grad(self):
        for k, v in self.params.items():
            self.grads[k] = np.zeros_like(v)


class Conv1d(Layer):
    """Kernel-3, stride-1 cross-correlation with bias."""

    def __init__(self, c_in: int, c_out: int, padding: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if padding not in (0, 1):
            raise InvalidInputError("padding must be 0 or 1")
        self.c_in, self.c_out, self.padding = c_in, c_out, padding
        std = np.sqrt(2.0 / (3 * c_in))
        self.params["weight"] = (rng.standard_normal((c_out, c_in, 3)) * std).astype(dtype)
        self.params["bias"] = np.zeros(c_out, dtype=dtype)
        self.zero_grad()

    def forward(self, x):
        if x.ndim != 3 or x.shape[0] != self.c_in:
            raise InvalidInputError(f"conv expects {self.c_in} input channels, got shape {x.shape}")
        p = self.padding
        xp = np.pad(x, ((0, 0), (0, 0), (p, p))) if p else x
        C, N, _ = x.shape
        L = xp.shape[2] - 2
        if L < 1:
            raise InvalidInputError("input too short for a size-3 convolution")
        cols = np.stack([xp[:, :, t:t + L] for t in range(3)], axis=1).reshape(C * 3, N * L)
        w = self.params["weight"].reshape(self.c_out, -1)
        out = w @ cols
        out += self.params["bias"][:, None]
        self.cache = (cols, x.shape)
        return out.reshape(self.c_out, N, L)

    def backward(self, dout):
        cols, (C, N, Lin) = self._pop_cache()
        L = dout.shape[2]
        d2 = dout.reshape(self.c_out, N * L)
        self.grads["bias"] += d2.sum(axis=1)
        self.grads["weight"] += (d2 @ cols.T).reshape(self.c_out, C, 3)
        w = self.params["weight"].reshape(self.c_out, -1)
        dcols = (w.T @ d2).reshape(C, 3, N, L)
        p = self.padding
        dxp = np.zeros((C, N, Lin + 2 * p), dtype=dout.dtype)
        for t in range(3):
            dxp[:, :, t:t + L] += dcols[:, t]
        return dxp[:, :, p:p + Lin] if p else dxp


class BatchNorm1d(Layer):
    """Per-channel normalization over batch and length."""

    def __init__(self, channels: int, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.params["gamma"] = np.ones(channels, dtype=dtype)
        self.params["beta"] = np.zeros(channels, dtype=dtype)
        self.buffers["running_mean"] = np.zeros(channels, dtype=dtype)
        self.buffers["running_var"] = np.ones(channels, dtype=dtype)
        self.zero_grad()

    def forward(self, x):
        C = x.shape[0]
        x2 = x.reshape(C, -1)
        gamma = self.params["gamma"][:, None]
        beta = self.params["beta"][:, None]
        if self.training:
            if x.shape[1] < 2:
                raise InvalidInputError("batch normalization in train mode needs batch >= 2")
            m = x2.shape[1]
            mean = x2.mean(axis=1)
            xc = x2 - mean[:, None]
            var = np.einsum("ij,ij->i", xc, xc) / m
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            xhat = xc * inv_std[:, None]
            rm, rv = self.buffers["running_mean"], self.buffers["running_var"]
            rm *= 1 - BN_MOMENTUM
            rm += BN_MOMENTUM * mean.astype(rm.dtype)
            rv *= 1 - BN_MOMENTUM
            rv += BN_MOMENTUM * (var * m / max(m - 1, 1)).astype(rv.dtype)
        else:
            inv_std = 1.0 / np.sqrt(self.buffers["running_var"] + BN_EPS)
            xhat = (x2 - self.buffers["running_mean"][:, None]) * inv_std[:, None]
        self.cache = (xhat, inv_std, self.training)
        return (gamma * xhat + beta).reshape(x.shape)

    def backward(self, dout):
        xhat, inv_std, training = self._pop_cache()
        d2 = dout.reshape(dout.shape[0], -1)
        self.grads["gamma"] += np.einsum("ij,ij->i", d2, xhat)
        self.grads["beta"] += d2.sum(axis=1)
        dxhat = d2 * self.params["gamma"][:, None]
        if not training:
            return (dxhat * inv_std[:, None]).reshape(dout.shape)
        m = d2.shape[1]
        s1 = dxhat.sum(axis=1, keepdims=True)
        s2 = np.einsum("ij,ij->i", dxhat, xhat)[:, None]
        dx = (inv_std[:, None] / m) * (m * dxhat - s1 - xhat * s2)
        return dx.reshape(dout.shape)


class ReLU(Layer):
    def forward(self, x):
        mask = x > 0
        self.cache = mask
        return x * mask

    def backward(self, dout):
        return dout * self._pop_cache()


class MaxPool3(Layer):
    """Max over disjoint windows of 3 along the last axis; gradient goes to the first argmax."""

    def forward(self, x):
        L = x.shape[-1]
        if L % 3:
            raise InvalidInputError(f"max-pool length {L} is not divisible by 3")
        win = x.reshape(x.shape[:-1] + (L // 3, 3))
        a, b, c = win[..., 0], win[..., 1], win[..., 2]
        pick_a = (a >= b) & (a >= c)
        pick_b = ~pick_a & (b >= c)
        self.cache = (pick_a, pick_b, x.shape)
        return np.where(pick_a, a, np.where(pick_b, b, c))

    def backward(self, dout):
        pick_a, pick_b, shape = self._pop_cache()
        dx = np.empty(dout.shape + (3,), dtype=dout.dtype)
        dx[..., 0] = dout * pick_a
        dx[..., 1] = dout * pick_b
        dx[..., 2] = dout * ~(pick_a | pick_b)
        return dx.reshape(shape)


class Linear(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        std = np.sqrt(2.0 / n_in)
        self.params["weight"] = (rng.standard_normal((n_out, n_in)) * std).astype(dtype)
        self.params["bias"] = np.zeros(n_out, dtype=dtype)
        self.zero_grad()

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise InvalidInputError(f"linear layer expects width {self.n_in}, got shape {x.shape}")
        self.cache = x
        return x @ self.params["weight"].T + self.params["bias"]

    def backward(self, dout):
        x = self._pop_cache()
        self.grads["weight"] += dout.T @ x
        self.grads["bias"] += dout.sum(axis=0)
        return dout @ self.params["weight"]


class Sequential(Layer):
    def __init__(self, layers):
        super().__init__()
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dout):
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()


def block_a(c_in, c_out, rng, padding=0, dtype=np.float32) -> Sequential:
    """Conv(3,1) -> BatchNorm -> ReLU."""
    return Sequential([Conv1d(c_in, c_out, padding, rng, dtype), BatchNorm1d(c_out, dtype), ReLU()])


def block_b(c_in, c_out, rng, dtype=np.float32) -> Sequential:
    """Conv(3,1, pad 1) -> BatchNorm -> ReLU -> MaxPool(3,3)."""
    return Sequential([Conv1d(c_in, c_out, 1, rng, dtype), BatchNorm1d(c_out, dtype), ReLU(), MaxPool3()])


@dataclass
class NetworkConfig:
    M: int = 648
    k: int = 22
    channels: tuple = (32, 64, 128, 256, 256)
    fc: tuple = (512, 256)
    fusion: bool = True
    whole_map_pooling: bool = False
    in_channels: int = 2
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        self.channels = tuple(int(c) for c in self.channels)
        self.fc = tuple(int(c) for c in self.fc)
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if len(self.channels) < 2:
            raise InvalidInputError("need a BlockA channel and at least one BlockB stage")
        if self.M % 3 ** self.n_pool:
            raise InvalidInputError(f"M={self.M} must be divisible by 3^{self.n_pool}")

    @property
    def n_pool(self) -> int:
        return len(self.channels) - 1

    @property
    def final_length(self) -> int:
        return self.M // 3 ** self.n_pool

    @property
    def head_width(self) -> int:
        c = self.channels[-1]
        return c if self.whole_map_pooling else c * self.final_length

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NetworkConfig":
        return cls(**json.loads(text))


class FusionNet:
    """Front, side and fusion pipelines joined by addition, followed by an FC head."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        dt = np.dtype(config.dtype)
        self.dtype = dt
        rng = np.random.default_rng(config.seed)
        ch = config.channels

        def pipeline():
            blocks = [block_a(config.in_channels, ch[0], rng, padding=0, dtype=dt)]
            blocks += [block_b(ch[i - 1], ch[i], rng, dt) for i in range(1, len(ch))]
            return blocks

        self.front_blocks = pipeline()
        self.side_blocks = pipeline()
        self.fusion_blocks = ([block_b(ch[i - 1], ch[i], rng, dt) for i in range(1, len(ch))]
                              if config.fusion else [])
        widths = (config.head_width,) + config.fc + (config.k,)
        self.fc_layers = [Linear(widths[i], widths[i + 1], rng, dt) for i in range(len(widths) - 1)]
        self.fc_relus = [ReLU() for _ in range(len(self.fc_layers) - 1)]
        self._cache = None
        self.training = True
        self.lengths: list[int] = []

    # -- bookkeeping -----------------------------------------------------
    def named_layers(self):
        """(prefix, layer) for every parameterised layer in declared order."""
        groups = [("front", self.front_blocks), ("side", self.side_blocks), ("fusion", self.fusion_blocks)]
        for name, blocks in groups:
            for i, block in enumerate(blocks):
                stage = i if name != "fusion" else i + 1
                for j, layer in enumerate(block.layers):
                    if layer.params:
                        yield f"{name}.{stage}.{j}", layer
        for i, layer in enumerate(self.fc_layers):
            yield f"fc.{i}", layer

    def parameters(self):
        """Ordered (name, param, grad) triples."""
        for prefix, layer in self.named_layers():
            for key in layer.params:
                yield f"{prefix}.{key}", layer.params[key], layer.grads[key]

    def buffers(self):
        for prefix, layer in self.named_layers():
            for key, buf in layer.buffers.items():
                yield f"{prefix}.{key}", buf

    def param_dict(self) -> dict:
        return {name: p for name, p, _ in self.parameters()}

    def grad_dict(self) -> dict:
        return {name: g for name, _, g in self.parameters()}

    def param_count(self) -> int:
        return int(sum(p.size for _, p, _ in self.parameters()))

    def zero_grad(self):
        for _, layer in self.named_layers():
            layer.zero_grad()

    def train(self, mode: bool = True):
        self.training = mode
        for _, layer in self._all_layers():
            layer.training = mode
        return self

    def eval(self):
        return self.train(False)

    def _all_layers(self):
        for blocks in (self.front_blocks, self.side_blocks, self.fusion_blocks):
            for block in blocks:
                for layer in block.layers:
                    yield None, layer
        for layer in self.fc_layers + self.fc_relus:
            yield None, layer

    @staticmethod
    def is_block_param(name: str) -> bool:
        return not name.startswith("fc.")

    # -- passes ----------------------------------------------------------
    def _as_batch(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 2:
            x = x[None]
        expected = (self.config.in_channels, self.config.M + 2)
        if x.ndim != 3 or x.shape[1:] != expected:
            raise InvalidInputError(f"view input must be (N, {expected[0]}, {expected[1]}), got {x.shape}")
        return x

    def forward(self, front, side) -> np.ndarray:
        """(N, 2, M+2) front and side contour tensors -> (N, k) coefficients."""
        if front is None or side is None:
            raise InvalidInputError("both front and side views are required")
        front, side = self._as_batch(front), self._as_batch(side)
        if front.shape[0] != side.shape[0]:
            raise InvalidInputError("front and side batches differ in size")
        f = self.front_blocks[0].forward(np.ascontiguousarray(front.transpose(1, 0, 2)))
        s = self.side_blocks[0].forward(np.ascontiguousarray(side.transpose(1, 0, 2)))
        u = f + s
        self.lengths = [self.config.M + 2, f.shape[2]]
        for i in range(1, len(self.front_blocks)):
            f = self.front_blocks[i].forward(f)
            s = self.side_blocks[i].forward(s)
            if self.fusion_blocks:
                u = self.fusion_blocks[i - 1].forward(u) + f + s
            else:
                u = f + s
            self.lengths.append(f.shape[2])
        if self.config.whole_map_pooling:
            arg = u.argmax(axis=2)
            z = np.take_along_axis(u, arg[..., None], axis=2)[..., 0].T
            pool = (arg, u.shape)
        else:
            # per-sample flatten in (channel, position) order
            z = u.transpose(1, 0, 2).reshape(u.shape[1], -1)
            pool = (None, u.shape)
        for i, layer in enumerate(self.fc_layers):
            z = layer.forward(z)
            if i < len(self.fc_relus):
                z = self.fc_relus[i].forward(z)
        self._cache = pool
        return z

    def backward(self, dout) -> tuple[np.ndarray, np.ndarray]:
        """Accumulate parameter gradients; returns input gradients (front, side)."""
        if self._cache is None:
            raise StateError("backward called before forward")
        arg, ushape = self._cache
        self._cache = None
        dz = np.asarray(dout, dtype=self.dtype)
        for i in reversed(range(len(self.fc_layers))):
            if i < len(self.fc_relus):
                dz = self.fc_relus[i].backward(dz)
            dz = self.fc_layers[i].backward(dz)
        C, N, L = ushape
        if arg is None:
            du = np.ascontiguousarray(dz.reshape(N, C, L).transpose(1, 0, 2))
        else:
            du = np.zeros(ushape, dtype=dz.dtype)
            np.put_along_axis(du, arg[..., None], dz.T[..., None], axis=2)
        df = du
        ds = du
        for i in reversed(range(1, len(self.front_blocks))):
            du_prev = self.fusion_blocks[i - 1].backward(du) if self.fusion_blocks else 0.0
            df = self.front_blocks[i].backward(df) + du_prev
            ds = self.side_blocks[i].backward(ds) + du_prev
            du = du_prev
        dfront = self.front_blocks[0].backward(df).transpose(1, 0, 2)
        dside = self.side_blocks[0].backward(ds).transpose(1, 0, 2)
        return dfront, dside

    def predict(self, front, side, batch_size: int = 256) -> np.ndarray:
        """Eval-mode forward over a dataset, restoring the previous mode."""
        was = self.training
        self.eval()
        try:
            outs = [self.forward(front[i:i + batch_size], side[i:i + batch_size])
                    for i in range(0, len(front), batch_size)]
        finally:
            self._cache = None
            self.train(was)
        return np.concatenate(outs).astype(np.float64)

    # -- persistence -----------------------------------------------------
    def state_arrays(self) -> list:
        return [p for _, p, _ in self.parameters()] + [b for _, b in self.buffers()]

    def copy(self) -> "FusionNet":
        clone = FusionNet(self.config)
        for dst, src in zip(clone.state_arrays(), self.state_arrays()):
            dst[...] = src
        clone.train(self.training)
        return clone


def save_model(model: FusionNet, path) -> None:
    """S2SMODL container: config JSON, then parameters and BN buffers as float32."""
    w = Writer(MODEL_MAGIC, MODEL_VERSION)
    w.blob(model.config.to_json().encode())
    for arr in model.state_arrays():
        w.array(arr, "f4")
    w.save(path)


def load_model(path, dtype: str | None = None) -> FusionNet:
    r = Reader.open(path, MODEL_MAGIC)
    config = NetworkConfig.from_json(r.blob().decode())
    if dtype is not None:
        config.dtype = dtype
    model = FusionNet(config)
    for arr in model.state_arrays():
        arr[...] = r.array(arr.shape, "f4")
    if not r.at_end():
        raise InvalidInputError("trailing bytes in model checkpoint")
    return model.eval()
