"""Dual-path patch classifier written directly in numpy.

Each path runs ``conv -> ReLU -> maxpool -> conv -> ReLU -> maxpool`` on a
31 x 31 x 3 patch.  The flattened path features (3 x 3 x 60 = 540 each) are
concatenated, passed through a 500-unit ReLU layer and a 2-way softmax whose
second output is the lesion probability.

Tensors are channels-last: activations ``(B, H, W, C)`` and convolution
kernels ``(k, k, C_in, C_out)``.  Parameters are float32 for training and
inference; :meth:`TwoPathNetwork.astype` gives a float64 copy for gradient
checks.
"""
from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._backend import kernels

log = logging.getLogger(__name__)

MODES = ("dual", "local_only", "global_only")
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class Architecture:
    side: int = 31
    k1: int = 6
    maps1: int = 60
    pool1: int = 2
    stride1: int = 2
    k2: int = 5
    maps2: int = 60
    pool2: int = 3
    stride2: int = 3
    fusion: int = 500
    classes: int = 2

    def __post_init__(self):
        self.spatial_chain()

    def spatial_chain(self) -> tuple[int, int, int, int, int]:
        """Side length after input, conv1, pool1, conv2, pool2."""
        s0 = self.side
        s1 = s0 - self.k1 + 1
        if s1 < self.pool1 or (s1 - self.pool1) % self.stride1:
            raise ValueError(f"pool1 ({self.pool1}/{self.stride1}) does not tile a {s1}-wide map")
        s2 = (s1 - self.pool1) // self.stride1 + 1
        s3 = s2 - self.k2 + 1
        if s3 < self.pool2 or (s3 - self.pool2) % self.stride2:
            raise ValueError(f"pool2 ({self.pool2}/{self.stride2}) does not tile a {s3}-wide map")
        s4 = (s3 - self.pool2) // self.stride2 + 1
        return s0, s1, s2, s3, s4

    @property
    def path_features(self) -> int:
        return self.spatial_chain()[-1] ** 2 * self.maps2

    def as_tuple(self) -> tuple[int, ...]:
        return (self.side, self.k1, self.maps1, self.pool1, self.stride1, self.k2, self.maps2,
                self.pool2, self.stride2, self.fusion, self.classes)


def paths_for(mode: str) -> tuple[str, ...]:
    if mode == "dual":
        return ("local", "global")
    if mode == "local_only":
        return ("local",)
    if mode == "global_only":
        return ("global",)
    raise ValueError(f"unknown network mode {mode!r}; expected one of {MODES}")


def param_shapes(arch: Architecture, mode: str) -> dict[str, tuple[int, ...]]:
    """Parameter names and shapes in the fixed serialization order."""
    shapes = {}
    paths = paths_for(mode)
    for p in paths:
        shapes[f"{p}.conv1.w"] = (arch.k1, arch.k1, 3, arch.maps1)
        shapes[f"{p}.conv1.b"] = (arch.maps1,)
        shapes[f"{p}.conv2.w"] = (arch.k2, arch.k2, arch.maps1, arch.maps2)
        shapes[f"{p}.conv2.b"] = (arch.maps2,)
    shapes["fusion.w"] = (arch.path_features * len(paths), arch.fusion)
    shapes["fusion.b"] = (arch.fusion,)
    shapes["out.w"] = (arch.fusion, arch.classes)
    shapes["out.b"] = (arch.classes,)
    return shapes


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def xavier_init(fan_in: int, fan_out: int, shape, rng=None, dtype=np.float32) -> np.ndarray:
    """Uniform samples on ``[-sqrt(6 / (fan_in + fan_out)), +sqrt(...)]``."""
    if fan_in <= 0 or fan_out <= 0:
        raise ValueError(f"fans must be positive, got {fan_in}, {fan_out}")
    bound = xavier_bound(fan_in, fan_out)
    rng = np.random.default_rng(rng)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def _fans(name: str, shape) -> tuple[int, int]:
    if ".conv" in name:
        k, _, c_in, c_out = shape
        return k * k * c_in, k * k * c_out
    return shape[0], shape[1]


@dataclass
class TwoPathNetwork:
    arch: Architecture
    mode: str
    params: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self):
        expected = param_shapes(self.arch, self.mode)
        if list(self.params) != list(expected):
            raise ValueError(f"parameter names {list(self.params)} do not match mode {self.mode!r}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(f"{name}: shape {self.params[name].shape}, expected {shape}")

    @classmethod
    def initialize(cls, arch: Architecture | None = None, mode: str = "dual", rng=None,
                   dtype=np.float32) -> "TwoPathNetwork":
        """Xavier-uniform weights, zero biases."""
        arch = arch or Architecture()
        rng = np.random.default_rng(rng)
        params = {}
        for name, shape in param_shapes(arch, mode).items():
            if name.endswith(".b"):
                params[name] = np.zeros(shape, dtype=dtype)
            else:
                params[name] = xavier_init(*_fans(name, shape), shape, rng, dtype)
        return cls(arch, mode, params)

    @classmethod
    def zeros(cls, arch: Architecture | None = None, mode: str = "dual", dtype=np.float32):
        arch = arch or Architecture()
        return cls(arch, mode, {n: np.zeros(s, dtype=dtype) for n, s in param_shapes(arch, mode).items()})

    @property
    def paths(self) -> tuple[str, ...]:
        return paths_for(self.mode)

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def astype(self, dtype) -> "TwoPathNetwork":
        return TwoPathNetwork(self.arch, self.mode, {k: v.astype(dtype) for k, v in self.params.items()})

    def copy(self) -> "TwoPathNetwork":
        return self.astype(self.dtype)

    def predict_proba(self, local: np.ndarray | None, global_: np.ndarray | None) -> np.ndarray:
        """Class probabilities ``(B, 2)`` = (normal, lesion) for batched patches."""
        probs, _ = _forward(self, local, global_, keep_cache=False)
        return probs


# -- layers -----------------------------------------------------------------

def im2col(x: np.ndarray, k: int) -> np.ndarray:
    """``(B, H, W, C)`` -> ``(B, Ho, Wo, k, k, C)`` copy of every valid window."""
    win = sliding_window_view(x, (k, k), axis=(1, 2))  # (B, Ho, Wo, C, k, k)
    return np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3))


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, relu: bool = True, keep_cache: bool = True):
    """Valid stride-1 cross-correlation plus bias, then ReLU.

    Returns ``(out, cache)``; the cache feeds :func:`conv_backward` and is
    None when ``keep_cache`` is false.
    """
    k, _, c_in, c_out = w.shape
    bsz, h, wd, c = x.shape
    if c != c_in:
        raise ValueError(f"conv expects {c_in} input channels, got {c}")
    if h < k or wd < k:
        raise ValueError(f"input {h}x{wd} smaller than {k}x{k} kernel")
    cols = im2col(x, k)
    ho, wo = cols.shape[1], cols.shape[2]
    z = cols.reshape(-1, k * k * c_in) @ w.reshape(-1, c_out)
    z += b
    z = z.reshape(bsz, ho, wo, c_out)
    if relu:
        np.maximum(z, 0, out=z)
    if not keep_cache:
        return z, None
    return z, (cols, z > 0 if relu else None, x.shape)


def conv_backward(dout: np.ndarray, w: np.ndarray, cache, need_dx: bool = True):
    cols, active, x_shape = cache
    k, _, c_in, c_out = w.shape
    dz = dout * active if active is not None else dout
    dz2 = dz.reshape(-1, c_out)
    dw = (cols.reshape(-1, k * k * c_in).T @ dz2).reshape(w.shape)
    db = dz2.sum(axis=0)
    dx = None
    if need_dx:
        dcols = (dz2 @ w.reshape(-1, c_out).T).reshape(cols.shape)
        dx = kernels.col2im(dcols, x_shape[1], x_shape[2])
    return dx, dw, db


def maxpool_forward(x: np.ndarray, k: int, s: int):
    """Max over ``k x k`` windows at stride ``s``; returns ``(out, argmax)``.

    ``argmax`` holds the flat ``y * W + x`` input position of each maximum,
    the first in raster order on ties.
    """
    h, w = x.shape[1:3]
    if h < k or w < k or (h - k) % s or (w - k) % s:
        raise ValueError(f"pool {k}/{s} does not tile a {h}x{w} map")
    return kernels.maxpool_forward(np.ascontiguousarray(x), k, s)


def maxpool_values(x: np.ndarray, k: int, s: int) -> np.ndarray:
    """Same values as :func:`maxpool_forward` without the argmax bookkeeping."""
    b, h, w, c = x.shape
    if h < k or w < k or (h - k) % s or (w - k) % s:
        raise ValueError(f"pool {k}/{s} does not tile a {h}x{w} map")
    ho, wo = (h - k) // s + 1, (w - k) // s + 1
    if k == s:
        return x[:, :ho * k, :wo * k].reshape(b, ho, k, wo, k, c).max(axis=(2, 4))
    out = x[:, :(ho - 1) * s + 1:s, :(wo - 1) * s + 1:s].copy()
    for dy in range(k):
        for dx in range(k):
            np.maximum(out, x[:, dy:dy + (ho - 1) * s + 1:s, dx:dx + (wo - 1) * s + 1:s], out=out)
    return out


def maxpool_backward(dout: np.ndarray, argmax: np.ndarray, h: int, w: int) -> np.ndarray:
    return kernels.maxpool_backward(np.ascontiguousarray(dout), argmax, h, w)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# -- network ----------------------------------------------------------------

def _path_forward(net: TwoPathNetwork, path: str, x: np.ndarray, keep_cache: bool):
    p, a = net.params, net.arch
    x = np.asarray(x, dtype=net.dtype)
    if x.ndim != 4 or x.shape[1:] != (a.side, a.side, 3):
        raise ValueError(f"{path} patches must be (B, {a.side}, {a.side}, 3), got {x.shape}")
    if not keep_cache:
        c1, _ = conv_forward(x, p[f"{path}.conv1.w"], p[f"{path}.conv1.b"], keep_cache=False)
        m1 = maxpool_values(c1, a.pool1, a.stride1)
        c2, _ = conv_forward(m1, p[f"{path}.conv2.w"], p[f"{path}.conv2.b"], keep_cache=False)
        return maxpool_values(c2, a.pool2, a.stride2).reshape(len(x), -1), None
    c1, cache1 = conv_forward(x, p[f"{path}.conv1.w"], p[f"{path}.conv1.b"])
    m1, arg1 = maxpool_forward(c1, a.pool1, a.stride1)
    c2, cache2 = conv_forward(m1, p[f"{path}.conv2.w"], p[f"{path}.conv2.b"])
    m2, arg2 = maxpool_forward(c2, a.pool2, a.stride2)
    feats = m2.reshape(len(x), -1)
    cache = None
    if keep_cache:
        cache = dict(cache1=cache1, c1_shape=c1.shape, arg1=arg1, cache2=cache2,
                     c2_shape=c2.shape, arg2=arg2, m2_shape=m2.shape)
    return feats, cache


def path_features(net: TwoPathNetwork, path: str, x: np.ndarray) -> np.ndarray:
    """Flattened ``(B, F)`` features of one path for a batch of patches."""
    return _path_forward(net, path, x, keep_cache=False)[0]


def path_shapes(net: TwoPathNetwork, x: np.ndarray, path: str = "local") -> list[tuple[int, ...]]:
    """Per-sample activation shapes along one path (conv1, pool1, conv2, pool2)."""
    p, a = net.params, net.arch
    c1, _ = conv_forward(np.asarray(x, dtype=net.dtype), p[f"{path}.conv1.w"], p[f"{path}.conv1.b"])
    m1, _ = maxpool_forward(c1, a.pool1, a.stride1)
    c2, _ = conv_forward(m1, p[f"{path}.conv2.w"], p[f"{path}.conv2.b"])
    m2, _ = maxpool_forward(c2, a.pool2, a.stride2)
    return [t.shape[1:] for t in (c1, m1, c2, m2)]


def head_forward(net: TwoPathNetwork, feats: np.ndarray) -> np.ndarray:
    """Fusion + softmax on concatenated path features ``(B, F)``."""
    p = net.params
    h = np.maximum(feats @ p["fusion.w"] + p["fusion.b"], 0)
    return softmax(h @ p["out.w"] + p["out.b"])


def _forward(net, local, global_, keep_cache):
    inputs = {"local": local, "global": global_}
    feats, caches = [], {}
    for path in net.paths:
        if inputs[path] is None:
            raise ValueError(f"mode {net.mode!r} needs {path} patches")
        f, c = _path_forward(net, path, inputs[path], keep_cache)
        feats.append(f)
        caches[path] = c
    f = np.concatenate(feats, axis=1) if len(feats) > 1 else feats[0]
    p = net.params
    pre = f @ p["fusion.w"] + p["fusion.b"]
    h = np.maximum(pre, 0)
    probs = softmax(h @ p["out.w"] + p["out.b"])
    if keep_cache:
        caches.update(feats=f, pre=pre, hidden=h)
    return probs, caches


def forward(net: TwoPathNetwork, pair) -> tuple[float, float]:
    """``(p_normal, p_lesion)`` for a single :class:`~lesionseg.patches.PatchPair`."""
    probs = net.predict_proba(pair.local[None] if "local" in net.paths else None,
                              pair.global_[None] if "global" in net.paths else None)
    return float(probs[0, 0]), float(probs[0, 1])


def loss_and_gradients(net: TwoPathNetwork, local, global_, labels):
    """Mean softmax cross-entropy over the batch and its gradients.

    ``labels`` are 0 (normal) / 1 (lesion).  Returns ``(loss, grads)`` with
    ``grads`` keyed like ``net.params``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    if n == 0:
        raise ValueError("empty batch")
    probs, cache = _forward(net, local, global_, keep_cache=True)
    picked = probs[np.arange(n), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, PROB_FLOOR))))

    p, a = net.params, net.arch
    grads = {}
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1
    dlogits /= n
    h = cache["hidden"]
    grads["out.w"] = h.T @ dlogits
    grads["out.b"] = dlogits.sum(axis=0)
    dh = dlogits @ p["out.w"].T
    dpre = dh * (cache["pre"] > 0)
    grads["fusion.w"] = cache["feats"].T @ dpre
    grads["fusion.b"] = dpre.sum(axis=0)
    dfeats = dpre @ p["fusion.w"].T

    width = a.path_features
    for i, path in enumerate(net.paths):
        c = cache[path]
        dm2 = dfeats[:, i * width:(i + 1) * width].reshape(c["m2_shape"])
        dc2 = maxpool_backward(dm2, c["arg2"], c["c2_shape"][1], c["c2_shape"][2])
        dm1, grads[f"{path}.conv2.w"], grads[f"{path}.conv2.b"] = conv_backward(
            dc2, p[f"{path}.conv2.w"], c["cache2"])
        dc1 = maxpool_backward(dm1, c["arg1"], c["c1_shape"][1], c["c1_shape"][2])
        _, grads[f"{path}.conv1.w"], grads[f"{path}.conv1.b"] = conv_backward(
            dc1, p[f"{path}.conv1.w"], c["cache1"], need_dx=False)
    grads = {name: grads[name].astype(net.dtype, copy=False) for name in net.params}
    return loss, grads


# -- dense (whole-image) evaluation of one path ------------------------------

def _dilated_conv_relu(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int) -> np.ndarray:
    """Valid correlation of a ``(H, W, C)`` map with a dilated kernel, then ReLU."""
    k = w.shape[0]
    span = (k - 1) * dilation
    ho, wo = x.shape[0] - span, x.shape[1] - span
    out = np.empty((ho, wo, w.shape[3]), dtype=x.dtype)
    # row chunks bound the temporary size
    step = max(1, 2 ** 20 // max(wo, 1))
    for r0 in range(0, ho, step):
        r1 = min(ho, r0 + step)
        acc = np.zeros((r1 - r0, wo, w.shape[3]), dtype=x.dtype)
        for ky in range(k):
            for kx in range(k):
                ys, xs = r0 + ky * dilation, kx * dilation
                acc += x[ys:ys + r1 - r0, xs:xs + wo] @ w[ky, kx]
        out[r0:r1] = np.maximum(acc + b, 0)
    return out


def _dilated_max(x: np.ndarray, k: int, dilation: int) -> np.ndarray:
    span = (k - 1) * dilation
    ho, wo = x.shape[0] - span, x.shape[1] - span
    out = x[:ho, :wo].copy()
    for ky in range(k):
        for kx in range(k):
            np.maximum(out, x[ky * dilation:ky * dilation + ho, kx * dilation:kx * dilation + wo], out=out)
    return out


def dense_path_features(net: TwoPathNetwork, path: str, image: np.ndarray) -> np.ndarray:
    """Path features for every ``side x side`` window of a larger image.

    ``image`` is ``(H, W, 3)``; the result is ``(H - side + 1, W - side + 1, F)``
    where entry ``(u, v)`` equals the path features of the patch whose top-left
    corner is ``(u, v)``.  Overlapping windows share their convolutions, so
    each layer runs once over the whole image at full resolution, with pooling
    strides turned into dilations.
    """
    p, a = net.params, net.arch
    x = np.ascontiguousarray(image, dtype=net.dtype)
    c1 = _dilated_conv_relu(x, p[f"{path}.conv1.w"], p[f"{path}.conv1.b"], 1)
    m1 = _dilated_max(c1, a.pool1, 1)
    c2 = _dilated_conv_relu(m1, p[f"{path}.conv2.w"], p[f"{path}.conv2.b"], a.stride1)
    m2 = _dilated_max(c2, a.pool2, a.stride1)
    n_out = a.spatial_chain()[-1]
    step = a.stride1 * a.stride2
    oh, ow = x.shape[0] - a.side + 1, x.shape[1] - a.side + 1
    feats = np.empty((oh, ow, n_out, n_out, a.maps2), dtype=net.dtype)
    for qy in range(n_out):
        for qx in range(n_out):
            feats[:, :, qy, qx] = m2[qy * step:qy * step + oh, qx * step:qx * step + ow]
    return feats.reshape(oh, ow, -1)


# -- training ---------------------------------------------------------------

class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError(f"learning rate must be >= 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")


def train(samples, mode: str = "dual", sgd: SgdConfig | None = None, arch: Architecture | None = None,
          net: TwoPathNetwork | None = None, on_epoch=None):
    """Mini-batch SGD with momentum over a :class:`~lesionseg.patches.TrainingSet`.

    Batches are reduced serially in a fixed order, so a fixed seed gives
    bit-identical parameters.  Returns ``(net, per_epoch_mean_loss)``.
    ``on_epoch(epoch, loss)`` is called after every epoch.
    """
    sgd = sgd or SgdConfig()
    if len(samples) == 0:
        raise ValueError("no training samples")
    rng = np.random.default_rng([sgd.seed, 2])
    if net is None:
        net = TwoPathNetwork.initialize(arch, mode, np.random.default_rng([sgd.seed, 3]))
    else:
        net = net.copy()
    need_local = "local" in net.paths
    need_global = "global" in net.paths
    velocity = {k: np.zeros_like(v) for k, v in net.params.items()}
    lr = net.dtype.type(sgd.learning_rate)
    mu = net.dtype.type(sgd.momentum)
    trace = []
    for epoch in range(sgd.epochs):
        order = rng.permutation(len(samples))
        total, seen = 0.0, 0
        for start in range(0, len(order), sgd.batch_size):
            idx = order[start:start + sgd.batch_size]
            loc, glo, labels = samples.batch(idx, local=need_local, global_=need_global)
            loss, grads = loss_and_gradients(net, loc, glo, labels)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss {loss} at epoch {epoch + 1}, batch {start // sgd.batch_size + 1}; "
                    f"try a smaller learning rate (current {sgd.learning_rate})")
            for name, g in grads.items():
                v = velocity[name]
                v *= mu
                v -= lr * g
                net.params[name] += v
            total += loss * len(idx)
            seen += len(idx)
        trace.append(total / seen)
        log.info("epoch %d/%d loss %.6f", epoch + 1, sgd.epochs, trace[-1])
        if on_epoch is not None:
            on_epoch(epoch + 1, trace[-1])
    return net, trace


# -- model files ------------------------------------------------------------
#
# Layout (little-endian):
#   8s  magic  b"LSEGCNN\0"
#   I   format version
#   B   mode code (0 dual, 1 local_only, 2 global_only)
#   11I architecture constants, Architecture.as_tuple() order
#   float32 blobs for every tensor in param_shapes() order, row-major
#   I   CRC-32 of everything before it

MAGIC = b"LSEGCNN\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIB11I")


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    pass


def model_bytes(net: TwoPathNetwork) -> bytes:
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, MODES.index(net.mode), *net.arch.as_tuple())
    body = b"".join(np.ascontiguousarray(v, dtype="<f4").tobytes() for v in net.params.values())
    data = head + body
    return data + struct.pack("<I", zlib.crc32(data))


def save_model(net: TwoPathNetwork, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model_bytes(net))


def parse_model(data: bytes, source: str = "<bytes>") -> TwoPathNetwork:
    if len(data) < 12 or data[:8] != MAGIC:
        raise ModelFormatError(f"{source}: not a model file (bad magic)")
    version = struct.unpack_from("<I", data, 8)[0]
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"{source}: model format version {version} is not supported (this build reads version {FORMAT_VERSION})")
    if len(data) < _HEADER.size + 4:
        raise ModelFormatError(f"{source}: corrupt model file (truncated header)")
    _, _, mode_code, *consts = _HEADER.unpack_from(data, 0)
    if mode_code >= len(MODES):
        raise ModelFormatError(f"{source}: corrupt model file (mode code {mode_code})")
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != crc:
        raise ModelFormatError(f"{source}: corrupt model file (checksum mismatch or truncation)")
    try:
        arch = Architecture(*consts)
    except (ValueError, TypeError) as exc:
        raise ModelFormatError(f"{source}: corrupt model file ({exc})") from exc
    mode = MODES[mode_code]
    params, offset = {}, _HEADER.size
    for name, shape in param_shapes(arch, mode).items():
        count = int(np.prod(shape))
        end = offset + 4 * count
        if end > len(data) - 4:
            raise ModelFormatError(f"{source}: corrupt model file (truncated at {name})")
        params[name] = np.frombuffer(data, dtype="<f4", count=count, offset=offset).astype(np.float32).reshape(shape)
        offset = end
    if offset != len(data) - 4:
        raise ModelFormatError(f"{source}: corrupt model file ({len(data) - 4 - offset} trailing bytes)")
    return TwoPathNetwork(arch, mode, params)


def load_model(path) -> TwoPathNetwork:
    with open(path, "rb") as fh:
        return parse_model(fh.read(), str(path))
