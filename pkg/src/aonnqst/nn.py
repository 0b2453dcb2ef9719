"""Small dense feed-forward networks trained with Adam on mean squared error.

Besides the usual Leaky ReLU there is an EIT activation: the probe
transmission of an atomic medium as a function of coupling intensity,

    I_out = I_in * exp(-OD * 4 g12 g13 / (Omega_c**2 + 4 g12 g13)),

with ``Omega_c**2 = input_gain * x``.  Networks flagged ``nonneg_constrained``
emulate optical hardware: all weights are kept >= 0 and biases pinned to 0,
so nonnegative inputs give nonnegative signals everywhere.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; ``loss_trace`` holds the values seen so far."""

    def __init__(self, message, loss_trace):
        super().__init__(message)
        self.loss_trace = list(loss_trace)


@dataclass(frozen=True)
class EitParams:
    od: float = 4.0
    gamma12: float = 0.1
    gamma13: float = 1.0
    probe_in: float = 1.0
    input_gain: float = 10.0

    def __post_init__(self):
        for name in ("od", "gamma12", "gamma13", "probe_in", "input_gain"):
            if not getattr(self, name) > 0:
                raise ValueError(f"EIT parameter {name} must be > 0, got {getattr(self, name)}")

    @property
    def saturation(self) -> float:
        """Coupling intensity ``4 g12 g13`` at which the exponent is halved."""
        return 4.0 * self.gamma12 * self.gamma13

    @property
    def convex_limit(self) -> float:
        """Largest ``x`` up to which the activation is convex (0 when ``od <= 2``)."""
        return max(self.od / 2 - 1, 0.0) * self.saturation / self.input_gain


def eit_activation(x, p: EitParams = EitParams()):
    """EIT probe transmission for nonnegative pre-activation ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("EIT activation is only defined for nonnegative input")
    k = p.saturation
    out = p.probe_in * np.exp(-p.od * k / (p.input_gain * x + k))
    return out if out.ndim else float(out)


def leaky_relu(x, slope: float = 0.01):
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, x, slope * x)
    return out if out.ndim else float(out)


class Identity:
    name = "identity"

    def __call__(self, z):
        return z

    def grad(self, z, a):
        return np.ones_like(z)

    def to_dict(self):
        return {}


@dataclass(frozen=True)
class LeakyReLU:
    slope: float = 0.01
    name = "leaky_relu"

    def __post_init__(self):
        if not 0 < self.slope < 1:
            raise ValueError(f"Leaky ReLU slope must be in (0, 1), got {self.slope}")

    def __call__(self, z):
        return np.where(z >= 0, z, self.slope * z)

    def grad(self, z, a):
        return np.where(z >= 0, 1.0, self.slope).astype(z.dtype)

    def to_dict(self):
        return {"slope": self.slope}


@dataclass(frozen=True)
class EIT:
    params: EitParams = EitParams()
    name = "eit"

    def __call__(self, z):
        p = self.params
        k = p.saturation
        return p.probe_in * np.exp(-p.od * k / (p.input_gain * z + k))

    def grad(self, z, a):
        p = self.params
        k = p.saturation
        return a * p.od * k * p.input_gain / (p.input_gain * z + k) ** 2

    def to_dict(self):
        p = self.params
        return {
            "od": p.od,
            "gamma12": p.gamma12,
            "gamma13": p.gamma13,
            "probe_in": p.probe_in,
            "input_gain": p.input_gain,
        }


def activation_from_dict(name: str, params: dict):
    if name == "identity":
        return Identity()
    if name == "leaky_relu":
        return LeakyReLU(**params)
    if name == "eit":
        return EIT(EitParams(**params))
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: object = field(default_factory=Identity)

    @property
    def shape(self):
        return self.weights.shape


@dataclass
class Network:
    layers: list
    nonneg_constrained: bool = False

    def __post_init__(self):
        for a, b in zip(self.layers, self.layers[1:]):
            if b.weights.shape[1] != a.weights.shape[0]:
                raise ValueError(
                    f"layer widths do not chain: {a.weights.shape} -> {b.weights.shape}"
                )
        for layer in self.layers:
            if layer.bias.shape != (layer.weights.shape[0],):
                raise ValueError("bias length must equal layer output width")

    @property
    def widths(self) -> list:
        return [self.layers[0].weights.shape[1]] + [l.weights.shape[0] for l in self.layers]

    @property
    def dtype(self):
        return self.layers[0].weights.dtype

    def copy(self) -> "Network":
        return Network(
            [Layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers],
            self.nonneg_constrained,
        )

    def __call__(self, x):
        return forward(self, x)

    def to_dict(self) -> dict:
        return {
            "layers": [
                {
                    "rows": int(l.weights.shape[0]),
                    "cols": int(l.weights.shape[1]),
                    "weights": l.weights.astype(np.float64).ravel().tolist(),
                    "bias": l.bias.astype(np.float64).tolist(),
                    "activation": l.activation.name,
                    "activation_params": l.activation.to_dict(),
                }
                for l in self.layers
            ],
            "nonneg_constrained": self.nonneg_constrained,
        }

    @classmethod
    def from_dict(cls, data: dict, dtype=np.float64) -> "Network":
        layers = []
        for d in data["layers"]:
            w = np.asarray(d["weights"], dtype=dtype).reshape(d["rows"], d["cols"])
            b = np.asarray(d["bias"], dtype=dtype)
            layers.append(Layer(w, b, activation_from_dict(d["activation"], d["activation_params"])))
        return cls(layers, bool(data["nonneg_constrained"]))


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_dict(), fh)


def load_network(path, dtype=np.float64) -> Network:
    with open(path) as fh:
        return Network.from_dict(json.load(fh), dtype=dtype)


def write_loss_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "mse"])
        for i, v in enumerate(trace, start=1):
            w.writerow([i, repr(float(v))])


def init_network(widths, activations, nonneg_constrained=False, seed=None, dtype=np.float64) -> Network:
    """Randomly initialized dense network.

    ``activations`` is one activation per layer (``len(widths) - 1`` of them).
    Weights are uniform in ``[0, 1/sqrt(fan_in)]`` for constrained nets and
    ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` otherwise; biases start at zero.
    """
    if len(activations) != len(widths) - 1:
        raise ValueError("need exactly one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(widths[:-1], widths[1:], activations):
        bound = 1.0 / math.sqrt(fan_in)
        low = 0.0 if nonneg_constrained else -bound
        w = rng.uniform(low, bound, size=(fan_out, fan_in)).astype(dtype)
        layers.append(Layer(w, np.zeros(fan_out, dtype=dtype), act))
    return Network(layers, nonneg_constrained)


def _forward_cache(net: Network, x: np.ndarray):
    zs, acts = [], [x]
    a = x
    for layer in net.layers:
        z = a @ layer.weights.T
        z += layer.bias
        if net.nonneg_constrained and isinstance(layer.activation, EIT) and np.any(z < 0):
            raise ValueError("negative pre-activation inside a nonnegative-constrained network")
        a = layer.activation(z)
        zs.append(z)
        acts.append(a)
    return zs, acts


def forward(net: Network, x) -> np.ndarray:
    """Apply the network to one input vector or a batch of row vectors."""
    x = np.asarray(x, dtype=net.dtype)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != net.widths[0]:
        raise ValueError(f"input width {xb.shape[1]} does not match network input {net.widths[0]}")
    out = _forward_cache(net, xb)[1][-1]
    return out[0] if single else out


def mse(pred, target) -> float:
    return float(np.mean((np.asarray(pred) - np.asarray(target)) ** 2))


def loss_and_grads(net: Network, x: np.ndarray, y: np.ndarray):
    """MSE over all entries and its gradients ``[(dW, db), ...]`` per layer."""
    zs, acts = _forward_cache(net, x)
    diff = acts[-1] - y
    loss = float(np.mean(diff**2))
    delta = diff * (2.0 / diff.size)
    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        delta = delta * layer.activation.grad(zs[i], acts[i + 1])
        grads[i] = (delta.T @ acts[i], delta.sum(axis=0))
        if i:
            delta = delta @ layer.weights
    return loss, grads


def project_nonnegative(net: Network) -> Network:
    """Copy of ``net`` with negative weights clipped to zero and biases zeroed."""
    out = net.copy()
    for layer in out.layers:
        np.maximum(layer.weights, 0, out=layer.weights)
        layer.bias[:] = 0
    return out


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings.

    ``iterations`` counts epochs when ``batch_size`` is set and full-batch
    gradient steps when it is ``None``.  ``lr_final`` enables a cosine decay
    of the learning rate from ``learning_rate`` down to ``lr_final``.
    """

    learning_rate: float = 1e-3
    iterations: int = 300
    batch_size: int | None = 256
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    lr_final: float | None = None

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1 or None")


@dataclass
class TrainResult:
    network: Network
    loss_trace: list


class _Adam:
    def __init__(self, net, cfg):
        self.cfg = cfg
        self.t = 0
        self.m = [[np.zeros_like(l.weights), np.zeros_like(l.bias)] for l in net.layers]
        self.v = [[np.zeros_like(l.weights), np.zeros_like(l.bias)] for l in net.layers]

    def step(self, net, grads, lr):
        c = self.cfg
        self.t += 1
        corr1 = 1 - c.beta1**self.t
        corr2 = 1 - c.beta2**self.t
        for layer, g, m, v in zip(net.layers, grads, self.m, self.v):
            params = (layer.weights, layer.bias)
            for k in range(2):
                if k == 1 and net.nonneg_constrained:
                    continue
                m[k] = c.beta1 * m[k] + (1 - c.beta1) * g[k]
                v[k] = c.beta2 * v[k] + (1 - c.beta2) * g[k] ** 2
                param = params[k]
                param -= (lr / corr1) * m[k] / (np.sqrt(v[k] / corr2) + c.epsilon)
            if net.nonneg_constrained:
                np.maximum(layer.weights, 0, out=layer.weights)


def _lr_at(cfg: TrainConfig, it: int) -> float:
    if cfg.lr_final is None or cfg.iterations == 1:
        return cfg.learning_rate
    frac = it / (cfg.iterations - 1)
    return cfg.lr_final + 0.5 * (cfg.learning_rate - cfg.lr_final) * (1 + math.cos(math.pi * frac))


def train(net: Network, inputs, targets, cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Minimize MSE with Adam.  Returns a trained copy and one loss per iteration.

    Constrained networks are projected back onto ``weights >= 0`` after
    every step and never update their (zero) biases.
    """
    net = project_nonnegative(net) if net.nonneg_constrained else net.copy()
    x = np.asarray(inputs, dtype=net.dtype)
    y = np.asarray(targets, dtype=net.dtype)
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim != 2 or len(x) == 0 or len(x) != len(y):
        raise ValueError("inputs and targets must be nonempty with matching row counts")
    if x.shape[1] != net.widths[0] or y.shape[1] != net.widths[-1]:
        raise ValueError(f"data shapes {x.shape}, {y.shape} do not match network {net.widths}")

    rng = np.random.default_rng(cfg.seed)
    opt = _Adam(net, cfg)
    trace = []
    count = len(x)
    for it in range(cfg.iterations):
        lr = _lr_at(cfg, it)
        if cfg.batch_size is None or cfg.batch_size >= count:
            loss, grads = loss_and_grads(net, x, y)
            opt.step(net, grads, lr)
        else:
            perm = rng.permutation(count)
            total = 0.0
            for start in range(0, count, cfg.batch_size):
                idx = perm[start : start + cfg.batch_size]
                batch_loss, grads = loss_and_grads(net, x[idx], y[idx])
                opt.step(net, grads, lr)
                total += batch_loss * len(idx)
            loss = total / count
        if not math.isfinite(loss):
            trace.append(loss)
            raise TrainingDivergedError(f"non-finite loss at iteration {it + 1}", trace)
        trace.append(loss)
    return TrainResult(net, trace)


@dataclass
class GradientCheckReport:
    max_rel_error: float
    tolerance: float
    analytic: list
    numeric: list

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def numerical_gradient_check(net: Network, x, y, tolerance: float = 1e-4, h: float = 1e-5,
                             floor: float = 1e-6) -> GradientCheckReport:
    """Compare backprop gradients of the MSE with central finite differences.

    Relative error per parameter is ``|a - n| / max(|a|, |n|, floor)``;
    the floor keeps analytically-zero gradients from dividing by zero.
    Works in float64 regardless of the network dtype.
    """
    net = Network(
        [Layer(l.weights.astype(np.float64), l.bias.astype(np.float64), l.activation) for l in net.layers],
        net.nonneg_constrained,
    )
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    _, grads = loss_and_grads(net, x, y)
    analytic, numeric = [], []
    worst = 0.0
    for layer, (gw, gb) in zip(net.layers, grads):
        for param, g in ((layer.weights, gw), (layer.bias, gb)):
            num = np.zeros_like(param)
            flat = param.reshape(-1)
            nflat = num.reshape(-1)
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + h
                lp = mse(_forward_cache(net, x)[1][-1], y)
                flat[k] = orig - h
                lm = mse(_forward_cache(net, x)[1][-1], y)
                flat[k] = orig
                nflat[k] = (lp - lm) / (2 * h)
            rel = np.abs(g - num) / np.maximum(np.maximum(np.abs(g), np.abs(num)), floor)
            if rel.size:
                worst = max(worst, float(rel.max()))
            analytic.append(g)
            numeric.append(num)
    return GradientCheckReport(worst, tolerance, analytic, numeric)
