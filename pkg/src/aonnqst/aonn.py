"""Single-qubit phase tomography with a positive-valued optical network.

States ``(|H> + e^{i theta}|V>)/sqrt(2)`` with ``theta`` in ``[0, pi/2]``
are measured in X, Y, Z; the network sees ``1 - <sigma>`` so every input is
nonnegative and regresses ``theta`` directly.  The network is 3 -> 20 -> 1
with EIT hidden neurons, nonnegative weights and zero biases.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .nn import (
    EIT,
    EitParams,
    Identity,
    Network,
    TrainConfig,
    forward,
    init_network,
    train,
)
from .paulis import sample_counts
from .polarization import measure_xyz, prepare_state
from .quantum import SIGMA_X, SIGMA_Y, SIGMA_Z, density_from_bloch

THETA_MAX = np.pi / 2
HIDDEN = 20
SOURCES = ("optics", "circuit")
CIRCUIT_SHOTS = 8192

AONN_TRAIN = TrainConfig(learning_rate=0.002, iterations=10000, batch_size=None, seed=0)


@dataclass(frozen=True)
class PhaseSample:
    theta: float
    c: np.ndarray  # (<X>, <Y>, <Z>)
    source: str


@dataclass
class AonnModel:
    network: Network
    loss_trace: list

    def __post_init__(self):
        if self.network.widths != [3, HIDDEN, 1] or not self.network.nonneg_constrained:
            raise ValueError("AONN must be a nonnegative-constrained 3-20-1 network")

    def predict(self, c) -> np.ndarray:
        return predict_theta(self, c)


def aonn_input_transform(c) -> np.ndarray:
    """Map expectation values in ``[-1, 1]`` to optical inputs ``1 - c`` in ``[0, 2]``."""
    c = np.asarray(c, dtype=np.float64)
    if np.any(np.abs(c) > 1 + 1e-12):
        raise ValueError("expectation values must lie in [-1, 1]")
    return np.clip(1.0 - c, 0.0, 2.0)


def circuit_state(theta: float) -> np.ndarray:
    """Amplitudes of ``RZ(theta) H |0>`` with the global phase removed."""
    hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    rz = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    psi = rz @ hadamard @ np.array([1.0, 0.0])
    return psi * np.exp(-1j * np.angle(psi[0]))


def _circuit_xyz(theta: float) -> np.ndarray:
    psi = circuit_state(theta)
    return np.array([np.vdot(psi, m @ psi).real for m in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def make_phase_dataset(count: int, seed=None, source: str = "optics", shots=None,
                       extinction: float = 0.0) -> list:
    """Draw ``theta ~ U(0, pi/2)`` and measure X, Y, Z.

    ``optics`` runs the waveplate/PBS model (exact unless ``shots`` given);
    ``circuit`` evaluates the H-then-RZ circuit with finite shots
    (default 8192).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}, got {source!r}")
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, THETA_MAX, size=count)
    if source == "optics":
        exact = np.array([measure_xyz(prepare_state(t), extinction) for t in thetas])
    else:
        exact = np.array([_circuit_xyz(t) for t in thetas])
        shots = CIRCUIT_SHOTS if shots is None else shots
    c = exact if shots is None else sample_counts(exact, int(shots), rng)
    return [PhaseSample(float(t), ci, source) for t, ci in zip(thetas, c)]


def build_aonn(seed=None, eit: EitParams = EitParams()) -> Network:
    return init_network([3, HIDDEN, 1], [EIT(eit), Identity()], nonneg_constrained=True, seed=seed)


def train_aonn(samples, cfg: TrainConfig = AONN_TRAIN, eit: EitParams = EitParams(),
               init_seed=None) -> AonnModel:
    """Fit ``theta`` from transformed measurements; full-batch Adam by default."""
    if not samples:
        raise ValueError("empty training set")
    x = aonn_input_transform(np.array([s.c for s in samples]))
    y = np.array([s.theta for s in samples])
    net = build_aonn(cfg.seed if init_seed is None else init_seed, eit)
    result = train(net, x, y, cfg)
    return AonnModel(result.network, result.loss_trace)


def predict_theta(model: AonnModel, c):
    """Predicted phase(s) in radians, clamped to ``[0, pi/2]``."""
    c = np.asarray(c, dtype=np.float64)
    out = forward(model.network, aonn_input_transform(np.atleast_2d(c)))[:, 0]
    out = np.clip(out, 0.0, THETA_MAX)
    return float(out[0]) if c.ndim == 1 else out


def theta_oracle(c) -> np.ndarray:
    """Analytic phase ``arccos <X>`` for states on the X-Y quarter circle."""
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    return np.arccos(np.clip(c[:, 0], -1.0, 1.0))


def rho_from_theta(theta: float) -> np.ndarray:
    if not 0.0 <= theta <= THETA_MAX:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    return density_from_bloch((np.cos(theta), np.sin(theta), 0.0))


def perturb_weights(model: AonnModel, rel: float = 0.05, seed=None) -> AonnModel:
    """Multiply every weight by an independent factor in ``[1 - rel, 1 + rel]``."""
    rng = np.random.default_rng(seed)
    net = model.network.copy()
    for layer in net.layers:
        layer.weights *= rng.uniform(1 - rel, 1 + rel, size=layer.weights.shape)
    return AonnModel(net, list(model.loss_trace))


def write_phase_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "x", "y", "z", "source"])
        for s in samples:
            w.writerow([repr(s.theta), *(repr(float(v)) for v in s.c), s.source])


def read_phase_csv(path) -> list:
    with open(path, newline="") as fh:
        return [
            PhaseSample(float(r["theta"]), np.array([float(r["x"]), float(r["y"]), float(r["z"])]), r["source"])
            for r in csv.DictReader(fh)
        ]


def write_prediction_csv(samples, predictions, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_true", "theta_pred", "source"])
        for s, p in zip(samples, predictions):
            w.writerow([repr(s.theta), repr(float(p)), s.source])
