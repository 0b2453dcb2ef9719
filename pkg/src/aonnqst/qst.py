"""Neural-network state tomography experiments.

A dataset pairs the Pauli expectation vector of a Haar-random pure state
with its global-phase-fixed amplitude parameters.  Networks are
``m -> 32d -> 32d -> 32d -> 32d -> d`` with Leaky ReLU hidden layers, where
``m`` is the number of measured Pauli strings and ``d = 2 * 2**n - 1``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .nn import Identity, LeakyReLU, Network, TrainConfig, forward, init_network, train
from .paulis import EXACT, PauliSet, ShotModel, measure_amplitudes, sample_pauli_set, uda_set
from .quantum import (
    DEGENERATE_PIVOT,
    amplitudes_from_params,
    fidelity_batch,
    haar_random_amplitudes,
    n_params,
    params_from_amplitudes,
)

log = logging.getLogger(__name__)

TEST_SEED_OFFSET = 10**6
HIDDEN_LAYERS = 4
WIDTH_FACTOR = 32

DEFAULT_M = {1: [1, 2, 3], 2: [6, 8, 10, 12], 3: [20, 25, 30, 35, 40]}
DEFAULT_TRAIN_COUNT = {1: 20_000, 2: 20_000, 3: 50_000}
PAPER_TRAIN_COUNT = {1: 20_000, 2: 20_000, 3: 150_000}

QST_TRAIN = TrainConfig(learning_rate=1e-3, iterations=300, batch_size=256, seed=0)


@dataclass
class QstDataset:
    n: int
    pauli_set: PauliSet
    inputs: np.ndarray  # (count, m) expectation values
    targets: np.ndarray  # (count, d) amplitude parameters
    amplitudes: np.ndarray  # (count, 2**n) ground-truth states
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.inputs)

    @property
    def header(self) -> list:
        return self.pauli_set.labels + [f"p{k}" for k in range(self.targets.shape[1])]

    def to_csv(self, path) -> None:
        """One row per record: Pauli expectation columns, then parameter slots."""
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for x, y in zip(self.inputs, self.targets):
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in y])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path, n: int | None = None) -> "QstDataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=np.float64)
        m = sum(1 for h in header if not h.startswith("p"))
        ps = PauliSet.from_labels(header[:m])
        inputs, targets = body[:, :m], body[:, m:]
        return cls(ps.n, ps, inputs, targets, amplitudes_from_params(targets))


def _draw_states(n, count, rng):
    # resample draws whose first amplitude is too small to fix the global phase
    amps = haar_random_amplitudes(n, count, rng)
    bad = np.abs(amps[:, 0]) < DEGENERATE_PIVOT
    while np.any(bad):
        amps[bad] = haar_random_amplitudes(n, int(bad.sum()), rng)
        bad = np.abs(amps[:, 0]) < DEGENERATE_PIVOT
    return amps


def generate_dataset(n: int, ps: PauliSet, count: int, seed=0, noise: ShotModel = EXACT) -> QstDataset:
    """``count`` Haar-random states measured on ``ps``; reproducible per seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if ps.n != n:
        raise ValueError(f"Pauli set is for {ps.n} qubits, asked for {n}")
    rng = np.random.default_rng(seed)
    amps = _draw_states(n, count, rng)
    noise_seed = int(rng.integers(2**63))
    inputs = measure_amplitudes(amps, ps, noise, noise_seed)
    targets = params_from_amplitudes(amps)
    prov = {"n": n, "paulis": ps.labels, "count": count, "seed": seed, "shots": noise.shots}
    return QstDataset(n, ps, inputs, targets, amps, prov)


def build_qst_network(m: int, n: int, seed=0, dtype=np.float64) -> Network:
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    d = n_params(n)
    widths = [m] + [WIDTH_FACTOR * d] * HIDDEN_LAYERS + [d]
    acts = [LeakyReLU()] * HIDDEN_LAYERS + [Identity()]
    return init_network(widths, acts, nonneg_constrained=False, seed=seed, dtype=dtype)


def reconstruct(net: Network, inputs) -> np.ndarray:
    """Predicted normalized amplitudes; an all-zero output gives a zero row."""
    return amplitudes_from_params(np.asarray(forward(net, inputs), dtype=np.float64))


def evaluate(net: Network, data: QstDataset) -> np.ndarray:
    """Per-sample fidelity of reconstructions against the true states."""
    return fidelity_batch(data.amplitudes, reconstruct(net, data.inputs))


@dataclass
class ExperimentResult:
    n: int
    m: int
    set_id: str
    set_seed: int | None
    paulis: list
    mean_fidelity: float
    std_fidelity: float
    fidelities: np.ndarray = field(repr=False)
    loss_trace: list = field(default_factory=list, repr=False)

    @classmethod
    def from_fidelities(cls, n, ps, set_id, set_seed, fids, loss_trace=()):
        fids = np.asarray(fids, dtype=np.float64)
        return cls(n, len(ps), set_id, set_seed, ps.labels, float(fids.mean()), float(fids.std()),
                   fids, list(loss_trace))


@dataclass(frozen=True)
class QstConfig:
    train_count: int = 20_000
    test_count: int | None = None
    seed: int = 0
    train: TrainConfig = QST_TRAIN
    shots: int | None = None
    dtype: str = "float32"

    @property
    def resolved_test_count(self) -> int:
        if self.test_count is not None:
            return self.test_count
        return max(1, min(2000, self.train_count // 10))


def train_qst(n: int, ps: PauliSet, cfg: QstConfig = QstConfig(), set_id="", set_seed=None):
    """Train on fresh data and score on a disjoint test set.

    Returns ``(network, ExperimentResult)``.  The test set uses seed
    ``cfg.seed + 10**6``.
    """
    noise = ShotModel(cfg.shots)
    train_data = generate_dataset(n, ps, cfg.train_count, cfg.seed, noise)
    test_data = generate_dataset(n, ps, cfg.resolved_test_count, cfg.seed + TEST_SEED_OFFSET, noise)
    net = build_qst_network(len(ps), n, seed=cfg.train.seed, dtype=np.dtype(cfg.dtype))
    result = train(net, train_data.inputs, train_data.targets, cfg.train)
    fids = evaluate(result.network, test_data)
    res = ExperimentResult.from_fidelities(n, ps, set_id or "-".join(ps.labels), set_seed, fids, result.loss_trace)
    log.info("n=%d m=%d set=%s mean fidelity %.5f", n, len(ps), res.set_id, res.mean_fidelity)
    return result.network, res


@dataclass(frozen=True)
class Figure2Config:
    """Settings for the fidelity-versus-m sweep.

    ``sets`` defaults to 3 random sets per ``m`` (1 for a single qubit,
    where ``m = 3`` admits only one set).  ``set_seed`` of the ``k``-th set
    is ``seed + k`` at every ``m``, so sets at larger ``m`` extend those at
    smaller ``m``.
    """

    n: int
    m_values: tuple | None = None
    sets: int | None = None
    include_uda: bool | None = None
    train_count: int | None = None
    test_count: int | None = None
    seed: int = 0
    paper_scale: bool = False
    train: TrainConfig = QST_TRAIN
    shots: int | None = None
    jobs: int = 1

    def resolved(self) -> "Figure2Config":
        n = self.n
        if n not in DEFAULT_M:
            raise ValueError(f"n must be 1, 2 or 3, got {n}")
        counts = PAPER_TRAIN_COUNT if self.paper_scale else DEFAULT_TRAIN_COUNT
        return replace(
            self,
            m_values=tuple(self.m_values or DEFAULT_M[n]),
            sets=self.sets or (1 if n == 1 else 3),
            include_uda=(n in (2, 3)) if self.include_uda is None else self.include_uda,
            train_count=self.train_count or counts[n],
        )

    def qst_config(self) -> QstConfig:
        return QstConfig(self.train_count, self.test_count, self.seed, self.train, self.shots)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train"] = asdict(self.train)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "Figure2Config":
        data = dict(data)
        if "train" in data and isinstance(data["train"], dict):
            data["train"] = TrainConfig(**data["train"])
        if data.get("m_values") is not None:
            data["m_values"] = tuple(data["m_values"])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "Figure2Config":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def figure2_cells(cfg: Figure2Config) -> list:
    """``(set_id, set_seed, PauliSet)`` for every cell of the sweep, in output order."""
    cfg = cfg.resolved()
    cells = []
    for m in cfg.m_values:
        for k in range(cfg.sets):
            seed = cfg.seed + k
            cells.append((f"random-{k}", seed, sample_pauli_set(cfg.n, m, seed)))
    if cfg.include_uda:
        cells.append(("uda", None, uda_set(cfg.n)))
    return cells


def _run_cell(args):
    n, qcfg, set_id, set_seed, ps = args
    return train_qst(n, ps, qcfg, set_id, set_seed)[1]


def figure2_experiment(cfg: Figure2Config) -> list:
    """Train and score every cell; results come back in :func:`figure2_cells` order."""
    cfg = cfg.resolved()
    qcfg = cfg.qst_config()
    jobs = [(cfg.n, qcfg, set_id, seed, ps) for set_id, seed, ps in figure2_cells(cfg)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_run_cell, jobs))
    return [_run_cell(j) for j in jobs]


RESULT_COLUMNS = ["n", "m", "set_id", "set_seed", "mean_fidelity", "std_fidelity"]
AGGREGATE_COLUMNS = ["n", "m", "kind", "sets", "mean_fidelity", "std_over_sets", "mean_sample_std"]


def results_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        seed = "" if r.set_seed is None else r.set_seed
        w.writerow([r.n, r.m, r.set_id, seed, repr(r.mean_fidelity), repr(r.std_fidelity)])
    return buf.getvalue()


def aggregate(results) -> list:
    """Per-(m, kind) mean over sets, with the spread across sets as error bar."""
    groups = {}
    for r in results:
        kind = "uda" if r.set_id == "uda" else "random"
        groups.setdefault((r.n, r.m, kind), []).append(r)
    rows = []
    for (n, m, kind), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        means = np.array([r.mean_fidelity for r in rs])
        rows.append({
            "n": n,
            "m": m,
            "kind": kind,
            "sets": len(rs),
            "mean_fidelity": float(means.mean()),
            "std_over_sets": float(means.std()),
            "mean_sample_std": float(np.mean([r.std_fidelity for r in rs])),
        })
    return rows


def aggregate_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_COLUMNS)
    for row in aggregate(results):
        w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in AGGREGATE_COLUMNS])
    return buf.getvalue()


def write_figure2(results, outdir, cfg: Figure2Config | None = None) -> dict:
    """Write ``results.csv``, ``aggregate.csv`` and (optionally) ``config.json``."""
    os.makedirs(outdir, exist_ok=True)
    paths = {"results": os.path.join(outdir, "results.csv"), "aggregate": os.path.join(outdir, "aggregate.csv")}
    _atomic_write(paths["results"], results_csv(results))
    _atomic_write(paths["aggregate"], aggregate_csv(results))
    if cfg is not None:
        paths["config"] = os.path.join(outdir, "config.json")
        _atomic_write(paths["config"], json.dumps(cfg.resolved().to_dict(), indent=2, sort_keys=True))
    return paths


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
