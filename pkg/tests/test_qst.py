import json

import numpy as np
import pytest

from aonnqst.nn import TrainConfig
from aonnqst.paulis import ShotModel, enumerate_paulis, measure_amplitudes, sample_pauli_set, uda_set
from aonnqst.qst import (
    TEST_SEED_OFFSET,
    ExperimentResult,
    Figure2Config,
    QstConfig,
    QstDataset,
    aggregate,
    build_qst_network,
    figure2_cells,
    figure2_experiment,
    generate_dataset,
    results_csv,
    train_qst,
    write_figure2,
)
from aonnqst.quantum import amplitudes_from_params

QUICK = TrainConfig(learning_rate=1e-3, iterations=3, batch_size=64, seed=0)


def test_single_qubit_inputs_lie_on_bloch_sphere():
    data = generate_dataset(1, enumerate_paulis(1), 1000, seed=3)
    assert len(data) == 1000
    np.testing.assert_allclose(np.linalg.norm(data.inputs, axis=1), 1, atol=1e-9)


def test_dataset_shapes():
    data = generate_dataset(2, uda_set(2), 500, seed=1)
    assert data.inputs.shape == (500, 10) and data.targets.shape == (500, 7)
    assert data.provenance["seed"] == 1 and data.provenance["paulis"] == uda_set(2).labels


def test_noise_free_dataset_is_self_consistent():
    ps = uda_set(3)
    data = generate_dataset(3, ps, 300, seed=2)
    remeasured = measure_amplitudes(amplitudes_from_params(data.targets), ps)
    np.testing.assert_allclose(remeasured, data.inputs, atol=1e-9)
    assert np.all(data.targets[:, 0] > 0)


def test_dataset_csv_is_deterministic_and_round_trips(tmp_path):
    ps = sample_pauli_set(2, 6, 0)
    a = generate_dataset(2, ps, 50, seed=9)
    b = generate_dataset(2, ps, 50, seed=9)
    assert a.csv_text() == b.csv_text()
    a.to_csv(tmp_path / "d.csv")
    back = QstDataset.from_csv(tmp_path / "d.csv")
    assert back.pauli_set == ps
    np.testing.assert_array_equal(back.inputs, a.inputs)
    np.testing.assert_array_equal(back.targets, a.targets)
    assert (tmp_path / "d.csv").read_text().splitlines()[0].split(",")[-1] == "p6"


def test_noisy_dataset_differs_from_exact():
    ps = uda_set(2)
    exact = generate_dataset(2, ps, 20, seed=4)
    noisy = generate_dataset(2, ps, 20, seed=4, noise=ShotModel(100))
    np.testing.assert_array_equal(exact.targets, noisy.targets)
    assert not np.array_equal(exact.inputs, noisy.inputs)


def test_dataset_validation():
    with pytest.raises(ValueError):
        generate_dataset(2, uda_set(2), 0)
    with pytest.raises(ValueError):
        generate_dataset(3, uda_set(2), 5)


@pytest.mark.parametrize("m,n,widths", [(3, 1, [3, 96, 96, 96, 96, 3]), (10, 2, [10] + [224] * 4 + [7]),
                                        (35, 3, [35] + [480] * 4 + [15])])
def test_network_shape(m, n, widths):
    net = build_qst_network(m, n)
    assert net.widths == widths
    assert not net.nonneg_constrained
    assert [layer.activation.name for layer in net.layers] == ["leaky_relu"] * 4 + ["identity"]


def test_small_single_qubit_training_learns():
    cfg = QstConfig(train_count=4000, test_count=500, train=TrainConfig(iterations=20, batch_size=128))
    _, res = train_qst(1, enumerate_paulis(1), cfg)
    assert res.mean_fidelity > 0.97
    assert np.all((res.fidelities >= 0) & (res.fidelities <= 1 + 1e-12))
    assert res.mean_fidelity == pytest.approx(res.fidelities.mean())
    assert len(res.loss_trace) == 20 and res.loss_trace[-1] < res.loss_trace[0]


def test_test_set_size_rule():
    assert QstConfig(train_count=20000).resolved_test_count == 2000
    assert QstConfig(train_count=50000).resolved_test_count == 2000
    assert QstConfig(train_count=500).resolved_test_count == 50
    assert TEST_SEED_OFFSET == 10**6


def test_failed_reconstruction_scores_zero():
    ps = enumerate_paulis(1)
    res = ExperimentResult.from_fidelities(1, ps, "x", None, [0.0, 1.0])
    assert res.mean_fidelity == 0.5 and res.m == 3


def test_figure2_cells_layout():
    cells = figure2_cells(Figure2Config(n=2))
    assert len(cells) == 13 and cells[-1][0] == "uda"
    assert [len(ps) for _, _, ps in cells[:-1]] == [6, 6, 6, 8, 8, 8, 10, 10, 10, 12, 12, 12]
    # set k uses seed + k at every m, so larger sets extend smaller ones
    assert cells[9][2].members[:6] == cells[0][2].members
    one = figure2_cells(Figure2Config(n=1))
    assert [len(ps) for _, _, ps in one] == [1, 2, 3]
    three = Figure2Config(n=3).resolved()
    assert three.train_count == 50_000 and Figure2Config(n=3, paper_scale=True).resolved().train_count == 150_000
    with pytest.raises(ValueError):
        Figure2Config(n=4).resolved()


def test_figure2_config_json_round_trip(tmp_path):
    cfg = Figure2Config(n=2, m_values=(6, 8), sets=2, train_count=100, train=QUICK)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert Figure2Config.load(path) == cfg


def test_small_sweep_outputs_and_determinism(tmp_path):
    cfg = Figure2Config(n=2, m_values=(6, 8), sets=2, train_count=200, test_count=50, train=QUICK)
    first = figure2_experiment(cfg)
    assert [(r.m, r.set_id) for r in first] == [(6, "random-0"), (6, "random-1"), (8, "random-0"),
                                                (8, "random-1"), (10, "uda")]
    paths = write_figure2(first, tmp_path / "a", cfg)
    write_figure2(figure2_experiment(cfg), tmp_path / "b", cfg)
    for name in ("results.csv", "aggregate.csv", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = open(paths["results"]).readline().strip()
    assert header == "n,m,set_id,set_seed,mean_fidelity,std_fidelity"
    rows = aggregate(first)
    assert [(r["m"], r["kind"], r["sets"]) for r in rows] == [(6, "random", 2), (8, "random", 2), (10, "uda", 1)]


def test_parallel_sweep_matches_serial():
    cfg = Figure2Config(n=1, train_count=200, test_count=50, train=QUICK)
    serial = results_csv(figure2_experiment(cfg))
    parallel = results_csv(figure2_experiment(Figure2Config(n=1, train_count=200, test_count=50, train=QUICK, jobs=2)))
    assert serial == parallel
