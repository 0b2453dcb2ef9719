"""
Learning a qubit from three Pauli expectations
==============================================

A network reads ``(<X>, <Y>, <Z>)`` of a random pure state and outputs
the real/imaginary amplitude parameters, with the global phase fixed so the
first amplitude is real and nonnegative.
"""

# %%
import numpy as np

from aonnqst import enumerate_paulis, fidelity, haar_random_state, measure_vector
from aonnqst.nn import TrainConfig
from aonnqst.qst import QstConfig, reconstruct, train_qst
from aonnqst.quantum import PureState, params_from_state

# %% One state, its measurements and its regression target
psi = haar_random_state(1, seed=7)
paulis = enumerate_paulis(1)
print("amplitudes :", np.round(psi.amplitudes, 4))
print("<X,Y,Z>    :", np.round(measure_vector(psi, paulis), 4))
print("target     :", np.round(params_from_state(psi), 4))

# %% Train a small model.  `aonnqst train-qst --n 1 --set full` runs the full 20k/300-epoch version.
cfg = QstConfig(train_count=5000, test_count=500, train=TrainConfig(iterations=30, batch_size=128))
net, result = train_qst(1, paulis, cfg)
print(f"mean test fidelity after 30 epochs: {result.mean_fidelity:.5f}")

# %% Reconstruct the example state
guess = PureState(reconstruct(net, measure_vector(psi, paulis)[None])[0])
print(f"fidelity with the true state: {fidelity(psi, guess):.6f}")
