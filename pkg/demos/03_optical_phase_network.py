"""
Phase tomography with a positive-valued optical network
=======================================================

Waveplates prepare ``(|H> + e^{i theta}|V>)/sqrt(2)``; three polarizing
beam-splitter units read X, Y and Z.  A 3-20-1 network with EIT-shaped
hidden neurons, nonnegative weights and no biases maps ``1 - <sigma>`` to
``theta``.
"""

# %%
import numpy as np

from aonnqst import aonn, polarization

# %% Preparation and measurement optics
for theta in (0.0, 1.1152, np.pi / 2):
    state = polarization.prepare_state(theta)
    xyz = polarization.measure_xyz(state)
    print(f"theta={theta:.4f}  HWP1 at {polarization.hwp1_sphere_angle(theta) / 2:.4f} rad  <X,Y,Z>={np.round(xyz, 3)}")

# %% Train on 23 phases, test on 32
train_set = aonn.make_phase_dataset(23, seed=0)
test_set = aonn.make_phase_dataset(32, seed=1)
model = aonn.train_aonn(train_set)
pred = aonn.predict_theta(model, np.array([s.c for s in test_set]))
err = np.abs(pred - [s.theta for s in test_set])
print(f"final train MSE {model.loss_trace[-1]:.2e}, test max error {err.max():.3f} rad, mean {err.mean():.3f} rad")

# %% The worked example and its density matrix
theta = aonn.predict_theta(model, [0.440, 0.898, 0.0])
print(f"predicted theta {theta:.4f} (true 1.1152)")
print(np.round(aonn.rho_from_theta(theta), 4))

# %% The same model through a circuit-style source with 8192 shots per operator
circuit = aonn.make_phase_dataset(158, seed=2, source="circuit")
model_c = aonn.train_aonn(circuit)
pred_c = aonn.predict_theta(model_c, np.array([s.c for s in test_set]))
print(f"circuit-trained test max error {np.abs(pred_c - [s.theta for s in test_set]).max():.3f} rad")
