"""
Phase masks for the optical weight layer
========================================

A blazed grating steers the beam, a sinusoidal phase sets how much light
stays in the zero order, and a weighted Gerchberg-Saxton loop shapes a
20-spot fan-out with camera feedback.
"""

# %%
import numpy as np
from scipy.special import j0

from aonnqst import holography as holo

# %% Grating: period 8 on a 256-pixel grid lands in bin 32
out = holo.propagate(holo.grating_phase(8, np.inf, (256, 256)))
print("peak bin:", np.unravel_index(np.argmax(out), out.shape))

# %% Modulation depth against the Bessel prediction
for m in (0.0, 0.25, 0.5, 0.75, 1.0):
    eff = holo.zero_order_efficiency(holo.sine_modulation_phase(m, 16, np.inf, (256, 256)))
    print(f"m={m:.2f}  zero order {eff:.4f}  J0(m pi)^2 {j0(m * np.pi) ** 2:.4f}")

# %% Twenty equal spots with an ideal camera
targets = holo.spot_grid(4, 5)
mask, state = holo.gsw_optimize(targets, holo.GswConfig(a=1.0))
print(f"ideal camera: spread {state.uniformity:.2e} after {state.iteration} iterations, "
      f"efficiency {state.efficiency:.3f}")

# %% A camera with a fixed +-10% gain field, for two feedback strengths
camera = holo.GainFieldCamera.random((64, 64), spread=0.1, seed=1)
for a in (1.0, 0.7):
    _, s = holo.gsw_optimize(targets, holo.GswConfig(a=a, tolerance=1e-12), camera)
    print(f"a={a}: spread at iteration 30 {s.history[29]:.4f}, best {s.uniformity:.4f}")
