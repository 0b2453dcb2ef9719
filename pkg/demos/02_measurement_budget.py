"""
How many Pauli strings does a two-qubit state need?
===================================================

Random subsets of the 15 non-identity strings, compared with the
10-member set that pins down any pure state.  Counts here are cut down so
the script finishes in a few minutes; ``aonnqst figure2 --n 2`` runs the
default-scale sweep.
"""

# %%
from aonnqst.nn import TrainConfig
from aonnqst.qst import Figure2Config, aggregate, figure2_experiment

cfg = Figure2Config(
    n=2,
    m_values=(6, 8, 10, 12),
    sets=2,
    train_count=4000,
    test_count=400,
    train=TrainConfig(iterations=40, batch_size=128),
)
results = figure2_experiment(cfg)

# %% Per-set scores
for r in results:
    print(f"m={r.m:>2}  {r.set_id:<9} {' '.join(r.paulis):<40} {r.mean_fidelity:.4f}")

# %% Averaged curve, with the spread across random sets as the error bar
for row in aggregate(results):
    print(f"m={row['m']:>2} {row['kind']:<6} {row['mean_fidelity']:.4f} +- {row['std_over_sets']:.4f}")
