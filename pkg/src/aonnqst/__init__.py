"""Neural-network quantum state tomography and its all-optical counterpart."""
from .quantum import PauliString, PureState, fidelity, haar_random_state
from .paulis import PauliSet, ShotModel, enumerate_paulis, measure_vector, sample_pauli_set, uda_set

__all__ = [
    "PauliSet",
    "PauliString",
    "PureState",
    "ShotModel",
    "enumerate_paulis",
    "fidelity",
    "haar_random_state",
    "measure_vector",
    "sample_pauli_set",
    "uda_set",
]
__version__ = "0.1.0"
