"""Pure qubit states, Pauli strings and the amplitude parameterization.

States are dense complex vectors over the computational basis; everything
here is cheap at the 1-3 qubit sizes this package targets.  Batched
helpers (``*_batch``) operate on arrays of shape ``(count, 2**n)`` and are
what the dataset generators use.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce

import numpy as np

SIGMA_I = np.array([[1, 0], [0, 1]], dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)
LETTERS = "IXYZ"

NORM_TOL = 1e-12
# a_1 below this makes the global-phase fix ill-defined
DEGENERATE_PIVOT = 1e-9


class DegenerateParameterizationError(ValueError):
    """Raised when the first amplitude is too small to fix the global phase."""


class NonPhysicalBlochError(ValueError):
    """Raised for Bloch vectors outside the unit ball."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector of ``n`` qubits.

    The amplitudes are renormalized on construction; the stored array is
    read-only.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.size
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"state length must be a power of two >= 2, got {dim}")
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "PureState":
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "re": self.amplitudes.real.tolist(),
            "im": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PureState":
        state = cls(np.asarray(data["re"]) + 1j * np.asarray(data["im"]))
        if state.n != data["n"]:
            raise ValueError("qubit count does not match amplitude length")
        return state

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"PureState(n={self.n}, amplitudes={np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, ``0..3`` meaning ``I, X, Y, Z``."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("Pauli string needs at least one qubit")
        if any(i not in (0, 1, 2, 3) for i in idx):
            raise ValueError(f"Pauli indices must be in 0..3, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.replace(" ", "").upper()
        try:
            return cls(tuple(LETTERS.index(ch) for ch in label))
        except ValueError:
            raise ValueError(f"invalid Pauli label {label!r}") from None

    @property
    def n(self) -> int:
        return len(self.indices)

    @property
    def label(self) -> str:
        return "".join(LETTERS[i] for i in self.indices)

    @property
    def is_identity(self) -> bool:
        return not any(self.indices)

    def __str__(self):
        return self.label


def _as_pauli(p) -> PauliString:
    if isinstance(p, PauliString):
        return p
    if isinstance(p, str):
        return PauliString.from_label(p)
    return PauliString(tuple(p))


def haar_random_state(n: int, seed=None) -> PureState:
    """Draw a Haar-random pure state by normalizing a complex Gaussian vector."""
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return PureState(haar_random_amplitudes(n, 1, rng)[0])


def haar_random_amplitudes(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random normalized amplitude rows, shape ``(count, 2**n)``."""
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    dim = 2**n
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def pauli_matrix(p) -> np.ndarray:
    """Dense matrix of a Pauli string, Kronecker product in qubit order."""
    p = _as_pauli(p)
    return reduce(np.kron, (PAULIS[i] for i in p.indices))


def expectation(state: PureState, p) -> float:
    """<psi|P|psi> for a single state."""
    p = _as_pauli(p)
    if p.n != state.n:
        raise ValueError(f"Pauli string acts on {p.n} qubits, state has {state.n}")
    psi = state.amplitudes
    return float(np.vdot(psi, pauli_matrix(p) @ psi).real)


def expectations_batch(amplitudes: np.ndarray, paulis) -> np.ndarray:
    """Expectation values for many states and many Pauli strings.

    Returns an array of shape ``(count, len(paulis))``.
    """
    amps = np.atleast_2d(amplitudes)
    out = np.empty((amps.shape[0], len(paulis)))
    for col, p in enumerate(paulis):
        p = _as_pauli(p)
        if 2**p.n != amps.shape[1]:
            raise ValueError(f"Pauli string {p} does not match state dimension {amps.shape[1]}")
        out[:, col] = np.einsum("ki,ki->k", amps.conj(), amps @ pauli_matrix(p).T).real
    return out


def fidelity(s1: PureState, s2: PureState) -> float:
    """Squared overlap ``|<psi1|psi2>|**2``."""
    if s1.dim != s2.dim:
        raise ValueError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    return float(min(abs(np.vdot(s1.amplitudes, s2.amplitudes)) ** 2, 1.0))


def fidelity_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise fidelity between two stacks of (not necessarily normalized) vectors.

    Rows of ``b`` with zero norm give fidelity 0.
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    overlap = np.abs(np.einsum("ki,ki->k", a.conj(), b)) ** 2
    denom = (na * nb) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(denom > 0, overlap / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(f, 0.0, 1.0)


def n_params(n: int) -> int:
    """Length of the amplitude parameter vector, ``2 * 2**n - 1``."""
    return 2 * 2**n - 1


def params_from_amplitudes(amplitudes: np.ndarray) -> np.ndarray:
    """Batched global-phase-fixed parameters, one row per state.

    Layout per row: ``(a1_re, a2_re, a2_im, ..., aD_re, aD_im)`` after
    rotating the global phase so that ``a1`` is real and nonnegative.
    """
    amps = np.atleast_2d(np.asarray(amplitudes, dtype=np.complex128))
    amps = amps / np.linalg.norm(amps, axis=1, keepdims=True)
    pivot = amps[:, 0]
    mag = np.abs(pivot)
    if np.any(mag < DEGENERATE_PIVOT):
        raise DegenerateParameterizationError(
            f"|a_1| < {DEGENERATE_PIVOT:g}; global phase cannot be fixed on the first amplitude"
        )
    rotated = amps * (pivot.conj() / mag)[:, None]
    out = np.empty((amps.shape[0], 2 * amps.shape[1] - 1))
    out[:, 0] = rotated[:, 0].real
    out[:, 1::2] = rotated[:, 1:].real
    out[:, 2::2] = rotated[:, 1:].imag
    return out


def amplitudes_from_params(params: np.ndarray) -> np.ndarray:
    """Inverse of :func:`params_from_amplitudes`, rows renormalized.

    All-zero rows are returned as zero vectors; callers decide what that means.
    """
    v = np.atleast_2d(np.asarray(params, dtype=np.float64))
    width = v.shape[1]
    if width < 3 or (width + 1) & width:
        raise ValueError(f"parameter length {width} is not 2*2**n - 1")
    dim = (width + 1) // 2
    amps = np.zeros((v.shape[0], dim), dtype=np.complex128)
    amps[:, 0] = v[:, 0]
    amps[:, 1:] = v[:, 1::2] + 1j * v[:, 2::2]
    norm = np.linalg.norm(amps, axis=1, keepdims=True)
    return np.divide(amps, norm, out=np.zeros_like(amps), where=norm > 0)


def params_from_state(state: PureState) -> np.ndarray:
    return params_from_amplitudes(state.amplitudes)[0]


def state_from_params(params) -> PureState:
    v = np.asarray(params, dtype=np.float64).reshape(-1)
    if not np.any(v):
        raise ValueError("all-zero parameter vector does not define a state")
    return PureState(amplitudes_from_params(v)[0])


def density_from_bloch(c, tol: float = 1e-9) -> np.ndarray:
    """Single-qubit density matrix ``(I + c . sigma) / 2`` from ``(<X>, <Y>, <Z>)``."""
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    if c.size != 3:
        raise ValueError("Bloch vector must have three components")
    if np.linalg.norm(c) > 1 + tol:
        raise NonPhysicalBlochError(f"Bloch vector norm {np.linalg.norm(c):.6g} exceeds 1")
    return 0.5 * (SIGMA_I + c[0] * SIGMA_X + c[1] * SIGMA_Y + c[2] * SIGMA_Z)
