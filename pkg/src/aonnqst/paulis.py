"""Pauli measurement sets: enumeration, random subsets, UDA sets, shot noise."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .quantum import PauliString, PureState, _as_pauli, expectations_batch

MAX_QUBITS = 3

_UDA_LABELS = {
    2: "IX IY IZ XI YX YY YZ ZX ZY ZZ",
    3: (
        "IIX IIY IIZ IXI IXX IXY IYI IYX IYY IZI XIZ XXX XXY XYX XYY "
        "XZX XZY YXX YXY YXZ YYX YYY YYZ YZI ZII ZXZ ZYZ ZZX ZZY ZZZ"
    ),
}


@dataclass(frozen=True)
class PauliSet:
    """Ordered, duplicate-free collection of non-identity Pauli strings on ``n`` qubits.

    The member order is the column order of measurement vectors and hence
    the network input order.
    """

    n: int
    members: tuple

    def __post_init__(self):
        members = tuple(_as_pauli(p) for p in self.members)
        if not members:
            raise ValueError("a Pauli set needs at least one member")
        for p in members:
            if p.n != self.n:
                raise ValueError(f"{p} acts on {p.n} qubits, set is for {self.n}")
            if p.is_identity:
                raise ValueError("the all-identity string is not a measurement")
        if len(set(members)) != len(members):
            raise ValueError("duplicate Pauli strings in set")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __contains__(self, item):
        return _as_pauli(item) in self.members

    @property
    def labels(self) -> list:
        return [p.label for p in self.members]

    @classmethod
    def from_labels(cls, labels) -> "PauliSet":
        if isinstance(labels, str):
            labels = labels.replace(",", " ").split()
        members = [PauliString.from_label(lab) for lab in labels]
        return cls(members[0].n, tuple(members))

    def to_json(self) -> str:
        return json.dumps([list(p.indices) for p in self.members])

    @classmethod
    def from_json(cls, text: str) -> "PauliSet":
        members = [PauliString(tuple(idx)) for idx in json.loads(text)]
        return cls(members[0].n, tuple(members))


@dataclass(frozen=True)
class ShotModel:
    """Finite-shot binomial sampling per operator; ``shots=None`` means exact."""

    shots: int | None = None

    def __post_init__(self):
        if self.shots is not None and int(self.shots) < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    @property
    def exact(self) -> bool:
        return self.shots is None

    @classmethod
    def parse(cls, value) -> "ShotModel":
        if value is None or str(value).lower() == "exact":
            return cls()
        return cls(int(value))


EXACT = ShotModel()


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")


def enumerate_paulis(n: int) -> PauliSet:
    """All ``4**n - 1`` non-identity strings in lexicographic index order."""
    _check_n(n)
    members = tuple(
        PauliString(idx) for idx in itertools.product(range(4), repeat=n) if any(idx)
    )
    return PauliSet(n, members)


def sample_pauli_set(n: int, m: int, seed=None) -> PauliSet:
    """Draw ``m`` distinct strings uniformly without replacement, in draw order.

    The draw is the first ``m`` entries of a seeded permutation, so equal
    seeds give nested sets for increasing ``m``.
    """
    full = enumerate_paulis(n)
    if not 1 <= m <= len(full):
        raise ValueError(f"m must be in 1..{len(full)} for n={n}, got {m}")
    rng = np.random.default_rng(seed)
    picks = rng.permutation(len(full))[:m]
    return PauliSet(n, tuple(full[i] for i in picks))


def uda_set(n: int) -> PauliSet:
    """The pure-state UDA Pauli sets for two and three qubits (10 and 30 members)."""
    if n not in _UDA_LABELS:
        raise ValueError(f"UDA sets exist for n in {{2, 3}}, got {n}")
    return PauliSet.from_labels(_UDA_LABELS[n])


def sample_counts(expect: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Empirical +-1 averages from ``shots`` binomial draws per entry."""
    p_plus = np.clip((1.0 + np.asarray(expect)) / 2.0, 0.0, 1.0)
    k_plus = rng.binomial(shots, p_plus)
    return (2 * k_plus - shots) / shots


def measure_amplitudes(amplitudes, ps: PauliSet, noise: ShotModel = EXACT, seed=None) -> np.ndarray:
    """Measurement vectors for a stack of states, shape ``(count, len(ps))``."""
    amps = np.atleast_2d(amplitudes)
    if amps.shape[1] != 2**ps.n:
        raise ValueError(f"state dimension {amps.shape[1]} does not match {ps.n}-qubit set")
    exact = np.clip(expectations_batch(amps, ps.members), -1.0, 1.0)
    if noise.exact:
        return exact
    return sample_counts(exact, noise.shots, np.random.default_rng(seed))


def measure_vector(state: PureState, ps: PauliSet, noise: ShotModel = EXACT, seed=None) -> np.ndarray:
    """Expectation values of each member of ``ps`` on ``state``, optionally shot-sampled."""
    if state.n != ps.n:
        raise ValueError(f"state has {state.n} qubits, Pauli set is for {ps.n}")
    return measure_amplitudes(state.amplitudes, ps, noise, seed)[0]
