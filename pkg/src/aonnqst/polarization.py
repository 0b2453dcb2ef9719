"""Jones-calculus model of the polarization qubit.

Qubit mapping: ``|H> = |0>``, ``|V> = |1>``.  Waveplates use the rotated
retarder ``R(-a) diag(1, exp(-i*G)) R(a)`` with ``R(a) = [[cos a, sin a],
[-sin a, cos a]]`` and ``a`` the physical fast-axis angle from horizontal.

Angle conventions fixed here:

* Preparation.  HWP1 is specified by its angle on the Poincare sphere,
  ``pi/4 - theta/2``; the physical plate angle is half of that.  QWP1 sits
  at ``pi/4``.  This yields ``(|H> + exp(i*theta)|V>)/sqrt(2)`` exactly, i.e.
  Stokes ``(cos theta, sin theta, 0)``.
* Measurement.  Z: PBS directly (T - R).  X: HWP at ``pi/8`` first (a
  Hadamard).  Y: QWP with its *slow* axis at ``pi/4`` (fast axis at
  ``-pi/4``); with the fast axis at ``+pi/4`` the unit would read ``-<Y>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import PureState, SIGMA_X, SIGMA_Y, SIGMA_Z

H = np.array([1.0, 0.0], dtype=np.complex128)
V = np.array([0.0, 1.0], dtype=np.complex128)
DIAGONAL = (H + V) / np.sqrt(2)
ANTIDIAGONAL = (H - V) / np.sqrt(2)
SIGMA_PLUS = (H + 1j * V) / np.sqrt(2)
SIGMA_MINUS = (H - 1j * V) / np.sqrt(2)

RETARDANCE = {"half": np.pi, "quarter": np.pi / 2}


@dataclass(frozen=True, eq=False)
class JonesVector:
    """Normalized pair of complex field components ``(E_H, E_V)``."""

    field: np.ndarray

    def __post_init__(self):
        f = np.array(self.field, dtype=np.complex128).reshape(-1)
        if f.size != 2:
            raise ValueError("a Jones vector has two components")
        norm = np.linalg.norm(f)
        if norm == 0:
            raise ValueError("zero Jones vector")
        f = f / norm
        f.setflags(write=False)
        object.__setattr__(self, "field", f)

    @property
    def eh(self) -> complex:
        return complex(self.field[0])

    @property
    def ev(self) -> complex:
        return complex(self.field[1])

    def to_state(self) -> PureState:
        return PureState(self.field)

    def apply(self, matrix) -> "JonesVector":
        return JonesVector(np.asarray(matrix) @ self.field)


@dataclass(frozen=True)
class Waveplate:
    kind: str
    fast_axis_angle: float

    def __post_init__(self):
        if self.kind not in RETARDANCE:
            raise ValueError(f"waveplate kind must be 'half' or 'quarter', got {self.kind!r}")

    @property
    def retardance(self) -> float:
        return RETARDANCE[self.kind]


@dataclass(frozen=True)
class StokesVector:
    s1: float
    s2: float
    s3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3])

    @property
    def optical(self) -> np.ndarray:
        """Lab ordering ``(H - V, D - A, R - L)``, i.e. ``(<Z>, <X>, <Y>)``."""
        return np.array([self.s3, self.s1, self.s2])


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def retarder_matrix(retardance: float, angle: float) -> np.ndarray:
    core = np.diag([1.0, np.exp(-1j * retardance)])
    return rotation(-angle) @ core @ rotation(angle)


def waveplate_matrix(w: Waveplate) -> np.ndarray:
    return retarder_matrix(w.retardance, w.fast_axis_angle)


def hwp(angle: float) -> np.ndarray:
    return waveplate_matrix(Waveplate("half", angle))


def qwp(angle: float) -> np.ndarray:
    return waveplate_matrix(Waveplate("quarter", angle))


def hwp1_sphere_angle(theta: float) -> float:
    """HWP1 setting on the Poincare sphere for target phase ``theta``."""
    return np.pi / 4 - theta / 2


def prepare_state(theta: float) -> JonesVector:
    """``|H>`` through HWP1 then QWP1, giving ``(|H> + e^{i theta}|V>)/sqrt(2)``.

    Valid for any real ``theta``; the experiment uses ``[0, pi/2]``.
    """
    physical = hwp1_sphere_angle(theta) / 2
    return JonesVector(qwp(np.pi / 4) @ hwp(physical) @ H)


MEASUREMENT_OPTICS = {
    "Z": np.eye(2, dtype=np.complex128),
    "X": hwp(np.pi / 8),
    "Y": qwp(-np.pi / 4),
}


def pbs_split(s: JonesVector, extinction: float = 0.0) -> tuple:
    """Transmitted (H) and reflected (V) power fractions of a PBS.

    ``extinction`` is the fraction of the wrong polarization leaking into
    each port; 0 is an ideal splitter.
    """
    ph = abs(s.eh) ** 2
    pv = abs(s.ev) ** 2
    t = (1 - extinction) * ph + extinction * pv
    r = (1 - extinction) * pv + extinction * ph
    return t, r


def measure_unit(s: JonesVector, basis: str, extinction: float = 0.0) -> float:
    """Normalized PBS difference ``T - R`` after the basis-specific waveplate."""
    basis = basis.upper()
    if basis not in MEASUREMENT_OPTICS:
        raise ValueError(f"basis must be X, Y or Z, got {basis!r}")
    t, r = pbs_split(s.apply(MEASUREMENT_OPTICS[basis]), extinction)
    return float((t - r) / (t + r))


def measure_xyz(s: JonesVector, extinction: float = 0.0) -> np.ndarray:
    return np.array([measure_unit(s, b, extinction) for b in "XYZ"])


def stokes(s: JonesVector) -> StokesVector:
    """Poincare-sphere coordinates, equal to ``(<X>, <Y>, <Z>)`` of the qubit."""
    f = s.field
    return StokesVector(*(float(np.vdot(f, m @ f).real) for m in (SIGMA_X, SIGMA_Y, SIGMA_Z)))


def theta_from_stokes(st: StokesVector) -> float:
    return float(np.arctan2(st.s2, st.s1))
