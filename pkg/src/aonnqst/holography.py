"""Phase masks for weighted spot arrays.

The SLM plane and the focal plane are the same ``N x N`` grid linked by a
unitary 2D DFT, so spot positions are integer frequency bins ``(u, v)``
(``u`` along axis 0, ``v`` along axis 1).

The spot-array optimizer is a weighted Gerchberg-Saxton loop whose weights
are driven by a (possibly imperfect) camera and damped by a feedback
parameter ``a``:

    g_k <- a * sqrt(I_t,k / I_n,k) * g_k + (1 - a)
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy import fft

TWO_PI = 2 * np.pi
INTENSITY_FLOOR = 1e-12


def wrap_phase(phase) -> np.ndarray:
    out = np.mod(phase, TWO_PI)
    # mod can round up to exactly 2*pi for tiny negative inputs
    out[out >= TWO_PI] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class PhaseMask:
    """SLM phase pattern with values wrapped into ``[0, 2*pi)``; shape ``(height, width)``."""

    phase: np.ndarray

    def __post_init__(self):
        p = np.array(self.phase, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("phase mask must be two-dimensional")
        p = wrap_phase(p)
        p.setflags(write=False)
        object.__setattr__(self, "phase", p)

    @property
    def height(self) -> int:
        return self.phase.shape[0]

    @property
    def width(self) -> int:
        return self.phase.shape[1]

    @property
    def shape(self):
        return self.phase.shape

    def __add__(self, other):
        return PhaseMask(self.phase + other.phase)

    def to_gray16(self) -> np.ndarray:
        return np.round(self.phase / TWO_PI * 65535).astype(np.uint16)

    def save_pgm(self, path) -> None:
        """16-bit binary PGM, phase scaled linearly onto ``0..65535``."""
        gray = self.to_gray16()
        with open(path, "wb") as fh:
            fh.write(f"P5\n{self.width} {self.height}\n65535\n".encode("ascii"))
            fh.write(gray.astype(">u2").tobytes())

    def save_csv(self, path) -> None:
        np.savetxt(path, self.phase, delimiter=",", fmt="%.17g")

    @classmethod
    def load_csv(cls, path) -> "PhaseMask":
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))


def load_pgm(path) -> np.ndarray:
    """Read a 16-bit binary PGM written by :meth:`PhaseMask.save_pgm`."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5" or int(tokens[3]) != 65535:
        raise ValueError("not a 16-bit binary PGM")
    width, height = int(tokens[1]), int(tokens[2])
    return np.frombuffer(data[pos + 1 :], dtype=">u2").reshape(height, width).astype(np.uint16)


def _ramp(period, n):
    if period == 0:
        raise ValueError("grating period must be nonzero (use inf to disable an axis)")
    if np.isinf(period):
        return np.zeros(n)
    return TWO_PI * np.arange(n) / period


def grating_phase(t_i, t_j, dims) -> PhaseMask:
    """Blazed grating ``2*pi*i/T_i + 2*pi*j/T_j``; an infinite period disables that axis."""
    ni, nj = dims
    return PhaseMask(_ramp(t_i, ni)[:, None] + _ramp(t_j, nj)[None, :])


def sine_modulation_phase(m, t_mi, t_mj, dims) -> PhaseMask:
    """Sinusoidal phase ``m*pi*sin(2*pi*i/T_mi + 2*pi*j/T_mj)``.

    The undiffracted (zero-order) power fraction is ``J0(m*pi)**2`` when the
    periods tile the grid.
    """
    if m < 0:
        raise ValueError("modulation depth must be >= 0")
    ni, nj = dims
    arg = _ramp(t_mi, ni)[:, None] + _ramp(t_mj, nj)[None, :]
    return PhaseMask(m * np.pi * np.sin(arg))


def uniform_amplitude(dims) -> np.ndarray:
    """Flat illumination with unit total energy."""
    return np.full(dims, 1.0 / np.sqrt(dims[0] * dims[1]))


def propagate(mask: PhaseMask, amplitude=None) -> np.ndarray:
    """Focal-plane intensity ``|DFT(A * exp(i*phase))|**2`` with a unitary DFT."""
    amp = uniform_amplitude(mask.shape) if amplitude is None else np.asarray(amplitude, dtype=np.float64)
    if amp.shape != mask.shape:
        raise ValueError(f"amplitude shape {amp.shape} does not match mask {mask.shape}")
    return np.abs(fft.fft2(amp * np.exp(1j * mask.phase), norm="ortho")) ** 2


def zero_order_efficiency(mask: PhaseMask, amplitude=None) -> float:
    intensity = propagate(mask, amplitude)
    return float(intensity[0, 0] / intensity.sum())


@dataclass(frozen=True, eq=False)
class SpotTargets:
    """Integer focal-plane bins with target intensities normalized to sum 1."""

    positions: np.ndarray  # (K, 2) ints
    intensities: np.ndarray  # (K,)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.int64).reshape(-1, 2)
        it = np.array(self.intensities, dtype=np.float64).reshape(-1)
        if len(pos) == 0:
            raise ValueError("need at least one spot")
        if len(pos) != len(it):
            raise ValueError("one intensity per spot")
        if np.any(it <= 0):
            raise ValueError("target intensities must be > 0")
        if len({tuple(p) for p in pos}) != len(pos):
            raise ValueError("spot coordinates must be distinct")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "intensities", it / it.sum())

    def __len__(self):
        return len(self.positions)

    def index(self, dims):
        u = np.mod(self.positions[:, 0], dims[0])
        v = np.mod(self.positions[:, 1], dims[1])
        return u, v

    @classmethod
    def from_csv(cls, path) -> "SpotTargets":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"no spots in {path}")
        return cls([(int(r["u"]), int(r["v"])) for r in rows], [float(r["weight"]) for r in rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v", "weight"])
            for (u, v), wt in zip(self.positions, self.intensities):
                w.writerow([u, v, repr(float(wt))])


def spot_grid(rows: int, cols: int, spacing: int = 6, offset=(8, 8), weights=None) -> SpotTargets:
    """Rectangular array of ``rows * cols`` spots, equal weights by default."""
    pos = [(offset[0] + r * spacing, offset[1] + c * spacing) for r in range(rows) for c in range(cols)]
    return SpotTargets(pos, np.ones(len(pos)) if weights is None else weights)


def ideal_camera(intensity: np.ndarray) -> np.ndarray:
    return intensity


@dataclass(frozen=True, eq=False)
class GainFieldCamera:
    """Camera with a static per-pixel multiplicative gain."""

    gain: np.ndarray

    @classmethod
    def random(cls, dims, spread: float = 0.1, seed=None) -> "GainFieldCamera":
        rng = np.random.default_rng(seed)
        return cls(rng.uniform(1 - spread, 1 + spread, size=dims))

    def __call__(self, intensity):
        return self.gain * intensity


def uniformity_error(measured, target) -> float:
    """``max_k |r_k - mean(r)| / mean(r)`` with ``r = I_n / I_t``."""
    r = np.asarray(measured, dtype=np.float64) / np.asarray(target, dtype=np.float64)
    mean = r.mean()
    return float(np.max(np.abs(r - mean)) / mean)


def adaptive_feedback_step(g_prev, i_target, i_measured, a: float) -> np.ndarray:
    """Damped weight update ``a * sqrt(I_t / I_n) * g_prev + (1 - a)``.

    Zero measured intensities are replaced by a tiny floor and reported
    with a ``RuntimeWarning``.
    """
    if not 0 < a <= 1:
        raise ValueError(f"feedback parameter must be in (0, 1], got {a}")
    i_measured = np.asarray(i_measured, dtype=np.float64)
    if np.any(i_measured <= 0):
        warnings.warn("zero measured spot intensity replaced by floor", RuntimeWarning, stacklevel=2)
        i_measured = np.maximum(i_measured, INTENSITY_FLOOR)
    return a * np.sqrt(np.asarray(i_target) / i_measured) * np.asarray(g_prev) + (1 - a)


@dataclass(frozen=True)
class GswConfig:
    a: float = 0.7
    max_iters: int = 100
    tolerance: float = 1e-3
    seed: int = 0
    zero_outside: bool = True
    fix_phase_iteration: int | None = 30

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise ValueError("feedback parameter a must be in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class GswState:
    g: np.ndarray
    iteration: int
    intensities: np.ndarray  # camera-measured spot intensities, normalized
    config: GswConfig
    converged: bool = False
    history: list = field(default_factory=list)  # uniformity error per iteration
    efficiency: float = 0.0  # fraction of true focal power landing on the spots

    @property
    def uniformity(self) -> float:
        return self.history[self.iteration - 1]


def gsw_optimize(targets: SpotTargets, cfg: GswConfig = GswConfig(), camera=ideal_camera,
                 dims=(64, 64), amplitude=None):
    """Weighted GS with camera feedback.  Returns ``(PhaseMask, GswState)``.

    Each iteration imposes ``g * sqrt(I_t)`` at the spot bins with the
    current focal phases (zero elsewhere unless ``cfg.zero_outside`` is
    off), back-propagates, keeps only the phase, re-propagates, reads the
    spots through ``camera`` and updates ``g``.  Stops once the uniformity
    error drops below ``cfg.tolerance``; otherwise returns the best iterate
    with ``converged=False``.
    """
    amp = uniform_amplitude(dims) if amplitude is None else np.asarray(amplitude, dtype=np.float64)
    if amp.shape != tuple(dims):
        raise ValueError("amplitude shape must equal dims")
    u, v = targets.index(dims)
    i_t = targets.intensities
    rng = np.random.default_rng(cfg.seed)
    phase = rng.uniform(0, TWO_PI, size=dims)
    focal = fft.fft2(amp * np.exp(1j * phase), norm="ortho")
    g = np.ones(len(targets))
    history = []
    best = None
    spot_phase = None
    for it in range(1, cfg.max_iters + 1):
        spot_field = focal[u, v]
        if spot_phase is None or cfg.fix_phase_iteration is None or it <= cfg.fix_phase_iteration:
            spot_phase = np.angle(spot_field)
        scale = np.sqrt(np.sum(np.abs(spot_field) ** 2))
        constrained = focal.copy() if not cfg.zero_outside else np.zeros_like(focal)
        constrained[u, v] = g * np.sqrt(i_t) * scale * np.exp(1j * spot_phase)
        phase = np.angle(fft.ifft2(constrained, norm="ortho"))
        focal = fft.fft2(amp * np.exp(1j * phase), norm="ortho")

        true_intensity = np.abs(focal) ** 2
        i_n = np.asarray(camera(true_intensity))[u, v]
        i_n = i_n / i_n.sum()
        err = uniformity_error(i_n, i_t)
        history.append(err)
        if best is None or err < best[0]:
            best = (err, it, phase.copy(), g.copy(), i_n.copy(), true_intensity[u, v].sum() / true_intensity.sum())
        if err < cfg.tolerance:
            eff = true_intensity[u, v].sum() / true_intensity.sum()
            state = GswState(g, it, i_n, cfg, True, history, float(eff))
            return PhaseMask(phase), state
        g = adaptive_feedback_step(g, i_t, i_n, cfg.a)
    err, it, phase, g_best, i_best, eff = best
    state = GswState(g_best, it, i_best, cfg, False, history, float(eff))
    return PhaseMask(phase), state


def spot_report(targets: SpotTargets, state: GswState, path) -> None:
    """CSV with one row per spot: ``u, v, I_t, I_n, ratio``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "I_t", "I_n", "ratio"])
        for (pu, pv), it_, in_ in zip(targets.positions, targets.intensities, state.intensities):
            w.writerow([pu, pv, repr(float(it_)), repr(float(in_)), repr(float(in_ / it_))])
