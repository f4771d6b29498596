"""
Photon counting, phase estimation and the quantum-noise scaling.

Monte Carlo draws come from :class:`SeededRng`, whose streams are keyed by
``(seed, stream_id)`` through numpy's ``SeedSequence`` spawn keys feeding a
``PCG64`` bit generator. Repetition ``i`` of an experiment uses stream ``i``,
so repetitions are independent and can run in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .core import DEGENERATE_EPS
from .errors import NoDataError, PreconditionError
from .protocol import ProtocolConfig, pointer_amplitudes

RNG_SPEC = "numpy-PCG64/SeedSequence(entropy=seed, spawn_key=(stream_id,))/v1"


@dataclass(frozen=True)
class SeededRng:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise PreconditionError("seed and stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class DetectorCounts:
    n_input: int
    n_post: int
    n_R: int
    n_L: int

    def __post_init__(self):
        if min(self.n_input, self.n_post, self.n_R, self.n_L) < 0:
            raise PreconditionError("counts must be non-negative")
        if self.n_R + self.n_L != self.n_post or self.n_post > self.n_input:
            raise PreconditionError(f"inconsistent counts {self}")


@dataclass(frozen=True)
class EstimationResult:
    phi_hat: float
    theta_hat: float
    stderr_phi: float
    stderr_theta: float


def rl_probabilities(phi: float) -> tuple[float, float]:
    """Probabilities of the R and L outcomes for the pointer
    ``(|H> + e^{i phi}|V>)/sqrt2``; their difference is ``sin phi``."""
    p_r = 0.5 * (1.0 + math.sin(phi))
    return p_r, 1.0 - p_r


def detection_probabilities(config: ProtocolConfig) -> tuple[float, float]:
    """``(p_post, p_R)`` for the actual post-selected pointer.

    ``p_R`` comes from projecting the normalized pointer onto ``|R>``, so it
    is exact rather than relying on equal pointer magnitudes. Returns
    ``p_R = 0.5`` when nothing survives post-selection.
    """
    c = pointer_amplitudes(config.pre, config.post, config.theta, config.phi_c)
    raw = core.Qubit.polarization(*c, normalized=False)
    p_post = core.norm_squared(raw)
    if p_post <= DEGENERATE_EPS:
        return 0.0, 0.5
    s_r = core.pauli_expectation("sigma_R", core.normalize(raw))
    p_r = min(max(0.5 * (1.0 + s_r), 0.0), 1.0)
    return min(p_post, 1.0), p_r


def simulate_counts(n_input: int, config: ProtocolConfig, rng: SeededRng) -> DetectorCounts:
    """Binomial post-selection followed by a binomial R/L split."""
    if n_input <= 0:
        raise PreconditionError("n_input must be positive")
    p_post, p_r = detection_probabilities(config)
    gen = rng.generator()
    n_post = int(gen.binomial(n_input, p_post))
    n_r = int(gen.binomial(n_post, p_r))
    return DetectorCounts(n_input, n_post, n_r, n_post - n_r)


def estimate_phase(counts: DetectorCounts, config: ProtocolConfig) -> EstimationResult:
    """Arcsine estimate of the pointer phase, mapped back to the signal phase.

    The standard errors use the per-photon Fisher information of the R/L
    readout, which is exactly 1 (see :func:`fisher_information_phi`).
    """
    if counts.n_post == 0:
        raise NoDataError("no photons survived post-selection")
    x = (counts.n_R - counts.n_L) / counts.n_post
    phi_hat = math.asin(min(max(x, -1.0), 1.0))
    pmap = config.phase_map()
    theta_hat = pmap.invert(phi_hat)
    stderr_phi = 1.0 / math.sqrt(counts.n_post)
    slope = abs(pmap.slope(theta_hat))
    stderr_theta = stderr_phi / slope if slope > 0 else math.inf
    return EstimationResult(phi_hat, theta_hat, stderr_phi, stderr_theta)


def fisher_information_phi(phi: float = 0.0) -> float:
    """Fisher information about ``phi`` carried by one detected photon.

    With ``p_R = (1 + sin phi)/2`` and ``p_L = 1 - p_R``,
    ``I = (dp_R/dphi)^2 (1/p_R + 1/p_L) = (cos^2 phi / 4) / (cos^2 phi / 4) = 1``
    for every ``|phi| < pi/2``.
    """
    if not abs(phi) < math.pi / 2:
        raise PreconditionError("Fisher information needs |phi| < pi/2")
    return 1.0


@dataclass(frozen=True)
class Repetition:
    stream_id: int
    counts: DetectorCounts
    estimate: Optional[EstimationResult]


def simulate_repetitions(config: ProtocolConfig, n_input: int, seed: int, reps: int) -> list[Repetition]:
    """``reps`` independent experiments on streams ``0 .. reps-1``.

    A repetition with no post-selected photon has ``estimate=None``.
    """
    if reps < 1:
        raise PreconditionError("need at least one repetition")
    out = []
    for sid in range(reps):
        counts = simulate_counts(n_input, config, SeededRng(seed, sid))
        est = estimate_phase(counts, config) if counts.n_post > 0 else None
        out.append(Repetition(sid, counts, est))
    return out


# --- quantum noise -------------------------------------------------------
# Only proportionalities are known; every constant is fixed to 1.


def _check_t(*ts: float) -> None:
    for t in ts:
        if not math.isfinite(t) or t == 0:
            raise PreconditionError("transmission amplitudes must be finite and non-zero")


def shot_noise(n: float, t1: float, t2: float) -> float:
    """``sqrt2 / (|t1 t2| sqrt N)``."""
    if not n > 0:
        raise PreconditionError("photon number must be positive")
    _check_t(t1, t2)
    return math.sqrt(2.0) / (abs(t1 * t2) * math.sqrt(n))


def radiation_pressure_noise(n: float, t1: float) -> float:
    """``|t1| sqrt N``."""
    if not n >= 0:
        raise PreconditionError("photon number must be non-negative")
    return abs(t1) * math.sqrt(n)


def crossover_photon_number(t1: float, t2: float) -> float:
    """Photon number where both noise terms are equal: ``sqrt2 / (t1^2 |t2|)``."""
    _check_t(t1, t2)
    return math.sqrt(2.0) / (t1 * t1 * abs(t2))


@dataclass(frozen=True)
class NoiseBudget:
    n_photons: float
    t1: float
    t2: float
    h_rn: float
    h_sn: float

    @property
    def total(self) -> float:
        return math.hypot(self.h_rn, self.h_sn)


def noise_budget(n: float, t1: float, t2: float) -> NoiseBudget:
    return NoiseBudget(n, t1, t2, radiation_pressure_noise(n, t1), shot_noise(n, t1, t2))


def noise_budget_sweep(n_min: float, n_max: float, points: int, t1: float, t2: float):
    """Log-spaced budgets from ``n_min`` to ``n_max`` inclusive.

    Returns ``(rows, crossover)`` where ``crossover`` is the budget at
    :func:`crossover_photon_number`.
    """
    if not (0 < n_min < n_max) or not math.isfinite(n_max):
        raise PreconditionError(f"invalid photon-number range [{n_min}, {n_max}]")
    if points < 2:
        raise PreconditionError("a sweep needs at least two points")
    _check_t(t1, t2)
    grid = np.geomspace(n_min, n_max, points)
    rows = [noise_budget(float(n), t1, t2) for n in grid]
    return rows, noise_budget(crossover_photon_number(t1, t2), t1, t2)
