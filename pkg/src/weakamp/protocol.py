"""
Phase amplification by post-selection, end to end.

Conventions
-----------
The system qubit is the photon path with ``|0> = |down>`` and ``|1> = |up>``.
Pre-selection ``alpha|0> + beta|1>`` and post-selection ``gamma|0> + eta|1>``
use real amplitudes. The pointer starts in ``|+>``; after post-selection it is

    c_H = (alpha*gamma + beta*eta) / sqrt2
    c_V = (alpha*gamma + beta*eta*e^{i theta}) / sqrt2

and the amplified phase is the *relative* phase ``arg(c_V / c_H)``, the only
phase a polarization analyser can see. Writing ``k = beta*eta / (alpha*gamma
+ beta*eta)`` this is ``arg(1 + k (e^{i theta} - 1))``; its slope at
``theta = 0`` is ``k = 1/delta_eff`` with ``delta_eff = 1 + alpha*gamma /
(beta*eta)``. For ``alpha = beta`` and ``gamma, eta = cos chi, sin chi`` this
is ``delta_eff = 1 + cot chi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import core
from .core import DEGENERATE_EPS, NORM_TOL, Qubit
from .errors import (
    DegenerateConfigurationError,
    DivergentWeakValueError,
    PreconditionError,
)
from .optics import (
    BeamSplitterParams,
    beam_splitter,
    compensation,
    controlled_phase,
    pmi_block,
    von_neumann_coupling,
)

_S2 = 1 / math.sqrt(2)


def _wrap(phi: float) -> float:
    """Map ``-pi`` onto ``pi`` so phases live in (-pi, pi]."""
    return math.pi if phi == -math.pi else phi


def _check_unit(a: float, b: float, what: str) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise PreconditionError(f"{what} amplitudes must be finite")
    if abs(a * a + b * b - 1.0) > NORM_TOL:
        raise PreconditionError(f"{what}: squared amplitudes sum to {a*a + b*b!r}")


@dataclass(frozen=True)
class PreSelection:
    alpha: float
    beta: float

    def __post_init__(self):
        _check_unit(self.alpha, self.beta, "pre-selection")

    @classmethod
    def balanced(cls) -> "PreSelection":
        return cls(_S2, _S2)

    def qubit(self) -> Qubit:
        return Qubit.path(self.alpha, self.beta)


@dataclass(frozen=True)
class PostSelection:
    gamma: float
    eta: float
    chi: Optional[float] = None

    def __post_init__(self):
        _check_unit(self.gamma, self.eta, "post-selection")
        if self.chi is not None and (
            abs(math.cos(self.chi) - self.gamma) > NORM_TOL
            or abs(math.sin(self.chi) - self.eta) > NORM_TOL
        ):
            raise PreconditionError(f"chi={self.chi!r} inconsistent with (gamma, eta)")

    @classmethod
    def from_chi(cls, chi: float) -> "PostSelection":
        return cls(math.cos(chi), math.sin(chi), chi)

    @classmethod
    def from_delta(cls, delta_eff: float) -> "PostSelection":
        """Post-selection with ``1 + cot chi = delta_eff`` exactly.

        ``chi`` lies just below ``-pi/4``; the geometric offset
        ``-(chi + pi/4)`` is about ``delta_eff / 2`` for small ``delta_eff``.
        """
        if not math.isfinite(delta_eff):
            raise PreconditionError("delta must be finite")
        return cls.from_chi(-math.atan2(1.0, 1.0 - delta_eff))

    @classmethod
    def from_offset(cls, delta: float) -> "PostSelection":
        """``chi = -(pi/4 + delta)``, the geometric offset."""
        return cls.from_chi(-(math.pi / 4 + delta))

    def qubit(self) -> Qubit:
        return Qubit.path(self.gamma, self.eta)


@dataclass(frozen=True, eq=False)
class AmplificationResult:
    theta: float
    phi_exact: float
    phi_first_order: Optional[float]
    h: float
    p_post: float
    pointer_state: Qubit
    delta_eff: Optional[float] = None

    def record(self) -> dict:
        return {
            "theta": self.theta,
            "phi_exact": self.phi_exact,
            "phi_first_order": self.phi_first_order,
            "h": self.h,
            "h_first_order": (
                amplification_factor(self.theta, self.delta_eff)
                if self.delta_eff is not None and self.delta_eff > 0
                else None
            ),
            "p_post": self.p_post,
            "delta_eff": self.delta_eff,
        }


def overlap(pre: PreSelection, post: PostSelection) -> float:
    """``<psi_f|psi_i>`` for real amplitudes."""
    return pre.alpha * post.gamma + pre.beta * post.eta


def delta_eff(pre: PreSelection, post: PostSelection) -> Optional[float]:
    """``1 + alpha*gamma/(beta*eta)``; ``None`` when ``beta*eta == 0``."""
    be = pre.beta * post.eta
    if be == 0:
        return None
    return 1.0 + pre.alpha * post.gamma / be


class PhaseMap:
    """The exact map ``theta -> arg(1 + k (e^{i theta} - 1))``.

    ``k`` may be complex (a down-arm compensation phase makes it so).
    """

    def __init__(self, k: complex):
        self.k = complex(k)

    @classmethod
    def from_amplitudes(cls, ag: complex, be: float) -> "PhaseMap":
        d = ag + be
        if abs(d) ** 2 <= DEGENERATE_EPS:
            raise DegenerateConfigurationError(
                "pre- and post-selection are orthogonal: c_H vanishes and the "
                "relative pointer phase is undefined"
            )
        return cls(be / d)

    def _z(self, theta):
        return 1 - self.k + self.k * np.exp(1j * theta)

    def phase(self, theta: float) -> float:
        return _wrap(float(np.angle(self._z(theta))))

    def slope(self, theta: float) -> float:
        """``d phi / d theta``."""
        z = self._z(theta)
        return float((self.k * np.exp(1j * theta) * np.conj(z)).real / abs(z) ** 2)

    def first_order(self, theta: float) -> float:
        """Relative phase of ``1 + i k theta``."""
        return math.atan2(theta * self.k.real, 1 - theta * self.k.imag)

    def monotone_bracket(self, limit: float = math.pi / 2) -> tuple[float, float]:
        """Largest interval around 0, within ``[-limit, limit]``, on which the
        map is monotone.

        The slope numerator is ``|k|^2 + Re(w e^{i theta})`` with
        ``w = k conj(1 - k)``; its zeros bound the interval.
        """
        k2 = abs(self.k) ** 2
        w = self.k * np.conj(1 - self.k)
        lo, hi = -limit, limit
        if abs(w) > k2:
            psi = float(np.angle(w))
            base = math.acos(-k2 / abs(w))
            for sgn in (1.0, -1.0):
                for n in (-1, 0, 1):
                    root = -psi + sgn * base + 2 * math.pi * n
                    if 0 < root < hi:
                        hi = root
                    elif lo < root < 0:
                        lo = root
        return lo, hi

    def invert(self, phi: float, tol: float = 1e-15) -> float:
        """Bisection for ``theta`` with ``phase(theta) = phi`` on the
        monotone bracket; ``phi`` outside the reachable range is clamped to
        the nearer endpoint."""
        if self.k == 0:
            raise DegenerateConfigurationError("phase map is constant (k = 0)")
        lo, hi = self.monotone_bracket()
        f_lo, f_hi = self.phase(lo) - phi, self.phase(hi) - phi
        if f_lo * f_hi > 0:
            return lo if abs(f_lo) < abs(f_hi) else hi
        for _ in range(400):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            f_mid = self.phase(mid) - phi
            if f_mid == 0:
                return mid
            if (f_mid > 0) == (f_lo > 0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def pointer_amplitudes(pre, post, theta, phi_c=0.0) -> np.ndarray:
    """Closed-form unnormalized pointer ``(c_H, c_V)``."""
    ag = pre.alpha * post.gamma * np.exp(1j * phi_c)
    be = pre.beta * post.eta
    return _S2 * np.array([ag + be, ag + be * np.exp(1j * theta)])


def amplified_phase_exact(pre: PreSelection, post: PostSelection, theta: float) -> float:
    """Relative pointer phase from the closed form.

    ``tan phi = beta*eta*sin(theta) / (beta*eta*cos(theta) + alpha*gamma)``,
    resolved with atan2 after both components are multiplied by the sign of
    ``<psi_f|psi_i>`` so the branch matches ``arg(c_V / c_H)``.
    """
    ag, be = pre.alpha * post.gamma, pre.beta * post.eta
    s = -1.0 if ag + be < 0 else 1.0
    y = s * be * math.sin(theta)
    x = s * (be * math.cos(theta) + ag)
    if abs(x) < DEGENERATE_EPS and abs(y) < DEGENERATE_EPS:
        raise DegenerateConfigurationError(
            f"phase undefined: both atan2 components vanish (theta={theta!r})"
        )
    return _wrap(math.atan2(y, x))


def amplified_phase_first_order(theta: float, post: PostSelection) -> float:
    """``arctan(theta / (1 + cot chi))``, valid for ``alpha = beta`` and small theta."""
    if post.eta == 0:
        # cot chi infinite
        return 0.0
    denom = 1.0 + post.gamma / post.eta
    if denom == 0:
        raise DegenerateConfigurationError(
            "1 + cot(chi) = 0: first-order formula divides by zero; "
            "use amplified_phase_exact instead"
        )
    return math.atan(theta / denom)


def amplification_factor(theta: float, delta: float) -> float:
    """``h = arctan(theta/delta) / theta``; ``1/delta`` at ``theta = 0``."""
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta!r}")
    if theta == 0:
        return 1.0 / delta
    return math.atan(theta / delta) / theta


def postselection_probability(pre: PreSelection, post: PostSelection, theta: float) -> float:
    c = pointer_amplitudes(pre, post, theta)
    return float(np.vdot(c, c).real)


def _result(unnormalized: Qubit, pmap: PhaseMap, theta: float, d_eff) -> AmplificationResult:
    p_post = core.norm_squared(unnormalized)
    pointer = core.normalize(unnormalized)
    c_h, c_v = unnormalized.amplitudes
    if abs(c_h) ** 2 <= DEGENERATE_EPS:
        raise DegenerateConfigurationError("c_H vanishes; relative phase undefined")
    phi = _wrap(float(np.angle(c_v * np.conj(c_h))))
    h = phi / theta if theta != 0 else pmap.slope(0.0)
    return AmplificationResult(
        theta=theta,
        phi_exact=phi,
        phi_first_order=pmap.first_order(theta),
        h=h,
        p_post=p_post,
        pointer_state=pointer,
        delta_eff=d_eff,
    )


def run_abstract_protocol(pre: PreSelection, post: PostSelection, theta: float) -> AmplificationResult:
    """Prepare ``|psi_i>|+>``, apply the controlled phase, post-select."""
    state = core.tensor_product(pre.qubit(), core.PLUS)
    state = core.apply_unitary(controlled_phase(theta), state)
    pointer = core.partial_project(post.qubit(), state)
    pmap = PhaseMap.from_amplitudes(pre.alpha * post.gamma, pre.beta * post.eta)
    return _result(pointer, pmap, theta, delta_eff(pre, post))


def ligo_unitary(bs1: BeamSplitterParams, bs2: BeamSplitterParams, theta: float,
                 phi_c: float = 0.0) -> core.ElementUnitary:
    """BS1, then the PMI block, the down-arm compensation, and BS2."""
    return beam_splitter(bs2) @ compensation(phi_c) @ pmi_block(theta) @ beam_splitter(bs1)


def run_ligo_pipeline(bs1: BeamSplitterParams, bs2: BeamSplitterParams, theta: float,
                      phi_c: float = 0.0) -> AmplificationResult:
    """Full optical chain; photons leaving BS2's down port are kept.

    Equivalent to :func:`run_abstract_protocol` with ``alpha, beta, gamma,
    eta = r1, t1, r2, t2`` when ``phi_c = 0``.
    """
    if bs1.t * bs2.t == 0:
        raise PreconditionError("t1*t2 = 0: post-selection ratio r1r2/t1t2 undefined")
    state = core.tensor_product(core.DOWN, core.PLUS)
    state = core.apply_unitary(ligo_unitary(bs1, bs2, theta, phi_c), state)
    pointer = core.partial_project(core.DOWN, state)
    pmap = PhaseMap.from_amplitudes(bs1.r * bs2.r * np.exp(1j * phi_c), bs1.t * bs2.t)
    d_eff = 1.0 + bs1.r * bs2.r / (bs1.t * bs2.t)
    return _result(pointer, pmap, theta, d_eff)


def weak_value(pre: PreSelection, post: PostSelection) -> complex:
    """``<psi_f|A|psi_i> / <psi_f|psi_i>`` with ``A = |0><0| - |1><1|``."""
    ov = overlap(pre, post)
    if abs(ov) <= DEGENERATE_EPS:
        raise DivergentWeakValueError("pre- and post-selected states are orthogonal")
    return complex((post.gamma * pre.alpha - post.eta * pre.beta) / ov)


@dataclass(frozen=True)
class WvaExpectations:
    sigma_plus: float
    sigma_R: float
    sigma_plus_first_order: Optional[float]
    sigma_R_first_order: Optional[float]
    weak_value: Optional[complex]


def wva_pointer_expectations(theta: float, pre: PreSelection, post: PostSelection) -> WvaExpectations:
    """Exact pointer expectations after ``exp(-i theta A (x) sigma_y)`` on
    ``|psi_i>|H>`` and post-selection, alongside ``2 theta Re/Im A_w``.

    The first-order fields are ``None`` when the weak value diverges.
    """
    state = core.tensor_product(pre.qubit(), core.H)
    state = core.apply_unitary(von_neumann_coupling(theta), state)
    pointer = core.normalize(core.partial_project(post.qubit(), state))
    try:
        aw = weak_value(pre, post)
    except DivergentWeakValueError:
        aw = None
    return WvaExpectations(
        sigma_plus=core.pauli_expectation("sigma_plus", pointer),
        sigma_R=core.pauli_expectation("sigma_R", pointer),
        sigma_plus_first_order=None if aw is None else 2 * theta * aw.real,
        sigma_R_first_order=None if aw is None else 2 * theta * aw.imag,
        weak_value=aw,
    )


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything needed to run one configuration of the interferometer."""

    pre: PreSelection
    post: PostSelection
    theta: float
    phi_c: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi_c)):
            raise PreconditionError("theta and phi_c must be finite")

    @classmethod
    def from_beam_splitters(cls, bs1: BeamSplitterParams, bs2: BeamSplitterParams,
                            theta: float, phi_c: float = 0.0) -> "ProtocolConfig":
        return cls(PreSelection(bs1.r, bs1.t), PostSelection(bs2.r, bs2.t), theta, phi_c)

    @property
    def bs1(self) -> BeamSplitterParams:
        return BeamSplitterParams(self.pre.alpha, self.pre.beta)

    @property
    def bs2(self) -> BeamSplitterParams:
        return BeamSplitterParams(self.post.gamma, self.post.eta)

    def with_theta(self, theta: float) -> "ProtocolConfig":
        return ProtocolConfig(self.pre, self.post, theta, self.phi_c)

    def phase_map(self) -> PhaseMap:
        return PhaseMap.from_amplitudes(
            self.pre.alpha * self.post.gamma * np.exp(1j * self.phi_c),
            self.pre.beta * self.post.eta,
        )

    def run(self) -> AmplificationResult:
        if self.phi_c == 0.0:
            return run_abstract_protocol(self.pre, self.post, self.theta)
        return run_ligo_pipeline(self.bs1, self.bs2, self.theta, self.phi_c)
