"""
Optical elements of the amplifying interferometer as 4x4 unitaries.

Beam splitters use real, signed amplitudes with the orthogonal completion
``[[r, t], [t, -r]]`` on the (down, up) path basis, so the source port
(``|down>``) is sent to ``r|down> + t|up>``. Its determinant is -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NORM_TOL, ElementUnitary
from .errors import PreconditionError


@dataclass(frozen=True)
class BeamSplitterParams:
    r: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.t)):
            raise PreconditionError("beam splitter amplitudes must be finite")
        if abs(self.r**2 + self.t**2 - 1.0) > NORM_TOL:
            raise PreconditionError(
                f"r^2 + t^2 = {self.r**2 + self.t**2!r}, expected 1"
            )

    @classmethod
    def from_angle(cls, a: float) -> "BeamSplitterParams":
        """``r = cos a``, ``t = sin a``."""
        return cls(math.cos(a), math.sin(a))

    def path_matrix(self) -> np.ndarray:
        return np.array([[self.r, self.t], [self.t, -self.r]], dtype=float)


def beam_splitter(p: BeamSplitterParams) -> ElementUnitary:
    return ElementUnitary.on_path(p.path_matrix())


def controlled_phase(theta: float) -> ElementUnitary:
    """``diag(1, 1, 1, e^{i theta})``: phase on V polarization in the up arm."""
    if not math.isfinite(theta):
        raise PreconditionError("signal phase must be finite")
    return ElementUnitary(np.diag([1, 1, 1, np.exp(1j * theta)]))


def pmi_block(theta: float) -> ElementUnitary:
    """Polarizing Michelson block in the up arm.

    The PBS, the two double-passed quarter-wave plates and the test masses
    only ever act as ``(|H> + |V>)/sqrt2 -> (|H> + e^{i theta}|V>)/sqrt2`` on
    the up arm, which is exactly :func:`controlled_phase`.
    """
    return controlled_phase(theta)


def qwp_double_pass() -> np.ndarray:
    """Quarter-wave plate at pi/4 traversed twice: swaps H and V (2x2)."""
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def quarter_wave_plate(angle: float = math.pi / 4) -> np.ndarray:
    """Single-pass quarter-wave plate with fast axis at ``angle`` (2x2 Jones).

    Only used to show that two passes at pi/4 give :func:`qwp_double_pass`
    up to a global phase.
    """
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([1, 1j]) @ rot.T


def compensation(phi_c: float) -> ElementUnitary:
    """``diag(e^{i phi_c}, e^{i phi_c}, 1, 1)``: down-arm path phase."""
    if not math.isfinite(phi_c):
        raise PreconditionError("compensation phase must be finite")
    return ElementUnitary.on_path(np.diag([np.exp(1j * phi_c), 1]))


def von_neumann_coupling(theta: float) -> ElementUnitary:
    """``exp(-i theta A (x) sigma_y)`` with ``A = |0><0| - |1><1|`` on the path.

    The down branch rotates the polarization by ``+theta`` and the up branch
    by ``-theta``.
    """
    if not math.isfinite(theta):
        raise PreconditionError("coupling must be finite")
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return ElementUnitary(np.kron(np.diag([1, 0]), rot) + np.kron(np.diag([0, 1]), rot.T))
