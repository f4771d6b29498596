"""
Pure-state kernel for a single photon carrying a path qubit and a
polarization qubit.

The composite basis order is fixed everywhere in the package::

    index 0: (down, H)
    index 1: (down, V)
    index 2: (up,   H)
    index 3: (up,   V)

i.e. the path qubit is the most significant factor and ``|down>`` is the
path ``|0>``. Amplitudes are stored as ``complex128`` (a cartesian
re/im pair), never in polar form. All values are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DegeneratePostSelectionError,
    NonUnitaryError,
    PreconditionError,
)

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
DEGENERATE_EPS = 1e-30

PATH = "path"
POLARIZATION = "polarization"

BASIS_LABELS = {
    PATH: ("down", "up"),
    POLARIZATION: ("H", "V"),
}
COMPOSITE_LABELS = (("down", "H"), ("down", "V"), ("up", "H"), ("up", "V"))


def _frozen(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"non-finite amplitude in {arr!r}")
    arr.flags.writeable = False
    return arr


def _check_norm(arr: np.ndarray, what: str) -> None:
    n2 = float(np.vdot(arr, arr).real)
    if abs(n2 - 1.0) > NORM_TOL:
        raise PreconditionError(
            f"{what} flagged normalized but has norm^2 = {n2!r}"
        )


@dataclass(frozen=True, eq=False)
class Qubit:
    """A two-level amplitude pair in either the path or polarization basis."""

    amplitudes: np.ndarray
    basis: str = POLARIZATION
    normalized: bool = True

    def __post_init__(self):
        if self.basis not in BASIS_LABELS:
            raise PreconditionError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes, (2,)))
        if self.normalized:
            _check_norm(self.amplitudes, f"{self.basis} qubit")

    @classmethod
    def path(cls, down, up, normalized=True) -> "Qubit":
        return cls(np.array([down, up]), PATH, normalized)

    @classmethod
    def polarization(cls, h, v, normalized=True) -> "Qubit":
        return cls(np.array([h, v]), POLARIZATION, normalized)

    @property
    def c0(self) -> complex:
        return complex(self.amplitudes[0])

    @property
    def c1(self) -> complex:
        return complex(self.amplitudes[1])

    def __repr__(self):
        a, b = BASIS_LABELS[self.basis]
        return f"Qubit({self.c0:.6g}|{a}> + {self.c1:.6g}|{b}>)"


@dataclass(frozen=True, eq=False)
class CompositeState:
    """Four amplitudes in the fixed (path, polarization) order above."""

    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes, (4,)))
        if self.normalized:
            _check_norm(self.amplitudes, "composite state")

    def amplitude(self, path: str, pol: str) -> complex:
        return complex(self.amplitudes[COMPOSITE_LABELS.index((path, pol))])

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``[path, polarization]``."""
        return self.amplitudes.reshape(2, 2)


@dataclass(frozen=True, eq=False)
class ElementUnitary:
    """A 4x4 unitary acting on :class:`CompositeState`.

    Construction fails with :class:`NonUnitaryError` if ``U^dagger U``
    deviates from the identity by more than ``UNITARY_TOL`` in any entry.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix, (4, 4))
        object.__setattr__(self, "matrix", m)
        dev = unitarity_deviation(m)
        if dev > UNITARY_TOL:
            i, j = np.unravel_index(
                np.argmax(np.abs(m.conj().T @ m - np.eye(4))), (4, 4)
            )
            raise NonUnitaryError(
                f"U^dagger U - I has max deviation {dev:.3e} at entry ({i}, {j})"
            )

    @classmethod
    def on_path(cls, m2) -> "ElementUnitary":
        """Lift a 2x2 path operator by tensoring the polarization identity."""
        return cls(np.kron(np.asarray(m2, dtype=np.complex128), np.eye(2)))

    @classmethod
    def on_polarization(cls, m2) -> "ElementUnitary":
        return cls(np.kron(np.eye(2), np.asarray(m2, dtype=np.complex128)))

    @classmethod
    def identity(cls) -> "ElementUnitary":
        return cls(np.eye(4))

    @property
    def dagger(self) -> "ElementUnitary":
        return ElementUnitary(self.matrix.conj().T)

    def __matmul__(self, other: "ElementUnitary") -> "ElementUnitary":
        # self @ other applies `other` first
        return ElementUnitary(self.matrix @ other.matrix)


def unitarity_deviation(m) -> float:
    """Largest entrywise magnitude of ``M^dagger M - I``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def tensor_product(sys: Qubit, pointer: Qubit) -> CompositeState:
    """Return ``|sys> (x) |pointer>`` with the path qubit as the outer factor."""
    if sys.basis != PATH or pointer.basis != POLARIZATION:
        raise PreconditionError("expected a path qubit and a polarization qubit")
    if not (sys.normalized and pointer.normalized):
        raise PreconditionError("tensor_product requires normalized inputs")
    return CompositeState(np.kron(sys.amplitudes, pointer.amplitudes))


def apply_unitary(u: ElementUnitary, s: CompositeState) -> CompositeState:
    out = u.matrix @ s.amplitudes
    return CompositeState(out, normalized=s.normalized)


def partial_project(bra: Qubit, s: CompositeState) -> Qubit:
    """Contract the path factor of ``s`` with ``<bra|``.

    The result is the unnormalized pointer state; its squared norm is the
    probability of the post-selection succeeding.
    """
    if bra.basis != PATH:
        raise PreconditionError("post-selection bra must be a path qubit")
    if not bra.normalized:
        raise PreconditionError("post-selection bra must be normalized")
    pointer = bra.amplitudes.conj() @ s.as_matrix()
    return Qubit(pointer, POLARIZATION, normalized=False)


State = Union[Qubit, CompositeState]


def norm_squared(s: State) -> float:
    return float(np.vdot(s.amplitudes, s.amplitudes).real)


def normalize(s: State, eps: float = DEGENERATE_EPS) -> State:
    n2 = norm_squared(s)
    if n2 <= eps:
        raise DegeneratePostSelectionError(
            f"cannot normalize a state with norm^2 = {n2:.3e} (<= {eps:g})"
        )
    amps = s.amplitudes / np.sqrt(n2)
    if isinstance(s, Qubit):
        return Qubit(amps, s.basis, normalized=True)
    return CompositeState(amps, normalized=True)


_S2 = 1 / np.sqrt(2)

DOWN = Qubit.path(1, 0)
UP = Qubit.path(0, 1)
H = Qubit.polarization(1, 0)
V = Qubit.polarization(0, 1)
PLUS = Qubit.polarization(_S2, _S2)
MINUS = Qubit.polarization(_S2, -_S2)
R = Qubit.polarization(_S2, 1j * _S2)
L = Qubit.polarization(_S2, -1j * _S2)

# sigma_plus = |+><+| - |-><-|, sigma_R = |R><R| - |L><L|, sigma_z = |H><H| - |V><V|
OBSERVABLES = {
    "sigma_plus": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "sigma_R": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "sigma_z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli_expectation(obs: str, q: Qubit) -> float:
    """Return ``<q|O|q>`` for ``obs`` in ``sigma_plus``, ``sigma_R``, ``sigma_z``."""
    if not q.normalized:
        raise PreconditionError("expectation values need a normalized qubit")
    try:
        op = OBSERVABLES[obs]
    except KeyError:
        raise PreconditionError(
            f"unknown observable {obs!r}; choose from {sorted(OBSERVABLES)}"
        ) from None
    return float(np.vdot(q.amplitudes, op @ q.amplitudes).real)


def equator_pointer(phi: float) -> Qubit:
    """``(|H> + e^{i phi}|V>)/sqrt(2)``."""
    return Qubit.polarization(_S2, _S2 * np.exp(1j * phi))
