import math

import numpy as np
import pytest
from scipy.linalg import expm

from weakamp import core
from weakamp.core import CompositeState, ElementUnitary, Qubit, apply_unitary, tensor_product, unitarity_deviation
from weakamp.errors import PreconditionError
from weakamp.optics import (
    BeamSplitterParams,
    beam_splitter,
    compensation,
    controlled_phase,
    pmi_block,
    quarter_wave_plate,
    qwp_double_pass,
    von_neumann_coupling,
)

S2 = 1 / math.sqrt(2)
SOURCE = tensor_product(core.DOWN, core.PLUS)


class TestBeamSplitter:
    def test_rejects_unnormalized(self):
        with pytest.raises(PreconditionError):
            BeamSplitterParams(0.6, 0.6)

    def test_mirror(self):
        out = apply_unitary(beam_splitter(BeamSplitterParams(1, 0)), SOURCE)
        np.testing.assert_allclose(out.amplitudes, [S2, S2, 0, 0])

    def test_balanced(self):
        out = apply_unitary(beam_splitter(BeamSplitterParams(S2, S2)), tensor_product(core.DOWN, core.H))
        np.testing.assert_allclose(out.amplitudes, [S2, 0, S2, 0], atol=1e-15)

    def test_preparation_state(self):
        out = apply_unitary(beam_splitter(BeamSplitterParams(0.6, 0.8)), SOURCE)
        expected = np.kron([0.6, 0.8], [S2, S2])
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)

    def test_determinant(self):
        for a in np.linspace(-3, 3, 13):
            m = BeamSplitterParams.from_angle(a).path_matrix()
            assert np.linalg.det(m) == pytest.approx(-1.0, abs=1e-12)


class TestControlledPhase:
    def test_zero_is_identity(self):
        np.testing.assert_array_equal(controlled_phase(0).matrix, np.eye(4))

    def test_half_turn(self):
        out = apply_unitary(controlled_phase(math.pi), CompositeState([0, 0, 0, 1]))
        np.testing.assert_allclose(out.amplitudes, [0, 0, 0, -1], atol=1e-15)

    def test_interaction_output(self):
        theta = 0.05
        prepared = tensor_product(Qubit.path(S2, S2), core.PLUS)
        out = apply_unitary(controlled_phase(theta), prepared)
        expected = np.concatenate([S2 * np.array([S2, S2]), S2 * np.array([S2, S2 * np.exp(1j * theta)])])
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)

    def test_additive(self):
        rng = np.random.default_rng(3)
        for a, b in rng.uniform(-4, 4, size=(50, 2)):
            np.testing.assert_allclose(
                (controlled_phase(a) @ controlled_phase(b)).matrix, controlled_phase(a + b).matrix, atol=1e-12
            )


class TestPmi:
    def test_matches_controlled_phase(self):
        for theta in (0.0, 1e-6, 0.3, math.pi, -2.0):
            np.testing.assert_array_equal(pmi_block(theta).matrix, controlled_phase(theta).matrix)

    def test_up_arm_plus(self):
        theta = 0.4
        out = apply_unitary(pmi_block(theta), tensor_product(core.UP, core.PLUS))
        np.testing.assert_allclose(out.amplitudes, [0, 0, S2, S2 * np.exp(1j * theta)], atol=1e-15)

    def test_down_arm_untouched(self):
        out = apply_unitary(pmi_block(0.4), CompositeState([1, 0, 0, 0]))
        np.testing.assert_array_equal(out.amplitudes, [1, 0, 0, 0])

    def test_internal_decomposition(self):
        # PBS splits H/V into the two inner arms; each polarization picks up its
        # arm phase, then the double-passed QWP swaps H<->V so that both leave
        # through the output port. A second swap restores the labels.
        theta = 0.37
        arm_phases = np.diag([1, np.exp(1j * theta)])
        swap = qwp_double_pass()
        pmi_pol = swap @ swap @ arm_phases
        assembled = np.kron(np.diag([1, 0]), np.eye(2)) + np.kron(np.diag([0, 1]), pmi_pol)
        np.testing.assert_allclose(assembled, pmi_block(theta).matrix, atol=1e-15)


class TestQwp:
    def test_swaps(self):
        np.testing.assert_array_equal(qwp_double_pass() @ [1, 0], [0, 1])
        np.testing.assert_array_equal(qwp_double_pass() @ [0, 1], [1, 0])

    def test_involution(self):
        np.testing.assert_array_equal(qwp_double_pass() @ qwp_double_pass(), np.eye(2))

    def test_two_passes_at_45_degrees(self):
        m = quarter_wave_plate() @ quarter_wave_plate()
        # equal to the H<->V swap up to a global phase
        g = m[0, 1] / qwp_double_pass()[0, 1]
        np.testing.assert_allclose(m, g * qwp_double_pass(), atol=1e-15)
        assert abs(g) == pytest.approx(1.0)


class TestCompensation:
    def test_zero(self):
        np.testing.assert_array_equal(compensation(0.0).matrix, np.eye(4))

    def test_down_arm(self):
        out = apply_unitary(compensation(math.pi / 3), CompositeState([1, 0, 0, 0]))
        np.testing.assert_allclose(out.amplitudes, [np.exp(1j * math.pi / 3), 0, 0, 0], atol=1e-15)

    def test_polarization_independent(self):
        m = compensation(0.7).matrix
        assert m[0, 0] == m[1, 1] and m[2, 2] == m[3, 3] == 1


class TestVonNeumannCoupling:
    def test_matches_matrix_exponential(self):
        a = np.diag([1, -1])
        sy = np.array([[0, -1j], [1j, 0]])
        for theta in (0.0, 1e-3, 0.4, -2.5):
            np.testing.assert_allclose(
                von_neumann_coupling(theta).matrix, expm(-1j * theta * np.kron(a, sy)), atol=1e-13
            )


def test_every_constructor_unitary():
    rng = np.random.default_rng(99)
    for _ in range(500):
        a, theta, phi_c = rng.uniform(-2 * math.pi, 2 * math.pi, size=3)
        for u in (
            beam_splitter(BeamSplitterParams.from_angle(a)),
            controlled_phase(theta),
            pmi_block(theta),
            compensation(phi_c),
            von_neumann_coupling(theta),
            ElementUnitary.on_polarization(qwp_double_pass()),
            ElementUnitary.on_polarization(quarter_wave_plate(a)),
        ):
            assert unitarity_deviation(u.matrix) < 1e-12
