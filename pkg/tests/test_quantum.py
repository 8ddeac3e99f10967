import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdoe.errors import (
    NonPsdElement,
    NotResolutionOfIdentity,
    OutOfDomain,
    WrongDimension,
)
from qdoe.quantum import (
    SIGMA,
    AffineModel,
    Bloch3Model,
    BlochSubModel,
    PhaseAmplitudeModel,
    Povm,
    bloch_vector,
    merge_proportional,
    mix_povms,
    pauli_pvm,
    validate_povm,
)

I2 = np.eye(2, dtype=complex)


class TestValidatePovm:
    def test_pauli_z_projectors_pass(self):
        validate_povm(Povm([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))

    def test_duplicate_projector_fails_identity_sum(self):
        with pytest.raises(NotResolutionOfIdentity):
            validate_povm(Povm([np.diag([1.0, 0.0]), np.diag([1.0, 0.0])]))

    def test_zero_elements_are_permitted(self):
        validate_povm(Povm([0.5 * I2, 0.5 * I2, np.zeros((2, 2))]))

    def test_negative_eigenvalue_rejected(self):
        bad = np.diag([1.5, -0.5])
        with pytest.raises(NonPsdElement):
            validate_povm(Povm([bad, I2 - bad]))

    def test_non_hermitian_element_rejected_at_construction(self):
        with pytest.raises(WrongDimension):
            Povm([np.array([[0.0, 1.0], [0.0, 0.0]])])


class TestPauliPvm:
    def test_z_axis(self):
        povm = pauli_pvm(3)
        assert np.allclose(povm.elements[0], np.diag([1.0, 0.0]))
        assert np.allclose(povm.elements[1], np.diag([0.0, 1.0]))

    def test_x_axis(self):
        povm = pauli_pvm(1)
        assert np.allclose(povm.elements[0], 0.5 * np.array([[1, 1], [1, 1]]))
        assert np.allclose(povm.elements[1], 0.5 * np.array([[1, -1], [-1, 1]]))

    def test_y_axis(self):
        povm = pauli_pvm(2)
        assert np.allclose(povm.elements[0], 0.5 * np.array([[1, -1j], [1j, 1]]))
        assert np.allclose(povm.elements[1], 0.5 * np.array([[1, 1j], [-1j, 1]]))

    @pytest.mark.parametrize("axis", [1, 2, 3])
    def test_rank_one_orthogonal_projectors(self, axis):
        povm = pauli_pvm(axis)
        validate_povm(povm)
        for e in povm.elements:
            assert np.allclose(e @ e, e, atol=1e-12)
        cross = povm.elements[0] @ povm.elements[1]
        assert np.max(np.abs(cross)) < 1e-12


class TestStateAt:
    def test_completely_mixed(self, bloch3):
        assert np.allclose(bloch3.state_at([0, 0, 0]), 0.5 * I2)

    def test_diagonal_substitution(self, bloch3):
        assert np.allclose(bloch3.state_at([0, 0, 0.5]), np.diag([0.75, 0.25]))

    def test_phase_amplitude_state(self, phase_amplitude):
        rho = phase_amplitude.state_at([np.pi / 2, 0.5])
        expected = 0.5 * np.array([[1.0, -0.5j], [0.5j, 1.0]])
        assert np.allclose(rho, expected, atol=1e-12)

    def test_bloch_domain_boundary_rejected(self, bloch3):
        with pytest.raises(OutOfDomain):
            bloch3.state_at([0.0, 0.0, 1.0])

    def test_phase_amplitude_domain(self, phase_amplitude):
        with pytest.raises(OutOfDomain):
            phase_amplitude.state_at([0.3, 1.0])
        with pytest.raises(OutOfDomain):
            phase_amplitude.state_at([0.3, 0.0])

    def test_affine_positivity_check(self):
        model = AffineModel(np.diag([1.0, 0.0]), [SIGMA[2] / 2])
        with pytest.raises(OutOfDomain):
            model.state_at([0.5])
        rho = model.state_at([-0.5])
        assert np.allclose(rho, np.diag([0.75, 0.25]))

    @pytest.mark.parametrize(
        "model,sampler",
        [
            (Bloch3Model(), lambda rng: 0.98 * rng.random() * _unit3(rng)),
            (BlochSubModel([1]), lambda rng: np.array([rng.uniform(-0.98, 0.98)])),
            (
                BlochSubModel([1, 3]),
                lambda rng: rng.uniform(-0.69, 0.69, size=2),
            ),
            (
                PhaseAmplitudeModel(),
                lambda rng: np.array([rng.uniform(0, 2 * np.pi), rng.uniform(0.01, 0.99)]),
            ),
            (
                AffineModel(0.5 * I2, [SIGMA[0] / 2, SIGMA[2] / 2]),
                lambda rng: rng.uniform(-0.69, 0.69, size=2),
            ),
        ],
        ids=["bloch3", "bloch_sub1", "bloch_sub13", "phase_amplitude", "affine"],
    )
    def test_states_are_density_matrices_on_random_points(self, model, sampler, rng):
        for _ in range(1000):
            rho = model.state_at(sampler(rng))
            assert abs(np.trace(rho).real - 1.0) < 1e-10
            assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
            assert np.linalg.eigvalsh(rho).min() > -1e-10


def _unit3(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


class TestStateDerivative:
    def test_bloch_derivative_is_half_pauli(self, bloch3):
        assert np.allclose(bloch3.state_derivative([0.1, 0.2, 0.3], 2), SIGMA[2] / 2)

    def test_affine_derivative_is_generator(self):
        gen = SIGMA[0] / 2
        model = AffineModel(0.5 * I2, [gen])
        assert np.allclose(model.state_derivative([0.1], 0), gen)

    def test_phase_amplitude_phase_derivative(self, phase_amplitude):
        got = phase_amplitude.state_derivative([0.0, 0.5], 0)
        expected = 0.5 * np.array([[0.0, -0.5j], [0.5j, 0.0]])
        assert np.allclose(got, expected, atol=1e-12)

    @pytest.mark.parametrize(
        "model,theta",
        [
            (Bloch3Model(), [0.2, -0.3, 0.4]),
            (PhaseAmplitudeModel(), [1.1, 0.6]),
            (BlochSubModel([2, 3]), [0.25, -0.4]),
        ],
        ids=["bloch3", "phase_amplitude", "bloch_sub"],
    )
    def test_matches_central_finite_differences(self, model, theta):
        theta = np.asarray(theta, dtype=float)
        step = 1e-6
        for i in range(model.n_params):
            shift = np.zeros(model.n_params)
            shift[i] = step
            numeric = (model.state_at(theta + shift) - model.state_at(theta - shift)) / (
                2 * step
            )
            analytic = model.state_derivative(theta, i)
            scale = max(1.0, np.max(np.abs(analytic)))
            assert np.max(np.abs(numeric - analytic)) / scale < 1e-6

    def test_derivatives_are_traceless_hermitian(self, rng, phase_amplitude):
        for _ in range(25):
            theta = [rng.uniform(0, 2 * np.pi), rng.uniform(0.05, 0.95)]
            for i in range(2):
                d = phase_amplitude.state_derivative(theta, i)
                assert abs(np.trace(d)) < 1e-12
                assert np.max(np.abs(d - d.conj().T)) < 1e-12


class TestBlochVector:
    def test_mixed_state(self):
        assert np.allclose(bloch_vector(0.5 * I2), np.zeros(3))

    def test_diagonal_state(self):
        assert np.allclose(bloch_vector(np.diag([0.75, 0.25])), [0, 0, 0.5])

    def test_x_polarized(self):
        rho = 0.5 * np.array([[1.0, 0.5], [0.5, 1.0]])
        assert np.allclose(bloch_vector(rho), [0.5, 0, 0])

    def test_wrong_dimension(self):
        with pytest.raises(WrongDimension):
            bloch_vector(np.eye(3) / 3)

    def test_roundtrip_with_bloch_model(self, rng, bloch3):
        for _ in range(200):
            theta = 0.98 * rng.random() * _unit3(rng)
            assert np.max(np.abs(bloch_vector(bloch3.state_at(theta)) - theta)) < 1e-12


class TestMixAndMerge:
    def test_full_weight_retains_zero_elements(self):
        mixed = mix_povms(pauli_pvm(3), pauli_pvm(1), 1.0)
        assert len(mixed) == 4
        assert np.max(np.abs(mixed.elements[2])) == 0.0
        validate_povm(mixed)

    def test_half_mix_traces(self):
        mixed = mix_povms(pauli_pvm(3), pauli_pvm(1), 0.5)
        assert len(mixed) == 4
        for e in mixed.elements:
            assert np.trace(e).real == pytest.approx(0.5, abs=1e-12)
        validate_povm(mixed)

    def test_generic_mix_count_and_sum(self):
        mixed = mix_povms(pauli_pvm(2), pauli_pvm(1), 0.3)
        assert len(mixed) == 4
        assert np.allclose(sum(mixed.elements), I2, atol=1e-12)

    def test_merge_split_projector(self):
        p = np.diag([1.0, 0.0])
        q = I2 - p
        merged = merge_proportional(Povm([0.5 * p, 0.5 * p, q]))
        assert len(merged) == 2
        assert np.allclose(merged.elements[0], p)
        assert np.allclose(merged.elements[1], q)

    def test_merge_self_mix_recovers_pvm(self):
        mixed = mix_povms(pauli_pvm(3), pauli_pvm(3), 0.5)
        merged = merge_proportional(mixed)
        for got, want in zip(merged.elements, pauli_pvm(3).elements):
            assert np.max(np.abs(got - want)) < 1e-12

    def test_merge_drops_zero_element(self):
        povm = Povm([np.diag([1.0, 0.0]), np.zeros((2, 2)), np.diag([0.0, 1.0])])
        merged = merge_proportional(povm)
        assert len(merged) == 2

    @settings(max_examples=40, deadline=None)
    @given(lam=st.floats(0.0, 1.0), axis=st.sampled_from([1, 2, 3]))
    def test_self_mix_any_weight_merges_back(self, lam, axis):
        original = pauli_pvm(axis)
        merged = merge_proportional(mix_povms(original, original, lam))
        assert len(merged) == len(original)
        for got, want in zip(merged.elements, original.elements):
            assert np.max(np.abs(got - want)) < 1e-12
