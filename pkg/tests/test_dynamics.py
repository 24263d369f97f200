import numpy as np
import pytest

from duoc.dynamics import (
    ClassicalChannel,
    ConditionalEvolutionSpec,
    ReversibleSpec,
    apply_reversible,
    build_reversible,
    choi_matrix,
    classical_channel_map,
    conditional_evolution,
    validate_transformation,
)
from duoc.effects import Effect
from duoc.errors import DomainError, NotClassicalError, ShapeError
from duoc.linalg import is_unitary
from duoc.states import DensityState, PureStateSpec, basis_state_spec, build_pure_state, validate_pure_state
from duoc.systems import FactorPermutation, SystemSignature, parity_projector

SIG11 = SystemSignature(2, 1, 1)
SIG10 = SystemSignature(2, 1, 0)


def phi_plus_density():
    spec = PureStateSpec(SIG11, {(0,): 2**-0.5, (1,): 2**-0.5})
    return DensityState.from_vector(SIG11, build_pure_state(spec))


class TestReversible:
    def test_default_spec_is_identity(self):
        u = build_reversible(ReversibleSpec(), SIG11)
        np.testing.assert_allclose(u, np.eye(4))

    def test_shift_layer(self):
        u = build_reversible(ReversibleSpec(x_shifts=(1,)), SIG10)
        np.testing.assert_allclose(u.real, [[0, 1], [1, 0]])

    def test_phase_layer_convention(self):
        # Z^j multiplies |s> by omega^(s+j): never the identity, but the
        # j-dependence is only a global phase
        z0 = build_reversible(ReversibleSpec(z_phases=(0,)), SIG10)
        z1 = build_reversible(ReversibleSpec(z_phases=(1,)), SIG10)
        np.testing.assert_allclose(np.diag(z0), [1, -1])
        np.testing.assert_allclose(z1, -z0, atol=1e-14)

    def test_composite_is_unitary(self, rng):
        sig = SystemSignature(3, 2, 1)
        spec = ReversibleSpec(
            perm=FactorPermutation((1, 0), (0,)),
            x_shifts=(1, 2, 0),
            z_phases=(0, 1, 2),
        )
        u = build_reversible(spec, sig)
        assert is_unitary(u)

    def test_wrong_layer_length_rejected(self):
        with pytest.raises(DomainError):
            build_reversible(ReversibleSpec(x_shifts=(1,)), SIG11)

    def test_preserves_validity(self, rng):
        from duoc.oracle import random_valid_state

        sig = SystemSignature(3, 1, 2)
        for _ in range(5):
            spec = random_valid_state(sig, rng)
            v = build_pure_state(spec)
            u = build_reversible(
                ReversibleSpec(x_shifts=(2, 1, 0), z_phases=(1, 0, 2)), sig
            )
            rep = validate_pure_state(u @ v, sig)
            assert rep.valid

    def test_anti_shift_moves_parity(self):
        # X on the anti-dit shifts the parity read off the state by 1
        spec = PureStateSpec(SIG11, {(0,): 0.6, (1,): 0.8}, parity=(0,))
        v = build_pure_state(spec)
        u = build_reversible(ReversibleSpec(x_shifts=(0, 1)), SIG11)
        rep = validate_pure_state(u @ v, SIG11)
        assert rep.valid and rep.witness["parity"] == (1,)

    def test_phases_leave_parity_alone(self):
        spec = PureStateSpec(SIG11, {(0,): 0.6, (1,): 0.8}, parity=(1,))
        v = build_pure_state(spec)
        u = build_reversible(ReversibleSpec(z_phases=(1, 1)), SIG11)
        rep = validate_pure_state(u @ v, SIG11)
        assert rep.valid and rep.witness["parity"] == (1,)

    def test_apply_requires_unitary(self):
        rho = phi_plus_density()
        with pytest.raises(DomainError):
            apply_reversible(np.ones((4, 4)), rho)
        with pytest.raises(ShapeError):
            apply_reversible(np.eye(2), rho)


class TestClassicalChannel:
    def test_column_stochastic_enforced(self):
        with pytest.raises(DomainError):
            ClassicalChannel(np.array([[0.5, 0.2], [0.4, 0.8]]), 2, 1, 1)

    def test_map_acts_on_probabilities(self):
        ch = ClassicalChannel(np.array([[0.9, 0.2], [0.1, 0.8]]), 2, 1, 1)
        rho = DensityState(SIG10, np.diag([0.5, 0.5]).astype(complex))
        out = classical_channel_map(ch, rho)
        np.testing.assert_allclose(np.diag(out.matrix).real, [0.55, 0.45])

    def test_compose(self):
        a = ClassicalChannel(np.array([[0.0, 1.0], [1.0, 0.0]]), 2, 1, 1)
        b = ClassicalChannel(np.array([[0.9, 0.2], [0.1, 0.8]]), 2, 1, 1)
        ba = b.compose(a)
        np.testing.assert_allclose(ba.matrix, b.matrix @ a.matrix)

    def test_rejects_nondiagonal_input(self):
        mat = np.array([[0.5, 0.4], [0.4, 0.5]], dtype=complex)
        ch = ClassicalChannel(np.eye(2), 2, 1, 1)
        with pytest.raises(NotClassicalError):
            classical_channel_map(ch, DensityState(SIG10, mat))

    def test_output_length_change(self):
        # coarse-grain two bits to one
        table = np.zeros((2, 4))
        table[0, 0] = table[0, 1] = 1.0
        table[1, 2] = table[1, 3] = 1.0
        ch = ClassicalChannel(table, 2, 2, 1)
        sig = SystemSignature(2, 2, 0)
        rho = DensityState(sig, np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex))
        out = classical_channel_map(ch, rho)
        np.testing.assert_allclose(np.diag(out.matrix).real, [0.3, 0.7])


class TestConditionalEvolution:
    def setup_method(self):
        phi = build_pure_state(PureStateSpec(SIG11, {(0,): 2**-0.5, (1,): 2**-0.5}))
        self.ancilla = DensityState.from_vector(SIG11, phi)
        self.pair_proj = Effect(
            SIG11,
            np.outer(phi, phi.conj()),
            certificate=[(1.0, PureStateSpec(SIG11, {(0,): 2**-0.5, (1,): 2**-0.5}))],
        )

    def test_swap_style_transfer(self):
        # effect pairs the input dit with the ancilla anti-dit (positions
        # 0 and 2 of the [input | ancilla] layout); the surviving ancilla
        # dit carries the input state
        spec = ConditionalEvolutionSpec(SIG10, self.ancilla, self.pair_proj, (0, 2))
        rho = DensityState(SIG10, np.diag([0.3, 0.7]).astype(complex))
        prob, out = conditional_evolution(spec, rho)
        assert prob == pytest.approx(0.25, abs=1e-12)
        assert out.sig == SIG10
        np.testing.assert_allclose(np.diag(out.matrix).real, [0.3, 0.7], atol=1e-12)

    def test_parity_projector_effect_doubles_probability(self):
        p0 = Effect(
            SIG11,
            parity_projector(2, 0),
            certificate=[
                (1.0, basis_state_spec(SIG11, (0, 0))),
                (1.0, basis_state_spec(SIG11, (1, 1))),
            ],
        )
        spec = ConditionalEvolutionSpec(SIG10, self.ancilla, p0, (0, 2))
        rho = DensityState(SIG10, np.diag([0.3, 0.7]).astype(complex))
        prob, out = conditional_evolution(spec, rho)
        assert prob == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(np.diag(out.matrix).real, [0.3, 0.7], atol=1e-12)

    def test_effect_must_consume_all_input(self):
        with pytest.raises(DomainError):
            ConditionalEvolutionSpec(SIG10, self.ancilla, self.pair_proj, (1, 2))

    def test_kind_wiring_checked(self):
        with pytest.raises(DomainError):
            ConditionalEvolutionSpec(SIG10, self.ancilla, self.pair_proj, (0, 1))

    def test_output_positions(self):
        spec = ConditionalEvolutionSpec(SIG10, self.ancilla, self.pair_proj, (0, 2))
        assert spec.output_positions == (1,)

    def test_matches_oracle_contraction(self, rng):
        from duoc.oracle import oracle_conditional

        spec = ConditionalEvolutionSpec(SIG10, self.ancilla, self.pair_proj, (0, 2))
        rho = DensityState(SIG10, np.diag([0.6, 0.4]).astype(complex))
        prob, out = conditional_evolution(spec, rho)
        joint = np.kron(rho.matrix, self.ancilla.matrix)
        oprob, oraw = oracle_conditional(joint, 2, 3, self.pair_proj.op, (0, 2))
        assert prob == pytest.approx(oprob, abs=1e-12)
        np.testing.assert_allclose(out.matrix, oraw / oprob, atol=1e-12)


class TestChoiAndValidation:
    def test_identity_choi_is_maximally_entangled(self):
        c = choi_matrix(lambda r: r, 2)
        vals = np.linalg.eigvalsh(c)
        np.testing.assert_allclose(vals, [0, 0, 0, 2], atol=1e-12)

    def test_transpose_choi_not_psd(self):
        c = choi_matrix(lambda r: r.T, 2)
        assert np.linalg.eigvalsh(c)[0] < -0.5

    def test_identity_map_validates(self):
        rep = validate_transformation(lambda r: r, SIG10, SIG10)
        assert rep.valid
        assert "SAMPLED" in rep.flags

    def test_transpose_map_rejected(self):
        rep = validate_transformation(lambda r: r.T, SIG11, SIG11)
        assert not rep.valid

    def test_nonlinear_map_rejected(self):
        with pytest.raises(DomainError):
            validate_transformation(lambda r: r @ r, SIG10, SIG10)

    def test_parity_breaking_map_rejected(self):
        # measure-and-forget the anti-dit, leaving coherence on the pair
        def leaky(mat):
            out = mat.copy()
            return out

        def coherence_injector(mat):
            tr = np.trace(mat)
            plus = np.full((4, 4), 0.25, dtype=complex)
            return tr * plus

        rep = validate_transformation(coherence_injector, SIG11, SIG11)
        assert not rep.valid
