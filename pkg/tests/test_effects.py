import numpy as np
import pytest

from duoc.effects import (
    Effect,
    Povm,
    born_probabilities,
    classical_povm,
    conditional_state,
    unit_effect,
    validate_effect,
    witness_povm,
    worst_case_no_probability,
)
from duoc.errors import DomainError
from duoc.states import DensityState, PureStateSpec, build_pure_state
from duoc.systems import SystemSignature

SIG11 = SystemSignature(2, 1, 1)


def pair_state(p, parity=0):
    spec = PureStateSpec(
        SIG11, {(0,): np.sqrt(p), (1,): np.sqrt(1 - p)}, parity=(parity,)
    )
    return DensityState.from_vector(SIG11, build_pure_state(spec))


class TestEffect:
    def test_operator_range_enforced(self):
        with pytest.raises(DomainError):
            Effect(SIG11, 2.0 * np.eye(4))
        with pytest.raises(DomainError):
            Effect(SIG11, -0.1 * np.eye(4))

    def test_hermiticity_enforced(self):
        op = np.zeros((4, 4), dtype=complex)
        op[0, 1] = 1.0
        with pytest.raises(DomainError):
            Effect(SIG11, op)

    def test_identity_is_an_effect(self):
        Effect(SIG11, np.eye(4))


class TestPovm:
    def test_completeness_enforced(self):
        half = Effect(SIG11, 0.5 * np.eye(4))
        with pytest.raises(DomainError):
            Povm([half])
        Povm([half, half])

    def test_mixed_signatures_rejected(self):
        a = Effect(SIG11, np.eye(4))
        b = Effect(SystemSignature(2, 2, 0), np.zeros((4, 4)))
        with pytest.raises(DomainError):
            Povm([a, b])


class TestValidateEffect:
    def test_diagonal_classical_effect_valid(self):
        sig = SystemSignature(2, 1, 0)
        e = Effect(sig, np.diag([0.3, 0.9]).astype(complex))
        assert validate_effect(e).valid

    def test_offdiagonal_classical_effect_invalid(self):
        sig = SystemSignature(2, 1, 0)
        e = Effect(sig, np.full((2, 2), 0.5))
        assert not validate_effect(e).valid

    def test_pair_sector_block_criterion(self):
        # projector onto (|00> + |11>)/sqrt(2): inside one sector, valid
        phi = build_pure_state(PureStateSpec(SIG11, {(0,): 2**-0.5, (1,): 2**-0.5}))
        e = Effect(SIG11, np.outer(phi, phi.conj()))
        assert validate_effect(e).valid
        # projector onto (|00> + |01>)/sqrt(2): crosses sectors, invalid
        v = np.zeros(4, dtype=complex)
        v[0] = v[1] = 2**-0.5
        bad = Effect(SIG11, np.outer(v, v.conj()))
        assert not validate_effect(bad).valid

    def test_certificate_path(self):
        spec = PureStateSpec(SIG11, {(0,): 0.6, (1,): 0.8})
        v = build_pure_state(spec)
        e = Effect(SIG11, 0.7 * np.outer(v, v.conj()), certificate=[(0.7, spec)])
        rep = validate_effect(e)
        assert rep.valid and rep.witness == "certificate"


class TestBorn:
    def test_probabilities_sum_to_one(self, rng):
        rho = pair_state(0.3)
        povm = witness_povm(0.7)
        probs = born_probabilities(povm, rho)
        assert probs.shape == (2,)
        assert abs(probs.sum() - 1.0) < 1e-10

    def test_signature_mismatch_rejected(self):
        rho = DensityState(SystemSignature(2, 1, 0), np.diag([1.0, 0]).astype(complex))
        with pytest.raises(DomainError):
            born_probabilities(witness_povm(0.5), rho)

    def test_unit_effect_probability_one(self):
        rho = pair_state(0.42)
        povm = Povm([unit_effect(SIG11)])
        assert born_probabilities(povm, rho)[0] == pytest.approx(1.0)


class TestConditionalState:
    def test_pair_collapses_to_matching_antidigit(self):
        rho = pair_state(0.5, parity=1)
        e = Effect(SystemSignature(2, 1, 0), np.diag([1.0, 0.0]))
        prob, cond = conditional_state(rho, e, (0,))
        assert prob == pytest.approx(0.5)
        # parity 1 pairs dit 0 with anti-dit 1
        np.testing.assert_allclose(np.diag(cond.matrix).real, [0, 1], atol=1e-12)

    def test_zero_probability_returns_none(self):
        rho = pair_state(1 - 1e-18)  # essentially |00>
        e = Effect(SystemSignature(2, 1, 0), np.diag([0.0, 1.0]))
        prob, cond = conditional_state(rho, e, (0,))
        assert prob == pytest.approx(0.0, abs=1e-12)
        assert cond is None

    def test_must_leave_a_factor(self):
        rho = pair_state(0.5)
        e = unit_effect(SIG11)
        with pytest.raises(DomainError):
            conditional_state(rho, e, (0, 1))

    def test_kind_mismatch_rejected(self):
        rho = pair_state(0.5)
        e = Effect(SystemSignature(2, 0, 1), np.diag([1.0, 0.0]))
        with pytest.raises(DomainError):
            conditional_state(rho, e, (0,))


class TestClassicalPovm:
    def test_table_columns_must_be_distributions(self):
        sig = SystemSignature(2, 1, 0)
        with pytest.raises(DomainError):
            classical_povm(np.array([[0.5, 0.2], [0.4, 0.8]]), sig)

    def test_effects_are_diagonal_with_certificates(self):
        sig = SystemSignature(2, 1, 0)
        povm = classical_povm(np.array([[0.9, 0.2], [0.1, 0.8]]), sig)
        assert len(povm) == 2
        for e in povm.effects:
            assert validate_effect(e).valid


class TestWitnessPovm:
    def test_completeness(self):
        povm = witness_povm(0.3)
        total = sum(e.op for e in povm.effects)
        np.testing.assert_allclose(total, np.eye(4), atol=1e-12)

    def test_detects_target_state(self):
        rho = pair_state(0.3)
        p_yes, p_no = born_probabilities(witness_povm(0.3), rho)
        assert p_yes == pytest.approx(1.0, abs=1e-12)
        assert abs(p_no) < 1e-12

    def test_no_probability_on_basis_states(self):
        # p(no | ij) = 1 - p for 00, 1 for 01 and 10, p for 11
        p = 0.3
        povm = witness_povm(p)
        expect = {(0, 0): 1 - p, (0, 1): 1.0, (1, 0): 1.0, (1, 1): p}
        for (i, j), want in expect.items():
            mat = np.zeros((4, 4), dtype=complex)
            mat[2 * i + j, 2 * i + j] = 1.0
            rho = DensityState(SIG11, mat)
            p_no = born_probabilities(povm, rho)[1]
            assert p_no == pytest.approx(want, abs=1e-12)

    def test_no_certificate_is_valid(self):
        povm = witness_povm(0.4)
        for e in povm.effects:
            assert validate_effect(e).valid

    def test_shifted_parity_variant(self):
        rho = pair_state(0.3, parity=1)
        p_yes, p_no = born_probabilities(witness_povm(0.3, parity=1), rho)
        assert p_yes == pytest.approx(1.0, abs=1e-12)

    def test_p_range_enforced(self):
        with pytest.raises(DomainError):
            witness_povm(0.0)
        with pytest.raises(DomainError):
            witness_povm(1.2)


class TestWorstCaseNo:
    @pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.8])
    def test_matches_min_p_bound(self, p):
        value, gamma = worst_case_no_probability(p, grid_step=0.05)
        assert value == pytest.approx(min(p, 1 - p), abs=1e-12)

    def test_matches_independent_grid_oracle(self):
        from duoc.oracle import GridSpec, separable_grid_min

        for p in (0.2, 0.35):
            engine, _ = worst_case_no_probability(p, grid_step=0.05)
            oracle = separable_grid_min(p, GridSpec(0.05))
            assert engine == pytest.approx(oracle, abs=1e-12)

    def test_returned_gamma_achieves_minimum(self):
        from duoc.states import build_separable

        p = 0.3
        value, gamma = worst_case_no_probability(p, grid_step=0.1)
        rho = build_separable(gamma, SIG11)
        p_no = born_probabilities(witness_povm(p), rho)[1]
        assert p_no == pytest.approx(value, abs=1e-12)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            worst_case_no_probability(0.0)
        with pytest.raises(DomainError):
            worst_case_no_probability(0.3, grid_step=0.5)
