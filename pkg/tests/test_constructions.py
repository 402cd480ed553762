"""Circuit constructions: clean computation, Fourier extraction, felinity-to-parity,
amplification, block layers and the W-state chain."""
import math
from fractions import Fraction

import numpy as np
import pytest

from qaclab.circuit import ONE, ZERO, CircuitBuilder, CircuitError, H, cnot, u1
from qaclab.constructions.amplification import (
    amp_amp_report,
    amp_gamma,
    choose_grid_size,
    exact_amp_amp,
    reflection_from_prep,
    skewed_nekomata_amplify,
)
from qaclab.constructions.clean import (
    clean_amplitudes,
    clean_computation_report,
    make_clean,
    psi_star_report,
    t_k_state,
)
from qaclab.constructions.dicke_layer import binomial_point, dicke_felinity_layer, layer_block_count
from qaclab.constructions.felinity_parity import felinity_parity_report, felinity_to_parity_circuit
from qaclab.constructions.partition import (
    all_blocks_hit_exhaustive,
    all_blocks_hit_probability,
    block_count,
    block_partition,
    partition_report,
)
from qaclab.constructions.wchain import (
    any_0w,
    basis_vector,
    place,
    poor_mans_fanout,
    product_vector,
    w_chain_report,
    zero_w_weights,
)
from qaclab.corpus import make_rng, random_input_circuit, random_prep_circuit
from qaclab.experiments import amp_test_circuit, skewed_example
from qaclab.fourier import correlation, extract_fc, majority_fn, parity_fn
from qaclab.sim import dense_unitary, run, run_state, slice_norm
from qaclab.states import dicke_vector

hypothesis = pytest.importorskip("hypothesis")
from hypothesis import given, settings, strategies as st  # noqa: E402


def cat_prep(n):
    b = CircuitBuilder(0, n)
    b.layer(u1(0, H))
    for q in range(1, n):
        b.layer(cnot(0, q))
    return b.build()


class TestClean:
    @pytest.mark.parametrize("seed", range(6))
    def test_amplitudes_are_probabilities(self, seed):
        c = random_input_circuit(make_rng(seed))
        d = clean_amplitudes(c)
        np.testing.assert_allclose(d["amp0"], d["p0"], atol=1e-9)
        np.testing.assert_allclose(d["amp1"], d["p1"], atol=1e-9)

    def test_report_passes(self):
        assert clean_computation_report(random_input_circuit(make_rng(9))).passed

    def test_clean_circuit_output_is_last(self):
        c = random_input_circuit(make_rng(0))
        cc = make_clean(c)
        assert cc.output == cc.n_qubits - 1

    def test_needs_output(self):
        with pytest.raises(CircuitError):
            make_clean(CircuitBuilder(1, 1).build())


class TestFourierExtraction:
    def test_parity_two_top_level(self):
        np.testing.assert_allclose(t_k_state(parity_fn(2), 2).amplitudes, [0, 0, 0, 1], atol=1e-12)

    def test_majority_three_level_two(self):
        expected = np.zeros(8)
        expected[7] = -1
        np.testing.assert_allclose(t_k_state(majority_fn(3), 2).amplitudes, expected, atol=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_psi_star(self, seed):
        rep = psi_star_report(random_input_circuit(make_rng(seed)))
        assert rep.passed, rep.failures()


class TestFelinityParity:
    def test_cat_two_full_correlation(self):
        c = felinity_to_parity_circuit(cat_prep(2), [0, 1])
        assert correlation(extract_fc(c), parity_fn(2)) == pytest.approx(1.0, abs=1e-12)

    def test_zero_state_no_correlation(self):
        c = felinity_to_parity_circuit(CircuitBuilder(0, 2).build(), [0, 1])
        assert correlation(extract_fc(c), parity_fn(2)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_subsets(self, seed):
        c = random_prep_circuit(make_rng(seed), 2, 4)
        for T in ([0], [0, 1], list(range(c.n_qubits))):
            assert felinity_parity_report(c, T).passed

    def test_rejects_circuit_with_inputs(self):
        with pytest.raises(CircuitError):
            felinity_to_parity_circuit(random_input_circuit(make_rng(0)), [0])

    def test_bad_subset(self):
        with pytest.raises(CircuitError):
            felinity_to_parity_circuit(cat_prep(2), [0, 0])


class TestAmplification:
    def test_gamma_makes_amplitude_half(self):
        for alpha in (0.25, 0.4, 1.0):
            assert math.sqrt(alpha * (1 - amp_gamma(alpha))) == pytest.approx(0.5)

    @pytest.mark.parametrize("alpha", [0.25, 1 / 3, 0.5, 0.8, 1.0])
    @pytest.mark.parametrize("qubits", [1, 2, 3])
    def test_exact(self, alpha, qubits):
        c = amp_test_circuit(make_rng(7, qubits), alpha, qubits)
        assert amp_amp_report(c, alpha).passed

    def test_alpha_below_quarter_rejected(self):
        c = amp_test_circuit(make_rng(0), 0.2, 1)
        with pytest.raises(CircuitError):
            exact_amp_amp(c, 0.2, c.output)

    def test_weight_mismatch_rejected(self):
        c = amp_test_circuit(make_rng(0), 0.5, 1)
        with pytest.raises(CircuitError):
            exact_amp_amp(c, 0.3, c.output)

    def test_reflection_from_prep_is_involution(self):
        r = reflection_from_prep(random_prep_circuit(make_rng(2), 3, 3))
        u = dense_unitary(r)
        np.testing.assert_allclose(u @ u, np.eye(len(u)), atol=1e-10)

    def test_skewed_branches(self):
        rep = skewed_nekomata_amplify(skewed_example(), [0, 1])
        assert rep.passed, rep.failures()
        assert rep.measured["eps1"] == pytest.approx(2 / 7, abs=1e-9)
        assert rep.measured["m1"] == 3

    def test_skewed_without_bad_component(self):
        b = CircuitBuilder(0, 3)
        b.layer(u1(2, H))
        b.layer(cnot(2, 0))
        b.layer(cnot(2, 1))
        rep = skewed_nekomata_amplify(b.build(), [0, 1])
        assert rep.passed and rep.measured["eps1"] == pytest.approx(0.5)

    @pytest.mark.parametrize("eps1,m1", [(2 / 7, 3), (0.1, 10)])
    def test_grid_size(self, eps1, m1):
        assert choose_grid_size(eps1) == m1


class TestDickeLayer:
    @pytest.mark.parametrize("n,k", [(4, 2), (6, 3), (8, 4), (10, 5)])
    def test_report(self, n, k):
        _, rep = dicke_felinity_layer(n, k)
        assert rep.passed, rep.failures()

    def test_four_two_value(self):
        _, rep = dicke_felinity_layer(4, 2)
        assert rep.measured["all_ones_weight"] == pytest.approx(0.375, abs=1e-12)
        assert binomial_point(4, 2) == 0.375

    def test_block_count(self):
        assert [layer_block_count(k) for k in (1, 2, 4, 8, 16)] == [1, 2, 2, 2, 4]

    def test_bad_k(self):
        _, rep = dicke_felinity_layer(3, 3)
        assert rep.passed
        with pytest.raises(CircuitError):
            dicke_felinity_layer(3, 4)


class TestPartition:
    def test_full_weight_is_certain(self):
        blocks = block_partition(8, 8, seed=0)
        assert all_blocks_hit_probability(8, 8, blocks) == 1

    def test_block_count_clamps(self):
        assert block_count(1) == 1
        assert block_count(2) == 2
        assert block_count(64) == 1
        assert block_count(256) == 4

    def test_seeded_partition_is_deterministic(self):
        assert block_partition(12, 6, 5, 3) == block_partition(12, 6, 5, 3)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 10), st.data())
    def test_formula_matches_enumeration(self, n, data):
        k = data.draw(st.integers(1, n))
        ell = data.draw(st.integers(1, n))
        seed = data.draw(st.integers(0, 1000))
        blocks = block_partition(n, k, seed, ell)
        assert all_blocks_hit_probability(n, k, blocks) == all_blocks_hit_exhaustive(n, k, blocks)

    def test_two_blocks_example(self):
        rep = partition_report(12, 6, 0, 2)
        assert rep.passed
        assert rep.measured["probability"] == pytest.approx(0.999203, abs=1e-6)

    def test_probability_is_fraction(self):
        assert isinstance(all_blocks_hit_probability(4, 2, [[0, 1], [2, 3]]), Fraction)


class TestWChain:
    @pytest.mark.parametrize("n", range(2, 6))
    def test_report(self, n):
        rep = w_chain_report(n)
        assert rep.passed, rep.failures()

    def test_zero_w_weight(self):
        w = zero_w_weights(3)
        assert w["p1"] == pytest.approx((3 / 4) ** 3)

    def test_any_0w_state(self):
        c = any_0w(3, 0.6, 0.8j)
        psi = run(c)
        expected = place(c.n_qubits, [(range(3), 0.6 * basis_vector(3, 0) + 0.8j * dicke_vector(3, 1))])
        assert abs(np.vdot(expected.amplitudes, psi.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-9)

    def test_any_0w_normalization(self):
        with pytest.raises(CircuitError):
            any_0w(3, 0.6, 0.6)

    def test_fanout_two(self):
        c = poor_mans_fanout(2)
        N = c.n_qubits
        one = basis_vector(1, 1)
        out = run_state(c, place(N, [([0], one)]))
        # |1>_b |+>|+> with helpers clean
        expected = place(N, [([0], one), ([1, 2], product_vector(0.5, 2))])
        assert abs(np.vdot(expected.amplitudes, out.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-9)
        assert slice_norm(out, "bits", [3, 4, 5, 6], [0, 0, 0, 0]) == pytest.approx(1.0, abs=1e-9)

    def test_fanout_zero_fixed(self):
        c = poor_mans_fanout(2)
        out = run(c)
        assert out.probabilities()[0] == pytest.approx(1.0, abs=1e-9)

    def test_uses_only_one_qubit_states(self):
        assert ZERO.vector[0] == 1 and ONE.vector[1] == 1
