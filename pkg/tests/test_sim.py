"""Statevector simulator against the dense entry-by-entry oracle."""
import numpy as np
import pytest

from qaclab.circuit import ONE, PLUS, ZERO, CircuitBuilder, H, X, cnot, fanout_gate, parity_gate, u1
from qaclab.corpus import make_rng, random_density, random_input_circuit, random_prep_circuit, random_statevector
from qaclab.sim import (
    SimulationError,
    Statevector,
    amplitude,
    contract,
    dense_unitary,
    evolve,
    input_index,
    partial_trace,
    run,
    run_all_inputs,
    slice_norm,
    z_expectation,
)

hypothesis = pytest.importorskip("hypothesis")
from hypothesis import given, settings, strategies as st  # noqa: E402


class TestKernels:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dense_oracle(self, seed):
        c = random_prep_circuit(make_rng(seed), 2, 5)
        u = dense_unitary(c)
        np.testing.assert_allclose(run(c).amplitudes, u[:, 0], atol=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_all_inputs_batch(self, seed):
        c = random_input_circuit(make_rng(seed))
        cols = run_all_inputs(c)
        for x in range(2**c.n_inputs):
            np.testing.assert_allclose(cols[:, x], run(c, x).amplitudes, atol=1e-12)

    def test_primitives_match_oracle(self):
        b = CircuitBuilder(3, 2)
        b.layer(u1(0, H), u1(1, H), u1(2, H))
        b.layer(fanout_gate(0, [3, 4]))
        b.layer(parity_gate([1, 2, 3], 4))
        c = b.build()
        np.testing.assert_allclose(run(c).amplitudes, dense_unitary(c)[:, 0], atol=1e-12)

    def test_bell_pair(self):
        c = CircuitBuilder(0, 2).layer(u1(0, H)).layer(cnot(0, 1)).build()
        np.testing.assert_allclose(run(c).amplitudes, [2**-0.5, 0, 0, 2**-0.5], atol=1e-12)

    def test_little_endian_input(self):
        c = CircuitBuilder(2, 0).build()
        assert input_index(c, "01") == 1
        assert input_index(c, [0, 1]) == 2
        assert run(c, "10").amplitudes[2] == 1

    def test_bad_input(self):
        c = CircuitBuilder(2, 0).build()
        with pytest.raises(SimulationError):
            input_index(c, "012")

    def test_evolve_batch_shape(self):
        c = random_prep_circuit(make_rng(3), 3, 3)
        batch = np.eye(8, dtype=complex)[:, :3]
        out = evolve(c, batch)
        assert out.shape == (8, 3)

    def test_unitary_preserves_norm(self, rng):
        c = random_prep_circuit(rng, 4, 4)
        assert abs(run(c).norm() - 1) < 1e-12


class TestProjections:
    def test_contract_leaves_residue(self):
        psi = Statevector.product([PLUS, ONE, ZERO])
        res = contract(psi, [ONE], [1])
        np.testing.assert_allclose(res.amplitudes, [2**-0.5, 2**-0.5, 0, 0], atol=1e-12)
        assert not res.normalized

    def test_amplitude_full_bra(self):
        psi = Statevector.product([PLUS, ONE])
        assert abs(amplitude(psi, [PLUS, ONE]) - 1) < 1e-12
        with pytest.raises(SimulationError):
            amplitude(psi, [PLUS])

    @pytest.mark.parametrize("spec,value,expected", [
        ("bits", "11", 0.25), ("hamming_at_least", 1, 0.75), ("hamming_exact", 1, 0.5),
    ])
    def test_slice_norm(self, spec, value, expected):
        psi = Statevector.product([PLUS, PLUS])
        assert abs(slice_norm(psi, spec, [0, 1], value) - expected) < 1e-12

    def test_slice_norm_unknown(self):
        with pytest.raises(SimulationError):
            slice_norm(Statevector.basis(1, 0), "parity", [0], 0)

    def test_partial_trace_matches_density_path(self, rng):
        psi = random_statevector(rng, 4)
        a = partial_trace(psi, [2, 0])
        b = partial_trace(psi.density_matrix(), [2, 0])
        np.testing.assert_allclose(a.entries, b.entries, atol=1e-12)
        assert a.validate() == []

    def test_partial_trace_order(self):
        psi = Statevector.product([ZERO, ONE])
        rho = partial_trace(psi, [1, 0])
        assert abs(rho.entries[1, 1] - 1) < 1e-12  # qubit 1 became qubit 0

    def test_z_expectation(self):
        c = CircuitBuilder(0, 2).layer(u1(1, X)).build()
        psi = run(c)
        assert z_expectation(psi, 0) == 1.0 and z_expectation(psi, 1) == -1.0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 4))
    def test_partial_trace_is_density(self, seed, n):
        rho = random_density(make_rng(seed), n)
        keep = list(range(n - 1))
        assert partial_trace(rho, keep).validate() == []
