"""Circuit model: gates, validation, dagger/compose/embed and the JSON format."""
import json
import math

import numpy as np
import pytest

from qaclab.circuit import (
    MINUS,
    ONE,
    PLUS,
    ZERO,
    Circuit,
    CircuitBuilder,
    CircuitError,
    H,
    SingleQubitState,
    SingleQubitUnitary,
    X,
    and_gate,
    cnot,
    compose,
    controlled_rot,
    cz,
    dagger,
    dumps,
    embed,
    eps_state,
    exact_gate,
    loads,
    nor_gate,
    or_gate,
    reflection,
    rot_gamma,
    rot_gamma_axis,
    state_prep_unitary,
    threshold_gate,
    u1,
    validate,
)
from qaclab.corpus import make_rng, random_prep_circuit
from qaclab.sim import dense_unitary, gate_matrix

hypothesis = pytest.importorskip("hypothesis")
from hypothesis import given, settings, strategies as st  # noqa: E402


class TestSingleQubit:
    def test_unnormalized_state_rejected(self):
        with pytest.raises(CircuitError):
            SingleQubitState(1.0, 1.0)

    def test_non_unitary_rejected(self):
        with pytest.raises(CircuitError):
            SingleQubitUnitary.from_matrix([[1, 1], [0, 1]])

    @pytest.mark.parametrize("eps", [0.0, 0.25, 0.5, 1.0])
    def test_eps_state_weights(self, eps):
        v = eps_state(eps).vector
        assert abs(abs(v[1]) ** 2 - eps) < 1e-15

    def test_eps_out_of_range(self):
        with pytest.raises(CircuitError):
            eps_state(1.5)

    @pytest.mark.parametrize("gamma", [0.0, 0.3, 0.5, 1.0])
    def test_rot_gamma_is_reflection_about_axis(self, gamma):
        v = rot_gamma_axis(gamma).vector
        np.testing.assert_allclose(rot_gamma(gamma).matrix, np.eye(2) - 2 * np.outer(v, v.conj()), atol=1e-12)

    @given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    def test_state_prep_maps_zero(self, theta, phase):
        alpha, beta = math.cos(theta), math.sin(theta) * complex(math.cos(phase), math.sin(phase))
        u = state_prep_unitary(alpha, beta)
        np.testing.assert_allclose(u.matrix[:, 0], [alpha, beta], atol=1e-12)


class TestGates:
    def test_reflection_from_hadamard_state(self):
        # I - 2|+><+|
        m = gate_matrix(reflection([0], [PLUS]), 1)
        np.testing.assert_allclose(m, [[0, -1], [-1, 0]], atol=1e-12)

    @pytest.mark.parametrize("x", range(8))
    def test_or_gate_truth_table(self, x):
        b = CircuitBuilder(2, 1)
        for g in or_gate([0, 1], 2):
            b.layer(g)
        u = dense_unitary(b.build())
        xs = x & 3
        out = x ^ (4 if xs else 0)
        assert abs(u[out, x] - 1) < 1e-12

    def test_nor_and_and_fire_on_extremes(self):
        nor = gate_matrix(nor_gate([0, 1], 2), 3)
        conj = gate_matrix(and_gate([0, 1], 2), 3)
        assert abs(nor[4, 0] - 1) < 1e-12
        assert abs(conj[7, 3] - 1) < 1e-12
        assert abs(nor[1, 1] - 1) < 1e-12  # control 0 is set: identity

    def test_controlled_rot_acts_only_when_controls_set(self):
        g = gate_matrix(controlled_rot([0], 1, 0.36), 2)
        np.testing.assert_allclose(g[np.ix_([0, 2], [0, 2])], np.eye(2), atol=1e-12)
        np.testing.assert_allclose(g[np.ix_([1, 3], [1, 3])], rot_gamma(0.36).matrix, atol=1e-12)

    @pytest.mark.parametrize("w,fires", [(0, [0]), (1, [1, 2]), (2, [3])])
    def test_exact_gate(self, w, fires):
        m = gate_matrix(exact_gate([0, 1], 2, w), 3)
        for x in range(4):
            assert abs(m[x ^ (4 if x in fires else 0), x] - 1) < 1e-12

    def test_threshold_gate(self):
        m = gate_matrix(threshold_gate([0, 1, 2], 3, 2), 4)
        for x in range(8):
            fire = bin(x).count("1") >= 2
            assert abs(m[x ^ (8 if fire else 0), x] - 1) < 1e-12

    def test_qac_legality(self):
        assert cnot(0, 1).is_qac_legal and cz(0, 1).is_qac_legal
        assert not exact_gate([0], 1, 1).is_qac_legal

    def test_controls_must_be_distinct(self):
        with pytest.raises(CircuitError):
            nor_gate([0, 1], 1)


class TestValidation:
    def test_qubit_reuse_in_layer(self):
        c = Circuit(2, 0, None, ((cnot(0, 1), cz(1, 0)),))
        assert any("reuse" in p for p in validate(c))

    def test_out_of_range(self):
        c = Circuit(1, 0, None, ((u1(3, X),),))
        assert any("out of range" in p for p in validate(c))

    def test_single_qubit_gates_may_share_layer_with_others(self):
        c = Circuit(2, 0, None, ((cnot(0, 1), u1(0, H)),))
        assert validate(c) == []

    def test_bad_output(self):
        assert validate(Circuit(1, 0, 5, ()))

    def test_builder_raises(self):
        with pytest.raises(CircuitError):
            CircuitBuilder(2, 0).layer(cnot(0, 1), cnot(1, 0)).build()

    def test_depth_and_size(self):
        b = CircuitBuilder(3, 0)
        b.layer(u1(0, H))
        b.layer(cnot(0, 1))
        b.layer(cnot(1, 2), u1(0, X))
        c = b.build()
        assert (c.depth(), c.size()) == (2, 2)


class TestTransforms:
    @pytest.mark.parametrize("seed", range(5))
    def test_dagger_inverts(self, seed):
        c = random_prep_circuit(make_rng(seed), 2, 4)
        u = dense_unitary(c)
        np.testing.assert_allclose(dense_unitary(dagger(c)) @ u, np.eye(len(u)), atol=1e-10)

    def test_compose_multiplies(self):
        a = random_prep_circuit(make_rng(1), 3, 3)
        b = random_prep_circuit(make_rng(2), 3, 3)
        np.testing.assert_allclose(dense_unitary(compose(a, b)), dense_unitary(b) @ dense_unitary(a), atol=1e-10)

    def test_compose_register_mismatch(self):
        with pytest.raises(CircuitError):
            compose(Circuit(1, 0), Circuit(2, 0))

    def test_embed_relabels(self):
        c = CircuitBuilder(2, 0).layer(cnot(0, 1)).build()
        e = embed(c, [2, 0], 3, 0)
        assert e.layers[0][0].qubits == (2, 0)

    def test_embed_not_injective(self):
        c = CircuitBuilder(2, 0).layer(cnot(0, 1)).build()
        with pytest.raises(CircuitError):
            embed(c, [1, 1], 3, 0)


class TestJson:
    @pytest.mark.parametrize("seed", range(4))
    def test_roundtrip(self, seed):
        c = random_prep_circuit(make_rng(seed), 2, 4)
        c2 = loads(dumps(c))
        np.testing.assert_allclose(dense_unitary(c2), dense_unitary(c), atol=1e-12)

    def test_roundtrip_primitives(self):
        b = CircuitBuilder(3, 1, output=3)
        b.layer(exact_gate([0, 1, 2], 3, 2))
        b.layer(reflection([0, 3], [ONE, MINUS]), u1(1, H))
        c = b.build()
        assert loads(dumps(c)) == c

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.update(extra=1),
            lambda d: d.pop("layers"),
            lambda d: d["layers"][0][0].update(colour="red"),
            lambda d: d["layers"][0][0].update(qubits=[0, 9]),
        ],
    )
    def test_rejects_malformed(self, mutate):
        c = CircuitBuilder(2, 0).layer(cnot(0, 1)).build()
        d = json.loads(dumps(c))
        mutate(d)
        with pytest.raises(CircuitError):
            loads(json.dumps(d))

    def test_reflection_state_kept(self):
        c = CircuitBuilder(1, 0).layer(reflection([0], [ZERO])).build()
        d = json.loads(dumps(c))
        assert d["layers"][0][0]["state"] == [[[1.0, 0.0], [0.0, 0.0]]]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_roundtrip_property(self, seed):
        c = random_prep_circuit(make_rng(seed), 2, 3)
        assert loads(dumps(c)) == c
