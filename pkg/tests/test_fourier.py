"""Boolean Fourier analysis and the extracted output function of a circuit."""
import numpy as np
import pytest

from qaclab.circuit import CircuitBuilder, cnot
from qaclab.corpus import make_rng, random_input_circuit
from qaclab.fourier import (
    BooleanFn,
    FourierError,
    character,
    correlation,
    dump_truth_table,
    extract_fc,
    inverse_wht,
    load_truth_table,
    maj_truncate,
    majority_fn,
    observable_oc,
    parity_fn,
    popcounts,
    spectral_correlation,
    wgk,
    wht,
)

hypothesis = pytest.importorskip("hypothesis")
from hypothesis import given, settings, strategies as st  # noqa: E402
from hypothesis.extra.numpy import arrays  # noqa: E402


def naive_coefficients(f: BooleanFn) -> np.ndarray:
    n = f.n
    xs = np.arange(2**n)
    return np.array([np.mean(f.table * (-1.0) ** popcounts(n)[xs & s]) for s in range(2**n)])


class TestTransform:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_parity_is_top_character(self, n):
        spec = wht(parity_fn(n))
        assert spec[2**n - 1] == pytest.approx(1.0)
        assert np.sum(spec.coeffs**2) == pytest.approx(1.0)

    def test_majority_three(self):
        spec = wht(majority_fn(3))
        for s in (1, 2, 4):
            assert spec[s] == pytest.approx(0.5)
        assert spec[7] == pytest.approx(-0.5)

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_fast_matches_naive(self, n):
        f = BooleanFn(n, make_rng(n).uniform(-1, 1, 2**n))
        np.testing.assert_allclose(wht(f).coeffs, naive_coefficients(f), atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, 16, elements=st.floats(-1, 1)))
    def test_parseval_and_inverse(self, table):
        f = BooleanFn(4, table)
        spec = wht(f)
        assert np.sum(spec.coeffs**2) == pytest.approx(np.mean(table**2), abs=1e-12)
        np.testing.assert_allclose(inverse_wht(spec).table, table, atol=1e-12)

    def test_levels_sum(self):
        spec = wht(majority_fn(5))
        lv = spec.levels()
        assert wgk(spec, 3) == pytest.approx(lv[3:].sum())
        assert wgk(spec, 0) == pytest.approx(1.0)

    def test_correlation_paths_agree(self, rng):
        f = BooleanFn(4, rng.uniform(-1, 1, 16))
        g = majority_fn(4)
        assert correlation(f, g) == pytest.approx(spectral_correlation(f, g), abs=1e-12)

    def test_character(self):
        assert correlation(character(3, 5), character(3, 5)) == pytest.approx(1)
        assert correlation(character(3, 5), character(3, 3)) == pytest.approx(0)

    def test_bounded_check(self):
        with pytest.raises(FourierError):
            BooleanFn(1, [2.0, 0.0])


class TestTruncation:
    def test_below_plus_at_least_recovers(self):
        hi = maj_truncate(5, 3, "at_least")
        lo = maj_truncate(5, 3, "below")
        np.testing.assert_allclose(hi.table + lo.table, majority_fn(5).table, atol=1e-12)

    def test_unknown_mode(self):
        with pytest.raises(FourierError):
            maj_truncate(3, 1, "middle")

    def test_truth_table_roundtrip(self):
        f = maj_truncate(3, 2)
        g = load_truth_table(dump_truth_table(f))
        np.testing.assert_array_equal(f.table, g.table)

    def test_truth_table_length(self):
        with pytest.raises(FourierError):
            load_truth_table("1\n0\n1\n")


class TestCircuitFunction:
    def test_cnot_copies_input(self):
        c = CircuitBuilder(1, 1, output=1).layer(cnot(0, 1)).build()
        spec = wht(extract_fc(c))
        assert spec[1] == pytest.approx(1.0)
        assert spec[0] == pytest.approx(0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_extract_matches_observable_diagonal(self, seed):
        c = random_input_circuit(make_rng(seed))
        f = extract_fc(c)
        np.testing.assert_allclose(np.real(np.diag(observable_oc(c))), f.table, atol=1e-10)

    def test_needs_output(self):
        with pytest.raises(FourierError):
            extract_fc(CircuitBuilder(1, 1).build())
