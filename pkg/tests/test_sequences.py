"""Sequence/spectrum algebra against independent oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shorteq import (
    AliasError,
    Sequence,
    Spectrum,
    add,
    adjoint,
    autocorrelation,
    convolve,
    delta,
    from_spectrum,
    inner,
    subtract,
    to_spectrum,
)


def naive_convolve(a: Sequence, b: Sequence) -> Sequence:
    """O(n^2) double-sum convolution, the definition itself."""
    if a.is_zero or b.is_zero:
        return Sequence.zero()
    start = a.start + b.start
    out = np.zeros(len(a) + len(b) - 1, dtype=np.complex128)
    for i, av in enumerate(a.taps):
        for j, bv in enumerate(b.taps):
            out[i + j] += av * bv
    return Sequence(start, out)


def random_seq(rng, max_len=8, complex_ok=True, start_span=5):
    n = int(rng.integers(1, max_len + 1))
    taps = rng.normal(size=n)
    if complex_ok:
        taps = taps + 1j * rng.normal(size=n)
    taps[0] += 2.0  # keep endpoints clear of the trim threshold
    taps[-1] += 2.0
    return Sequence(int(rng.integers(-start_span, start_span + 1)), taps)


class TestCanonicalForm:
    def test_trims_zero_ends(self):
        s = Sequence(3, [0.0, 0.0, 1.0, 2.0, 0.0])
        assert s.start == 5
        assert np.allclose(s.taps, [1.0, 2.0])

    def test_zero_sequence(self):
        s = Sequence(4, [0.0, 0.0])
        assert s.is_zero and s.start == 0 and len(s) == 0

    def test_relative_trim_threshold(self):
        s = Sequence(0, [1e-20, 1.0, 1e-20])
        assert len(s) == 1 and s.start == 1

    def test_taps_readonly(self):
        s = Sequence(0, [1.0, 2.0])
        with pytest.raises(ValueError):
            s.taps[0] = 5.0

    def test_serialization_roundtrip(self):
        s = Sequence(-2, [1.0 + 2j, 0.5, -1.0])
        assert np.allclose(Sequence.from_dict(s.to_dict()).taps, s.taps)
        assert Sequence.from_dict(s.to_dict()).start == s.start


class TestConvolve:
    def test_identity_element(self):
        a = Sequence(-1, [1.0, 2.0, 3.0])
        c = convolve(a, delta())
        assert c.start == a.start and np.allclose(c.taps, a.taps)

    def test_telescoping(self):
        c = convolve(Sequence(0, [1.0, 1.0]), Sequence(0, [1.0, -1.0]))
        assert c.start == 0 and np.allclose(c.taps, [1.0, 0.0, -1.0])

    def test_matches_double_sum_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            a = random_seq(rng, 5)
            b = random_seq(rng, 5)
            got = convolve(a, b)
            want = naive_convolve(a, b)
            assert got.start == want.start
            assert np.abs(got.taps - want.taps).max() < 1e-12

    def test_zero_in_zero_out(self):
        assert convolve(Sequence.zero(), delta()).is_zero


class TestAdjoint:
    def test_delta_fixed_point(self):
        d = adjoint(delta())
        assert d.start == 0 and np.allclose(d.taps, [1.0])

    def test_definition_on_pair(self):
        a = adjoint(Sequence(0, [1.0, 2.0]))
        assert a.start == -1 and np.allclose(a.taps, [2.0, 1.0])

    def test_adjoint_identity(self):
        # <a*b, c> == <b, adj(a)*c>, both sides evaluated independently
        rng = np.random.default_rng(2)
        for _ in range(100):
            a, b, c = (random_seq(rng) for _ in range(3))
            lhs = inner(convolve(a, b), c)
            rhs = inner(b, convolve(adjoint(a), c))
            assert abs(lhs - rhs) < 1e-12


class TestInner:
    def test_norm_definition(self):
        rng = np.random.default_rng(3)
        a = random_seq(rng)
        v = inner(a, a)
        assert abs(v.imag) < 1e-14 and v.real >= 0
        assert abs(v.real - a.energy()) < 1e-12

    def test_disjoint_supports(self):
        assert inner(Sequence(0, [1.0]), Sequence(5, [1.0])) == 0

    def test_parseval_quadrature_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a = random_seq(rng, 6)
            b = random_seq(rng, 6)
            n = 256
            sa = to_spectrum(a, n)
            sb = to_spectrum(b, n)
            grid = complex(np.mean(np.conj(sa.values) * sb.values))
            assert abs(inner(a, b) - grid) < 1e-10


class TestSpectrumRoundTrip:
    def test_delta_flat(self):
        s = to_spectrum(delta(), 64)
        assert np.allclose(s.values, 1.0)
        back = from_spectrum(s, max_len=4)
        assert back.start == 0 and np.allclose(back.taps, [1.0])

    def test_two_tap_samples(self):
        s = to_spectrum(Sequence(0, [1.0, 0.5]), 128)
        expect = 1.0 + 0.5 * np.exp(-1j * s.omega)
        assert np.abs(s.values - expect).max() < 1e-12

    def test_roundtrip_direct_dtft_oracle(self):
        rng = np.random.default_rng(5)
        a = Sequence(-3, rng.normal(size=9) + 1j * rng.normal(size=9))
        n = 1024
        spec = to_spectrum(a, n)
        # direct DTFT sum at the grid points
        omega = spec.omega
        direct = np.zeros(n, dtype=np.complex128)
        for k, tap in enumerate(a.taps):
            direct += tap * np.exp(-1j * (a.start + k) * omega)
        assert np.abs(spec.values - direct).max() < 1e-10
        back = from_spectrum(spec, max_len=16)
        assert back.start == a.start
        assert np.abs(back.taps - a.taps).max() < 1e-10

    def test_grid_too_coarse_raises(self):
        with pytest.raises(AliasError):
            to_spectrum(Sequence(0, np.ones(8)), 32)

    def test_from_spectrum_alias_guard(self):
        a = Sequence(0, np.ones(12))
        with pytest.raises(AliasError):
            from_spectrum(to_spectrum(a, 256), max_len=4)

    def test_power_of_two_enforced(self):
        with pytest.raises(ValueError):
            Spectrum(np.ones(100))


class TestAutocorrelation:
    def test_delta(self):
        r = autocorrelation(delta())
        assert r.start == 0 and np.allclose(r.taps, [1.0])

    def test_hand_sum(self):
        r = autocorrelation(Sequence(0, [1.0, 1.0]))
        assert r.start == -1 and np.allclose(r.taps, [1.0, 2.0, 1.0])

    def test_matches_adjoint_convolution(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = random_seq(rng, 6)
            got = autocorrelation(a)
            want = convolve(adjoint(a), a)
            assert got.start == want.start
            assert np.abs(got.taps - want.taps).max() < 1e-12

    def test_hermitian_symmetry(self):
        rng = np.random.default_rng(7)
        a = random_seq(rng, 6)
        r = autocorrelation(a)
        for k in range(r.end + 1):
            assert abs(r.tap(-k) - np.conj(r.tap(k))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_convolution_commutes_and_associates(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_seq(rng, 5) for _ in range(3))
    ab = convolve(a, b)
    ba = convolve(b, a)
    assert ab.start == ba.start and np.abs(ab.taps - ba.taps).max() < 1e-12
    lhs = convolve(ab, c)
    rhs = convolve(a, convolve(b, c))
    assert lhs.start == rhs.start and np.abs(lhs.taps - rhs.taps).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parseval_and_spectrum_product(seed):
    rng = np.random.default_rng(seed)
    a = random_seq(rng, 6)
    b = random_seq(rng, 6)
    n = 256
    sa, sb = to_spectrum(a, n), to_spectrum(b, n)
    # Parseval under uniform-grid quadrature
    assert abs(a.energy() - np.mean(np.abs(sa.values) ** 2)) < 1e-10 * max(a.energy(), 1)
    # convolution maps to pointwise product
    sc = to_spectrum(convolve(a, b), n)
    assert np.abs(sc.values - sa.values * sb.values).max() < 1e-10


def test_add_subtract_window():
    a = Sequence(0, [1.0, 2.0])
    b = Sequence(1, [10.0])
    s = add(a, b)
    assert s.start == 0 and np.allclose(s.taps, [1.0, 12.0])
    d = subtract(s, b)
    assert np.allclose(d.window(0, 1), [1.0, 2.0])
    assert np.allclose(a.window(-2, 3), [0, 0, 1.0, 2.0, 0, 0])
