"""Viterbi kernels against the exhaustive oracle, plus boundary handling."""

import numpy as np
import pytest

from shorteq import (
    ChannelInstance,
    LengthMismatch,
    RngStream,
    Sequence,
    TooLarge,
    Trellis,
    available_backends,
    bpsk,
    brute_force_map,
    convolve,
    equalize,
    exp_decay_channel,
    path_metric,
    posterior_equivalent_family,
    psk,
    ternary,
    transmit,
    viterbi_detect,
)
from shorteq.experiments import sigma_for_snr

BACKENDS = sorted(available_backends())


def random_target(rng, const, max_len=4):
    length = int(rng.integers(1, max_len + 1))
    while True:
        taps = rng.normal(size=length)
        if const.mode == "complex":
            taps = taps + 1j * rng.normal(size=length)
        if abs(taps[0]) > 0.25 and abs(taps[-1]) > 0.25:
            return Sequence(0, taps, trim=False)


def framed_noisy_samples(rng, const, g, m_len, noise=0.6):
    """Samples on 0..m_len+L-2 consistent with the terminated-trellis convention."""
    length = len(g)
    pad = length - 1
    idx = rng.integers(0, const.size, size=m_len)
    framed = np.concatenate(
        [np.full(pad, const.points[0]), const.points[idx], np.full(pad, const.points[0])]
    )
    x = Sequence(-pad, framed, trim=False)
    t = m_len + length - 1
    clean = convolve(g, x).window(0, t - 1)
    w = noise * rng.normal(size=t)
    if const.mode == "complex":
        w = w + 1j * noise * rng.normal(size=t)
    return idx, Sequence(0, clean + w, trim=False)


class TestViterbiVsOracle:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_noiseless_exact_recovery(self, backend):
        rng = np.random.default_rng(30)
        const = bpsk()
        for _ in range(20):
            g = random_target(rng, const)
            idx, z = framed_noisy_samples(rng, const, g, 12, noise=0.0)
            res = viterbi_detect(z, Trellis(const, g, 0.0), 12, backend=backend)
            assert np.array_equal(res.symbol_indices, idx)
            assert res.path_metric < 1e-18

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_matches_brute_force_bpsk(self, backend):
        rng = np.random.default_rng(31)
        const = bpsk()
        for _ in range(120):
            g = random_target(rng, const, max_len=3)
            m_len = int(rng.integers(2, 7))
            _, z = framed_noisy_samples(rng, const, g, m_len)
            tr = Trellis(const, g, 0.0)
            rv = viterbi_detect(z, tr, m_len, backend=backend)
            rb = brute_force_map(z, g, m_len, const, 0.0, boundary="tail")
            assert np.array_equal(rv.symbol_indices, rb.symbol_indices)
            assert abs(rv.path_metric - rb.path_metric) < 1e-9

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_matches_brute_force_ternary_with_correction(self, backend):
        rng = np.random.default_rng(32)
        const = ternary()
        for _ in range(60):
            g = random_target(rng, const, max_len=2)
            lam = float(rng.uniform(0.0, 0.4))
            m_len = 5
            _, z = framed_noisy_samples(rng, const, g, m_len)
            tr = Trellis(const, g, lam)
            rv = viterbi_detect(z, tr, m_len, backend=backend)
            rb = brute_force_map(z, g, m_len, const, lam, boundary="tail")
            assert np.array_equal(rv.symbol_indices, rb.symbol_indices)
            assert abs(rv.path_metric - rb.path_metric) < 1e-9

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_complex_constellation(self, backend):
        rng = np.random.default_rng(33)
        const = psk(4)
        for _ in range(40):
            g = random_target(rng, const, max_len=3)
            m_len = 5
            _, z = framed_noisy_samples(rng, const, g, m_len)
            tr = Trellis(const, g, 0.0)
            rv = viterbi_detect(z, tr, m_len, backend=backend)
            rb = brute_force_map(z, g, m_len, const, 0.0, boundary="tail")
            assert np.array_equal(rv.symbol_indices, rb.symbol_indices)
            assert abs(rv.path_metric - rb.path_metric) < 1e-9

    def test_backends_agree_exactly(self):
        if len(BACKENDS) < 2:
            pytest.skip("compiled kernel not built")
        rng = np.random.default_rng(34)
        const = ternary()
        g = random_target(rng, const, max_len=3)
        _, z = framed_noisy_samples(rng, const, g, 40)
        tr = Trellis(const, g, 0.2)
        results = [viterbi_detect(z, tr, 40, backend=b) for b in BACKENDS]
        for r in results[1:]:
            assert np.array_equal(r.symbol_indices, results[0].symbol_indices)
            assert r.path_metric == results[0].path_metric
            assert r.ties_broken == results[0].ties_broken


class TestMetricBookkeeping:
    def test_metric_recompute_audit(self):
        rng = np.random.default_rng(35)
        const = ternary()
        g = random_target(rng, const, max_len=3)
        _, z = framed_noisy_samples(rng, const, g, 9)
        tr = Trellis(const, g, 0.17)
        res = viterbi_detect(z, tr, 9)
        recomputed = path_metric(z, g, res.symbol_indices, const, 0.17)
        assert abs(recomputed - res.path_metric) < 1e-9

    def test_metric_scale_invariant_argmin(self):
        # hard decisions are invariant to rescaling the metric
        rng = np.random.default_rng(36)
        const = bpsk()
        g = random_target(rng, const, max_len=3)
        _, z = framed_noisy_samples(rng, const, g, 10)
        base = viterbi_detect(z, Trellis(const, g, 0.0), 10)
        for c in (0.1, 3.7, 42.0):
            scaled = viterbi_detect(
                Sequence(z.start, z.taps * np.sqrt(c), trim=False),
                Trellis(const, Sequence(0, g.taps * np.sqrt(c), trim=False), 0.0),
                10,
            )
            assert np.array_equal(scaled.symbol_indices, base.symbol_indices)

    def test_correction_neutral_for_equal_energy(self):
        # equal-energy alphabets: the correction only offsets the metric
        rng = np.random.default_rng(37)
        for const in (bpsk(), psk(4)):
            g = random_target(rng, const, max_len=3)
            m_len = 8
            _, z = framed_noisy_samples(rng, const, g, m_len)
            lam = 0.33
            r0 = viterbi_detect(z, Trellis(const, g, 0.0), m_len)
            r1 = viterbi_detect(z, Trellis(const, g, lam), m_len)
            assert np.array_equal(r0.symbol_indices, r1.symbol_indices)
            n_steps = m_len + len(g) - 1
            offset = lam * abs(const.points[0]) ** 2 * n_steps
            assert abs((r0.path_metric - r1.path_metric) - offset) < 1e-9

    def test_length_mismatch_guard(self):
        const = bpsk()
        g = Sequence(0, [1.0, 0.5])
        z = Sequence(0, np.ones(4), trim=False)
        with pytest.raises(LengthMismatch):
            viterbi_detect(z, Trellis(const, g, 0.0), 10)

    def test_brute_force_budget_guard(self):
        const = ternary()
        z = Sequence(0, np.ones(40), trim=False)
        with pytest.raises(TooLarge):
            brute_force_map(z, Sequence(0, [1.0]), 30, const)

    def test_brute_force_single_symbol(self):
        const = ternary()
        z = Sequence(0, [1.1], trim=False)
        res = brute_force_map(z, Sequence(0, [1.0]), 1, const, boundary="tail")
        assert res.symbol_indices[0] == 2  # nearest point to 1.1 is +sqrt(1.5)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_exact_tie_resolved_lexicographically(self, backend):
        # z = 0 with a unit target puts -1 and +1 at equal distance: every
        # message step ties and the all-(-1) word (index 0) must win
        const = bpsk()
        g = Sequence(0, [1.0])
        m_len = 4
        z = Sequence(0, np.zeros(m_len), trim=False)
        rv = viterbi_detect(z, Trellis(const, g, 0.0), m_len, backend=backend)
        rb = brute_force_map(z, g, m_len, const, boundary="tail")
        assert rv.symbol_indices.tolist() == [0, 0, 0, 0]
        assert rb.symbol_indices.tolist() == [0, 0, 0, 0]
        assert rv.ties_broken == m_len
        assert rb.ties_broken == 2**m_len - 1
        assert abs(rv.path_metric - rb.path_metric) < 1e-12


class TestEndToEndEquivalence:
    def test_raw_vs_target_channel_argmin(self):
        # detection-lossless family: raw-channel ML equals target-channel
        # minimization on the equalized output
        h4 = exp_decay_channel(4, 0.5)
        sw2 = sigma_for_snr(h4, 10.0)
        ch = ChannelInstance(h4, sw2, "real")
        const = bpsk()
        d = posterior_equivalent_family(ch, 1.0, sw2, equalizer_len=61)
        agree = 0
        trials = 250
        for t in range(trials):
            gen = RngStream(60, t).generator()
            idx = gen.integers(0, 2, size=8)
            x = Sequence(0, const.points[idx], trim=False)
            y = transmit(x, ch, gen)
            z = equalize(y, d.f)
            r_raw = brute_force_map(y, h4, 8, const, boundary="zero")
            r_tgt = brute_force_map(z, d.g, 8, const, boundary="zero")
            agree += int(np.array_equal(r_raw.symbol_indices, r_tgt.symbol_indices))
        assert agree >= trials - 1  # residual gap only from equalizer truncation
