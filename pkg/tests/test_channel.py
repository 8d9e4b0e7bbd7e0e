"""Channel simulation: constellations, noise statistics, reproducibility."""

import json

import numpy as np
import pytest

from shorteq import (
    ChannelInstance,
    RngStream,
    Sequence,
    bpsk,
    constellation_by_name,
    convolve,
    delta,
    distance_cost,
    equalize,
    exp_decay_channel,
    load_channel_spec,
    psk,
    random_symbols,
    subtract,
    ternary,
    transmit,
    zfe,
)


class TestConstellations:
    def test_bpsk(self):
        c = bpsk()
        assert c.points.tolist() == [-1.0, 1.0]
        assert c.mode == "real" and c.equal_energy

    def test_qpsk_circle(self):
        c = psk(4)
        assert np.allclose(np.abs(c.points), np.sqrt(2.0))
        assert c.equal_energy and c.mode == "complex"
        assert len(set(np.round(c.points, 12))) == 4

    def test_ternary_unit_average_energy(self):
        c = ternary()
        assert np.isclose(c.average_energy, 1.0)
        assert not c.equal_energy
        assert np.isclose(c.points[0].real, -np.sqrt(1.5))

    def test_lookup(self):
        assert constellation_by_name("qpsk4").size == 4
        assert constellation_by_name("ternary").size == 3
        with pytest.raises(ValueError):
            constellation_by_name("octal")


class TestTransmit:
    def test_noiseless_limit(self):
        h = exp_decay_channel(4)
        ch = ChannelInstance(h, 0.0, "real")
        x = Sequence(0, [1.0, -1.0, 1.0])
        y = transmit(x, ch, RngStream(0, 0))
        want = convolve(h, x)
        assert y.start == want.start
        assert np.abs(y.taps - want.taps).max() == 0.0

    def test_noise_variance_empirical(self):
        h = exp_decay_channel(9)
        ch = ChannelInstance(h, 0.25, "real")
        rng = RngStream(42, 1).generator()
        x = Sequence(0, rng.choice([-1.0, 1.0], size=10000))
        y = transmit(x, ch, rng)
        w = subtract(y, convolve(h, x))
        var = w.energy() / len(w)
        assert abs(var - 0.25) / 0.25 < 0.1

    def test_unit_channel_mean(self):
        # y_0 ~ N(1, sw2): empirical mean over 1e5 one-shot trials
        ch = ChannelInstance(delta(), 0.09, "real")
        gen = RngStream(7, 0).generator()
        n = 100_000
        vals = np.empty(n)
        for i in range(n):
            vals[i] = transmit(Sequence(0, [1.0]), ch, gen).taps[0].real
        tol = 3 * np.sqrt(0.09) / np.sqrt(n)
        assert abs(vals.mean() - 1.0) < tol

    def test_complex_mode_circular(self):
        ch = ChannelInstance(delta(), 0.5, "complex")
        gen = RngStream(3, 9).generator()
        x = Sequence(0, np.full(20000, 1.0 + 0.0j), trim=False)
        w = subtract(transmit(x, ch, gen), x)
        assert abs(np.var(w.taps.real) - 0.5) / 0.5 < 0.1
        assert abs(np.var(w.taps.imag) - 0.5) / 0.5 < 0.1
        # independence across components
        corr = np.corrcoef(w.taps.real, w.taps.imag)[0, 1]
        assert abs(corr) < 4 / np.sqrt(len(w))

    def test_noise_whiteness(self):
        ch = ChannelInstance(delta(), 1.0, "real")
        gen = RngStream(11, 2).generator()
        n = 100_000
        x = Sequence(0, np.zeros(n) + 1.0, trim=False)
        w = subtract(transmit(x, ch, gen), x).taps.real
        w = w - w.mean()
        denom = float(np.dot(w, w))
        for lag in range(1, 6):
            r = float(np.dot(w[:-lag], w[lag:])) / denom
            assert abs(r) < 4 / np.sqrt(n)

    def test_reproducible_streams(self):
        h = exp_decay_channel(5)
        ch = ChannelInstance(h, 0.1, "real")
        x = Sequence(0, [1.0, 1.0, -1.0])
        y1 = transmit(x, ch, RngStream(123, 45))
        y2 = transmit(x, ch, RngStream(123, 45))
        y3 = transmit(x, ch, RngStream(123, 46))
        assert np.array_equal(y1.taps, y2.taps)
        assert not np.array_equal(y1.taps, y3.taps)

    def test_stream_order_independence(self):
        # drawing stream 7 before or after stream 8 changes nothing
        ch = ChannelInstance(delta(), 1.0, "real")
        x = Sequence(0, [1.0])
        a = transmit(x, ch, RngStream(1, 7))
        transmit(x, ch, RngStream(1, 8))
        b = transmit(x, ch, RngStream(1, 7))
        assert np.array_equal(a.taps, b.taps)


class TestCosts:
    def test_exact_match_zero(self):
        h = exp_decay_channel(4)
        x = Sequence(0, [1.0, -1.0])
        y = convolve(h, x)
        assert distance_cost(y, x, h) == 0.0

    def test_single_spike(self):
        h = exp_decay_channel(4)
        x = Sequence(0, [1.0, -1.0])
        from shorteq import add

        y = add(convolve(h, x), Sequence(2, [0.3]))
        assert abs(distance_cost(y, x, h) - 0.09) < 1e-12

    def test_cross_check_norms(self):
        rng = np.random.default_rng(14)
        h = Sequence(0, rng.normal(size=4))
        x = Sequence(0, rng.choice([-1.0, 1.0], 6))
        y = Sequence(-2, rng.normal(size=12))
        want = subtract(y, convolve(h, x)).energy()
        assert abs(distance_cost(y, x, h) - want) < 1e-12

    def test_equalize_identity_and_convolve(self):
        rng = np.random.default_rng(15)
        y = Sequence(-1, rng.normal(size=8))
        assert np.allclose(equalize(y, delta()).taps, y.taps)
        f = Sequence(-2, rng.normal(size=5))
        assert np.allclose(equalize(y, f).taps, convolve(f, y).taps)

    def test_zfe_noiseless_recovers_target_channel(self):
        h = exp_decay_channel(9)
        ch = ChannelInstance(h, 0.05, "real")
        g = Sequence(0, [1.0, 0.5])
        d = zfe(ch, g, equalizer_len=41)
        x = Sequence(0, np.random.default_rng(16).choice([-1.0, 1.0], 50))
        z = equalize(convolve(h, x), d.f)
        want = convolve(g, x)
        err = subtract(z, want)
        assert np.abs(err.window(want.start, want.end)).max() < 1e-5


class TestChannelSpecIO:
    def test_roundtrip_white(self, tmp_path):
        h = exp_decay_channel(3)
        spec = {"h": h.to_dict(), "sigma_w2": 0.2, "mode": "real", "Sx": "white"}
        path = tmp_path / "chan.json"
        path.write_text(json.dumps(spec))
        ch = load_channel_spec(str(path))
        assert np.allclose(ch.h.taps, h.taps)
        assert ch.sigma_w2 == 0.2 and ch.input_psd is None and ch.zeta == 1

    def test_shaping_filter_psd(self):
        h = exp_decay_channel(3)
        ch = load_channel_spec(
            {"h": h.to_dict(), "sigma_w2": 0.1, "mode": "real", "Sx": [1.0, 0.5]}
        )
        sx = ch.sx_values(4096)
        omega = ch.input_psd.omega
        want = np.abs(1.0 + 0.5 * np.exp(-1j * omega)) ** 2
        assert np.abs(sx - want).max() < 1e-10

    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelInstance(exp_decay_channel(3), -1.0, "real")
        with pytest.raises(ValueError):
            ChannelInstance(exp_decay_channel(3), 0.1, "quaternionic")
        assert ChannelInstance(exp_decay_channel(3), 0.1, "complex").zeta == 2


def test_random_symbols_range():
    gen = RngStream(0, 0).generator()
    idx = random_symbols(ternary(), 1000, gen)
    assert idx.min() >= 0 and idx.max() <= 2
    assert set(np.unique(idx)) == {0, 1, 2}
