"""ISI channel model: constellations, noisy transmission, equalization.

The channel is ``y = h * x + w`` with IID Gaussian noise of per-real-dimension
variance ``sigma_w2`` (independent real/imaginary parts in complex mode).
Noise is drawn from counter-based streams so Monte Carlo shards keyed by
``(seed, stream_id)`` reproduce bit-exactly in any execution order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .sequences import (
    DEFAULT_GRID,
    Sequence,
    Spectrum,
    add,
    convolve,
    subtract,
    to_spectrum,
)


@dataclass(frozen=True)
class Constellation:
    """Finite symbol alphabet.

    ``symbols[0]`` is the termination symbol used to drive trellis
    detectors into a known state, so the ordering is part of the contract.
    """

    name: str
    symbols: tuple
    mode: str  # "real" | "complex"

    def __post_init__(self):
        if self.mode not in ("real", "complex"):
            raise ValueError(f"mode must be 'real' or 'complex', got {self.mode!r}")
        object.__setattr__(self, "symbols", tuple(complex(s) for s in self.symbols))

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=np.complex128)

    @property
    def equal_energy(self) -> bool:
        mags = np.abs(self.points) ** 2
        return bool(np.allclose(mags, mags[0], rtol=1e-12, atol=1e-12))

    @property
    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


def bpsk() -> Constellation:
    return Constellation("bpsk", (-1.0, 1.0), "real")


def ternary() -> Constellation:
    """Three-level real alphabet with unit average symbol energy."""
    a = np.sqrt(1.5)
    return Constellation("ternary", (-a, 0.0, a), "real")


def psk(order: int = 4) -> Constellation:
    """Phase-shift keying on a circle of radius sqrt(2)."""
    pts = np.sqrt(2.0) * np.exp(2j * np.pi * np.arange(order) / order)
    return Constellation(f"psk{order}", tuple(pts), "complex")


def constellation_by_name(name: str) -> Constellation:
    name = name.lower()
    if name == "bpsk":
        return bpsk()
    if name == "ternary":
        return ternary()
    if name.startswith("psk") or name.startswith("qpsk"):
        order = name.removeprefix("qpsk").removeprefix("psk")
        return psk(int(order) if order else 4)
    raise ValueError(f"unknown constellation {name!r}")


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: identical (seed, stream_id) pairs
    reproduce identical draws bit-exactly, independent of other streams."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ChannelInstance:
    """Channel response plus noise level and input-spectrum metadata.

    ``sigma_w2`` is the noise variance per real dimension; ``mode`` sets the
    number of real dimensions per sample (1 real, 2 complex).  ``input_psd``
    is the symbol power spectral density used by the designs (None = white,
    unit PSD); simulation always transmits IID symbols.
    """

    h: Sequence
    sigma_w2: float
    mode: str = "real"
    input_psd: Spectrum | None = None

    def __post_init__(self):
        if self.sigma_w2 < 0:
            raise ValueError("sigma_w2 must be nonnegative")
        if self.mode not in ("real", "complex"):
            raise ValueError(f"mode must be 'real' or 'complex', got {self.mode!r}")
        if self.h.is_zero:
            raise ValueError("channel response must be nonzero")
        if self.input_psd is not None and not self.input_psd.is_nonnegative_real(1e-9):
            raise ValueError("input_psd must be nonnegative real")

    @property
    def zeta(self) -> int:
        """Real dimensions per sample."""
        return 1 if self.mode == "real" else 2

    def sx_values(self, grid_size: int = DEFAULT_GRID) -> np.ndarray:
        """Input PSD samples on the design grid (ones when white)."""
        if self.input_psd is None:
            return np.ones(grid_size)
        if self.input_psd.grid_size != grid_size:
            raise ValueError(
                f"input_psd grid {self.input_psd.grid_size} != design grid {grid_size}"
            )
        return self.input_psd.values.real

    def to_dict(self) -> dict:
        d = {"h": self.h.to_dict(), "sigma_w2": self.sigma_w2, "mode": self.mode}
        d["Sx"] = "white" if self.input_psd is None else list(self.input_psd.values.real)
        return d


def exp_decay_channel(n_taps: int = 9, rate: float = 0.5) -> Sequence:
    """Exponentially decaying real channel ``h_n = exp(-rate*n)``, n=0..n_taps-1."""
    return Sequence(0, np.exp(-rate * np.arange(n_taps)))


def load_channel_spec(source, default_grid: int = DEFAULT_GRID) -> ChannelInstance:
    """Build a ChannelInstance from a spec dict or a JSON file path.

    Format: ``{"h": {"start", "re", "im"}, "sigma_w2": float,
    "mode": "real"|"complex", "Sx": "white" | [shaping filter taps]}``.
    A tap-list ``Sx`` is interpreted as an input-shaping filter ``c`` whose
    induced PSD is ``|C(w)|^2``.
    """
    if isinstance(source, (str, bytes)):
        with open(source) as fh:
            spec = json.load(fh)
    else:
        spec = dict(source)
    h = Sequence.from_dict(spec["h"])
    sx = spec.get("Sx", "white")
    input_psd = None
    if sx != "white":
        shaping = Sequence(0, np.asarray(sx, dtype=np.float64))
        c_spec = to_spectrum(shaping, default_grid)
        input_psd = Spectrum(np.abs(c_spec.values) ** 2)
    return ChannelInstance(
        h=h,
        sigma_w2=float(spec["sigma_w2"]),
        mode=spec.get("mode", "real"),
        input_psd=input_psd,
    )


def random_symbols(
    constellation: Constellation, length: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``length`` IID symbol indices from the alphabet."""
    return rng.integers(0, constellation.size, size=length)


def transmit(x: Sequence, ch: ChannelInstance, rng) -> Sequence:
    """Pass ``x`` through the channel: ``y = h * x + w``.

    The output support covers the full convolution extent.  ``rng`` may be a
    :class:`RngStream` or an already-instantiated numpy Generator (the latter
    lets one stream drive message and noise draws in a fixed order).
    """
    clean = convolve(ch.h, x)
    if ch.sigma_w2 == 0.0 or clean.is_zero:
        return clean
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    n = len(clean)
    sigma = np.sqrt(ch.sigma_w2)
    if ch.mode == "real":
        noise = sigma * gen.standard_normal(n)
    else:
        noise = sigma * (gen.standard_normal(n) + 1j * gen.standard_normal(n))
    return add(clean, Sequence(clean.start, noise, trim=False))


def equalize(y: Sequence, f: Sequence) -> Sequence:
    """Apply an equalizer: ``z = f * y``."""
    return convolve(f, y)


def distance_cost(y: Sequence, x: Sequence, h: Sequence) -> float:
    """Euclidean mismatch ``sum_n |y_n - (h*x)_n|^2`` over the union of supports."""
    return subtract(y, convolve(h, x)).energy()
