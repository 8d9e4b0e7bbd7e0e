"""Finite-support sequences and sampled spectra.

A :class:`Sequence` is a finite tap vector with an integer start index,
stored in canonical trimmed form.  A :class:`Spectrum` holds uniform samples
of a frequency response on the N-point grid ``w_k = -pi + 2*pi*k/N``.
Everything downstream (equalizer design, spectral factorization, detection
metrics) is built from the operations here: convolution, the
reverse-conjugate (adjoint) operator, inner products, autocorrelation, and
the tap-domain <-> sampled-spectrum conversions.

All values are immutable after construction and safe to share across
threads.  Real-valued data uses the same complex layout with zero imaginary
parts; there is no separate real code path.
"""

from __future__ import annotations

import numpy as np

from .errors import AliasError

# Relative threshold for dropping leading/trailing taps; keeps the canonical
# form stable under spectrum round-trips.
EPS_TRIM = 1e-12

# Default frequency-grid size for design math.  At least 8x the longest
# sequence handled by the designs (channels of ~9 taps, equalizers of ~21-129
# taps) with ample margin for slowly decaying IIR responses.
DEFAULT_GRID = 4096


class Sequence:
    """Finite-support tap vector ``a_n`` with ``n`` starting at ``start``.

    Construction trims taps smaller than ``EPS_TRIM`` relative to the peak
    from both ends, so the first and last stored taps are nonzero.  The
    all-zero sequence is represented by an empty tap array and ``start == 0``.
    """

    __slots__ = ("_start", "_taps")

    def __init__(self, start: int, taps, trim: bool = True):
        arr = np.atleast_1d(np.asarray(taps, dtype=np.complex128)).ravel().copy()
        if trim and arr.size:
            peak = np.abs(arr).max()
            if peak == 0.0:
                arr = arr[:0]
            else:
                keep = np.abs(arr) > EPS_TRIM * peak
                first = int(np.argmax(keep))
                last = arr.size - int(np.argmax(keep[::-1]))
                start += first
                arr = arr[first:last]
        if arr.size == 0:
            start = 0
        arr.setflags(write=False)
        self._start = int(start)
        self._taps = arr

    # -- basic accessors ---------------------------------------------------

    @property
    def start(self) -> int:
        return self._start

    @property
    def taps(self) -> np.ndarray:
        return self._taps

    @property
    def end(self) -> int:
        """Index of the last stored tap (== start for a singleton)."""
        return self._start + len(self._taps) - 1

    def __len__(self) -> int:
        return len(self._taps)

    @property
    def is_zero(self) -> bool:
        return len(self._taps) == 0

    @property
    def is_real(self) -> bool:
        if self.is_zero:
            return True
        scale = np.abs(self._taps).max()
        return np.abs(self._taps.imag).max() <= 1e-12 * max(scale, 1.0)

    def energy(self) -> float:
        """Squared norm ``sum |a_n|^2``."""
        return float(np.vdot(self._taps, self._taps).real)

    def tap(self, n: int) -> complex:
        """Value at index ``n`` (zero outside the support)."""
        k = n - self._start
        if 0 <= k < len(self._taps):
            return complex(self._taps[k])
        return 0.0 + 0.0j

    def window(self, n0: int, n1: int) -> np.ndarray:
        """Values on ``n0..n1`` inclusive, zero-padded outside the support."""
        if n1 < n0:
            return np.zeros(0, dtype=np.complex128)
        out = np.zeros(n1 - n0 + 1, dtype=np.complex128)
        lo = max(n0, self._start)
        hi = min(n1, self.end)
        if not self.is_zero and hi >= lo:
            out[lo - n0 : hi - n0 + 1] = self._taps[lo - self._start : hi - self._start + 1]
        return out

    # -- algebra -----------------------------------------------------------

    def shifted(self, k: int) -> "Sequence":
        return Sequence(self._start + k, self._taps, trim=False)

    def scaled(self, c: complex) -> "Sequence":
        if c == 0:
            return Sequence.zero()
        return Sequence(self._start, self._taps * c, trim=False)

    # -- serialization / plumbing -------------------------------------------

    def to_dict(self) -> dict:
        return {
            "start": self._start,
            "re": [float(v) for v in self._taps.real],
            "im": [float(v) for v in self._taps.imag],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Sequence":
        re = np.asarray(d["re"], dtype=np.float64)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=np.float64)
        return cls(int(d["start"]), re + 1j * im)

    @classmethod
    def zero(cls) -> "Sequence":
        return cls(0, np.zeros(0))

    def __reduce__(self):
        return (Sequence, (self._start, np.array(self._taps), False))

    def __repr__(self) -> str:
        if self.is_zero:
            return "Sequence(zero)"
        shown = np.round(self._taps, 6)
        return f"Sequence(start={self._start}, taps={shown!r})"


def delta() -> Sequence:
    """The unit-impulse sequence."""
    return Sequence(0, [1.0])


def add(a: Sequence, b: Sequence) -> Sequence:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    start = min(a.start, b.start)
    end = max(a.end, b.end)
    return Sequence(start, a.window(start, end) + b.window(start, end))


def subtract(a: Sequence, b: Sequence) -> Sequence:
    return add(a, b.scaled(-1.0))


def convolve(a: Sequence, b: Sequence) -> Sequence:
    """Linear convolution ``c_n = sum_m a_m b_{n-m}``."""
    if a.is_zero or b.is_zero:
        return Sequence.zero()
    return Sequence(a.start + b.start, np.convolve(a.taps, b.taps))


def adjoint(a: Sequence) -> Sequence:
    """Reverse-conjugate: ``adj(a)_n = conj(a_{-n})``.

    Convolution with ``adjoint(a)`` is the adjoint of convolution with ``a``
    under the standard inner product:
    ``inner(convolve(a, b), c) == inner(b, convolve(adjoint(a), c))``.
    """
    if a.is_zero:
        return Sequence.zero()
    return Sequence(-a.end, np.conj(a.taps[::-1]), trim=False)


def inner(a: Sequence, b: Sequence) -> complex:
    """Inner product ``sum conj(a_n) b_n`` over the overlapping support."""
    if a.is_zero or b.is_zero:
        return 0.0 + 0.0j
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    if hi < lo:
        return 0.0 + 0.0j
    return complex(np.vdot(a.window(lo, hi), b.window(lo, hi)))


def autocorrelation(a: Sequence) -> Sequence:
    """Deterministic autocorrelation ``r_n = sum_m conj(a_m) a_{m+n}``.

    Hermitian-symmetric (``r_{-n} = conj(r_n)``) and independent of the
    start offset of ``a``.  Computed by direct lag sums.
    """
    if a.is_zero:
        return Sequence.zero()
    t = a.taps
    n = len(t)
    lags = np.zeros(2 * n - 1, dtype=np.complex128)
    for k in range(n):
        # lag +k and its mirror
        v = np.vdot(t[: n - k], t[k:])
        lags[n - 1 + k] = v
        lags[n - 1 - k] = np.conj(v)
    return Sequence(-(n - 1), lags)


class Spectrum:
    """Frequency response sampled at ``w_k = -pi + 2*pi*k/N`` (N a power of two)."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.complex128).ravel().copy()
        n = arr.size
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def grid_size(self) -> int:
        return self._values.size

    @property
    def omega(self) -> np.ndarray:
        n = self.grid_size
        return -np.pi + 2.0 * np.pi * np.arange(n) / n

    def mean(self) -> complex:
        """Uniform-grid quadrature of ``(1/2pi) * integral(values)``.

        Exact for trigonometric polynomials of degree below ``N``.
        """
        return complex(self._values.mean())

    def is_nonnegative_real(self, tol: float = 1e-8) -> bool:
        scale = np.abs(self._values).max()
        if scale == 0.0:
            return True
        return (
            np.abs(self._values.imag).max() <= tol * scale
            and self._values.real.min() >= -tol * scale
        )

    def __reduce__(self):
        return (Spectrum, (np.array(self._values),))

    def __repr__(self) -> str:
        return f"Spectrum(N={self.grid_size})"


def to_spectrum(a: Sequence, grid_size: int = DEFAULT_GRID) -> Spectrum:
    """Sample ``A(w) = sum a_n exp(-j n w)`` on the N-point grid.

    Requires ``grid_size >= 8 * len(a)`` so products of spectra computed on
    the grid stay free of circular aliasing.
    """
    n = grid_size
    if not a.is_zero and n < 8 * len(a):
        raise AliasError(f"grid size {n} < 8 x support length {len(a)}")
    if a.is_zero:
        return Spectrum(np.zeros(n, dtype=np.complex128))
    base = np.fft.fft(a.taps, n=n)
    phase = np.exp(-2j * np.pi * a.start * np.arange(n) / n)
    return Spectrum(np.fft.fftshift(base * phase))


def _extract_taps(spec: Spectrum, max_len: int, center: int | None):
    """Inverse-transform ``spec`` and keep the best window of ``max_len`` taps.

    Returns ``(sequence, leaked)`` where ``leaked`` is the fraction of total
    energy outside the selected window.  With ``center=None`` the window is
    placed over the dominant-energy region (circular indices unwrapped to
    ``[-N/2, N/2)``); otherwise it is anchored at ``center - (max_len-1)//2``.
    """
    n = spec.grid_size
    c = np.fft.ifft(np.fft.ifftshift(spec.values))
    energy = np.abs(c) ** 2
    total = float(energy.sum())
    if total == 0.0:
        return Sequence.zero(), 0.0
    length = min(max_len, n)
    if center is None:
        csum = np.concatenate(([0.0], np.cumsum(np.tile(energy, 2))))
        window_energy = csum[length : length + n] - csum[:n]
        m0 = int(np.argmax(window_energy))
        kept = float(window_energy[m0])
        start = m0 if m0 < n // 2 else m0 - n
    else:
        start = center - (length - 1) // 2
        m0 = start % n
        idx = (m0 + np.arange(length)) % n
        kept = float(energy[idx].sum())
    idx = (m0 + np.arange(length)) % n
    leaked = max(0.0, 1.0 - kept / total)
    return Sequence(start, c[idx]), leaked


def from_spectrum(spec: Spectrum, max_len: int, center: int | None = None) -> Sequence:
    """Recover the tap sequence whose spectrum is ``spec``.

    Raises :class:`AliasError` when more than 1e-6 of the energy falls
    outside ``max_len`` taps, which indicates the spectrum does not belong
    to a sequence that short.
    """
    seq, leaked = _extract_taps(spec, max_len, center)
    if leaked > 1e-6:
        raise AliasError(
            f"{leaked:.3e} of the energy lies outside {max_len} taps"
        )
    return seq


def truncate_spectrum(
    spec: Spectrum, length: int, center: int | None = None
) -> tuple[Sequence, float]:
    """Deliberately truncate an (often IIR) response to ``length`` taps.

    Same extraction as :func:`from_spectrum` but never raises; the leaked
    energy fraction is returned so callers can report it.
    """
    return _extract_taps(spec, length, center)
