"""Minimum-phase spectral factorization.

Given a nonnegative sampled spectrum ``Q(w)``, find the causal minimum-phase
``g`` with ``|G(w)|^2 = Q(w)``.  This is the primitive behind target recovery:
every design here produces a target as the minimum-phase factor of some
nonnegative spectrum.

The factor is computed by the real-cepstrum lifter: take ``0.5*log Q``,
inverse transform, zero the negative quefrencies (doubling the positive ones,
keeping the zeroth), exponentiate back.  This works directly on sampled
spectra, including ones induced by IIR responses where no polynomial
coefficients are available for root finding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpectralNull, TruncationError
from .sequences import Sequence, Spectrum

#: Default spectral floor, relative to max Q.  Factorization logs the
#: spectrum, so exact nulls must be floored (with a flag) or rejected.
EPS_FLOOR = 1e-10

#: Relative energy allowed beyond the tap budget before truncation fails.
EPS_TRUNC = 1e-6


@dataclass(frozen=True)
class FactorResult:
    """Causal minimum-phase factor of a nonnegative spectrum.

    Attributes
    ----------
    g : Sequence
        The factor; ``g.start == 0`` and ``g0 > 0``.
    g0 : float
        Leading tap, equal to ``exp(0.5 * mean(log Q))`` — the maximum
        leading tap over all causal factors of Q.
    residual : float
        ``max_w | |G(w)|^2 - Q(w) | / max Q`` over the grid.
    floored : bool
        True when the spectrum had to be floored before taking the log.
    """

    g: Sequence
    g0: float
    residual: float
    floored: bool = False


def min_phase_factor(
    q: Spectrum,
    max_len: int | None = None,
    eps_floor: float = EPS_FLOOR,
    allow_floor: bool = True,
) -> FactorResult:
    """Compute the causal minimum-phase factor ``g`` with ``|G|^2 = Q``.

    Parameters
    ----------
    q : Spectrum
        Nonnegative real spectrum (validated up to small tolerances).
    max_len : int, optional
        Tap budget for the factor; defaults to ``N // 8``.
    eps_floor : float
        Floor applied to ``Q`` (relative to its max) before the log.
    allow_floor : bool
        When False, a spectrum dipping below the floor raises
        :class:`SpectralNull` instead of being floored.

    Raises
    ------
    SpectralNull
        Q is identically zero, not nonnegative-real, or dips below the
        floor while ``allow_floor=False``.
    TruncationError
        More than ``EPS_TRUNC`` of the factor's relative energy lies beyond
        ``max_len`` taps.
    """
    n = q.grid_size
    if max_len is None:
        max_len = n // 8
    if not q.is_nonnegative_real(tol=1e-6):
        raise SpectralNull("spectrum to factor must be nonnegative real")
    qr = q.values.real.copy()
    scale = qr.max()
    if scale <= 0.0:
        raise SpectralNull("cannot factor the zero spectrum")
    floor = eps_floor * scale
    below = qr < floor
    floored = bool(below.any())
    if floored and not allow_floor:
        raise SpectralNull(
            f"spectrum dips below {eps_floor:g} x max and flooring is disabled"
        )
    np.maximum(qr, floor, out=qr)

    # Cepstral lifter, on the FFT-ordered grid.
    log_half = 0.5 * np.log(np.fft.ifftshift(qr))
    cep = np.fft.ifft(log_half)
    lifter = np.zeros(n)
    lifter[0] = 1.0
    lifter[1 : n // 2] = 2.0
    lifter[n // 2] = 1.0
    g_spec = np.exp(np.fft.fft(cep * lifter))
    g_full = np.fft.ifft(g_spec)

    total = float(np.vdot(g_full, g_full).real)
    tail = float(np.vdot(g_full[max_len:], g_full[max_len:]).real)
    if total > 0 and tail / total > EPS_TRUNC:
        raise TruncationError(
            f"{tail / total:.3e} of the factor energy lies beyond {max_len} taps"
        )
    g = Sequence(0, g_full[:max_len])
    if g.is_zero or g.start != 0:
        raise SpectralNull("factorization produced an empty or acausal factor")

    # sampling g's response on the native grid is exact for any tap count,
    # so bypass the 8x product-aliasing guard of to_spectrum here
    g_check = np.fft.fftshift(np.fft.fft(g.taps, n))
    residual = float(np.abs(np.abs(g_check) ** 2 - q.values.real).max() / scale)
    g0 = float(g.taps[0].real)
    return FactorResult(g=g, g0=g0, residual=residual, floored=floored)
