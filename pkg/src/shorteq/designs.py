"""Closed-form equalizer/target designs.

Five designs are provided:

* ``zfe`` — zero-forcing: the equalized response matches the target exactly,
  at the price of colored (possibly amplified) noise.
* ``mmse_fixed_target`` — the Wiener equalizer for a given target; the
  equalization error is orthogonal to the channel output.
* ``monic_design`` — jointly optimal monic target and MMSE equalizer in the
  long-target limit.  The target power spectrum is
  ``Q = (lam/sw2)|H|^2 + lam/Sx`` with the multiplier ``lam`` fixed by the
  zero-log-integral (monic) constraint, and the equalization error comes out
  white with level ``lam``.
* ``posterior_equivalent_family`` — the two-parameter family
  ``|G|^2 = alpha(|H|^2 + beta)``, ``F = alpha H*/G*``.  For equal-energy
  inputs, detection on the equalized channel with any member of this family
  is exactly as good as detection on the raw channel; the monic design is
  the member ``alpha = lam/sw2, beta = sw2`` when the input is white.
* ``matched_filter_design`` — the ``beta -> inf`` limit: the equalizer
  becomes the matched filter and detection reduces to correlation with
  post-cursor interference cancelled by a feedback sequence.

All equalizers are IIR in principle; they are inverted to taps and truncated
to a configurable window (default 21 taps centered at 0), with the discarded
energy fraction reported in ``diagnostics``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelInstance
from .errors import InvalidBeta, SpectralNull
from .sequences import (
    DEFAULT_GRID,
    Sequence,
    Spectrum,
    adjoint,
    autocorrelation,
    delta,
    to_spectrum,
    truncate_spectrum,
)
from .spectral import min_phase_factor

DEFAULT_EQUALIZER_LEN = 21


@dataclass(frozen=True)
class DesignResult:
    """An equalizer/target pair plus the scalars needed downstream.

    ``sigma_v2`` is the noise variance of the hypothetical target channel
    the detector should pretend it is watching.  ``lam`` is the monic-design
    multiplier where defined.  ``correction`` is the coefficient of the
    ``-correction * |x_n|^2`` branch-metric term that realizes the tilted
    input prior for unequal-energy alphabets (0 disables it).
    """

    method: str
    f: Sequence
    g: Sequence
    sigma_v2: float
    lam: float | None = None
    alpha: float | None = None
    beta: float | None = None
    feedback: Sequence | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def correction(self) -> float:
        if self.method == "monic" and self.lam is not None:
            return self.lam
        if self.alpha is not None and self.beta is not None:
            return self.alpha * self.beta
        return 0.0

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "f": self.f.to_dict(),
            "g": self.g.to_dict(),
            "sigma_v2": self.sigma_v2,
            "lambda": self.lam,
            "alpha": self.alpha,
            "beta": self.beta,
            "diagnostics": {
                k: v for k, v in self.diagnostics.items() if not isinstance(v, Spectrum)
            },
        }
        if self.feedback is not None:
            d["feedback"] = self.feedback.to_dict()
        return d


def _design_grids(ch: ChannelInstance, grid_size: int):
    h_spec = to_spectrum(ch.h, grid_size)
    h2 = np.abs(h_spec.values) ** 2
    sx = ch.sx_values(grid_size)
    if sx.min() <= 0:
        raise SpectralNull("input PSD must be strictly positive on the grid")
    return h_spec.values, h2, sx


def _truncated(values: np.ndarray, length: int, center: int | None = 0):
    seq, leaked = truncate_spectrum(Spectrum(values), length, center=center)
    return seq, leaked


def zfe(
    ch: ChannelInstance,
    g: Sequence,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
    grid_size: int = DEFAULT_GRID,
    eps: float = 1e-6,
) -> DesignResult:
    """Zero-forcing equalizer ``F = G/H`` for a fixed target ``g``.

    Raises :class:`SpectralNull` when ``|H|`` dips below ``eps`` relative to
    its peak anywhere on the grid; near-nulls make the equalized noise
    spectrum ``|G/H|^2 sw2`` arbitrarily large.
    """
    h_vals, h2, _ = _design_grids(ch, grid_size)
    h_mag = np.sqrt(h2)
    if h_mag.min() <= eps * h_mag.max():
        raise SpectralNull("channel response has a (near-)null; ZFE is unusable")
    g_vals = to_spectrum(g, grid_size).values
    f_vals = g_vals / h_vals
    f, leaked = _truncated(f_vals, equalizer_len)
    noise_psd = np.abs(f_vals) ** 2 * ch.sigma_w2
    return DesignResult(
        method="zfe",
        f=f,
        g=g,
        sigma_v2=float(noise_psd.mean()),
        diagnostics={
            "equalizer_leaked_energy": leaked,
            "noise_psd": Spectrum(noise_psd.astype(np.complex128)),
        },
    )


def mmse_fixed_target(
    ch: ChannelInstance,
    g: Sequence,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
    grid_size: int = DEFAULT_GRID,
) -> DesignResult:
    """MMSE equalizer for a fixed target: ``F = Sx H* G / (|H|^2 Sx + sw2)``.

    The equalization error ``e = g*x - f*y`` satisfies e ⟂ y, and its PSD
    ``S_e = |G|^2 Sx sw2 / (|H|^2 Sx + sw2)`` is returned in diagnostics.
    """
    if ch.sigma_w2 <= 0:
        raise ValueError("MMSE design requires sigma_w2 > 0")
    h_vals, h2, sx = _design_grids(ch, grid_size)
    g_vals = to_spectrum(g, grid_size).values
    denom = h2 * sx + ch.sigma_w2
    f_vals = sx * np.conj(h_vals) * g_vals / denom
    err_psd = np.abs(g_vals) ** 2 * sx * ch.sigma_w2 / denom
    f, leaked = _truncated(f_vals, equalizer_len)
    return DesignResult(
        method="mmse_fixed_target",
        f=f,
        g=g,
        sigma_v2=float(err_psd.mean()),
        diagnostics={
            "equalizer_leaked_energy": leaked,
            "error_psd": Spectrum(err_psd.astype(np.complex128)),
        },
    )


def monic_multiplier(ch: ChannelInstance, grid_size: int = DEFAULT_GRID) -> float:
    """Multiplier ``lam`` fixing the zero-log-integral (monic) constraint:
    ``lam = exp(-mean(log((|H|^2 Sx + sw2) / (Sx sw2))))``."""
    _, h2, sx = _design_grids(ch, grid_size)
    integrand = (h2 * sx + ch.sigma_w2) / (sx * ch.sigma_w2)
    return float(np.exp(-np.mean(np.log(np.maximum(integrand, 1e-300)))))


def monic_design(
    ch: ChannelInstance,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
    target_max_len: int | None = None,
    grid_size: int = DEFAULT_GRID,
) -> DesignResult:
    """Jointly optimal monic target and MMSE equalizer (long-target limit).

    ``Q = (lam/sw2)|H|^2 + lam/Sx``; the target is the minimum-phase factor
    of Q (monic by construction, since mean(log Q) = 0) and the equalizer is
    ``F = (lam/sw2) H*/G*``.  The equalization error is white with level
    ``lam``, which is also the target-channel noise variance handed to soft
    detectors.
    """
    if ch.sigma_w2 <= 0:
        raise ValueError("monic design requires sigma_w2 > 0")
    h_vals, h2, sx = _design_grids(ch, grid_size)
    lam = monic_multiplier(ch, grid_size)
    q_vals = (lam / ch.sigma_w2) * h2 + lam / sx
    factor = min_phase_factor(Spectrum(q_vals.astype(np.complex128)), max_len=target_max_len)
    g = factor.g
    g_vals = to_spectrum(g, grid_size).values
    f_vals = (lam / ch.sigma_w2) * np.conj(h_vals) / np.conj(g_vals)
    f, leaked = _truncated(f_vals, equalizer_len)
    err_psd = np.abs(g_vals) ** 2 * sx * ch.sigma_w2 / (h2 * sx + ch.sigma_w2)
    return DesignResult(
        method="monic",
        f=f,
        g=g,
        sigma_v2=lam,
        lam=lam,
        alpha=lam / ch.sigma_w2,
        beta=ch.sigma_w2,
        diagnostics={
            "equalizer_leaked_energy": leaked,
            "factor_residual": factor.residual,
            "g0": factor.g0,
            "error_psd": Spectrum(err_psd.astype(np.complex128)),
        },
    )


def gpr_monic_target(
    ch: ChannelInstance,
    target_len: int,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
    grid_size: int = DEFAULT_GRID,
) -> DesignResult:
    """Length-constrained monic generalized partial-response design.

    Minimizes the MMSE equalization-error power
    ``mean(|G|^2 Sx sw2 / (|H|^2 Sx + sw2))`` over real targets of the given
    length with ``g_0 = 1`` — a small Toeplitz quadratic program — and pairs
    the result with its MMSE equalizer.  ``lam`` is the achieved error
    variance, which converges to the long-target multiplier as the length
    grows and is the correction coefficient used for unequal-energy inputs.
    """
    if ch.sigma_w2 <= 0:
        raise ValueError("monic GPR design requires sigma_w2 > 0")
    if target_len < 1:
        raise ValueError("target length must be >= 1")
    _, h2, sx = _design_grids(ch, grid_size)
    weight = sx * ch.sigma_w2 / (h2 * sx + ch.sigma_w2)
    # w_m = (1/2pi) int W exp(jmw): first row/column of the cost Toeplitz.
    spec = Spectrum(weight.astype(np.complex128))
    lags = np.fft.ifft(np.fft.ifftshift(spec.values)).real
    idx = np.abs(np.arange(target_len)[:, None] - np.arange(target_len)[None, :])
    phi = lags[idx]
    rhs = np.zeros(target_len)
    rhs[0] = 1.0
    sol = np.linalg.solve(phi, rhs)
    g = Sequence(0, sol / sol[0], trim=False)
    mse = 1.0 / sol[0]
    mmse = mmse_fixed_target(ch, g, equalizer_len=equalizer_len, grid_size=grid_size)
    return DesignResult(
        method="monic",
        f=mmse.f,
        g=g,
        sigma_v2=mse,
        lam=mse,
        diagnostics={**mmse.diagnostics, "target_len": target_len},
    )


def posterior_equivalent_family(
    ch: ChannelInstance,
    alpha: float,
    beta: float,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
    target_max_len: int | None = None,
    grid_size: int = DEFAULT_GRID,
) -> DesignResult:
    """Member ``(alpha, beta)`` of the detection-lossless design family.

    ``|G|^2 = alpha (|H|^2 + beta)`` with G minimum-phase, and
    ``F = alpha H*/G*``, so ``G* F = alpha H*`` holds identically.  The
    target-channel noise variance is ``alpha * sw2``.  ``beta`` may be
    negative down to ``-min_w |H|^2`` (exclusive); beyond that the target
    spectrum would go negative and :class:`InvalidBeta` is raised.

    Note the target shape is independent of the input PSD — for colored
    inputs this family and the monic design genuinely differ.
    """
    if alpha <= 0:
        raise InvalidBeta(f"alpha must be positive, got {alpha}")
    h_vals, h2, _ = _design_grids(ch, grid_size)
    q_vals = alpha * (h2 + beta)
    if q_vals.min() <= 0:
        raise InvalidBeta(
            f"beta={beta} <= -min|H|^2 = {-h2.min():.6g}; target spectrum not positive"
        )
    factor = min_phase_factor(Spectrum(q_vals.astype(np.complex128)), max_len=target_max_len)
    g = factor.g
    g_vals = to_spectrum(g, grid_size).values
    f_vals = alpha * np.conj(h_vals) / np.conj(g_vals)
    f, leaked = _truncated(f_vals, equalizer_len)
    return DesignResult(
        method="posterior_family",
        f=f,
        g=g,
        sigma_v2=alpha * ch.sigma_w2,
        alpha=alpha,
        beta=beta,
        diagnostics={
            "equalizer_leaked_energy": leaked,
            "factor_residual": factor.residual,
        },
    )


def matched_filter_design(ch: ChannelInstance) -> DesignResult:
    """Matched-filter limit of the family: ``f = adjoint(h)``, ``g = delta``.

    Detection maximizes ``Re<x, z - a*x>`` where the feedback sequence ``a``
    is the causal half of the channel autocorrelation (half weight at lag 0),
    so ``<x, a*x> = ||h*x||^2 / 2``.
    """
    rh = autocorrelation(ch.h)
    n_pos = rh.end  # lags 1..end
    taps = np.zeros(n_pos + 1, dtype=np.complex128)
    taps[0] = rh.tap(0) / 2.0
    for k in range(1, n_pos + 1):
        taps[k] = rh.tap(k)
    a = Sequence(0, taps)
    return DesignResult(
        method="matched_filter",
        f=adjoint(ch.h),
        g=delta(),
        sigma_v2=ch.sigma_w2,
        alpha=1.0,
        feedback=a,
        diagnostics={},
    )


def matched_filter_metric(x: Sequence, z: Sequence, feedback: Sequence) -> float:
    """Decision statistic ``Re<x, z - a*x>`` for the matched-filter design."""
    from .sequences import convolve, inner, subtract

    return float(inner(x, subtract(z, convolve(feedback, x))).real)
