"""Error-rate prediction for arbitrary equalizer/target pairs.

Bridges the closed-form designs to the effective-SNR machinery: any
``DesignResult`` is scored by forming ``p = adjoint(g)*f`` and
``q = adjoint(g)*g`` from its (truncated) filters and evaluating the same
``kappa * Q(phi/sigma)`` prediction used for the FIR-optimal designs, so
classical and optimized designs can be compared on one axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance
from .designs import DesignResult
from .firtarget import (
    ErrorModel,
    error_support,
    hamming_weight,
    kappa_binary,
    q_gauss,
)
from .sequences import Sequence, adjoint, convolve, inner, subtract


def score_design(
    design: DesignResult,
    ch: ChannelInstance,
    e: Sequence,
    message_len: int,
    multiplicity: int = 1,
) -> ErrorModel:
    """Predict sequence/bit error rates of a design against error class ``e``.

    ``q`` is computed exactly from the target; ``p`` uses the truncated
    equalizer, so the design's reported truncation leakage bounds the
    prediction bias.  Valid for real binary signaling.
    """
    p = convolve(adjoint(design.g), design.f)
    q = convolve(adjoint(design.g), design.g)
    phi = inner(e, convolve(convolve(p, ch.h), e)).real
    a = convolve(subtract(q, adjoint(convolve(p, ch.h))), e)
    var_delta = a.energy() - sum(abs(a.tap(n)) ** 2 for n in error_support(e))
    sigma2 = max(var_delta, 0.0) + ch.sigma_w2 * convolve(p, e).energy()
    snr_eff = float(phi * phi / sigma2) if sigma2 > 0 else 0.0
    kappa = kappa_binary(e, message_len, multiplicity)
    p_seq = float(kappa * q_gauss(phi / np.sqrt(sigma2))) if sigma2 > 0 else 0.0
    p_bit = float(hamming_weight(e) / message_len * p_seq)
    return ErrorModel(e=e, snr_eff=snr_eff, kappa=kappa, p_seq=p_seq, p_bit=p_bit)


@dataclass(frozen=True)
class RatePoint:
    """One measured operating point with its Wilson interval."""

    snr_db: float
    trials: int
    errors: int
    rate: float
    ci_lo: float
    ci_hi: float
    predicted: float | None = None
    censored: bool = False


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial rate."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))
