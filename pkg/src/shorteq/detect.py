"""Trellis (Viterbi) sequence detection and the exhaustive MAP oracle.

The detector runs over a causal target ``g`` of length L with
``|alphabet|^(L-1)`` states.  Its branch metric is
``|z_n - (g*x)_n|^2 - correction * |x_n|^2``: the quadratic term is the
target-channel log-likelihood, and the optional correction term realizes the
tilted input prior needed for unequal-energy alphabets (it is a constant
offset, hence a no-op, for equal-energy ones).

Boundary convention: the trellis starts in the all-``symbols[0]`` state and
is driven back to it by L-1 known tail symbols appended to the message, so a
consistent transmitter must send ``symbols[0]`` on both sides of the message.
Tail symbols are excluded from the returned estimate.

The hot add-compare-select loop lives in a compiled extension
(``_viterbi_cy``) with a NumPy fallback (``_viterbi_np``) selected at import
time; set ``SHORTEQ_VITERBI_BACKEND=numpy|cython`` to force one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .channel import Constellation
from .errors import LengthMismatch, TooLarge
from .sequences import Sequence

_viterbi_cy = None
try:
    from . import _viterbi_cy  # type: ignore[no-redef]
except ImportError:
    pass
from . import _viterbi_np

_FORCED = os.environ.get("SHORTEQ_VITERBI_BACKEND", "auto").strip().lower()
if _FORCED in ("numpy", "py", "python"):
    KERNEL_BACKEND = "numpy"
elif _FORCED in ("cython", "c", "compiled"):
    if _viterbi_cy is None:
        raise ImportError(
            "SHORTEQ_VITERBI_BACKEND=cython but the compiled kernel is not built; "
            "run `python setup.py build_ext --inplace` or reinstall the package"
        )
    KERNEL_BACKEND = "cython"
else:
    KERNEL_BACKEND = "cython" if _viterbi_cy is not None else "numpy"


def available_backends() -> dict:
    """Map backend name -> kernel module, for tests and benchmarks."""
    out = {"numpy": _viterbi_np}
    if _viterbi_cy is not None:
        out["cython"] = _viterbi_cy
    return out


def _kernel(backend: str | None):
    name = backend or KERNEL_BACKEND
    try:
        return available_backends()[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}") from None


class Trellis:
    """Precomputed trellis over a causal target for one constellation.

    ``lambda_corr`` is the prior-tilt coefficient; 0 gives plain
    minimum-distance detection.
    """

    def __init__(self, constellation: Constellation, g: Sequence, lambda_corr: float = 0.0):
        if g.is_zero or g.start != 0:
            raise ValueError("target must be causal with a nonzero leading tap")
        if constellation.size > 64:
            raise ValueError("at most 64 constellation points supported")
        self.constellation = constellation
        self.g = g
        self.lambda_corr = float(lambda_corr)
        length = len(g)
        k = constellation.size
        s = k ** (length - 1)
        self.target_len = length
        self.state_count = s

        pts = constellation.points
        g_taps = g.taps
        # Branch output for (predecessor state, consumed symbol): the state
        # digits hold x_{n-1} (lowest) .. x_{n-L+1} (highest).
        states = np.arange(s)
        past = np.zeros(s, dtype=np.complex128)
        for i in range(1, length):
            digit = (states // k ** (i - 1)) % k
            past += g_taps[i] * pts[digit]
        out_sk = past[:, None] + g_taps[0] * pts[None, :]

        # Destination-major layout: branch f = s_prev*K + sym lands on state
        # f mod S; grouped as f = m*S + sp for incoming slot m.
        sp = np.arange(s)[:, None]
        m = np.arange(k)[None, :]
        f = m * s + sp
        self._src = (f // k).astype(np.int32)
        self._sym = (f % k).astype(np.int8)
        self._out = np.ascontiguousarray(out_sk[self._src, self._sym.astype(np.int64)])
        self._corr = self.lambda_corr * np.abs(pts) ** 2

    def __repr__(self) -> str:
        return (
            f"Trellis({self.constellation.name}, L={self.target_len}, "
            f"states={self.state_count}, lambda_corr={self.lambda_corr:g})"
        )


@dataclass(frozen=True)
class DetectionResult:
    """Decoded message, its path metric, and tie-break bookkeeping."""

    x_hat: Sequence
    path_metric: float
    ties_broken: int
    symbol_indices: np.ndarray


def path_metric(
    z: Sequence,
    g: Sequence,
    indices: np.ndarray,
    constellation: Constellation,
    lambda_corr: float = 0.0,
) -> float:
    """Recompute the terminated-trellis metric of a given message.

    Sums ``|z_n - (g*x)_n|^2 - lambda_corr |x_n|^2`` for n = 0..M+L-2 with
    the boundary convention of :func:`viterbi_detect` (``symbols[0]`` before
    and after the message).  Independent of the kernels; used to audit them.
    """
    length = len(g)
    m_len = len(indices)
    t = m_len + length - 1
    pts = constellation.points
    pad = length - 1
    x_ext = np.concatenate(
        [np.zeros(pad, dtype=np.int64), np.asarray(indices, dtype=np.int64), np.zeros(pad, dtype=np.int64)]
    )
    sym_ext = pts[x_ext]
    total = 0.0
    zw = z.window(0, t - 1)
    for n in range(t):
        acc = 0.0 + 0.0j
        for i in range(length):
            acc += g.taps[i] * sym_ext[pad + n - i]
        d = zw[n] - acc
        total += d.real * d.real + d.imag * d.imag
        total -= lambda_corr * abs(sym_ext[pad + n]) ** 2
    return float(total)


def viterbi_detect(
    z: Sequence, trellis: Trellis, message_len: int, backend: str | None = None
) -> DetectionResult:
    """Minimize the trellis metric over all length-``message_len`` messages.

    ``z`` must cover samples 0..message_len+L-2 (raises
    :class:`LengthMismatch` otherwise).  Metric ties are broken toward the
    branch with the smaller incoming slot, which prefers the lexicographically
    smaller history; the number of ties encountered is returned.
    """
    length = trellis.target_len
    t = message_len + length - 1
    if z.start > 0 or z.end < t - 1:
        raise LengthMismatch(
            f"samples must cover 0..{t - 1}, got support {z.start}..{z.end}"
        )
    kern = _kernel(backend)
    path, metric, ties = kern.run_trellis(
        z.window(0, t - 1),
        trellis._out,
        trellis._src,
        trellis._sym,
        trellis._corr,
        message_len,
    )
    if not np.isfinite(metric):
        raise LengthMismatch("no terminated path survived; message too short?")
    indices = np.asarray(path[:message_len], dtype=np.int64)
    x_hat = Sequence(0, trellis.constellation.points[indices], trim=False)
    return DetectionResult(
        x_hat=x_hat, path_metric=float(metric), ties_broken=int(ties), symbol_indices=indices
    )


#: Enumeration guard for the exhaustive oracle.
MAX_ENUM = 2**20


def brute_force_map(
    z: Sequence,
    filt: Sequence,
    message_len: int,
    constellation: Constellation,
    lambda_corr: float = 0.0,
    boundary: str = "tail",
) -> DetectionResult:
    """Exact minimizer of the detection cost by full enumeration.

    ``boundary="tail"`` reproduces the terminated-trellis convention of
    :func:`viterbi_detect` (same window, same padding, same tie preference),
    making this the oracle for the Viterbi kernels.  ``boundary="zero"``
    scores ``sum |z_n - (filt*x)_n|^2`` over the whole support of ``z`` with
    ``x`` zero outside the message, which is the raw-channel MAP cost.

    Raises :class:`TooLarge` above ``|alphabet|^message_len = 2^20``.
    """
    k = constellation.size
    if k**message_len > MAX_ENUM:
        raise TooLarge(f"{k}^{message_len} exceeds the enumeration budget {MAX_ENUM}")
    if boundary not in ("tail", "zero"):
        raise ValueError(f"boundary must be 'tail' or 'zero', got {boundary!r}")
    pts = constellation.points
    length = len(filt)
    n_cand = k**message_len

    if boundary == "tail":
        pad = length - 1
        w0, w1 = 0, message_len + length - 2
    else:
        pad = 0
        w0, w1 = z.start, z.end
    width = w1 - w0 + 1
    zw = z.window(w0, w1)

    # (filt * x)_n on the window is linear in the extended symbol vector:
    # response[j, n] = filt_{(w0+n) - (j - pad)} for extended position j.
    ext = message_len + 2 * pad
    pos = np.arange(ext) - pad  # symbol time of each extended slot
    response = np.empty((ext, width), dtype=np.complex128)
    for j in range(ext):
        for n in range(width):
            response[j, n] = filt.tap(w0 + n - pos[j])

    fixed = np.zeros(ext, dtype=np.complex128)
    if boundary == "tail":
        fixed[:pad] = pts[0]
        fixed[message_len + pad :] = pts[0]
    base_out = fixed @ response  # contribution of prefix+tail
    # Constant correction from the tail symbols (prefix is not a branch).
    base_corr = lambda_corr * float(np.sum(np.abs(fixed[message_len + pad :]) ** 2))

    msg_resp = response[pad : pad + message_len]
    metrics = np.empty(n_cand)
    chunk = 8192
    shape = (k,) * message_len
    for lo in range(0, n_cand, chunk):
        hi = min(lo + chunk, n_cand)
        idx = np.unravel_index(np.arange(lo, hi), shape)
        x_idx = np.stack(idx, axis=1)
        x_sym = pts[x_idx]
        out = x_sym @ msg_resp + base_out
        d = zw[None, :] - out
        qm = np.sum(d.real * d.real + d.imag * d.imag, axis=1)
        corr = lambda_corr * np.sum(np.abs(x_sym) ** 2, axis=1) + base_corr
        metrics[lo:hi] = qm - corr

    best = int(np.argmin(metrics))
    best_metric = float(metrics[best])
    ties = int(np.sum(metrics == best_metric)) - 1
    indices = np.asarray(np.unravel_index(best, shape), dtype=np.int64)
    x_hat = Sequence(0, pts[indices], trim=False)
    return DetectionResult(
        x_hat=x_hat, path_metric=best_metric, ties_broken=ties, symbol_indices=indices
    )
