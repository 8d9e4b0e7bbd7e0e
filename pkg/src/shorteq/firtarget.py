"""Optimal FIR targets with IIR equalizers for binary signaling.

For a short target of length L the detector cost is driven by the dominant
error sequence ``e`` (the +-1/0 pattern minimizing the channel output energy
``||h*e||^2``).  Writing ``p = adjoint(g)*f`` and ``q = adjoint(g)*g``, the
system's effective SNR is

    SNR = max_v |Re<e, p*h*e>|^2 /
          ( ||(q - adjoint(h*p))*e - v||^2 + sw2 ||p*e||^2 )

with ``v`` free on the support of ``e``.  ``solve_fir_target`` maximizes
this over all (p, q) with ``q`` a symmetric lag-(L-1) autocorrelation by
reducing to a small linear system in the q-lags and v-entries (the p side is
eliminated in the frequency domain), then recovers the target by spectral
factorization and the equalizer from ``F = P/G*``.  The best achievable
value over unconstrained targets is ``SNR_max = ||h*e||^2 / sw2``, and
``10 log10(SNR_max/SNR(L))`` is the FIR approximation loss reported by
:func:`fir_loss_curve`.

High-SNR error-rate predictions follow from the same quantities:
``P_seq ~ kappa * Q(sqrt(SNR))`` with the multiplicity constant ``kappa``
counting dominant-error placements, and ``P_bit = (w_H(e)/M) P_seq``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .channel import ChannelInstance
from .errors import SingularSystem, SpectralNull
from .sequences import (
    DEFAULT_GRID,
    Sequence,
    Spectrum,
    adjoint,
    autocorrelation,
    convolve,
    inner,
    subtract,
    to_spectrum,
    truncate_spectrum,
)
from .spectral import min_phase_factor

DEFAULT_EQUALIZER_LEN = 21
DEFAULT_P_LEN = 129


def q_gauss(x):
    """Gaussian tail probability Q(x) = P{N(0,1) > x}."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


@dataclass(frozen=True)
class DominantError:
    """Canonical dominant error pattern and its degeneracy.

    ``multiplicity`` counts the distinct shift/sign equivalence classes
    whose output energy ties the minimum (within 1e-9).
    """

    e: Sequence
    output_energy: float
    multiplicity: int


def _canonical_error_patterns(length: int):
    """All trimmed error patterns of the given length with e_0 = +1."""
    if length == 1:
        yield (1,)
        return
    for middle in itertools.product((-1, 0, 1), repeat=length - 2):
        for last in (-1, 1):
            yield (1, *middle, last)


def dominant_error_search(ch: ChannelInstance, max_len: int = 8) -> DominantError:
    """Exhaustively find the error pattern minimizing ``||h*e||^2``.

    Patterns have entries in {-1, 0, +1}, a leading +1 (the sign of an
    error class is not distinguishable), and no trailing zeros.  Among ties
    within 1e-9 the shortest, then lexicographically smallest pattern is
    returned, with the number of tied classes reported as the multiplicity.
    """
    if not 1 <= max_len <= 12:
        raise ValueError("max_len must be in 1..12 (exhaustive search budget)")
    rh = autocorrelation(ch.h)
    hits: list[tuple[int, tuple, float]] = []
    best = np.inf
    for length in range(1, max_len + 1):
        pats = np.array(list(_canonical_error_patterns(length)), dtype=np.float64)
        toep = np.empty((length, length), dtype=np.complex128)
        for i in range(length):
            for j in range(length):
                toep[i, j] = rh.tap(i - j)
        vals = np.einsum("pi,ij,pj->p", pats, toep.real, pats)
        for pat, val in zip(pats, vals):
            if val < best - 1e-9:
                best = val
                hits = [(length, tuple(int(t) for t in pat), float(val))]
            elif val <= best + 1e-9:
                hits.append((length, tuple(int(t) for t in pat), float(val)))
    hits = [h for h in hits if h[2] <= best + 1e-9]
    hits.sort(key=lambda h: (h[0], h[1]))
    length, pattern, val = hits[0]
    return DominantError(
        e=Sequence(0, np.asarray(pattern, dtype=np.float64)),
        output_energy=val,
        multiplicity=len(hits),
    )


def snr_upper_bound(ch: ChannelInstance, e: Sequence) -> float:
    """Matched-filter bound ``||h*e||^2 / sw2`` on the effective SNR."""
    return convolve(ch.h, e).energy() / ch.sigma_w2


def error_support(e: Sequence) -> list[int]:
    return [n for n in range(e.start, e.end + 1) if abs(e.tap(n)) > 0.5]


def effective_snr(p: Sequence, q: Sequence, ch: ChannelInstance, e: Sequence) -> float:
    """Effective SNR of a (p, q) pair against the dominant error ``e``.

    The inner maximization over ``v`` is solved exactly by zeroing the
    mismatch sequence ``a = (q - adjoint(h*p))*e`` on the support of ``e``,
    leaving ``sum_{n: e_n = 0} |a_n|^2`` as the residual variance.
    """
    num = inner(e, convolve(convolve(p, ch.h), e)).real
    a = convolve(subtract(q, adjoint(convolve(p, ch.h))), e)
    var = a.energy() - sum(abs(a.tap(n)) ** 2 for n in error_support(e))
    den = max(var, 0.0) + ch.sigma_w2 * convolve(p, e).energy()
    if den <= 0.0:
        return 0.0
    return float(num * num / den)


@dataclass(frozen=True)
class FirProblem:
    """A target-length-constrained design instance."""

    ch: ChannelInstance
    target_len: int
    e: Sequence
    grid_size: int = DEFAULT_GRID

    def __post_init__(self):
        if self.target_len < 2:
            raise ValueError("target length must be >= 2")
        if self.e.is_zero or self.e.start != 0:
            raise ValueError("error sequence must be canonical (e_0 != 0, causal)")
        vals = self.e.taps.real
        rounded = np.round(vals)
        if (
            np.abs(vals - rounded).max() > 1e-9
            or not np.all(np.isin(rounded, (-1, 0, 1)))
            or abs(vals[0]) < 0.5
        ):
            raise ValueError("error sequence entries must be in {-1, 0, +1} with e_0 != 0")
        if self.ch.sigma_w2 <= 0:
            raise ValueError("FIR design requires sigma_w2 > 0")


@dataclass(frozen=True)
class FirSolution:
    """Solver output: filters, multiplier, shift, and SNR bookkeeping."""

    target_len: int
    q: Sequence
    p: Sequence
    v: Sequence
    g: Sequence
    f: Sequence
    lam: float
    beta_shift: float
    snr: float
    snr_max: float
    e: Sequence
    diagnostics: dict = field(default_factory=dict)

    @property
    def loss_db(self) -> float:
        return 10.0 * np.log10(self.snr_max / self.snr)

    def to_dict(self) -> dict:
        return {
            "target_len": self.target_len,
            "q": self.q.to_dict(),
            "p": self.p.to_dict(),
            "v": self.v.to_dict(),
            "g": self.g.to_dict(),
            "f": self.f.to_dict(),
            "lambda": self.lam,
            "beta_shift": self.beta_shift,
            "snr": self.snr,
            "snr_max": self.snr_max,
            "loss_db": self.loss_db,
            "e": self.e.to_dict(),
            "diagnostics": self.diagnostics,
        }


def _interpolate_masked(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Linear interpolation (circular in grid index) across masked samples."""
    if not mask.any():
        return values
    n = values.size
    idx = np.arange(n)
    good = idx[~mask]
    out = values.copy()
    # wrap one period on each side so runs touching the edges interpolate
    xg = np.concatenate([good - n, good, good + n])
    yg = np.tile(values[~mask], 3)
    out[mask] = np.interp(idx[mask], xg, yg.real) + 1j * np.interp(idx[mask], xg, yg.imag)
    return out


#: Default relative offset added beyond the minimum feasible shift when
#: making the target spectrum nonnegative.  The effective SNR is exactly
#: invariant to this shift, but a target spectrum grazing zero puts a pole
#: in the recovered equalizer that a short tap window cannot represent, so
#: the margin is sized for realizable equalizers rather than set epsilon-small.
DEFAULT_BETA_MARGIN = 0.05


def solve_fir_target(
    problem: FirProblem,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
    p_len: int = DEFAULT_P_LEN,
    beta_margin: float = DEFAULT_BETA_MARGIN,
) -> FirSolution:
    """Maximize the effective SNR over length-L targets with an IIR equalizer.

    The free parameters are the target autocorrelation lags ``q_1..q_{L-1}``
    (``q_0`` is absorbed by the shift degree of freedom) and the slack
    entries of ``v`` on the error support.  Eliminating the equalizer side in
    the frequency domain leaves the dense system ``(C - D) x = lam * m``
    solved at ``lam = 1`` and rescaled so ``Re<e, p*h*e> = 1``.  The returned
    spectrum ``Q + beta_shift`` is made positive by the minimum shift plus
    ``beta_margin * max Q``, factored into the minimum-phase target ``g``,
    and the equalizer follows from ``F = P/G*``, truncated to
    ``equalizer_len`` taps centered at 0.
    """
    ch, e, tlen, n = problem.ch, problem.e, problem.target_len, problem.grid_size
    sw2 = ch.sigma_w2
    h_vals = to_spectrum(ch.h, n).values
    h2 = np.abs(h_vals) ** 2
    if h2.min() < 1e-30 * h2.max():
        raise SpectralNull("channel spectrum vanishes on the grid")
    e_vals = to_spectrum(e, n).values
    omega = Spectrum(e_vals).omega
    a_wt = 1.0 + sw2 / h2

    supports = error_support(e)
    n_lag = tlen - 1
    cols = [2.0 * e_vals * np.cos(l * omega) for l in range(1, n_lag + 1)]
    cols += [-np.exp(-1j * s * omega) for s in supports]
    basis = np.stack(cols, axis=1)

    bh = basis.conj().T
    cmat = (bh @ basis) / n
    dmat = (bh @ (basis / a_wt[:, None])) / n
    mvec = (bh @ (e_vals / a_wt)) / n
    sysmat = np.real(cmat - dmat)
    cond = float(np.linalg.cond(sysmat))
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularSystem(f"design system condition number {cond:.3e}")
    lam = 1.0
    x = np.linalg.solve(sysmat, lam * np.real(mvec))

    r_vals = (basis @ x + lam * e_vals) / a_wt
    cval = float(np.mean(np.conj(r_vals) * e_vals).real)
    if cval <= 0:
        raise SingularSystem("degenerate solution: nonpositive constraint value")
    x *= 1.0 / cval
    r_vals *= 1.0 / cval
    lam *= 1.0 / cval

    cost = float(
        np.mean(np.abs(basis @ x - r_vals) ** 2)
        + sw2 * np.mean(np.abs(r_vals) ** 2 / h2)
    )
    snr = 1.0 / cost
    snr_max = snr_upper_bound(ch, e)

    # Shift Q nonnegative, factor the target.
    q_lags = x[:n_lag]
    q_grid = np.zeros(n)
    for l in range(1, n_lag + 1):
        q_grid += 2.0 * q_lags[l - 1] * np.cos(l * omega)
    q_peak = max(float(q_grid.max()), 1e-300)
    beta_shift = -float(q_grid.min()) + beta_margin * q_peak
    factor = min_phase_factor(Spectrum((q_grid + beta_shift).astype(np.complex128)), max_len=tlen)
    g = factor.g
    g_vals = to_spectrum(g, n).values

    # Recover p: R is the spectrum of adjoint(p)*adjoint(h)*e, so
    # P = conj(R) / (H conj(E)); harmless gaps at grid zeros of E are
    # bridged by interpolation (everything downstream multiplies them back
    # by a factor that vanishes there).
    e_mask = np.abs(e_vals) < 1e-8 * np.abs(e_vals).max()
    with np.errstate(divide="ignore", invalid="ignore"):
        p_vals = np.conj(r_vals) / (h_vals * np.conj(e_vals))
    p_vals = _interpolate_masked(p_vals, e_mask)
    p_seq, p_leak = truncate_spectrum(Spectrum(p_vals), p_len, center=None)

    f_vals = p_vals / np.conj(g_vals)
    f_seq, f_leak = truncate_spectrum(Spectrum(f_vals), equalizer_len, center=0)

    # Final exact normalization: enforce Re<e, p*h*e> = 1 on the truncated
    # taps (the grid rescale already puts this within rounding of 1).
    c_time = inner(e, convolve(convolve(p_seq, ch.h), e)).real
    if c_time <= 0:
        raise SingularSystem("time-domain constraint lost its sign")
    u = 1.0 / float(c_time)
    root_u = np.sqrt(u)

    q_taps = np.zeros(2 * tlen - 1, dtype=np.complex128)
    q_taps[tlen - 1] = beta_shift
    for l in range(1, n_lag + 1):
        q_taps[tlen - 1 + l] = q_lags[l - 1]
        q_taps[tlen - 1 - l] = q_lags[l - 1]
    q_seq = Sequence(-(tlen - 1), q_taps * u, trim=False)

    v_taps = np.zeros(supports[-1] - supports[0] + 1, dtype=np.complex128)
    for j, s in enumerate(supports):
        v_taps[s - supports[0]] = x[n_lag + j]
    v_seq = Sequence(supports[0], v_taps * u, trim=False)

    p_seq = p_seq.scaled(u)
    g = g.scaled(root_u)
    f_seq = f_seq.scaled(root_u)

    sol = FirSolution(
        target_len=tlen,
        q=q_seq,
        p=p_seq,
        v=v_seq,
        g=g,
        f=f_seq,
        lam=lam * u,
        beta_shift=beta_shift * u,
        snr=snr,
        snr_max=snr_max,
        e=e,
        diagnostics={
            "condition_number": cond,
            "factor_residual": factor.residual,
            "equalizer_leaked_energy": f_leak,
            "p_leaked_energy": p_leak,
            "constraint_residual": abs(
                inner(e, convolve(convolve(p_seq, ch.h), e)).real - 1.0
            ),
            "snr_timedomain": effective_snr(p_seq, q_seq, ch, e),
            "interpolated_bins": int(e_mask.sum()),
        },
    )
    return sol


def fir_loss_curve(
    ch: ChannelInstance,
    lengths,
    e: Sequence | None = None,
    grid_size: int = DEFAULT_GRID,
    equalizer_len: int = DEFAULT_EQUALIZER_LEN,
) -> list[tuple[int, float]]:
    """FIR approximation loss ``10 log10(SNR_max / SNR(L))`` per target length."""
    lengths = list(lengths)
    if not lengths:
        raise ValueError("lengths must be nonempty")
    if e is None:
        e = dominant_error_search(ch).e
    out = []
    for tlen in lengths:
        sol = solve_fir_target(
            FirProblem(ch, tlen, e, grid_size), equalizer_len=equalizer_len
        )
        out.append((int(tlen), float(sol.loss_db)))
    return out


@dataclass(frozen=True)
class ErrorModel:
    """High-SNR error-rate prediction for one dominant error class."""

    e: Sequence
    snr_eff: float
    kappa: float
    p_seq: float
    p_bit: float


def hamming_weight(e: Sequence) -> int:
    return int(np.sum(np.abs(e.taps) > 0.5))


def kappa_binary(e: Sequence, message_len: int, multiplicity: int = 1) -> float:
    """Multiplicity constant for IID binary messages of length M.

    Counts time shifts and the sign flip (``2 (M - len(e) + 1)``) times the
    probability ``2^-w_H(e)`` that the transmitted word admits the error
    pattern, times the number of dominant classes.
    """
    placements = max(message_len - len(e) + 1, 0)
    return multiplicity * 2.0 * placements * 2.0 ** (-hamming_weight(e))


def predict_error_rates(
    sol: FirSolution,
    ch: ChannelInstance,
    e: Sequence,
    message_len: int,
    multiplicity: int = 1,
) -> ErrorModel:
    """Predicted sequence/bit error rates for a solved FIR design."""
    kappa = kappa_binary(e, message_len, multiplicity)
    p_seq = float(kappa * q_gauss(np.sqrt(sol.snr)))
    p_bit = float(hamming_weight(e) / message_len * p_seq)
    return ErrorModel(e=e, snr_eff=sol.snr, kappa=kappa, p_seq=p_seq, p_bit=p_bit)
