"""Pure-NumPy trellis kernel; import-time fallback for the compiled one.

Same contract as ``_viterbi_cy.run_trellis``: destination-major
add-compare-select over ``(state, incoming-branch)`` arrays, with the last
``T - n_free`` steps restricted to branches consuming symbol index 0 and the
survivor path read back from state 0.
"""

from __future__ import annotations

import numpy as np


def run_trellis(z, out, src, sym, corr, n_free):
    """Run add-compare-select over ``T = len(z)`` steps.

    Parameters
    ----------
    z : complex128[T]
        Observed samples.
    out, src, sym : (S, K) arrays
        For destination state ``sp`` and incoming branch ``m``: the noiseless
        branch output, predecessor state, and consumed symbol index.
    corr : float64[K]
        Branch-metric correction per symbol index (subtracted).
    n_free : int
        Steps ``n >= n_free`` only admit symbol index 0 (termination tail).

    Returns
    -------
    (path, metric, ties) : (int32[T], float, int)
        Decoded symbol indices, metric of the surviving path into state 0,
        and the number of metric ties resolved toward the smaller branch.
    """
    T = len(z)
    S, K = out.shape
    pm = np.full(S, np.inf)
    pm[0] = 0.0
    bp = np.empty((T, S), dtype=np.uint8)
    corr_b = corr[sym]
    tail_blocked = sym != 0
    ties = 0
    for n in range(T):
        d = z[n] - out
        cand = pm[src] + (d.real * d.real + d.imag * d.imag) - corr_b
        if n >= n_free:
            cand[tail_blocked] = np.inf
        best = cand.min(axis=1)
        bp[n] = np.argmin(cand, axis=1)
        finite = np.isfinite(best)
        ties += int(((cand == best[:, None]) & finite[:, None]).sum() - finite.sum())
        pm = best

    metric = float(pm[0])
    path = np.empty(T, dtype=np.int32)
    s = 0
    for n in range(T - 1, -1, -1):
        f = int(bp[n, s]) * S + s
        path[n] = f % K
        s = f // K
    return path, metric, ties
