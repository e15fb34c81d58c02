"""Hot sampling kernels: numba-compiled with a pure-Python twin.

The collapsed Gibbs sweep is the one genuinely hot loop in this package
(hundreds of full passes over every token, each with a sequential
dependency).  Both implementations below execute the identical arithmetic in
the identical order on the same pre-drawn uniforms, so they produce
bit-identical chains; the numba path is just orders of magnitude faster.

Kernel selection:

* ``TOPICBENCH_NUMBA=0`` (or ``off``/``false``) forces the pure-Python twin,
* anything else uses numba when it is importable.

``benchmarks/bench_gibbs.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

__all__ = ["HAVE_NUMBA", "numba_active", "gibbs_sweep", "sweep_impl"]


def numba_active() -> bool:
    flag = os.environ.get("TOPICBENCH_NUMBA", "auto").strip().lower()
    if flag in ("0", "off", "false", "no"):
        return False
    return HAVE_NUMBA


def _gibbs_sweep(token_doc, token_word, z, n_dt, n_wt, n_t, alpha, beta, vbeta, u, cum):
    # One full resampling pass. For token i the conditional weight of topic k
    # is (n_dt[d,k]+alpha) * (n_wt[w,k]+beta) / (n_t[k]+vbeta) with token i's
    # current assignment removed from the counts.
    n = token_doc.shape[0]
    k_num = n_t.shape[0]
    for i in range(n):
        d = token_doc[i]
        w = token_word[i]
        old = z[i]
        n_dt[d, old] -= 1
        n_wt[w, old] -= 1
        n_t[old] -= 1
        total = 0.0
        for k in range(k_num):
            total += (n_dt[d, k] + alpha) * (n_wt[w, k] + beta) / (n_t[k] + vbeta)
            cum[k] = total
        r = u[i] * total
        lo = 0
        hi = k_num
        while lo < hi:
            mid = (lo + hi) >> 1
            if cum[mid] <= r:
                lo = mid + 1
            else:
                hi = mid
        new = lo
        if new >= k_num:  # u*total can round up onto the final cumulative value
            new = k_num - 1
        z[i] = new
        n_dt[d, new] += 1
        n_wt[w, new] += 1
        n_t[new] += 1


_gibbs_sweep_py = _gibbs_sweep
if HAVE_NUMBA:
    _gibbs_sweep_nb = njit(cache=True)(_gibbs_sweep)


def sweep_impl(accelerated: bool | None = None):
    """Resolve the sweep kernel; ``None`` defers to the environment flag."""
    if accelerated is None:
        accelerated = numba_active()
    if accelerated:
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not available; set TOPICBENCH_NUMBA=0")
        return _gibbs_sweep_nb
    return _gibbs_sweep_py


def gibbs_sweep(
    token_doc: np.ndarray,
    token_word: np.ndarray,
    z: np.ndarray,
    n_dt: np.ndarray,
    n_wt: np.ndarray,
    n_t: np.ndarray,
    alpha: float,
    beta: float,
    vbeta: float,
    u: np.ndarray,
    cum: np.ndarray,
    accelerated: bool | None = None,
) -> None:
    """Resample every token once, updating ``z`` and the count tables in place."""
    impl = sweep_impl(accelerated)
    impl(token_doc, token_word, z, n_dt, n_wt, n_t, alpha, beta, vbeta, u, cum)
