"""JIT-compiled hot loops with a pure NumPy/SciPy fallback path.

Two operations in this package are genuinely loop-bound and cannot be
expressed as single vectorized calls: sample-recursive IIR filtering
(parametric EQ, pink-noise shaping) and Levenshtein distance (quadratic
DP, run hundreds of thousands of times by the evaluation harness). Both
are compiled with numba when it is importable.

Set ``CHIPLINK_NUMBA=0`` in the environment to force the fallback path;
``benchmarks/bench_kernels.py`` times the two side by side. Everything
FFT- or BLAS-bound (STFT, Griffin-Lim, template correlation) stays on
numpy/scipy, where numba has nothing to add.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import signal as _sps

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and os.environ.get("CHIPLINK_NUMBA", "1") != "0"


# ---------------------------------------------------------------------------
# IIR filtering (direct form II transposed, matching scipy.signal.lfilter)
# ---------------------------------------------------------------------------

def _iir_filter_py(b: np.ndarray, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    order = a.shape[0] - 1
    y = np.empty(n)
    z = np.zeros(order + 1)  # z[order] stays 0, simplifies the update
    for i in range(n):
        xi = x[i]
        yi = b[0] * xi + z[0]
        for k in range(order):
            z[k] = b[k + 1] * xi + z[k + 1] - a[k + 1] * yi
        y[i] = yi
    return y


if _HAVE_NUMBA:
    _iir_filter_numba = njit(cache=True)(_iir_filter_py)


def _iir_filter_numpy(b: np.ndarray, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    return _sps.lfilter(b, a, x)


def iir_filter(b, a, x) -> np.ndarray:
    """Filter ``x`` with the rational transfer function b(z)/a(z).

    Coefficients are normalized by a[0] and zero-padded to equal length;
    initial filter state is zero. The numba path implements the same
    direct form II transposed recurrence as scipy.signal.lfilter, so the
    two backends agree to rounding error.
    """
    b = np.asarray(b, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if a[0] == 0:
        raise ValueError("a[0] must be non-zero")
    b, a = b / a[0], a / a[0]
    n = max(b.shape[0], a.shape[0])
    if n < 2:
        return b[0] * x
    b = np.pad(b, (0, n - b.shape[0]))
    a = np.pad(a, (0, n - a.shape[0]))
    if NUMBA_ENABLED:
        return _iir_filter_numba(b, a, x)
    return _iir_filter_numpy(b, a, x)


# ---------------------------------------------------------------------------
# Levenshtein distance over integer code arrays
# ---------------------------------------------------------------------------

def _levenshtein_py(a: np.ndarray, b: np.ndarray) -> int:
    la, lb = a.shape[0], b.shape[0]
    prev = np.arange(lb + 1, dtype=np.int64)
    curr = np.empty(lb + 1, dtype=np.int64)
    for i in range(la):
        curr[0] = i + 1
        ai = a[i]
        for j in range(lb):
            m = prev[j] + (0 if ai == b[j] else 1)
            if prev[j + 1] + 1 < m:
                m = prev[j + 1] + 1
            if curr[j] + 1 < m:
                m = curr[j] + 1
            curr[j + 1] = m
        prev, curr = curr, prev
    return int(prev[lb])


if _HAVE_NUMBA:
    _levenshtein_numba = njit(cache=True)(_levenshtein_py)


def _levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    la, lb = a.shape[0], b.shape[0]
    if la * lb <= 1024:
        # numpy row updates lose to plain Python below ~32x32
        return _levenshtein_py(a, b)
    prev = np.arange(lb + 1, dtype=np.int64)
    idx = np.arange(lb + 1, dtype=np.int64)
    curr = np.empty(lb + 1, dtype=np.int64)
    for i in range(la):
        curr[0] = i + 1
        np.minimum(prev[:-1] + (a[i] != b), prev[1:] + 1, out=curr[1:])
        # enforce curr[j] <= curr[j-1] + 1 via a prefix minimum:
        # curr[j] = j + min_{k<=j}(curr[k] - k)
        curr = np.minimum.accumulate(curr - idx) + idx
        prev, curr = curr, prev
    return int(prev[lb])


def levenshtein_codes(a: np.ndarray, b: np.ndarray) -> int:
    """Unit-cost edit distance between two int64 code arrays."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if a.shape[0] == 0:
        return int(b.shape[0])
    if b.shape[0] == 0:
        return int(a.shape[0])
    if NUMBA_ENABLED:
        return int(_levenshtein_numba(a, b))
    return _levenshtein_numpy(a, b)


def warmup() -> None:
    """Trigger JIT compilation so first-call latency is paid up front."""
    if not NUMBA_ENABLED:
        return
    x = np.array([0.1, -0.2, 0.3])
    iir_filter([1.0, 0.2], [1.0, -0.1], x)
    levenshtein_codes(np.array([1, 2, 3]), np.array([1, 3]))
