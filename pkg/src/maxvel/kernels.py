"""Hot inner loops with a numba implementation and a pure numpy twin.

The numba path is used when numba imports cleanly and the environment
variable ``MAXVEL_DISABLE_NUMBA`` is unset or ``0``.  Both paths are always
importable so they can be compared against each other.
"""
import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover
    nb = None

DISABLE_ENV = "MAXVEL_DISABLE_NUMBA"


def numba_requested():
    return os.environ.get(DISABLE_ENV, "0").strip().lower() in ("", "0", "false", "no")


# ---------------------------------------------------------------- numpy twins


def cheb_step_numpy(hv, cur, prev, alpha, beta, coefs, accs, odd):
    """Three-term Chebyshev update written into ``prev``.

    prev <- alpha*(hv - beta*cur) - prev, optionally odd-projected, then
    accs[w] += coefs[w]*prev for every accumulator row.
    """
    np.subtract(hv, beta * cur, out=hv)
    hv *= alpha
    np.subtract(hv, prev, out=prev)
    if odd:
        odd_project_numpy(prev)
    for w in range(accs.shape[0]):
        accs[w] += coefs[w] * prev
    return prev


def odd_project_numpy(u):
    n = u.shape[0]
    rev = u[(-np.arange(n)) % n]
    u -= rev
    u *= 0.5
    return u


def trig_eval_numpy(coef, freq, y, chunk=512):
    """Evaluate sum_m coef[m] exp(i freq[m] y[j]) at arbitrary points."""
    out = np.empty(y.shape[0], dtype=np.complex128)
    for s in range(0, y.shape[0], chunk):
        ph = np.exp(1j * np.outer(y[s:s + chunk], freq))
        out[s:s + chunk] = ph @ coef
    return out


# ---------------------------------------------------------------- numba twins

if nb is not None:

    @nb.njit(cache=True, fastmath=False)
    def cheb_step_numba(hv, cur, prev, alpha, beta, coefs, accs, odd):
        n = prev.shape[0]
        for j in range(n):
            prev[j] = alpha * (hv[j] - beta * cur[j]) - prev[j]
        if odd:
            half = n // 2
            prev[0] = 0.0
            prev[half] = 0.0
            for j in range(1, half):
                a = prev[j]
                b = prev[n - j]
                prev[j] = 0.5 * (a - b)
                prev[n - j] = 0.5 * (b - a)
        nw = accs.shape[0]
        for w in range(nw):
            c = coefs[w]
            for j in range(n):
                accs[w, j] += c * prev[j]
        return prev

    @nb.njit(cache=True)
    def odd_project_numba(u):
        n = u.shape[0]
        half = n // 2
        u[0] = 0.0
        u[half] = 0.0
        for j in range(1, half):
            a = u[j]
            b = u[n - j]
            u[j] = 0.5 * (a - b)
            u[n - j] = 0.5 * (b - a)
        return u

    @nb.njit(cache=True)
    def trig_eval_numba(coef, freq, y):
        m = freq.shape[0]
        out = np.zeros(y.shape[0], dtype=np.complex128)
        for j in range(y.shape[0]):
            acc = 0.0 + 0.0j
            yj = y[j]
            for q in range(m):
                ang = freq[q] * yj
                acc += coef[q] * complex(np.cos(ang), np.sin(ang))
            out[j] = acc
        return out

else:  # pragma: no cover
    cheb_step_numba = None
    odd_project_numba = None
    trig_eval_numba = None


def backend():
    if nb is not None and numba_requested():
        return "numba"
    return "numpy"


def cheb_step(hv, cur, prev, alpha, beta, coefs, accs, odd=False):
    if backend() == "numba":
        return cheb_step_numba(hv, cur, prev, float(alpha), float(beta),
                               np.ascontiguousarray(coefs, dtype=np.float64), accs, bool(odd))
    return cheb_step_numpy(hv, cur, prev, alpha, beta, coefs, accs, odd)


def odd_project(u):
    """In-place projection onto functions odd under x -> -x on the periodic grid."""
    if backend() == "numba" and u.ndim == 1:
        return odd_project_numba(u)
    return odd_project_numpy(u)


def trig_eval(coef, freq, y):
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    freq = np.ascontiguousarray(freq, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if backend() == "numba":
        return trig_eval_numba(coef, freq, y)
    return trig_eval_numpy(coef, freq, y)
