"""The dilation group (e^{i mu A} f)(x) = e^{d mu/2} f(e^mu x).

Implemented by band-limited resampling of the periodic interpolant at the
scaled nodes e^mu x_j, evaluated with a chirp z-transform per axis.  Nodes
mapped outside the box are set to zero.
"""
import numpy as np
from scipy.signal import czt

from . import kernels
from .errors import DilationRangeError
from .grid import Field, bandwidth, support_radius

RANGE_MASS_TOL = 1e-14


def _axis_coefficients(grid, arr, axis):
    n = grid.n
    c = np.fft.fft(arr, axis=axis) / n
    c = np.fft.fftshift(c, axes=axis)  # signed index -n/2 .. n/2-1
    # split the Nyquist coefficient symmetrically so the interpolant is real-consistent
    nyq = np.take(c, [0], axis=axis) * 0.5
    c = np.concatenate([c, nyq], axis=axis)
    idx = [slice(None)] * arr.ndim
    idx[axis] = 0
    c[tuple(idx)] *= 0.5
    return c


def _dilate_axis(grid, arr, mu, axis):
    n, L = grid.n, grid.L
    e = np.exp(mu)
    c = _axis_coefficients(grid, arr, axis)
    m = np.arange(-n // 2, n // 2 + 1)
    km = 2.0 * np.pi * m / (2.0 * L)
    sh = [1] * arr.ndim
    sh[axis] = n + 1
    c = c * np.exp(1j * km * L * (1.0 - e)).reshape(sh)
    w = np.exp(2j * np.pi * e / n)
    out = czt(c, m=n, w=w, a=1.0, axis=axis)
    j = np.arange(n)
    sh[axis] = n
    out = out * np.exp(-1j * np.pi * e * j).reshape(sh)
    y = e * grid.x
    mask = (np.abs(y) < L).astype(float)
    return out * mask.reshape(sh)


def dilate_array(grid, arr, mu):
    """e^{i mu A} on a raw position array, no range checks."""
    if mu == 0:
        return np.array(arr, dtype=np.complex128, copy=True)
    out = np.asarray(arr, dtype=np.complex128)
    for ax in range(grid.dim):
        out = _dilate_axis(grid, out, mu, ax)
    return out * np.exp(0.5 * grid.dim * mu)


def dilate_array_direct(grid, arr, mu):
    """Same map by direct trigonometric summation (1D only, O(N^2))."""
    if grid.dim != 1:
        raise ValueError("direct dilation is implemented for 1D grids")
    n, L = grid.n, grid.L
    c = _axis_coefficients(grid, np.asarray(arr, dtype=np.complex128), 0)
    m = np.arange(-n // 2, n // 2 + 1)
    km = 2.0 * np.pi * m / (2.0 * L)
    y = np.exp(mu) * grid.x
    out = kernels.trig_eval(c, km, y + L)
    out[np.abs(y) >= L] = 0.0
    return out * np.exp(0.5 * mu)


def dilation_range(f, frac=0.9, mass_tol=RANGE_MASS_TOL):
    """Interval of mu for which e^{i mu A} f stays inside the box and band.

    Expansion (mu < 0) needs e^{-mu} r_f < frac L; compression (mu > 0)
    needs e^{mu} k_f below the Nyquist frequency.
    """
    g = f.grid
    r = support_radius(f, mass_tol)
    k = bandwidth(f, mass_tol)
    lo = -np.log(frac * g.L / r) if r > 0 else -np.inf
    hi = np.log(g.k_nyquist / k) if k > 0 else np.inf
    return float(lo), float(hi)


def apply_dilation(f, lam, check=True):
    g = f.grid
    pos = f.position()
    if check and lam != 0:
        lo, hi = dilation_range(pos)
        if not (lo <= lam <= hi):
            raise DilationRangeError(
                f"dilation parameter {lam:.4g} outside the resolvable range [{lo:.4g}, {hi:.4g}]")
    out = Field(g, dilate_array(g, pos.values, lam))
    return out if f.rep == "position" else out.momentum()


class Dilator:
    """Repeated dilations of one array with the range precomputed."""

    def __init__(self, f, frac=0.9, mass_tol=RANGE_MASS_TOL):
        self.grid = f.grid
        self.arr = f.position().values
        self.lo, self.hi = dilation_range(f, frac, mass_tol)

    def valid(self, mu):
        return self.lo <= mu <= self.hi

    def __call__(self, mu):
        return dilate_array(self.grid, self.arr, mu)
