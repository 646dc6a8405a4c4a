"""Matrix-free |p|^alpha, V, H = |p| + V, the dilation generator A, and the
spectral metadata of H (bounds, bound states, continuous projector).
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import RepresentationError, SolverError, SymbolError
from .grid import MOMENTUM, POSITION, Field, arr_inner, boundary_mass

ZERO_MODE_TOL = 1e-6


# ------------------------------------------------------------------ potentials


@dataclass(frozen=True)
class PotentialSpec:
    family: str = "gaussian_well"
    g: float = 0.0
    sigma: float = 2.0
    q: float = 3.0

    def __post_init__(self):
        if self.family not in ("gaussian_well", "polynomial_decay"):
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.g < 0:
            raise ValueError("coupling g must be >= 0")
        if self.family == "gaussian_well" and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.family == "polynomial_decay" and not self.q > 2:
            raise ValueError("polynomial decay needs q > 2")

    def V(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "gaussian_well":
            return -self.g * np.exp(-(r / self.sigma) ** 2)
        return -self.g * (1.0 + r ** 2) ** (-0.5 * self.q)

    def x_grad(self, r):
        """x . grad V = r V'(r)."""
        r = np.asarray(r, dtype=float)
        if self.family == "gaussian_well":
            return 2.0 * self.g * (r / self.sigma) ** 2 * np.exp(-(r / self.sigma) ** 2)
        return self.g * self.q * r ** 2 * (1.0 + r ** 2) ** (-0.5 * self.q - 1.0)

    def tilde(self, r):
        return self.V(r) + self.x_grad(r)

    def values(self, r, variant="V"):
        if variant == "V":
            return self.V(r)
        if variant in ("xdV", "x.gradV"):
            return self.x_grad(r)
        if variant in ("Vtilde", "tilde"):
            return self.tilde(r)
        raise ValueError(f"unknown potential variant {variant!r}")

    def decay_check(self, grid, ring=0.9, factor=0.1):
        """r^2 (|V| + |x.grad V|) on the outer ring is small against its bulk maximum."""
        r = grid.r
        w = r ** 2 * (np.abs(self.V(r)) + np.abs(self.x_grad(r)))
        peak = w.max()
        if peak == 0:
            return True
        outer = w[r >= ring * grid.L]
        return bool(outer.size == 0 or outer.max() <= factor * peak)

    def hardy_hypothesis(self, grid):
        """|V(r)| < 1/(2r) on every grid point with r > 0."""
        r = grid.r[grid.r > 0]
        return bool(np.all(np.abs(self.V(r)) * 2.0 * r < 1.0))

    def to_dict(self):
        return {"family": self.family, "g": self.g, "sigma": self.sigma, "q": self.q}


# --------------------------------------------------------------- raw kernels


def p_apply(grid, arr, sym):
    """Fourier multiplier on a raw position array; sym is in FFT order."""
    return np.fft.ifftn(sym * np.fft.fftn(arr))


def abs_p_symbol(grid, alpha=1.0):
    km = grid.kmag
    if alpha >= 0:
        return km ** alpha
    with np.errstate(divide="ignore"):
        s = np.where(km > 0, km ** alpha, 0.0)
    return s


class Subspace:
    """Real coordinates for the functions a Krylov solver should see.

    On radial grids only odd functions are physical; a vector of this space
    holds the values at x > 0.  Elsewhere it is the full lattice.
    """

    def __init__(self, grid):
        self.grid = grid
        n = grid.n
        if grid.radial:
            self.pos = np.arange(n // 2 + 1, n)
            self.neg = (-self.pos) % n
            self.size = self.pos.size
        else:
            self.size = int(np.prod(grid.shape))

    def embed(self, v):
        g = self.grid
        if not g.radial:
            return v.reshape(g.shape)
        u = np.zeros(g.n, dtype=v.dtype)
        u[self.pos] = v
        u[self.neg] = -v
        return u

    def restrict(self, u):
        if not self.grid.radial:
            return u.reshape(-1)
        return u[self.pos]

    def operator(self, func, dtype=np.float64):
        def mv(v):
            v = np.asarray(v).reshape(-1)
            out = self.restrict(func(self.embed(v)))
            return out.real.astype(dtype) if dtype == np.float64 else out
        return LinearOperator((self.size, self.size), matvec=mv, dtype=dtype)

    def to_field(self, v):
        vals = self.embed(np.asarray(v, dtype=np.complex128))
        return Field(self.grid, vals)


# ---------------------------------------------------------------- Hamiltonian


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    grid: object
    potential: PotentialSpec
    spectral_bounds: tuple = (0.0, 0.0)
    bound_states: tuple = ()
    resonance_margin: float = float("nan")
    resonance_margin_refined: float = float("nan")
    resonance_stable: bool = False
    V: np.ndarray = field(default=None, repr=False)
    xdV: np.ndarray = field(default=None, repr=False)
    kmag: np.ndarray = field(default=None, repr=False)

    def apply(self, arr):
        """H on a raw position-space array."""
        return np.fft.ifftn(self.kmag * np.fft.fftn(arr)) + self.V * arr

    @property
    def is_free(self):
        return self.potential.g == 0

    @property
    def n_bound(self):
        return len(self.bound_states)


def _arrays(grid, potential):
    return potential.V(grid.r), potential.x_grad(grid.r), grid.kmag


def _lanczos_extreme(grid, V, kmag, which, tol, maxiter):
    sp = Subspace(grid)
    op = sp.operator(lambda u: np.fft.ifftn(kmag * np.fft.fftn(u)) + V * u)
    rng = np.random.default_rng(12345)
    v0 = rng.standard_normal(sp.size)
    try:
        vals = eigsh(op, k=1, which=which, tol=tol, maxiter=maxiter, v0=v0,
                     return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise SolverError(f"Lanczos did not converge for {which} end of spectrum") from exc
    return float(vals[0])


def compute_spectral_bounds(grid, V, kmag, tol=1e-8, maxiter=20000):
    lo = _lanczos_extreme(grid, V, kmag, "SA", tol, maxiter)
    hi = _lanczos_extreme(grid, V, kmag, "LA", tol, maxiter)
    pad = 0.05 * (hi - lo)
    # rigorous outer bounds: |p| >= 0 and |p| <= max |k|
    floor = float(V.min())
    ceil = float(kmag.max() + max(V.max(), 0.0))
    return max(lo - pad, floor), min(hi + pad, ceil)


def compute_bound_states(grid, V, kmag, tol=1e-13, max_states=16):
    sp = Subspace(grid)
    op = sp.operator(lambda u: np.fft.ifftn(kmag * np.fft.fftn(u)) + V * u)
    if V.min() >= 0:
        return ()
    rng = np.random.default_rng(2024)
    k = 2
    while True:
        k = min(k, sp.size - 2)
        try:
            vals, vecs = eigsh(op, k=k, which="SA", tol=tol, maxiter=50000,
                               v0=rng.standard_normal(sp.size))
        except ArpackNoConvergence as exc:
            raise SolverError("bound-state eigensolve did not converge") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        if vals[-1] >= 0 or k >= max_states:
            break
        k *= 2
    out = []
    for E, v in zip(vals, vecs.T):
        if E >= 0:
            break
        f = sp.to_field(v)
        f = f * (1.0 / np.sqrt(arr_inner(grid, f.values, f.values).real))
        out.append((float(E), f))
    return tuple(out)


def continuum_margin(grid, V, kmag, bound_states, tol=1e-10):
    """Smallest Ritz value of H on the orthogonal complement of the bound states."""
    sp = Subspace(grid)
    phis = [b[1].values for b in bound_states]
    big = float(kmag.max()) + 10.0

    def hp(u):
        out = np.fft.ifftn(kmag * np.fft.fftn(u)) + V * u
        for phi in phis:
            out = out + big * phi * arr_inner(grid, phi, u)
        return out

    op = sp.operator(hp)
    rng = np.random.default_rng(7)
    try:
        val = eigsh(op, k=1, which="SA", tol=tol, maxiter=50000, v0=rng.standard_normal(sp.size),
                    return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise SolverError("continuum margin eigensolve did not converge") from exc
    return float(val[0])


def make_hamiltonian(grid, potential=None, bounds_tol=1e-8, find_bound_states=True,
                     margin=True, refine_margin=None):
    """Assemble H = |p| + V with its spectral metadata.

    ``refine_margin`` repeats the continuum margin on the 2x refined grid;
    it defaults to True for 1D and radial grids.
    """
    if potential is None:
        potential = PotentialSpec(g=0.0)
    V, xdV, kmag = _arrays(grid, potential)
    bounds = compute_spectral_bounds(grid, V, kmag, tol=bounds_tol)
    bs = compute_bound_states(grid, V, kmag) if find_bound_states else ()
    m1 = m2 = float("nan")
    stable = False
    if margin:
        m1 = continuum_margin(grid, V, kmag, bs)
        if refine_margin is None:
            refine_margin = grid.dim == 1
        if refine_margin:
            g2 = grid.refined()
            V2, _, k2 = _arrays(g2, potential)
            bs2 = compute_bound_states(g2, V2, k2) if find_bound_states else ()
            m2 = continuum_margin(g2, V2, k2, bs2)
            stable = bool(m1 >= 0 and m2 >= 0 and abs(m1 - m2) <= 0.1 * max(abs(m1), abs(m2)) + 1e-12)
        else:
            stable = bool(m1 >= 0)
    return HamiltonianSpec(grid, potential, bounds, bs, m1, m2, stable, V, xdV, kmag)


def spectral_bounds(H, tol=None):
    if tol is None:
        return H.spectral_bounds
    return compute_spectral_bounds(H.grid, H.V, H.kmag, tol=tol)


# ------------------------------------------------------------ field-level API


def apply_momentum_function(f, symbol):
    """Multiply by symbol(|k|) in momentum space.

    ``symbol`` is a callable of |k| or a float alpha meaning |k|^alpha.  A
    symbol that is singular at k = 0 has its zero-mode entry removed, which
    requires f to carry less than 1e-6 relative mass there.
    """
    g = f.grid
    fh = f.momentum().values
    if callable(symbol):
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.asarray(symbol(g.kmag), dtype=np.complex128) * np.ones(g.shape)
    else:
        s = abs_p_symbol(g, float(symbol)).astype(np.complex128)
        if float(symbol) < 0:
            s[(0,) * g.dim] = np.inf
    bad = ~np.isfinite(s)
    if bad.any():
        tot = np.vdot(fh, fh).real
        mass = np.sum(np.abs(fh[bad]) ** 2) / tot if tot > 0 else 0.0
        if mass >= ZERO_MODE_TOL:
            raise SymbolError(f"singular symbol on a field with relative zero-mode mass {mass:.3e}")
        s = np.where(bad, 0.0, s)
    out = Field(g, s * fh, MOMENTUM)
    return out if f.rep == MOMENTUM else out.position()


def apply_potential(f, V, variant="V"):
    if f.rep != POSITION:
        raise RepresentationError("apply_potential expects a position-space field")
    return Field(f.grid, V.values(f.grid.r, variant) * f.values)


def apply_H(f, H):
    pos = f.position()
    out = apply_momentum_function(pos, 1.0) + apply_potential(pos, H.potential)
    return out if f.rep == POSITION else out.momentum()


def grad_arrays(grid, arr):
    fh = np.fft.fftn(arr)
    out = []
    for ax, kc in enumerate(grid.kcoords):
        kk = kc.copy()
        # the Nyquist column has no consistent derivative
        kk[np.isclose(np.abs(kk), grid.k_nyquist)] = 0.0
        out.append(np.fft.ifftn(1j * kk * fh))
    return out


def A_apply(grid, arr):
    """-i (x.grad + d/2) on a raw array; d = 1 for the radial reduction."""
    d = grid.dim
    acc = 0.5 * d * arr
    for xc, gr in zip(grid.coords, grad_arrays(grid, arr)):
        acc = acc + xc * gr
    return -1j * acc


def apply_A(f, warn_tol=1e-6):
    pos = f.position()
    bm = boundary_mass(pos)
    if bm > warn_tol:
        warnings.warn(f"field has boundary mass {bm:.2e}; x.grad is not periodic-consistent",
                      RuntimeWarning, stacklevel=2)
    out = Field(f.grid, A_apply(f.grid, pos.values))
    return out if f.rep == POSITION else out.momentum()


def project_continuous(f, H):
    pos = f.position()
    v = pos.values.copy()
    for _, phi in H.bound_states:
        v = v - phi.values * arr_inner(H.grid, phi.values, v)
    out = Field(f.grid, v)
    return out if f.rep == POSITION else out.momentum()


def project_continuous_arr(H, arr):
    v = arr
    for _, phi in H.bound_states:
        v = v - phi.values * arr_inner(H.grid, phi.values, v)
    return v


def resonance_margin(H):
    return {"coarse": H.resonance_margin, "refined": H.resonance_margin_refined,
            "accepted": H.resonance_stable}
