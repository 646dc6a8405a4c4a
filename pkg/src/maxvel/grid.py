"""Periodic position/momentum lattice, fields, transforms and weighted norms.

Fourier convention is continuum normalised,

    fhat(k) = (2 pi)^(-d/2) h^d sum_j f(x_j) exp(-i k x_j),

so that exp(-x^2/2) maps to exp(-k^2/2) and the momentum inner product uses
the cell volume (pi/L)^d.

A grid built with ``radial=True`` is the reduction of a 3D radial problem to
one dimension: a radial function f(r) is stored as u(x) = x f(|x|), odd in x,
on [-L, L).  Then |p|, the dilation group and multiplication operators act on
u by their one dimensional formulas.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridError, RepresentationError

POSITION = "position"
MOMENTUM = "momentum"


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    L: float
    radial: bool = False

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise GridError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = int(self.n)
        if n < 16 or n & (n - 1):
            raise GridError(f"points per axis must be a power of two >= 16, got {self.n}")
        if not self.L > 0:
            raise GridError(f"half length must be positive, got {self.L}")
        if self.radial and self.dim != 1:
            raise GridError("radial reduction is stored on a 1D grid")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self):
        return 2.0 * self.L / self.n

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def dk(self):
        return np.pi / self.L

    @property
    def k_nyquist(self):
        return np.pi / self.h

    @property
    def k_max(self):
        return np.pi * np.sqrt(self.dim) / self.h

    @property
    def phys_dim(self):
        """Dimension of the physical problem (3 for the radial reduction)."""
        return 3 if self.radial else self.dim

    @property
    def cell(self):
        return self.h ** self.dim

    @cached_property
    def x(self):
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def k(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def coords(self):
        return np.meshgrid(*([self.x] * self.dim), indexing="ij", sparse=True)

    @cached_property
    def kcoords(self):
        return np.meshgrid(*([self.k] * self.dim), indexing="ij", sparse=True)

    @cached_property
    def r(self):
        return np.sqrt(sum(c ** 2 for c in self.coords)) * np.ones(self.shape)

    @cached_property
    def kmag(self):
        return np.sqrt(sum(c ** 2 for c in self.kcoords)) * np.ones(self.shape)

    @cached_property
    def _sign(self):
        # exp(i k_m L) = (-1)^m for the signed index m
        m = np.rint(self.k / self.dk).astype(np.int64)
        s1 = np.where(m % 2 == 0, 1.0, -1.0)
        out = np.ones(self.shape)
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = self.n
            out = out * s1.reshape(sh)
        return out

    @cached_property
    def _reverse(self):
        return (-np.arange(self.n)) % self.n

    def reflect(self, values):
        """values(-x) on the periodic lattice."""
        out = values
        for ax in range(self.dim):
            out = np.take(out, self._reverse, axis=ax)
        return out

    def refined(self, factor=2):
        """Same box, spacing divided by ``factor``."""
        return Grid(self.dim, self.n * factor, self.L, self.radial)

    def describe(self):
        return {"dim": self.dim, "n": self.n, "L": self.L, "h": self.h, "radial": self.radial}


def make_grid(dim, points_per_axis, L, radial=False):
    return Grid(int(dim), int(points_per_axis), float(L), bool(radial))


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray = field(repr=False)
    rep: str = POSITION

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            v = v.reshape(self.grid.shape)
        object.__setattr__(self, "values", v)
        if self.rep not in (POSITION, MOMENTUM):
            raise RepresentationError(f"unknown representation {self.rep!r}")

    def with_values(self, values):
        return Field(self.grid, values, self.rep)

    def __add__(self, other):
        _check_pair(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _check_pair(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def norm(self):
        return norm(self)

    def position(self):
        return self if self.rep == POSITION else to_position(self)

    def momentum(self):
        return self if self.rep == MOMENTUM else to_momentum(self)


def _check_pair(f, g):
    if f.grid != g.grid:
        raise GridError("fields live on different grids")
    if f.rep != g.rep:
        raise RepresentationError("fields are in different representations")


def fft_forward(grid, values):
    c = (grid.h / np.sqrt(2 * np.pi)) ** grid.dim
    return c * grid._sign * np.fft.fftn(values)


def fft_inverse(grid, values):
    c = (grid.h / np.sqrt(2 * np.pi)) ** grid.dim
    return np.fft.ifftn(grid._sign * values) / c


def to_momentum(f):
    if f.rep != POSITION:
        raise RepresentationError("to_momentum expects a position-space field")
    return Field(f.grid, fft_forward(f.grid, f.values), MOMENTUM)


def to_position(f):
    if f.rep != MOMENTUM:
        raise RepresentationError("to_position expects a momentum-space field")
    return Field(f.grid, fft_inverse(f.grid, f.values), POSITION)


def _weight(f):
    return f.grid.cell if f.rep == POSITION else f.grid.dk ** f.grid.dim


def inner_product(f, g):
    _check_pair(f, g)
    return complex(np.vdot(f.values, g.values) * _weight(f))


def norm(f):
    return float(np.sqrt(np.vdot(f.values, f.values).real * _weight(f)))


def arr_inner(grid, a, b):
    """Position-space inner product on raw arrays."""
    return complex(np.vdot(a, b) * grid.cell)


def arr_norm(grid, a):
    return float(np.sqrt(np.vdot(a, a).real * grid.cell))


def field_from_function(grid, func):
    """Sample func on the position lattice.

    On radial grids ``func`` is the 3D radial profile f(r) and the stored
    field is the odd extension of r f(r).
    """
    if grid.radial:
        x = grid.x
        vals = x * func(np.abs(x))
        vals[0] = 0.0
        return Field(grid, vals)
    if grid.dim == 1:
        return Field(grid, func(grid.x))
    return Field(grid, func(*grid.coords) * np.ones(grid.shape))


def normalized(f):
    nrm = norm(f)
    if nrm == 0:
        return f
    return f * (1.0 / nrm)


def weighted_norm(f, weight, s=None, t=None, step=None):
    """Norm of W f for one of the multiplication weights used by the theory.

    weight = "bracket_x"   : W = <x>^s, s in [-2, 4]
    weight = "radial_step" : W = step(|x|/t), t > 0
    weight = "momentum_step": W = step(|k|)
    """
    g = f.grid
    if weight == "bracket_x":
        if s is None or not (-2.0 <= s <= 4.0):
            raise ValueError(f"weight exponent s={s} outside validated range [-2, 4]")
        w = (1.0 + g.r ** 2) ** (0.5 * s)
        return norm(Field(g, w * f.position().values))
    if weight == "radial_step":
        if t is None or not t > 0:
            raise ValueError(f"time must be positive, got {t}")
        return norm(Field(g, step(g.r / t) * f.position().values))
    if weight == "momentum_step":
        return norm(Field(g, step(g.kmag) * f.momentum().values, MOMENTUM))
    raise ValueError(f"unknown weight {weight!r}")


def boundary_mass(f, frac=0.9):
    """Relative squared norm carried by the outer shell max_i |x_i| > frac L."""
    g = f.grid
    v = f.position().values
    outer = np.zeros(g.shape, dtype=bool)
    for c in g.coords:
        outer = outer | (np.abs(c) > frac * g.L)
    tot = np.vdot(v, v).real
    if tot == 0:
        return 0.0
    return float(np.sum(np.abs(v[outer]) ** 2) / tot)


def support_radius(f, tol=1e-14):
    """Smallest r such that the squared mass outside |x| <= r is below tol."""
    g = f.grid
    v = np.abs(f.position().values) ** 2
    tot = v.sum()
    if tot == 0:
        return 0.0
    r = g.r.ravel() if g.dim > 1 else np.abs(g.x)
    order = np.argsort(r)[::-1]
    cum = np.cumsum(v.ravel()[order]) / tot
    idx = np.searchsorted(cum, tol)
    if idx >= len(order):
        return 0.0
    return float(r[order[idx]])


def bandwidth(f, tol=1e-14):
    """Smallest kappa with squared momentum mass outside |k| <= kappa below tol."""
    g = f.grid
    v = np.abs(f.momentum().values) ** 2
    tot = v.sum()
    if tot == 0:
        return 0.0
    km = g.kmag.ravel()
    order = np.argsort(km)[::-1]
    cum = np.cumsum(v.ravel()[order]) / tot
    idx = np.searchsorted(cum, tol)
    if idx >= len(order):
        return 0.0
    return float(km[order[idx]])
