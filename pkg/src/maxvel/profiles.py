"""Smoothed steps and related one-dimensional profiles.

A step F rises from 0 to 1 across [c - w, c + w] with derivative

    F'(a) = (1/w) phi((a - c)/w),   phi(u) = C_k (1 - u^2)^k on [-1, 1],

so F' is compactly supported and F is a regularized incomplete beta function.
Every profile here is constant outside a bounded interval, which is what the
group quadrature for functions of the dilation generator needs: the limits,
the Fourier transform of the derivative, and its first two moments.
"""
from dataclasses import dataclass
from functools import cached_property
from math import gamma

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import special


def _bump_poly(k):
    # coefficients of C_k (1 - u^2)^k, lowest order first
    c = P.polypow([1.0, 0.0, -1.0], k)
    return c * gamma(k + 1.5) / (np.sqrt(np.pi) * gamma(k + 1.0))


def bump_hat(nu, k):
    """Fourier transform of C_k (1 - u^2)^k on [-1, 1] (real and even).

    Equals 0F1(; k + 3/2; -nu^2/4) = Gamma(k+3/2) (2/nu)^(k+1/2) J_{k+1/2}(nu).
    """
    nu = np.abs(np.asarray(nu, dtype=float))
    out = np.empty_like(nu)
    small = nu < k + 8.0
    out[small] = special.hyp0f1(k + 1.5, -0.25 * nu[small] ** 2)
    big = ~small
    if big.any():
        z = nu[big]
        out[big] = (gamma(k + 1.5) * 2.0 ** (k + 1) / np.sqrt(np.pi)
                    * special.spherical_jn(k, z) / z ** k)
    return out


@dataclass(frozen=True)
class SmoothStep:
    center: float
    width: float
    direction: str = "up"
    order: int = 4

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"step width must be positive, got {self.width}")
        if self.direction not in ("up", "down"):
            raise ValueError(f"direction must be 'up' or 'down', got {self.direction!r}")
        if int(self.order) < 1:
            raise ValueError("bump order must be >= 1")

    @property
    def sign(self):
        return 1.0 if self.direction == "up" else -1.0

    @property
    def lo(self):
        return self.center - self.width

    @property
    def hi(self):
        return self.center + self.width

    @property
    def left(self):
        return 0.0 if self.direction == "up" else 1.0

    @property
    def right(self):
        return 1.0 if self.direction == "up" else 0.0

    @cached_property
    def _poly(self):
        return _bump_poly(int(self.order))

    def _u(self, a):
        return (np.asarray(a, dtype=float) - self.center) / self.width

    def __call__(self, a):
        u = np.clip(self._u(a), -1.0, 1.0)
        up = special.betainc(self.order + 1, self.order + 1, 0.5 * (u + 1.0))
        return up if self.direction == "up" else 1.0 - up

    def deriv(self, a, j=1):
        """j-th derivative, j >= 1."""
        u = self._u(a)
        c = P.polyder(self._poly, j - 1) if j > 1 else self._poly
        val = np.where(np.abs(u) < 1.0, P.polyval(np.clip(u, -1, 1), c), 0.0)
        return self.sign * val / self.width ** j

    def deriv_hat(self, lam):
        """Fourier transform of F', int F'(a) exp(-i lam a) da."""
        lam = np.asarray(lam, dtype=float)
        return self.sign * np.exp(-1j * lam * self.center) * bump_hat(self.width * lam, int(self.order))

    @property
    def jump(self):
        return self.right - self.left

    @property
    def first_moment(self):
        return self.sign * self.center

    def complement(self):
        """The step 1 - F, so that F + complement = 1 pointwise."""
        other = "down" if self.direction == "up" else "up"
        return SmoothStep(self.center, self.width, other, self.order)

    def sup_deriv(self):
        return abs(self._poly[0]) / self.width

    def rescaled(self, factor):
        """Profile a -> F(a / factor)."""
        return SmoothStep(self.center * factor, self.width * factor, self.direction, self.order)


def make_smooth_step(center, width, direction="up", order=4):
    return SmoothStep(float(center), float(width), direction, int(order))


@dataclass(frozen=True, eq=False)
class Profile:
    """Generic profile with G' supported in [lo, hi] and constant limits.

    ``value`` and ``deriv`` are vectorized callables.  The Fourier transform
    of G' and its moments are computed by Gauss-Legendre quadrature on the
    support.
    """
    value: object
    deriv: object
    lo: float
    hi: float
    left: float
    right: float
    name: str = "profile"

    def __call__(self, a):
        return self.value(np.asarray(a, dtype=float))

    @cached_property
    def _nodes(self):
        x, w = np.polynomial.legendre.leggauss(400)
        mid = 0.5 * (self.lo + self.hi)
        half = 0.5 * (self.hi - self.lo)
        return mid + half * x, half * w

    def deriv_hat(self, lam):
        lam = np.asarray(lam, dtype=float)
        b, wts = self._nodes
        span = self.hi - self.lo
        if np.max(np.abs(lam), initial=0.0) * span > 600.0:
            return self._deriv_hat_fine(lam)
        gp = self.deriv(b) * wts
        return np.exp(-1j * np.multiply.outer(lam, b)) @ gp

    def _deriv_hat_fine(self, lam):
        # composite Gauss-Legendre for strongly oscillating integrands
        lam_max = np.max(np.abs(lam))
        pieces = int(np.ceil(lam_max * (self.hi - self.lo) / 300.0))
        edges = np.linspace(self.lo, self.hi, pieces + 1)
        x, w = np.polynomial.legendre.leggauss(400)
        out = np.zeros(lam.shape, dtype=complex)
        for a, b in zip(edges[:-1], edges[1:]):
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
            out += np.exp(-1j * np.multiply.outer(lam, nodes)) @ (self.deriv(nodes) * 0.5 * (b - a) * w)
        return out

    @property
    def jump(self):
        return self.right - self.left

    @cached_property
    def first_moment(self):
        b, wts = self._nodes
        return float(np.sum(b * self.deriv(b) * wts))


def as_profile(step):
    if isinstance(step, Profile):
        return step
    return Profile(step.__call__, step.deriv, step.lo, step.hi, step.left, step.right,
                   name=f"step({step.center:g},{step.width:g},{step.direction})")


def squared(step):
    """G = F^2."""
    return Profile(lambda a: step(a) ** 2, lambda a: 2.0 * step(a) * step.deriv(a),
                   step.lo, step.hi, step.left ** 2, step.right ** 2, name="F^2")


def profile_squared(p):
    """G^2 for a generic profile."""
    p = as_profile(p)
    return Profile(lambda a: p(a) ** 2, lambda a: 2.0 * p(a) * p.deriv(a), p.lo, p.hi,
                   p.left ** 2, p.right ** 2, name=f"({p.name})^2")


def derivative_profile(step, normalize=False):
    """G = F' (a bump vanishing at both ends); optionally scaled to max 1."""
    c = 1.0 / step.sup_deriv() if normalize else 1.0
    c *= step.sign
    return Profile(lambda a: c * step.deriv(a, 1), lambda a: c * step.deriv(a, 2),
                   step.lo, step.hi, 0.0, 0.0, name="F'")


def derivative_squared(step):
    """G = (F')^2."""
    return Profile(lambda a: step.deriv(a, 1) ** 2,
                   lambda a: 2.0 * step.deriv(a, 1) * step.deriv(a, 2),
                   step.lo, step.hi, 0.0, 0.0, name="(F')^2")


def bump_squared(step):
    """G = (F'/max F')^2."""
    c = 1.0 / step.sup_deriv()
    return Profile(lambda a: (c * step.deriv(a, 1)) ** 2,
                   lambda a: 2.0 * c * c * step.deriv(a, 1) * step.deriv(a, 2),
                   step.lo, step.hi, 0.0, 0.0, name="G^2")


def constant_profile(value):
    return Profile(lambda a: np.full(np.shape(a), float(value)), lambda a: np.zeros(np.shape(a)),
                   -1.0, 1.0, float(value), float(value), name="const")
