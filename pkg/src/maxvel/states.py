"""Seeded trial states defined analytically, so the same functions can be
sampled on grids of different resolution."""
import numpy as np

from .grid import Field, field_from_function, normalized


def _vec(v, dim):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros(dim)
    out[:v.size] = v
    return out


def gaussian_packet(grid, x0=0.0, k0=0.0, sigma=1.0):
    """exp(-|x - x0|^2 / (2 sigma^2)) exp(i k0 . x), normalised.

    x0 and k0 are scalars (first axis) or sequences of length dim.  On a
    radial grid the packet is the radial profile exp(-(r - x0)^2/(2 sigma^2))
    cos(k0 r) and x0 should be 0 or large against sigma.
    """
    if grid.radial:
        return normalized(field_from_function(
            grid, lambda r: np.exp(-(r - x0) ** 2 / (2 * sigma ** 2)) * np.cos(k0 * r)))
    x0, k0 = _vec(x0, grid.dim), _vec(k0, grid.dim)
    vals = np.ones(grid.shape, dtype=np.complex128)
    for c, a, k in zip(grid.coords, x0, k0):
        vals = vals * np.exp(-(c - a) ** 2 / (2 * sigma ** 2) + 1j * k * c)
    return normalized(Field(grid, vals))


def random_packets(grid, count, seed, k_range=(1.5, 2.5), sigma_range=(2.5, 3.5),
                   x_range=(-5.0, 5.0), terms=2):
    """Superpositions of Gaussian packets with momenta away from k = 0."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        acc = None
        for _ in range(terms):
            k0 = rng.uniform(*k_range) * rng.choice([-1.0, 1.0])
            f = gaussian_packet(grid, rng.uniform(*x_range), k0, rng.uniform(*sigma_range))
            c = rng.standard_normal() + 1j * rng.standard_normal()
            acc = c * f if acc is None else acc + c * f
        out.append(normalized(acc))
    return out


def radial_profile(params):
    """f(r) = sum_j a_j (1 + b_j r^2) cos(k_j r) exp(-r^2 / (2 w_j^2)), smooth at r = 0."""
    a, b, k, w = (np.asarray(p, dtype=float) for p in params)

    def f(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(a * (1 + b * r ** 2) * np.cos(k * r) * np.exp(-r ** 2 / (2 * w ** 2)), axis=-1)
    return f


def random_radial_profiles(count, seed, scale=1.0, k_max=1.0, terms=3):
    """Seeded smooth radial profiles with widths ~ scale and wavenumbers <= k_max / scale."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a = rng.standard_normal(terms)
        b = rng.uniform(0.0, 0.5, terms) / scale ** 2
        k = rng.uniform(0.0, k_max, terms) / scale
        w = rng.uniform(0.6, 1.6, terms) * scale
        out.append(radial_profile((a, b, k, w)))
    return out


def sample_profile(grid, profile):
    """Normalised samples of a radial profile on a radial, 1D or 3D grid."""
    if grid.radial or grid.dim == 1:
        return normalized(field_from_function(grid, profile))
    return normalized(Field(grid, profile(grid.r)))
