import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from maxvel.errors import GridError, RepresentationError
from maxvel.grid import (MOMENTUM, Field, inner_product, make_grid, norm, normalized, to_momentum,
                         to_position, weighted_norm)
from maxvel.profiles import make_smooth_step
from maxvel.states import gaussian_packet


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def test_grid_spacing_and_nyquist():
    g = make_grid(1, 16, 8.0)
    assert g.h == 1.0
    assert np.isclose(np.abs(g.k).max(), np.pi)
    g3 = make_grid(3, 64, 16.0)
    assert g3.shape == (64, 64, 64)
    assert g3.h == 0.5


@pytest.mark.parametrize("args", [(2, 17, 8.0), (4, 16, 8.0), (1, 8, 8.0), (1, 16, -1.0)])
def test_grid_rejects_bad_parameters(args):
    with pytest.raises(GridError):
        make_grid(*args)


def test_grid_nodes_and_momentum_range():
    g = make_grid(2, 32, 4.0)
    assert g.x[0] == -4.0
    assert np.isclose(g.x[-1] + g.h, 4.0)
    assert g.kmag.max() <= np.pi * np.sqrt(2) / g.h + 1e-12
    assert np.all(np.abs(np.diff(g.k[g.k >= 0]) - np.pi / g.L) < 1e-12)


def test_impulse_has_flat_spectrum():
    g = make_grid(1, 64, 8.0)
    v = np.zeros(64)
    v[32] = 1.0
    fh = to_momentum(Field(g, v)).values
    assert np.allclose(np.abs(fh), np.abs(fh[0]), rtol=1e-12)


def test_gaussian_transform_matches_quadrature():
    g = make_grid(1, 256, 32.0)
    fh = to_momentum(Field(g, np.exp(-g.x ** 2 / 2))).values
    for i in (0, 5, 17, 40):
        k = g.k[i]
        re = quad(lambda x: np.exp(-x ** 2 / 2) * np.cos(k * x), -np.inf, np.inf)[0] / np.sqrt(2 * np.pi)
        assert abs(fh[i] - re) < 1e-10


@given(st.integers(0, 2 ** 31), st.sampled_from([1, 2, 3]))
def test_round_trip_and_parseval(seed, dim):
    g = make_grid(dim, 16, 3.0)
    f = random_field(g, seed)
    back = to_position(to_momentum(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values))
    assert abs(norm(f) - norm(to_momentum(f))) < 1e-12 * norm(f)


def test_representation_mismatch():
    g = make_grid(1, 16, 3.0)
    f = random_field(g, 0)
    with pytest.raises(RepresentationError):
        to_position(f)
    with pytest.raises(RepresentationError):
        inner_product(f, to_momentum(f))
    with pytest.raises(GridError):
        inner_product(f, random_field(make_grid(1, 32, 3.0), 0))


@given(st.integers(0, 2 ** 31))
def test_inner_product_symmetry(seed):
    g = make_grid(1, 32, 4.0)
    f, h = random_field(g, seed), random_field(g, seed + 1)
    assert np.isclose(inner_product(f, h), np.conj(inner_product(h, f)), rtol=1e-13)
    assert inner_product(f, f).real >= 0
    assert np.isclose(inner_product(normalized(f), normalized(f)), 1.0)


def test_momentum_modes_orthogonal():
    g = make_grid(1, 32, 4.0)
    a = np.zeros(32, complex)
    b = np.zeros(32, complex)
    a[3], b[7] = 1.0, 1.0
    assert abs(inner_product(Field(g, a, MOMENTUM), Field(g, b, MOMENTUM))) < 1e-12


def test_weighted_norms():
    g = make_grid(1, 512, 64.0)
    f = gaussian_packet(g, 0.0, 0.0, 1.0)
    assert np.isclose(weighted_norm(f, "bracket_x", s=0), 1.0, atol=1e-13)
    ref = quad(lambda x: (1 + x ** 2) * np.exp(-x ** 2), -np.inf, np.inf)[0] / np.sqrt(np.pi)
    assert abs(weighted_norm(f, "bracket_x", s=1) - np.sqrt(ref)) < 1e-8
    # support |x| < R t / 2 against a cone step starting at R - w
    step = make_smooth_step(2.0, 0.5)
    g1 = gaussian_packet(g, 0.0, 0.0, 0.5)
    assert weighted_norm(g1, "radial_step", t=20.0, step=step) < 1e-10
    with pytest.raises(ValueError):
        weighted_norm(f, "bracket_x", s=5)
    with pytest.raises(ValueError):
        weighted_norm(f, "radial_step", t=0.0, step=step)


@given(st.floats(1.1, 3.0), st.floats(0.01, 0.5))
def test_weighted_norm_monotone_in_threshold(R, dR):
    g = make_grid(1, 256, 32.0)
    f = gaussian_packet(g, 3.0, 1.0, 2.0)
    lo = weighted_norm(f, "radial_step", t=2.0, step=make_smooth_step(R, 0.3))
    hi = weighted_norm(f, "radial_step", t=2.0, step=make_smooth_step(R + dR, 0.3))
    assert hi <= lo + 1e-15
