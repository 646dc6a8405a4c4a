import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import linalg

from oracles import dense_H, odd_basis, positions
from maxvel.errors import RepresentationError, SymbolError
from maxvel.grid import (MOMENTUM, Field, field_from_function, inner_product, make_grid, norm, normalized,
                         to_momentum)
from maxvel.operators import (PotentialSpec, apply_A, apply_H, apply_momentum_function, apply_potential,
                              make_hamiltonian, project_continuous, spectral_bounds)
from maxvel.states import gaussian_packet, random_packets


@pytest.fixture(scope="module")
def line():
    return make_grid(1, 512, 64.0)


def plane_wave(g, m):
    return Field(g, np.exp(1j * g.k[m] * g.x))


def test_identity_symbol(line):
    f = random_packets(line, 1, 3)[0]
    out = apply_momentum_function(f, lambda k: np.ones_like(k))
    assert np.allclose(out.values, f.values, atol=1e-14)


def test_plane_wave_eigenvector(line):
    f = plane_wave(line, 9)
    out = apply_momentum_function(f, 1.0)
    assert np.allclose(out.values, abs(line.k[9]) * f.values, atol=1e-12)


@given(st.integers(0, 2 ** 31))
def test_half_power_semigroup(seed):
    g = make_grid(1, 128, 16.0)
    rng = np.random.default_rng(seed)
    f = Field(g, rng.standard_normal(128) + 1j * rng.standard_normal(128))
    twice = apply_momentum_function(apply_momentum_function(f, 0.5), 0.5)
    once = apply_momentum_function(f, 1.0)
    assert np.max(np.abs(twice.values - once.values)) < 1e-10 * np.max(np.abs(once.values))


def test_singular_symbol_zero_mode(line):
    with pytest.raises(SymbolError):
        apply_momentum_function(gaussian_packet(line, 0.0, 0.0, 2.0), -1.0)
    f = gaussian_packet(line, 0.0, 2.0, 3.0)
    out = apply_momentum_function(f, -1.0)
    assert np.all(np.isfinite(out.values))


def test_momentum_function_keeps_representation(line):
    f = to_momentum(gaussian_packet(line, 0.0, 1.0, 2.0))
    assert apply_momentum_function(f, 1.0).rep == MOMENTUM


def test_potential_values(line):
    f = gaussian_packet(line, 0.0, 0.0, 2.0)
    assert np.all(apply_potential(f, PotentialSpec(g=0.0)).values == 0)
    V = PotentialSpec("gaussian_well", 0.7, 2.0)
    i0 = np.argmin(np.abs(line.x))
    assert np.isclose(apply_potential(f, V).values[i0], -0.7 * f.values[i0])
    with pytest.raises(RepresentationError):
        apply_potential(to_momentum(f), V)


@pytest.mark.parametrize("pot", [PotentialSpec("gaussian_well", 0.7, 2.0),
                                 PotentialSpec("polynomial_decay", 0.4, q=3.5)])
def test_x_grad_matches_finite_difference(pot):
    r = np.linspace(0.1, 10, 50)
    h = 1e-5
    fd = r * (pot.V(r + h) - pot.V(r - h)) / (2 * h)
    assert np.max(np.abs(fd - pot.x_grad(r))) < 1e-6
    assert np.allclose(pot.tilde(r), pot.V(r) + pot.x_grad(r))


def test_potential_validation():
    with pytest.raises(ValueError):
        PotentialSpec("polynomial_decay", 1.0, q=2.0)
    with pytest.raises(ValueError):
        PotentialSpec("gaussian_well", -1.0)
    with pytest.raises(ValueError):
        PotentialSpec("square_well", 1.0)


def test_hamiltonian_free_plane_wave(line):
    H = make_hamiltonian(line, None)
    f = plane_wave(line, 5)
    assert np.allclose(apply_H(f, H).values, abs(line.k[5]) * f.values, atol=1e-12)


def test_hamiltonian_symmetry_and_composition(line):
    H = make_hamiltonian(line, PotentialSpec("gaussian_well", 0.3, 2.0))
    f, g = random_packets(line, 2, 8)
    lhs = inner_product(g, apply_H(f, H))
    rhs = inner_product(apply_H(g, H), f)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)
    comp = apply_momentum_function(f, 1.0) + apply_potential(f, H.potential)
    assert norm(comp - apply_H(f, H)) == 0.0


def test_quadratic_form_matches_dense_oracle():
    n, L = 256, 32.0
    g = make_grid(1, n, L)
    pot = PotentialSpec("gaussian_well", 0.1, 2.0)
    H = make_hamiltonian(g, pot, margin=False)
    f = gaussian_packet(g, 1.0, 0.5, 2.0)
    val = inner_product(f, apply_H(f, H)).real
    M = dense_H(n, L, pot.V)
    ref = (np.vdot(f.values, M @ f.values) * g.h).real
    assert abs(val - ref) < 1e-8


def test_A_on_3d_gaussian():
    g = make_grid(3, 64, 8.0)
    f = Field(g, np.exp(-g.r ** 2 / 2))
    Af = apply_A(f)
    ref = -1j * (-g.r ** 2 + 1.5) * f.values
    assert np.max(np.abs(Af.values - ref)) < 1e-8


def test_A_expectation_real(line):
    f = random_packets(line, 1, 4)[0]
    assert abs(inner_product(f, apply_A(f)).imag) < 1e-8


def test_A_warns_on_boundary_mass():
    g = make_grid(1, 64, 8.0)
    with pytest.warns(RuntimeWarning):
        apply_A(Field(g, np.ones(64)))


def commutator(f, sym):
    Bf = apply_momentum_function(f, sym)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return 1j * (apply_A(Bf) - apply_momentum_function(apply_A(f), sym)), Bf


def test_commutator_with_sqrt_p():
    # the dilation covariance of |p|^a forces i[A, |p|^a] = -a |p|^a; the
    # slowly decaying tail of |p|^{1/2} f needs a wide box
    g = make_grid(1, 2048, 128.0)
    for f in random_packets(g, 4, 11):
        c, B = commutator(f, 0.5)
        assert norm(c + 0.5 * B) < 1e-6 * norm(B)


def test_generator_level_dilation_relation(line):
    for f in random_packets(line, 4, 12):
        c, B = commutator(f, 1.0)
        assert abs(inner_product(f, c) + inner_product(f, B)) < 1e-6 * abs(inner_product(f, B))


def test_virial_identity():
    g = make_grid(1, 1024, 64.0, radial=True)
    pot = PotentialSpec("gaussian_well", 0.3, 2.0)
    H = make_hamiltonian(g, pot, margin=False, find_bound_states=False)
    f = normalized(field_from_function(g, lambda r: np.exp(-(r - 3) ** 2 / 4) * np.cos(1.1 * r)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lhs = 1j * (inner_product(f, apply_H(apply_A(f), H)) - inner_product(f, apply_A(apply_H(f, H))))
    rhs = inner_product(f, apply_momentum_function(f, 1.0)) - inner_product(f, apply_potential(f, pot, "xdV"))
    assert abs(lhs - rhs) < 1e-6 * abs(rhs)


def dense_odd_spectrum(n, L, V):
    Q = odd_basis(n)
    M = Q.T @ dense_H(n, L, V) @ Q
    return linalg.eigvalsh(0.5 * (M + M.conj().T))


def test_spectral_bounds_free():
    g = make_grid(1, 256, 32.0, radial=True)
    H = make_hamiltonian(g, None)
    lo, hi = spectral_bounds(H)
    assert lo <= 0 and lo > -0.05 * g.k_nyquist
    assert abs(hi - g.k_nyquist) <= 0.05 * g.k_nyquist


@pytest.mark.parametrize("coupling", [0.2, 5.0])
def test_bottom_of_spectrum_against_dense_oracle(coupling):
    n, L = 256, 32.0
    g = make_grid(1, n, L, radial=True)
    pot = PotentialSpec("gaussian_well", coupling, 2.0)
    H = make_hamiltonian(g, pot)
    ev = dense_odd_spectrum(n, L, pot.V)
    assert H.spectral_bounds[0] <= ev[0]
    nb = int(np.sum(ev < 0))
    assert H.n_bound == nb
    if nb:
        assert H.spectral_bounds[0] < 0
        assert np.allclose([E for E, _ in H.bound_states], ev[:nb], atol=1e-9)
        for E, phi in H.bound_states:
            assert norm(apply_H(phi, H) - E * phi) < 1e-8
    else:
        assert H.resonance_margin >= 0


def test_continuous_projection():
    g = make_grid(1, 256, 32.0, radial=True)
    f = normalized(field_from_function(g, lambda r: np.exp(-r ** 2 / 8)))
    H0 = make_hamiltonian(g, None)
    assert norm(project_continuous(f, H0) - f) == 0.0
    H = make_hamiltonian(g, PotentialSpec("gaussian_well", 5.0, 2.0))
    phi = H.bound_states[0][1]
    assert norm(project_continuous(phi, H)) < 1e-10
    p1 = project_continuous(f, H)
    assert norm(project_continuous(p1, H) - p1) < 1e-10
    gram = np.array([[inner_product(a, b) for _, b in H.bound_states] for _, a in H.bound_states])
    assert np.allclose(gram, np.eye(len(gram)), atol=1e-10)


def test_dense_oracle_grid_matches():
    assert np.allclose(positions(64, 8.0), make_grid(1, 64, 8.0).x)
