import numpy as np
import pytest

from oracles import hardy_gaussian_ratio, pencil_max_inverse, pencil_min, radial_dense_hardy
from maxvel.grid import Field, field_from_function, make_grid
from maxvel.inequalities import (DEFAULT_SEED, HOLDS, INAPPLICABLE, MARGINAL, VIOLATED, check_commutator_identity,
                                 check_cross_localization, check_dilation_covariance, check_energy_shell_momentum,
                                 check_hardy_bound, check_inverse_momentum_bound, check_r2_laplacian_identity,
                                 check_support_separation, domination_constants, estimate_domination, hardy_ratio,
                                 hardy_worst_case, radial_identity_residual, refinement_downgrade, verdict_lower,
                                 verdict_upper)
from maxvel.operators import PotentialSpec, make_hamiltonian
from maxvel.states import random_packets, random_radial_profiles, sample_profile


def test_verdict_helpers():
    assert verdict_upper([1.0, 1.5], 2.0) == HOLDS
    assert verdict_upper([1.0, 1.95], 2.0) == MARGINAL
    assert verdict_upper([2.1], 2.0) == VIOLATED
    assert verdict_lower([0.5], 0.0) == HOLDS
    assert verdict_lower([0.01], 0.0) == MARGINAL
    assert verdict_lower([-0.3, 0.5], 0.0) == VIOLATED
    assert refinement_downgrade(HOLDS, 1.0, 1.5) == MARGINAL
    assert refinement_downgrade(HOLDS, 1.0, 1.05) == HOLDS
    assert refinement_downgrade(VIOLATED, 1.0, 1.5) == VIOLATED


@pytest.fixture(scope="module")
def packets():
    return random_packets(make_grid(1, 4096, 256.0), 4, DEFAULT_SEED, sigma_range=(4.0, 5.0))


def test_dilation_covariance_holds(packets):
    rep = check_dilation_covariance(packets)
    assert rep.verdict == HOLDS


def test_commutator_sign(packets):
    assert check_commutator_identity(packets, coefficient=-0.5).verdict == HOLDS
    assert check_commutator_identity(packets, coefficient=0.5).verdict == VIOLATED


# ------------------------------------------------------------ radial identity


@pytest.fixture(scope="module")
def smooth_radial():
    g = make_grid(1, 2048, 64.0, radial=True)
    return [sample_profile(g, p) for p in random_radial_profiles(3, 5, scale=1.5)]


def test_radial_identity_coefficients(smooth_radial):
    for f in smooth_radial:
        assert radial_identity_residual(f, 2.0) < 1e-6
        assert radial_identity_residual(f, -1.0) > 0.1
        assert check_r2_laplacian_identity(f, ia_coef=2.0).verdict == HOLDS
        assert check_r2_laplacian_identity(f, ia_coef=-1.0).verdict == VIOLATED


def test_radial_identity_inapplicable():
    line = make_grid(1, 256, 16.0)
    f = Field(line, np.exp(-line.x ** 2))
    assert check_r2_laplacian_identity(f).verdict == INAPPLICABLE
    cube = make_grid(3, 32, 8.0)
    x, y, z = cube.coords
    rep = check_r2_laplacian_identity(Field(cube, np.exp(-(x - 1) ** 2 - y ** 2 - z ** 2)))
    assert rep.verdict == INAPPLICABLE
    assert rep.constants["angular_defect"] > 1e-3


def test_radial_identity_on_cartesian_grid():
    cube = make_grid(3, 64, 12.0)
    f = Field(cube, np.exp(-cube.r ** 2 / 2))
    rep = check_r2_laplacian_identity(f, ia_coef=2.0, tol=1e-3)
    assert rep.constants["angular_defect"] < 1e-12
    assert rep.verdict == HOLDS


# ------------------------------------------------------------ Hardy


def test_hardy_ratio_matches_dense_oracle():
    g = make_grid(1, 1024, 64.0, radial=True)
    prof = lambda r: np.exp(-r ** 2 / 2)
    assert hardy_ratio(sample_profile(g, prof)) == pytest.approx(radial_dense_hardy(1024, 64.0, prof), rel=1e-10)


def test_hardy_ratio_near_quadrature():
    g = make_grid(1, 2048, 256.0, radial=True)
    r = hardy_ratio(field_from_function(g, lambda r: np.exp(-r ** 2 / 2)))
    assert abs(r - hardy_gaussian_ratio()) < 0.02 * hardy_gaussian_ratio()


def test_hardy_bound_and_worst_case():
    g = make_grid(1, 1024, 128.0, radial=True)
    states = [sample_profile(g, p) for p in random_radial_profiles(6, 2)]
    rep = check_hardy_bound(states)
    assert rep.verdict == HOLDS
    assert max(rep.constants["ratios"]) < 2.0
    betas, ratios = hardy_worst_case(g, betas=np.array([1.0, 0.0, -0.5]))
    assert np.all(np.diff(ratios) > 0) and ratios.max() < 2.0
    with pytest.raises(ValueError):
        hardy_ratio(Field(make_grid(1, 64, 8.0), np.ones(64)))


# ------------------------------------------------------------ energy shells and domination


@pytest.fixture(scope="module")
def free_radial():
    return make_hamiltonian(make_grid(1, 512, 128.0, radial=True), None)


def test_free_energy_shell_constant(free_radial):
    rep = check_energy_shell_momentum(free_radial, range(3), trials=4, refine=False)
    assert rep.verdict == HOLDS
    assert rep.constants["c"] <= 1.25 + 1e-9


def test_hardy_hypothesis_gate():
    H = make_hamiltonian(make_grid(1, 256, 32.0, radial=True), PotentialSpec("polynomial_decay", 2.0))
    assert check_energy_shell_momentum(H, range(2), trials=2, refine=False).verdict == INAPPLICABLE


@pytest.mark.parametrize("gval", [0.2, 2.0, 5.0])
def test_domination_constants_match_pencil_oracle(gval):
    n, L = 256, 32.0
    pot = PotentialSpec("gaussian_well", gval, 2.0)
    H = make_hamiltonian(make_grid(1, n, L, radial=True), pot)
    c = domination_constants(H)
    assert c["m"] == pytest.approx(pencil_min(n, L, pot.V), abs=1e-6)
    if H.n_bound:
        assert c["delta"] == pytest.approx(pencil_min(n, L, pot.V, drop_bound=True), abs=1e-6)
    assert c["delta_rev"] == pytest.approx(pencil_max_inverse(n, L, pot.V, drop_bound=bool(H.n_bound)), abs=1e-6)


def test_domination_verdicts(free_radial):
    assert estimate_domination(free_radial, refine=False).verdict == HOLDS
    g = make_grid(1, 256, 32.0, radial=True)
    deep = make_hamiltonian(g, PotentialSpec("gaussian_well", 5.0, 2.0))
    assert estimate_domination(deep, "H_over_p", refine=False).verdict == VIOLATED
    assert estimate_domination(deep, "p_over_H", refine=False).verdict in (HOLDS, MARGINAL)
    with pytest.raises(ValueError):
        estimate_domination(deep, "sideways")


def test_free_cross_localization_vanishes(free_radial):
    rep = check_cross_localization(free_radial, range(1, 3), trials=2)
    assert rep.verdict == HOLDS
    assert rep.constants["values"].max() < 1e-12


def test_free_inverse_bound(free_radial):
    rep = check_inverse_momentum_bound(free_radial, trials=2, refine=False)
    assert rep.constants["C"] == pytest.approx(1.0, abs=1e-8)


def test_support_separation_small():
    g = make_grid(1, 4096, 2048.0, radial=True)
    rep = check_support_separation(g, [0.0, np.log(2) + 0.1], count=4)
    assert rep.verdict == HOLDS
    assert rep.constants["leakage"][0.0] > 0.5
