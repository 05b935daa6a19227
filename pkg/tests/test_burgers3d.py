import numpy as np
import pytest

from burgerslab.acceptance import soliton
from burgerslab.burgers3d import (MAX_CUTOFF_3D, SpectralField3D, factorized_soliton, from_1d, integrate3d,
                                  passive_invariants_3d, random_profile, rhs3d)
from burgerslab.dynamics import IntegratorConfig, integrate, rhs
from burgerslab.lab import make_rng, noise_field


@pytest.fixture(scope="module")
def sol8():
    return soliton(8)


def test_zero_field():
    assert rhs3d(SpectralField3D.zeros(3)).max_modulus() == 0.0


def test_shape_validation():
    with pytest.raises(ValueError):
        SpectralField3D(np.zeros((3, 4, 4, 4)))
    with pytest.raises(ValueError):
        SpectralField3D.zeros(MAX_CUTOFF_3D + 1)
    with pytest.raises(ValueError):
        rhs3d(SpectralField3D.zeros(2, ncomp=1))


def test_dimensional_reduction():
    L = 6
    u = noise_field(L, 0.3, make_rng(4)).with_mean(0.2)
    d3 = rhs3d(from_1d(u)).coeffs
    d1 = rhs(u).full_spectrum()
    assert np.abs(d3[0, :, L, L] - d1).max() < 1e-12
    mask = np.ones(d3.shape, dtype=bool)
    mask[0, :, L, L] = False
    assert np.abs(d3[mask]).max() < 1e-12
    cfg = IntegratorConfig(dt=1e-3, t_final=0.05, sample_interval=50)
    a = integrate3d(from_1d(u), cfg)[-1][1].coeffs[0, :, L, L]
    b = integrate(u, cfg).final.full_spectrum()
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("profile", ["uniform", "dirichlet", "random"])
def test_factorized_soliton_is_stationary(sol8, profile):
    g = random_profile(8, make_rng(0)) if profile == "random" else profile
    u = factorized_soliton(sol8, g)
    assert rhs3d(u).max_modulus() < 1e-10


def test_uniform_profile_reduces_to_1d(sol8):
    u = factorized_soliton(sol8, "uniform")
    assert np.abs(u.coeffs[0, :, 8, 8] - sol8.field.full_spectrum()).max() == 0.0
    assert np.abs(u.coeffs[1:]).max() == 0.0


def test_profile_cutoff_mismatch(sol8):
    with pytest.raises(ValueError):
        factorized_soliton(sol8, np.ones((5, 5)))


def test_grid_values_real(sol8):
    u = factorized_soliton(sol8, random_profile(8, make_rng(1)))
    g = u.grid_values()
    assert np.isrealobj(g)
    back = SpectralField3D.from_dict(u.to_dict())
    assert np.array_equal(back.coeffs, u.coeffs)


def test_passive_examples():
    L = 3
    rng = make_rng(2)
    m = 2 * L + 1
    c = 0.002 * (rng.standard_normal((3, m, m, m)) + 1j * rng.standard_normal((3, m, m, m)))
    u = SpectralField3D(c)
    cfg = IntegratorConfig(dt=1e-2, t_final=0.1, sample_interval=5)
    fc = np.zeros((1, m, m, m), dtype=complex)
    fc[0, L, L, L] = 0.5
    s = passive_invariants_3d(u, SpectralField3D(fc), cfg)
    assert np.all(s.mass == s.mass[0])
    z = passive_invariants_3d(u, SpectralField3D.zeros(L, ncomp=1), cfg)
    assert np.all(z.mass == 0) and np.all(z.momentum == 0)
    f = SpectralField3D(fc + 0.1 * (rng.standard_normal((1, m, m, m)) + 0j))
    dm, dp = passive_invariants_3d(u, f, cfg).drift()
    assert dm < 1e-12 and dp < 1e-7
