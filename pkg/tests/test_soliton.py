import math

import numpy as np
import pytest

from burgerslab.dynamics import IntegratorConfig, integrate
from burgerslab.invariants import energy_total
from burgerslab.peaks import peak_position
from burgerslab.soliton import (CompletenessError, DegenerateSeedError, FitParams, NonConvergenceError,
                                SolitonSolution, basis_matrix, double_soliton_seed, empirical_model,
                                energy_scaling, fit_empirical, fixed_point_residual, fwhm, iteration_map,
                                make_traveling, solve_static, static_residual)
from burgerslab.spectral import SpectralField1D, evaluate, translate

TABLE_50 = (-0.016819619, 0.016090415, 4.9485951, 4.3598829)


def test_solver_from_all_ones(sol50):
    assert sol50.iterations <= 100_000
    assert sol50.change < 1e-12
    assert sol50.residual < 1e-9
    assert sol50.field.mean == 1.0
    assert np.abs(sol50.coeffs.imag).max() == 0.0
    # single extremum, centred at the origin
    assert abs(math.remainder(peak_position(sol50.field), 2 * np.pi)) < 1e-10


def test_fixed_point_consistency(sol50):
    assert fixed_point_residual(sol50.field) < 1e-11
    assert static_residual(sol50.field) < 1e-9


def test_converged_seed_stops_at_once(sol50):
    again = solve_static(50, seed=sol50.coeffs[1:])
    assert again.iterations == 1
    assert np.abs(again.coeffs - sol50.coeffs).max() < 1e-10


def test_real_even_seeds_stay_real():
    f = np.zeros(21)
    f[1:] = 1.0 / np.arange(1, 21)
    g = iteration_map(f.astype(complex))
    assert np.abs(g.imag).max() < 1e-12
    sol = solve_static(20, seed=f[1:], center=False)
    assert np.abs(sol.coeffs.imag).max() < 1e-12


def test_complex_seed_converges():
    rng = np.random.default_rng(0)
    seed = np.exp(1j * rng.uniform(0, 2 * np.pi, 16)) * (1 + 0.1 * rng.standard_normal(16))
    sol = solve_static(16, seed=seed, max_iter=200_000)
    assert sol.residual < 1e-9


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_scale_family(sol50, s):
    assert static_residual(sol50.field.scale(s)) < 1e-9 * s * s


def test_solver_errors():
    with pytest.raises(DegenerateSeedError):
        solve_static(8, seed=np.zeros(8))
    with pytest.raises(DegenerateSeedError):
        solve_static(8, seed=np.full(8, np.nan))
    with pytest.raises(ValueError):
        solve_static(8, seed=np.ones(3))
    with pytest.raises(NonConvergenceError) as exc:
        solve_static(50, max_iter=3)
    assert exc.value.iterations == 3


def test_shape_drift_under_integration(sol50):
    tr = integrate(sol50.field, IntegratorConfig(dt=1e-3, t_final=5.0, sample_interval=5000))
    assert np.abs(tr.final.coeffs - sol50.coeffs).max() < 1e-6


def test_make_traveling_examples(sol50):
    assert make_traveling(sol50, 0.0).max_modulus() == 0.0
    t1 = make_traveling(sol50, 1.0)
    t2 = make_traveling(sol50, 2.0)
    assert t1.mean == 0.0
    assert energy_total(t2) / energy_total(t1) == pytest.approx(4.0, rel=1e-12)
    assert sol50.lam == pytest.approx(1.0, rel=1e-6)

    def speed(u, T):
        tr = integrate(u, IntegratorConfig(dt=5e-4, t_final=T, sample_interval=int(T / 5e-4)))
        return math.remainder(peak_position(tr.final) - peak_position(u), 2 * np.pi) / T

    assert speed(t1, 1.0) == pytest.approx(-1.0, rel=1e-2)
    assert speed(t2, 0.5) == pytest.approx(-2.0, rel=1e-2)


def test_fit_lambda_50(sol50):
    p = fit_empirical(sol50)
    for got, want in zip((p.a, p.b, p.c, p.d), TABLE_50):
        assert abs(got - want) <= 0.1 * abs(want)
    row = p.to_csv().splitlines()
    assert row[0] == "lambda,a,b,c,d,residual"
    assert row[1].startswith("50,")


def test_fit_synthetic_round_trip():
    L = 60
    truth = (-0.014, 0.013, 4.9, 4.4)
    c = np.zeros(L + 1)
    c[0] = 1.0
    c[1:] = empirical_model(np.arange(1, L + 1), L, *truth)
    p = fit_empirical(SpectralField1D(c))
    assert np.allclose((p.a, p.b, p.c, p.d), truth, rtol=0, atol=1e-8)
    assert np.allclose(p.model([1, 2]), c[1:3], atol=1e-12)
    assert isinstance(p, FitParams)


def test_fit_rejects_complex_coefficients(sol50):
    with pytest.raises(ValueError):
        fit_empirical(translate(sol50.field, 0.3))


def test_energy_scaling(sol50):
    rows = energy_scaling([50], 1.0, {50: sol50})
    assert rows[0]["E_total_times_lambda"] == pytest.approx(rows[0]["E_total"] * 50)
    assert rows[0]["E_total_times_lambda"] == pytest.approx(10.36, rel=1e-2)
    zero = SolitonSolution(SpectralField1D.zeros(4), 0.0, 0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert energy_scaling([4], 1.0, {4: zero})[0]["E_total"] == 0.0


def test_double_soliton_seeds(sol50):
    s0 = double_soliton_seed(sol50, 0.0)
    assert np.allclose(s0, 2 * sol50.coeffs[1:])
    assert np.abs(double_soliton_seed(sol50, 2 * np.pi) - s0).max() < 1e-12
    single = solve_static(50, seed=s0)
    assert np.abs(single.coeffs - sol50.coeffs).max() < 1e-9
    double = solve_static(50, seed=double_soliton_seed(sol50, np.pi))
    assert double.residual < 1e-9
    assert double.E_total / sol50.E_total == pytest.approx(2.0, rel=0.15)


def test_fwhm(sol50):
    w = fwhm(sol50.field)
    assert 0.05 < w < 0.15
    u = SpectralField1D.from_modes(1, {1: 1.0})
    assert fwhm(u) == pytest.approx(2 * np.pi / 3, rel=1e-4)


def test_basis_completeness(sol50):
    b = basis_matrix(sol50)
    assert b.size == 101
    assert b.min_eigenvalue > 0
    a = b.expand(sol50.field)
    e = np.zeros(101)
    e[0] = 1.0
    assert np.abs(a - e).max() < 1e-8
    rng = np.random.default_rng(1)
    c = np.zeros(51, dtype=complex)
    c[1:] = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    u = SpectralField1D(c)
    a = b.expand(u)
    x = np.linspace(0, 2 * np.pi, 37)
    assert np.abs(b.reconstruct(a, x) - evaluate(u, x)).max() < 1e-8
    dense_eigs = np.sort(np.abs(np.linalg.eigvals(b.dense())))
    assert np.allclose(dense_eigs, np.sort(np.abs(b.eigenvalues)), rtol=1e-9, atol=1e-9)


def test_basis_singular():
    # cos x alone cannot span modes 0 and 2: its circulant has zero eigenvalues
    with pytest.raises(CompletenessError):
        basis_matrix(SpectralField1D.from_modes(2, {1: 1.0}))


def test_solution_serialization(sol50):
    back = SolitonSolution.from_dict(sol50.to_dict())
    assert np.array_equal(back.coeffs, sol50.coeffs)
    assert back.lam == sol50.lam
