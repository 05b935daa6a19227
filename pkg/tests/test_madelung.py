import math

import numpy as np
import pytest

from burgerslab.lab import make_rng
from burgerslab.madelung import (MadelungState, MultivaluedWavefunctionError, circulation, evolve_madelung,
                                 quantum_potential, radiation_integrals, random_density, schrodinger_residual,
                                 seam_mismatch, shock_suppression_demo, wavefunction)
from burgerslab.spectral import SpectralField1D

TWO_PI = 2 * math.pi


def test_circulation_examples(sol50):
    z = circulation(SpectralField1D.zeros(4), TWO_PI)
    assert z.value == 0 and z.quantum == 0
    st = MadelungState(np.ones(32), np.zeros(32), 1.0, TWO_PI)  # S = x
    c = circulation(st, TWO_PI)
    assert c.value == pytest.approx(TWO_PI) and c.quantum == 1 and c.deviation == pytest.approx(0, abs=1e-15)
    assert circulation(sol50.field, TWO_PI).value == pytest.approx(TWO_PI)
    assert np.allclose(st.velocity(), 1.0)


def test_wavefunction_examples():
    n = 64
    one = wavefunction(MadelungState(np.ones(n), np.zeros(n), 0, TWO_PI))
    assert np.allclose(one, 1.0)
    st = MadelungState(np.ones(n), np.zeros(n), 1, TWO_PI)
    assert np.allclose(wavefunction(st), np.exp(1j * st.x), atol=1e-14)
    with pytest.raises(MultivaluedWavefunctionError) as exc:
        wavefunction(MadelungState(np.ones(n), np.zeros(n), 0.5, 2 * TWO_PI))
    assert exc.value.mismatch == pytest.approx(math.pi)


def test_wavefunction_modulus(rng):
    rho = random_density(64, rng)
    st = MadelungState(rho, 0.1 * np.sin(np.arange(64)), 2, TWO_PI)
    assert np.abs(np.abs(wavefunction(st)) ** 2 - rho).max() < 1e-12


def test_single_valued_iff_quantized():
    for w in np.concatenate([np.arange(-12, 13) / 4.0, np.arange(-3, 4) + 1e-6, np.arange(-3, 4) + 1e-12]):
        st = MadelungState(np.ones(8), np.zeros(8), w, TWO_PI)
        single = seam_mismatch(st) < 1e-10
        assert single == circulation(st, TWO_PI).quantized


def test_quantum_potential_examples(rng):
    n = 128
    x = TWO_PI * np.arange(n) / n
    assert np.abs(quantum_potential(np.full(n, 3.0), TWO_PI)).max() < 1e-14
    eps, kappa = 0.2, 3.0
    rho = np.exp(2 * eps * np.cos(x))
    want = 0.5 * (kappa / TWO_PI) ** 2 * (-eps * np.cos(x) + eps**2 * np.sin(x) ** 2)
    assert np.abs(quantum_potential(rho, kappa) - want).max() < 1e-12
    with pytest.raises(ValueError):
        quantum_potential(np.array([1.0, 0.0, 1.0, 1.0]), TWO_PI)


def test_quantum_potential_matches_finite_differences(rng):
    n = 4096
    h = TWO_PI / n
    rho = random_density(n, rng)
    a = np.sqrt(rho)
    lap = (-np.roll(a, 2) + 16 * np.roll(a, 1) - 30 * a + 16 * np.roll(a, -1) - np.roll(a, -2)) / (12 * h * h)
    fd = 0.5 * lap / a
    assert np.abs(quantum_potential(rho, TWO_PI) - fd).max() < 1e-8


def test_plane_wave_residual():
    n, dt = 64, 1e-3
    states = [MadelungState.plane_wave(n, 3.0, TWO_PI, t) for t in (0, dt, 2 * dt)]
    rep = schrodinger_residual(states, dt)
    assert rep.residual < 1e-10
    assert rep.split_error < 1e-10


def test_consistent_evolution_residual(rng):
    n = 64
    x = TWO_PI * np.arange(n) / n
    st = MadelungState(random_density(n, rng, amp=0.2), 0.1 * np.sin(x), 1, TWO_PI)
    dt = 2.5e-3
    _, states = evolve_madelung(st, 4 * dt, 40, sample_every=10)
    rep = schrodinger_residual(states, dt)
    assert rep.continuity < 1e-6 and rep.hamilton_jacobi < 1e-6
    assert rep.residual < 1e-6
    assert rep.split_error < 1e-10


def test_mismatched_states_detected(rng):
    n = 64
    x = TWO_PI * np.arange(n) / n
    st = MadelungState(random_density(n, rng), 0.1 * np.sin(x), 0, TWO_PI)
    dt = 1e-3
    states = [st, MadelungState(st.rho * 1.05, st.s, 0, TWO_PI), st]
    rep = schrodinger_residual(states, dt)
    assert rep.residual > 1e-2
    with pytest.raises(ValueError):
        schrodinger_residual(states[:2], dt)


def test_shock_suppression_examples():
    sh = shock_suppression_demo(SpectralField1D.from_modes(8, {1: -0.5j}))  # sin x
    assert sh.shock_time_oracle == pytest.approx(1.0)
    assert sh.shock_time == pytest.approx(1.0, rel=0.05)
    reached = sh.burgers_t[sh.burgers_max_grad > 10 * sh.burgers_max_grad[0]]
    assert reached.size and reached[0] <= 1.0
    assert sh.linear_bounded
    assert sh.linear_t[-1] == pytest.approx(5.0)
    still = shock_suppression_demo(SpectralField1D.zeros(8), n=64)
    assert math.isinf(still.shock_time)
    assert np.all(still.burgers_max_grad == 0) and np.all(still.linear_max_grad < 1e-12)
    with pytest.raises(MultivaluedWavefunctionError):
        shock_suppression_demo(SpectralField1D.from_modes(4, {0: 0.5}), n=64)


def test_radiation_examples():
    n = 128
    c = radiation_integrals(np.full(n, 2.0), TWO_PI)
    assert c.classical == 0 and c.quantum == 0
    rng = make_rng(5)
    for _ in range(100):
        rho = random_density(n, rng)
        rep = radiation_integrals(rho, TWO_PI)
        assert abs(rep.classical) < 1e-8 * rep.classical_scale
        assert rep.quantum > 0
        scaled = radiation_integrals(3.0 * rho, TWO_PI)
        assert abs(scaled.classical) < 1e-8 * scaled.classical_scale
        assert scaled.quantum == pytest.approx(3.0 * rep.quantum, rel=1e-10)


def test_state_serialization(rng):
    st = MadelungState(random_density(16, rng), np.zeros(16), 2, TWO_PI)
    d = st.to_dict()
    assert set(d) == {"grid_n", "rho", "s", "winding", "kappa"}
    back = MadelungState.from_dict(d)
    assert np.array_equal(back.rho, st.rho)
    d["grid_n"] = 15
    with pytest.raises(ValueError):
        MadelungState.from_dict(d)
    with pytest.raises(ValueError):
        MadelungState(np.zeros(4), np.zeros(4), 0, TWO_PI)
