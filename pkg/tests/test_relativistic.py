import math

import numpy as np
import pytest

from burgerslab.lab import make_rng
from burgerslab.relativistic import (HBARC_MEV_FM, FourVelocityField, burgers_equivalence, constant_boost,
                                     dust_residual, levi_civita_contraction, perturbed, pfaffian,
                                     proper_time_map, random_antisymmetric, rarefaction, rarefaction_label,
                                     reynolds_estimate, stationary_shear, to_fm, vorticity_checks)

T = np.linspace(0.2, 2.0, 7)[:, None]
X = np.linspace(-2.0, 2.0, 9)[None, :]
Y = np.linspace(0.0, 3.0, 9)[None, :]


def test_normalization_of_families():
    for U in (constant_boost(0.7), stationary_shear(), rarefaction(), perturbed(rarefaction(), 0.1)):
        assert U.normalization_error(T, X, Y) < 1e-12


def test_validate_rejects_unnormalized():
    bad = FourVelocityField("bad", lambda t, x, y, z: np.stack([1 + 0 * x, 1 + 0 * x, 0 * x, 0 * x]))
    with pytest.raises(ValueError):
        bad.validate(T, X)


def test_dust_residual_examples():
    assert dust_residual(constant_boost(0.9), T, X) < 1e-12
    hs = [2e-2, 1e-2, 5e-3]
    shear = [dust_residual(stationary_shear(), T, X, Y, h=h) for h in hs]
    assert max(shear) < 1e-12  # annihilated exactly: no y-velocity, no t,x dependence
    rare = [dust_residual(rarefaction(), T, X, h=h) for h in hs]
    for a, b in zip(rare, rare[1:]):
        assert math.log2(a / b) == pytest.approx(2.0, abs=0.1)
    eps = 1e-2
    # read as: the residual of a perturbed field exceeds eps/2
    assert dust_residual(perturbed(constant_boost(0.0), eps), T, X) > eps / 2


def test_proper_time_examples():
    rest = proper_time_map(constant_boost(0.0), 2.0, [0.0, 1.0], n_steps=100)
    assert np.allclose(rest.tau[-1], 2.0, atol=1e-14)
    th = 0.8
    boost = proper_time_map(constant_boost(th), 2.0, [0.0, 1.0], n_steps=200)
    assert np.allclose(boost.tau[-1], 2.0 / math.cosh(th), atol=1e-10)
    assert np.all(boost.normalization < 1e-8)
    x0 = np.linspace(-1.5, 1.5, 7)
    rp = proper_time_map(rarefaction(), 1.5, x0, n_steps=400)
    # worldlines are straight: tau = t / sqrt(1 + x0^2)
    assert np.allclose(rp.tau[-1], 1.5 / np.sqrt(1 + x0**2), atol=1e-6)
    assert np.all(rp.normalization < 1e-8)
    cut = proper_time_map(constant_boost(1.0), 5.0, [0.0, 0.5], n_steps=100, bounds=([-1, -1, -1], [1, 1, 1]))
    assert np.all(cut.truncated)


def test_rarefaction_label_inverts():
    x0 = np.linspace(-3, 3, 13)
    t = 1.7
    x = x0 * (1 + t / np.sqrt(1 + x0**2))
    assert np.allclose(rarefaction_label(t, x), x0, atol=1e-13)


def test_burgers_equivalence_examples():
    assert burgers_equivalence(constant_boost(0.4), T, X)["residual"] < 1e-12
    assert burgers_equivalence(stationary_shear(), T, X, Y)["residual"] < 1e-12
    r = burgers_equivalence(rarefaction(), T, X, h=1e-3)
    assert r["residual"] < 1e-5 and r["u0_mismatch"] < 1e-12
    base = constant_boost(0.0)
    a = burgers_equivalence(perturbed(base, 1e-2), T, X)["residual"]
    b = burgers_equivalence(perturbed(base, 2e-2), T, X)["residual"]
    assert b / a == pytest.approx(2.0, rel=0.02)


def test_vorticity_examples():
    grad = vorticity_checks(constant_boost(0.3), T, X)
    assert grad.max_abs < 1e-12
    hs = [2e-2, 1e-2, 5e-3]
    trans = [vorticity_checks(stationary_shear(), T, 0.1, Y, h=h) for h in hs]
    errs = [r.transversality for r in trans]
    assert all(e < 1e-12 for e in errs) or all(math.log2(a / b) > 1.8 for a, b in zip(errs, errs[1:]))
    rep = trans[-1]
    nonzero = rep.rank[rep.rank > 0]
    assert np.all(nonzero == 2)
    assert np.abs(rep.determinant).max() < 1e-12


def test_pfaffian_identities():
    w = random_antisymmetric(10_000, make_rng(0))
    pf = pfaffian(np.moveaxis(w, 0, -1))
    det = np.linalg.det(w)
    assert np.max(np.abs(det - pf**2) / np.maximum(1, pf**2)) < 1e-10
    contraction = levi_civita_contraction(np.moveaxis(w, 0, -1))
    assert np.allclose(contraction, 8 * pf, rtol=1e-12, atol=1e-12)


def test_reynolds_local_example():
    local, scaled = reynolds_estimate(200.0, 6.0, 1 / (8 * math.pi))
    assert local == scaled
    assert local == pytest.approx(8 * math.pi * 200 * 6 / HBARC_MEV_FM, rel=1e-15)
    assert abs(local - 48 * math.pi) / (48 * math.pi) < 0.01


def test_reynolds_cosmic_example():
    _, scaled = reynolds_estimate(200.0, to_fm(900, "m"), 1 / (8 * math.pi), 6.0)
    assert scaled == pytest.approx(2.26e19, rel=0.02)


def test_reynolds_domain_errors():
    with pytest.raises(ValueError):
        reynolds_estimate(0.0, 6.0, 0.1)
    with pytest.raises(ValueError):
        reynolds_estimate(200.0, -1.0, 0.1)
    with pytest.raises(ValueError):
        to_fm(1.0, "furlong")
    assert to_fm(1.0, "m") == pytest.approx(1e15)
