import math

import numpy as np
import pytest
from scipy.linalg import expm

from udiscord.errors import InvalidArgument
from udiscord.su_param import (
    FULL_UPPER,
    REDUCED_UPPER,
    MeasurementBasis,
    bloch_rotation,
    expi_generator,
    generator,
    generators,
    haar_unitary,
    local_projectors,
    product_unitaries,
    sample_params,
    su4_full,
    su4_reduced,
)


def test_generator_three_and_traces():
    assert np.array_equal(generator(3), np.diag([1, -1, 0, 0]))
    assert np.isclose(np.trace(generator(8) @ generator(8)).real, 2.0)
    assert np.isclose(np.trace(generator(15) @ generator(15)).real, 2.0)
    assert np.isclose(generator(8)[2, 2].real, -2 / math.sqrt(3))
    assert np.isclose(generator(15)[3, 3].real, -3 / math.sqrt(6))


@pytest.mark.parametrize("i", [0, 16, -1])
def test_generator_bad_index(i):
    with pytest.raises(InvalidArgument):
        generator(i)


def test_generator_algebra():
    gs = generators()
    for i, g in enumerate(gs):
        assert np.abs(g - g.conj().T).max() == 0
        assert abs(np.trace(g)) < 1e-12
        for j, h in enumerate(gs):
            assert abs(np.trace(g @ h) - 2 * (i == j)) < 1e-12


def test_diagonal_generators_commute():
    d = [generator(i) for i in (3, 8, 15)]
    for g in d:
        assert np.count_nonzero(g - np.diag(np.diag(g))) == 0
        for h in d:
            assert np.allclose(g @ h, h @ g)


@pytest.mark.parametrize("i", range(1, 16))
def test_closed_form_exponential_matches_expm(i):
    for phi in (0.0, 0.37, 1.9, -2.4):
        assert np.allclose(expi_generator(i, phi), expm(1j * phi * generator(i)), atol=1e-14)


def test_reduced_identity_and_unitarity(rng):
    assert np.allclose(su4_reduced(np.zeros(12)), np.eye(4))
    assert np.allclose(su4_full(np.zeros(15)), np.eye(4))
    us = product_unitaries(sample_params(rng, size=1000))
    res = np.linalg.norm(np.conj(us.transpose(0, 2, 1)) @ us - np.eye(4), axis=(1, 2))
    assert res.max() <= 1e-12


def test_reduced_matches_expm_product(rng):
    from udiscord.su_param import REDUCED_SEQUENCE

    p = sample_params(rng)
    ref = np.eye(4, dtype=complex)
    for k, phi in zip(REDUCED_SEQUENCE, p):
        ref = ref @ expm(1j * phi * generator(k))
    assert np.allclose(su4_reduced(p), ref, atol=1e-13)


def test_reduced_preserves_spectrum(rng):
    lam = np.sort(rng.dirichlet(np.ones(4)))
    u = su4_reduced(sample_params(rng))
    w = np.linalg.eigvalsh(u @ np.diag(lam) @ u.conj().T)
    assert np.allclose(w, lam, atol=1e-10)


def test_full_equals_reduced_under_conjugation(rng):
    for _ in range(50):
        p = sample_params(rng, reduced=False)
        lam = np.diag(rng.dirichlet(np.ones(4)))
        uf, ur = su4_full(p), su4_reduced(p[:12])
        assert np.abs(uf @ lam @ uf.conj().T - ur @ lam @ ur.conj().T).max() <= 1e-10
        assert abs(abs(np.linalg.det(uf)) - 1) < 1e-12


def test_full_unitarity(rng):
    us = product_unitaries(sample_params(rng, reduced=False, size=1000), sequence=(3, 2, 3, 5, 3, 10, 3, 2, 3, 5, 3, 2, 3, 8, 15))
    res = np.linalg.norm(np.conj(us.transpose(0, 2, 1)) @ us - np.eye(4), axis=(1, 2))
    assert res.max() <= 1e-12


def test_wrong_lengths():
    with pytest.raises(InvalidArgument):
        su4_reduced(np.zeros(11))
    with pytest.raises(InvalidArgument):
        su4_full(np.zeros(12))


def test_sampler_box_and_means():
    p = sample_params(np.random.default_rng(5), size=1_000_000)
    assert p.min() >= 0 and np.all(p.max(axis=0) <= REDUCED_UPPER)
    for k, centre in ((0, math.pi / 2), (1, math.pi / 4)):
        se = p[:, k].std(ddof=1) / math.sqrt(len(p))
        assert abs(p[:, k].mean() - centre) <= 3 * se
    assert np.array_equal(sample_params(np.random.default_rng(9), size=7), sample_params(np.random.default_rng(9), size=7))
    full = sample_params(np.random.default_rng(5), reduced=False, size=1000)
    assert full.shape == (1000, 15) and np.all(full.max(axis=0) <= FULL_UPPER)


def test_sampler_not_degenerate():
    lam = np.diag([0.5, 0.3, 0.15, 0.05])
    us = product_unitaries(sample_params(np.random.default_rng(2), size=10_000))
    rho00 = np.real(np.einsum("ni,i,ni->n", us[:, 0, :], np.diag(lam), us[:, 0, :].conj()))
    assert rho00.var() > 0


def test_haar_unitary():
    rng = np.random.default_rng(11)
    us = haar_unitary(rng, 2, size=100_000)
    x = np.abs(us[:, 0, 0]) ** 2
    # |U00|^2 is uniform on [0, 1] for Haar U(2)
    assert abs(x.mean() - 0.5) <= 3 * x.std(ddof=1) / math.sqrt(x.size)
    u8 = haar_unitary(rng, 8)
    assert np.linalg.norm(u8.conj().T @ u8 - np.eye(8)) <= 1e-12
    assert np.array_equal(haar_unitary(np.random.default_rng(3), 4), haar_unitary(np.random.default_rng(3), 4))
    with pytest.raises(InvalidArgument):
        haar_unitary(rng, 1)


def test_haar_left_invariance():
    # |(VU)_00|^2 must follow the Haar law of |U_00|^2 for a fixed V
    rng = np.random.default_rng(4)
    v = haar_unitary(np.random.default_rng(99), 4)
    us = haar_unitary(rng, 4, size=50_000)
    x = np.abs((v @ us)[:, 0, 0]) ** 2
    # for dim 4, |U00|^2 ~ Beta(1, 3): mean 1/4, second moment 1/10
    n = x.size
    assert abs(x.mean() - 0.25) <= 3 * x.std(ddof=1) / math.sqrt(n)
    assert abs((x**2).mean() - 0.1) <= 3 * (x**2).std(ddof=1) / math.sqrt(n)


def test_local_projectors():
    p1, p2 = local_projectors(MeasurementBasis(0, 0, 0, 0), "A")
    assert np.allclose(p1, np.diag([1, 0])) and np.allclose(p2, np.diag([0, 1]))
    p1, p2 = local_projectors(MeasurementBasis(0, 0, math.pi, 0), "B")
    assert np.allclose(p1, np.diag([0, 1])) and np.allclose(p2, np.diag([1, 0]))
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    p1, p2 = local_projectors(MeasurementBasis(math.pi / 2, 0), "A")
    assert np.allclose(p1, np.outer(plus, plus)) and np.allclose(p2, np.outer(minus, minus))
    with pytest.raises(InvalidArgument):
        local_projectors(MeasurementBasis(), "C")


def test_local_projector_algebra(rng):
    for _ in range(100):
        b = MeasurementBasis(*rng.uniform(0, math.pi, 2), *rng.uniform(0, 2 * math.pi, 2))
        for side in "AB":
            p1, p2 = local_projectors(b, side)
            assert np.abs(p1 + p2 - np.eye(2)).max() <= 1e-12
            assert np.abs(p1 @ p2).max() <= 1e-12
            assert np.abs(p1 @ p1 - p1).max() <= 1e-12


def test_bloch_rotation_matches_projector(rng):
    th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
    v = bloch_rotation(th, ph)
    assert np.allclose(v @ np.diag([1, 0]) @ v.conj().T, local_projectors(MeasurementBasis(th, ph), "A")[0])


def test_basis_wrapping():
    b = MeasurementBasis.from_vector([4.0, -1.0, 0.5, 7.0])
    assert 0 <= b.theta_a <= math.pi and 0 <= b.phi_a < 2 * math.pi
    p = local_projectors(b, "A")[0]
    raw = local_projectors(MeasurementBasis(4.0, -1.0), "A")[0]
    assert np.allclose(p, raw)
