from fractions import Fraction
from math import comb

import numpy as np
import pytest
from scipy import integrate

from lhvpov.errors import DimensionMismatch, DomainError
from lhvpov.linalg import projector, validate_povm
from lhvpov.sampling import random_rank_one_povm, stream, unit_vectors
from lhvpov.simplex import (
    SimplexMoments,
    alpha_closed,
    j0_closed,
    j0_quad,
    j1_closed,
    j1_quad,
    jij,
    jnu_closed,
    model_correlation_closed,
    model_table_closed,
    moments_mc,
)
from lhvpov.werner import WernerState, paper_alpha

DIMS = range(2, 9)


def marginal_moment_exact(d, power):
    """∫_{1/d}^1 u^power (d-1)(1-u)^(d-2) du in exact rational arithmetic."""
    lo = Fraction(1, d)
    total = Fraction(0)
    for k in range(d - 1):
        coef = comb(d - 2, k) * (-1) ** k
        e = power + k + 1
        total += coef * (1 - lo ** e) / e
    return (d - 1) * total


def test_exact_oracle_hand_values():
    assert marginal_moment_exact(2, 1) == Fraction(3, 8)
    assert marginal_moment_exact(2, 2) == Fraction(7, 24)
    assert marginal_moment_exact(3, 1) == Fraction(20, 81)
    assert marginal_moment_exact(3, 2) == Fraction(4, 27)


def test_closed_forms_small_d():
    assert j0_closed(2) == pytest.approx(3 / 8, abs=1e-15)
    assert j1_closed(2) == pytest.approx(7 / 24, abs=1e-15)
    assert j0_closed(3) == pytest.approx(20 / 81, abs=1e-15)
    assert j1_closed(3) == pytest.approx(4 / 27, abs=1e-15)


@pytest.mark.parametrize("d", DIMS)
def test_closed_forms_match_exact_integrals(d):
    assert j0_closed(d) == pytest.approx(float(marginal_moment_exact(d, 1)), abs=1e-14)
    assert j1_closed(d) == pytest.approx(float(marginal_moment_exact(d, 2)), abs=1e-14)


@pytest.mark.parametrize("d", DIMS)
def test_gauss_quadrature(d):
    assert abs(j0_quad(d) - j0_closed(d)) <= 1e-9
    assert abs(j1_quad(d) - j1_closed(d)) <= 1e-9
    adaptive, _ = integrate.quad(lambda u: u * (d - 1) * (1 - u) ** (d - 2), 1 / d, 1, epsabs=1e-12)
    assert abs(adaptive - j0_closed(d)) <= 1e-10


@pytest.mark.parametrize("d", DIMS)
def test_alpha_identity_chain(d):
    assert abs(alpha_closed(d) - paper_alpha(d)) <= 1e-12
    m = SimplexMoments.closed(d)
    assert m.Jnu == pytest.approx((m.J0 - m.J1) / (d - 1))
    assert 0 < m.J1 < m.J0 < 1


def test_j0_positive_decreasing():
    vals = [j0_closed(d) for d in DIMS]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_domain_errors():
    for f in (j0_closed, j1_closed, jnu_closed, j0_quad):
        with pytest.raises(DomainError):
            f(1)
    with pytest.raises(DomainError):
        moments_mc(2, 0, 1)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_moments_mc_agree_with_closed_forms(d):
    est = moments_mc(d, 1_000_000, seed=7 + d)
    j0, j1 = j0_closed(d), j1_closed(d)
    assert abs(est.J0 - j0) <= 4 * est.se_J0
    assert abs(est.J1 - j1) <= 4 * est.se_J1
    assert abs(est.Jnu - (j0 - j1) / (d - 1)) <= 4 * est.se_Jnu
    assert abs(est.Jnu - est.Jnu_identity) <= 4 * est.se_Jnu_diff + 1e-15
    assert abs(est.Jnu - est.Jnu_last) <= 4 * est.se_Jnu_sym + 1e-15
    assert abs(est.alpha - paper_alpha(d)) <= 4 * est.se_alpha


def test_moments_mc_reproducible():
    a = moments_mc(3, 10_000, seed=5, workers=3)
    b = moments_mc(3, 10_000, seed=5, workers=3)
    c = moments_mc(3, 10_000, seed=5, workers=1)
    assert a == b
    assert a.J0 != c.J0
    assert abs(a.J0 - c.J0) <= 4 * np.hypot(a.se_J0, c.se_J0)


def test_jij_examples():
    e1, e2 = np.array([1, 0]), np.array([0, 1])
    assert jij(1, e1, 1, e2, 2) == pytest.approx(1 / 12, abs=1e-15)
    assert jij(1, e1, 1, e1, 2) == pytest.approx(7 / 24, abs=1e-15)
    assert jij(1, e1, 1, e1, 2) == pytest.approx(j1_closed(2), abs=1e-15)
    assert jij(0, e1, 1, e1, 2) == 0
    with pytest.raises(DimensionMismatch):
        jij(1, e1, 1, np.array([1, 0, 0]), 2)


@pytest.mark.parametrize("d", [2, 3])
def test_jij_against_defining_integral(d, rng):
    p, q = unit_vectors(rng, 2, d)
    lam = unit_vectors(stream(99, d), 1_000_000, d)
    op = np.abs(lam.conj() @ p) ** 2
    oq = np.abs(lam.conj() @ q) ** 2
    samples = 0.8 * 0.6 * (op > 1 / d) * op * oq
    se = samples.std(ddof=1) / np.sqrt(len(samples))
    assert abs(samples.mean() - jij(0.8, p, 0.6, q, d)) <= 4 * se


def test_model_correlation_examples():
    e1, e2 = np.array([1, 0]), np.array([0, 1])
    assert model_correlation_closed(1, e1, 1, e1, 2) == pytest.approx(7 / 48, abs=1e-15)
    assert model_correlation_closed(1, e1, 1, e2, 2) == pytest.approx(17 / 48, abs=1e-15)
    assert model_correlation_closed(0, e1, 1, e2, 2) == 0
    assert model_correlation_closed(1, e1, 0, e2, 2) == 0
    rho = WernerState(2, 5 / 12).materialize()
    for p, q in ((e1, e1), (e1, e2)):
        direct = np.trace(rho @ np.kron(projector(p), projector(q))).real
        assert model_correlation_closed(1, p, 1, q, 2) == pytest.approx(direct, abs=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_model_correlation_symmetric(d, rng):
    p, q = unit_vectors(rng, 2, d)
    assert model_correlation_closed(0.3, p, 0.9, q, d) == pytest.approx(
        model_correlation_closed(0.9, q, 0.3, p, d), abs=1e-16)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_complete_pair_sums_to_one(d, rng):
    a = random_rank_one_povm(rng, d, d + 2)
    b = random_rank_one_povm(rng, d, d + 1)
    total = sum(
        model_correlation_closed(ra.weight, ra.direction, rb.weight, rb.direction, d)
        for _, ra in a.fine_grained for _, rb in b.fine_grained
    )
    assert total == pytest.approx(1.0, abs=1e-13)
    assert model_table_closed(a, b).sum() == pytest.approx(1.0, abs=1e-13)


def test_model_table_aggregates_children():
    a = validate_povm([0.6 * np.eye(2), 0.4 * np.eye(2)])
    b = validate_povm([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    # product marginals: Tr(A_i) Tr(B_j) / d^2
    np.testing.assert_allclose(model_table_closed(a, b), [[0.3, 0.3], [0.2, 0.2]], atol=1e-15)
