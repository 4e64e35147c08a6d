import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from steinbias import distributions as D
from steinbias.errors import KindUnsupported, ParameterOutOfRange


@pytest.mark.parametrize(
    "family, params",
    [
        ("Gamma", (0,)),
        ("Gamma", (-1.0,)),
        ("NormalMeanZero", (0,)),
        ("Poisson", (-2,)),
        ("Binomial", (2.5, 0.3)),
        ("Binomial", (4, 1.0)),
        ("GegenbauerBeta", (-0.5,)),
        ("UniformInterval", (1, 1)),
        ("EmpiricalAtoms", ((1, 2), (0.5, -0.1))),
    ],
)
def test_parameter_validation(family, params):
    with pytest.raises(ParameterOutOfRange):
        D.make_distribution(family, params)


def test_atoms_are_merged_and_normalized():
    d = D.atoms([1, 0, 1], [1, 1, 2])
    assert d.points == (0, 1)
    assert d.weights == (Fraction(1, 4), Fraction(3, 4))


def test_gegenbauer_aliases():
    assert D.arcsine().gegenbauer_lambda == 0
    assert D.semicircle().gegenbauer_lambda == 1
    assert D.uniform(-1, 1).gegenbauer_lambda == Fraction(1, 2)


# Gaussian moments (k-1)!! lam^(k/2); Gamma rising factorials; Poisson
# Touchard values; binomial and arcsine values from direct summation.
@pytest.mark.parametrize(
    "dist, k, expected",
    [
        (D.normal(2), 4, Fraction(12)),
        (D.normal(1), 6, Fraction(15)),
        (D.normal(1), 5, Fraction(0)),
        (D.gamma(Fraction(5, 2)), 3, Fraction(315, 8)),
        (D.poisson(1), 4, Fraction(15)),
        (D.poisson(2), 3, Fraction(22)),
        (D.binomial(4, 0.5), 2, Fraction(5)),
        (D.arcsine(), 4, Fraction(3, 8)),
        (D.semicircle(), 2, Fraction(1, 4)),
        (D.gegenbauer(0.5), 2, Fraction(1, 3)),
        (D.laplace(1), 4, Fraction(24)),
        (D.uniform(0, 1), 3, Fraction(1, 4)),
    ],
)
def test_analytic_moments(dist, k, expected):
    assert D.analytic_moment(dist, k, exact_arith=True) == expected


@pytest.mark.parametrize(
    "dist",
    [D.normal(2), D.gamma(0.5), D.gamma(3), D.laplace(1), D.arcsine(), D.gegenbauer(-0.3),
     D.gegenbauer(3), D.semicircle(), D.uniform(-1, 2), D.poisson(4), D.binomial(7, 0.3)],
)
@pytest.mark.parametrize("k", [1, 2, 4, 6])
def test_expect_matches_closed_form_moments(dist, k):
    num = D.expect(dist, lambda x: x**k)
    ref = D.analytic_moment(dist, k)
    assert abs(num - ref) <= 1e-9 * max(1.0, abs(ref))


def test_exact_lattice_expectation_is_rational():
    val = D.expect(D.binomial(5, 0.3), lambda k: k * k, exact_arith=True)
    assert val == Fraction(5 * 3, 10) * Fraction(7, 10) + Fraction(15, 10) ** 2


def test_evaluate_kinds():
    assert D.evaluate(D.laplace(1), "density", 1.0) == pytest.approx(math.exp(-1) / 2, rel=1e-15)
    assert D.evaluate(D.poisson(2), "pmf", 3) == pytest.approx(math.exp(-2) * 8 / 6, rel=1e-14)
    assert D.evaluate(D.arcsine(), "cdf", 0.0) == pytest.approx(0.5, abs=1e-15)
    assert D.evaluate(D.semicircle(), "cdf", 0.5) == pytest.approx(
        0.5 + (0.5 * math.sqrt(0.75) + math.asin(0.5)) / math.pi, abs=1e-13)
    with pytest.raises(KindUnsupported):
        D.evaluate(D.poisson(1), "density", 1.0)
    with pytest.raises(KindUnsupported):
        D.evaluate(D.normal(1), "pmf", 1.0)


def test_gegenbauer_density_integrates_to_one():
    for lam in (-0.3, 0.0, 1.0, 4.0):
        assert D.expect(D.gegenbauer(lam), lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-10)


def test_truncation_bounds_cover_tail():
    lo, hi = D.truncation_bounds(D.normal(1))
    assert lo <= -12 and hi >= 12
    lo, hi = D.truncation_bounds(D.gamma(1.0))
    assert lo == 0 and stats.gamma.sf(hi, 1.0) < 1e-12
    _, hi = D.truncation_bounds(D.poisson(4))
    assert stats.poisson.sf(hi, 4) < 1e-12


def test_poisson_lattice_tail():
    ks, probs = D.lattice_pmf(D.poisson(4), tail=1e-18)
    assert stats.poisson.sf(ks[-1], 4) < 1e-18
    assert abs(probs.sum() - 1) < 1e-15


def test_streams_are_reproducible_and_distinct():
    s = D.RandomStream(11, 2)
    a = D.sample(D.normal(1), 50, s).values
    b = D.sample(D.normal(1), 50, s).values
    c = D.sample(D.normal(1), 50, s.child(1)).values
    d = D.sample(D.normal(1), 50, D.RandomStream(11, 3)).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_sample_batch_csv_roundtrip(tmp_path):
    batch = D.sample(D.gamma(2), 20, D.RandomStream(4, 1))
    path = tmp_path / "b.csv"
    batch.to_csv(path)
    back = D.SampleBatch.from_csv(path)
    assert np.array_equal(back.values, batch.values)
    assert (back.seed, back.stream) == (4, 1)
    assert path.read_bytes().count(b"\r") == 0


@pytest.mark.parametrize("dist", [D.gamma(0.7), D.gegenbauer(2.0), D.arcsine(), D.laplace(2), D.binomial(6, 0.3)])
def test_samplers_match_cdf(dist):
    n = 20000
    x = D.sample(dist, n, D.RandomStream(8)).values
    if dist.is_discrete:
        ks, probs = D.lattice_pmf(dist)
        freq = np.bincount(x.astype(int), minlength=len(ks)) / n
        assert np.all(np.abs(freq - probs) <= 4 * np.sqrt(probs * (1 - probs) / n) + 1e-12)
    else:
        # single-seed check at the 0.1% level; the 1% level with a
        # multi-seed rule lives in the acceptance suite
        assert D.ks_statistic(dist, x) < D.ks_critical_one_sample(n, coef=1.95)


def test_ks_statistic_forms():
    x = np.array([0.1, 0.4, 0.7])
    assert D.ks_statistic(x, x) == 0.0
    assert D.ks_statistic(D.uniform(0, 1), x) == pytest.approx(max(0.1, 1 / 3 - 0.1, 0.4 - 1 / 3, 2 / 3 - 0.4,
                                                                   0.7 - 2 / 3, 1 - 0.7))
    assert D.ks_statistic(x, D.uniform(0, 1)) == D.ks_statistic(D.uniform(0, 1), x)
    assert D.ks_critical_two_sample(10**5) == pytest.approx(1.628 * math.sqrt(2e-5))


def test_total_variation():
    assert D.total_variation({0: 0.5, 1: 0.5}, {1: 0.5, 2: 0.5}) == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.2, 20), k=st.integers(0, 6))
def test_poisson_moments_property(lam, k):
    ks, probs = D.lattice_pmf(D.poisson(lam), tail=1e-30)
    num = math.fsum(probs * ks.astype(float) ** k)
    ref = D.analytic_moment(D.poisson(lam), k)
    assert abs(num - ref) <= 1e-9 * max(1.0, ref)
