"""Monte Carlo verification of characterizing equations and Stein identities.

Test functions carry analytic derivatives (up to order 8) so the harness
never differentiates numerically; finite differences only appear in the
self-test :func:`check_derivatives`. A comparison passes when the
difference of the two sides is within 4 combined standard errors.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import hermite as herm
from numpy.polynomial.hermite_e import hermegauss

from . import biastransform as BT
from . import distributions as D
from .errors import MembershipViolated, NonFiniteValue, OperatorParamMismatch
from .orthopoly import PolyFamily, PolySystemId, alpha_closed_form, poly_coeffs, system

Z_THRESHOLD = 4.0
BATCH_PASS_FRACTION = 0.95
MAX_DERIVATIVE = 8
REPORT_COLUMNS = ("check_id", "family", "lambda", "p", "m", "function_id", "lhs", "rhs",
                  "stderr_lhs", "stderr_rhs", "z", "pass")


# -- test functions -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TestFunction:
    """F with its derivatives.

    ``deriv(q, x)`` returns F^(q)(x) for q <= 8. ``growth`` is ``"bounded"``
    or ``"poly<d>"``. Lattice-only functions (indicators) have no
    derivatives and are only used with forward differences.
    """

    __test__ = False

    ident: str
    fn: Callable
    derivative: Callable | None
    growth: str = "bounded"
    lattice_only: bool = False

    def __call__(self, x):
        return self.fn(x)

    def deriv(self, q: int, x):
        if q == 0:
            return self.fn(x)
        if self.derivative is None:
            raise ValueError(f"{self.ident} has no derivatives")
        if q > MAX_DERIVATIVE:
            raise ValueError(f"derivatives are stored up to order {MAX_DERIVATIVE}")
        return self.derivative(q, x)

    def forward_diff(self, q: int, x):
        """Delta^q F(x) = sum_j C(q, j) (-1)^(q-j) F(x + j)."""
        out = 0
        for j in range(q + 1):
            out = out + math.comb(q, j) * (-1) ** (q - j) * self.fn(x + j)
        return out


def monomial(j: int) -> TestFunction:
    def fn(x):
        return x**j if not isinstance(x, np.ndarray) else np.power(x, j).astype(float)

    def der(q, x):
        if q > j:
            return np.zeros_like(np.asarray(x, dtype=float))
        return math.perm(j, q) * np.power(np.asarray(x, dtype=float), j - q)

    return TestFunction(f"x^{j}", fn, der, "bounded" if j == 0 else f"poly{j}")


def gaussian_bump() -> TestFunction:
    """exp(-x^2); its q-th derivative is (-1)^q H_q(x) exp(-x^2) with H_q
    the physicists' Hermite polynomial."""
    def fn(x):
        return np.exp(-np.asarray(x, dtype=float) ** 2)

    def der(q, x):
        x = np.asarray(x, dtype=float)
        c = np.zeros(q + 1)
        c[q] = 1.0
        return (-1) ** q * herm.hermval(x, c) * np.exp(-x * x)

    return TestFunction("exp(-x^2)", fn, der)


def sine() -> TestFunction:
    return TestFunction("sin", lambda x: np.sin(np.asarray(x, dtype=float)),
                        lambda q, x: np.sin(np.asarray(x, dtype=float) + q * math.pi / 2))


def cosine() -> TestFunction:
    return TestFunction("cos", lambda x: np.cos(np.asarray(x, dtype=float)),
                        lambda q, x: np.cos(np.asarray(x, dtype=float) + q * math.pi / 2))


def _bump_numerators(qmax: int) -> list[Polynomial]:
    # F^(q) = N_q(x) (1 - x^2)^(-2q) exp(-1/(1 - x^2)) on (-1, 1)
    one_minus = Polynomial([1.0, 0.0, -1.0])
    x = Polynomial([0.0, 1.0])
    out = [Polynomial([1.0])]
    for q in range(qmax):
        nq = out[-1]
        out.append(nq.deriv() * one_minus**2 + 4 * q * x * nq * one_minus - 2 * x * nq)
    return out


_BUMP_N = _bump_numerators(MAX_DERIVATIVE)


def smooth_bump(center: float = 0.0, width: float = 1.0) -> TestFunction:
    """exp(-1/(1 - u^2)) with u = (x - center) / width, zero for |u| >= 1."""
    def _eval(q, x):
        x = np.asarray(x, dtype=float)
        u = (x - center) / width
        inside = np.abs(u) < 1
        out = np.zeros_like(u)
        ui = u[inside]
        s = 1.0 - ui * ui
        out[inside] = _BUMP_N[q](ui) * s ** (-2.0 * q) * np.exp(-1.0 / s) / width**q
        return out

    ident = "bump" if (center, width) == (0.0, 1.0) else f"bump({center},{width})"
    return TestFunction(ident, lambda x: _eval(0, x), _eval)


def indicator(k: int) -> TestFunction:
    def fn(x):
        if isinstance(x, (int, Fraction)):
            return 1 if x == k else 0
        return (np.asarray(x, dtype=float) == k).astype(float)

    return TestFunction(f"1{{x={k}}}", fn, None, lattice_only=True)


def default_bank(lattice: bool = False, indicator_points: Sequence[int] = (0, 1, 2, 3)) -> list[TestFunction]:
    bank = [monomial(j) for j in range(6)] + [gaussian_bump(), sine(), cosine(), smooth_bump()]
    if lattice:
        bank += [indicator(k) for k in indicator_points]
    return bank


def check_derivatives(tf: TestFunction, grid, q_max: int = MAX_DERIVATIVE, h: float = 1e-6) -> float:
    """Worst ratio |analytic - central difference| / max(1e-6, 1e-6 |value|)
    over orders 1..q_max; at most 1 means the derivatives are consistent."""
    x = np.asarray(grid, dtype=float)
    worst = 0.0
    for q in range(1, q_max + 1):
        fd = (tf.deriv(q - 1, x + h) - tf.deriv(q - 1, x - h)) / (2 * h)
        an = tf.deriv(q, x)
        tol = np.maximum(1e-6, 1e-6 * np.abs(an))
        worst = max(worst, float(np.max(np.abs(an - fd) / tol)))
    return worst


# -- Monte Carlo --------------------------------------------------------------

@dataclass
class MCEstimate:
    mean: float
    stderr: float
    n: int
    seed: object = None
    stream: object = None


def _values(samples) -> tuple[np.ndarray, object, object]:
    if isinstance(samples, D.SampleBatch):
        return np.asarray(samples.values, dtype=float), samples.seed, samples.stream
    return np.asarray(samples, dtype=float), None, None


def _estimate(vals: np.ndarray, seed=None, stream=None) -> MCEstimate:
    vals = np.asarray(vals, dtype=float)
    if vals.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(vals)):
        raise NonFiniteValue("test function produced NaN or infinity")
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(float(vals.mean()), se, n, seed, stream)


def mc_expectation(f, samples) -> MCEstimate:
    """Sample mean of f over the batch with its standard error."""
    x, seed, stream = _values(samples)
    vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    return _estimate(vals, seed, stream)


def z_score(diff: float, se: float, exact_tol: float = 1e-9) -> tuple[float, bool]:
    if se > 0:
        z = diff / se
        return z, abs(z) <= Z_THRESHOLD
    ok = abs(diff) <= exact_tol
    return (0.0 if ok else math.copysign(math.inf, diff)), ok


# -- reports ------------------------------------------------------------------

@dataclass
class VerificationReport:
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def pass_fraction(self) -> float:
        if not self.rows:
            return 1.0
        return sum(r["pass"] for r in self.rows) / len(self.rows)

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    def extend(self, other: "VerificationReport") -> None:
        self.rows.extend(other.rows)

    def to_csv(self, path) -> None:
        write_rows(self.rows, path, REPORT_COLUMNS)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows, path, columns) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


# -- characterizing equation -------------------------------------------------

def check_moment_membership(dist: D.DistributionSpec, sys: PolySystemId, m: int) -> None:
    ref = sys.reference()
    if dist == ref:
        return
    for j in range(1, 2 * m + 1):
        a = D.analytic_moment(dist, j)
        b = D.analytic_moment(ref, j)
        if abs(a - b) > 1e-9 * max(1.0, abs(b)):
            raise MembershipViolated(f"E X^{j} = {a:.6g} differs from the reference value {b:.6g}")


def _exact_transform(dist: D.DistributionSpec, sys: PolySystemId, m: int):
    """Closed-form law or exact pmf of the transform when one is available."""
    if dist == sys.reference():
        return BT.closed_form_transform(sys, m)
    if dist.is_lattice and sys.is_discrete:
        bf, alpha = BT.transform_for_system(dist, sys, m)
        return BT.discrete_transform_pmf(dist, bf, alpha)
    return None


def _exact_mean(law, g: Callable, breakpoints=()) -> float:
    if isinstance(law, BT.DiscretePmf):
        return law.expect(g)
    return float(D.expect(law, g, breakpoints=breakpoints))


def verify_characterization(dist: D.DistributionSpec, sys: PolySystemId, m: int,
                            bank: Sequence[TestFunction], n: int, stream: D.RandomStream,
                            exact_lhs: bool = False, check_id: str = "characterize") -> VerificationReport:
    """Compare E[P(X) F(X)] with alpha E[F^(m)(X^(m))] for each F.

    Derivatives are replaced by forward differences when the system is
    discrete. The right side is exact when the transform has a closed
    form or an exact pmf, otherwise a Monte Carlo mean over draws of the
    general construction. With ``exact_lhs`` the left side is an exact
    expectation too (quadrature or lattice summation).
    """
    if not bank:
        raise ValueError("empty test-function bank")
    check_moment_membership(dist, sys, m)
    P = poly_coeffs(sys, m)
    pf = P.as_array()
    alpha = float(alpha_closed_form(sys, m))
    discrete = sys.is_discrete

    def op(tf, x):
        return tf.forward_diff(m, x) if discrete else tf.deriv(m, x)

    x = None if exact_lhs else D.sample(dist, n, stream.child(0))
    law = _exact_transform(dist, sys, m)
    y = None
    if law is None:
        bf, a = BT.transform_for_system(dist, sys, m)
        y = BT.sample_transformed(dist, bf, a, n, stream.child(1))
    report = VerificationReport(config=dict(dist=str(dist), family=sys.family.value, lam=sys.lam, p=sys.p, m=m, n=n))
    for tf in bank:
        if tf.lattice_only and not discrete:
            continue

        def lhs_fn(t, tf=tf):
            return np.polynomial.polynomial.polyval(t, pf) * tf(t)

        if exact_lhs:
            lhs = MCEstimate(_exact_mean(dist, lhs_fn), 0.0, 0)
        else:
            lhs = mc_expectation(lhs_fn, x)
        if law is not None:
            rhs = MCEstimate(_exact_mean(law, lambda t, tf=tf: op(tf, t)), 0.0, 0)
        else:
            rhs = mc_expectation(lambda t, tf=tf: op(tf, t), y)
        se = math.hypot(lhs.stderr, alpha * rhs.stderr)
        diff = lhs.mean - alpha * rhs.mean
        z, ok = z_score(diff, se, 1e-9 * max(1.0, abs(lhs.mean)))
        report.rows.append(dict(check_id=check_id, family=sys.family.value, **{"lambda": sys.lam}, p=sys.p, m=m,
                                function_id=tf.ident, lhs=lhs.mean, rhs=alpha * rhs.mean,
                                stderr_lhs=lhs.stderr, stderr_rhs=alpha * rhs.stderr, z=z, **{"pass": ok}))
    return report


# -- Stein operators ----------------------------------------------------------

OPERATORS = ("classical", "h1", "h2", "gamma", "binomial_ehm")
_H1 = system(PolyFamily.Hermite, 1)


def _hermite1(m: int, x):
    return poly_coeffs(_H1, m)(x)


def _operator(operator: str, f: TestFunction, params: dict) -> Callable:
    if operator == "classical":
        return lambda x: f.deriv(1, x) - x * f(x)
    if operator in ("h1", "h2"):
        m = params.get("m")
        if m is None or int(m) < 1:
            raise OperatorParamMismatch(f"{operator} needs an order m >= 1")
        m = int(m)
        if operator == "h1":
            return lambda x: f.deriv(1, x) * _hermite1(m - 1, x) - _hermite1(m, x) * f(x)
        return lambda x: f.deriv(m, x) - _hermite1(m, x) * f(x)
    if operator == "gamma":
        lam = params.get("lam")
        if lam is None or not lam > 0:
            raise OperatorParamMismatch("gamma operator needs lam > 0")
        return lambda x: (x - lam) * f(x) - x * f.deriv(1, x)
    if operator == "binomial_ehm":
        lam, p = params.get("lam"), params.get("p")
        if lam is None or p is None or not 0 < p < 1:
            raise OperatorParamMismatch("binomial operator needs lam and p in (0, 1)")
        q = 1 - p
        return lambda x: p * (lam - x) * f(x + 1) - q * x * f(x)
    raise OperatorParamMismatch(f"unknown operator {operator!r}")


def normal_expectation(h: Callable, deg: int = 120) -> float:
    """Standard normal expectation by Gauss-Hermite quadrature."""
    nodes, weights = hermegauss(deg)
    return float(np.dot(weights, h(nodes)) / math.sqrt(2 * math.pi))


def stein_residual(operator: str, f: TestFunction, x, **params):
    """Evaluate a Stein operator applied to ``f``.

    ``x`` may be points (returns the pointwise values), a SampleBatch
    (returns an MCEstimate of the expectation) or a DistributionSpec
    (returns the exact expectation; Fractions for binomial laws with
    rational p, Gauss-Hermite quadrature for the standard normal).
    """
    if isinstance(x, D.DistributionSpec):
        if operator == "binomial_ehm" and x.family is D.Family.Binomial:
            n, p = x.params
            if params.get("lam") != n or params.get("p") != p:
                raise OperatorParamMismatch("operator parameters differ from the binomial law")
            pe = p if isinstance(p, Fraction) else Fraction(repr(p))
            params = dict(lam=n, p=pe)
            g = _operator(operator, f, params)
            pts, probs = D.lattice_pmf(x, exact_arith=True)
            return sum((pr * g(Fraction(int(k))) for k, pr in zip(pts, probs)), Fraction(0))
        g = _operator(operator, f, params)
        if x.family is D.Family.NormalMeanZero and x.params[0] == 1:
            return normal_expectation(g)
        return float(D.expect(x, g))
    g = _operator(operator, f, params)
    if isinstance(x, D.SampleBatch):
        return mc_expectation(g, x)
    return g(np.asarray(x, dtype=float))


# -- equivalence and fixed points -------------------------------------------

@dataclass
class TestOutcome:
    """A named statistic with its threshold."""

    __test__ = False

    name: str
    statistic: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)


def gamma_sizebias_equivalence(lam: float, n: int, stream: D.RandomStream) -> list[TestOutcome]:
    """Order-one Laguerre transform of Gamma(lam) against its size bias."""
    dist = D.gamma(lam)
    sys = system(PolyFamily.Laguerre, lam)
    bf, alpha = BT.transform_for_system(dist, sys, 1)
    lag = BT.sample_transformed(dist, bf, alpha, n, stream.child(0)).values
    size = BT.classic_bias(dist, "size", n, stream.child(1)).values
    crit = D.ks_critical_two_sample(n)
    ks = D.ks_statistic(lag, size)
    out = [TestOutcome("ks(laguerre, size)", ks, crit, ks < crit)]
    target = D.gamma(lam + 1)
    for label, vals in (("laguerre", lag), ("size", size)):
        for q in range(1, 5):
            est = _estimate(vals**q)
            ref = float(D.analytic_moment(target, q))
            z, ok = z_score(est.mean - ref, est.stderr)
            out.append(TestOutcome(f"{label} moment {q}", abs(z), Z_THRESHOLD, ok,
                                   dict(mean=est.mean, analytic=ref)))
    return out


def _resolve_bias(dist: D.DistributionSpec, P, m: int):
    if isinstance(P, PolySystemId):
        return BT.transform_for_system(dist, P, m)
    return BT.make_biasing_function(dist, P, m)


def fixed_point_test(dist: D.DistributionSpec, P, m: int, n: int, stream: D.RandomStream) -> TestOutcome:
    """Is ``dist`` equal in law to its transform?

    Lattice laws with a discrete system are compared by exact TV (< 1e-10);
    everything else by two-sample KS between the general construction and
    fresh draws of ``dist`` at the 1% level.
    """
    bf, alpha = _resolve_bias(dist, P, m)
    discrete = isinstance(P, PolySystemId) and P.is_discrete
    if dist.is_lattice and discrete:
        pmf = BT.discrete_transform_pmf(dist, bf, alpha)
        pts, probs = D.lattice_pmf(dist, tail=1e-12)
        ref = {int(k): float(v) for k, v in zip(pts, probs)}
        tv = D.total_variation(pmf.as_dict(), ref)
        return TestOutcome("tv", tv, 1e-10, tv < 1e-10)
    x = BT.sample_transformed(dist, bf, alpha, n, stream.child(0)).values
    y = D.sample(dist, n, stream.child(1)).values
    crit = D.ks_critical_two_sample(n)
    ks = D.ks_statistic(x, y)
    return TestOutcome("ks", ks, crit, ks < crit)


def density_histogram_l1(dist: D.DistributionSpec, bf, alpha, n: int, stream: D.RandomStream,
                         bins: int = 200, lo: float | None = None, hi: float | None = None) -> float:
    """L1 distance between a histogram of transform draws and the
    order-one density formula, both on a common grid of ``bins`` cells.

    Mass outside [lo, hi] counts in full against the histogram side.
    """
    x = BT.sample_transformed(dist, bf, alpha, n, stream).values
    if lo is None or hi is None:
        lo, hi = np.quantile(x, [0.0005, 0.9995])
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(x, edges)
    width = edges[1] - edges[0]
    hist = counts / (n * width)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dens = BT.density_order_one(dist, bf, alpha, mids)
    outside = 1.0 - counts.sum() / n
    return float(np.sum(np.abs(hist - dens)) * width + outside)


def root_choice_invariance(dist: D.DistributionSpec, n: int, stream: D.RandomStream,
                           roots: Sequence[float] = (-0.5, 0.0, 0.5)) -> list[TestOutcome]:
    """Samplers for P = 1(x > 1) - 1(x < -1) built with different root
    representatives, compared pairwise by two-sample KS."""
    draws = []
    for i, r in enumerate(roots):
        bf, alpha = BT.make_biasing_function(dist, BT.outer_sign_function(roots=[r]), 1)
        draws.append(BT.sample_transformed(dist, bf, alpha, n, stream.child(i)).values)
    crit = D.ks_critical_two_sample(n)
    out = []
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            ks = D.ks_statistic(draws[i], draws[j])
            out.append(TestOutcome(f"ks(r={roots[i]}, r={roots[j]})", ks, crit, ks < crit))
    return out
