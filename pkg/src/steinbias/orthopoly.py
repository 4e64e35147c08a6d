"""Monic orthogonal polynomial systems for the Normal, Gamma, Poisson,
Binomial and Gegenbauer (Beta-type) families.

Coefficients are computed in exact rational arithmetic: float parameters
are read through their decimal repr, so ``p=0.3`` is treated as ``3/10``.
Every family has two coefficient paths (a three-term recurrence and an
explicit expansion) plus :func:`orthopoly_from_moments`, a Gram-Schmidt
oracle that only sees the moments of the weight.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import distributions as D
from ._exact import (
    exact,
    falling,
    falling_poly,
    poly_add,
    poly_eval,
    poly_mul,
    poly_scale,
    rising,
)
from .errors import (
    DegreeTooLarge,
    ParameterOutOfRange,
    SingularMomentMatrix,
    TruncationInsufficient,
)

MAX_TRUNCATION = 12
MAX_ABS_T = 0.2


class PolyFamily(str, enum.Enum):
    Hermite = "Hermite"
    Laguerre = "Laguerre"
    Charlier = "Charlier"
    Krawtchouk = "Krawtchouk"
    Gegenbauer = "Gegenbauer"


# families closed under independent addition
CLOSED_FAMILIES = (PolyFamily.Hermite, PolyFamily.Laguerre, PolyFamily.Charlier, PolyFamily.Krawtchouk)


@dataclass(frozen=True)
class PolySystemId:
    family: PolyFamily
    lam: object
    p: object = None

    def __post_init__(self):
        fam = PolyFamily(self.family)
        object.__setattr__(self, "family", fam)
        lam = self.lam
        if fam in (PolyFamily.Hermite, PolyFamily.Laguerre, PolyFamily.Charlier):
            if not lam > 0:
                raise ParameterOutOfRange(fam.value, "lambda", lam, "lambda > 0")
        elif fam is PolyFamily.Krawtchouk:
            if float(lam) != int(lam) or int(lam) < 1:
                raise ParameterOutOfRange(fam.value, "lambda", lam, "integer >= 1")
            object.__setattr__(self, "lam", int(lam))
            if self.p is None or not 0 < self.p < 1:
                raise ParameterOutOfRange(fam.value, "p", self.p, "(0, 1)")
        elif not lam > -0.5:
            raise ParameterOutOfRange(fam.value, "lambda", lam, "lambda > -1/2")

    @property
    def lam_exact(self) -> Fraction:
        return exact(self.lam)

    @property
    def p_exact(self) -> Fraction:
        return exact(self.p)

    @property
    def is_discrete(self) -> bool:
        return self.family in (PolyFamily.Charlier, PolyFamily.Krawtchouk)

    def with_lam(self, lam) -> "PolySystemId":
        return PolySystemId(self.family, lam, self.p)

    def reference(self) -> D.DistributionSpec:
        """The law Z_lambda the system is orthogonal for."""
        fam = self.family
        if fam is PolyFamily.Hermite:
            return D.normal(self.lam)
        if fam is PolyFamily.Laguerre:
            return D.gamma(self.lam)
        if fam is PolyFamily.Charlier:
            return D.poisson(self.lam)
        if fam is PolyFamily.Krawtchouk:
            return D.binomial(self.lam, self.p)
        return D.gegenbauer(self.lam)


def system(family, lam, p=None) -> PolySystemId:
    return PolySystemId(PolyFamily(family), lam, p)


@dataclass(frozen=True)
class MonicPoly:
    """Ascending coefficients with leading coefficient exactly one."""

    coeffs: tuple

    def __post_init__(self):
        if self.coeffs[-1] != 1:
            raise ValueError(f"leading coefficient {self.coeffs[-1]} is not 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def __call__(self, x):
        if isinstance(x, (Fraction, int)):
            return poly_eval(list(self.coeffs), x)
        return poly_eval(list(self.as_array()), np.asarray(x, dtype=float))

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.array([])
        return np.sort(np.roots(self.as_array()[::-1]).real)


@dataclass(frozen=True)
class AlphaValue:
    value: Fraction
    family: PolyFamily
    lam: object
    m: int
    p: object = None

    def __float__(self) -> float:
        return float(self.value)


# -- coefficient paths --------------------------------------------------------

def _hermite_recurrence(lam, m):
    prev, cur = None, [Fraction(1)]
    for k in range(m):
        nxt = poly_mul([Fraction(0), Fraction(1)], cur)
        if prev is not None:
            nxt = poly_add(nxt, poly_scale(prev, -lam * k))
        prev, cur = cur, nxt
    return cur


def _hermite_expansion(lam, m):
    # coefficient of t^m in exp(xt - lam t^2 / 2), times m!
    out = [Fraction(0)] * (m + 1)
    for j in range(m // 2 + 1):
        out[m - 2 * j] = Fraction(math.factorial(m), math.factorial(j) * math.factorial(m - 2 * j)) * (-lam / 2) ** j
    return out


def _laguerre_expansion(lam, m):
    # coefficient of t^m in (1+t)^-lam exp(xt/(1+t)), times m!
    return [math.comb(m, k) * (-1) ** (m - k) * rising(lam + k, m - k) for k in range(m + 1)]


def _laguerre_recurrence(lam, m):
    prev, cur = None, [Fraction(1)]
    for k in range(m):
        nxt = poly_mul([-(lam + 2 * k), Fraction(1)], cur)
        if prev is not None:
            nxt = poly_add(nxt, poly_scale(prev, -k * (lam + k - 1)))
        prev, cur = cur, nxt
    return cur


def _charlier_sum(lam, m):
    out = [Fraction(0)]
    for k in range(m + 1):
        out = poly_add(out, poly_scale(falling_poly(k), math.comb(m, k) * (-lam) ** (m - k)))
    return out


def _charlier_recurrence(lam, m):
    prev, cur = None, [Fraction(1)]
    for k in range(m):
        nxt = poly_mul([-(lam + k), Fraction(1)], cur)
        if prev is not None:
            nxt = poly_add(nxt, poly_scale(prev, -lam * k))
        prev, cur = cur, nxt
    return cur


def _krawtchouk_expansion(lam, p, m):
    # m! times coefficient of t^m in (1+qt)^x (1-pt)^(lam-x)
    q = 1 - p
    out = [Fraction(0)]
    for j in range(m + 1):
        lam_minus_x = [Fraction(1)]
        for i in range(m - j):
            lam_minus_x = poly_mul(lam_minus_x, [lam - i, Fraction(-1)])
        term = poly_mul(falling_poly(j), lam_minus_x)
        out = poly_add(out, poly_scale(term, math.comb(m, j) * q**j * (-p) ** (m - j)))
    return out


def _krawtchouk_recurrence(lam, p, m):
    q = 1 - p
    prev, cur = None, [Fraction(1)]
    for k in range(m):
        nxt = poly_mul([-(p * (lam - k) + k * q), Fraction(1)], cur)
        if prev is not None:
            nxt = poly_add(nxt, poly_scale(prev, -k * p * q * (lam - k + 1)))
        prev, cur = cur, nxt
    return cur


def _gegenbauer_beta(lam, k):
    # monic recurrence coefficient; k=1 simplified so lam=0 is regular
    if k == 1:
        return 1 / (2 * (lam + 1))
    return k * (k + 2 * lam - 1) / (4 * (k + lam) * (k + lam - 1))


def _gegenbauer_recurrence(lam, m):
    prev, cur = None, [Fraction(1)]
    for k in range(m):
        nxt = poly_mul([Fraction(0), Fraction(1)], cur)
        if prev is not None:
            nxt = poly_add(nxt, poly_scale(prev, -_gegenbauer_beta(lam, k)))
        prev, cur = cur, nxt
    return cur


def _gegenbauer_expansion(lam, m):
    out = [Fraction(0)] * (m + 1)
    for k in range(m // 2 + 1):
        c = Fraction((-1) ** k * math.factorial(m), math.factorial(k) * math.factorial(m - 2 * k) * 4**k)
        out[m - 2 * k] = c / rising(lam + m - k, k)
    return out


_PATHS = {
    PolyFamily.Hermite: (_hermite_recurrence, _hermite_expansion),
    PolyFamily.Laguerre: (_laguerre_expansion, _laguerre_recurrence),
    PolyFamily.Charlier: (_charlier_sum, _charlier_recurrence),
    PolyFamily.Gegenbauer: (_gegenbauer_recurrence, _gegenbauer_expansion),
}


def _raw_coeffs(sys: PolySystemId, m: int, alternate: bool = False):
    lam = sys.lam_exact
    if sys.family is PolyFamily.Krawtchouk:
        fn = _krawtchouk_recurrence if alternate else _krawtchouk_expansion
        return fn(lam, sys.p_exact, m)
    return _PATHS[sys.family][1 if alternate else 0](lam, m)


def _check_degree(sys: PolySystemId, m: int) -> None:
    if m < 0:
        raise ValueError("degree must be nonnegative")
    if sys.family is PolyFamily.Krawtchouk and m > sys.lam:
        raise DegreeTooLarge(f"Krawtchouk degree {m} exceeds lambda={sys.lam}")


def poly_coeffs(sys: PolySystemId, m: int, alternate: bool = False) -> MonicPoly:
    """Monic degree-``m`` polynomial of the system.

    ``alternate=True`` selects the second, independent coefficient path
    (recurrence where the default is an expansion and vice versa).
    """
    _check_degree(sys, m)
    coeffs = list(_raw_coeffs(sys, m, alternate))
    coeffs += [Fraction(0)] * (m + 1 - len(coeffs))
    return MonicPoly(tuple(coeffs))


def poly_eval_sys(sys: PolySystemId, m: int, x):
    return poly_coeffs(sys, m)(x)


def alpha_closed_form(sys: PolySystemId, m: int) -> AlphaValue:
    _check_degree(sys, m)
    lam = sys.lam_exact
    fam = sys.family
    if fam in (PolyFamily.Hermite, PolyFamily.Charlier):
        val = lam**m
    elif fam is PolyFamily.Laguerre:
        val = rising(lam, m)
    elif fam is PolyFamily.Krawtchouk:
        p = sys.p_exact
        val = falling(lam, m) * (p * (1 - p)) ** m
    else:
        # (2 lam)^(m) / (lam)^(m) written so that lam = 0 stays finite
        ratio = Fraction(1)
        if m >= 1:
            ratio = Fraction(2)
            for i in range(1, m):
                ratio *= (2 * lam + i) / (lam + i)
        val = ratio / (4**m * rising(lam + 1, m))
    return AlphaValue(val, fam, sys.lam, m, sys.p)


def orthopoly_from_moments(dist: D.DistributionSpec, m: int) -> MonicPoly:
    """Monic degree-``m`` orthogonal polynomial by Gram-Schmidt on moments.

    Runs in exact arithmetic on the analytic moments, so a zero norm is
    detected exactly (support on fewer than ``m + 1`` points).
    """
    mu = [D.analytic_moment(dist, k, exact_arith=True) for k in range(2 * m + 1)]

    def inner(a, b):
        return sum((ai * bj * mu[i + j] for i, ai in enumerate(a) for j, bj in enumerate(b)), Fraction(0))

    basis, norms = [], []
    for k in range(m + 1):
        xk = [Fraction(0)] * k + [Fraction(1)]
        pk = list(xk)
        for pj, nj in zip(basis, norms):
            pk = poly_add(pk, poly_scale(pj, -inner(xk, pj) / nj))
        pk += [Fraction(0)] * (k + 1 - len(pk))
        if k < m:
            nk = inner(pk, pk)
            if nk == 0:
                raise SingularMomentMatrix(f"{dist} is supported on {k + 1} points; degree {m} impossible")
            basis.append(pk)
            norms.append(nk)
        else:
            return MonicPoly(tuple(pk))
    raise AssertionError("unreachable")


def _expect_poly_product(sys: PolySystemId, fn, exact_arith: bool):
    z = sys.reference()
    if exact_arith and sys.family is PolyFamily.Krawtchouk:
        return D.expect(z, fn, exact_arith=True)
    return D.expect(z, fn)


def alpha_numeric(sys: PolySystemId, m: int) -> float:
    """(1/m!) E[P^m(Z)]^2 by quadrature or lattice summation."""
    poly = poly_coeffs(sys, m)
    val = _expect_poly_product(sys, lambda x: poly(x) ** 2, False)
    return float(val) / math.factorial(m)


def orthogonality_residuals(sys: PolySystemId, m_max: int) -> np.ndarray:
    """R[j, k] = E[Z^j P^k(Z)] / k! - alpha_k delta_jk for j <= k <= m_max.

    Binomial weights are summed exactly; other families use quadrature or
    truncated summation. Entries below the diagonal are zero.
    """
    if m_max > 8:
        raise ValueError("m_max must be at most 8")
    if sys.family is PolyFamily.Krawtchouk:
        m_max = min(m_max, sys.lam)
    exact_path = sys.family is PolyFamily.Krawtchouk
    R = np.zeros((m_max + 1, m_max + 1))
    for k in range(m_max + 1):
        poly = poly_coeffs(sys, k)
        alpha = alpha_closed_form(sys, k).value
        for j in range(k + 1):
            if exact_path:
                val = _expect_poly_product(sys, lambda x, j=j: x**j * poly(x), True) / math.factorial(k)
                R[j, k] = float(val - (alpha if j == k else 0))
            else:
                val = D.expect(sys.reference(), lambda x, j=j: x**j * poly(x)) / math.factorial(k)
                R[j, k] = val - (float(alpha) if j == k else 0.0)
    return R


# -- generating functions -----------------------------------------------------

def generating_function(sys: PolySystemId, x, t, lam=None):
    """Closed-form generating function sum_m P^m(x) t^m / m!.

    Not available for the Gegenbauer system.
    """
    lam = float(sys.lam if lam is None else lam)
    x = np.asarray(x, dtype=float)
    fam = sys.family
    if fam is PolyFamily.Hermite:
        return np.exp(x * t - 0.5 * lam * t * t)
    if fam is PolyFamily.Laguerre:
        return (1 + t) ** (-lam) * np.exp(x * t / (1 + t))
    if fam is PolyFamily.Charlier:
        return np.exp(-lam * t) * (1 + t) ** x
    if fam is PolyFamily.Krawtchouk:
        p = float(sys.p)
        return (1 + (1 - p) * t) ** x * (1 - p * t) ** (lam - x)
    raise NotImplementedError("no closed generating function for the Gegenbauer system")


def _series(sys: PolySystemId, x, t, M: int, lam=None):
    sub = sys if lam is None else sys.with_lam(lam)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for m in range(M + 1):
        coeffs = [float(c) for c in _raw_coeffs(sub, m)]
        total = total + poly_eval(coeffs, x) * t**m / math.factorial(m)
    return total


@dataclass
class GenFnReport:
    system: PolySystemId
    series_residual: float | None
    multiplicative_residual: float | None
    alpha_residual: float
    tolerance: float = 1e-8
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        vals = [v for v in (self.series_residual, self.multiplicative_residual, self.alpha_residual) if v is not None]
        return all(v < self.tolerance for v in vals)

    @property
    def multiplicative_status(self) -> str:
        return "NotApplicable" if self.multiplicative_residual is None else (
            "pass" if self.multiplicative_residual < self.tolerance else "fail")


def _split_lambda(sys: PolySystemId, n: int):
    if sys.family is PolyFamily.Krawtchouk:
        if sys.lam < n:
            raise ValueError(f"cannot split lambda={sys.lam} into {n} positive integers")
        base, extra = divmod(sys.lam, n)
        return [base + (1 if i < extra else 0) for i in range(n)]
    return [sys.lam_exact / n] * n


def gen_fn_checks(sys: PolySystemId, x_points: Sequence[float], t_points: Sequence[float],
                  n_summands: int = 3, M: int = MAX_TRUNCATION) -> GenFnReport:
    """Truncated-series, multiplicativity and alpha-series checks.

    (a) sum_{m<=M} P^m(x) t^m/m! against the closed generating function;
    (b) phi_t(x_1+...+x_n, sum lam_i) = prod phi_t(x_i, lam_i) with both
    sides as truncated series; (c) E[phi_t(Z)]^2 by quadrature against
    sum_m alpha_m t^(2m)/m!. Gegenbauer has no closed generating function
    and is not closed under addition, so (a) and (b) are reported as None.
    """
    if M > MAX_TRUNCATION:
        raise TruncationInsufficient(f"truncation order {M} exceeds {MAX_TRUNCATION}")
    ts = [float(t) for t in t_points]
    xs = np.asarray(x_points, dtype=float)
    if any(abs(t) > MAX_ABS_T for t in ts):
        raise TruncationInsufficient(f"|t| must be at most {MAX_ABS_T}")
    # tail bound from the first omitted term
    nxt = np.abs(poly_eval([float(c) for c in _raw_coeffs(sys, M + 1)], xs)).max()
    tmax = max(abs(t) for t in ts)
    if nxt * tmax ** (M + 1) / math.factorial(M + 1) > 1e-10:
        raise TruncationInsufficient("omitted series tail exceeds 1e-10 at the requested points")

    notes = []
    gegen = sys.family is PolyFamily.Gegenbauer
    series_res = None
    mult_res = None
    if not gegen:
        series_res = max(
            float(np.max(np.abs(_series(sys, xs, t, M) - generating_function(sys, xs, t)))) for t in ts
        )
        lams = _split_lambda(sys, n_summands)
        weights = np.arange(1, n_summands + 1, dtype=float)
        weights /= weights.sum()
        worst = 0.0
        for x in xs:
            parts = x * weights
            for t in ts:
                lhs = float(_series(sys, [x], t, M)[0])
                rhs = 1.0
                for xi, li in zip(parts, lams):
                    rhs *= float(_series(sys, [xi], t, M, lam=li)[0])
                worst = max(worst, abs(lhs - rhs))
        mult_res = worst
    else:
        notes.append("series and multiplicativity checks NotApplicable for Gegenbauer")

    z = sys.reference()
    top = min(M, sys.lam) if sys.family is PolyFamily.Krawtchouk else M
    alpha_res = 0.0
    for t in ts:
        if gegen:
            num = D.expect(z, lambda x: _series(sys, x, t, top) ** 2)
        else:
            num = D.expect(z, lambda x: generating_function(sys, x, t) ** 2)
        series = math.fsum(float(alpha_closed_form(sys, m).value) * t ** (2 * m) / math.factorial(m)
                           for m in range(top + 1))
        alpha_res = max(alpha_res, abs(num - series))
    return GenFnReport(sys, series_res, mult_res, alpha_res, notes=tuple(notes))


# -- alpha table --------------------------------------------------------------

ALPHA_TABLE_COLUMNS = ("family", "lambda", "p", "m", "alpha_closed", "alpha_numeric", "abs_err")


def alpha_table(systems: Sequence[PolySystemId], m_max: int) -> list[dict]:
    rows = []
    for sys in systems:
        top = min(m_max, sys.lam) if sys.family is PolyFamily.Krawtchouk else m_max
        for m in range(top + 1):
            closed = float(alpha_closed_form(sys, m).value)
            numeric = alpha_numeric(sys, m)
            rows.append({
                "family": sys.family.value,
                "lambda": sys.lam,
                "p": "" if sys.p is None else sys.p,
                "m": m,
                "alpha_closed": closed,
                "alpha_numeric": numeric,
                "abs_err": abs(closed - numeric),
            })
    return rows


def write_alpha_table(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=ALPHA_TABLE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
