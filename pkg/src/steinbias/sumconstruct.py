"""Transforms of sums by replacing randomly chosen summands.

For a family Z_lambda closed under independent addition whose generating
function factors over summands, the order-m transform of W = X_1 + ... + X_n
(each X_i matching the first 2m moments of Z_{lambda_i}) is obtained by
drawing a composition I of m with

    P(I = m) = multinomial(m; m_1..m_n) * prod alpha^(m_i)_{lambda_i} / alpha^(m)_lambda

and replacing each X_i by its own order-I_i transform.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import distributions as D
from . import biastransform as BT
from ._exact import exact, multinomial, poly_eval
from .errors import (
    FamilyNotClosed,
    MembershipViolated,
    OrderViolated,
    SizeOverflow,
)
from .orthopoly import PolyFamily, PolySystemId, _raw_coeffs, alpha_closed_form, poly_coeffs, system

MAX_COMPOSITIONS = 10**7


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple

    @property
    def total(self) -> int:
        return sum(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __str__(self) -> str:
        return ";".join(str(e) for e in self.entries)


def enumerate_multi_indices(n: int, m: int) -> list[MultiIndex]:
    """All compositions of ``m`` into ``n`` nonnegative parts, colex order."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    count = math.comb(n + m - 1, m)
    if count > MAX_COMPOSITIONS:
        raise SizeOverflow(f"{count} compositions exceed the limit {MAX_COMPOSITIONS}")

    def rec(k, total):
        if k == 1:
            yield (total,)
            return
        for last in range(total + 1):
            for head in rec(k - 1, total - last):
                yield head + (last,)

    return [MultiIndex(c) for c in rec(n, m)]


def _closed_family(family) -> PolyFamily:
    fam = PolyFamily(family)
    if fam is PolyFamily.Gegenbauer:
        raise FamilyNotClosed("Gegenbauer laws are not closed under independent addition")
    return fam


def _summand_alpha(fam: PolyFamily, lam, k: int, p) -> Fraction:
    if fam is PolyFamily.Krawtchouk and k > int(lam):
        return Fraction(0)
    return alpha_closed_form(system(fam, lam, p), k).value


def _total_lam(lams):
    return sum((exact(v) for v in lams), Fraction(0))


def _lam_value(total: Fraction):
    return int(total) if total.denominator == 1 else float(total)


@dataclass
class IndexDistribution:
    compositions: list
    probabilities: list
    family: PolyFamily
    lams: tuple
    m: int
    p: object = None

    @property
    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.probabilities])

    def as_dict(self) -> dict:
        return {c.entries: pr for c, pr in zip(self.compositions, self.probabilities)}

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Composition indices drawn by cumulative-probability inversion."""
        cum = np.cumsum(self.floats)
        idx = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        return np.minimum(idx, len(self.compositions) - 1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["composition", "probability", "exact"])
            for c, pr in zip(self.compositions, self.probabilities):
                w.writerow([str(c), repr(float(pr)), str(pr) if isinstance(pr, Fraction) else ""])


def index_distribution(family, lams: Sequence, m: int, p=None) -> IndexDistribution:
    """Law of the replacement pattern from the general weight formula."""
    fam = _closed_family(family)
    lams = tuple(lams)
    comps = enumerate_multi_indices(len(lams), m)
    total = _lam_value(_total_lam(lams))
    denom = alpha_closed_form(system(fam, total, p), m).value
    probs = []
    for c in comps:
        num = Fraction(multinomial(c.entries))
        for lam, k in zip(lams, c.entries):
            num *= _summand_alpha(fam, lam, k, p)
        probs.append(num / denom)
    return IndexDistribution(comps, probs, fam, lams, m, p)


def index_distribution_closed_form(family, lams: Sequence, m: int, p=None) -> IndexDistribution:
    """Multinomial or multivariate hypergeometric form of the same law."""
    fam = _closed_family(family)
    lams = tuple(exact(v) for v in lams)
    lam = sum(lams, Fraction(0))
    comps = enumerate_multi_indices(len(lams), m)
    probs = []
    for c in comps:
        if fam in (PolyFamily.Hermite, PolyFamily.Charlier):
            pr = Fraction(multinomial(c.entries))
            for li, k in zip(lams, c.entries):
                pr *= (li / lam) ** k
        elif fam is PolyFamily.Laguerre:
            pr = Fraction(1)
            for li, k in zip(lams, c.entries):
                pr *= _gen_binom(li + k - 1, k)
            pr /= _gen_binom(lam + m - 1, m)
        else:
            pr = Fraction(1)
            for li, k in zip(lams, c.entries):
                pr *= math.comb(int(li), k)
            pr /= math.comb(int(lam), m)
        probs.append(pr)
    return IndexDistribution(comps, probs, fam, tuple(lams), m, p)


def _gen_binom(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= (a - i)
    return out / math.factorial(k)


def verify_alpha_identity(family, lams: Sequence, m: int, p=None) -> tuple[float, float]:
    """Relative residuals of the two alpha identities.

    First: alpha_lambda = sum_m c_m alpha_m. Second: alpha_lambda =
    sum_m c_m^2 / multinomial(m; m) alpha_m. Both are computed in exact
    arithmetic, so the residuals are 0 when the identities hold.
    """
    fam = _closed_family(family)
    lams = tuple(lams)
    total = _lam_value(_total_lam(lams))
    lhs = alpha_closed_form(system(fam, total, p), m).value
    s1 = s2 = Fraction(0)
    for c in enumerate_multi_indices(len(lams), m):
        coef = Fraction(multinomial(c.entries))
        a = Fraction(1)
        for lam, k in zip(lams, c.entries):
            a *= _summand_alpha(fam, lam, k, p)
        s1 += coef * a
        s2 += coef**2 / multinomial(c.entries) * a
    return float(abs(lhs - s1) / abs(lhs)), float(abs(lhs - s2) / abs(lhs))


def verify_polynomial_identity(family, lams: Sequence, m: int, p=None, points=None) -> Fraction:
    """Max |P_lambda(x_1+..+x_n) - sum_m c_m prod P_{lambda_i}(x_i)| over
    rational test points, exactly.

    Krawtchouk degrees above lambda_i use the generating-function
    polynomial, which vanishes on {0..lambda_i}.
    """
    fam = _closed_family(family)
    lams = tuple(lams)
    n = len(lams)
    total = _lam_value(_total_lam(lams))
    big = poly_coeffs(system(fam, total, p), m)
    if points is None:
        points = [tuple(Fraction(3 * i + j, 7 + j) - 1 for j in range(n)) for i in range(5)]
    polys = {}
    worst = Fraction(0)
    comps = enumerate_multi_indices(n, m)
    for x in points:
        x = tuple(exact(v) for v in x)
        rhs = Fraction(0)
        for c in comps:
            term = Fraction(multinomial(c.entries))
            for i, k in enumerate(c.entries):
                key = (i, k)
                if key not in polys:
                    polys[key] = list(_raw_coeffs(system(fam, lams[i], p), k))
                term *= poly_eval(polys[key], x[i])
            rhs += term
        worst = max(worst, abs(big(sum(x, Fraction(0))) - rhs))
    return worst


# -- summands -----------------------------------------------------------------

@dataclass
class SummandSet:
    """Independent summands X_i, each matching Z_{lambda_i} in 2m moments.

    ``transforms`` may map a summand index to a callable
    ``(k, n, stream) -> array`` supplying draws of its order-k transform;
    otherwise transforms are built automatically.
    """

    dists: tuple
    lams: tuple
    m: int
    p: object = None
    transforms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dists = tuple(self.dists)
        self.lams = tuple(self.lams)
        if len(self.dists) != len(self.lams) or not self.dists:
            raise ValueError("need one lambda per summand and at least one summand")


def reference_summands(family, lams: Sequence, m: int, p=None) -> SummandSet:
    dists = tuple(system(family, lam, p).reference() for lam in lams)
    return SummandSet(dists, tuple(lams), m, p)


def check_membership(summands: SummandSet, family) -> None:
    """Raise MembershipViolated unless every summand matches its reference
    law in the first 2m moments (exact where possible, else to 1e-9)."""
    fam = PolyFamily(family)
    for i, (dist, lam) in enumerate(zip(summands.dists, summands.lams)):
        ref = system(fam, lam, summands.p).reference()
        if dist == ref:
            continue
        for j in range(1, 2 * summands.m + 1):
            a = D.analytic_moment(dist, j)
            b = D.analytic_moment(ref, j)
            if abs(a - b) > 1e-9 * max(1.0, abs(b)):
                raise MembershipViolated(
                    f"summand {i}: E X^{j} = {a:.6g} but the reference law has {b:.6g}")


class _SummandTransformer:
    """Order-k transform draws for one summand, prepared lazily."""

    def __init__(self, dist, sys: PolySystemId, user: Callable | None):
        self.dist = dist
        self.sys = sys
        self.user = user
        self._cache = {}

    def prepared(self, k: int):
        if k not in self._cache:
            if self.dist == self.sys.reference():
                law = BT.closed_form_transform(self.sys, k)
                self._cache[k] = lambda n, rng, law=law: D.draw(law, n, rng)
            elif self.dist.is_lattice and self.sys.is_discrete:
                bf, alpha = BT.transform_for_system(self.dist, self.sys, k)
                pmf = BT.discrete_transform_pmf(self.dist, bf, alpha)
                self._cache[k] = pmf.draw
            else:
                bf, alpha = BT.transform_for_system(self.dist, self.sys, k)
                tr = BT.prepare_transform(self.dist, bf, alpha)
                self._cache[k] = tr.sampler
        return self._cache[k]

    def draw(self, k: int, n: int, stream: D.RandomStream) -> np.ndarray:
        if k == 0:
            return D.draw(self.dist, n, stream.generator())
        if self.user is not None:
            return np.asarray(self.user(k, n, stream), dtype=float)
        return self.prepared(k)(n, stream.generator())

    def pmf(self, k: int) -> dict:
        if k == 0:
            pts, probs = D.lattice_pmf(self.dist)
            return {int(a): float(b) for a, b in zip(pts, probs)}
        if self.dist == self.sys.reference():
            law = BT.closed_form_transform(self.sys, k)
            pts, probs = D.lattice_pmf(law)
            return {int(a): float(b) for a, b in zip(pts, probs)}
        bf, alpha = BT.transform_for_system(self.dist, self.sys, k)
        return BT.discrete_transform_pmf(self.dist, bf, alpha).as_dict()


def _transformers(summands: SummandSet, fam: PolyFamily):
    return [
        _SummandTransformer(d, system(fam, lam, summands.p), summands.transforms.get(i))
        for i, (d, lam) in enumerate(zip(summands.dists, summands.lams))
    ]


def sample_sum_transformed(summands: SummandSet, family, m: int, n: int,
                           stream: D.RandomStream) -> D.SampleBatch:
    """Draws of W^(m) = sum_i (X_i)^(I_i) with I from the index law.

    The index draws use ``stream.child(0)``; summand i under composition c
    uses ``stream.child(1, i, c)``, so every draw has its own substream.
    """
    fam = _closed_family(family)
    if m > summands.m:
        raise OrderViolated(f"order {m} exceeds the membership order {summands.m}")
    check_membership(summands, fam)
    law = index_distribution(fam, summands.lams, m, summands.p)
    which = law.draw(n, stream.child(0).generator())
    trs = _transformers(summands, fam)
    out = np.zeros(n)
    for ci in np.unique(which):
        sel = np.flatnonzero(which == ci)
        comp = law.compositions[ci]
        for i, k in enumerate(comp.entries):
            out[sel] += trs[i].draw(k, sel.size, stream.child(1, i, int(ci)))
    return D.SampleBatch(out, f"sum-{fam.value}^({m})", stream.seed, stream.stream)


def _convolve(a: dict, b: dict) -> dict:
    out = {}
    for x, px in a.items():
        for y, py in b.items():
            out[x + y] = out.get(x + y, 0.0) + px * py
    return out


def sum_transformed_pmf(summands: SummandSet, family, m: int) -> dict:
    """Exact-summation pmf of the replacement construction on lattices."""
    fam = _closed_family(family)
    check_membership(summands, fam)
    law = index_distribution(fam, summands.lams, m, summands.p)
    trs = _transformers(summands, fam)
    total = {}
    for comp, pr in zip(law.compositions, law.probabilities):
        if pr == 0:
            continue
        acc = {0: 1.0}
        for i, k in enumerate(comp.entries):
            acc = _convolve(acc, trs[i].pmf(k))
        for x, v in acc.items():
            total[x] = total.get(x, 0.0) + float(pr) * v
    return total


def aggregated_transform(summands: SummandSet, family, m: int):
    """Direct order-m transform of W for reference summands: the closed
    form for Z_{sum lambda}."""
    fam = _closed_family(family)
    total = _lam_value(_total_lam(summands.lams))
    return BT.closed_form_transform(system(fam, total, summands.p), m)


# -- iterated transforms ------------------------------------------------------

def shifted_lambda(family, lam, k: int):
    fam = PolyFamily(family)
    if fam in (PolyFamily.Hermite, PolyFamily.Charlier):
        return lam
    if fam in (PolyFamily.Laguerre, PolyFamily.Gegenbauer):
        return lam + k
    return lam - k


@dataclass
class MomentRow:
    order: int
    sample_mean: float
    stderr: float
    analytic: float
    z: float
    passed: bool


@dataclass
class IteratedReport:
    family: PolyFamily
    lam: object
    m: int
    k: int
    j: int
    mu: object
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def eligible(self) -> bool:
        """Whether a further order-j transform is covered."""
        return self.passed and self.k + self.j <= self.m


def moment_rows(values: np.ndarray, target: D.DistributionSpec, orders) -> list[MomentRow]:
    rows = []
    n = values.size
    for q in orders:
        pw = values**q
        mean = float(pw.mean())
        se = float(pw.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        ref = float(D.analytic_moment(target, q))
        if se > 0:
            z = (mean - ref) / se
            ok = abs(z) <= 4
        else:
            z = 0.0 if abs(mean - ref) <= 1e-9 * max(1.0, abs(ref)) else math.inf
            ok = z == 0.0
        rows.append(MomentRow(q, mean, se, ref, z, ok))
    return rows


def iterated_bias_check(family, lam, m: int, k: int, j: int, n: int, stream: D.RandomStream,
                        p=None) -> IteratedReport:
    """Sample X^(k) of Z_lambda by the general construction (or the exact
    discrete solver) and test its first 2(m-k) moments against Z_mu."""
    if k < 0 or j < 0 or k + j > m:
        raise OrderViolated(f"k={k}, j={j} exceeds m={m}")
    sys = system(family, lam, p)
    dist = sys.reference()
    bf, alpha = BT.transform_for_system(dist, sys, k)
    if sys.is_discrete:
        values = BT.discrete_transform_pmf(dist, bf, alpha).draw(n, stream.generator())
    else:
        values = BT.sample_transformed(dist, bf, alpha, n, stream).values
    mu = shifted_lambda(sys.family, sys.lam, k)
    if sys.family is PolyFamily.Krawtchouk and mu == 0:
        target = D.atoms([0])
    else:
        target = sys.with_lam(mu).reference()
    rows = moment_rows(np.asarray(values, dtype=float), target, range(1, 2 * (m - k) + 1))
    return IteratedReport(sys.family, lam, m, k, j, mu, rows)
