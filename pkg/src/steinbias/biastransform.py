"""The X-P biased transformation.

Given X and a biasing function P with m sign changes (positive on the
rightmost interval) whose first m moments E[X^k P(X)] vanish, the
transformed variable X^(P) satisfies

    E[P(X) F(X)] = alpha * E[F^(m)(X^(P))],   alpha = E[X^m P(X)] / m!.

It is built as

    X^(P) = sum_{k=1}^{m+1} (U_k ... U_m) (r_{k-1} - r_k)

with r_0 = Y, r_{m+1} = 0, r_1..r_m the sign-change points of P, U_i
independent with cdf u^i on [0, 1], and Y drawn from the tilted law
Q(y) P(y) / (m! alpha) dmu_X(y), where Q(y) = prod (y - r_i).

Integer-valued X also admit a discrete transform with the m-fold forward
difference in place of the derivative; :func:`discrete_transform_pmf`
solves for it exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_legendre

from . import distributions as D
from ._exact import exact, poly_eval
from .errors import (
    DegreeTooLarge,
    NegativeMass,
    NonPositiveAlpha,
    OrthogonalityViolated,
    PreconditionViolated,
    SignStructureMismatch,
    SingularSystem,
    YSamplerFailure,
)
from .orthopoly import MonicPoly, PolyFamily, PolySystemId, alpha_closed_form, poly_coeffs

ORTHOGONALITY_TOL = 1e-8
REJECTION_MAX_BOUND = 64.0
_ROOT_CLUSTER_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BiasingFunction:
    """A biasing function with its sign-change points.

    Build with :meth:`polynomial`, :meth:`sign` or :meth:`general`. ``func``
    accepts numpy arrays. ``breakpoints`` lists where P is not smooth so
    quadrature can split there.
    """

    kind: str
    func: Callable
    roots: tuple
    breakpoints: tuple = ()
    coeffs: tuple | None = None
    levels: tuple | None = None
    description: str = ""

    @property
    def order(self) -> int:
        return len(self.roots)

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def q(self, x):
        """Monic root polynomial prod (x - r_i); 1 when there are no roots."""
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for r in self.roots:
            out = out * (x - r)
        return out

    @property
    def exact_coeffs(self):
        if self.coeffs is None:
            return None
        if all(isinstance(c, (int, Fraction)) for c in self.coeffs):
            return tuple(Fraction(c) for c in self.coeffs)
        return None

    @classmethod
    def polynomial(cls, coeffs, description: str = "") -> "BiasingFunction":
        """Polynomial P from ascending coefficients (any positive scale)."""
        if isinstance(coeffs, MonicPoly):
            coeffs = coeffs.coeffs
        coeffs = tuple(coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        fc = np.array([float(c) for c in coeffs])
        if fc[-1] < 0:
            raise SignStructureMismatch("polynomial is negative on its rightmost interval")
        roots = _odd_real_roots(fc)
        return cls("polynomial", lambda x, fc=list(fc): poly_eval(fc, x), tuple(roots),
                   coeffs=coeffs, description=description or f"poly{tuple(float(c) for c in coeffs)}")

    @classmethod
    def sign(cls, breakpoints: Sequence[float], levels: Sequence[float], roots=None,
             description: str = "") -> "BiasingFunction":
        """Piecewise-constant P: ``levels[i]`` on the open interval between
        consecutive breakpoints, value 0 at the breakpoints themselves.

        Sign changes across a run of zero levels get the midpoint of that
        run as root unless ``roots`` overrides it (any point of the closed
        zero run is allowed).
        """
        bps = tuple(float(b) for b in breakpoints)
        lv = tuple(float(v) for v in levels)
        if len(lv) != len(bps) + 1 or list(bps) != sorted(bps):
            raise ValueError("need sorted breakpoints and one more level than breakpoints")
        edges = (-math.inf,) + bps + (math.inf,)
        nonzero = [i for i, v in enumerate(lv) if v != 0]
        if not nonzero or lv[nonzero[-1]] < 0:
            raise SignStructureMismatch("sign function is not positive on its rightmost interval")
        auto, windows = [], []
        for a, b in zip(nonzero[:-1], nonzero[1:]):
            if (lv[a] > 0) != (lv[b] > 0):
                lo, hi = edges[a + 1], edges[b]
                auto.append(0.5 * (lo + hi))
                windows.append((lo, hi))
        if roots is None:
            roots = auto
        else:
            roots = [float(r) for r in roots]
            if len(roots) != len(auto):
                raise SignStructureMismatch(f"{len(roots)} roots given for {len(auto)} sign changes")
            for r, (lo, hi) in zip(roots, windows):
                if not lo <= r <= hi:
                    raise SignStructureMismatch(f"root {r} outside the zero run [{lo}, {hi}]")

        bp_arr = np.array(bps)
        lv_arr = np.array(lv)

        def func(x):
            x = np.asarray(x, dtype=float)
            idx = np.searchsorted(bp_arr, x, side="left")
            out = lv_arr[idx]
            if bp_arr.size:
                on_bp = np.isin(x, bp_arr)
                out = np.where(on_bp, 0.0, out)
            return out

        return cls("sign", func, tuple(roots), breakpoints=bps, levels=lv,
                   description=description or f"sign(bp={bps}, levels={lv})")

    @classmethod
    def general(cls, func: Callable, roots: Sequence[float] = (), breakpoints: Sequence[float] = (),
                description: str = "") -> "BiasingFunction":
        """Arbitrary measurable P with user-declared sign-change points."""
        return cls("general", func, tuple(float(r) for r in roots), tuple(float(b) for b in breakpoints),
                   description=description or getattr(func, "__name__", "general"))


def _odd_real_roots(fc: np.ndarray) -> list[float]:
    if len(fc) <= 1:
        return []
    raw = np.roots(fc[::-1])
    scale = max(1.0, float(np.max(np.abs(raw))))
    real = np.sort(raw[np.abs(raw.imag) <= 1e-7 * scale].real)
    out = []
    i = 0
    while i < len(real):
        j = i
        while j + 1 < len(real) and abs(real[j + 1] - real[i]) <= _ROOT_CLUSTER_TOL * scale:
            j += 1
        if (j - i + 1) % 2 == 1:
            out.append(float(np.mean(real[i:j + 1])))
        i = j + 1
    return out


def size_bias_function() -> BiasingFunction:
    return BiasingFunction.general(lambda x: np.maximum(x, 0.0), (), (0.0,), "x+")


def zero_bias_function() -> BiasingFunction:
    return BiasingFunction.polynomial((0, 1), "x")


def as_biasing_function(P) -> BiasingFunction:
    if isinstance(P, BiasingFunction):
        return P
    if isinstance(P, MonicPoly) or isinstance(P, (list, tuple, np.ndarray)):
        return BiasingFunction.polynomial(P)
    raise TypeError(f"cannot interpret {P!r} as a biasing function")


def _moment_against(dist: D.DistributionSpec, bf: BiasingFunction, k: int):
    """E[X^k P(X)], exactly for polynomial P with exact coefficients."""
    ec = bf.exact_coeffs
    if ec is not None:
        return sum((c * D.analytic_moment(dist, i + k, exact_arith=True) for i, c in enumerate(ec)), Fraction(0))
    if bf.kind == "polynomial":
        return math.fsum(float(c) * D.analytic_moment(dist, i + k) for i, c in enumerate(bf.coeffs))
    return D.expect(dist, lambda x: x**k * bf(x), breakpoints=bf.breakpoints)


def _verify_general_sign(dist: D.DistributionSpec, bf: BiasingFunction) -> None:
    lo, hi = D.truncation_bounds(dist)
    if dist.is_discrete:
        grid = D.lattice_pmf(dist)[0].astype(float)
    else:
        grid = np.linspace(lo, hi, 4001)
    qp = bf.q(grid) * np.asarray(bf(grid), dtype=float)
    scale = max(1.0, float(np.max(np.abs(qp))))
    if np.any(qp < -1e-12 * scale):
        bad = grid[np.argmax(qp < -1e-12 * scale)]
        raise SignStructureMismatch(f"Q*P < 0 at x={bad}: declared roots do not match P")


def make_biasing_function(dist: D.DistributionSpec, P, m: int):
    """Validate P for ``dist`` and return ``(BiasingFunction, alpha)``.

    Checks that P has ``m`` sign changes, that E[X^k P(X)] vanishes for
    k < m (absolute tolerance 1e-8 * max(1, alpha)) and that alpha > 0.
    ``alpha`` is a Fraction when the computation was exact.
    """
    bf = as_biasing_function(P)
    if bf.order != m:
        raise SignStructureMismatch(f"P has {bf.order} sign changes, claimed order {m}")
    if bf.kind == "general":
        _verify_general_sign(dist, bf)
    mom = [_moment_against(dist, bf, k) for k in range(m + 1)]
    alpha = mom[m] / math.factorial(m)
    tol = ORTHOGONALITY_TOL * max(1.0, abs(float(alpha)))
    for k in range(m):
        if abs(float(mom[k])) > tol:
            raise OrthogonalityViolated(k, float(mom[k]))
    if float(alpha) <= 0:
        raise NonPositiveAlpha(f"alpha = {float(alpha)} is not positive")
    return bf, alpha


# -- the Y sampler ------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = roots_legendre(6)


def _prob_space_cells(dist: D.DistributionSpec, cuts: Sequence[float]):
    """Cells in probability space for the lower and upper halves.

    Lower cells live in u = F(x), upper cells in c = 1 - F(x), so that the
    far upper tail keeps full precision.
    """
    geo = np.geomspace(1e-20, 1e-2, 361)
    lin = np.linspace(1e-2, 0.5, 3001)
    base = np.unique(np.concatenate([geo, lin]))
    lower, upper = [base], [base]
    for b in cuts:
        u = float(dist.scipy.cdf(b))
        c = float(dist.scipy.sf(b))
        if 1e-20 < u < 0.5:
            lower.append([u])
        if 1e-20 < c < 0.5:
            upper.append([c])
    return np.unique(np.concatenate(lower)), np.unique(np.concatenate(upper))


class _YSampler:
    """Draws from the tilted law w(y) dmu_X(y) with w = Q P / (m! alpha)."""

    def __init__(self, dist: D.DistributionSpec, bf: BiasingFunction, alpha: float):
        self.dist = dist
        self.bf = bf
        self.alpha = float(alpha)
        self.norm = math.factorial(bf.order) * self.alpha
        if dist.is_discrete:
            self._init_atoms()
            return
        lo, hi = D.truncation_bounds(dist, 1e-20)
        grid = np.linspace(lo, hi, 4001)
        extras = [c for c in (*bf.roots, *bf.breakpoints) if lo < c < hi]
        grid = np.unique(np.concatenate([grid, extras, np.nextafter(extras, np.inf), np.nextafter(extras, -np.inf)]))
        bound = 1.5 * float(np.max(self.w(grid)))
        if bound <= REJECTION_MAX_BOUND:
            self.method = "rejection"
            self.bound = bound
        else:
            self.method = "inversion"
            self._init_inversion()

    def w(self, y):
        return self.bf.q(y) * np.asarray(self.bf(y), dtype=float) / self.norm

    def _init_atoms(self):
        self.method = "atoms"
        pts, probs = D.lattice_pmf(self.dist)
        weights = np.asarray(probs, dtype=float) * self.w(pts)
        weights = np.where(weights < 0, 0.0, weights)
        total = weights.sum()
        if not abs(total - 1.0) < 1e-6:
            raise YSamplerFailure(f"tilted atom weights sum to {total}, expected 1")
        self.points = pts.astype(float)
        self.probs = weights / total

    def _init_inversion(self):
        dist = self.dist
        cuts = [c for c in (*self.bf.roots, *self.bf.breakpoints)]
        lower, upper = _prob_space_cells(dist, cuts)
        self.sides = []
        total = 0.0
        for nodes, inv in ((lower, dist.ppf), (upper, dist.isf)):
            a, b = nodes[:-1], nodes[1:]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            vals = self.w(inv(pts))
            masses = np.clip((vals * _GL_WEIGHTS[None, :]).sum(axis=1) * half, 0.0, None)
            self.sides.append((a, b, masses, inv))
            total += masses.sum()
        if not abs(total - 1.0) < 1e-4:
            raise YSamplerFailure(f"tilted measure has mass {total}, expected 1")
        self.total = total

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.method == "atoms":
            return self.points[rng.choice(len(self.points), size=n, p=self.probs)]
        if self.method == "rejection":
            return self._draw_rejection(n, rng)
        return self._draw_inversion(n, rng)

    def _draw_rejection(self, n, rng):
        out = np.empty(n)
        filled = 0
        for _ in range(10_000):
            need = n - filled
            if need == 0:
                return out
            batch = int(need * self.bound * 1.2) + 64
            x = D.draw(self.dist, batch, rng)
            wx = self.w(x)
            if np.any(wx > self.bound):
                raise YSamplerFailure("rejection envelope exceeded; bound estimate too small")
            keep = x[rng.random(batch) * self.bound < wx][:need]
            out[filled:filled + keep.size] = keep
            filled += keep.size
        raise YSamplerFailure("rejection sampler exhausted its iteration budget")

    def _draw_inversion(self, n, rng):
        masses = np.concatenate([s[2] for s in self.sides])
        cum = np.cumsum(masses)
        cell = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        cell = np.minimum(cell, len(masses) - 1)
        frac = rng.random(n)
        out = np.empty(n)
        offset = 0
        for a, b, m, inv in self.sides:
            sel = (cell >= offset) & (cell < offset + len(m))
            idx = cell[sel] - offset
            v = a[idx] + frac[sel] * (b[idx] - a[idx])
            out[sel] = inv(v)
            offset += len(m)
        return out


@dataclass
class TransformResult:
    """A prepared transform: either a closed-form law or a sampler."""

    alpha: float
    order: int
    source: str
    closed_form: D.DistributionSpec | None = None
    sampler: Callable | None = field(default=None, repr=False)

    def sample(self, n: int, stream: D.RandomStream) -> D.SampleBatch:
        if self.closed_form is not None:
            return D.sample(self.closed_form, n, stream)
        values = self.sampler(n, stream.generator())
        return D.SampleBatch(values, self.source, stream.seed, stream.stream)


def _construct(y: np.ndarray, roots: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    m = len(roots)
    r = [y] + list(roots) + [0.0]
    n = y.shape[0]
    prod = np.ones(n)
    out = np.zeros(n)
    for k in range(m + 1, 0, -1):
        if k <= m:
            prod = prod * rng.random(n) ** (1.0 / k)
        out = out + prod * (r[k - 1] - r[k])
    return out


@lru_cache(maxsize=64)
def _cached_y_sampler(dist, bf, alpha):
    return _YSampler(dist, bf, alpha)


def prepare_transform(dist: D.DistributionSpec, bf: BiasingFunction, alpha) -> TransformResult:
    ys = _cached_y_sampler(dist, bf, float(alpha))
    roots = tuple(bf.roots)

    def sampler(n, rng):
        return _construct(ys.draw(n, rng), roots, rng)

    return TransformResult(float(alpha), bf.order, f"{dist}^({bf.description})", sampler=sampler)


def sample_transformed(dist: D.DistributionSpec, bf: BiasingFunction, alpha, n: int,
                       stream: D.RandomStream) -> D.SampleBatch:
    """``n`` iid draws of X^(P) by the product-of-uniforms construction."""
    return prepare_transform(dist, bf, alpha).sample(n, stream)


def y_sampler_method(dist: D.DistributionSpec, bf: BiasingFunction, alpha) -> str:
    return _cached_y_sampler(dist, bf, float(alpha)).method


def density_order_one(dist: D.DistributionSpec, bf: BiasingFunction, alpha, x):
    """Density of an order-one transform: E[P(X); X > x] / alpha."""
    if bf.order != 1:
        raise SignStructureMismatch("density formula needs an order-one biasing function")
    alpha = float(alpha)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    s = dist.support
    out = np.empty(xs.shape)
    if dist.is_discrete:
        pts, probs = D.lattice_pmf(dist)
        vals = np.asarray(probs, dtype=float) * np.asarray(bf(pts), dtype=float)
        for i, xi in enumerate(xs):
            out[i] = vals[pts > xi].sum() / alpha
    else:
        for i, xi in enumerate(xs):
            if xi >= s.hi or xi <= s.lo:
                out[i] = 0.0
                continue
            val = D.expect(dist, lambda t, xi=xi: bf(t) * (t > xi), breakpoints=(xi, *bf.breakpoints))
            out[i] = val / alpha
    lo, hi = (float(v) for v in (s.lo, s.hi))
    out = np.where((xs <= lo) | (xs >= hi), 0.0, out)
    out = np.where(np.abs(out) < 1e-15, 0.0, out)
    return float(out[0]) if scalar else out


# -- discrete transforms ------------------------------------------------------

@dataclass
class DiscretePmf:
    points: np.ndarray
    probs: np.ndarray
    exact_probs: tuple | None = None
    boundary_residual: float = 0.0

    def as_dict(self) -> dict:
        return {int(k): float(p) for k, p in zip(self.points, self.probs)}

    def tv(self, other) -> float:
        if isinstance(other, D.DistributionSpec):
            pts, probs = D.lattice_pmf(other, tail=1e-18)
            other = {int(k): float(p) for k, p in zip(pts, probs)}
        elif isinstance(other, DiscretePmf):
            other = other.as_dict()
        return D.total_variation(self.as_dict(), other)

    def exact_tv(self, other: dict) -> Fraction:
        if self.exact_probs is None:
            raise ValueError("no exact probabilities available")
        mine = {int(k): p for k, p in zip(self.points, self.exact_probs)}
        keys = set(mine) | set(other)
        return sum((abs(mine.get(k, 0) - other.get(k, 0)) for k in keys), Fraction(0)) / 2

    def expect(self, g: Callable) -> float:
        return float(math.fsum(self.probs * np.asarray(g(self.points.astype(float)), dtype=float)))

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.points[rng.choice(len(self.points), size=n, p=self.probs / self.probs.sum())].astype(float)


def discrete_transform_pmf(dist: D.DistributionSpec, bf, alpha=None) -> DiscretePmf:
    """Exact pmf q with sum_j q(j) Delta^m F(j) = E[P(X) F(X)] / alpha.

    Indicator test functions turn the characterization into
    nabla^m q = (-1)^m p P / alpha, which is solved by m cumulative sums
    from the bottom of the lattice. Binomial laws and rational atoms with
    exact polynomial P are solved in Fractions.
    """
    if not dist.is_lattice:
        raise PreconditionViolated(f"{dist} is not integer valued")
    bf = as_biasing_function(bf)
    m = bf.order
    if alpha is None:
        bf, alpha = make_biasing_function(dist, bf, m)
    ec = bf.exact_coeffs
    use_exact = ec is not None and dist.family is not D.Family.Poisson and isinstance(alpha, Fraction)
    pts, probs = D.lattice_pmf(dist, tail=1e-18, exact_arith=use_exact)
    pts = np.asarray(pts).astype(int)
    lo, hi = int(pts.min()), int(pts.max())
    lattice = np.arange(lo, hi + 1)
    if use_exact:
        pmap = dict(zip(pts.tolist(), probs))
        g = [pmap.get(int(k), Fraction(0)) * poly_eval(list(ec), Fraction(int(k))) / alpha for k in lattice]
        q = list(g)
        for _ in range(m):
            run, acc = [], Fraction(0)
            for v in q:
                acc += v
                run.append(acc)
            q = run
        if m % 2:
            q = [-v for v in q]
        qf = np.array([float(v) for v in q])
    else:
        pmap = dict(zip(pts.tolist(), np.asarray(probs, dtype=float)))
        p_arr = np.array([pmap.get(int(k), 0.0) for k in lattice])
        g = p_arr * np.asarray(bf(lattice.astype(float)), dtype=float) / float(alpha)
        qf = g
        for _ in range(m):
            qf = np.cumsum(qf)
        qf = (-1) ** m * qf
        q = None
    keep = lattice <= hi - m
    boundary = float(np.abs(qf[~keep]).sum())
    if boundary > 1e-10:
        raise SingularSystem(f"mass {boundary:.3e} left beyond the lattice; no discrete transform")
    qf, kept_pts = qf[keep], lattice[keep]
    if np.any(qf < -1e-14):
        j = int(np.argmin(qf))
        raise NegativeMass(f"q({kept_pts[j]}) = {qf[j]:.3e}; no discrete transform under this solver")
    qf = np.where(qf < 0, 0.0, qf)
    total = qf.sum()
    if not abs(total - 1.0) < 1e-10:
        raise SingularSystem(f"solution has total mass {total}")
    exact_probs = tuple(v for v, k in zip(q, keep) if k) if q is not None else None
    return DiscretePmf(kept_pts, qf, exact_probs, boundary)


# -- closed forms and classic transforms -------------------------------------

def closed_form_transform(sys: PolySystemId, m: int) -> D.DistributionSpec:
    """Law of the order-``m`` transform of the reference Z_lambda."""
    fam = sys.family
    if fam is PolyFamily.Krawtchouk and m > sys.lam:
        raise DegreeTooLarge(f"Krawtchouk degree {m} exceeds lambda={sys.lam}")
    if fam in (PolyFamily.Hermite, PolyFamily.Charlier):
        return sys.reference()
    if fam is PolyFamily.Laguerre:
        return D.gamma(exact(sys.lam) + m if isinstance(sys.lam, Fraction) else sys.lam + m)
    if fam is PolyFamily.Krawtchouk:
        if sys.lam == m:
            return D.atoms([0])
        return D.binomial(sys.lam - m, sys.p)
    lam = sys.lam + m
    if lam == 0:
        return D.arcsine()
    if lam == 1:
        return D.semicircle()
    return D.gegenbauer(lam)


def transform_for_system(dist: D.DistributionSpec, sys: PolySystemId, m: int):
    """Validated (BiasingFunction, alpha) for P^m_lambda applied to ``dist``."""
    return make_biasing_function(dist, BiasingFunction.polynomial(poly_coeffs(sys, m), f"{sys.family.value}^{m}"), m)


def classic_bias(dist: D.DistributionSpec, kind: str, n: int, stream: D.RandomStream) -> D.SampleBatch:
    """Size-biased (P = x+, order 0) or zero-biased (P = x, order 1) draws."""
    if kind == "size":
        if dist.support.lo < 0 or not D.analytic_moment(dist, 1) > 0:
            raise PreconditionViolated(f"size bias needs X >= 0 with positive mean; got {dist}")
        bf, alpha = make_biasing_function(dist, size_bias_function(), 0)
    elif kind == "zero":
        mean = D.analytic_moment(dist, 1)
        var = D.analytic_moment(dist, 2) - mean**2
        if abs(mean) > 1e-12 or not var > 0:
            raise PreconditionViolated(f"zero bias needs mean 0 and positive variance; got {dist}")
        bf, alpha = make_biasing_function(dist, zero_bias_function(), 1)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return sample_transformed(dist, bf, alpha, n, stream)


def laplace_sign_function() -> BiasingFunction:
    """P(x) = 1(x > 0) - 1(x < 0)."""
    return BiasingFunction.sign((0.0,), (-1.0, 1.0), description="sign")


def outer_sign_function(roots=None) -> BiasingFunction:
    """P(x) = 1(x > 1) - 1(x < -1), zero on [-1, 1]."""
    return BiasingFunction.sign((-1.0, 1.0), (-1.0, 0.0, 1.0), roots=roots, description="outer-sign")
