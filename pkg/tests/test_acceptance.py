"""Acceptance criteria, one test each, at the stated thresholds.

Every test prints one ``ACCEPTANCE Cnn PASS|FAIL`` line (shown in the
terminal summary). Statistical criteria use 20 seeds and require at least
18 of them to pass at the 1% level; runtimes are part of the verdict.
"""
import math
import time
from fractions import Fraction as F

import numpy as np

from steinbias import biastransform as BT
from steinbias import distributions as D
from steinbias import orthopoly as OP
from steinbias import steincheck as SC
from steinbias import sumconstruct as S

from .conftest import ACCEPTANCE_LINES

H, L, C, K, G = (OP.PolyFamily.Hermite, OP.PolyFamily.Laguerre, OP.PolyFamily.Charlier,
                 OP.PolyFamily.Krawtchouk, OP.PolyFamily.Gegenbauer)

SEEDS = range(1, 21)
MIN_SEEDS = 18
N = 10**5

PARAM_GRID = ([OP.system(H, lam) for lam in (1, 2, F(1, 2))]
              + [OP.system(L, lam) for lam in (F(1, 2), 1, F(5, 2), 4)]
              + [OP.system(C, lam) for lam in (F(1, 2), 1, 4)]
              + [OP.system(K, lam, p) for lam in (6, 12) for p in (F(3, 10), F(1, 2))]
              + [OP.system(G, lam) for lam in (0, F(1, 2), 1, F(-3, 10), 3)])


def report(tag, ok, elapsed, limit, detail):
    passed = bool(ok) and elapsed < limit
    line = f"ACCEPTANCE {tag} {'PASS' if passed else 'FAIL'} {detail}; {elapsed:.1f}s (limit {limit}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert elapsed < limit, line


def seeds_passing(fn):
    return sum(bool(fn(seed)) for seed in SEEDS)


def degrees(sys, top=6):
    return range(min(top, sys.lam) + 1) if sys.family is K else range(top + 1)


def test_c01_alpha_closed_forms():
    t0 = time.time()
    worst = 0.0
    for sys in PARAM_GRID:
        for m in degrees(sys):
            closed = float(OP.alpha_closed_form(sys, m))
            worst = max(worst, abs(closed - OP.alpha_numeric(sys, m)) / closed)
    report("C01", worst < 1e-8, time.time() - t0, 10, f"max relative error {worst:.2e} < 1e-08")


def test_c02_coefficient_oracle():
    t0 = time.time()
    worst = 0.0
    for sys in PARAM_GRID:
        for m in degrees(sys):
            a = np.array(OP.poly_coeffs(sys, m).as_array(), dtype=float)
            b = np.array(OP.orthopoly_from_moments(sys.reference(), m).as_array(), dtype=float)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    report("C02", worst < 1e-8, time.time() - t0, 10, f"max coefficient difference {worst:.2e} < 1e-08")


def test_c03_hermite_fixed_point():
    t0 = time.time()
    counts = {}
    for lam in (1, 2):
        for m in (1, 2, 3):
            counts[(lam, m)] = seeds_passing(
                lambda s: SC.fixed_point_test(D.normal(lam), OP.system(H, lam), m, N, D.RandomStream(s, 3)).passed)
    worst = min(counts.values())
    report("C03", worst >= MIN_SEEDS, time.time() - t0, 120,
           f"worst case {worst}/20 seeds below 1.628*sqrt(2/n)")


def test_c04_laguerre_shift():
    t0 = time.time()
    counts = {}
    crit = D.ks_critical_two_sample(N)
    for lam in (1, 2.5):
        sys = OP.system(L, lam)
        for m in (1, 2):
            bf, alpha = BT.transform_for_system(D.gamma(lam), sys, m)

            def ok(s):
                st = D.RandomStream(s, 4)
                x = BT.sample_transformed(D.gamma(lam), bf, alpha, N, st.child(0)).values
                y = D.sample(D.gamma(lam + m), N, st.child(1)).values
                return D.ks_statistic(x, y) < crit

            counts[(lam, m)] = seeds_passing(ok)
    for lam in (0.5, 1, 2.5):
        counts[("size", lam)] = seeds_passing(
            lambda s: all(o.passed for o in SC.gamma_sizebias_equivalence(lam, N, D.RandomStream(s, 40))))
    worst = min(counts.values())
    report("C04", worst >= MIN_SEEDS, time.time() - t0, 120,
           f"worst case {worst}/20 seeds (shift KS and size-bias equivalence)")


def test_c05_charlier_fixed_point():
    t0 = time.time()
    worst = 0.0
    for lam in (1, 4):
        for m in (1, 2, 3):
            bf, alpha = BT.transform_for_system(D.poisson(lam), OP.system(C, lam), m)
            pmf = BT.discrete_transform_pmf(D.poisson(lam), bf, alpha)
            pts, probs = D.lattice_pmf(D.poisson(lam), tail=1e-12)
            worst = max(worst, pmf.tv({int(k): float(v) for k, v in zip(pts, probs)}))
    report("C05", worst < 1e-10, time.time() - t0, 5, f"max TV {worst:.2e} < 1e-10")


def test_c06_krawtchouk_shift():
    t0 = time.time()
    worst = 0.0
    for p in (0.3, 0.5):
        for lam in range(1, 13):
            for m in range(1, min(3, lam) + 1):
                sys = OP.system(K, lam, p)
                bf, alpha = BT.transform_for_system(D.binomial(lam, p), sys, m)
                pmf = BT.discrete_transform_pmf(D.binomial(lam, p), bf, alpha)
                target = D.atoms([0]) if lam == m else D.binomial(lam - m, p)
                pts, probs = D.lattice_pmf(target)
                worst = max(worst, pmf.tv({int(k): float(v) for k, v in zip(pts, probs)}))
    report("C06", worst < 1e-12, time.time() - t0, 5, f"max TV {worst:.2e} < 1e-12")


def test_c07_gegenbauer_arcsine_to_semicircle():
    t0 = time.time()
    sys = OP.system(G, 0)
    bf, alpha = BT.transform_for_system(D.arcsine(), sys, 1)
    crit = D.ks_critical_one_sample(N)
    count = seeds_passing(lambda s: D.ks_statistic(
        D.semicircle(), BT.sample_transformed(D.arcsine(), bf, alpha, N, D.RandomStream(s, 7)).values) < crit)
    report("C07", count >= MIN_SEEDS, time.time() - t0, 60, f"{count}/20 seeds below 1.63/sqrt(n)")


def test_c08_laplace_example():
    t0 = time.time()
    lap = D.laplace(1)
    fixed = seeds_passing(
        lambda s: SC.fixed_point_test(lap, BT.laplace_sign_function(), 1, N, D.RandomStream(s, 8)).passed)
    bf, alpha = BT.make_biasing_function(lap, BT.laplace_sign_function(), 1)
    l1 = SC.density_histogram_l1(lap, bf, alpha, 10**6, D.RandomStream(1, 80))
    pair_counts = np.zeros(3, dtype=int)
    for s in SEEDS:
        pair_counts += [o.passed for o in SC.root_choice_invariance(lap, N, D.RandomStream(s, 81))]
    ok = fixed >= MIN_SEEDS and l1 < 0.02 and pair_counts.min() >= MIN_SEEDS
    report("C08", ok, time.time() - t0, 120,
           f"fixed point {fixed}/20, density L1 {l1:.4f} < 0.02, root choice worst pair {pair_counts.min()}/20")


SUM_SCENARIOS = [(H, (1, 2, 3), None), (C, (1, F(1, 2), 2), None), (L, (1, F(5, 2)), None), (K, (4, 4), F(1, 2))]


def test_c09_sum_construction():
    t0 = time.time()
    m = 2
    crit = D.ks_critical_two_sample(N)
    ks_worst, tv_worst, z_worst, identities_exact = 20, 0.0, 0.0, True
    for fam, lams, p in SUM_SCENARIOS:
        ss = S.reference_summands(fam, lams, m, p)
        agg = S.aggregated_transform(ss, fam, m)

        def ok(s):
            st = D.RandomStream(s, 9)
            x = S.sample_sum_transformed(ss, fam, m, N, st.child(0)).values
            y = D.sample(agg, N, st.child(1)).values
            return D.ks_statistic(x, y) < crit

        ks_worst = min(ks_worst, seeds_passing(ok))
        if fam in (C, K):
            pts, probs = D.lattice_pmf(agg, tail=1e-12)
            tv = D.total_variation(S.sum_transformed_pmf(ss, fam, m), {int(k): float(v) for k, v in zip(pts, probs)})
            tv_worst = max(tv_worst, tv)
        law = S.index_distribution(fam, lams, m, p)
        draws = 10**6
        freq = np.bincount(law.draw(draws, D.RandomStream(1, 90).generator()), minlength=len(law.compositions))
        pr = law.floats
        se = np.sqrt(pr * (1 - pr) / draws)
        dev = np.abs(freq / draws - pr)
        z_worst = max(z_worst, float(np.max(np.where(se > 0, dev / np.where(se > 0, se, 1), dev * np.inf))))
        identities_exact &= S.verify_alpha_identity(fam, lams, m, p) == (0.0, 0.0)
        identities_exact &= law.as_dict() == S.index_distribution_closed_form(fam, lams, m, p).as_dict()
    ok = ks_worst >= MIN_SEEDS and tv_worst < 1e-10 and z_worst <= 4 and identities_exact
    report("C09", ok, time.time() - t0, 300,
           f"KS worst {ks_worst}/20, lattice TV {tv_worst:.2e}, index max z {z_worst:.2f}, "
           f"identities exact {identities_exact}")


CHAR_SYSTEMS = ([OP.system(H, lam) for lam in (1, 2)] + [OP.system(L, lam) for lam in (1, 2.5)]
                + [OP.system(C, lam) for lam in (1, 4)] + [OP.system(K, lam, p) for lam in (6, 12) for p in (0.3, 0.5)]
                + [OP.system(G, lam) for lam in (0, 0.5, 1)])


def test_c10_characterizing_equations():
    t0 = time.time()
    passed = total = 0
    for sys in CHAR_SYSTEMS:
        bank = SC.default_bank(lattice=sys.is_discrete)
        for m in (1, 2, 3):
            for s in SEEDS:
                rep = SC.verify_characterization(sys.reference(), sys, m, bank, N, D.RandomStream(s, 10))
                passed += sum(r["pass"] for r in rep.rows)
                total += len(rep.rows)
    frac = passed / total
    report("C10", frac >= 0.95, time.time() - t0, 600, f"{passed}/{total} = {frac:.4f} of checks with |z| <= 4")


def test_c11_iterated_biasing():
    t0 = time.time()
    worst_z, cases = 0.0, 0
    for sys in CHAR_SYSTEMS:
        m = 3
        for k in range(1, m + 1):
            rep = S.iterated_bias_check(sys.family, sys.lam, m, k, 0, N, D.RandomStream(1, 11), sys.p)
            cases += 1
            if rep.rows:
                worst_z = max(worst_z, max(abs(r.z) for r in rep.rows))
    report("C11", worst_z <= 4, time.time() - t0, 120, f"{cases} (family, m, k) cases, max |z| {worst_z:.2f} <= 4")


def test_c12_stein_operators():
    t0 = time.time()
    grid = np.linspace(-5, 5, 1001)
    funcs = [SC.monomial(3), SC.gaussian_bump(), SC.sine(), SC.cosine(), SC.smooth_bump()]
    reduce_diff = 0.0
    for tf in funcs:
        ref = SC.stein_residual("classical", tf, grid)
        for op in ("h1", "h2"):
            reduce_diff = max(reduce_diff, float(np.max(np.abs(SC.stein_residual(op, tf, grid, m=1) - ref))))
    quad = max(abs(SC.stein_residual(op, tf, D.normal(1), m=m))
               for op in ("h1", "h2") for m in (1, 2, 3) for tf in funcs[1:4])
    mc_ok = True
    normal = D.sample(D.normal(1), N, D.RandomStream(1, 12))
    gam = D.sample(D.gamma(2.5), N, D.RandomStream(1, 13))
    for tf in funcs[:4]:
        est = SC.stein_residual("classical", tf, normal)
        mc_ok &= abs(est.mean) <= 4 * est.stderr
        est = SC.stein_residual("gamma", tf, gam, lam=2.5)
        mc_ok &= abs(est.mean) <= 4 * est.stderr
    binom = [SC.stein_residual("binomial_ehm", tf, D.binomial(lam, F(3, 10)), lam=lam, p=F(3, 10))
             for lam in (1, 5, 12) for tf in (SC.monomial(1), SC.monomial(3), SC.indicator(2))]
    ok = reduce_diff == 0 and quad < 1e-10 and mc_ok and all(v == 0 for v in binom)
    report("C12", ok, time.time() - t0, 60,
           f"m=1 reduction max diff {reduce_diff}, normal quadrature residual {quad:.1e}, "
           f"MC residuals within 4 sigma {mc_ok}, binomial exact {all(v == 0 for v in binom)}")
