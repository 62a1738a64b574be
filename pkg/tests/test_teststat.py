"""Counting machinery, studentization and the decision rule."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import special, stats

from purejump.errors import DegenerateStatisticError, DomainError
from purejump.sim import Brownian, ModelSpec, Stable, path_from_increments, simulate
from purejump.teststat import (ThresholdSpec, compute_alpha, count_small, critical_value, h0_limit,
                               h1_limit, normal_quantile, run_test, sigma_hat_sq, sigma_tilde_sq,
                               v_n, v_tilde)

increments = st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=60)


def brute_count(incs, step, offset, thr, limit=None):
    """Loop oracle: sum consecutive increments into step-blocks starting at offset."""
    vals = [0.0]
    for d in incs:
        vals.append(vals[-1] + d)
    hits, seen = 0, 0
    i = offset
    while i + step < len(vals):
        if limit is not None and seen >= limit:
            break
        if abs(vals[i + step] - vals[i]) <= thr:
            hits += 1
        seen += 1
        i += step
    return hits


class TestNormalQuantile:
    @given(st.floats(1e-12, 1 - 1e-12))
    def test_matches_scipy(self, p):
        assert normal_quantile(p) == pytest.approx(stats.norm.ppf(p), abs=1e-10, rel=1e-12)

    def test_familiar_values(self):
        assert normal_quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-12)
        assert normal_quantile(0.5) == 0.0

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            normal_quantile(p)


class TestThresholds:
    def test_direct_passthrough(self):
        assert compute_alpha(ThresholdSpec.direct(2.0), 10_000) == 2.0

    def test_scaled(self):
        # 2 * (ln 2340)^2
        assert compute_alpha(ThresholdSpec.scaled(2, 2), 2340) == pytest.approx(120.370217, rel=1e-7)

    def test_kappa_zero(self):
        assert compute_alpha(ThresholdSpec.scaled(1, 0), 100) == 1.0

    def test_small_n(self):
        with pytest.raises(DomainError):
            compute_alpha(ThresholdSpec(), 1)

    @pytest.mark.parametrize("kw", [dict(varpi=0.5), dict(k=1), dict(delta=-1.0), dict(k=2.5)])
    def test_spec_validation(self, kw):
        with pytest.raises(DomainError):
            ThresholdSpec(**kw)


class TestCountSmall:
    def test_hand_enumeration(self, walk):
        assert count_small(walk(0.10, -0.05, 0.20), 1, 0, 0.10) == 2

    def test_boundary_inclusive(self, walk):
        assert count_small(walk(0.25, -0.25, 0.5), 1, 0, 0.25) == 2

    def test_two_step_blocks(self, walk):
        # offset 0: (0.1-0.05, 0.2+0.3) ; offset 1: (-0.05+0.2, 0.3+0.0)
        p = walk(0.1, -0.05, 0.2, 0.3, 0.0)
        assert count_small(p, 2, 0, 0.1) == 1
        assert count_small(p, 2, 1, 0.2) == 1

    @pytest.mark.parametrize("step,offset", [(1, 0), (2, 0), (2, 1), (3, 2)])
    def test_constant_path_counts_all(self, flat, step, offset):
        assert count_small(flat(101), step, offset, 1e-9) == (101 - offset) // step

    def test_bad_offset(self, flat):
        with pytest.raises(DomainError):
            count_small(flat(10), 2, 2, 1.0)

    @given(increments, st.integers(1, 4), st.data(), st.floats(0.01, 6))
    def test_matches_loop_oracle(self, incs, step, data, thr):
        offset = data.draw(st.integers(0, step - 1))
        limit = data.draw(st.one_of(st.none(), st.integers(0, 30)))
        p = path_from_increments(incs)
        assert count_small(p, step, offset, thr, limit) == brute_count(incs, step, offset, thr, limit)

    @given(increments, st.floats(0.01, 5), st.floats(0.1, 50))
    def test_scale_equivariance(self, incs, thr, c):
        # counts of cY at threshold c*u equal counts of Y at u (away from ties at the boundary)
        a = np.abs(np.asarray(incs))
        assume(np.all(np.abs(a - thr) > 1e-6 * max(thr, 1)))
        p = path_from_increments(incs)
        assert count_small(p.scaled(c), 1, 0, c * thr) == count_small(p, 1, 0, thr)

    @given(increments, st.floats(0.01, 5), st.floats(0.0, 5))
    def test_threshold_monotone(self, incs, thr, extra):
        p = path_from_increments(incs)
        assert count_small(p, 1, 0, thr) <= count_small(p, 1, 0, thr + extra)

    @given(increments, st.floats(0.01, 5))
    def test_bounds(self, incs, thr):
        p = path_from_increments(incs)
        n = p.n
        assert 0 <= count_small(p, 1, 0, thr) <= n
        assert 0 <= count_small(p, 2, 0, thr) <= n // 2
        assert 0 <= count_small(p, 2, 1, thr, limit=n // 2 - 1) <= n // 2 - 1


class TestRatios:
    def test_constant_path_v_tilde(self, flat):
        vt, u, u2, u2s, ul = v_tilde(flat(100), ThresholdSpec.direct(1.0))
        assert (u, u2, u2s, ul) == (100, 50, 49, 49.5)
        assert vt == pytest.approx(100 / 49.5)

    def test_constant_path_v_n(self, flat):
        assert v_n(flat(100), ThresholdSpec.direct(1.0)) == 2.0

    def test_degenerate(self, walk):
        p = walk(*([10.0] * 20))
        with pytest.raises(DegenerateStatisticError) as exc:
            v_tilde(p, ThresholdSpec.direct(1.0))
        assert exc.value.counts["u_fine"] == 0

    def test_v_tilde_needs_k2(self, flat):
        with pytest.raises(DomainError):
            v_tilde(flat(10), ThresholdSpec.direct(1.0, k=3))

    def test_limits(self):
        assert h0_limit(1.5) == 1.0
        assert h1_limit(1.0, 1.5) == pytest.approx(math.sqrt(2))
        assert h1_limit(1.25, 1.5) == pytest.approx(2**0.3)
        assert h1_limit(0.5, 1.5) == 2.0


class TestVariance:
    def test_sigma_tilde_example(self):
        assert sigma_tilde_sq(100, 49.5, 100, 1.0, 1.5) == pytest.approx((100 + 24.75) / 2450.25, rel=1e-12)
        assert sigma_tilde_sq(100, 49.5, 100, 1.0, 1.5) == pytest.approx(0.050913, abs=5e-7)

    @given(st.floats(0.6, 1.5), st.integers(10, 10_000), st.floats(0.5, 1e4))
    def test_zero_fine_count(self, varpi, n, ul):
        e = 1.5 - varpi
        dt = 1.0 / n
        assert sigma_tilde_sq(0, ul, n, 1.0, varpi) == pytest.approx(2**e / (2 * dt**e * ul), rel=1e-12)

    def test_sigma_tilde_degenerate(self):
        with pytest.raises(DegenerateStatisticError):
            sigma_tilde_sq(3, 0.0, 100, 1.0, 1.5)

    def test_sigma_hat(self):
        # varpi = 3/2: (1 + 1) * 1 / U
        assert sigma_hat_sq(50, 100, 1.0, 1.5) == pytest.approx(2 / 50)


class TestRunTest:
    def test_constant_path_rejects(self, flat):
        rep = run_test(flat(100), ThresholdSpec(), 0.05)
        ul = 49.5
        s2 = (100 + ul / 2) / ul**2
        assert rep.sigma_tilde_sq == pytest.approx(s2)
        assert rep.studentized == pytest.approx((100 / ul - 1) / math.sqrt(s2))
        assert rep.reject_h0

    def test_inconclusive(self, walk):
        rep = run_test(walk(*([5.0] * 40)), ThresholdSpec.direct(1.0))
        assert rep.inconclusive and not rep.reject_h0 and math.isnan(rep.studentized)

    def test_record_flat(self, flat):
        rec = run_test(flat(20)).to_record()
        assert rec["family"] == "vtilde" and rec["n"] == 20 and "extra" not in rec

    @settings(deadline=None, max_examples=40)
    @given(st.integers(0, 10_000), st.floats(1.05, 1.95), st.floats(0.5, 40), st.floats(0.01, 0.3),
           st.floats(0.7, 1.5))
    def test_two_rejection_forms_agree(self, seed, beta, alpha, theta, varpi):
        """stat > z  iff  v_tilde > 2**(3/2-varpi) + z * dt**(3/4-varpi/2) * sigma_tilde."""
        model = ModelSpec(diffusion=Brownian(0.3), jump=Stable(beta, 1.0))
        rep = run_test(simulate(model, 400, 1.0, seed), ThresholdSpec.direct(alpha, varpi=varpi), theta)
        assume(not rep.inconclusive)
        cv = critical_value(rep)
        assume(abs(rep.v_tilde - cv) > 1e-9)
        assert rep.reject_h0 == (rep.v_tilde > cv)

    @settings(deadline=None, max_examples=30)
    @given(st.integers(0, 10_000), st.floats(0.01, 100.0))
    def test_full_scale_equivariance(self, seed, c):
        path = simulate(ModelSpec(diffusion=Brownian(0.5), jump=Stable(1.3, 1.0)), 600, 1.0, seed)
        a = run_test(path, ThresholdSpec.direct(5.0))
        b = run_test(path.scaled(c), ThresholdSpec.direct(5.0 * c))
        assume(not a.inconclusive)
        fine, coarse = 5.0 * path.dt**1.5, 5.0 * (2 * path.dt) ** 1.5
        near = [np.abs(np.abs(path.increments()) - fine), np.abs(np.abs(path.increments(2)) - coarse),
                np.abs(np.abs(path.increments(2, 1)) - coarse)]
        assume(all(np.all(x > 1e-9 * fine) for x in near))
        assert (a.u_fine, a.u_coarse, a.u_offset) == (b.u_fine, b.u_coarse, b.u_offset)
        assert a.v_tilde == b.v_tilde and a.reject_h0 == b.reject_h0

    def test_theta_domain(self, flat):
        with pytest.raises(DomainError):
            run_test(flat(10), theta=1.0)


def test_size_band():
    """Empirical size under the mixture null stays in [3%, 6%] at n = 2340."""
    from purejump.experiments import Cell, VTildeEval, run_cell
    from purejump.sim import h0_model
    s = run_cell(Cell("size", h0_model(1.5), 2340, VTildeEval()), 5000, 99)
    assert 0.03 <= s.rejection_rate <= 0.06


class TestLawOfLargeNumbers:
    def test_h0_count_limit(self):
        """Brownian sigma: dt**(3/2-varpi) U -> 2 alpha phi(0) T / sigma."""
        n, reps, alpha, sigma = 23_400, 1000, 300.0, 2.0
        spec = ThresholdSpec.direct(alpha, varpi=1.5)
        thr = alpha * (1 / n) ** 1.5
        u = np.array([count_small(simulate(ModelSpec(diffusion=Brownian(sigma)), n, 1.0, s), 1, 0, thr)
                      for s in range(reps)])
        target = 2 * alpha / math.sqrt(2 * math.pi) / sigma
        assert spec.alpha == alpha
        assert abs(u.mean() - target) < 3 * u.std(ddof=1) / math.sqrt(reps)

    def test_h1_count_stable_across_n(self):
        """Unit stable: dt**(1+1/beta-varpi) U -> 2 alpha f_beta(0) T, f_beta(0) = Gamma(1+1/beta)/pi."""
        beta, alpha, varpi, reps = 1.25, 30.0, 1.5, 300
        target = 2 * alpha * special.gamma(1 + 1 / beta) / math.pi
        means = []
        for n in (5850, 11_700, 23_400):
            dt = 1 / n
            u = [count_small(simulate(ModelSpec(jump=Stable(beta, 1.0)), n, 1.0, s), 1, 0, alpha * dt**varpi)
                 for s in range(reps)]
            means.append(np.mean(u) * dt ** (1 + 1 / beta - varpi))
        assert max(means) / min(means) < 1.10
        for m in means:
            assert m == pytest.approx(target, rel=0.03)
