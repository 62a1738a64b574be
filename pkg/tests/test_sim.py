"""Simulation layer: stable sampler, diffusion components, noise and paths."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from purejump.errors import DomainError
from purejump.sim import (Brownian, ExpDecay, Heston, ModelSpec, OrnsteinUhlenbeck, SamplePath, Stable,
                          add_noise, child_seed, constant_path, h0_model, h1_model, heston_model,
                          heston_paths, path_from_increments, sample_stable, simulate)


class TestStableSampler:
    def test_gaussian_reduction_variance(self):
        # char. function exp(-|s u|^2) is N(0, 2 s^2)
        s = 0.7
        x = sample_stable(2.0, s, 1_000_000, seed=11)
        assert abs(x.var() / (2 * s**2) - 1) < 0.01
        assert abs(x.mean()) < 5 * math.sqrt(2) * s / 1000

    def test_cauchy_quartiles(self):
        x = sample_stable(1.0, 1.0, 400_000, seed=12)
        q25, q75 = np.quantile(x, [0.25, 0.75])
        assert q25 == pytest.approx(-1.0, abs=0.01)
        assert q75 == pytest.approx(1.0, abs=0.01)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.25, 1.5, 1.9])
    def test_characteristic_function(self, beta):
        """Empirical E cos(uX) against exp(-|u|^beta); |cos| <= 1 bounds the SE by 1/sqrt(N)."""
        N = 200_000
        x = sample_stable(beta, 1.0, N, seed=13)
        for u in (0.3, 1.0, 2.0):
            emp = np.cos(u * x).mean()
            se = np.cos(u * x).std() / math.sqrt(N)
            assert abs(emp - math.exp(-u**beta)) < 4 * se + 1e-4

    @pytest.mark.parametrize("beta", [0.5, 1.5])
    def test_scale_self_similarity(self, beta):
        # scale c draws divided by c share the unit-scale law; compare deciles of two samples
        N = 100_000
        a = sample_stable(beta, 1.0, N, seed=14)
        b = sample_stable(beta, 3.0, N, seed=15) / 3.0
        qs = np.quantile(a, np.linspace(0.1, 0.9, 9))
        for q, p in zip(qs, np.linspace(0.1, 0.9, 9)):
            fb = np.mean(b <= q)
            se = math.sqrt(2 * p * (1 - p) / N)
            assert abs(fb - p) < 4 * se

    @pytest.mark.parametrize("beta,k", [(0.8, 2), (1.5, 3)])
    def test_k_step_sums_match_sampler(self, beta, k):
        """k-step sums of a unit stable path share the law of one draw at scale (k dt)**(1/beta)."""
        n = 100_000 * k
        path = simulate(ModelSpec(jump=Stable(beta, 1.0)), n, 1.0, seed=31)
        sums = path.increments(k)
        ref = sample_stable(beta, (k / n) ** (1 / beta), sums.size, seed=32)
        ps = np.linspace(0.1, 0.9, 9)
        for q, p in zip(np.quantile(ref, ps), ps):
            se = math.sqrt(2 * p * (1 - p) / sums.size)
            assert abs(np.mean(sums <= q) - p) < 3 * se

    def test_beta_two_matches_brownian(self):
        s = 0.5
        a = sample_stable(2.0, s, 1_000_000, seed=33)
        path = simulate(ModelSpec(diffusion=Brownian(math.sqrt(2) * s)), 1_000_000, 1_000_000.0, seed=34)
        assert abs(a.var() / path.increments().var() - 1) < 0.01

    def test_zero_scale_is_zero(self):
        assert np.all(sample_stable(1.3, 0.0, 50, seed=1) == 0.0)

    @pytest.mark.parametrize("beta,scale", [(0.0, 1.0), (2.5, 1.0), (-1.0, 1.0), (1.5, -0.1)])
    def test_domain_errors(self, beta, scale):
        with pytest.raises(DomainError):
            sample_stable(beta, scale, 10, seed=0)

    def test_symmetry(self):
        x = sample_stable(0.8, 1.0, 200_000, seed=16)
        assert abs(np.mean(x > 0) - 0.5) < 4 * 0.5 / math.sqrt(x.size)


class TestSimulate:
    def test_degenerate_stable_gives_zero_path(self):
        path = simulate(ModelSpec(jump=Stable(1.2, 0.0)), 100, 1.0, seed=3)
        assert np.all(path.values == 0.0)

    def test_brownian_increment_variance(self):
        n = 23_400
        path = simulate(ModelSpec(diffusion=Brownian(1.0)), n, 1.0, seed=4)
        sq = path.increments() ** 2
        dt = 1 / n
        # Var(dW^2) = 2 dt^2
        assert abs(sq.mean() - dt) < 3 * math.sqrt(2) * dt / math.sqrt(n)

    def test_ou_stationary_moments(self):
        # exact AR(1) from X_0 = 0: Var X_T = (1 - e^{-2T}) / 2
        T = 3.0
        ends = np.array([simulate(ModelSpec(diffusion=OrnsteinUhlenbeck()), 60, T, seed=s).values[-1]
                         for s in range(4000)])
        target = (1 - math.exp(-2 * T)) / 2
        assert abs(ends.var() - target) < 4 * target * math.sqrt(2 / ends.size)

    def test_heston_variance_nonnegative(self):
        x, v = heston_paths(Heston(eta=0.5, gamma=2.0, kappa_v=1.0), 2000, 1.0, seed=5)
        assert np.all(v >= 0)
        assert x.shape == v.shape == (2001,)

    def test_drift_component(self):
        path = simulate(ModelSpec(drift=ExpDecay(2.0)), 10, 1.0, seed=0)
        np.testing.assert_allclose(path.values, np.exp(-2.0 * np.linspace(0, 1, 11)))

    def test_determinism(self):
        m = h0_model(1.5)
        a = simulate(m, 500, 1.0, seed=9)
        b = simulate(m, 500, 1.0, seed=9)
        c = simulate(m, 500, 1.0, seed=10)
        assert a == b
        assert a != c

    def test_components_use_separate_streams(self):
        # adding a jump component leaves the diffusion draws untouched
        d = simulate(ModelSpec(diffusion=Brownian(1.0)), 300, 1.0, seed=21)
        j = simulate(ModelSpec(jump=Stable(1.5, 0.5)), 300, 1.0, seed=21)
        both = simulate(ModelSpec(diffusion=Brownian(1.0), jump=Stable(1.5, 0.5)), 300, 1.0, seed=21)
        np.testing.assert_allclose(both.values, d.values + j.values, rtol=0, atol=1e-12)

    def test_presets(self):
        assert h0_model(1.5).diffusion == OrnsteinUhlenbeck()
        assert h1_model(1.5).drift is not None
        assert h1_model(0.8).drift is None
        assert isinstance(heston_model(1.2).diffusion, Heston)

    @pytest.mark.parametrize("n,T", [(1, 1.0), (10, 0.0), (10, -1.0)])
    def test_bad_grid(self, n, T):
        with pytest.raises(DomainError):
            simulate(h0_model(1.5), n, T, seed=0)

    def test_empty_model_rejected(self):
        with pytest.raises(DomainError):
            ModelSpec()


class TestNoise:
    def test_zero_noise_identity(self):
        p = simulate(h0_model(1.5), 100, seed=1)
        assert add_noise(p, 0.0, seed=2) is p

    def test_noise_sd(self):
        noisy = add_noise(constant_path(23_400), 0.01, seed=3)
        assert abs(noisy.values.std() / 0.01 - 1) < 0.05

    def test_noise_deterministic(self):
        p = constant_path(50)
        assert add_noise(p, 0.1, 4) == add_noise(p, 0.1, 4)

    def test_negative_sd(self):
        with pytest.raises(DomainError):
            add_noise(constant_path(5), -1.0, 0)


class TestSamplePath:
    def test_csv_round_trip_bit_exact(self):
        p = simulate(h1_model(1.25), 1000, 1.0, seed=7)
        q = SamplePath.from_csv(p.to_csv())
        assert q == p
        assert q.T == p.T

    def test_increments_step_offset(self, walk):
        p = walk(1, 2, 3, 4, 5)
        np.testing.assert_allclose(p.increments(2, 0), [3, 7])
        np.testing.assert_allclose(p.increments(2, 1), [5, 9])

    def test_values_read_only(self):
        p = constant_path(5)
        with pytest.raises(ValueError):
            p.values[0] = 1.0

    def test_from_csv_rejects_uneven_grid(self):
        with pytest.raises(DomainError):
            SamplePath.from_csv("time,value\n0,0\n0.5,1\n0.6,2\n")

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40))
    def test_path_from_increments_inverts(self, incs):
        p = path_from_increments(incs)
        np.testing.assert_allclose(p.increments(), incs, atol=1e-9)


def test_child_seed_keys_differ():
    a = np.random.default_rng(child_seed(1, 0)).random()
    b = np.random.default_rng(child_seed(1, 1)).random()
    assert a != b
    assert np.random.default_rng(child_seed(1, 0)).random() == a


@settings(deadline=None, max_examples=25)
@given(beta=st.floats(0.2, 1.99), c=st.floats(0.1, 10.0))
def test_sampler_scale_linear_in_scale(beta, c):
    # same seed, scale c: draws are exactly c times the unit-scale draws
    a = sample_stable(beta, 1.0, 64, seed=5)
    b = sample_stable(beta, c, 64, seed=5)
    np.testing.assert_allclose(b, c * a, rtol=1e-12)


def test_brownian_reference_distribution():
    x = sample_stable(2.0, 1.0, 50_000, seed=30) / math.sqrt(2)
    assert stats.kstest(x, "norm").pvalue > 1e-3
