import numpy as np
import pytest

from fgpsim import (ConfigError, DomainError, constant_generator,
                    custom_generator, diversity_generator, diversity_weights,
                    entropy_generator, entropy_weights, excess_growth_classical,
                    excess_growth_pairwise, fgp_weights, gibbs_entropy_generator,
                    tangent_hessian_max_eig)
from fgpsim.generators import (check_gradient, check_hessian, log_value_on_path,
                               weights_on_path)

from conftest import interior_simplex

ALL_GENERATORS = [
    diversity_generator(0.7),
    diversity_generator(0.7, weight_rule="fgp_formula"),
    diversity_generator(0.3),
    entropy_generator(),
    gibbs_entropy_generator(),
    constant_generator(),
]


class TestFgpWeights:
    def test_constant_generator_gives_market_portfolio(self):
        mu = np.array([0.5, 0.3, 0.2])
        assert np.allclose(fgp_weights(constant_generator(), mu), mu, rtol=1e-15)

    def test_uniform_mu_gives_uniform_pi_for_symmetric_generators(self):
        mu = np.full(8, 1.0 / 8.0)
        for G in ALL_GENERATORS:
            assert np.allclose(G.weights(mu), mu, rtol=1e-12), G.describe()

    def test_diversity_fgp_formula_frozen_oracle(self):
        # 50-digit evaluation of mu_i (d_i log G + 1 - sum mu d log G) for
        # G = sum mu^0.7 at mu = (0.7, 0.2, 0.1)
        pi = fgp_weights(diversity_generator(0.7, weight_rule="fgp_formula"),
                         np.array([0.7, 0.2, 0.1]))
        expect = [0.6286178727298069, 0.2341687100756374, 0.1372134171945557]
        assert np.allclose(pi, expect, rtol=1e-14)

    def test_entropy_frozen_oracle_d2(self):
        # product-form generator at mu = (0.8, 0.2): d_i log G = 1 + log mu_i;
        # 50-digit arithmetic gives a short position in the small asset
        pi = entropy_weights(np.array([0.8, 0.2]))
        expect = [1.0218070977791825, -0.0218070977791825]
        assert np.allclose(pi, expect, rtol=1e-13)
        assert abs(pi.sum() - 1.0) < 1e-12

    def test_gibbs_entropy_matches_closed_form(self):
        # -mu log mu / H, the classical entropy-weighted portfolio
        mu = np.array([0.8, 0.2])
        pi = fgp_weights(gibbs_entropy_generator(), mu)
        assert np.allclose(pi, [0.3567425588971884, 0.6432574411028116], rtol=1e-13)
        rng = np.random.default_rng(4)
        for _ in range(20):
            mu = interior_simplex(rng, 6)
            pi = fgp_weights(gibbs_entropy_generator(), mu)
            H = -(mu * np.log(mu)).sum()
            assert np.allclose(pi, -mu * np.log(mu) / H, rtol=1e-11)
            assert (pi > 0).all()

    def test_boundary_guard_raises_without_nan(self):
        mu = np.array([1.0 - 1e-12, 1e-12])
        for G in ALL_GENERATORS:
            with pytest.raises(DomainError):
                G.weights(mu)

    def test_simplex_sum_identity(self):
        rng = np.random.default_rng(11)
        for G in ALL_GENERATORS:
            worst = 0.0
            for _ in range(1000):
                d = int(rng.integers(2, 30))
                pi = G.weights(interior_simplex(rng, d))
                worst = max(worst, abs(pi.sum() - 1.0))
            assert worst < 1e-10, (G.describe(), worst)


class TestDiversityWeights:
    def test_identity_exponent(self):
        mu = np.array([0.5, 0.3, 0.2])
        assert np.allclose(diversity_weights(1.0, mu), mu, rtol=1e-15)

    def test_frozen_power_oracle(self):
        # mu^0.7 normalized at (0.7, 0.2, 0.1), 50-digit arithmetic
        pi = diversity_weights(0.7, np.array([0.7, 0.2, 0.1]))
        expect = [0.5980255324711527, 0.2488124429651963, 0.1531620245636510]
        assert np.allclose(pi, expect, rtol=1e-14)

    def test_invalid_exponent(self):
        mu = np.array([0.6, 0.4])
        for p in (0.0, -0.3, 1.5):
            with pytest.raises((DomainError, ConfigError)):
                diversity_weights(p, mu)
        with pytest.raises(ConfigError):
            diversity_generator(0.0)

    def test_scale_free_in_mu(self):
        rng = np.random.default_rng(5)
        raw = rng.uniform(0.5, 10.0, size=12)
        pre = diversity_weights(0.7, raw / raw.sum())
        w = raw ** 0.7
        post = w / w.sum()
        assert np.allclose(pre, post, rtol=1e-13)

    def test_lipschitz_diagnostic_finite_and_stable(self):
        # empirical L_p over interior pairs (mu_i >= 1e-4): finite, and stable
        # across two independent sample batches
        rng = np.random.default_rng(21)

        def batch_lhat(n):
            worst = 0.0
            for _ in range(n):
                d = int(rng.integers(2, 20))
                mu, nu = interior_simplex(rng, d), interior_simplex(rng, d)
                num = np.abs(diversity_weights(0.7, mu)
                             - diversity_weights(0.7, nu)).sum()
                den = np.abs(mu - nu).sum()
                if den > 1e-12:
                    worst = max(worst, num / den)
            return worst

        l1, l2 = batch_lhat(400), batch_lhat(400)
        assert np.isfinite(l1) and np.isfinite(l2)
        assert l1 < 50 and l2 < 50
        assert 0.5 <= l1 / l2 <= 2.0


class TestDerivativeConsistency:
    @pytest.mark.parametrize("G", [diversity_generator(0.7), diversity_generator(0.3),
                                   entropy_generator(), gibbs_entropy_generator()],
                             ids=lambda g: g.describe())
    def test_grad_hessian_match_finite_differences(self, G):
        rng = np.random.default_rng(3)
        for _ in range(100):
            mu = interior_simplex(rng, int(rng.integers(2, 10)), floor=1e-3)
            assert check_gradient(G, mu) < 1e-5
            assert check_hessian(G, mu) < 1e-5

    def test_custom_generator_finite_difference_fallback(self):
        declared = diversity_generator(0.6, weight_rule="fgp_formula")
        bare = custom_generator(declared.value_fn, name="fd_only")
        mu = np.array([0.5, 0.3, 0.2])
        assert np.allclose(bare.grad(mu), declared.grad(mu), rtol=1e-7)
        assert np.allclose(fgp_weights(bare, mu), fgp_weights(declared, mu),
                           rtol=1e-8)

    def test_custom_requires_value(self):
        with pytest.raises(ConfigError):
            custom_generator(None)


class TestExcessGrowth:
    def test_pairwise_trivials(self):
        assert excess_growth_pairwise(np.array([0.5, 0.5])) == 0.0
        for d in (2, 5, 50):
            assert abs(excess_growth_pairwise(np.full(d, 1.0 / d))) < 1e-14

    def test_pairwise_direct_arithmetic(self):
        # (0.7, 0.3): 0.5 * (0.4)^2 = 0.08
        assert abs(excess_growth_pairwise(np.array([0.7, 0.3])) - 0.08) < 1e-15

    def test_pairwise_matches_double_loop(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            mu = interior_simplex(rng, int(rng.integers(2, 40)))
            brute = 0.0
            for i in range(len(mu)):
                for j in range(i + 1, len(mu)):
                    brute += (mu[i] - mu[j]) ** 2
            brute *= 0.5
            assert np.isclose(excess_growth_pairwise(mu), brute, rtol=1e-11)

    def test_classical_trivials_and_oracle(self):
        pi = np.array([0.5, 0.5])
        assert excess_growth_classical(pi, np.zeros((2, 2))) == 0.0
        point = np.array([1.0, 0.0, 0.0])
        assert abs(excess_growth_classical(point, np.eye(3) * 0.04)) < 1e-16
        # d=2, pi=(.5,.5), tau=diag(.04,.04): 0.5 (0.04 - 0.02) = 0.01
        got = excess_growth_classical(pi, np.diag([0.04, 0.04]))
        assert abs(got - 0.01) < 1e-15

    def test_classical_nonnegative_on_psd(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            d = int(rng.integers(2, 12))
            a = rng.standard_normal((d, d)) * 0.02
            tau = a @ a.T
            pi = interior_simplex(rng, d)
            assert excess_growth_classical(pi, tau) >= -1e-15

    def test_classical_dimension_mismatch(self):
        with pytest.raises(DomainError):
            excess_growth_classical(np.array([0.5, 0.5]), np.zeros((3, 3)))


class TestConcavityDiagnostic:
    def test_diversity_and_gibbs_concave(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            mu = interior_simplex(rng, 6, floor=1e-3)
            assert tangent_hessian_max_eig(diversity_generator(0.7), mu) < 1e-10
            assert tangent_hessian_max_eig(gibbs_entropy_generator(), mu) < 1e-10

    def test_product_entropy_flags_convexity(self):
        rng = np.random.default_rng(9)
        G = entropy_generator()
        assert not G.expected_concave
        for _ in range(20):
            mu = interior_simplex(rng, 6, floor=1e-3)
            assert tangent_hessian_max_eig(G, mu) > 0


class TestPathHelpers:
    def test_weights_on_path_matches_rowwise(self):
        rng = np.random.default_rng(12)
        mu = np.vstack([interior_simplex(rng, 7) for _ in range(15)])
        for G in ALL_GENERATORS:
            assert np.allclose(weights_on_path(G, mu),
                               np.vstack([G.weights(r) for r in mu]),
                               rtol=1e-12), G.describe()

    def test_log_value_on_path_matches_rowwise(self):
        rng = np.random.default_rng(13)
        mu = np.vstack([interior_simplex(rng, 5) for _ in range(10)])
        for G in ALL_GENERATORS:
            assert np.allclose(log_value_on_path(G, mu),
                               np.log([G.value(r) for r in mu]), rtol=1e-12)

    def test_direct_rule_only_for_diversity(self):
        with pytest.raises(ConfigError):
            custom_generator(lambda m: 1.0).__class__(
                kind="custom", weight_rule="direct", value_fn=lambda m: 1.0)
