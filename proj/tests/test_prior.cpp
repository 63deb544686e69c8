#include "bpinn/prior.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace bpinn;

TEST(Prior, WidthPmfClosedFormValues) {
    PriorConfig cfg;  // lambda_W = 1
    EXPECT_NEAR(width_pmf(cfg, 1), 1.0 / (std::numbers::e - 1.0), 1e-12);
    EXPECT_NEAR(width_pmf(cfg, 2) / width_pmf(cfg, 1), 0.5, 1e-12);
    double sum = 0.0;
    for (int w = 1; w <= 60; ++w) sum += width_pmf(cfg, w);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_THROW(width_pmf(cfg, 0), std::invalid_argument);
}

TEST(Prior, SampleMatchesWidthPmf) {
    PriorConfig cfg;
    std::mt19937_64 rng(99);
    const int n = 100000;
    int w1 = 0;
    for (int i = 0; i < n; ++i)
        if (sample_prior(cfg, 1, rng).arch.hidden_widths.front() == 1) ++w1;
    EXPECT_NEAR(static_cast<double>(w1) / n, 1.0 / (std::numbers::e - 1.0), 0.005);
}

TEST(Prior, SparsityMeanGivenWidth) {
    PriorConfig cfg;
    std::mt19937_64 rng(3);
    // Condition on W = 2 draws and compare mean sparsity to T/(1+T^2).
    const Architecture a2 = Architecture::uniform(1, cfg.depth, 2);
    const double T = static_cast<double>(a2.total_params());
    const double mean_want = T / (1.0 + T * T);
    const double var = T * (1.0 / (1.0 + T * T)) * (1.0 - 1.0 / (1.0 + T * T));
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < 200000 && count < 30000; ++i) {
        const NetworkParams p = sample_prior(cfg, 1, rng);
        if (p.arch.hidden_widths.front() != 2) continue;
        sum += static_cast<double>(p.arch.sparsity());
        ++count;
    }
    ASSERT_GT(count, 1000);
    const double se = std::sqrt(var / count);
    EXPECT_NEAR(sum / count, mean_want, 3.0 * se);
}

TEST(Prior, AllDrawsAreValidStates) {
    PriorConfig cfg;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const NetworkParams p = sample_prior(cfg, 2, rng);
        EXPECT_TRUE(p.valid());
    }
}

TEST(Prior, LogDensitySpotValues) {
    // W=1, d=1, L=2: T = 6; lambda_S=2 gives activation prob 1/37; all-zeros
    // mask has log mass 6 log(36/37).
    PriorConfig cfg;
    cfg.depth = 2;
    NetworkParams p;
    p.arch = Architecture::uniform(1, 2, 1);
    ASSERT_EQ(p.arch.total_params(), 6u);
    p.arch.mask.assign(6, 0);
    p.theta.assign(6, 0.0);
    p.bound = 1.0;
    const double lp = log_prior_density(cfg, p);
    const double want = std::log(width_pmf(cfg, 1)) + 6.0 * std::log(36.0 / 37.0) +
                        std::log(cfg.lambda_B) - cfg.lambda_B * 1.0;
    EXPECT_NEAR(lp, want, 1e-12);
}

TEST(Prior, LogDensityInvalidStates) {
    PriorConfig cfg;
    NetworkParams p;
    p.arch = Architecture::uniform(1, cfg.depth, 1);
    p.theta.assign(p.arch.total_params(), 0.0);
    p.bound = 1.0;
    // theta nonzero off mask
    NetworkParams bad = p;
    bad.arch.mask.assign(bad.arch.total_params(), 0);
    bad.theta[0] = 0.3;
    EXPECT_EQ(log_prior_density(cfg, bad), -std::numeric_limits<double>::infinity());
    // |theta| above the bound
    NetworkParams big = p;
    big.theta[0] = 2.0;
    EXPECT_EQ(log_prior_density(cfg, big), -std::numeric_limits<double>::infinity());
    // wrong depth
    NetworkParams shallow;
    shallow.arch = Architecture::uniform(1, cfg.depth - 1, 1);
    shallow.theta.assign(shallow.arch.total_params(), 0.0);
    shallow.bound = 1.0;
    EXPECT_EQ(log_prior_density(cfg, shallow), -std::numeric_limits<double>::infinity());
}

TEST(Prior, SamplerAndDensityAreConsistent) {
    // Importance identity on the B marginal: under the sampler, B ~ Exp(1)
    // and the density term matches log(lambda_B) - lambda_B B.
    PriorConfig cfg;
    std::mt19937_64 rng(31);
    double mean_b = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) mean_b += sample_prior(cfg, 1, rng).bound;
    mean_b /= n;
    EXPECT_NEAR(mean_b, 1.0 / cfg.lambda_B, 0.02);
}

TEST(Prior, SparsityInequalityOnTGrid) {
    // 2T/(1+T^2) <= 1 for T >= 2 (lambda_S = 2); T = 1 would be the edge case
    // but never occurs since T >= d + 3.
    for (double T = 2.0; T <= 4096.0; T *= 2.0) EXPECT_LE(2.0 * T / (1.0 + T * T), 1.0);
    const Architecture smallest = Architecture::uniform(1, 1, 1);
    EXPECT_GE(smallest.total_params(), 4u);  // d + 3 at d = 1
}
