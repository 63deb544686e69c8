#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "bpinn/network.hpp"

namespace bpinn {

/// Hyperparameters of the spike-and-slab network prior. Depth is a fixed
/// constant; the prior varies width, mask, bound and weights.
struct PriorConfig {
    double lambda_W = 1.0;  // width rate (zero-truncated Poisson)
    double lambda_S = 2.0;  // sparsity exponent: activation prob (1+T^lambda_S)^-1
    double lambda_B = 1.0;  // bound rate (exponential)
    int depth = 3;          // L, fixed

    bool valid() const {
        return lambda_W > 0.0 && lambda_S > 0.0 && lambda_B > 0.0 && depth >= 1;
    }
};

/// Zero-truncated Poisson mass lambda_W^w / ((e^lambda_W - 1) w!).
inline double width_pmf(const PriorConfig& cfg, int w) {
    if (w < 1) throw std::invalid_argument("width_pmf: w must be >= 1");
    return std::exp(w * std::log(cfg.lambda_W) - std::lgamma(w + 1.0)) /
           std::expm1(cfg.lambda_W);
}

/// Per-coordinate activation probability given the dense parameter count T.
inline double activation_prob(const PriorConfig& cfg, std::size_t total_params) {
    return 1.0 / (1.0 + std::pow(static_cast<double>(total_params), cfg.lambda_S));
}

/// Draws (W, gamma, B, theta) from the hierarchical prior.
inline NetworkParams sample_prior(const PriorConfig& cfg, int input_dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif01(0.0, 1.0);

    // W via inverse-cdf on the zero-truncated Poisson.
    int w = 1;
    {
        double u = unif01(rng);
        double acc = 0.0;
        for (int k = 1; k <= 4096; ++k) {
            acc += width_pmf(cfg, k);
            if (u <= acc || k == 4096) {
                w = k;
                break;
            }
        }
    }

    NetworkParams p;
    p.arch = Architecture::uniform(input_dim, cfg.depth, w);
    const std::size_t T = p.arch.total_params();
    const double prob = activation_prob(cfg, T);
    p.arch.mask.assign(T, 0);
    for (std::size_t i = 0; i < T; ++i) p.arch.mask[i] = unif01(rng) < prob ? 1 : 0;

    std::exponential_distribution<double> exp_b(cfg.lambda_B);
    p.bound = exp_b(rng);
    if (p.bound <= 0.0) p.bound = std::numeric_limits<double>::min();

    p.theta.assign(T, 0.0);
    std::uniform_real_distribution<double> slab(-p.bound, p.bound);
    for (std::size_t i = 0; i < T; ++i)
        if (p.arch.mask[i]) p.theta[i] = slab(rng);
    return p;
}

/// Log prior density with respect to counting measure on (W, gamma), Lebesgue
/// on B, and Lebesgue on the active coordinates (point mass at 0 elsewhere).
/// Returns -inf for states the prior cannot produce.
inline double log_prior_density(const PriorConfig& cfg, const NetworkParams& params) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    const Architecture& a = params.arch;
    if (a.depth() != cfg.depth) return neg_inf;
    if (a.max_width() == 0) return neg_inf;
    // Prior widths are uniform across hidden layers.
    for (int h : a.hidden_widths)
        if (h != a.hidden_widths.front()) return neg_inf;
    if (params.bound <= 0.0) return neg_inf;
    if (params.theta.size() != a.total_params() || a.mask.size() != params.theta.size())
        return neg_inf;
    std::size_t s = 0;
    for (std::size_t i = 0; i < params.theta.size(); ++i) {
        if (!a.mask[i]) {
            if (params.theta[i] != 0.0) return neg_inf;
        } else {
            if (std::abs(params.theta[i]) > params.bound) return neg_inf;
            ++s;
        }
    }
    const int w = a.hidden_widths.front();
    const std::size_t T = a.total_params();
    const double prob = activation_prob(cfg, T);
    double lp = std::log(width_pmf(cfg, w));
    lp += static_cast<double>(s) * std::log(prob) +
          static_cast<double>(T - s) * std::log1p(-prob);
    lp += std::log(cfg.lambda_B) - cfg.lambda_B * params.bound;
    lp -= static_cast<double>(s) * std::log(2.0 * params.bound);
    return lp;
}

}  // namespace bpinn
