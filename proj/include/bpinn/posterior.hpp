#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "bpinn/network.hpp"
#include "bpinn/pde.hpp"
#include "bpinn/prior.hpp"

namespace bpinn {

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

/// n interior observations of f and n boundary observations of g, both with
/// unit Gaussian noise. Interior sites are uniform on the box; boundary sites
/// are uniform on the boundary (faces weighted by their measure, which is
/// equal for the unit box).
inline Dataset generate_dataset(const EllipticProblem& problem, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    Dataset data;
    data.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    const int d = problem.domain.dim;
    for (int i = 0; i < n; ++i) {
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = unif(rng);
        data.interior_x.push_back(x);
        data.interior_f.push_back(problem.f(x) + noise(rng));
    }
    for (int j = 0; j < n; ++j) {
        Point y{0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) y[static_cast<std::size_t>(a)] = unif(rng);
        const int face = static_cast<int>(unif(rng) * 2 * d) % (2 * d);
        y[static_cast<std::size_t>(face / 2)] = (face % 2) ? 1.0 : 0.0;
        data.boundary_y.push_back(y);
        data.boundary_g.push_back(problem.g(y) + noise(rng));
    }
    return data;
}

// ---------------------------------------------------------------------------
// Likelihood
// ---------------------------------------------------------------------------

/// Clip region wide enough that the truth is never distorted: identity on
/// [-(K+1), K+1].
inline ClipSpec model_clip(const EllipticProblem& problem) {
    ClipSpec c;
    c.scale = problem.K + 1.0;
    return c;
}

/// Gaussian log likelihood of the clipped network, additive constants dropped.
inline double log_likelihood(const NetworkParams& params, const ClipSpec& clip,
                             const Dataset& data, const EllipticProblem& problem) {
    if (data.interior_x.empty() && data.boundary_y.empty()) return 0.0;
    Evaluator ev(params);
    Evaluator::Workspace ws;
    double ll = 0.0;
    const int d = problem.domain.dim;
    for (std::size_t i = 0; i < data.interior_x.size(); ++i) {
        const Point& x = data.interior_x[i];
        const Jet2 u = clip_eval(
            clip, ev.forward_jet(std::span<const double>(x.data(), static_cast<std::size_t>(d)),
                                 ws));
        const double gap = data.interior_f[i] - elliptic_operator(problem, u, x);
        ll -= 0.5 * gap * gap;
    }
    for (std::size_t j = 0; j < data.boundary_y.size(); ++j) {
        const Point& y = data.boundary_y[j];
        const double v = clip_eval(
            clip, ev.forward_value(std::span<const double>(y.data(), static_cast<std::size_t>(d)),
                                   ws));
        const double gap = data.boundary_g[j] - v;
        ll -= 0.5 * gap * gap;
    }
    return ll;
}

inline double log_likelihood(const NetworkParams& params, const Dataset& data,
                             const EllipticProblem& problem) {
    return log_likelihood(params, model_clip(problem), data, problem);
}

// ---------------------------------------------------------------------------
// Chain state and configuration
// ---------------------------------------------------------------------------

struct ChainState {
    NetworkParams params;
    double log_lik = 0.0;
    double log_prior = 0.0;

    void refresh(const PriorConfig& prior_cfg, const ClipSpec& clip, const Dataset& data,
                 const EllipticProblem& problem) {
        log_lik = log_likelihood(params, clip, data, problem);
        log_prior = log_prior_density(prior_cfg, params);
    }
};

enum class MoveKind { kWeightWalk = 0, kMaskFlip = 1, kWidthMove = 2, kBoundMove = 3 };

struct McmcConfig {
    std::array<double, 4> move_probs{0.7, 0.15, 0.05, 0.1};  // walk, flip, width, bound
    double step = 0.05;          // weight-walk std as a fraction of B
    double bound_step = 0.2;     // log-normal std for the bound move
    long iterations = 60000;
    long burn_in = 20000;
    long thinning = 20;
    int chains = 1;
    std::uint64_t seed = 1;
    // Optional heated burn-in: temperature decays geometrically from
    // anneal_start to 1 across the burn-in. 1 disables heating. Burn-in draws
    // are discarded; the retained phase always runs the exact kernel.
    double anneal_start = 1.0;
    // Warm start: initialize each chain at a dense network fitted to the data
    // by annealed stochastic search before handing over to the exact kernel.
    // The dominant posterior mode is separated from the empty network by a
    // large trans-dimensional barrier; starting inside it makes the retained
    // samples representative. 0 warm iterations fall back to a prior draw.
    int warm_width = 8;
    int warm_population = 6;  // parallel annealed searches with selection
    long warm_iterations = 100000;
    double warm_step = 0.1;
    double warm_bound = 8.0;
    // Adapt the walk step during burn-in toward this acceptance rate, then
    // freeze it (adaptation during the retained phase would bias the kernel).
    double target_walk_acceptance = 0.3;
    std::vector<double> m_grid{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    // Optional sieve envelope for the violation diagnostic; 0 disables.
    double sieve_width = 0.0, sieve_sparsity = 0.0, sieve_bound = 0.0;

    bool valid() const {
        double s = 0.0;
        for (double p : move_probs) {
            if (p < 0.0) return false;
            s += p;
        }
        return std::abs(s - 1.0) <= 1e-12 && step >= 0.0 && bound_step > 0.0 &&
               iterations >= 0 && burn_in >= 0 && thinning >= 1 && chains >= 1 &&
               anneal_start >= 1.0;
    }
};

namespace detail {

/// Reflects x into [-b, b] by folding.
inline double reflect_into(double x, double b) {
    const double period = 4.0 * b;
    double t = std::fmod(x + b, period);
    if (t < 0.0) t += period;
    return t <= 2.0 * b ? t - b : 3.0 * b - t;
}

struct LayerDims {
    int in = 0, out = 0;
};

inline std::vector<LayerDims> layer_dims(const Architecture& a) {
    std::vector<LayerDims> v;
    int prev = a.input_dim;
    for (int w : a.hidden_widths) {
        v.push_back({prev, w});
        prev = w;
    }
    v.push_back({prev, 1});
    return v;
}

/// Re-lays (theta, mask) onto the uniform width new_w. Grown slots are born
/// inactive; shrinking fails (returns false) when a removed slot is active.
inline bool resize_width(const NetworkParams& p, int new_w, NetworkParams& out) {
    if (new_w < 1) return false;
    out.arch = Architecture::uniform(p.arch.input_dim, p.arch.depth(), new_w);
    out.arch.mask.assign(out.arch.total_params(), 0);
    out.theta.assign(out.arch.total_params(), 0.0);
    out.bound = p.bound;
    const auto od = layer_dims(p.arch);
    const auto nd = layer_dims(out.arch);
    std::size_t ooff = 0, noff = 0;
    for (std::size_t li = 0; li < od.size(); ++li) {
        for (int r = 0; r < od[li].out; ++r)
            for (int c = 0; c < od[li].in; ++c) {
                const std::size_t oi = ooff + static_cast<std::size_t>(r) * od[li].in + c;
                if (r < nd[li].out && c < nd[li].in) {
                    const std::size_t ni = noff + static_cast<std::size_t>(r) * nd[li].in + c;
                    out.theta[ni] = p.theta[oi];
                    out.arch.mask[ni] = p.arch.mask[oi];
                } else if (p.arch.mask[oi] || p.theta[oi] != 0.0) {
                    return false;
                }
            }
        ooff += static_cast<std::size_t>(od[li].out) * od[li].in;
        noff += static_cast<std::size_t>(nd[li].out) * nd[li].in;
        for (int r = 0; r < od[li].out; ++r) {
            const std::size_t oi = ooff + static_cast<std::size_t>(r);
            if (r < nd[li].out) {
                out.theta[noff + static_cast<std::size_t>(r)] = p.theta[oi];
                out.arch.mask[noff + static_cast<std::size_t>(r)] = p.arch.mask[oi];
            } else if (p.arch.mask[oi] || p.theta[oi] != 0.0) {
                return false;
            }
        }
        ooff += static_cast<std::size_t>(od[li].out);
        noff += static_cast<std::size_t>(nd[li].out);
    }
    return true;
}

inline std::vector<std::size_t> active_indices(const Architecture& a) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < a.mask.size(); ++i)
        if (a.mask[i]) v.push_back(i);
    return v;
}

}  // namespace detail

struct StepOutcome {
    MoveKind move = MoveKind::kWeightWalk;
    bool accepted = false;
};

inline StepOutcome mcmc_step(ChainState& state, const McmcConfig& cfg,
                             const PriorConfig& prior_cfg, const ClipSpec& clip,
                             const Dataset& data, const EllipticProblem& problem,
                             std::mt19937_64& rng, double inv_temp = 1.0);

/// Annealed stochastic search for a high-likelihood dense network of the
/// prior's depth: random multi-coordinate Gaussian perturbations accepted by
/// a cooling Metropolis rule on the likelihood alone.
inline NetworkParams warm_start_params(const McmcConfig& cfg, const PriorConfig& prior_cfg,
                                       const ClipSpec& clip, const Dataset& data,
                                       const EllipticProblem& problem, std::mt19937_64& rng,
                                       double* step_out = nullptr) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Fit against a bounded subsample; the warm phase only picks a starting
    // point, so its cost should not grow with n.
    // Two-phase search. Phase 1 explores basins with a small population on a
    // coarse subsample; phase 2 refines the winner on a finer subsample at
    // low temperature. The goal is a start at or below the posterior's
    // typical loss for every n: relaxation upward (pruning toward the
    // equilibrium sparsity) is fast, while refinement downhill inside a mode
    // is extremely slow, so a too-poor start leaves the chain stranded.
    const auto subsample = [&](std::size_t cap) {
        Dataset sub;
        if (data.n() <= cap) return data;
        std::vector<std::size_t> order(data.n());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < cap; ++i) {
            sub.interior_x.push_back(data.interior_x[order[i]]);
            sub.interior_f.push_back(data.interior_f[order[i]]);
            sub.boundary_y.push_back(data.boundary_y[order[i]]);
            sub.boundary_g.push_back(data.boundary_g[order[i]]);
        }
        return sub;
    };
    Dataset sub = subsample(128);
    // A single annealed search is stochastic and often settles in a poor
    // local optimum. A small population of parallel searches with two
    // selection events (the bottom half restarts from jittered copies of the
    // top half) reliably lands in the dominant basin. Initialization only;
    // the sampling kernel is untouched.
    const int P = std::max(cfg.warm_population, 1);
    std::vector<NetworkParams> pop(static_cast<std::size_t>(P));
    std::vector<double> lls(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) {
        auto& m = pop[static_cast<std::size_t>(p)];
        m.arch = Architecture::uniform(problem.domain.dim, prior_cfg.depth, cfg.warm_width);
        m.bound = cfg.warm_bound;
        m.theta.resize(m.arch.total_params());
        for (auto& t : m.theta) t = 0.5 * gauss(rng);
        lls[static_cast<std::size_t>(p)] = log_likelihood(m, clip, sub, problem);
    }
    for (long it = 0; it < cfg.warm_iterations; ++it) {
        const double temp =
            1.0 +
            50.0 * (1.0 - static_cast<double>(it) / static_cast<double>(cfg.warm_iterations));
        for (int p = 0; p < P; ++p) {
            NetworkParams q = pop[static_cast<std::size_t>(p)];
            const int nmut = 1 + static_cast<int>(unif(rng) * 3.0);
            for (int m = 0; m < nmut; ++m) {
                const std::size_t i =
                    static_cast<std::size_t>(unif(rng) * static_cast<double>(q.theta.size())) %
                    q.theta.size();
                q.theta[i] = detail::reflect_into(q.theta[i] + cfg.warm_step * q.bound * gauss(rng),
                                                  q.bound);
            }
            const double ll2 = log_likelihood(q, clip, sub, problem);
            if (ll2 > lls[static_cast<std::size_t>(p)] ||
                std::log(unif(rng)) < (ll2 - lls[static_cast<std::size_t>(p)]) / temp) {
                pop[static_cast<std::size_t>(p)] = std::move(q);
                lls[static_cast<std::size_t>(p)] = ll2;
            }
        }
        if (P > 1 && (it == cfg.warm_iterations / 3 || it == 2 * cfg.warm_iterations / 3)) {
            std::vector<int> idx(static_cast<std::size_t>(P));
            for (int p = 0; p < P; ++p) idx[static_cast<std::size_t>(p)] = p;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                return lls[static_cast<std::size_t>(a)] > lls[static_cast<std::size_t>(b)];
            });
            for (int r = P / 2; r < P; ++r) {
                const auto src = static_cast<std::size_t>(idx[static_cast<std::size_t>(r - P / 2)]);
                const auto dst = static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]);
                pop[dst] = pop[src];
                for (auto& t : pop[dst].theta)
                    t = detail::reflect_into(t + 0.05 * gauss(rng), pop[dst].bound);
                lls[dst] = log_likelihood(pop[dst], clip, sub, problem);
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t p = 1; p < pop.size(); ++p)
        if (lls[p] > lls[best]) best = p;

    // Phase 2: cool the exact posterior kernel (all move types, full data)
    // from the dense winner to below unit temperature. The prior's sparsity
    // pressure prunes the dense fit here, under cooling with an adaptively
    // scaled walk step, rather than during burn-in -- each coordinate pruned
    // at unit temperature leaves damage that fixed-scale steps repair only
    // very slowly, which previously left large-n chains stranded above their
    // equilibrium. The adapted step is handed back so the sampler's burn-in
    // does not restart its own adaptation from the coarse default.
    ChainState state;
    state.params = pop[best];
    state.refresh(prior_cfg, clip, data, problem);
    McmcConfig c2 = cfg;
    for (long it = 0; it < cfg.warm_iterations; ++it) {
        const double frac = static_cast<double>(it) / static_cast<double>(cfg.warm_iterations);
        const double temp = std::pow(0.25, frac);  // 1 -> 0.25, geometric
        const StepOutcome out =
            mcmc_step(state, c2, prior_cfg, clip, data, problem, rng, 1.0 / temp);
        if (out.move == MoveKind::kWeightWalk)
            c2.step = std::clamp(c2.step * std::exp(0.02 * ((out.accepted ? 1.0 : 0.0) -
                                                            cfg.target_walk_acceptance)),
                                 1e-5, 1.0);
    }
    if (step_out) *step_out = c2.step;
    return state.params;
}

// ---------------------------------------------------------------------------
// One Metropolis-Hastings step
// ---------------------------------------------------------------------------

/// Applies one randomly selected move. `inv_temp` scales the log acceptance
/// ratio; 1 (the default) is the exact Metropolis-Hastings kernel, values in
/// (0,1) heat the chain during the annealed burn-in.
inline StepOutcome mcmc_step(ChainState& state, const McmcConfig& cfg, const PriorConfig& prior_cfg,
                             const ClipSpec& clip, const Dataset& data,
                             const EllipticProblem& problem, std::mt19937_64& rng,
                             double inv_temp) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double pick = unif(rng);
    MoveKind move = MoveKind::kBoundMove;
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) {
        acc += cfg.move_probs[static_cast<std::size_t>(m)];
        if (pick < acc) {
            move = static_cast<MoveKind>(m);
            break;
        }
    }

    NetworkParams prop = state.params;
    double log_correction = 0.0;  // log q(reverse)/q(forward)
    bool feasible = true;

    switch (move) {
        case MoveKind::kWeightWalk: {
            const auto idx = detail::active_indices(prop.arch);
            if (idx.empty()) {
                // Nothing to perturb: the identity proposal is always accepted.
                return {move, true};
            }
            if (unif(rng) < 0.7) {
                // Single-coordinate walk. The step size is a 50/50 mixture of a
                // coarse and a fine scale; the mixture weight is drawn
                // independently of the state, so the proposal stays symmetric.
                const std::size_t i =
                    idx[static_cast<std::size_t>(unif(rng) * idx.size()) % idx.size()];
                const double scale = (unif(rng) < 0.5 ? 1.0 : 0.125) * cfg.step * prop.bound;
                const double raw = prop.theta[i] + scale * gauss(rng);
                prop.theta[i] = detail::reflect_into(raw, prop.bound);
            } else {
                // joint walk over all active coordinates (symmetric as well)
                const double s = cfg.step * prop.bound / std::sqrt(static_cast<double>(idx.size()));
                for (std::size_t i : idx)
                    prop.theta[i] = detail::reflect_into(prop.theta[i] + s * gauss(rng),
                                                         prop.bound);
            }
            break;
        }
        case MoveKind::kMaskFlip: {
            const std::size_t t = prop.theta.size();
            const std::size_t i = static_cast<std::size_t>(unif(rng) * t) % t;
            if (prop.arch.mask[i]) {
                prop.arch.mask[i] = 0;
                prop.theta[i] = 0.0;
                log_correction = -std::log(2.0 * prop.bound);
            } else {
                prop.arch.mask[i] = 1;
                prop.theta[i] = (2.0 * unif(rng) - 1.0) * prop.bound;
                log_correction = std::log(2.0 * prop.bound);
            }
            break;
        }
        case MoveKind::kWidthMove: {
            const int w = prop.arch.hidden_widths.front();
            const int new_w = unif(rng) < 0.5 ? w + 1 : w - 1;
            NetworkParams resized;
            feasible = detail::resize_width(state.params, new_w, resized);
            if (feasible) prop = resized;
            break;
        }
        case MoveKind::kBoundMove: {
            const double new_b = prop.bound * std::exp(cfg.bound_step * gauss(rng));
            if (new_b < prop.max_abs_weight()) {
                feasible = false;
            } else {
                log_correction = std::log(new_b / prop.bound);
                prop.bound = new_b;
            }
            break;
        }
    }
    if (!feasible) return {move, false};

    const double prop_prior = log_prior_density(prior_cfg, prop);
    if (!std::isfinite(prop_prior)) return {move, false};
    const double prop_lik = log_likelihood(prop, clip, data, problem);
    const double log_ratio = inv_temp * ((prop_lik - state.log_lik) +
                                         (prop_prior - state.log_prior) + log_correction);
    if (log_ratio >= 0.0 || std::log(unif(rng)) < log_ratio) {
        state.params = std::move(prop);
        state.log_lik = prop_lik;
        state.log_prior = prop_prior;
        return {move, true};
    }
    return {move, false};
}

// ---------------------------------------------------------------------------
// Chain driver and summaries
// ---------------------------------------------------------------------------

struct SampleRecord {
    long iter = 0;
    int chain = 0;
    int width = 0;
    std::size_t sparsity = 0;
    double bound = 0.0;
    double log_lik = 0.0;
    double pop_loss = 0.0;
};

struct PosteriorSummary {
    std::vector<Point> grid;          // evaluation grid (interior)
    std::vector<double> mean_values;  // posterior mean predictor on the grid
    double mean_pop_loss = 0.0;       // population loss of the posterior mean
    std::vector<double> quantile_probs{0.1, 0.25, 0.5, 0.75, 0.9};
    std::vector<double> loss_quantiles;
    double epsilon_n = 0.0;
    std::vector<double> m_grid;
    std::vector<double> mass_exceeding;  // fraction with E(u) > M^2 eps_n^2
    double sieve_violation_fraction = 0.0;
    std::array<long, 4> move_attempts{};
    std::array<long, 4> move_accepts{};
    std::vector<SampleRecord> records;
    std::size_t retained = 0;
};

/// Contraction rate eps_n = n^{-(beta-2)/(d+2(beta-2))} sqrt(log n).
inline double contraction_rate(long n, double beta, int d) {
    const double e = (beta - 2.0) / (d + 2.0 * (beta - 2.0));
    return std::pow(static_cast<double>(n), -e) * std::sqrt(std::log(static_cast<double>(n)));
}

namespace detail {

/// Population loss from precomputed quadrature rules and precomputed jets at
/// the interior nodes / values at the boundary nodes.
inline double loss_from_cached(const EllipticProblem& problem, const LossConfig& cfg,
                               const QuadratureRule& qi, const QuadratureRule& qb,
                               const std::vector<Jet2>& interior_jets,
                               const std::vector<double>& boundary_vals) {
    double interior = 0.0;
    for (std::size_t i = 0; i < qi.points.size(); ++i) {
        const double r = residual_at(problem, interior_jets[i], qi.points[i]);
        interior += qi.weights[i] * r * r;
    }
    double boundary = 0.0;
    for (std::size_t j = 0; j < qb.points.size(); ++j) {
        const double e = boundary_vals[j] - problem.g(qb.points[j]);
        boundary += qb.weights[j] * e * e;
    }
    return interior + cfg.lambda * boundary;
}

}  // namespace detail

/// Uniform interior evaluation grid: 512 points for d=1, 64x64 for d=2,
/// 16^3 for d=3.
inline std::vector<Point> evaluation_grid(int d) {
    std::vector<Point> grid;
    const int m = d == 1 ? 512 : d == 2 ? 64 : 16;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(m);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point x{0.0, 0.0, 0.0};
        std::size_t rem = flat;
        for (int a = 0; a < d; ++a) {
            x[static_cast<std::size_t>(a)] =
                (static_cast<double>(rem % static_cast<std::size_t>(m)) + 0.5) / m;
            rem /= static_cast<std::size_t>(m);
        }
        grid.push_back(x);
    }
    return grid;
}

/// Runs cfg.chains independent chains, pools retained samples, and assembles
/// the posterior summary. `init` optionally pins every chain's initial state;
/// otherwise each chain starts from a fresh prior draw.
inline PosteriorSummary run_chain(const McmcConfig& cfg, const PriorConfig& prior_cfg,
                                  const Dataset& data, const EllipticProblem& problem,
                                  const LossConfig& loss_cfg,
                                  const NetworkParams* init = nullptr) {
    if (!cfg.valid()) throw std::invalid_argument("run_chain: invalid mcmc config");
    const int d = problem.domain.dim;
    const ClipSpec clip = model_clip(problem);
    const QuadratureRule qi = interior_rule(problem.domain, loss_cfg);
    const QuadratureRule qb = boundary_rule(problem.domain, loss_cfg);

    PosteriorSummary summary;
    summary.grid = evaluation_grid(d);
    summary.mean_values.assign(summary.grid.size(), 0.0);
    summary.m_grid = cfg.m_grid;
    summary.epsilon_n = data.n() > 0 ? contraction_rate(static_cast<long>(data.n()),
                                                        problem.beta, d)
                                     : 0.0;

    std::vector<Jet2> mean_interior_jets(qi.points.size(), Jet2(d));
    std::vector<double> mean_boundary_vals(qb.points.size(), 0.0);
    std::vector<double> sample_losses;
    std::size_t sieve_violations = 0;

    for (int chain = 0; chain < cfg.chains; ++chain) {
        std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(chain) * 0x9e3779b97f4a7c15ULL);
        ChainState state;
        McmcConfig step_cfg = cfg;  // carries the warm-start- and burn-in-adapted walk step
        if (init)
            state.params = *init;
        else if (cfg.warm_iterations > 0 && data.n() > 0)
            state.params =
                warm_start_params(cfg, prior_cfg, clip, data, problem, rng, &step_cfg.step);
        else
            state.params = sample_prior(prior_cfg, d, rng);
        state.refresh(prior_cfg, clip, data, problem);
        if (!std::isfinite(state.log_prior))
            throw std::invalid_argument("run_chain: initial state has zero prior density");

        for (long it = 0;; ++it) {
            if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) {
                // Record the current state.
                Evaluator ev(state.params);
                std::vector<Jet2> jets(qi.points.size());
                std::vector<double> bvals(qb.points.size());
                for (std::size_t i = 0; i < qi.points.size(); ++i) {
                    jets[i] = clip_eval(
                        clip, ev.forward_jet(std::span<const double>(
                                  qi.points[i].data(), static_cast<std::size_t>(d))));
                    mean_interior_jets[i] = jet_add(mean_interior_jets[i], jets[i]);
                }
                for (std::size_t j = 0; j < qb.points.size(); ++j) {
                    bvals[j] = clip_eval(clip, ev.forward_value(std::span<const double>(
                                                   qb.points[j].data(), static_cast<std::size_t>(d))));
                    mean_boundary_vals[j] += bvals[j];
                }
                for (std::size_t g = 0; g < summary.grid.size(); ++g)
                    summary.mean_values[g] += clip_eval(
                        clip, ev.forward_value(std::span<const double>(
                                  summary.grid[g].data(), static_cast<std::size_t>(d))));
                const double loss =
                    detail::loss_from_cached(problem, loss_cfg, qi, qb, jets, bvals);
                sample_losses.push_back(loss);
                SampleRecord rec;
                rec.iter = it;
                rec.chain = chain;
                rec.width = state.params.arch.hidden_widths.front();
                rec.sparsity = state.params.arch.sparsity();
                rec.bound = state.params.bound;
                rec.log_lik = state.log_lik;
                rec.pop_loss = loss;
                summary.records.push_back(rec);
                const bool violates =
                    (cfg.sieve_width > 0.0 && rec.width > cfg.sieve_width) ||
                    (cfg.sieve_sparsity > 0.0 &&
                     static_cast<double>(rec.sparsity) > cfg.sieve_sparsity) ||
                    (cfg.sieve_bound > 0.0 && rec.bound > cfg.sieve_bound);
                if (violates) ++sieve_violations;
            }
            if (it >= cfg.iterations) break;
            // Geometric cooling T0 -> 1 across the burn-in; exact kernel after.
            const double inv_temp =
                (cfg.burn_in > 0 && it < cfg.burn_in && cfg.anneal_start > 1.0)
                    ? std::pow(cfg.anneal_start,
                               -(1.0 - static_cast<double>(it) / static_cast<double>(cfg.burn_in)))
                    : 1.0;
            const StepOutcome out =
                mcmc_step(state, step_cfg, prior_cfg, clip, data, problem, rng, inv_temp);
            ++summary.move_attempts[static_cast<std::size_t>(out.move)];
            if (out.accepted) ++summary.move_accepts[static_cast<std::size_t>(out.move)];
            if (it < cfg.burn_in && out.move == MoveKind::kWeightWalk)
                step_cfg.step = std::clamp(
                    step_cfg.step * std::exp(0.02 * ((out.accepted ? 1.0 : 0.0) -
                                                     cfg.target_walk_acceptance)),
                    1e-5, 1.0);
        }
    }

    summary.retained = sample_losses.size();
    if (summary.retained == 0) throw std::runtime_error("run_chain: no retained samples");
    const double inv = 1.0 / static_cast<double>(summary.retained);
    for (double& v : summary.mean_values) v *= inv;
    for (Jet2& j : mean_interior_jets) j = jet_scale(j, inv);
    for (double& v : mean_boundary_vals) v *= inv;
    summary.mean_pop_loss = detail::loss_from_cached(problem, loss_cfg, qi, qb,
                                                     mean_interior_jets, mean_boundary_vals);

    std::vector<double> sorted = sample_losses;
    std::sort(sorted.begin(), sorted.end());
    for (double q : summary.quantile_probs) {
        const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        summary.loss_quantiles.push_back(sorted[lo] + (pos - static_cast<double>(lo)) *
                                                          (sorted[hi] - sorted[lo]));
    }
    for (double m : summary.m_grid) {
        const double threshold = m * m * summary.epsilon_n * summary.epsilon_n;
        std::size_t count = 0;
        for (double l : sample_losses)
            if (l > threshold) ++count;
        summary.mass_exceeding.push_back(static_cast<double>(count) * inv);
    }
    summary.sieve_violation_fraction = static_cast<double>(sieve_violations) * inv;
    return summary;
}

}  // namespace bpinn
