// Acceptance harness: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Reference values come from independent oracles (Cox-de
// Boor recursion, finite differences, closed-form distributions), not from
// the library code paths under test.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bpinn/compiler.hpp"
#include "bpinn/experiments.hpp"
#include "bpinn/gadgets.hpp"
#include "bpinn/jet.hpp"
#include "bpinn/network.hpp"
#include "bpinn/pde.hpp"
#include "bpinn/posterior.hpp"
#include "bpinn/prior.hpp"
#include "bpinn/spline.hpp"
#include "oracles.hpp"

using namespace bpinn;

namespace {

int g_failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Cutoff exactness
// ---------------------------------------------------------------------------
void criterion1() {
    ClipSpec spec;  // printed coefficients, scale 1
    double worst = 0.0;
    for (int g = 0; g <= 10000; ++g) {
        const double x = -3.0 + 6.0 * g / 10000.0;
        double want;
        if (std::abs(x) < 1.0)
            want = x;
        else if (x >= 2.0)
            want = 2.0;
        else if (x <= -2.0)
            want = -2.0;
        else
            continue;  // blend region: only C2 continuity is specified there
        worst = std::max(worst, std::abs(clip_eval(spec, x) - want));
    }
    // One-sided second differences agree at every knot (C2 continuity).
    auto phi = [&](double x) { return clip_eval(spec, x); };
    double worst_d2 = 0.0;
    for (double t : spec.knots) {
        // The stencil is exact for cubics at any step; 0.02 keeps it inside
        // one polynomial piece (knot gaps >= 0.25) while limiting round-off
        // amplification by 1/h^2.
        const double left = oracle::one_sided_d2(phi, t, -1, 0.02);
        const double right = oracle::one_sided_d2(phi, t, +1, 0.02);
        worst_d2 = std::max(worst_d2, std::abs(left - right));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "max |phi-target|=%.3e, max one-sided d2 gap=%.3e", worst,
                  worst_d2);
    report(1, "C2 cutoff matches identity/saturation targets", worst <= 1e-12 && worst_d2 <= 1e-6,
           buf);
}

// ---------------------------------------------------------------------------
// 2. Gadget validation
// ---------------------------------------------------------------------------
void criterion2() {
    const GadgetCoefficients g = derive_gadgets();
    auto sq = [](double z) { return z * z; };
    auto ident = [](double z) { return z; };
    const double e_sq = validate_unary(g.square, sq, 0.0, 10.0);
    const double e_lin = validate_unary(g.linear, ident, 0.0, 10.0);
    const double e_prod = validate_product(g.product, 0.0, 10.0);
    const double e_plin = validate_unary(g.printed_linear, ident, 0.0, 10.0);
    const double e_pprod = validate_product(g.printed_product, 0.0, 10.0);
    std::printf("[info] verbatim linear identity: %s (rel err %.3e)\n",
                e_plin <= 1e-9 ? "pass" : "fail", e_plin);
    std::printf("[info] verbatim product identity: %s (rel err %.3e)\n",
                e_pprod <= 1e-9 ? "pass" : "fail", e_pprod);
    char buf[160];
    std::snprintf(buf, sizeof buf, "square=%.3e linear=%.3e product=%.3e", e_sq, e_lin, e_prod);
    report(2, "cube-activation gadget identities on [0,10]",
           e_sq <= 1e-9 && e_lin <= 1e-9 && e_prod <= 1e-9, buf);
}

// ---------------------------------------------------------------------------
// 3. Spline-compiler exactness vs the Cox-de Boor oracle
// ---------------------------------------------------------------------------
double oracle_axis_basis(int k, int l, int i, double x, int deriv) {
    switch (deriv) {
        case 0:
            return oracle::uniform_bspline(k, l, i, x);
        case 1:
            return l * (oracle::uniform_bspline(k - 1, l, i, x) -
                        oracle::uniform_bspline(k - 1, l, i + 1, x));
        default:
            return static_cast<double>(l) * l *
                   (oracle::uniform_bspline(k - 2, l, i, x) -
                    2.0 * oracle::uniform_bspline(k - 2, l, i + 1, x) +
                    oracle::uniform_bspline(k - 2, l, i + 2, x));
    }
}

Jet2 oracle_spline_jet(const SplineCoeffs& coeffs, std::span<const double> x) {
    const int k = coeffs.spec.order, l = coeffs.spec.segments, d = coeffs.spec.dim;
    const int nb = coeffs.spec.basis_count();
    // Per-axis basis values for derivative orders 0..2.
    std::vector<std::array<std::vector<double>, 3>> basis(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
        for (int o = 0; o < 3; ++o) {
            auto& row = basis[static_cast<std::size_t>(a)][static_cast<std::size_t>(o)];
            row.resize(static_cast<std::size_t>(nb));
            for (int c = 0; c < nb; ++c)
                row[static_cast<std::size_t>(c)] =
                    oracle_axis_basis(k, l, coeffs.spec.first_index() + c,
                                      x[static_cast<std::size_t>(a)], o);
        }
    Jet2 out(d);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t flat = 0; flat < coeffs.values.size(); ++flat) {
        std::size_t rem = flat;
        for (int a = 0; a < d; ++a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(nb));
            rem /= static_cast<std::size_t>(nb);
        }
        const double c = coeffs.values[flat];
        if (c == 0.0) continue;
        auto term = [&](std::span<const int> orders) {
            double v = c;
            for (int a = 0; a < d; ++a)
                v *= basis[static_cast<std::size_t>(a)][static_cast<std::size_t>(
                    orders[static_cast<std::size_t>(a)])][static_cast<std::size_t>(
                    idx[static_cast<std::size_t>(a)])];
            return v;
        };
        std::vector<int> orders(static_cast<std::size_t>(d), 0);
        out.value += term(orders);
        for (int a = 0; a < d; ++a) {
            std::fill(orders.begin(), orders.end(), 0);
            orders[static_cast<std::size_t>(a)] = 1;
            out.grad[static_cast<std::size_t>(a)] += term(orders);
            for (int b = a; b < d; ++b) {
                std::fill(orders.begin(), orders.end(), 0);
                orders[static_cast<std::size_t>(a)] += 1;
                orders[static_cast<std::size_t>(b)] += 1;
                const double t = term(orders);
                out.h(a, b) += t;
                if (b != a) out.h(b, a) += t;
            }
        }
    }
    return out;
}

void criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    const GadgetCoefficients gad = derive_gadgets();
    std::mt19937_64 rng(2024);
    double worst_v = 0.0, worst_g = 0.0, worst_h = 0.0;
    for (int k : {4, 7})
        for (int l : {2, 4, 8})
            for (int d : {1, 2}) {
                SplineSpec spec{k, l, d};
                auto f = [d](std::span<const double> x) {
                    double v = std::sin(2.0 * std::numbers::pi * x[0]);
                    if (d > 1) v *= 0.7 + std::cos(std::numbers::pi * x[1]);
                    return v;
                };
                const SplineCoeffs coeffs = quasi_interpolant(f, spec);
                const NetworkParams net = compile_spline_network(coeffs, gad);
                Evaluator ev(net);
                std::uniform_real_distribution<double> u(0.0, 1.0);
                const double margin = 1e-3 / l;  // stay off knot hyperplanes
                int done = 0;
                while (done < 1000) {
                    std::array<double, 2> x{u(rng), u(rng)};
                    bool near_knot = false;
                    for (int a = 0; a < d; ++a) {
                        const double s = x[static_cast<std::size_t>(a)] * l;
                        if (std::abs(s - std::round(s)) < margin * l) near_knot = true;
                    }
                    if (near_knot) continue;
                    ++done;
                    const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
                    const Jet2 want = oracle_spline_jet(coeffs, xs);
                    const Jet2 got = ev.forward_jet(xs);
                    worst_v = std::max(worst_v, std::abs(got.value - want.value) /
                                                    (1.0 + std::abs(want.value)));
                    for (int a = 0; a < d; ++a)
                        worst_g = std::max(worst_g,
                                           std::abs(got.grad[static_cast<std::size_t>(a)] -
                                                    want.grad[static_cast<std::size_t>(a)]) /
                                               (1.0 + std::abs(want.grad[static_cast<std::size_t>(a)])));
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b < d; ++b)
                            worst_h = std::max(worst_h, std::abs(got.h(a, b) - want.h(a, b)) /
                                                            (1.0 + std::abs(want.h(a, b))));
                }
            }
    char buf[160];
    std::snprintf(buf, sizeof buf, "rel err value=%.3e grad=%.3e hess=%.3e, %.1fs", worst_v,
                  worst_g, worst_h, seconds_since(t0));
    report(3, "compiled networks reproduce spline jets",
           worst_v <= 1e-6 && worst_g <= 1e-5 && worst_h <= 1e-5, buf);
}

// ---------------------------------------------------------------------------
// 4. Approximation rate
// ---------------------------------------------------------------------------
void criterion4() {
    using std::numbers::pi;
    auto f_jets = [](std::span<const double> x) {
        Jet2 j(1);
        j.value = std::sin(2.0 * pi * x[0]);
        j.grad[0] = 2.0 * pi * std::cos(2.0 * pi * x[0]);
        j.h(0, 0) = -4.0 * pi * pi * std::sin(2.0 * pi * x[0]);
        return j;
    };
    const ApproximationReport rep = approximation_report(f_jets, 4, 1, {4, 8, 16, 32}, 200);
    char buf[120];
    std::snprintf(buf, sizeof buf, "fitted C2 slope %.3f (target -2 +- 0.3)", rep.fitted_c2_slope);
    report(4, "C2 approximation error decays at the quartic-spline rate",
           rep.fitted_c2_slope >= -2.3 && rep.fitted_c2_slope <= -1.7, buf);
}

// ---------------------------------------------------------------------------
// 5. Size accounting
// ---------------------------------------------------------------------------
void criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const GadgetCoefficients gad = derive_gadgets();
    bool ok = true;
    std::string detail;
    for (int d : {1, 2}) {
        // The compiled size is ~ c (l + 2k - 1)^d; the additive 2k - 1 fades
        // only once l dominates it, so the ratio check uses larger grids.
        std::vector<int> ls = d == 1 ? std::vector<int>{32, 64, 128} : std::vector<int>{16, 32, 64};
        std::vector<double> sparsities, max_weights;
        for (int l : ls) {
            SplineSpec spec{4, l, d};
            auto f = [d](std::span<const double> x) {
                double v = std::sin(2.0 * std::numbers::pi * x[0]);
                if (d > 1) v *= std::cos(std::numbers::pi * x[1]);
                return v;
            };
            const SplineCoeffs coeffs = quasi_interpolant(f, spec);
            const NetworkParams net = compile_spline_network(coeffs, gad);
            sparsities.push_back(static_cast<double>(net.arch.sparsity()));
            max_weights.push_back(net.max_abs_weight());
        }
        const double target = std::pow(2.0, d);
        for (std::size_t i = 1; i < sparsities.size(); ++i) {
            const double r = sparsities[i] / sparsities[i - 1];
            detail += (detail.empty() ? "" : " ") + std::string("d=") + std::to_string(d) +
                      " S-ratio=" + std::to_string(r);
            if (r < 0.8 * target || r > 1.2 * target) ok = false;
            // max-weight grows no faster than l^d (with slack for the fit)
            const double wr = max_weights[i] / max_weights[i - 1];
            if (wr > 1.25 * target) ok = false;
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s, %.1fs", detail.c_str(), seconds_since(t0));
    report(5, "compiled network size scales like the spline grid", ok, buf);
}

// ---------------------------------------------------------------------------
// 6. Jet correctness on random sparse networks
// ---------------------------------------------------------------------------
void criterion6() {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> dims(1, 2), depths(1, 3), widths(1, 16);
    std::uniform_real_distribution<double> u(0.05, 0.95), w(-1.0, 1.0), keep(0.0, 1.0);
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        NetworkParams p;
        const int d = dims(rng);
        p.arch = Architecture::uniform(d, depths(rng), widths(rng));
        p.arch.mask.resize(p.arch.total_params());
        p.theta.resize(p.arch.total_params());
        p.bound = 1.0;
        for (std::size_t i = 0; i < p.theta.size(); ++i) {
            p.arch.mask[i] = keep(rng) < 0.6 ? 1 : 0;
            p.theta[i] = p.arch.mask[i] ? w(rng) : 0.0;
        }
        Evaluator ev(p);
        int pts = 0;
        while (pts < 3) {
            std::array<double, 2> x{u(rng), u(rng)};
            const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
            const Jet2 j = ev.forward_jet(xs);
            bool near_kink = false;
            double err = 0.0;
            for (int a = 0; a < d && !near_kink; ++a) {
                auto f = [&](double t) {
                    std::array<double, 2> y = x;
                    y[static_cast<std::size_t>(a)] = t;
                    return ev.forward_value(std::span<const double>(y.data(),
                                                                    static_cast<std::size_t>(d)));
                };
                const double xa = x[static_cast<std::size_t>(a)];
                const double g1 = oracle::fd1(f, xa);
                const double h2a = oracle::fd2(f, xa, 1e-4);
                const double h2b = oracle::fd2(f, xa, 5e-5);
                // Richardson consistency: a kink inside the stencil shows up
                // as disagreement between step sizes; resample the point.
                if (std::abs(h2a - h2b) > 1e-6 * (1.0 + std::abs(h2a))) {
                    near_kink = true;
                    break;
                }
                err = std::max(err, std::abs(j.grad[static_cast<std::size_t>(a)] - g1) /
                                        (1.0 + std::abs(g1)));
                err = std::max(err, std::abs(j.h(a, a) - h2a) / (1.0 + std::abs(h2a)));
            }
            if (near_kink) {
                x[0] = u(rng);
                x[1] = u(rng);
                continue;
            }
            worst = std::max(worst, err);
            ++pts;
            ++checked;
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "worst rel err %.3e over %d points", worst, checked);
    report(6, "network jets match central finite differences", worst <= 1e-5, buf);
}

// ---------------------------------------------------------------------------
// 7. Prior correctness
// ---------------------------------------------------------------------------
void criterion7() {
    PriorConfig cfg;
    std::mt19937_64 rng(7);
    const int n = 100000;
    const int wmax = 8;  // bins 1..wmax-1 plus a tail bin
    std::vector<double> observed(static_cast<std::size_t>(wmax), 0.0);
    double sparsity_sum = 0.0;
    long sparsity_count = 0;
    const Architecture a1 = Architecture::uniform(1, cfg.depth, 1);
    const double T = static_cast<double>(a1.total_params());
    for (int i = 0; i < n; ++i) {
        const NetworkParams p = sample_prior(cfg, 1, rng);
        const int W = p.arch.hidden_widths.front();
        ++observed[static_cast<std::size_t>(std::min(W, wmax) - 1)];
        if (W == 1) {
            sparsity_sum += static_cast<double>(p.arch.sparsity());
            ++sparsity_count;
        }
    }
    std::vector<double> expected(static_cast<std::size_t>(wmax), 0.0);
    double tail = static_cast<double>(n);
    for (int wv = 1; wv < wmax; ++wv) {
        expected[static_cast<std::size_t>(wv - 1)] = n * width_pmf(cfg, wv);
        tail -= expected[static_cast<std::size_t>(wv - 1)];
    }
    expected[static_cast<std::size_t>(wmax - 1)] = tail;
    const double stat = oracle::chi2_statistic(observed, expected);
    const double crit = oracle::chi2_quantile(0.01, wmax - 1);

    const double pa = 1.0 / (1.0 + std::pow(T, cfg.lambda_S));
    const double mean_want = T * pa;
    const double se = std::sqrt(T * pa * (1.0 - pa) / static_cast<double>(sparsity_count));
    const double mean_got = sparsity_sum / static_cast<double>(sparsity_count);
    char buf[160];
    std::snprintf(buf, sizeof buf, "chi2=%.2f (crit %.2f), sparsity %.4f vs %.4f (3se=%.4f)", stat,
                  crit, mean_got, mean_want, 3.0 * se);
    report(7, "prior sampler matches width pmf and sparsity law",
           stat < crit && std::abs(mean_got - mean_want) <= 3.0 * se, buf);
}

// ---------------------------------------------------------------------------
// 8. Sampler correctness against the prior
// ---------------------------------------------------------------------------
void criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    const EllipticProblem problem = make_sin1d();
    const Dataset empty;  // likelihood is identically 1: chain targets the prior
    PriorConfig prior;
    McmcConfig cfg;  // default move mixture
    const ClipSpec clip = model_clip(problem);
    std::mt19937_64 rng(101);
    ChainState state;
    state.params = sample_prior(prior, 1, rng);
    state.refresh(prior, clip, empty, problem);

    const long burn = 20000, thin = 100, keep = 100000;
    for (long i = 0; i < burn; ++i) mcmc_step(state, cfg, prior, clip, empty, problem, rng);
    const int wmax = 8;
    std::vector<double> observed(static_cast<std::size_t>(wmax), 0.0);
    // Two-state detailed-balance check lumped on {W=1} vs {W>1}: in
    // stationarity the transition flows between the classes must balance.
    long flow_ab = 0, flow_ba = 0;
    int prev_w = state.params.arch.hidden_widths.front();
    for (long s = 0; s < keep; ++s) {
        for (long t = 0; t < thin; ++t) {
            mcmc_step(state, cfg, prior, clip, empty, problem, rng);
            const int wnow = state.params.arch.hidden_widths.front();
            if (prev_w == 1 && wnow > 1) ++flow_ab;
            if (prev_w > 1 && wnow == 1) ++flow_ba;
            prev_w = wnow;
        }
        const int W = state.params.arch.hidden_widths.front();
        ++observed[static_cast<std::size_t>(std::min(W, wmax) - 1)];
    }
    std::vector<double> expected(static_cast<std::size_t>(wmax), 0.0);
    double tail = static_cast<double>(keep);
    for (int wv = 1; wv < wmax; ++wv) {
        expected[static_cast<std::size_t>(wv - 1)] = keep * width_pmf(prior, wv);
        tail -= expected[static_cast<std::size_t>(wv - 1)];
    }
    expected[static_cast<std::size_t>(wmax - 1)] = tail;
    const double stat = oracle::chi2_statistic(observed, expected);
    const double crit = oracle::chi2_quantile(0.01, wmax - 1);
    const double flow_ratio = static_cast<double>(flow_ab) / std::max<long>(flow_ba, 1);
    char buf[180];
    std::snprintf(buf, sizeof buf, "chi2=%.2f (crit %.2f), flow ratio %.4f (%ld/%ld), %.0fs", stat,
                  crit, flow_ratio, flow_ab, flow_ba, seconds_since(t0));
    report(8, "prior-targeting chain reproduces the width marginal",
           stat < crit && std::abs(flow_ratio - 1.0) <= 0.02, buf);
}

// ---------------------------------------------------------------------------
// 9. Contraction trend
// ---------------------------------------------------------------------------
void criterion9() {
    const auto t0 = std::chrono::steady_clock::now();
    const EllipticProblem problem = make_sin1d();
    PriorConfig prior;
    McmcConfig cfg;  // defaults: 60000 iterations, 20000 burn-in, warm start
    LossConfig loss;
    const std::vector<long> n_grid{256, 512, 1024, 2048, 4096};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<double> medians;
    bool mass_monotone = true;
    for (long n : n_grid) {
        std::vector<double> losses;
        for (std::uint64_t seed : seeds) {
            McmcConfig c = cfg;
            c.seed = seed;
            // The adapted walk step shrinks like 1/sqrt(n), so equilibration
            // time grows with n; scale the chain length to match.
            c.iterations = 30000 + 24 * n;
            c.burn_in = c.iterations / 3;
            const Dataset data = generate_dataset(problem, static_cast<int>(n), seed);
            const PosteriorSummary s = run_chain(c, prior, data, problem, loss);
            losses.push_back(s.mean_pop_loss);
            for (std::size_t i = 1; i < s.mass_exceeding.size(); ++i)
                if (s.mass_exceeding[i] > s.mass_exceeding[i - 1]) mass_monotone = false;
            std::printf("[info] n=%ld seed=%llu mean-loss=%.5f (%.0fs elapsed)\n", n,
                        static_cast<unsigned long long>(seed), s.mean_pop_loss,
                        seconds_since(t0));
            std::fflush(stdout);
        }
        std::sort(losses.begin(), losses.end());
        medians.push_back(losses[losses.size() / 2]);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (medians[i] >= medians[i - 1]) decreasing = false;
    std::vector<double> xs(n_grid.begin(), n_grid.end());
    const double slope = loglog_slope(xs, medians);
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "medians %.4f %.4f %.4f %.4f %.4f, slope %.3f (need <= -0.3), mass %s, %.0fs",
                  medians[0], medians[1], medians[2], medians[3], medians[4], slope,
                  mass_monotone ? "monotone" : "NOT monotone", seconds_since(t0));
    report(9, "posterior-mean loss contracts with sample size",
           decreasing && slope <= -0.3 && mass_monotone, buf);
}

// ---------------------------------------------------------------------------
// 10. Packing lower-bound demo
// ---------------------------------------------------------------------------
void criterion10() {
    const EllipticProblem problem = make_packing_problem(3);
    std::vector<double> ms, seps;
    bool boundary_zero = true, kl_linear = true;
    for (int m : {2, 3, 4}) {
        PackingConfig cfg;
        cfg.m = m;
        const Packing p = build_packing(cfg);
        const PackingTable t1 = packing_separation_and_kl(p, problem, 100, 100, 16);
        const PackingTable t2 = packing_separation_and_kl(p, problem, 250, 100, 16);
        for (std::size_t r = 0; r < t1.pairs.rows.size(); ++r) {
            if (std::abs(t1.pairs.rows[r][4]) > 1e-14) boundary_zero = false;
            const double kl1 = t1.pairs.rows[r][5];
            const double kl2 = t2.pairs.rows[r][5];
            // boundary term is zero, so KL must scale exactly with n1
            if (std::abs(kl2 / kl1 - 2.5) > 1e-9) kl_linear = false;
        }
        ms.push_back(static_cast<double>(m));
        seps.push_back(t1.min_interior_sq);
    }
    const double slope = loglog_slope(ms, seps);
    const double want = -(2.0 * 4.0 - 4.0);  // beta = 4
    char buf[160];
    std::snprintf(buf, sizeof buf, "separation slope %.3f vs %.1f, boundary %s, KL %s", slope,
                  want, boundary_zero ? "zero" : "NONZERO", kl_linear ? "linear" : "NOT linear");
    report(10, "bump-packing separations and KL scale as constructed",
           std::abs(slope - want) <= 0.15 * std::abs(want) && boundary_zero && kl_linear, buf);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion10();
    criterion9();  // long-running study last
    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
