#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpinn/pde.hpp"
#include "bpinn/posterior.hpp"

#ifndef BPINN_GIT_REVISION
#define BPINN_GIT_REVISION "unknown"
#endif

namespace bpinn {

// ---------------------------------------------------------------------------
// Sieve schedule
// ---------------------------------------------------------------------------

/// Growing truncation envelope W_n, S_n ~ n^{d/(d+2(beta-2))}, B_n with an
/// extra log factor, and the target rate eps_n.
struct SieveSchedule {
    double C_W = 1.0, C_S = 1.0, C_B = 1.0;

    static double growth_exponent(double beta, int d) {
        return static_cast<double>(d) / (d + 2.0 * (beta - 2.0));
    }
    double width(long n, double beta, int d) const {
        return C_W * std::pow(static_cast<double>(n), growth_exponent(beta, d));
    }
    double sparsity(long n, double beta, int d) const {
        return C_S * std::pow(static_cast<double>(n), growth_exponent(beta, d));
    }
    double bound(long n, double beta, int d) const {
        return C_B * std::pow(static_cast<double>(n), growth_exponent(beta, d)) *
               std::log(static_cast<double>(n));
    }
    double rate(long n, double beta, int d) const { return contraction_rate(n, beta, d); }
};

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::string format_float(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

/// Hash of the experiment configuration, stable across runs.
inline std::string config_hash(const nlohmann::json& cfg) {
    std::ostringstream os;
    os << std::hex << detail::fnv1a(cfg.dump());
    return os.str();
}

/// Writes tables as CSV (one file per table when several) or a single JSON
/// document. The first CSV line is a metadata comment with the git revision,
/// seed and config hash.
inline void emit_results(const std::vector<Table>& tables, const std::string& path,
                         const std::string& format, std::uint64_t seed,
                         const nlohmann::json& cfg) {
    const std::string meta_rev = BPINN_GIT_REVISION;
    const std::string meta_hash = config_hash(cfg);
    if (format == "csv") {
        for (const Table& t : tables) {
            std::string file = path;
            if (tables.size() > 1) {
                const std::size_t dot = file.rfind('.');
                const std::string stem = dot == std::string::npos ? file : file.substr(0, dot);
                const std::string ext = dot == std::string::npos ? ".csv" : file.substr(dot);
                file = stem + "_" + t.name + ext;
            }
            std::ofstream out(file);
            if (!out) throw std::runtime_error("emit_results: cannot open " + file);
            out << "# git_revision=" << meta_rev << " seed=" << seed
                << " config_hash=" << meta_hash << "\n";
            for (std::size_t c = 0; c < t.columns.size(); ++c)
                out << (c ? "," : "") << t.columns[c];
            out << "\n";
            for (const auto& row : t.rows) {
                for (std::size_t c = 0; c < row.size(); ++c)
                    out << (c ? "," : "") << detail::format_float(row[c]);
                out << "\n";
            }
            if (!out) throw std::runtime_error("emit_results: write failed for " + file);
        }
    } else if (format == "json") {
        nlohmann::json doc;
        doc["metadata"] = {{"git_revision", meta_rev}, {"seed", seed}, {"config_hash", meta_hash}};
        for (const Table& t : tables) {
            nlohmann::json jt;
            jt["columns"] = t.columns;
            jt["rows"] = t.rows;
            doc["tables"][t.name] = jt;
        }
        std::ofstream out(path);
        if (!out) throw std::runtime_error("emit_results: cannot open " + path);
        out << doc.dump(2) << "\n";
        if (!out) throw std::runtime_error("emit_results: write failed for " + path);
    } else {
        throw std::invalid_argument("emit_results: unknown format " + format);
    }
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need matched series of length >= 2");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Contraction-rate study
// ---------------------------------------------------------------------------

struct RateStudyResult {
    Table runs;     // one row per (n, seed)
    Table medians;  // one row per n
    double fitted_slope = 0.0;
    double theoretical_slope = 0.0;
    bool any_failed = false;
};

/// Runs the posterior over an n-grid x seed-grid, records the loss of the
/// posterior mean, posterior loss quantiles, ball-mass and sieve diagnostics,
/// and fits the log-log slope of the median mean-loss against n. Cells run in
/// parallel.
inline RateStudyResult rate_study(const EllipticProblem& problem, const std::vector<long>& n_grid,
                                  const std::vector<std::uint64_t>& seeds,
                                  const McmcConfig& mcmc_cfg, const PriorConfig& prior_cfg,
                                  const LossConfig& loss_cfg, const SieveSchedule& sieve,
                                  int max_threads = 0) {
    if (n_grid.size() < 2) throw std::invalid_argument("rate_study: need at least 2 n values");
    const int d = problem.domain.dim;
    const double beta = problem.beta;

    struct Cell {
        long n = 0;
        std::uint64_t seed = 0;
        double mean_loss = 0.0, median_loss = 0.0, mass_m1 = 0.0;
        double sieve_violation = 0.0;
        bool failed = false;
    };
    std::vector<Cell> cells;
    for (long n : n_grid)
        for (std::uint64_t s : seeds) cells.push_back({n, s});

    auto run_cell = [&](Cell& cell) {
        try {
            McmcConfig cfg = mcmc_cfg;
            cfg.seed = cell.seed;
            cfg.sieve_width = sieve.width(cell.n, beta, d);
            cfg.sieve_sparsity = sieve.sparsity(cell.n, beta, d);
            cfg.sieve_bound = sieve.bound(cell.n, beta, d);
            const Dataset data = generate_dataset(problem, static_cast<int>(cell.n), cell.seed);
            const PosteriorSummary s = run_chain(cfg, prior_cfg, data, problem, loss_cfg);
            cell.mean_loss = s.mean_pop_loss;
            cell.median_loss = s.loss_quantiles[2];  // probs are fixed; index 2 is the median
            // mass outside the M=1 ball, if present in the grid
            cell.mass_m1 = s.mass_exceeding.empty() ? 0.0 : s.mass_exceeding.front();
            for (std::size_t i = 0; i < s.m_grid.size(); ++i)
                if (s.m_grid[i] == 1.0) cell.mass_m1 = s.mass_exceeding[i];
            cell.sieve_violation = s.sieve_violation_fraction;
        } catch (const std::exception&) {
            cell.failed = true;
        }
    };

    unsigned hw = max_threads > 0 ? static_cast<unsigned>(max_threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BPINN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) hw = static_cast<unsigned>(v);
    }
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    for (unsigned t = 0; t < std::min<std::size_t>(hw, cells.size()); ++t)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t idx;
                {
                    std::lock_guard<std::mutex> lk(mu);
                    if (next >= cells.size()) return;
                    idx = next++;
                }
                run_cell(cells[idx]);
            }
        });
    for (auto& th : pool) th.join();

    RateStudyResult res;
    res.theoretical_slope = -2.0 * (beta - 2.0) / (d + 2.0 * (beta - 2.0));
    res.runs.name = "runs";
    res.runs.columns = {"n", "seed", "mean_loss", "median_loss", "mass_m1", "sieve_violation",
                        "failed"};
    for (const Cell& c : cells) {
        res.any_failed = res.any_failed || c.failed;
        res.runs.rows.push_back({static_cast<double>(c.n), static_cast<double>(c.seed),
                                 c.mean_loss, c.median_loss, c.mass_m1, c.sieve_violation,
                                 c.failed ? 1.0 : 0.0});
    }

    res.medians.name = "medians";
    res.medians.columns = {"n", "median_mean_loss", "eps_n_sq"};
    std::vector<double> xs, ys;
    for (long n : n_grid) {
        std::vector<double> losses;
        for (const Cell& c : cells)
            if (c.n == n && !c.failed) losses.push_back(c.mean_loss);
        if (losses.empty()) continue;
        std::sort(losses.begin(), losses.end());
        const double med = losses.size() % 2 ? losses[losses.size() / 2]
                                             : 0.5 * (losses[losses.size() / 2 - 1] +
                                                      losses[losses.size() / 2]);
        const double eps = sieve.rate(n, beta, d);
        res.medians.rows.push_back({static_cast<double>(n), med, eps * eps});
        xs.push_back(static_cast<double>(n));
        ys.push_back(med);
    }
    if (xs.size() >= 2) res.fitted_slope = loglog_slope(xs, ys);
    return res;
}

// ---------------------------------------------------------------------------
// Packing lower-bound demo
// ---------------------------------------------------------------------------

/// Separated bump-sum hypotheses indexed by binary codewords on an m^d grid.
struct PackingConfig {
    int m = 2;               // grid resolution per axis
    int dim = 3;             // spatial dimension (m^dim >= 8 required)
    double amplitude = 0.5;  // w in (0,1)
    double beta = 4.0;
    int num_codes = 2;       // 2 = complementary pair; larger uses greedy codes
    double support_fraction = 0.9;  // bump support as a fraction of its cell
    std::uint64_t seed = 7;
};

struct Packing {
    PackingConfig cfg;
    std::vector<Point> centers;                   // m^d cell centers
    std::vector<std::vector<std::uint8_t>> codes;  // codewords tau^(k)
    double scale = 0.0;                           // w / m^beta
};

namespace detail {

/// Scalar mollifier profile h(s) = exp(-1/(1-s^2)) on (-1,1) with first and
/// second derivatives; identically zero (all orders) outside.
inline void bump_profile(double s, double& h, double& dh, double& d2h) {
    if (std::abs(s) >= 1.0) {
        h = dh = d2h = 0.0;
        return;
    }
    const double r = 1.0 - s * s;
    const double q1 = -2.0 * s / (r * r);
    const double q2 = -2.0 / (r * r) - 8.0 * s * s / (r * r * r);
    h = std::exp(-1.0 / r);
    dh = q1 * h;
    d2h = (q2 + q1 * q1) * h;
}

}  // namespace detail

/// Tensor-product bump jet centered at c, scaled to a cell of an m-grid.
/// Support is the centered box of half-width support_fraction/(2m) per axis.
inline Jet2 bump_jet(const Point& x, const Point& center, int m, double support_fraction, int d) {
    const double inv_half = 2.0 * m / support_fraction;  // s = inv_half * (x - c)
    Jet2 out = Jet2::constant(d, 1.0);
    for (int a = 0; a < d; ++a) {
        const double s = inv_half * (x[static_cast<std::size_t>(a)] -
                                     center[static_cast<std::size_t>(a)]);
        double h, dh, d2h;
        detail::bump_profile(s, h, dh, d2h);
        Jet2 axis(d, h);
        axis.grad[static_cast<std::size_t>(a)] = dh * inv_half;
        axis.h(a, a) = d2h * inv_half * inv_half;
        out = jet_mul(out, axis);
    }
    return out;
}

/// Builds the codeword family. The default two-codeword set is the
/// complementary pair (all zeros, all ones) whose Hamming distance is m^d;
/// larger requests use a seeded randomized-greedy construction keeping every
/// pairwise distance >= m^d/8.
inline Packing build_packing(const PackingConfig& cfg) {
    const int d = cfg.dim;
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("build_packing: dim out of range");
    std::size_t cells = 1;
    for (int a = 0; a < d; ++a) cells *= static_cast<std::size_t>(cfg.m);
    if (cells < 8) throw std::invalid_argument("build_packing: need m^d >= 8");
    if (cfg.num_codes < 2) throw std::invalid_argument("build_packing: need >= 2 codewords");
    if (cfg.amplitude <= 0.0 || cfg.amplitude >= 1.0)
        throw std::invalid_argument("build_packing: amplitude must be in (0,1)");

    Packing p;
    p.cfg = cfg;
    p.scale = cfg.amplitude * std::pow(static_cast<double>(cfg.m), -cfg.beta);
    for (std::size_t flat = 0; flat < cells; ++flat) {
        Point c{0.0, 0.0, 0.0};
        std::size_t rem = flat;
        for (int a = 0; a < d; ++a) {
            c[static_cast<std::size_t>(a)] =
                (static_cast<double>(rem % static_cast<std::size_t>(cfg.m)) + 0.5) / cfg.m;
            rem /= static_cast<std::size_t>(cfg.m);
        }
        p.centers.push_back(c);
    }

    p.codes.push_back(std::vector<std::uint8_t>(cells, 0));
    p.codes.push_back(std::vector<std::uint8_t>(cells, 1));
    const std::size_t min_dist = cells / 8;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> bit(0, 1);
    int attempts = 0;
    while (p.codes.size() < static_cast<std::size_t>(cfg.num_codes)) {
        if (++attempts > 100000)
            throw std::runtime_error("build_packing: cannot satisfy code request");
        std::vector<std::uint8_t> cand(cells);
        for (auto& b : cand) b = static_cast<std::uint8_t>(bit(rng));
        bool ok = true;
        for (const auto& c : p.codes) {
            std::size_t dist = 0;
            for (std::size_t i = 0; i < cells; ++i) dist += c[i] != cand[i];
            if (dist < std::max<std::size_t>(min_dist, 1)) {
                ok = false;
                break;
            }
        }
        if (ok) p.codes.push_back(std::move(cand));
    }
    // Varshamov-Gilbert property, asserted.
    for (std::size_t a = 0; a < p.codes.size(); ++a)
        for (std::size_t b = a + 1; b < p.codes.size(); ++b) {
            std::size_t dist = 0;
            for (std::size_t i = 0; i < cells; ++i) dist += p.codes[a][i] != p.codes[b][i];
            if (dist < std::max<std::size_t>(min_dist, 1))
                throw std::runtime_error("build_packing: distance bound violated");
        }
    return p;
}

/// u_k = sum_j tau_j^{(k)} (w/m^beta) g(m (x - x_j)) as a jet field.
inline JetField packing_function(const Packing& p, std::size_t k) {
    if (k >= p.codes.size()) throw std::out_of_range("packing_function: codeword index");
    return [p, k](const Point& x) {
        const int d = p.cfg.dim;
        Jet2 acc(d);
        // Only the cell containing x can contribute (disjoint supports).
        std::size_t flat = 0, stride = 1;
        for (int a = 0; a < d; ++a) {
            long cell = static_cast<long>(std::floor(x[static_cast<std::size_t>(a)] * p.cfg.m));
            cell = std::clamp<long>(cell, 0, p.cfg.m - 1);
            flat += static_cast<std::size_t>(cell) * stride;
            stride *= static_cast<std::size_t>(p.cfg.m);
        }
        if (p.codes[k][flat])
            acc = jet_add(acc, jet_scale(bump_jet(x, p.centers[flat], p.cfg.m,
                                                  p.cfg.support_fraction, d),
                                         p.scale));
        return acc;
    };
}

/// Plain constant-coefficient problem (A = I, V = 1, zero data) used as the
/// differential operator in the packing demo.
inline EllipticProblem make_packing_problem(int d, double beta = 4.0, double K = 2.0) {
    EllipticProblem p;
    p.domain = Domain{d};
    p.A = detail::identity_coeff(d);
    p.divA = detail::zero_div(d);
    p.V = [](const Point&) { return 1.0; };
    p.f = [](const Point&) { return 0.0; };
    p.g = [](const Point&) { return 0.0; };
    p.beta = beta;
    p.K = K;
    p.name = "packing";
    return p;
}

struct PackingTable {
    Table pairs;  // k, k', hamming, interior_sq, boundary_sq, kl
    double min_interior_sq = 0.0;
};

/// Pairwise separations and KL divergences. Interior norms use per-cell
/// tensor Gauss-Legendre quadrature of the squared residual of a single bump
/// (supports are disjoint, so pair norms are sums over differing cells);
/// boundary norms use the surface quadrature directly.
inline PackingTable packing_separation_and_kl(const Packing& p, const EllipticProblem& problem,
                                              long n1, long n2, int nodes_per_axis = 24) {
    const int d = p.cfg.dim;
    if (problem.domain.dim != d)
        throw std::invalid_argument("packing_separation_and_kl: dimension mismatch");

    // Per-cell squared residual norm of the scaled bump.
    std::vector<double> x1, w1;
    detail::gauss_legendre(nodes_per_axis, x1, w1);
    std::vector<double> cell_norm(p.centers.size(), 0.0);
    const double h = 1.0 / p.cfg.m;
    for (std::size_t j = 0; j < p.centers.size(); ++j) {
        std::size_t pts = 1;
        for (int a = 0; a < d; ++a) pts *= static_cast<std::size_t>(nodes_per_axis);
        double acc = 0.0;
        for (std::size_t flat = 0; flat < pts; ++flat) {
            Point x{0.0, 0.0, 0.0};
            double wq = 1.0;
            std::size_t rem = flat;
            for (int a = 0; a < d; ++a) {
                const std::size_t i = rem % static_cast<std::size_t>(nodes_per_axis);
                rem /= static_cast<std::size_t>(nodes_per_axis);
                x[static_cast<std::size_t>(a)] =
                    p.centers[j][static_cast<std::size_t>(a)] + h * (x1[i] - 0.5);
                wq *= w1[i] * h;
            }
            const Jet2 u = jet_scale(bump_jet(x, p.centers[j], p.cfg.m, p.cfg.support_fraction, d),
                                     p.scale);
            const double r = elliptic_operator(problem, u, x);
            acc += wq * r * r;
        }
        cell_norm[j] = acc;
    }

    const LossConfig bcfg;  // default surface quadrature
    const QuadratureRule qb = boundary_rule(problem.domain, bcfg);

    PackingTable out;
    out.pairs.name = "pairs";
    out.pairs.columns = {"k", "kprime", "hamming", "interior_sq", "boundary_sq", "kl"};
    out.min_interior_sq = std::numeric_limits<double>::infinity();
    const double vol = problem.domain.interior_measure();
    const double surf = problem.domain.boundary_measure();
    for (std::size_t a = 0; a < p.codes.size(); ++a)
        for (std::size_t b = a + 1; b < p.codes.size(); ++b) {
            std::size_t ham = 0;
            double interior = 0.0;
            for (std::size_t j = 0; j < p.centers.size(); ++j)
                if (p.codes[a][j] != p.codes[b][j]) {
                    ++ham;
                    interior += cell_norm[j];
                }
            const JetField ua = packing_function(p, a);
            const JetField ub = packing_function(p, b);
            double boundary = 0.0;
            for (std::size_t q = 0; q < qb.points.size(); ++q) {
                const double e = ua(qb.points[q]).value - ub(qb.points[q]).value;
                boundary += qb.weights[q] * e * e;
            }
            const double kl = static_cast<double>(n1) / (2.0 * vol) * interior +
                              static_cast<double>(n2) / (2.0 * surf) * boundary;
            out.pairs.rows.push_back({static_cast<double>(a), static_cast<double>(b),
                                      static_cast<double>(ham), interior, boundary, kl});
            out.min_interior_sq = std::min(out.min_interior_sq, interior);
        }
    return out;
}

}  // namespace bpinn
