#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpinn/jet.hpp"

namespace bpinn {

using Point = std::array<double, kMaxDim>;
using CoeffMatrix = std::array<double, kMaxDim * kMaxDim>;  // row-major d x d

// ---------------------------------------------------------------------------
// Domain: the unit box (0,1)^d
// ---------------------------------------------------------------------------

struct Domain {
    int dim = 1;
    double interior_measure() const { return 1.0; }
    double boundary_measure() const { return dim == 1 ? 2.0 : 2.0 * dim; }
};

// ---------------------------------------------------------------------------
// Elliptic problem -div(A grad u) + V u = f in Omega, u = g on the boundary
// ---------------------------------------------------------------------------

struct EllipticProblem {
    Domain domain;
    std::function<CoeffMatrix(const Point&)> A;
    std::function<Point(const Point&)> divA;  // (div A)_i = sum_j d_j A_{ji}
    std::function<double(const Point&)> V;
    std::function<double(const Point&)> f;
    std::function<double(const Point&)> g;
    std::function<Jet2(const Point&)> u_star;  // empty when unknown
    double beta = 4.0;
    double K = 2.0;
    double r_min = 0.5, C_A = 2.0, V_min = 0.1, V_max = 4.0;
    std::string name = "custom";

    bool has_solution() const { return static_cast<bool>(u_star); }
};

/// -sum_{ij} A_{ji} u_ij - sum_i (div A)_i u_i + V u - f at x.
inline double residual_at(const EllipticProblem& problem, const Jet2& u, const Point& x) {
    const int d = problem.domain.dim;
    if (u.dim != d) throw std::invalid_argument("residual_at: dimension mismatch");
    const CoeffMatrix a = problem.A(x);
    const Point da = problem.divA(x);
    double acc = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) acc -= a[static_cast<std::size_t>(j) * kMaxDim + i] * u.h(i, j);
    for (int i = 0; i < d; ++i) acc -= da[static_cast<std::size_t>(i)] * u.grad[static_cast<std::size_t>(i)];
    return acc + problem.V(x) * u.value - problem.f(x);
}

/// Same differential operator without the data term f.
inline double elliptic_operator(const EllipticProblem& problem, const Jet2& u, const Point& x) {
    const int d = problem.domain.dim;
    const CoeffMatrix a = problem.A(x);
    const Point da = problem.divA(x);
    double acc = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) acc -= a[static_cast<std::size_t>(j) * kMaxDim + i] * u.h(i, j);
    for (int i = 0; i < d; ++i) acc -= da[static_cast<std::size_t>(i)] * u.grad[static_cast<std::size_t>(i)];
    return acc + problem.V(x) * u.value;
}

/// Builds f and g from a chosen solution so the PDE holds by construction.
inline EllipticProblem manufactured_problem(std::function<Jet2(const Point&)> u_star,
                                            std::function<CoeffMatrix(const Point&)> A,
                                            std::function<Point(const Point&)> divA,
                                            std::function<double(const Point&)> V, Domain domain,
                                            double beta = 4.0, double K = 2.0) {
    EllipticProblem p;
    p.domain = domain;
    p.A = std::move(A);
    p.divA = std::move(divA);
    p.V = std::move(V);
    p.u_star = std::move(u_star);
    p.beta = beta;
    p.K = K;
    auto ustar = p.u_star;
    EllipticProblem* self = nullptr;  // f closes over copies instead
    (void)self;
    auto a_copy = p.A;
    auto da_copy = p.divA;
    auto v_copy = p.V;
    const int d = domain.dim;
    p.f = [ustar, a_copy, da_copy, v_copy, d](const Point& x) {
        const Jet2 u = ustar(x);
        double acc = 0.0;
        const CoeffMatrix a = a_copy(x);
        const Point da = da_copy(x);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) acc -= a[static_cast<std::size_t>(j) * kMaxDim + i] * u.h(i, j);
        for (int i = 0; i < d; ++i) acc -= da[static_cast<std::size_t>(i)] * u.grad[static_cast<std::size_t>(i)];
        return acc + v_copy(x) * u.value;
    };
    p.g = [ustar](const Point& x) { return ustar(x).value; };
    return p;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct LossConfig {
    double lambda = 1.0;
    int gl_order = 32;         // tensor Gauss-Legendre per axis, d <= 2
    int mc_count = 100000;     // Monte Carlo fallback for d = 3
    std::uint64_t mc_seed = 20240817;
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
        weights[static_cast<std::size_t>(n - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace detail

struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;  // sum to the measure of the integration set
};

/// Interior rule on (0,1)^d: tensor Gauss-Legendre for d <= 2, seeded Monte
/// Carlo for d = 3.
inline QuadratureRule interior_rule(const Domain& dom, const LossConfig& cfg) {
    QuadratureRule rule;
    const int d = dom.dim;
    if (d <= 2) {
        std::vector<double> x1, w1;
        detail::gauss_legendre(cfg.gl_order, x1, w1);
        const int m = cfg.gl_order;
        if (d == 1) {
            for (int i = 0; i < m; ++i) {
                rule.points.push_back({x1[static_cast<std::size_t>(i)], 0.0, 0.0});
                rule.weights.push_back(w1[static_cast<std::size_t>(i)]);
            }
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    rule.points.push_back({x1[static_cast<std::size_t>(i)], x1[static_cast<std::size_t>(j)], 0.0});
                    rule.weights.push_back(w1[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)]);
                }
        }
    } else {
        std::mt19937_64 rng(cfg.mc_seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double w = 1.0 / cfg.mc_count;
        for (int i = 0; i < cfg.mc_count; ++i) {
            rule.points.push_back({unif(rng), unif(rng), unif(rng)});
            rule.weights.push_back(w);
        }
    }
    return rule;
}

/// Boundary rule: counting measure on {0,1} for d = 1; per-face tensor
/// Gauss-Legendre otherwise. Weights sum to |dOmega|.
inline QuadratureRule boundary_rule(const Domain& dom, const LossConfig& cfg) {
    QuadratureRule rule;
    const int d = dom.dim;
    if (d == 1) {
        rule.points.push_back({0.0, 0.0, 0.0});
        rule.points.push_back({1.0, 0.0, 0.0});
        rule.weights = {1.0, 1.0};
        return rule;
    }
    std::vector<double> x1, w1;
    detail::gauss_legendre(cfg.gl_order, x1, w1);
    const int m = cfg.gl_order;
    for (int axis = 0; axis < d; ++axis)
        for (double side : {0.0, 1.0}) {
            if (d == 2) {
                for (int i = 0; i < m; ++i) {
                    Point p{0.0, 0.0, 0.0};
                    p[static_cast<std::size_t>(axis)] = side;
                    p[static_cast<std::size_t>(1 - axis)] = x1[static_cast<std::size_t>(i)];
                    rule.points.push_back(p);
                    rule.weights.push_back(w1[static_cast<std::size_t>(i)]);
                }
            } else {
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) {
                        Point p{0.0, 0.0, 0.0};
                        p[static_cast<std::size_t>(axis)] = side;
                        int a2 = 0;
                        for (int a = 0; a < d; ++a)
                            if (a != axis) {
                                p[static_cast<std::size_t>(a)] =
                                    (a2++ == 0) ? x1[static_cast<std::size_t>(i)] : x1[static_cast<std::size_t>(j)];
                            }
                        rule.points.push_back(p);
                        rule.weights.push_back(w1[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)]);
                    }
            }
        }
    return rule;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

using JetField = std::function<Jet2(const Point&)>;

/// Population PINN loss: interior L^2 residual plus lambda-weighted boundary
/// L^2 misfit, via the configured quadrature.
inline double population_loss(const JetField& u, const EllipticProblem& problem,
                              const LossConfig& cfg) {
    const QuadratureRule qi = interior_rule(problem.domain, cfg);
    const QuadratureRule qb = boundary_rule(problem.domain, cfg);
    double interior = 0.0;
    for (std::size_t i = 0; i < qi.points.size(); ++i) {
        const double r = residual_at(problem, u(qi.points[i]), qi.points[i]);
        interior += qi.weights[i] * r * r;
    }
    double boundary = 0.0;
    for (std::size_t i = 0; i < qb.points.size(); ++i) {
        const double e = u(qb.points[i]).value - problem.g(qb.points[i]);
        boundary += qb.weights[i] * e * e;
    }
    return interior + cfg.lambda * boundary;
}

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

/// Interior observations (X_i, f_i) and boundary observations (Y_j, g_j),
/// both of size n, with unit Gaussian noise realized at generation time.
struct Dataset {
    std::vector<Point> interior_x;
    std::vector<double> interior_f;
    std::vector<Point> boundary_y;
    std::vector<double> boundary_g;
    std::uint64_t seed = 0;

    std::size_t n() const { return interior_x.size(); }
};

/// Empirical PINN loss over observed data.
inline double empirical_loss(const JetField& u, const Dataset& data, const EllipticProblem& problem,
                             const LossConfig& cfg) {
    if (data.interior_x.empty() || data.boundary_y.empty())
        throw std::invalid_argument("empirical_loss: empty dataset");
    const double vol = problem.domain.interior_measure();
    const double surf = problem.domain.boundary_measure();
    const double n_int = static_cast<double>(data.interior_x.size());
    const double n_bnd = static_cast<double>(data.boundary_y.size());
    double interior = 0.0;
    for (std::size_t i = 0; i < data.interior_x.size(); ++i) {
        const Point& x = data.interior_x[i];
        const double r = elliptic_operator(problem, u(x), x) - data.interior_f[i];
        interior += r * r;
    }
    double boundary = 0.0;
    for (std::size_t j = 0; j < data.boundary_y.size(); ++j) {
        const double e = u(data.boundary_y[j]).value - data.boundary_g[j];
        boundary += e * e;
    }
    return vol / n_int * interior + cfg.lambda * surf / n_bnd * boundary;
}

/// Empirical distances (||L(u-u*)||_{n,1}, ||u-u*||_{n,2}) using the exact
/// noiseless data values at the sample sites.
inline std::pair<double, double> empirical_distances(const JetField& u, const Dataset& data,
                                                     const EllipticProblem& problem) {
    if (!problem.f || !problem.g) throw std::invalid_argument("empirical_distances: missing exact data");
    const double vol = problem.domain.interior_measure();
    const double surf = problem.domain.boundary_measure();
    double interior = 0.0;
    for (const Point& x : data.interior_x) {
        const double r = elliptic_operator(problem, u(x), x) - problem.f(x);
        interior += r * r;
    }
    interior = std::sqrt(vol / static_cast<double>(data.interior_x.size()) * interior);
    double boundary = 0.0;
    for (const Point& y : data.boundary_y) {
        const double e = u(y).value - problem.g(y);
        boundary += e * e;
    }
    boundary = std::sqrt(surf / static_cast<double>(data.boundary_y.size()) * boundary);
    return {interior, boundary};
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace detail {

inline std::function<CoeffMatrix(const Point&)> identity_coeff(int d) {
    return [d](const Point&) {
        CoeffMatrix m{};
        for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i) * kMaxDim + i] = 1.0;
        return m;
    };
}

inline std::function<Point(const Point&)> zero_div(int) {
    return [](const Point&) { return Point{0.0, 0.0, 0.0}; };
}

}  // namespace detail

/// u*(x) = sin(pi x), A = 1, V = 1 on (0,1).
inline EllipticProblem make_sin1d() {
    using std::numbers::pi;
    auto u = [](const Point& x) {
        Jet2 j(1);
        j.value = std::sin(pi * x[0]);
        j.grad[0] = pi * std::cos(pi * x[0]);
        j.h(0, 0) = -pi * pi * std::sin(pi * x[0]);
        return j;
    };
    EllipticProblem p = manufactured_problem(u, detail::identity_coeff(1), detail::zero_div(1),
                                             [](const Point&) { return 1.0; }, Domain{1}, 4.0, 2.0);
    p.r_min = 1.0;
    p.C_A = 1.0;
    p.V_min = 1.0;
    p.V_max = 1.0;
    p.K = 1.0 + std::pow(pi, 4);
    p.name = "sin-1d";
    return p;
}

/// u*(x) = x1^2 + x2^2, A = I, V = 1/2 on (0,1)^2.
inline EllipticProblem make_quadratic2d() {
    auto u = [](const Point& x) {
        Jet2 j(2);
        j.value = x[0] * x[0] + x[1] * x[1];
        j.grad[0] = 2.0 * x[0];
        j.grad[1] = 2.0 * x[1];
        j.h(0, 0) = 2.0;
        j.h(1, 1) = 2.0;
        return j;
    };
    EllipticProblem p = manufactured_problem(u, detail::identity_coeff(2), detail::zero_div(2),
                                             [](const Point&) { return 0.5; }, Domain{2}, 4.0, 8.0);
    p.r_min = 1.0;
    p.C_A = 1.0;
    p.V_min = 0.5;
    p.V_max = 0.5;
    p.name = "quadratic-2d";
    return p;
}

/// Variable diffusion A = (2 + sin(pi x1) sin(pi x2)) I with its exact
/// divergence, V = 1 + x1 x2 / 2, u*(x) = sin(pi x1) sin(pi x2).
inline EllipticProblem make_varcoeff2d() {
    using std::numbers::pi;
    auto a_scalar = [](const Point& x) { return 2.0 + std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    auto A = [a_scalar](const Point& x) {
        CoeffMatrix m{};
        const double a = a_scalar(x);
        m[0] = a;
        m[kMaxDim + 1] = a;
        return m;
    };
    auto divA = [](const Point& x) {
        // (div A)_i = d_i a for a scalar field times the identity
        Point g{};
        g[0] = pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
        g[1] = pi * std::sin(pi * x[0]) * std::cos(pi * x[1]);
        return g;
    };
    auto V = [](const Point& x) { return 1.0 + 0.5 * x[0] * x[1]; };
    auto u = [](const Point& x) {
        Jet2 j(2);
        const double s0 = std::sin(pi * x[0]), c0 = std::cos(pi * x[0]);
        const double s1 = std::sin(pi * x[1]), c1 = std::cos(pi * x[1]);
        j.value = s0 * s1;
        j.grad[0] = pi * c0 * s1;
        j.grad[1] = pi * s0 * c1;
        j.h(0, 0) = -pi * pi * s0 * s1;
        j.h(1, 1) = -pi * pi * s0 * s1;
        j.h(0, 1) = pi * pi * c0 * c1;
        j.h(1, 0) = j.h(0, 1);
        return j;
    };
    EllipticProblem p = manufactured_problem(u, A, divA, V, Domain{2}, 4.0, 50.0);
    p.r_min = 1.0;
    p.C_A = 3.0 + pi;
    p.V_min = 1.0;
    p.V_max = 1.5;
    p.name = "variable-coeff-2d";
    return p;
}

inline EllipticProblem problem_preset(const std::string& name) {
    if (name == "sin-1d") return make_sin1d();
    if (name == "quadratic-2d") return make_quadratic2d();
    if (name == "variable-coeff-2d") return make_varcoeff2d();
    throw std::invalid_argument("unknown problem preset: " + name);
}

/// Grid-based consistency check of the coefficient bounds and (when a known
/// solution is present) of the manufactured data.
inline void validate_problem(const EllipticProblem& p, int grid_per_axis = 17, double tol = 1e-10) {
    const int d = p.domain.dim;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(grid_per_axis);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point x{0.0, 0.0, 0.0};
        std::size_t rem = flat;
        for (int a = 0; a < d; ++a) {
            x[static_cast<std::size_t>(a)] =
                (static_cast<double>(rem % static_cast<std::size_t>(grid_per_axis)) + 0.5) / grid_per_axis;
            rem /= static_cast<std::size_t>(grid_per_axis);
        }
        const double v = p.V(x);
        if (v < p.V_min - 1e-12 || v > p.V_max + 1e-12)
            throw std::runtime_error("validate_problem: V bound violated");
        const CoeffMatrix a = p.A(x);
        for (int i = 0; i < d; ++i)
            if (a[static_cast<std::size_t>(i) * kMaxDim + i] < p.r_min - 1e-12)
                throw std::runtime_error("validate_problem: A ellipticity check failed");
        if (p.has_solution()) {
            const double r = residual_at(p, p.u_star(x), x);
            if (std::abs(r) > tol) throw std::runtime_error("validate_problem: residual of u* nonzero");
        }
    }
}

}  // namespace bpinn
