#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bpinn/jet.hpp"

namespace bpinn {

// ---------------------------------------------------------------------------
// Uniform B-splines on the extended partition t_i = i/l, i = -k+1..l+k-1
// ---------------------------------------------------------------------------

struct SplineSpec {
    int order = 4;      // k
    int segments = 4;   // l
    int dim = 1;

    int first_index() const { return -order + 1; }                 // min of I_{l,k}
    int basis_count() const { return segments + order - 1; }       // |I_{l,k}|
    double knot(int i) const { return static_cast<double>(i) / segments; }

    void validate() const {
        if (order < 2 || segments < 1 || dim < 1 || dim > kMaxDim)
            throw std::invalid_argument("SplineSpec: bad parameters");
    }
};

namespace detail {

inline double binomial(int n, int r) {
    double v = 1.0;
    for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
    return v;
}

/// Neumaier compensated sum; the truncated-power expansion cancels heavily.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = s + x;
        c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double get() const { return s + c; }
};

}  // namespace detail

/// Univariate B-spline N^{(k)}_{l,i} (or derivative of order 1 or 2) via the
/// explicit truncated-power expansion.
inline double bspline_eval(const SplineSpec& spec, int i, double x, int deriv_order = 0) {
    const int k = spec.order;
    const int l = spec.segments;
    if (i < -k + 1 || i > l - 1) throw std::out_of_range("bspline_eval: index");
    if (deriv_order < 0 || deriv_order > 2) throw std::invalid_argument("bspline_eval: deriv");
    const int p = k - 1 - deriv_order;  // power after differentiation
    if (p < 0) return 0.0;
    double fact = 1.0;  // (k-1)(k-2)... for the derivative chain
    for (int m = 0; m < deriv_order; ++m) fact *= (k - 1 - m);
    const double lead = fact * std::pow(static_cast<double>(l), k - 1) / std::tgamma(k);
    detail::CompensatedSum acc;
    for (int j = 0; j <= k; ++j) {
        const double t = x - static_cast<double>(i + j) / l;
        if (t <= 0.0) continue;
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc.add(sign * detail::binomial(k, j) * std::pow(t, p));
    }
    return lead * acc.get();
}

// ---------------------------------------------------------------------------
// Quasi-interpolation via collocation at (clamped) Greville abscissae
// ---------------------------------------------------------------------------

struct SplineCoeffs {
    SplineSpec spec;
    std::vector<double> values;  // flattened over I_{l,k}^d, axis 0 fastest

    std::size_t flat_size() const {
        std::size_t n = 1;
        for (int a = 0; a < spec.dim; ++a) n *= static_cast<std::size_t>(spec.basis_count());
        return n;
    }
};

namespace detail {

/// Collocation nodes: Greville abscissae (i + k/2)/l clamped into the r-th
/// cell of a uniform n-subdivision of [0,1]. Under the uniform knot extension
/// the raw Greville points of boundary splines fall outside the cube, where f
/// is not evaluable; the cells keep the nodes strictly increasing and inside
/// each basis function's support (Schoenberg-Whitney).
inline std::vector<double> collocation_nodes(const SplineSpec& spec) {
    const int k = spec.order, l = spec.segments;
    const int n = spec.basis_count();
    std::vector<double> nodes(static_cast<std::size_t>(n));
    const double eps = 0.1 / n;
    for (int r = 0; r < n; ++r) {
        const int i = spec.first_index() + r;
        const double greville = (i + k / 2.0) / l;
        const double lo = static_cast<double>(r) / n + eps;
        const double hi = static_cast<double>(r + 1) / n - eps;
        nodes[static_cast<std::size_t>(r)] = std::clamp(greville, lo, hi);
    }
    return nodes;
}

inline Eigen::PartialPivLU<Eigen::MatrixXd> collocation_lu(const SplineSpec& spec,
                                                           const std::vector<double>& nodes) {
    const int n = spec.basis_count();
    Eigen::MatrixXd M(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            M(r, c) = bspline_eval(spec, spec.first_index() + c, nodes[static_cast<std::size_t>(r)]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    // Guard against a (theoretically impossible) singular system.
    Eigen::VectorXd probe = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd sol = lu.solve(probe);
    if ((M * sol - probe).cwiseAbs().maxCoeff() > 1e-8)
        throw std::runtime_error("quasi_interpolant: singular collocation system");
    return lu;
}

}  // namespace detail

/// Spline projection of f: coefficients interpolating f at the tensor grid of
/// collocation nodes. Reproduces members of the spline space to solver
/// tolerance.
inline SplineCoeffs quasi_interpolant(const std::function<double(std::span<const double>)>& f,
                                      const SplineSpec& spec) {
    spec.validate();
    const int n = spec.basis_count();
    const int d = spec.dim;
    const auto nodes = detail::collocation_nodes(spec);
    const auto lu = detail::collocation_lu(spec, nodes);

    SplineCoeffs out;
    out.spec = spec;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
    out.values.resize(total);

    // Sample f on the tensor node grid.
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = 0; a < d; ++a) {
            x[static_cast<std::size_t>(a)] = nodes[rem % static_cast<std::size_t>(n)];
            rem /= static_cast<std::size_t>(n);
        }
        out.values[flat] = f(x);
    }

    // Solve axis by axis (tensor-product structure).
    std::vector<double> rhs(static_cast<std::size_t>(n)), sol(static_cast<std::size_t>(n));
    for (int a = 0; a < d; ++a) {
        std::size_t stride = 1;
        for (int b = 0; b < a; ++b) stride *= static_cast<std::size_t>(n);
        const std::size_t n_lines = total / static_cast<std::size_t>(n);
        for (std::size_t line = 0; line < n_lines; ++line) {
            // base index of this 1-d line along axis a
            const std::size_t block = line / stride;
            const std::size_t within = line % stride;
            const std::size_t base = block * stride * static_cast<std::size_t>(n) + within;
            for (int r = 0; r < n; ++r)
                rhs[static_cast<std::size_t>(r)] = out.values[base + static_cast<std::size_t>(r) * stride];
            Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
            Eigen::VectorXd s = lu.solve(b);
            for (int r = 0; r < n; ++r)
                out.values[base + static_cast<std::size_t>(r) * stride] = s(r);
        }
    }
    return out;
}

/// Tensor-product evaluation with derivatives up to second order.
inline Jet2 spline_eval(const SplineCoeffs& coeffs, std::span<const double> x) {
    const SplineSpec& spec = coeffs.spec;
    const int d = spec.dim;
    if (static_cast<int>(x.size()) != d) throw std::invalid_argument("spline_eval: dim");
    for (int a = 0; a < d; ++a)
        if (x[static_cast<std::size_t>(a)] < -1e-12 || x[static_cast<std::size_t>(a)] > 1.0 + 1e-12)
            throw std::out_of_range("spline_eval: x outside [0,1]^d");
    const int n = spec.basis_count();

    // Per-axis basis values and derivatives.
    std::vector<double> B(static_cast<std::size_t>(d * n)), D1(static_cast<std::size_t>(d * n)),
        D2(static_cast<std::size_t>(d * n));
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < n; ++c) {
            const int i = spec.first_index() + c;
            const double xa = x[static_cast<std::size_t>(a)];
            B[static_cast<std::size_t>(a * n + c)] = bspline_eval(spec, i, xa, 0);
            D1[static_cast<std::size_t>(a * n + c)] = bspline_eval(spec, i, xa, 1);
            D2[static_cast<std::size_t>(a * n + c)] = bspline_eval(spec, i, xa, 2);
        }

    Jet2 out(d);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    const std::size_t total = coeffs.flat_size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = 0; a < d; ++a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(n));
            rem /= static_cast<std::size_t>(n);
        }
        const double c = coeffs.values[flat];
        if (c == 0.0) continue;
        double prod = 1.0;
        for (int a = 0; a < d; ++a) prod *= B[static_cast<std::size_t>(a * n + idx[static_cast<std::size_t>(a)])];
        out.value += c * prod;
        for (int gi = 0; gi < d; ++gi) {
            double t = 1.0;
            for (int a = 0; a < d; ++a) {
                const auto e = static_cast<std::size_t>(a * n + idx[static_cast<std::size_t>(a)]);
                t *= (a == gi) ? D1[e] : B[e];
            }
            out.grad[gi] += c * t;
        }
        for (int gi = 0; gi < d; ++gi)
            for (int gj = 0; gj < d; ++gj) {
                double t = 1.0;
                for (int a = 0; a < d; ++a) {
                    const auto e = static_cast<std::size_t>(a * n + idx[static_cast<std::size_t>(a)]);
                    if (a == gi && a == gj) t *= D2[e];
                    else if (a == gi || a == gj) t *= D1[e];
                    else t *= B[e];
                }
                out.h(gi, gj) += c * t;
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Approximation-rate measurement
// ---------------------------------------------------------------------------

struct ApproximationRow {
    int segments;
    double c0_error;
    double c1_error;
    double c2_error;  // max over value/grad/hess gaps
};

struct ApproximationReport {
    std::vector<ApproximationRow> rows;
    double fitted_c2_slope = 0.0;  // d log(err) / d log(l)
};

/// Measures the C^2 error of the spline projection of f (given with exact
/// jets) over a range of partition sizes and fits the log-log decay slope.
inline ApproximationReport approximation_report(
    const std::function<Jet2(std::span<const double>)>& f_jets, int order, int dim,
    const std::vector<int>& l_values, int grid_per_axis = 200) {
    ApproximationReport rep;
    std::vector<double> logs_l, logs_e;
    for (int l : l_values) {
        SplineSpec spec{order, l, dim};
        auto fval = [&](std::span<const double> x) { return f_jets(x).value; };
        SplineCoeffs qc = quasi_interpolant(fval, spec);
        double e0 = 0.0, e1 = 0.0, e2 = 0.0;
        std::vector<double> x(static_cast<std::size_t>(dim));
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(grid_per_axis);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            for (int a = 0; a < dim; ++a) {
                x[static_cast<std::size_t>(a)] =
                    (static_cast<double>(rem % static_cast<std::size_t>(grid_per_axis)) + 0.5) /
                    grid_per_axis;
                rem /= static_cast<std::size_t>(grid_per_axis);
            }
            const Jet2 a = f_jets(x);
            const Jet2 b = spline_eval(qc, x);
            e0 = std::max(e0, std::abs(a.value - b.value));
            for (int i = 0; i < dim; ++i) e1 = std::max(e1, std::abs(a.grad[i] - b.grad[i]));
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) e2 = std::max(e2, std::abs(a.h(i, j) - b.h(i, j)));
        }
        const double c2 = std::max({e0, e1, e2});
        rep.rows.push_back({l, e0, std::max(e0, e1), c2});
        logs_l.push_back(std::log(static_cast<double>(l)));
        logs_e.push_back(std::log(std::max(c2, 1e-300)));
    }
    // least-squares slope
    const std::size_t m = logs_l.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += logs_l[i];
        sy += logs_e[i];
        sxx += logs_l[i] * logs_l[i];
        sxy += logs_l[i] * logs_e[i];
    }
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    rep.fitted_c2_slope = (denom != 0.0) ? (static_cast<double>(m) * sxy - sx * sy) / denom : 0.0;
    return rep;
}

}  // namespace bpinn
