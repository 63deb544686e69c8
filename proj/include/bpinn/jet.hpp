#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace bpinn {

/// Maximum spatial dimension supported by the jet algebra. Hessians are
/// stored dense, so this is kept small on purpose.
inline constexpr int kMaxDim = 3;

/// A scalar value bundled with its gradient and Hessian with respect to a
/// d-dimensional spatial input. All operations propagate derivatives up to
/// second order (forward mode).
struct Jet2 {
    int dim = 0;
    double value = 0.0;
    std::array<double, kMaxDim> grad{};
    std::array<double, kMaxDim * kMaxDim> hess{};

    Jet2() = default;

    explicit Jet2(int d, double v = 0.0) : dim(d), value(v) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("Jet2: dim out of range");
    }

    static Jet2 constant(int d, double v) { return Jet2(d, v); }

    double h(int i, int j) const { return hess[static_cast<std::size_t>(i) * kMaxDim + j]; }
    double& h(int i, int j) { return hess[static_cast<std::size_t>(i) * kMaxDim + j]; }
};

inline void check_same_dim(const Jet2& a, const Jet2& b) {
    if (a.dim != b.dim) throw std::invalid_argument("Jet2: dimension mismatch");
}

/// Seeds differentiation for the linear functional x -> w.x.
inline Jet2 lift_variable(std::span<const double> x, std::span<const double> axis_weights) {
    if (x.size() != axis_weights.size()) throw std::invalid_argument("lift_variable: dimension mismatch");
    const int d = static_cast<int>(x.size());
    Jet2 out(d);
    for (int i = 0; i < d; ++i) {
        out.value += axis_weights[i] * x[i];
        out.grad[i] = axis_weights[i];
    }
    return out;
}

/// Seeds the i-th coordinate as a jet.
inline Jet2 lift_coordinate(std::span<const double> x, int axis) {
    const int d = static_cast<int>(x.size());
    Jet2 out(d, x[axis]);
    out.grad[axis] = 1.0;
    return out;
}

inline Jet2 jet_add(const Jet2& a, const Jet2& b) {
    check_same_dim(a, b);
    Jet2 out = a;
    out.value += b.value;
    for (int i = 0; i < a.dim; ++i) out.grad[i] += b.grad[i];
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) out.h(i, j) += b.h(i, j);
    return out;
}

inline Jet2 jet_scale(const Jet2& a, double c) {
    Jet2 out = a;
    out.value *= c;
    for (int i = 0; i < a.dim; ++i) out.grad[i] *= c;
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) out.h(i, j) *= c;
    return out;
}

/// Product rule through second order.
inline Jet2 jet_mul(const Jet2& a, const Jet2& b) {
    check_same_dim(a, b);
    Jet2 out(a.dim);
    out.value = a.value * b.value;
    for (int i = 0; i < a.dim; ++i) out.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j)
            out.h(i, j) = a.value * b.h(i, j) + b.value * a.h(i, j) +
                          a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j];
    return out;
}

/// ReLU cube sigma_3(s) = max(s,0)^3, chained through the jet. sigma_3 is C^2
/// with all of value, first and second derivative vanishing at s = 0, so the
/// kink returns the zero jet.
inline Jet2 jet_sigma3(const Jet2& a) {
    const double s = a.value;
    if (s <= 0.0) return Jet2(a.dim, 0.0);
    Jet2 out(a.dim);
    const double s2 = s * s;
    out.value = s2 * s;
    const double d1 = 3.0 * s2;  // sigma3'
    const double d2 = 6.0 * s;   // sigma3''
    for (int i = 0; i < a.dim; ++i) out.grad[i] = d1 * a.grad[i];
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j)
            out.h(i, j) = d1 * a.h(i, j) + d2 * a.grad[i] * a.grad[j];
    return out;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return jet_add(a, b); }
inline Jet2 operator*(const Jet2& a, const Jet2& b) { return jet_mul(a, b); }
inline Jet2 operator*(double c, const Jet2& a) { return jet_scale(a, c); }

inline double sigma3(double s) {
    const double p = std::max(s, 0.0);
    return p * p * p;
}

}  // namespace bpinn
