#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bpinn/jet.hpp"

namespace bpinn {

/// One sigma3 "atom" c * sigma3(arg + shift), where arg is a named input slot.
/// Slot 0 = x, slot 1 = y, slot 2 = x + y. Gadget value = sum of atoms + bias.
struct GadgetAtom {
    int slot;      // 0: x, 1: y, 2: x+y
    double shift;
    double coeff;
};

struct CubicGadget {
    std::vector<GadgetAtom> atoms;
    double bias = 0.0;

    double eval(double x, double y = 0.0) const {
        double acc = bias;
        for (const auto& a : atoms) {
            const double arg = (a.slot == 0) ? x : (a.slot == 1) ? y : x + y;
            acc += a.coeff * sigma3(arg + a.shift);
        }
        return acc;
    }
};

/// Gadget coefficients for the exact sigma3 identities used by the compiler:
/// z on [0,inf), z^2 on [0,inf), and xy for x,y >= 0.
struct GadgetCoefficients {
    CubicGadget linear;    // z
    CubicGadget square;    // z^2
    CubicGadget product;   // xy
    double domain_lo = 0.0;
    double domain_hi = 10.0;

    // Verbatim identities as printed in the source material, kept for the
    // validation harness to report on.
    CubicGadget printed_linear;
    CubicGadget printed_product;
};

namespace detail {

inline double rel_gap(double got, double want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

}  // namespace detail

/// Magnitude-scaled validation of a unary gadget against a target on a grid.
inline double validate_unary(const CubicGadget& g, double (*target)(double), double lo, double hi,
                             int n = 1000) {
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double z = lo + (hi - lo) * i / n;
        worst = std::max(worst, detail::rel_gap(g.eval(z), target(z)));
    }
    return worst;
}

inline double validate_product(const CubicGadget& g, double lo, double hi, int n = 100) {
    double worst = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const double x = lo + (hi - lo) * i / n;
            const double y = lo + (hi - lo) * j / n;
            worst = std::max(worst, detail::rel_gap(g.eval(x, y), x * y));
        }
    return worst;
}

/// Derives and validates the gadget family.
///
/// The square identity z^2 = -1/6 [s3(z+2) - 4 s3(z+1) + 3 s3(z) - 4] checks
/// out as printed. The linear gadget is re-derived by solving the 4x4 system
/// matching the expansion of sum_i c_i (z + s_i)^3 over shifts {3,2,1,0} to
/// the polynomial z (cubic, quadratic and constant coefficients zero, linear
/// coefficient one). The product gadget follows from polarization
/// xy = ((x+y)^2 - x^2 - y^2)/2 applied to the square identity, which keeps
/// every sigma3 argument nonnegative whenever x, y >= 0.
inline GadgetCoefficients derive_gadgets() {
    GadgetCoefficients g;

    // Square: printed coefficients.
    g.square.atoms = {{0, 2.0, -1.0 / 6.0}, {0, 1.0, 4.0 / 6.0}, {0, 0.0, -3.0 / 6.0}};
    g.square.bias = 4.0 / 6.0;

    // Linear: solve for c in sum c_i (z+s_i)^3 = z on z >= 0.
    {
        const std::array<double, 4> s{3.0, 2.0, 1.0, 0.0};
        Eigen::Matrix4d M;
        Eigen::Vector4d rhs;
        for (int col = 0; col < 4; ++col) {
            M(0, col) = 1.0;                       // z^3
            M(1, col) = 3.0 * s[static_cast<std::size_t>(col)];                    // z^2
            M(2, col) = 3.0 * s[static_cast<std::size_t>(col)] * s[static_cast<std::size_t>(col)];  // z^1
            M(3, col) = std::pow(s[static_cast<std::size_t>(col)], 3);             // z^0
        }
        rhs << 0.0, 0.0, 1.0, 0.0;
        if (std::abs(M.determinant()) < 1e-10)
            throw std::runtime_error("derive_gadgets: singular linear system");
        const Eigen::Vector4d c = M.fullPivLu().solve(rhs);
        for (int i = 0; i < 4; ++i) g.linear.atoms.push_back({0, s[static_cast<std::size_t>(i)], c(i)});
        g.linear.bias = 0.0;
    }

    // Product via polarization of the square gadget:
    // xy = -1/12 [s3(x+y+2) - 4 s3(x+y+1) + 3 s3(x+y)
    //             - s3(x+2) + 4 s3(x+1) - 3 s3(x)
    //             - s3(y+2) + 4 s3(y+1) - 3 s3(y) + 4].
    {
        const double c = -1.0 / 12.0;
        g.product.atoms = {
            {2, 2.0, c}, {2, 1.0, -4.0 * c}, {2, 0.0, 3.0 * c},
            {0, 2.0, -c}, {0, 1.0, 4.0 * c}, {0, 0.0, -3.0 * c},
            {1, 2.0, -c}, {1, 1.0, 4.0 * c}, {1, 0.0, -3.0 * c}};
        g.product.bias = 4.0 * c;
    }

    // Printed variants (linear with scale -1/2 and a +6 constant; product with
    // shifts x+y-2, x+y-1). Both fail spot checks; recorded for reporting.
    g.printed_linear.atoms = {{0, 3.0, -0.5}, {0, 2.0, 2.5}, {0, 1.0, -3.5}, {0, 0.0, 1.5}};
    g.printed_linear.bias = -3.0;
    {
        const double c = -1.0 / 12.0;
        g.printed_product.atoms = {
            {2, -2.0, c}, {2, -1.0, -4.0 * c}, {2, 0.0, 3.0 * c},
            {0, 2.0, -c}, {0, 1.0, 4.0 * c}, {0, 0.0, -3.0 * c},
            {1, 2.0, -c}, {1, 1.0, 4.0 * c}, {1, 0.0, -3.0 * c}};
        g.printed_product.bias = 4.0 * c;
    }

    // Validate the shipped gadgets before handing them out.
    auto ident = [](double z) { return z; };
    auto sq = [](double z) { return z * z; };
    if (validate_unary(g.square, sq, g.domain_lo, g.domain_hi) > 1e-9 ||
        validate_unary(g.linear, ident, g.domain_lo, g.domain_hi) > 1e-9 ||
        validate_product(g.product, g.domain_lo, g.domain_hi) > 1e-9)
        throw std::runtime_error("derive_gadgets: validation failed");
    return g;
}

}  // namespace bpinn
