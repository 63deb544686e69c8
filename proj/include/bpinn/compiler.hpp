#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "bpinn/gadgets.hpp"
#include "bpinn/network.hpp"
#include "bpinn/spline.hpp"

namespace bpinn {

namespace detail {

/// Affine combination of the neurons of one layer, plus a constant. A term
/// list that is empty denotes a plain constant.
struct AffineExpr {
    std::map<int, double> terms;
    double constant = 0.0;

    bool is_constant() const { return terms.empty(); }

    static AffineExpr of_constant(double c) { return AffineExpr{{}, c}; }
    static AffineExpr of_neuron(int idx) { return AffineExpr{{{idx, 1.0}}, 0.0}; }

    AffineExpr& add(const AffineExpr& o, double w = 1.0) {
        for (const auto& [i, v] : o.terms) terms[i] += w * v;
        constant += w * o.constant;
        return *this;
    }
};

/// Assembles sigma3 layers one at a time. Each emitted layer consumes affine
/// expressions over the previous layer's outputs; the network ends with a
/// single affine output row.
class NetworkBuilder {
public:
    explicit NetworkBuilder(int input_dim) : input_dim_(input_dim) {}

    /// Starts the next sigma3 layer; expressions created afterwards refer to
    /// the neurons of the layer just closed.
    void begin_layer() { layers_.emplace_back(); }

    /// Emits sigma3(pre) as a neuron of the layer being built; pre is an
    /// affine expression over the previous layer (or over the inputs if no
    /// layer has been closed yet).
    int emit_neuron(const AffineExpr& pre) {
        auto& layer = layers_.back();
        layer.push_back(pre);
        return static_cast<int>(layer.size()) - 1;
    }

    /// Multiplication gadget: emits the sigma3 atoms for x*y into the current
    /// layer and returns the combination expression over it. Pure-constant
    /// inputs fold into constants without emitting neurons.
    AffineExpr emit_mult(const GadgetCoefficients& g, const AffineExpr& x, const AffineExpr& y) {
        if (x.is_constant() && y.is_constant())
            return AffineExpr::of_constant(x.constant * y.constant);
        AffineExpr out;
        out.constant = g.product.bias;
        for (const auto& atom : g.product.atoms) {
            AffineExpr arg;
            if (atom.slot == 0) arg = x;
            else if (atom.slot == 1) arg = y;
            else arg.add(x).add(y);
            arg.constant += atom.shift;
            if (arg.is_constant()) {
                out.constant += atom.coeff * sigma3(arg.constant);
            } else {
                out.terms[emit_neuron(arg)] += atom.coeff;
            }
        }
        return out;
    }

    /// Finalizes with the affine output expression (over the last layer).
    NetworkParams finish(const AffineExpr& output) {
        NetworkParams p;
        p.arch.input_dim = input_dim_;
        int prev = input_dim_;
        for (const auto& layer : layers_) {
            const int w = static_cast<int>(layer.size());
            p.arch.hidden_widths.push_back(w);
            for (const auto& pre : layer) {
                const std::size_t base = p.theta.size();
                p.theta.resize(base + static_cast<std::size_t>(prev), 0.0);
                for (const auto& [i, v] : pre.terms) {
                    if (i < 0 || i >= prev) throw std::logic_error("builder: bad term index");
                    p.theta[base + static_cast<std::size_t>(i)] = v;
                }
            }
            // biases
            for (const auto& pre : layer) p.theta.push_back(pre.constant);
            prev = w;
        }
        const std::size_t base = p.theta.size();
        p.theta.resize(base + static_cast<std::size_t>(prev), 0.0);
        for (const auto& [i, v] : output.terms) p.theta[base + static_cast<std::size_t>(i)] = v;
        p.theta.push_back(output.constant);

        p.arch.mask.resize(p.theta.size());
        for (std::size_t i = 0; i < p.theta.size(); ++i)
            p.arch.mask[i] = p.theta[i] != 0.0 ? 1 : 0;
        p.bound = std::max(1.0, p.max_abs_weight());
        if (p.theta.size() != p.arch.total_params())
            throw std::logic_error("builder: layout mismatch");
        return p;
    }

private:
    int input_dim_;
    std::vector<std::vector<AffineExpr>> layers_;  // preactivation expressions
};

inline int tree_levels(int factors) {
    int lv = 0;
    int cap = 1;
    while (cap < factors) {
        cap *= 2;
        ++lv;
    }
    return lv;
}

/// Runs one balanced product-tree pass over the factor expressions, padding
/// with constant ones to a power of two, and returns the root expression.
/// Emits tree_levels(p) gadget layers.
inline AffineExpr product_tree(NetworkBuilder& b, const GadgetCoefficients& g,
                               std::vector<AffineExpr> factors) {
    const int levels = tree_levels(static_cast<int>(factors.size()));
    int cap = 1 << levels;
    factors.resize(static_cast<std::size_t>(cap), AffineExpr::of_constant(1.0));
    for (int t = 0; t < levels; ++t) {
        b.begin_layer();
        std::vector<AffineExpr> next;
        for (std::size_t i = 0; i + 1 < factors.size(); i += 2)
            next.push_back(b.emit_mult(g, factors[i], factors[i + 1]));
        factors = std::move(next);
    }
    return factors.at(0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Truncated powers
// ---------------------------------------------------------------------------

/// Network computing max(x - c, 0)^degree for degree a multiple of 3:
/// (degree)/3 copies of sigma3(x - c) joined by a product tree.
inline NetworkParams compile_truncated_power(double shift, int degree,
                                             const GadgetCoefficients& gadgets) {
    if (degree <= 0 || degree % 3 != 0)
        throw std::invalid_argument("compile_truncated_power: degree must be a positive multiple of 3");
    const int p = degree / 3;
    detail::NetworkBuilder b(1);
    b.begin_layer();
    std::vector<detail::AffineExpr> factors;
    for (int r = 0; r < p; ++r) {
        detail::AffineExpr pre;
        pre.terms[0] = 1.0;
        pre.constant = -shift;
        factors.push_back(detail::AffineExpr::of_neuron(b.emit_neuron(pre)));
    }
    auto root = detail::product_tree(b, gadgets, std::move(factors));
    return b.finish(root);
}

// ---------------------------------------------------------------------------
// Spline-to-network compilation
// ---------------------------------------------------------------------------

/// Compiles a tensor-product spline quasi-interpolant into a sigma3 network
/// that reproduces it exactly (up to rounding) on [0,1]^d.
///
/// Per axis, one tower per distinct knot shift computes the scaled truncated
/// power l^{k-1} max(x - s/l, 0)^{k-1}; the l^{k-1} factor rides on the
/// first-layer input weight (sigma3(l x - s) = l^3 max(x - s/l, 0)^3), which
/// keeps every explicit weight O(l). Univariate basis functions are affine
/// combinations of shared towers with binomial coefficients <= 1 in absolute
/// value; tensorization multiplies the d axis values with product gadgets and
/// the output row applies the spline coefficients.
inline NetworkParams compile_spline_network(const SplineCoeffs& coeffs,
                                            const GadgetCoefficients& gadgets) {
    const SplineSpec& spec = coeffs.spec;
    const int k = spec.order, l = spec.segments, d = spec.dim;
    if ((k - 1) % 3 != 0)
        throw std::invalid_argument("compile_spline_network: k-1 must be a multiple of 3");
    const int p = (k - 1) / 3;
    const int n = spec.basis_count();        // basis functions per axis
    const int n_shift = l + 2 * k - 1;       // shifts s = -k+1 .. l+k-1
    const int s0 = -k + 1;

    detail::NetworkBuilder b(d);

    // Layer 1: p copies of sigma3(l x_a - s) per axis and shift.
    b.begin_layer();
    std::vector<std::vector<std::vector<detail::AffineExpr>>> tower_factors(
        static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        tower_factors[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(n_shift));
        for (int si = 0; si < n_shift; ++si) {
            for (int r = 0; r < p; ++r) {
                detail::AffineExpr pre;
                pre.terms[a] = static_cast<double>(l);
                pre.constant = -static_cast<double>(s0 + si);
                tower_factors[static_cast<std::size_t>(a)][static_cast<std::size_t>(si)].push_back(
                    detail::AffineExpr::of_neuron(b.emit_neuron(pre)));
            }
        }
    }

    // Product-tree levels, advanced for all towers in lockstep.
    const int levels = detail::tree_levels(p);
    std::vector<std::vector<detail::AffineExpr>> tau(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
        tau[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(n_shift));
    {
        // pad factor lists
        const int cap = 1 << levels;
        for (auto& ax : tower_factors)
            for (auto& fs : ax) fs.resize(static_cast<std::size_t>(cap),
                                          detail::AffineExpr::of_constant(1.0));
        for (int t = 0; t < levels; ++t) {
            b.begin_layer();
            for (auto& ax : tower_factors)
                for (auto& fs : ax) {
                    std::vector<detail::AffineExpr> next;
                    for (std::size_t i = 0; i + 1 < fs.size(); i += 2)
                        next.push_back(b.emit_mult(gadgets, fs[i], fs[i + 1]));
                    fs = std::move(next);
                }
        }
        for (int a = 0; a < d; ++a)
            for (int si = 0; si < n_shift; ++si)
                tau[static_cast<std::size_t>(a)][static_cast<std::size_t>(si)] =
                    tower_factors[static_cast<std::size_t>(a)][static_cast<std::size_t>(si)].at(0);
    }

    // Univariate basis functions as affine combinations of towers:
    // N_i = (1/(k-1)!) sum_j (-1)^j C(k,j) tau_{i+j}.
    const double inv_fact = 1.0 / std::tgamma(k);
    std::vector<std::vector<detail::AffineExpr>> basis(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        basis[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) {
            const int i = spec.first_index() + c;
            detail::AffineExpr e;
            for (int j = 0; j <= k; ++j) {
                const double w = ((j % 2 == 0) ? 1.0 : -1.0) * detail::binomial(k, j) * inv_fact;
                e.add(tau[static_cast<std::size_t>(a)][static_cast<std::size_t>(i + j - s0)], w);
            }
            basis[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] = e;
        }
    }

    // Tensorize and apply coefficients.
    detail::AffineExpr output;
    if (d == 1) {
        for (int c = 0; c < n; ++c)
            output.add(basis[0][static_cast<std::size_t>(c)], coeffs.values[static_cast<std::size_t>(c)]);
    } else {
        // One gadget level per extra axis; lower-axis partial products are
        // carried forward by multiplying with the next axis directly, and the
        // remaining axes pass through a multiply-by-one gadget.
        std::vector<detail::AffineExpr> partial;  // per flattened (i_0..i_a)
        partial.assign(basis[0].begin(), basis[0].end());
        std::vector<std::vector<detail::AffineExpr>> carried(basis.begin() + 1, basis.end());
        for (int a = 1; a < d; ++a) {
            b.begin_layer();
            std::vector<detail::AffineExpr> next;
            next.reserve(partial.size() * static_cast<std::size_t>(n));
            const auto& axis_basis = carried[static_cast<std::size_t>(a - 1)];
            for (int c = 0; c < n; ++c)
                for (const auto& pp : partial)
                    next.push_back(b.emit_mult(gadgets, pp, axis_basis[static_cast<std::size_t>(c)]));
            // pass the not-yet-consumed axes through the new layer
            for (int rest = a; rest < d - 1; ++rest)
                for (auto& e : carried[static_cast<std::size_t>(rest)])
                    e = b.emit_mult(gadgets, e, detail::AffineExpr::of_constant(1.0));
            partial = std::move(next);
        }
        for (std::size_t flat = 0; flat < partial.size(); ++flat)
            output.add(partial[flat], coeffs.values[flat]);
    }
    return b.finish(output);
}

/// Smallest admissible clip scale for a compiled spline: partition of unity
/// and nonnegativity bound the spline by the largest coefficient magnitude.
inline double spline_sup_bound(const SplineCoeffs& coeffs) {
    double m = 0.0;
    for (double v : coeffs.values) m = std::max(m, std::abs(v));
    return m;
}

inline ClipSpec clip_for_spline(const SplineCoeffs& coeffs, double requested_f = 0.0) {
    const double sup = spline_sup_bound(coeffs);
    ClipSpec clip;
    if (requested_f > 0.0) {
        if (requested_f < sup)
            throw std::invalid_argument("clip scale below spline sup-norm bound; output would clip");
        clip.scale = requested_f;
    } else {
        clip.scale = std::max(1.0, 1.25 * sup);
    }
    return clip;
}

// ---------------------------------------------------------------------------
// Size accounting
// ---------------------------------------------------------------------------

struct SizeReport {
    int depth = 0;
    int max_width = 0;
    std::size_t sparsity = 0;
    std::size_t total_params = 0;
    double max_abs_weight = 0.0;
    double sparsity_over_envelope = 0.0;   // S / (d * beta * l^d)
    double weight_over_envelope = 0.0;     // max|theta| / l^d
};

inline SizeReport size_report(const NetworkParams& net, const SplineSpec& spec, double beta) {
    SizeReport r;
    r.depth = net.arch.depth();
    r.max_width = net.arch.max_width();
    r.sparsity = net.arch.sparsity();
    r.total_params = net.arch.total_params();
    r.max_abs_weight = net.max_abs_weight();
    const double ld = std::pow(static_cast<double>(spec.segments), spec.dim);
    r.sparsity_over_envelope = static_cast<double>(r.sparsity) / (spec.dim * beta * ld);
    r.weight_over_envelope = r.max_abs_weight / ld;
    return r;
}

}  // namespace bpinn
