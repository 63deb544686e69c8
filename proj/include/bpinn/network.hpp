#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpinn/jet.hpp"

namespace bpinn {

// ---------------------------------------------------------------------------
// C^2 cutoff
// ---------------------------------------------------------------------------

/// Single-layer sigma3 cutoff: phi(z) = b + sum_i a_i sigma3(z - t_i) is the
/// identity on (-1,1) and saturates at +-2 outside [-2,2]. clip_F(x) scales
/// this to F * phi(x/F).
struct ClipSpec {
    std::array<double, 8> knots{-2.0, -7.0 / 4.0, -3.0 / 2.0, -1.0, 1.0, 3.0 / 2.0, 7.0 / 4.0, 2.0};
    std::array<double, 8> weights{14.0 / 3.0, -32.0 / 3.0, 20.0 / 3.0, -2.0 / 3.0,
                                  2.0 / 3.0,  -20.0 / 3.0, 32.0 / 3.0, -14.0 / 3.0};
    double bias = -2.0;
    double scale = 1.0;  // F

    /// Checks the defining linear system (antisymmetry, moment conditions).
    bool valid(double tol = 1e-12) const {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < 4; ++i) {
            s0 += weights[i];
            s1 += weights[i] * knots[i];
            s2 += weights[i] * knots[i] * knots[i];
        }
        for (int i = 0; i < 4; ++i) {
            if (std::abs(weights[7 - i] + weights[i]) > tol) return false;
            if (std::abs(knots[7 - i] + knots[i]) > tol) return false;
        }
        return std::abs(s0) <= tol && std::abs(s1) <= tol && std::abs(s2 - 1.0 / 3.0) <= tol &&
               scale > 0.0;
    }
};

inline double clip_eval(const ClipSpec& spec, double x) {
    const double F = spec.scale;
    if (std::abs(x) <= F) return x;                // exact identity region
    if (x >= 2.0 * F) return 2.0 * F;              // exact saturation: the
    if (x <= -2.0 * F) return -2.0 * F;            // cubic sum cancels there
    double acc = spec.bias;
    for (int i = 0; i < 8; ++i) acc += spec.weights[i] * sigma3(x / F - spec.knots[i]);
    return F * acc;
}

inline Jet2 clip_eval(const ClipSpec& spec, const Jet2& x) {
    const double F = spec.scale;
    if (std::abs(x.value) <= F) return x;  // exact identity region of the cutoff
    if (std::abs(x.value) >= 2.0 * F)      // exact saturation with zero slope
        return Jet2::constant(x.dim, x.value > 0.0 ? 2.0 * F : -2.0 * F);
    // phi applied to the scalar value, chain rule on grad/hess.
    const double z = x.value / F;
    double v = spec.bias, d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double s = z - spec.knots[i];
        if (s <= 0.0) continue;
        const double a = spec.weights[i];
        v += a * s * s * s;
        d1 += a * 3.0 * s * s;
        d2 += a * 6.0 * s;
    }
    // clip_F(u) = F*phi(u/F): derivative wrt u is phi'(u/F), second F^-1 phi''.
    Jet2 out(x.dim);
    out.value = F * v;
    const double g1 = d1;
    const double g2 = d2 / F;
    for (int i = 0; i < x.dim; ++i) out.grad[i] = g1 * x.grad[i];
    for (int i = 0; i < x.dim; ++i)
        for (int j = 0; j < x.dim; ++j)
            out.h(i, j) = g1 * x.h(i, j) + g2 * x.grad[i] * x.grad[j];
    return out;
}

// ---------------------------------------------------------------------------
// Sparse sigma3 networks
// ---------------------------------------------------------------------------

/// Network shape plus the activation mask gamma over the dense parameter
/// layout. Layout is layer-major: for each hidden layer, weight matrix
/// row-major (out x in) followed by the biases, and finally the affine output
/// layer (1 x w_last weights, then the output bias).
struct Architecture {
    int input_dim = 1;
    std::vector<int> hidden_widths;    // one entry per hidden (sigma3) layer
    std::vector<std::uint8_t> mask;    // gamma, length total_params()

    int depth() const { return static_cast<int>(hidden_widths.size()); }
    int max_width() const {
        int w = 0;
        for (int h : hidden_widths) w = std::max(w, h);
        return w;
    }

    std::size_t total_params() const {
        std::size_t t = 0;
        int prev = input_dim;
        for (int w : hidden_widths) {
            t += static_cast<std::size_t>(w) * prev + w;
            prev = w;
        }
        t += static_cast<std::size_t>(prev) + 1;  // output layer
        return t;
    }

    std::size_t sparsity() const {
        return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
    }

    /// Uniform-width architecture with all parameters active; this is the
    /// Theta(L, W, S, B) shape, for which total_params() equals
    /// dW + W + (L-1)(W^2 + W) + W + 1.
    static Architecture uniform(int input_dim, int depth, int width) {
        Architecture a;
        a.input_dim = input_dim;
        a.hidden_widths.assign(static_cast<std::size_t>(depth), width);
        a.mask.assign(a.total_params(), std::uint8_t{1});
        return a;
    }
};

struct NetworkParams {
    Architecture arch;
    std::vector<double> theta;  // dense, length arch.total_params()
    double bound = 1.0;         // B

    bool valid() const {
        if (theta.size() != arch.total_params() || theta.size() != arch.mask.size()) return false;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (!arch.mask[i] && theta[i] != 0.0) return false;
            if (std::abs(theta[i]) > bound) return false;
        }
        return bound > 0.0;
    }

    double max_abs_weight() const {
        double m = 0.0;
        for (double t : theta) m = std::max(m, std::abs(t));
        return m;
    }
};

/// CSR-style evaluator built once per parameter vector; forward passes skip
/// masked weights entirely.
class Evaluator {
public:
    explicit Evaluator(const NetworkParams& p) : input_dim_(p.arch.input_dim) {
        const auto& a = p.arch;
        int prev = a.input_dim;
        std::size_t off = 0;
        const int n_layers = a.depth() + 1;
        layers_.resize(static_cast<std::size_t>(n_layers));
        for (int li = 0; li <= a.depth(); ++li) {
            const int w = (li < a.depth()) ? a.hidden_widths[static_cast<std::size_t>(li)] : 1;
            Layer& L = layers_[static_cast<std::size_t>(li)];
            L.out_width = w;
            L.row_ptr.assign(static_cast<std::size_t>(w) + 1, 0);
            for (int r = 0; r < w; ++r) {
                for (int c = 0; c < prev; ++c) {
                    const std::size_t idx = off + static_cast<std::size_t>(r) * prev + c;
                    if (p.theta[idx] != 0.0) {
                        L.cols.push_back(c);
                        L.vals.push_back(p.theta[idx]);
                    }
                }
                L.row_ptr[static_cast<std::size_t>(r) + 1] = L.cols.size();
            }
            off += static_cast<std::size_t>(w) * prev;
            L.bias.assign(p.theta.begin() + static_cast<std::ptrdiff_t>(off),
                          p.theta.begin() + static_cast<std::ptrdiff_t>(off + w));
            off += static_cast<std::size_t>(w);
            prev = w;
        }
    }

    /// Scratch buffers for allocation-free repeated forward passes.
    struct Workspace {
        std::vector<Jet2> cur, next;
        std::vector<double> vcur, vnext;
    };

    /// Value, gradient and Hessian of f_theta at x (no clip).
    Jet2 forward_jet(std::span<const double> x) const {
        Workspace ws;
        return forward_jet(x, ws);
    }

    Jet2 forward_jet(std::span<const double> x, Workspace& ws) const {
        const int d = static_cast<int>(x.size());
        std::vector<Jet2>& cur = ws.cur;
        cur.assign(static_cast<std::size_t>(d), Jet2(d));
        for (int i = 0; i < d; ++i) cur[static_cast<std::size_t>(i)] = lift_coordinate(x, i);
        std::vector<Jet2>& next = ws.next;
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer& L = layers_[li];
            next.assign(static_cast<std::size_t>(L.out_width), Jet2(d));
            for (int r = 0; r < L.out_width; ++r) {
                Jet2& acc = next[static_cast<std::size_t>(r)];
                acc.value = L.bias[static_cast<std::size_t>(r)];
                for (std::size_t e = L.row_ptr[static_cast<std::size_t>(r)];
                     e < L.row_ptr[static_cast<std::size_t>(r) + 1]; ++e) {
                    const Jet2& in = cur[static_cast<std::size_t>(L.cols[e])];
                    const double w = L.vals[e];
                    acc.value += w * in.value;
                    for (int i = 0; i < d; ++i) acc.grad[i] += w * in.grad[i];
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) acc.h(i, j) += w * in.h(i, j);
                }
                if (li + 1 < layers_.size()) acc = jet_sigma3(acc);
            }
            cur.swap(next);
        }
        return cur[0];
    }

    /// Value-only forward pass.
    double forward_value(std::span<const double> x) const {
        Workspace ws;
        return forward_value(x, ws);
    }

    double forward_value(std::span<const double> x, Workspace& ws) const {
        std::vector<double>& cur = ws.vcur;
        cur.assign(x.begin(), x.end());
        std::vector<double>& next = ws.vnext;
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer& L = layers_[li];
            next.assign(static_cast<std::size_t>(L.out_width), 0.0);
            for (int r = 0; r < L.out_width; ++r) {
                double acc = L.bias[static_cast<std::size_t>(r)];
                for (std::size_t e = L.row_ptr[static_cast<std::size_t>(r)];
                     e < L.row_ptr[static_cast<std::size_t>(r) + 1]; ++e)
                    acc += L.vals[e] * cur[static_cast<std::size_t>(L.cols[e])];
                next[static_cast<std::size_t>(r)] = (li + 1 < layers_.size()) ? sigma3(acc) : acc;
            }
            cur.swap(next);
        }
        return cur[0];
    }

    int input_dim() const { return input_dim_; }

private:
    struct Layer {
        int out_width = 0;
        std::vector<std::size_t> row_ptr;
        std::vector<int> cols;
        std::vector<double> vals;
        std::vector<double> bias;
    };
    int input_dim_;
    std::vector<Layer> layers_;
};

/// clip o f_theta with full second-order derivatives.
inline Jet2 forward_jet(const NetworkParams& params, const ClipSpec& clip,
                        std::span<const double> x) {
    Evaluator ev(params);
    return clip_eval(clip, ev.forward_jet(x));
}

inline Jet2 forward_jet(const Evaluator& ev, const ClipSpec& clip, std::span<const double> x) {
    return clip_eval(clip, ev.forward_jet(x));
}

inline double forward_value(const Evaluator& ev, const ClipSpec& clip, std::span<const double> x) {
    return clip_eval(clip, ev.forward_value(x));
}

// ---------------------------------------------------------------------------
// Parameter-Lipschitz diagnostic
// ---------------------------------------------------------------------------

/// Envelope C_p = C0 * W^((3^L - 1)/2) * (B v d)^((5*3^L - 1)/2) for the
/// sup-norm sensitivity of clip o f_theta (and its first two derivatives) to
/// parameter perturbations. Diagnostic only; may overflow to +inf for deep
/// networks.
inline double parameter_lipschitz_estimate(const Architecture& arch, double B, int d,
                                           double c0 = 1.0) {
    const double L = static_cast<double>(arch.depth());
    const double W = static_cast<double>(std::max(arch.max_width(), 1));
    const double p3 = std::pow(3.0, L);
    const double e1 = (p3 - 1.0) / 2.0;
    const double e2 = (5.0 * p3 - 1.0) / 2.0;
    return c0 * std::pow(W, e1) * std::pow(std::max(B, static_cast<double>(d)), e2);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string base64_encode(const std::vector<std::uint8_t>& bits) {
    static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    // pack bits (LSB-first within bytes)
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) v |= bytes[i + 2];
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(i + 1 < bytes.size() ? tbl[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < bytes.size() ? tbl[v & 63] : '=');
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode_bits(const std::string& s, std::size_t n_bits) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> bytes;
    std::uint32_t buf = 0;
    int nb = 0;
    for (char c : s) {
        const int v = val(c);
        if (v < 0) continue;
        buf = (buf << 6) | static_cast<std::uint32_t>(v);
        nb += 6;
        if (nb >= 8) {
            nb -= 8;
            bytes.push_back(static_cast<std::uint8_t>((buf >> nb) & 0xff));
        }
    }
    std::vector<std::uint8_t> bits(n_bits, 0);
    for (std::size_t i = 0; i < n_bits; ++i)
        bits[i] = (i / 8 < bytes.size() && (bytes[i / 8] >> (i % 8)) & 1u) ? 1 : 0;
    return bits;
}

}  // namespace detail

inline nlohmann::json to_json(const NetworkParams& p) {
    nlohmann::json j;
    j["L"] = p.arch.depth();
    j["input_dim"] = p.arch.input_dim;
    j["widths"] = p.arch.hidden_widths;
    j["gamma"] = detail::base64_encode(p.arch.mask);
    j["theta"] = p.theta;
    j["B"] = p.bound;
    return j;
}

inline NetworkParams network_from_json(const nlohmann::json& j) {
    NetworkParams p;
    p.arch.input_dim = j.at("input_dim").get<int>();
    p.arch.hidden_widths = j.at("widths").get<std::vector<int>>();
    if (j.at("L").get<int>() != p.arch.depth())
        throw std::runtime_error("network_from_json: depth/widths mismatch");
    p.theta = j.at("theta").get<std::vector<double>>();
    p.arch.mask = detail::base64_decode_bits(j.at("gamma").get<std::string>(),
                                             p.arch.total_params());
    p.bound = j.at("B").get<double>();
    if (p.theta.size() != p.arch.total_params())
        throw std::runtime_error("network_from_json: theta length mismatch");
    return p;
}

}  // namespace bpinn
