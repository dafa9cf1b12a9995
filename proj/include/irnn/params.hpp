#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <type_traits>
#include <variant>

#include "irnn/numeric.hpp"

namespace irnn {

/// Y = f(W·Y + Q·X + T)
struct OneLayerParams {
    Matrix q;  // n_out × n_in
    Matrix w;  // n_out × n_out, lateral
    Vector t;  // n_out

    [[nodiscard]] std::size_t n_in() const noexcept { return q.cols(); }
    [[nodiscard]] std::size_t n_out() const noexcept { return q.rows(); }
    friend bool operator==(const OneLayerParams&, const OneLayerParams&) = default;
};

/// Output layer l1 fed by hidden layer l2, which receives feed-back R from l1:
///   Y1 = f(Q_l1·Y2 + W_l1·Y1 + T_l1)
///   Y2 = f(Q_l2·X + W_l2·Y2 + R·Y1 + T_l2)
struct TwoLayerParams {
    Matrix q_l2;  // n_h × n_in
    Matrix w_l2;  // n_h × n_h
    Matrix r;     // n_h × n_out
    Vector t_l2;  // n_h
    Matrix q_l1;  // n_out × n_h
    Matrix w_l1;  // n_out × n_out
    Vector t_l1;  // n_out

    [[nodiscard]] std::size_t n_in() const noexcept { return q_l2.cols(); }
    [[nodiscard]] std::size_t n_hidden() const noexcept { return q_l2.rows(); }
    [[nodiscard]] std::size_t n_out() const noexcept { return q_l1.rows(); }
    friend bool operator==(const TwoLayerParams&, const TwoLayerParams&) = default;
};

/// Two-layer sigmoid perceptron; the two-layer implicit net without W and R.
struct FeedForwardParams {
    Matrix q_l2;
    Vector t_l2;
    Matrix q_l1;
    Vector t_l1;

    [[nodiscard]] std::size_t n_in() const noexcept { return q_l2.cols(); }
    [[nodiscard]] std::size_t n_hidden() const noexcept { return q_l2.rows(); }
    [[nodiscard]] std::size_t n_out() const noexcept { return q_l1.rows(); }
    friend bool operator==(const FeedForwardParams&, const FeedForwardParams&) = default;
};

// Gradients of a scalar loss share the parameter layout.
using OneLayerGrads = OneLayerParams;
using TwoLayerGrads = TwoLayerParams;
using FeedForwardGrads = FeedForwardParams;

using Model = std::variant<OneLayerParams, TwoLayerParams, FeedForwardParams>;

enum class Architecture { one_layer, two_layer, feedforward };

struct ArchDescriptor {
    Architecture arch = Architecture::one_layer;
    std::size_t n_in = 0;
    std::size_t n_hidden = 0;  // ignored for one_layer
    std::size_t n_out = 0;
};

[[nodiscard]] std::string_view architecture_name(Architecture arch) noexcept;
[[nodiscard]] Architecture architecture_of(const Model& model) noexcept;
[[nodiscard]] ArchDescriptor describe(const Model& model) noexcept;

template <class P>
inline constexpr bool is_params_v =
    std::is_same_v<std::remove_const_t<P>, OneLayerParams> ||
    std::is_same_v<std::remove_const_t<P>, TwoLayerParams> ||
    std::is_same_v<std::remove_const_t<P>, FeedForwardParams>;

/// Visits every parameter block in canonical (file) order as
/// f(name, rows, cols, span). Vectors are reported as rows × 1.
template <class P, class F>
    requires is_params_v<P>
void for_each_block(P& p, F&& f) {
    using Plain = std::remove_const_t<P>;
    if constexpr (std::is_same_v<Plain, OneLayerParams>) {
        f(std::string_view("Q"), p.q.rows(), p.q.cols(), p.q.span());
        f(std::string_view("W"), p.w.rows(), p.w.cols(), p.w.span());
        f(std::string_view("T"), p.t.size(), std::size_t{1}, p.t.span());
    } else if constexpr (std::is_same_v<Plain, TwoLayerParams>) {
        f(std::string_view("Q_L2"), p.q_l2.rows(), p.q_l2.cols(), p.q_l2.span());
        f(std::string_view("W_L2"), p.w_l2.rows(), p.w_l2.cols(), p.w_l2.span());
        f(std::string_view("R"), p.r.rows(), p.r.cols(), p.r.span());
        f(std::string_view("T_L2"), p.t_l2.size(), std::size_t{1}, p.t_l2.span());
        f(std::string_view("Q_L1"), p.q_l1.rows(), p.q_l1.cols(), p.q_l1.span());
        f(std::string_view("W_L1"), p.w_l1.rows(), p.w_l1.cols(), p.w_l1.span());
        f(std::string_view("T_L1"), p.t_l1.size(), std::size_t{1}, p.t_l1.span());
    } else {
        f(std::string_view("Q_L2"), p.q_l2.rows(), p.q_l2.cols(), p.q_l2.span());
        f(std::string_view("T_L2"), p.t_l2.size(), std::size_t{1}, p.t_l2.span());
        f(std::string_view("Q_L1"), p.q_l1.rows(), p.q_l1.cols(), p.q_l1.span());
        f(std::string_view("T_L1"), p.t_l1.size(), std::size_t{1}, p.t_l1.span());
    }
}

template <class F>
void for_each_block(Model& m, F&& f) {
    std::visit([&](auto& p) { for_each_block(p, f); }, m);
}

template <class F>
void for_each_block(const Model& m, F&& f) {
    std::visit([&](const auto& p) { for_each_block(p, f); }, m);
}

/// Zero-filled parameters with the same shapes.
template <class P>
    requires is_params_v<P>
[[nodiscard]] std::remove_const_t<P> zeros_like(P& p) {
    std::remove_const_t<P> z = p;
    for_each_block(z, [](auto, auto, auto, std::span<double> v) {
        for (double& x : v) x = 0.0;
    });
    return z;
}

[[nodiscard]] Model zeros_like(const Model& m);

/// Throws Error{dimension_mismatch} on inconsistent shapes and
/// Error{invalid_argument} on non-finite entries.
void validate(const OneLayerParams& p);
void validate(const TwoLayerParams& p);
void validate(const FeedForwardParams& p);
void validate(const Model& m);

}  // namespace irnn
