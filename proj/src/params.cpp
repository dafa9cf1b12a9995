#include "irnn/params.hpp"

#include <string>

namespace irnn {

namespace {

void require_shape(const char* name, const Matrix& m, std::size_t rows, std::size_t cols) {
    if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorCode::dimension_mismatch,
                    std::string(name) + " has shape " + m.shape() + ", expected (" +
                        std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
}

void require_len(const char* name, const Vector& v, std::size_t len) {
    if (v.size() != len) {
        throw Error(ErrorCode::dimension_mismatch,
                    std::string(name) + " has length " + std::to_string(v.size()) +
                        ", expected " + std::to_string(len));
    }
}

template <class P>
void require_finite(const P& p) {
    for_each_block(p, [](std::string_view name, auto, auto, std::span<const double> v) {
        if (!all_finite(v)) {
            throw Error(ErrorCode::invalid_argument,
                        "parameter block " + std::string(name) + " has non-finite entries");
        }
    });
}

}  // namespace

std::string_view architecture_name(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::one_layer: return "one-layer";
        case Architecture::two_layer: return "two-layer";
        case Architecture::feedforward: return "feedforward";
    }
    return "unknown";
}

Architecture architecture_of(const Model& model) noexcept {
    switch (model.index()) {
        case 0: return Architecture::one_layer;
        case 1: return Architecture::two_layer;
        default: return Architecture::feedforward;
    }
}

ArchDescriptor describe(const Model& model) noexcept {
    if (const auto* p = std::get_if<OneLayerParams>(&model)) {
        return {Architecture::one_layer, p->n_in(), 0, p->n_out()};
    }
    if (const auto* p = std::get_if<TwoLayerParams>(&model)) {
        return {Architecture::two_layer, p->n_in(), p->n_hidden(), p->n_out()};
    }
    const auto& p = std::get<FeedForwardParams>(model);
    return {Architecture::feedforward, p.n_in(), p.n_hidden(), p.n_out()};
}

Model zeros_like(const Model& m) {
    return std::visit([](const auto& p) -> Model { return zeros_like(p); }, m);
}

void validate(const OneLayerParams& p) {
    const std::size_t n = p.n_out();
    require_shape("W", p.w, n, n);
    require_len("T", p.t, n);
    require_finite(p);
}

void validate(const TwoLayerParams& p) {
    const std::size_t h = p.n_hidden();
    const std::size_t o = p.n_out();
    require_shape("W_L2", p.w_l2, h, h);
    require_shape("R", p.r, h, o);
    require_len("T_L2", p.t_l2, h);
    require_shape("Q_L1", p.q_l1, o, h);
    require_shape("W_L1", p.w_l1, o, o);
    require_len("T_L1", p.t_l1, o);
    require_finite(p);
}

void validate(const FeedForwardParams& p) {
    require_len("T_L2", p.t_l2, p.n_hidden());
    require_shape("Q_L1", p.q_l1, p.n_out(), p.n_hidden());
    require_len("T_L1", p.t_l1, p.n_out());
    require_finite(p);
}

void validate(const Model& m) {
    std::visit([](const auto& p) { validate(p); }, m);
}

}  // namespace irnn
