#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irnn/params.hpp"

namespace irnn {

struct AdamSettings {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment estimates for one parameter block.
struct AdamState {
    explicit AdamState(std::size_t size, AdamSettings settings = {})
        : m(size, 0.0), v(size, 0.0), settings(settings) {}

    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;
    AdamSettings settings;
};

/// One bias-corrected ADAM update of `param` in place.
/// Throws Error{dimension_mismatch} when shapes disagree.
void adam_step(AdamState& state, std::span<double> param, std::span<const double> grad);

/// Independent ADAM states, one per parameter block of a model.
class BlockAdam {
public:
    BlockAdam(const Model& model, AdamSettings settings);

    /// Steps every block of `model` with the matching block of `grads`.
    void step(Model& model, const Model& grads);

    [[nodiscard]] const std::vector<AdamState>& states() const noexcept { return states_; }

private:
    std::vector<AdamState> states_;
};

}  // namespace irnn
