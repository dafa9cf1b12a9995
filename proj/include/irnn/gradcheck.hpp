#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "irnn/gradients.hpp"
#include "irnn/training.hpp"

namespace irnn {

struct GradcheckOptions {
    TrainArch arch = TrainArch::one_layer_exact;
    std::size_t n_in = 3;
    std::size_t n_hidden = 4;
    std::size_t n_out = 2;
    std::uint64_t seed = 0;
    double step = 1e-5;
    double tol = 1e-5;
    double recurrent_range = 0.4;  // recurrent weights drawn from U[-r, r)
};

struct GradcheckReport {
    std::vector<BlockError> blocks;  // analytic vs finite differences
    std::optional<double> unrolled_max_rel_error;
    std::optional<double> spectral_radius;  // of diag(f')·W, one-layer only
    bool passed = false;
};

/// Tight solver used by the gradient oracles: 400 RK4 steps, tolerance 1e-12.
[[nodiscard]] SolverConfig oracle_solver();

/// Random network with non-zero recurrent blocks, drawn after the standard
/// initialization from the same generator.
[[nodiscard]] Model random_recurrent_model(const ArchDescriptor& arch, double recurrent_range,
                                           Rng& rng);

/// Compares analytic (exact or semi) gradients of a random network's MSE loss
/// with central differences, and with the 500-step unrolled gradient for
/// one-layer nets whose diag(f')·W has spectral radius below 0.9. Solver
/// failure propagates as Error.
[[nodiscard]] GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace irnn
