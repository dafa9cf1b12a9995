#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "irnn/equilibrium.hpp"
#include "irnn/params.hpp"

namespace irnn {

// Initialization: recurrent blocks (W, W_L1, W_L2, R) start at zero; Q and T
// entries are drawn from U[-0.5, 0.5). Draws run row-major, Q before T, and
// layer 2 before layer 1, so equal seeds give equal networks everywhere.

[[nodiscard]] OneLayerParams init_one_layer(std::size_t n_in, std::size_t n_out, Rng& rng);
[[nodiscard]] TwoLayerParams init_two_layer(std::size_t n_in, std::size_t n_hidden,
                                            std::size_t n_out, Rng& rng);
[[nodiscard]] FeedForwardParams init_feedforward(std::size_t n_in, std::size_t n_hidden,
                                                 std::size_t n_out, Rng& rng);
[[nodiscard]] Model init_model(const ArchDescriptor& arch, Rng& rng);

[[nodiscard]] Equilibrium forward_one_layer(const OneLayerParams& params, const Vector& x,
                                            const SolverConfig& cfg = {});
[[nodiscard]] Equilibrium forward_two_layer(const TwoLayerParams& params, const Vector& x,
                                            const SolverConfig& cfg = {});

struct FeedForwardActivations {
    Vector hidden;
    Vector output;
};

[[nodiscard]] FeedForwardActivations forward_feedforward_full(const FeedForwardParams& params,
                                                              const Vector& x);
[[nodiscard]] Vector forward_feedforward(const FeedForwardParams& params, const Vector& x);

/// Output-layer activations of any model. Feed-forward networks report a
/// converged equilibrium with zero residual.
[[nodiscard]] Equilibrium forward(const Model& model, const Vector& x,
                                  const SolverConfig& cfg = {});

/// Number of trainable scalars. Throws Error{invalid_argument} on zero dimensions.
[[nodiscard]] std::size_t count_parameters(const ArchDescriptor& arch);
[[nodiscard]] std::size_t count_parameters(const Model& model);

/// Text model format, version 1:
///
///   IRNN-MODEL v1
///   arch <one-layer|two-layer|feedforward> n_in <k> n_h <k|-> n_out <k>
///   [matrix NAME rows cols]
///   <rows lines of cols decimals, 17 significant digits>
///   ...
///
/// Vectors are stored as `cols = 1` blocks. Loading throws Error{parse} with
/// the 1-based line number, or Error{unsupported_version}.
void write_model(std::ostream& out, const Model& model);
[[nodiscard]] Model read_model(std::istream& in);
void save_model(const Model& model, const std::filesystem::path& path);
[[nodiscard]] Model load_model(const std::filesystem::path& path);

}  // namespace irnn
