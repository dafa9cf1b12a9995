#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "irnn/equilibrium.hpp"
#include "irnn/networks.hpp"
#include "irnn/params.hpp"

namespace irnn {

// ---------------------------------------------------------------------------
// Loss

/// Supervision mask; an empty mask supervises every output.
using OutputMask = std::vector<bool>;

/// L = (1/n)·Σ (y_i − ŷ_i)² over the n supervised outputs.
[[nodiscard]] double masked_mse(const Vector& y, const Vector& target, const OutputMask& mask = {});
/// dL/dY = 2·(y − ŷ)/n on supervised outputs, exactly zero elsewhere.
[[nodiscard]] Vector masked_mse_gradient(const Vector& y, const Vector& target,
                                         const OutputMask& mask = {});

// ---------------------------------------------------------------------------
// Exact equilibrium gradients
//
// With D = diag(f′) at the fixed point, every one-layer Jacobian shares the
// factor M = (1 − D·W)⁻¹·D. Gradients are formed in adjoint order: solve
// g = Mᵀ·dL/dY once, then dT = g, dW = g·Yᵀ, dQ = g·Xᵀ. Singular systems throw
// Error{singular_system}.

/// M with (1 − D·W)·M = D, from an LU solve.
[[nodiscard]] Matrix sensitivity_one_layer(const OneLayerParams& params, const Equilibrium& eq);

[[nodiscard]] OneLayerGrads loss_grads_one_layer(const OneLayerParams& params, const Vector& x,
                                                 const Equilibrium& eq, const Vector& dl_dy);

/// S = (1 − D1·W_l1 − D1·Q_l1·(1 − D2·W_l2)⁻¹·D2·R)⁻¹, the two-layer analogue
/// of (1 − D·W)⁻¹. Error messages name the inner or outer system.
[[nodiscard]] Matrix two_layer_s_matrix(const TwoLayerParams& params, const Equilibrium& eq);

[[nodiscard]] TwoLayerGrads loss_grads_two_layer(const TwoLayerParams& params, const Vector& x,
                                                 const Equilibrium& eq, const Vector& dl_dy);

/// Plain two-layer backpropagation.
[[nodiscard]] FeedForwardGrads loss_grads_feedforward(const FeedForwardParams& params,
                                                      const Vector& x,
                                                      const FeedForwardActivations& acts,
                                                      const Vector& dl_dy);

/// Full Jacobian tensors of the one-layer equilibrium, materialized:
/// j_w[(i·n + j)·n + m] = ∂Y_i/∂W_jm, j_q[(i·n + j)·n_in + m] = ∂Y_i/∂Q_jm,
/// j_t(i, j) = ∂Y_i/∂T_j. O(n³) memory; for checking the adjoint path.
struct OneLayerJacobians {
    std::size_t n_out = 0;
    std::size_t n_in = 0;
    std::vector<double> j_w;
    std::vector<double> j_q;
    Matrix j_t;
};

[[nodiscard]] OneLayerJacobians jacobians_one_layer(const OneLayerParams& params,
                                                    const Vector& x, const Equilibrium& eq);
/// Contracts the materialized tensors with dL/dY.
[[nodiscard]] OneLayerGrads contract(const OneLayerJacobians& jac, const Vector& dl_dy);

// ---------------------------------------------------------------------------
// Semi-gradients: equilibrium activations inside f(·) are held constant,
// which replaces M by D.

[[nodiscard]] OneLayerGrads semi_grads_one_layer(const OneLayerParams& params, const Vector& x,
                                                 const Equilibrium& eq, const Vector& dl_dy);
[[nodiscard]] TwoLayerGrads semi_grads_two_layer(const TwoLayerParams& params, const Vector& x,
                                                 const Equilibrium& eq, const Vector& dl_dy);

// ---------------------------------------------------------------------------
// Oracles

using OutputLoss = std::function<double(const Vector& output)>;

/// Central differences (L(θ+h) − L(θ−h))/(2h) per parameter, re-solving the
/// equilibrium for every perturbation with `cfg`. Throws Error{not_converged}
/// when a perturbed equilibrium misses the tolerance.
[[nodiscard]] Model finite_diff_grads(const Model& model, const Vector& x,
                                      const OutputLoss& loss, double step,
                                      const SolverConfig& cfg);

/// Gradient of L(Y(n)) through n plain iterative updates Y(t+1) = f(X̃(t))
/// from Y(0) = 0, by forward accumulation of
///   J(t) = f′(t−1) ⊙ (W·J(t−1) + δ_Y(t−1)).
/// Chains of 10 or more steps must settle (last update ≤ 1e-8) or
/// Error{not_converged} is thrown; non-finite states throw Error{diverged}.
[[nodiscard]] OneLayerGrads unrolled_grads(const OneLayerParams& params, const Vector& x,
                                           const Vector& dl_dy, std::size_t n_steps);

/// Spectral radius estimate of A from 100 normalized power-iteration steps
/// (geometric mean of the growth factors).
[[nodiscard]] double spectral_radius_estimate(const Matrix& a);

/// Σ_{k=0}^{k_max} (D·W)^k. Throws Error{invalid_argument} when the estimated
/// spectral radius of D·W is not below 1.
[[nodiscard]] Matrix neumann_inverse(const Vector& d, const Matrix& w, std::size_t k_max);

/// max |a − b| / max(|a|, |b|) over entries whose larger magnitude is at least
/// `floor`, per block.
struct BlockError {
    std::string name;
    double max_rel_error = 0.0;
};

[[nodiscard]] std::vector<BlockError> relative_errors(const Model& a, const Model& b,
                                                      double floor = 1e-8);

}  // namespace irnn
