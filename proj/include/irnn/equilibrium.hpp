#pragma once

#include <cstddef>

#include "irnn/numeric.hpp"
#include "irnn/params.hpp"

namespace irnn {

enum class Integrator { rk4, euler };

/// Relaxation settings. `step_size` is the integration step in relaxation
/// time for both methods; the defaults give 30 RK4 steps of size 1.
///
/// `iterations` steps are always taken. If the residual is still above
/// `tolerance` afterwards, integration continues one step at a time until it
/// is not, or until `max_iterations` steps in total (0: no extension).
struct SolverConfig {
    Integrator method = Integrator::rk4;
    std::size_t iterations = 30;
    double step_size = 1.0;
    double tolerance = 1e-6;
    std::size_t max_iterations = 0;

    /// Throws Error{invalid_argument}.
    void validate() const;
};

/// Fixed point of the relaxation ODE dY/dt = f(X̃) − Y.
struct Equilibrium {
    Vector output;  // Y (one layer) or Y^l1
    Vector hidden;  // Y^l2; empty for one-layer networks
    double residual_norm = 0.0;  // ‖dY/dt‖₂ over the (stacked) state at termination
    bool converged = false;      // residual_norm ≤ tolerance
    std::size_t iterations = 0;  // integration steps taken
};

/// f(Q·x + W·y + T) − y
[[nodiscard]] Vector relaxation_rhs_one_layer(const OneLayerParams& params, const Vector& x,
                                              const Vector& y);

/// Stacked right-hand side [dY^l2/dt; dY^l1/dt] of the coupled two-layer system.
[[nodiscard]] Vector relaxation_rhs_two_layer(const TwoLayerParams& params, const Vector& x,
                                              const Vector& hidden, const Vector& output);

/// Integrates from Y = 0. Throws Error{diverged} with the iteration index when
/// the state becomes non-finite or the residual grows by more than 1e6.
[[nodiscard]] Equilibrium solve_one_layer(const OneLayerParams& params, const Vector& x,
                                          const SolverConfig& cfg = {});

/// Integrates both layers as one stacked state [Y^l2; Y^l1] from zero.
[[nodiscard]] Equilibrium solve_two_layer(const TwoLayerParams& params, const Vector& x,
                                          const SolverConfig& cfg = {});

/// Explicit Euler relaxation Y ← Y + h·(f(X̃) − Y); h = 1 is the plain
/// iterative update Y ← f(X̃).
[[nodiscard]] Equilibrium euler_iterate(const OneLayerParams& params, const Vector& x, double h,
                                        std::size_t steps, double tolerance = 1e-6);

}  // namespace irnn
