#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "irnn/numeric.hpp"

namespace irnn {

struct XorSample {
    Vector x;
    double y_xor = 0.0;
    double y_nor = 0.0;
};

/// The four rows of the XOR truth table with the NOR sub-target.
[[nodiscard]] std::array<XorSample, 4> xor_dataset();

/// Positions x(k·dt), k = 0..length-1, of ẍ + 2δẋ + ω₀²x = 0 with x(0) = x0 and
/// ẋ(0) = v0, from the closed-form solution of the matching damping regime.
/// |δ − ω₀| ≤ critical_band is treated as critically damped.
[[nodiscard]] Vector oscillator_trajectory(double omega0, double delta, double x0, double v0,
                                           std::size_t length, double dt);

inline constexpr double critical_band = 1e-9;

struct OscillatorSample {
    Vector trajectory;
    double omega0 = 0.0;
    double delta = 0.0;
    double x0 = 0.0;
    double v0 = 0.0;
};

/// Affine maps of the physical target ranges onto [0.1, 0.9]:
/// ω₀ ∈ [1, 2] and δ ∈ [0, 2].
struct TargetMap {
    static constexpr double out_lo = 0.1;
    static constexpr double out_hi = 0.9;
    static constexpr double omega_lo = 1.0;
    static constexpr double omega_hi = 2.0;
    static constexpr double delta_lo = 0.0;
    static constexpr double delta_hi = 2.0;
};

/// Throws Error{invalid_argument} for values outside the physical ranges.
[[nodiscard]] Vector normalize_targets(double omega0, double delta);
/// Inverse of normalize_targets; returns (ω₀, δ).
[[nodiscard]] Vector denormalize_targets(const Vector& normalized);

struct DatasetMeta {
    std::size_t length = 50;
    double dt = 0.1;
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

struct PendulumDataset {
    DatasetMeta meta;
    std::vector<OscillatorSample> train;
    std::vector<OscillatorSample> test;
};

inline constexpr double pendulum_dt = 0.1;

/// i.i.d. draws per sample in the order ω₀ ~ U[1,2), δ ~ U[0,2), x0 ~ N(0,2),
/// v0 ~ N(0,2) (standard deviation 2). Exact duplicate tuples are redrawn.
/// The first ⌊4n/5⌋ samples form the training split.
[[nodiscard]] PendulumDataset generate_pendulum_dataset(std::size_t n_samples, std::size_t length,
                                                        std::uint64_t seed);

/// CSV format:
///   # IRNN-PENDULUM v1, L=<L>, dt=0.1, seed=<s>
///   x_0,...,x_{L-1},omega0,delta,x0,v0,split
/// with 17 significant digits and split ∈ {train, test}. Reading throws
/// Error{parse} with the 1-based line number.
void write_pendulum_csv(std::ostream& out, const PendulumDataset& data);
[[nodiscard]] PendulumDataset read_pendulum_csv(std::istream& in);
void save_pendulum_dataset(const PendulumDataset& data, const std::filesystem::path& path);
[[nodiscard]] PendulumDataset load_pendulum_dataset(const std::filesystem::path& path);

}  // namespace irnn
