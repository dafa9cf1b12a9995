#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "irnn/error.hpp"

namespace irnn {

/// Dense real vector.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
    Vector(std::initializer_list<double> values) : data_(values) {}
    explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] std::span<double> span() noexcept { return data_; }
    [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
    [[nodiscard]] double* data() noexcept { return data_.data(); }
    [[nodiscard]] const double* data() const noexcept { return data_.data(); }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> data_;
};

/// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    [[nodiscard]] std::span<double> span() noexcept { return data_; }
    [[nodiscard]] std::span<const double> span() const noexcept { return data_; }

    [[nodiscard]] std::string shape() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Basic operations. All throw Error{dimension_mismatch} naming both shapes.

[[nodiscard]] Vector matvec(const Matrix& a, const Vector& x);
/// y = Aᵀ·x
[[nodiscard]] Vector matvec_transposed(const Matrix& a, const Vector& x);
[[nodiscard]] Matrix matmul(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix transpose(const Matrix& a);
[[nodiscard]] Matrix outer(const Vector& a, const Vector& b);
/// diag(d)·A, i.e. row i scaled by d_i.
[[nodiscard]] Matrix scale_rows(const Vector& d, const Matrix& a);

[[nodiscard]] Vector add(const Vector& a, const Vector& b);
[[nodiscard]] Vector subtract(const Vector& a, const Vector& b);
[[nodiscard]] Vector hadamard(const Vector& a, const Vector& b);
[[nodiscard]] Matrix subtract(const Matrix& a, const Matrix& b);

[[nodiscard]] double norm2(std::span<const double> v);
[[nodiscard]] double max_abs(std::span<const double> v);
[[nodiscard]] bool all_finite(std::span<const double> v);

/// LU factorization with partial pivoting, PA = LU. Throws
/// Error{singular_system} carrying the pivot index when a pivot magnitude
/// falls below `pivot_threshold`.
class LuFactorization {
public:
    static constexpr double pivot_threshold = 1e-12;

    explicit LuFactorization(const Matrix& a);

    [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }

    /// Solves A·x = b.
    [[nodiscard]] Vector solve(const Vector& b) const;
    /// Solves Aᵀ·x = b.
    [[nodiscard]] Vector solve_transposed(const Vector& b) const;
    /// Solves A·X = B column by column.
    [[nodiscard]] Matrix solve(const Matrix& b) const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

/// X with A·X = B.
[[nodiscard]] Matrix solve_linear(const Matrix& a, const Matrix& b);

[[nodiscard]] double sigmoid(double x) noexcept;
[[nodiscard]] Vector sigmoid(const Vector& x);
/// y·(1 − y), the sigmoid derivative expressed through its output.
[[nodiscard]] Vector sigmoid_prime_from_output(const Vector& y);

/// Seeded 64-bit generator. Draws are bit-reproducible across platforms: the
/// engine is mt19937_64 and the real-valued transforms are implemented here
/// rather than through the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double next_unit();
    /// Uniform on [lo, hi). Requires lo < hi.
    double uniform(double lo, double hi);
    /// Box–Muller normal draw; `sd` is the standard deviation.
    double normal(double mean, double sd);

private:
    std::mt19937_64 engine_;
};

}  // namespace irnn
