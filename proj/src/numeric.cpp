#include "irnn/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace irnn {

namespace {

std::string vec_shape(std::size_t n) { return "(" + std::to_string(n) + ")"; }

[[noreturn]] void mismatch(const char* op, const std::string& lhs, const std::string& rhs) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(op) + ": dimension mismatch between " + lhs + " and " + rhs);
}

void require_same(const char* op, const Vector& a, const Vector& b) {
    if (a.size() != b.size()) mismatch(op, vec_shape(a.size()), vec_shape(b.size()));
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw Error(ErrorCode::dimension_mismatch, "Matrix: ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

std::string Matrix::shape() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) mismatch("matvec", a.shape(), vec_shape(x.size()));
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * x[k];
        y[i] = acc;
    }
    return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
    if (a.rows() != x.size()) mismatch("matvec_transposed", a.shape(), vec_shape(x.size()));
    Vector y(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * x[i];
    }
    return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) mismatch("matmul", a.shape(), b.shape());
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix outer(const Vector& a, const Vector& b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

Matrix scale_rows(const Vector& d, const Matrix& a) {
    if (d.size() != a.rows()) mismatch("scale_rows", vec_shape(d.size()), a.shape());
    Matrix m = a;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (double& v : m.row(i)) v *= d[i];
    return m;
}

Vector add(const Vector& a, const Vector& b) {
    require_same("add", a, b);
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vector subtract(const Vector& a, const Vector& b) {
    require_same("subtract", a, b);
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Vector hadamard(const Vector& a, const Vector& b) {
    require_same("hadamard", a, b);
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
    return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) mismatch("subtract", a.shape(), b.shape());
    Matrix c = a;
    auto cs = c.span();
    auto bs = b.span();
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] -= bs[i];
    return c;
}

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

LuFactorization::LuFactorization(const Matrix& a) : lu_(a), perm_(a.rows()) {
    if (a.rows() != a.cols()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "LU factorization requires a square matrix, got " + a.shape());
    }
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(lu_(i, k)) > std::abs(lu_(pivot, k))) pivot = i;
        }
        if (!(std::abs(lu_(pivot, k)) >= pivot_threshold)) {
            throw Error(ErrorCode::singular_system,
                        "singular system: pivot " + std::to_string(k) + " has magnitude " +
                            std::to_string(std::abs(lu_(pivot, k))),
                        k);
        }
        if (pivot != k) {
            std::swap(perm_[k], perm_[pivot]);
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(pivot, j));
        }
        const double inv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu_(i, k) * inv;
            lu_(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
        }
    }
}

Vector LuFactorization::solve(const Vector& b) const {
    const std::size_t n = size();
    if (b.size() != n) mismatch("LU solve", lu_.shape(), vec_shape(b.size()));
    Vector x(n);
    // L·z = P·b
    for (std::size_t i = 0; i < n; ++i) {
        double acc = b[perm_[i]];
        for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
        x[i] = acc;
    }
    // U·x = z
    for (std::size_t i = n; i-- > 0;) {
        double acc = x[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
        x[i] = acc / lu_(i, i);
    }
    return x;
}

Vector LuFactorization::solve_transposed(const Vector& b) const {
    // Aᵀ = Uᵀ·Lᵀ·P, so solve Uᵀ·w = b, Lᵀ·z = w, then x = Pᵀ·z.
    const std::size_t n = size();
    if (b.size() != n) mismatch("LU transposed solve", lu_.shape(), vec_shape(b.size()));
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < i; ++j) acc -= lu_(j, i) * w[j];
        w[i] = acc / lu_(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = w[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(j, i) * w[j];
        w[i] = acc;
    }
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = w[i];
    return x;
}

Matrix LuFactorization::solve(const Matrix& b) const {
    if (b.rows() != size()) mismatch("LU solve", lu_.shape(), b.shape());
    Matrix x(b.rows(), b.cols());
    Vector column(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) column[i] = b(i, j);
        const Vector sol = solve(column);
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = sol[i];
    }
    return x;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols()) mismatch("solve_linear", a.shape(), b.shape());
    if (a.rows() != b.rows()) mismatch("solve_linear", a.shape(), b.shape());
    return LuFactorization(a).solve(b);
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector sigmoid(const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
    return y;
}

Vector sigmoid_prime_from_output(const Vector& y) {
    Vector d(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) d[i] = y[i] * (1.0 - y[i]);
    return d;
}

double Rng::next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw Error(ErrorCode::invalid_argument, "Rng::uniform: empty range [" +
                                                     std::to_string(lo) + ", " +
                                                     std::to_string(hi) + ")");
    }
    const double u = lo + (hi - lo) * next_unit();
    // Rounding can land exactly on hi for wide ranges.
    return u < hi ? u : std::nextafter(hi, lo);
}

double Rng::normal(double mean, double sd) {
    if (!(sd > 0.0)) {
        throw Error(ErrorCode::invalid_argument,
                    "Rng::normal: standard deviation must be positive, got " + std::to_string(sd));
    }
    const double u1 = 1.0 - next_unit();  // (0, 1]
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * radius * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace irnn
