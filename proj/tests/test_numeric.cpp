#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "irnn/numeric.hpp"

using namespace irnn;

namespace {

// Naive reference, written independently of matvec.
std::vector<double> naive_matvec(const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& x) {
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) y[i] += a[i][k] * x[k];
    return y;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& v : m.span()) v = rng.uniform(lo, hi);
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.span()[i] - b.span()[i]));
    return worst;
}

}  // namespace

TEST_CASE("matvec examples") {
    CHECK(matvec(Matrix::identity(2), Vector{3, 4}) == Vector{3, 4});
    CHECK(matvec(Matrix(2, 2), Vector{3, 4}) == Vector{0, 0});

    const Vector y = matvec(Matrix{{1, 2}, {3, 4}}, Vector{1, 1});
    const auto ref = naive_matvec({{1, 2}, {3, 4}}, {1, 1});
    CHECK(y == Vector{3, 7});
    CHECK(y[0] == ref[0]);
    CHECK(y[1] == ref[1]);
}

TEST_CASE("matvec agrees with a double loop on random shapes") {
    Rng rng(5);
    for (std::size_t r = 1; r <= 6; ++r) {
        for (std::size_t c = 1; c <= 6; ++c) {
            const Matrix a = random_matrix(r, c, rng);
            Vector x(c);
            for (double& v : x) v = rng.uniform(-1, 1);
            std::vector<std::vector<double>> rows(r, std::vector<double>(c));
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) rows[i][j] = a(i, j);
            const auto ref = naive_matvec(rows, {x.begin(), x.end()});
            const Vector y = matvec(a, x);
            const Vector yt = matvec_transposed(transpose(a), x);
            for (std::size_t i = 0; i < r; ++i) {
                CHECK(std::abs(y[i] - ref[i]) <= 1e-15);
                CHECK(std::abs(yt[i] - ref[i]) <= 1e-15);
            }
        }
    }
}

TEST_CASE("dimension mismatch names both shapes") {
    try {
        (void)matvec(Matrix(2, 3), Vector{1, 2});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::dimension_mismatch);
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
    }
    CHECK_THROWS_AS((void)matmul(Matrix(2, 3), Matrix(2, 3)), Error);
    CHECK_THROWS_AS((void)add(Vector{1}, Vector{1, 2}), Error);
    CHECK_THROWS_AS((void)solve_linear(Matrix(2, 3), Matrix(2, 1)), Error);
}

TEST_CASE("outer and scale_rows") {
    CHECK(outer(Vector{1, 2}, Vector{3, 4, 5}) == Matrix{{3, 4, 5}, {6, 8, 10}});
    const Matrix s = scale_rows(Vector{2, -1}, Matrix{{1, 2}, {3, 4}});
    CHECK(s == Matrix{{2, 4}, {-3, -4}});
    CHECK(matmul(Matrix::diagonal(std::vector<double>{2, -1}), Matrix{{1, 2}, {3, 4}}) == s);
}

TEST_CASE("solve_linear examples") {
    Rng rng(11);
    const Matrix b = random_matrix(3, 2, rng);
    CHECK(solve_linear(Matrix::identity(3), b) == b);

    const Matrix x = solve_linear(Matrix{{2, 0}, {0, 2}}, Matrix::identity(2));
    CHECK(x == Matrix{{0.5, 0.0}, {0.0, 0.5}});

    // well-conditioned 5x5: residual is the oracle
    Matrix a = random_matrix(5, 5, rng);
    for (std::size_t i = 0; i < 5; ++i) a(i, i) += 5.0;
    const Matrix rhs = random_matrix(5, 3, rng);
    const Matrix sol = solve_linear(a, rhs);
    CHECK(max_abs_diff(matmul(a, sol), rhs) <= 1e-10);
}

TEST_CASE("pivoting handles a zero leading entry") {
    const Matrix a{{0, 1}, {1, 0}};
    const Matrix x = solve_linear(a, Matrix{{2}, {3}});
    CHECK(x == Matrix{{3}, {2}});
}

TEST_CASE("singular systems report the pivot") {
    try {
        (void)solve_linear(Matrix{{1, 2}, {2, 4}}, Matrix::identity(2));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_system);
        CHECK(e.index() == 1);
    }
    try {
        (void)LuFactorization(Matrix(3, 3));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_system);
        CHECK(e.index() == 0);
    }
}

TEST_CASE("property: solve residual on SPD-shifted matrices") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 12));
        const Matrix g = random_matrix(n, n, rng);
        // GᵀG + shift·I is SPD with condition number bounded by (λmax + s)/s.
        Matrix a = matmul(transpose(g), g);
        const double shift = std::pow(10.0, rng.uniform(-2, 1));
        for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
        const Matrix b = random_matrix(n, 2, rng, -10, 10);
        const Matrix x = solve_linear(a, b);
        const double bound = 1e-10 * std::max(1.0, max_abs(b.span()));
        CHECK(max_abs_diff(matmul(a, x), b) <= bound);

        const LuFactorization lu(a);
        Vector col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, 0);
        const Vector xt = lu.solve_transposed(col);
        const Vector back = matvec_transposed(a, xt);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - col[i]) <= bound);
    }
}

TEST_CASE("sigmoid examples") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(std::abs(sigmoid(1000.0) - 1.0) <= 1e-15);
    CHECK(sigmoid(-1000.0) >= 0.0);
    CHECK(std::isfinite(sigmoid(-1000.0)));
    CHECK(std::abs(sigmoid(1.0) - 0.7310585786) <= 1e-10);
    CHECK(std::abs(sigmoid(1.0) - 1.0 / (1.0 + std::exp(-1.0))) <= 1e-16);
}

TEST_CASE("sigmoid_prime_from_output examples") {
    CHECK(sigmoid_prime_from_output(Vector{0.5})[0] == 0.25);
    CHECK(sigmoid_prime_from_output(Vector{1.0 - 1e-12})[0] < 1e-11);
    CHECK(std::abs(sigmoid_prime_from_output(Vector{0.7310585786})[0] - 0.1966119332) <= 1e-10);
    const double h = 1e-5;
    const double fd = (sigmoid(1.0 + h) - sigmoid(1.0 - h)) / (2 * h);
    CHECK(std::abs(fd - 0.1966119332) <= 1e-9);
}

TEST_CASE("property: sigmoid is monotone and its derivative matches finite differences") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform(-40, 40);
        const double b = rng.uniform(-40, 40);
        if (a < b) CHECK(sigmoid(a) <= sigmoid(b));
        if (std::abs(a - b) > 1e-9 && std::max(std::abs(a), std::abs(b)) < 30) {
            CHECK((a < b) == (sigmoid(a) < sigmoid(b)));
        }
    }
    for (double x = -10.0; x <= 10.0; x += 0.125) {
        const double h = 1e-5;
        const double fd = (sigmoid(x + h) - sigmoid(x - h)) / (2 * h);
        const double an = sigmoid_prime_from_output(Vector{sigmoid(x)})[0];
        CHECK(std::abs(fd - an) <= 1e-6);
        CHECK(an > 0.0);
        CHECK(an <= 0.25);
    }
}

TEST_CASE("rng determinism and statistics") {
    Rng a(42), b(42);
    CHECK(a.next_unit() == b.next_unit());
    CHECK(a.next_unit() == b.next_unit());

    Rng c(7), d(7);
    bool same = true;
    for (int i = 0; i < 10000; ++i) same = same && c.uniform(-3, 5) == d.uniform(-3, 5);
    CHECK(same);

    Rng u(1);
    double sum = 0.0;
    bool in_range = true;
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform(-0.5, 0.5);
        in_range = in_range && v >= -0.5 && v < 0.5;
        sum += v;
    }
    CHECK(in_range);
    CHECK(std::abs(sum / 100000) <= 0.01);

    Rng n(2);
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double v = n.normal(0.0, 2.0);
        s1 += v;
        s2 += v * v;
    }
    const double mean = s1 / 100000;
    const double sd = std::sqrt(s2 / 100000 - mean * mean);
    CHECK(std::abs(sd - 2.0) <= 0.05);
    CHECK(std::abs(mean) <= 0.05);
}

TEST_CASE("rng rejects invalid ranges") {
    Rng r(0);
    CHECK_THROWS_AS((void)r.uniform(1.0, 1.0), Error);
    CHECK_THROWS_AS((void)r.uniform(2.0, 1.0), Error);
    CHECK_THROWS_AS((void)r.normal(0.0, 0.0), Error);
}

TEST_CASE("finiteness helpers") {
    CHECK(all_finite(Vector{1, 2}.span()));
    CHECK_FALSE(all_finite(Vector{1, NAN}.span()));
    CHECK_FALSE(all_finite(Vector{INFINITY}.span()));
    CHECK(norm2(Vector{3, 4}.span()) == 5.0);
    CHECK(max_abs(Vector{-7, 4}.span()) == 7.0);
}
