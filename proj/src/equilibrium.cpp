#include "irnn/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace irnn {

namespace {

constexpr double divergence_growth = 1e6;

void require_input(std::size_t expected, const Vector& x) {
    if (x.size() != expected) {
        throw Error(ErrorCode::dimension_mismatch,
                    "input has length " + std::to_string(x.size()) + ", network expects " +
                        std::to_string(expected));
    }
}

// out = drive + A·y for a row-major block A restricted to columns [0, y.size()).
inline double row_dot(const Matrix& a, std::size_t i, const double* y) {
    const auto r = a.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * y[k];
    return acc;
}

// dY/dt for Y = f(drive + W·Y); drive = Q·x + T is constant during relaxation.
struct OneLayerField {
    const Matrix& w;
    Vector drive;

    void operator()(const double* y, double* out) const {
        const std::size_t n = drive.size();
        for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid(drive[i] + row_dot(w, i, y)) - y[i];
    }
};

// Stacked state s = [Y^l2 (n_h); Y^l1 (n_out)].
struct TwoLayerField {
    const TwoLayerParams& p;
    Vector drive_l2;  // Q_l2·x + T_l2

    void operator()(const double* s, double* out) const {
        const std::size_t nh = p.n_hidden();
        const std::size_t no = p.n_out();
        const double* hidden = s;
        const double* output = s + nh;
        for (std::size_t i = 0; i < nh; ++i) {
            const double pre = drive_l2[i] + row_dot(p.w_l2, i, hidden) + row_dot(p.r, i, output);
            out[i] = sigmoid(pre) - hidden[i];
        }
        for (std::size_t i = 0; i < no; ++i) {
            const double pre = p.t_l1[i] + row_dot(p.q_l1, i, hidden) + row_dot(p.w_l1, i, output);
            out[nh + i] = sigmoid(pre) - output[i];
        }
    }
};

struct Relaxed {
    Vector state;
    double residual = 0.0;
    std::size_t iterations = 0;
};

template <class Field>
Relaxed integrate(const Field& field, std::size_t n, const SolverConfig& cfg) {
    std::vector<double> y(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double h = cfg.step_size;
    const std::size_t limit = std::max(cfg.iterations, cfg.max_iterations);

    // k1 = f(y) doubles as the residual of the current state.
    field(y.data(), k1.data());
    const double initial = norm2(k1);
    double residual = initial;

    std::size_t it = 0;
    for (; it < limit; ++it) {
        if (it >= cfg.iterations && residual <= cfg.tolerance) break;
        if (cfg.method == Integrator::euler) {
            for (std::size_t i = 0; i < n; ++i) y[i] += h * k1[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            field(tmp.data(), k2.data());
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            field(tmp.data(), k3.data());
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
            field(tmp.data(), k4.data());
            for (std::size_t i = 0; i < n; ++i) {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        if (!all_finite(y)) {
            throw Error(ErrorCode::diverged,
                        "relaxation diverged: non-finite state at iteration " + std::to_string(it),
                        it);
        }
        field(y.data(), k1.data());
        residual = norm2(k1);
        if (!std::isfinite(residual) || residual > divergence_growth * std::max(initial, 1e-300)) {
            throw Error(ErrorCode::diverged,
                        "relaxation diverged: residual grew from " + std::to_string(initial) +
                            " to " + std::to_string(residual) + " at iteration " +
                            std::to_string(it),
                        it);
        }
    }
    return {Vector(std::move(y)), residual, it};
}

}  // namespace

void SolverConfig::validate() const {
    if (iterations < 1) throw Error(ErrorCode::invalid_argument, "solver iterations must be >= 1");
    if (!(step_size > 0.0 && step_size <= 1.0)) {
        throw Error(ErrorCode::invalid_argument,
                    "solver step size must lie in (0, 1], got " + std::to_string(step_size));
    }
    if (!(tolerance > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "solver tolerance must be positive");
    }
    if (max_iterations != 0 && max_iterations < iterations) {
        throw Error(ErrorCode::invalid_argument, "max_iterations must be 0 or >= iterations");
    }
}

Vector relaxation_rhs_one_layer(const OneLayerParams& params, const Vector& x, const Vector& y) {
    require_input(params.n_in(), x);
    if (y.size() != params.n_out()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "state has length " + std::to_string(y.size()) + ", layer has " +
                        std::to_string(params.n_out()) + " neurons");
    }
    const Vector pre = add(add(matvec(params.q, x), matvec(params.w, y)), params.t);
    return subtract(sigmoid(pre), y);
}

Vector relaxation_rhs_two_layer(const TwoLayerParams& params, const Vector& x,
                                const Vector& hidden, const Vector& output) {
    require_input(params.n_in(), x);
    const Vector pre2 = add(add(add(matvec(params.q_l2, x), matvec(params.w_l2, hidden)),
                                matvec(params.r, output)),
                            params.t_l2);
    const Vector pre1 =
        add(add(matvec(params.q_l1, hidden), matvec(params.w_l1, output)), params.t_l1);
    const Vector d2 = subtract(sigmoid(pre2), hidden);
    const Vector d1 = subtract(sigmoid(pre1), output);
    Vector stacked(d2.size() + d1.size());
    for (std::size_t i = 0; i < d2.size(); ++i) stacked[i] = d2[i];
    for (std::size_t i = 0; i < d1.size(); ++i) stacked[d2.size() + i] = d1[i];
    return stacked;
}

Equilibrium solve_one_layer(const OneLayerParams& params, const Vector& x,
                            const SolverConfig& cfg) {
    cfg.validate();
    require_input(params.n_in(), x);
    const OneLayerField field{params.w, add(matvec(params.q, x), params.t)};
    auto relaxed = integrate(field, params.n_out(), cfg);
    Equilibrium eq;
    eq.output = std::move(relaxed.state);
    eq.residual_norm = relaxed.residual;
    eq.iterations = relaxed.iterations;
    eq.converged = eq.residual_norm <= cfg.tolerance;
    return eq;
}

Equilibrium solve_two_layer(const TwoLayerParams& params, const Vector& x,
                            const SolverConfig& cfg) {
    cfg.validate();
    require_input(params.n_in(), x);
    const TwoLayerField field{params, add(matvec(params.q_l2, x), params.t_l2)};
    const std::size_t nh = params.n_hidden();
    const std::size_t no = params.n_out();
    const auto relaxed = integrate(field, nh + no, cfg);
    const Vector& state = relaxed.state;
    Equilibrium eq;
    eq.residual_norm = relaxed.residual;
    eq.iterations = relaxed.iterations;
    eq.hidden = Vector(nh);
    eq.output = Vector(no);
    for (std::size_t i = 0; i < nh; ++i) eq.hidden[i] = state[i];
    for (std::size_t i = 0; i < no; ++i) eq.output[i] = state[nh + i];
    eq.converged = eq.residual_norm <= cfg.tolerance;
    return eq;
}

Equilibrium euler_iterate(const OneLayerParams& params, const Vector& x, double h,
                          std::size_t steps, double tolerance) {
    SolverConfig cfg;
    cfg.method = Integrator::euler;
    cfg.step_size = h;
    cfg.iterations = steps;
    cfg.tolerance = tolerance;
    return solve_one_layer(params, x, cfg);
}

}  // namespace irnn
