#include "irnn/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace irnn {

namespace {

std::size_t supervised_count(std::size_t n, const OutputMask& mask) {
    if (mask.empty()) return n;
    if (mask.size() != n) {
        throw Error(ErrorCode::dimension_mismatch,
                    "mask has " + std::to_string(mask.size()) + " entries, output has " +
                        std::to_string(n));
    }
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

void require_len(const char* what, const Vector& v, std::size_t n) {
    if (v.size() != n) {
        throw Error(ErrorCode::dimension_mismatch,
                    std::string(what) + " has length " + std::to_string(v.size()) +
                        ", expected " + std::to_string(n));
    }
}

/// 1 − diag(d)·a
Matrix identity_minus_scaled(const Vector& d, const Matrix& a) {
    Matrix m = scale_rows(d, a);
    for (double& v : m.span()) v = -v;
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
    return m;
}

LuFactorization factor(const Matrix& a, const char* which) {
    try {
        return LuFactorization(a);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::singular_system) throw;
        throw Error(ErrorCode::singular_system,
                    std::string("non-invertible sensitivity (") + which + " system): " + e.what(),
                    e.index());
    }
}

Vector two_layer_output_adjoint(const LuFactorization& outer, const Vector& d1,
                                const Vector& dl_dy) {
    return hadamard(d1, outer.solve_transposed(dl_dy));
}

void require_equilibrium_one_layer(const OneLayerParams& params, const Vector& x,
                                   const Equilibrium& eq) {
    require_len("input", x, params.n_in());
    require_len("equilibrium", eq.output, params.n_out());
}

void require_equilibrium_two_layer(const TwoLayerParams& params, const Vector& x,
                                   const Equilibrium& eq) {
    require_len("input", x, params.n_in());
    require_len("output equilibrium", eq.output, params.n_out());
    require_len("hidden equilibrium", eq.hidden, params.n_hidden());
}

}  // namespace

double masked_mse(const Vector& y, const Vector& target, const OutputMask& mask) {
    require_len("target", target, y.size());
    const std::size_t n = supervised_count(y.size(), mask);
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        const double e = y[i] - target[i];
        acc += e * e;
    }
    return acc / static_cast<double>(n);
}

Vector masked_mse_gradient(const Vector& y, const Vector& target, const OutputMask& mask) {
    require_len("target", target, y.size());
    const std::size_t n = supervised_count(y.size(), mask);
    Vector g(y.size());
    if (n == 0) return g;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        g[i] = 2.0 * (y[i] - target[i]) / static_cast<double>(n);
    }
    return g;
}

Matrix sensitivity_one_layer(const OneLayerParams& params, const Equilibrium& eq) {
    require_len("equilibrium", eq.output, params.n_out());
    const Vector d = sigmoid_prime_from_output(eq.output);
    const auto lu = factor(identity_minus_scaled(d, params.w), "one-layer");
    return lu.solve(Matrix::diagonal(d.span()));
}

OneLayerGrads loss_grads_one_layer(const OneLayerParams& params, const Vector& x,
                                   const Equilibrium& eq, const Vector& dl_dy) {
    require_equilibrium_one_layer(params, x, eq);
    require_len("dL/dY", dl_dy, params.n_out());
    const Vector d = sigmoid_prime_from_output(eq.output);
    const auto lu = factor(identity_minus_scaled(d, params.w), "one-layer");
    // Mᵀ·v = D·(1 − D·W)⁻ᵀ·v
    const Vector g = hadamard(d, lu.solve_transposed(dl_dy));
    return OneLayerGrads{outer(g, x), outer(g, eq.output), g};
}

Matrix two_layer_s_matrix(const TwoLayerParams& params, const Equilibrium& eq) {
    const Vector d1 = sigmoid_prime_from_output(eq.output);
    const Vector d2 = sigmoid_prime_from_output(eq.hidden);
    const auto inner = factor(identity_minus_scaled(d2, params.w_l2), "inner");
    const Matrix coupling = inner.solve(scale_rows(d2, params.r));  // (1 − D2·W2)⁻¹·D2·R
    const Matrix a1 =
        subtract(identity_minus_scaled(d1, params.w_l1), scale_rows(d1, matmul(params.q_l1, coupling)));
    return factor(a1, "outer").solve(Matrix::identity(params.n_out()));
}

TwoLayerGrads loss_grads_two_layer(const TwoLayerParams& params, const Vector& x,
                                   const Equilibrium& eq, const Vector& dl_dy) {
    require_equilibrium_two_layer(params, x, eq);
    require_len("dL/dY", dl_dy, params.n_out());
    const Vector d1 = sigmoid_prime_from_output(eq.output);
    const Vector d2 = sigmoid_prime_from_output(eq.hidden);

    const auto inner = factor(identity_minus_scaled(d2, params.w_l2), "inner");
    const Matrix coupling = inner.solve(scale_rows(d2, params.r));
    const Matrix a1 = subtract(identity_minus_scaled(d1, params.w_l1),
                               scale_rows(d1, matmul(params.q_l1, coupling)));
    const auto outer_lu = factor(a1, "outer");

    // Output-layer adjoint (S·D1)ᵀ·dL, then through Q_l1 into the hidden layer.
    const Vector g1 = two_layer_output_adjoint(outer_lu, d1, dl_dy);
    const Vector g2 = hadamard(d2, inner.solve_transposed(matvec_transposed(params.q_l1, g1)));

    TwoLayerGrads grads;
    grads.q_l1 = outer(g1, eq.hidden);
    grads.w_l1 = outer(g1, eq.output);
    grads.t_l1 = g1;
    grads.q_l2 = outer(g2, x);
    grads.w_l2 = outer(g2, eq.hidden);
    grads.r = outer(g2, eq.output);
    grads.t_l2 = g2;
    return grads;
}

FeedForwardGrads loss_grads_feedforward(const FeedForwardParams& params, const Vector& x,
                                        const FeedForwardActivations& acts,
                                        const Vector& dl_dy) {
    require_len("input", x, params.n_in());
    require_len("dL/dY", dl_dy, params.n_out());
    const Vector g1 = hadamard(sigmoid_prime_from_output(acts.output), dl_dy);
    const Vector g2 =
        hadamard(sigmoid_prime_from_output(acts.hidden), matvec_transposed(params.q_l1, g1));
    return FeedForwardGrads{outer(g2, x), g2, outer(g1, acts.hidden), g1};
}

OneLayerJacobians jacobians_one_layer(const OneLayerParams& params, const Vector& x,
                                      const Equilibrium& eq) {
    require_equilibrium_one_layer(params, x, eq);
    const std::size_t n = params.n_out();
    const std::size_t n_in = params.n_in();
    const Matrix m = sensitivity_one_layer(params, eq);

    OneLayerJacobians jac;
    jac.n_out = n;
    jac.n_in = n_in;
    jac.j_w.assign(n * n * n, 0.0);
    jac.j_q.assign(n * n * n_in, 0.0);
    // (M·δ_Y)_ijm = Σ_k M_ik δ_kj Y_m = M_ij Y_m
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) jac.j_w[(i * n + j) * n + k] = m(i, j) * eq.output[k];
            for (std::size_t k = 0; k < n_in; ++k) jac.j_q[(i * n + j) * n_in + k] = m(i, j) * x[k];
        }
    }
    jac.j_t = m;
    return jac;
}

OneLayerGrads contract(const OneLayerJacobians& jac, const Vector& dl_dy) {
    const std::size_t n = jac.n_out;
    const std::size_t n_in = jac.n_in;
    require_len("dL/dY", dl_dy, n);
    OneLayerGrads g{Matrix(n, n_in), Matrix(n, n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double li = dl_dy[i];
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) g.w(j, k) += li * jac.j_w[(i * n + j) * n + k];
            for (std::size_t k = 0; k < n_in; ++k) g.q(j, k) += li * jac.j_q[(i * n + j) * n_in + k];
            g.t[j] += li * jac.j_t(i, j);
        }
    }
    return g;
}

OneLayerGrads semi_grads_one_layer(const OneLayerParams& params, const Vector& x,
                                   const Equilibrium& eq, const Vector& dl_dy) {
    require_equilibrium_one_layer(params, x, eq);
    require_len("dL/dY", dl_dy, params.n_out());
    const Vector g = hadamard(sigmoid_prime_from_output(eq.output), dl_dy);
    return OneLayerGrads{outer(g, x), outer(g, eq.output), g};
}

TwoLayerGrads semi_grads_two_layer(const TwoLayerParams& params, const Vector& x,
                                   const Equilibrium& eq, const Vector& dl_dy) {
    require_equilibrium_two_layer(params, x, eq);
    require_len("dL/dY", dl_dy, params.n_out());
    const Vector g1 = hadamard(sigmoid_prime_from_output(eq.output), dl_dy);
    const Vector g2 =
        hadamard(sigmoid_prime_from_output(eq.hidden), matvec_transposed(params.q_l1, g1));

    TwoLayerGrads grads;
    grads.q_l1 = outer(g1, eq.hidden);
    grads.w_l1 = outer(g1, eq.output);
    grads.t_l1 = g1;
    grads.q_l2 = outer(g2, x);
    grads.w_l2 = outer(g2, eq.hidden);
    grads.r = outer(g2, eq.output);
    grads.t_l2 = g2;
    return grads;
}

Model finite_diff_grads(const Model& model, const Vector& x, const OutputLoss& loss,
                        double step, const SolverConfig& cfg) {
    if (!(step > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
    }
    Model probe = model;
    Model grads = zeros_like(model);

    auto evaluate = [&](std::size_t param_index) {
        const Equilibrium eq = forward(probe, x, cfg);
        if (!eq.converged) {
            throw Error(ErrorCode::not_converged,
                        "equilibrium did not converge under perturbation of parameter " +
                            std::to_string(param_index) + " (residual " +
                            std::to_string(eq.residual_norm) + ")",
                        param_index);
        }
        return loss(eq.output);
    };

    std::vector<std::span<double>> probe_blocks;
    std::vector<std::span<double>> grad_blocks;
    for_each_block(probe, [&](auto, auto, auto, std::span<double> v) { probe_blocks.push_back(v); });
    for_each_block(grads, [&](auto, auto, auto, std::span<double> v) { grad_blocks.push_back(v); });

    std::size_t index = 0;
    for (std::size_t b = 0; b < probe_blocks.size(); ++b) {
        for (std::size_t k = 0; k < probe_blocks[b].size(); ++k, ++index) {
            double& theta = probe_blocks[b][k];
            const double saved = theta;
            theta = saved + step;
            const double up = evaluate(index);
            theta = saved - step;
            const double down = evaluate(index);
            theta = saved;
            grad_blocks[b][k] = (up - down) / (2.0 * step);
        }
    }
    return grads;
}

OneLayerGrads unrolled_grads(const OneLayerParams& params, const Vector& x, const Vector& dl_dy,
                             std::size_t n_steps) {
    validate(params);
    require_len("input", x, params.n_in());
    require_len("dL/dY", dl_dy, params.n_out());
    if (n_steps < 1) throw Error(ErrorCode::invalid_argument, "unrolled chain needs >= 1 step");

    const std::size_t n = params.n_out();
    const std::size_t n_in = params.n_in();
    const Vector drive = add(matvec(params.q, x), params.t);

    // Forward-mode tensors at the current step, indexed [i][j][m] as in the
    // materialized Jacobians.
    std::vector<double> jw(n * n * n, 0.0), jq(n * n * n_in, 0.0), jt(n * n, 0.0);
    std::vector<double> jw_next(jw.size()), jq_next(jq.size()), jt_next(jt.size());

    Vector y(n, 0.0);
    double last_update = 0.0;
    for (std::size_t step = 0; step < n_steps; ++step) {
        const Vector y_next = sigmoid(add(drive, matvec(params.w, y)));
        if (!all_finite(y_next.span())) {
            throw Error(ErrorCode::diverged,
                        "iterative update diverged at step " + std::to_string(step), step);
        }
        const Vector d = sigmoid_prime_from_output(y_next);

        for (std::size_t i = 0; i < n; ++i) {
            const auto w_row = params.w.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t m = 0; m < n; ++m) {
                    double acc = (i == j) ? y[m] : 0.0;
                    for (std::size_t k = 0; k < n; ++k) acc += w_row[k] * jw[(k * n + j) * n + m];
                    jw_next[(i * n + j) * n + m] = d[i] * acc;
                }
                for (std::size_t m = 0; m < n_in; ++m) {
                    double acc = (i == j) ? x[m] : 0.0;
                    for (std::size_t k = 0; k < n; ++k) acc += w_row[k] * jq[(k * n + j) * n_in + m];
                    jq_next[(i * n + j) * n_in + m] = d[i] * acc;
                }
                double acc = (i == j) ? 1.0 : 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += w_row[k] * jt[k * n + j];
                jt_next[i * n + j] = d[i] * acc;
            }
        }
        jw.swap(jw_next);
        jq.swap(jq_next);
        jt.swap(jt_next);
        last_update = max_abs(subtract(y_next, y).span());
        y = y_next;
    }

    if (n_steps >= 10 && last_update > 1e-8) {
        throw Error(ErrorCode::not_converged,
                    "iterative updates did not settle after " + std::to_string(n_steps) +
                        " steps (last update " + std::to_string(last_update) + ")",
                    n_steps);
    }

    OneLayerGrads g{Matrix(n, n_in), Matrix(n, n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double li = dl_dy[i];
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t m = 0; m < n; ++m) g.w(j, m) += li * jw[(i * n + j) * n + m];
            for (std::size_t m = 0; m < n_in; ++m) g.q(j, m) += li * jq[(i * n + j) * n_in + m];
            g.t[j] += li * jt[i * n + j];
        }
    }
    return g;
}

double spectral_radius_estimate(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw Error(ErrorCode::dimension_mismatch, "spectral radius needs a square matrix");
    }
    const std::size_t n = a.rows();
    if (n == 0) return 0.0;
    // Fixed irregular start vector, unlikely to be orthogonal to the dominant eigenvector.
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * static_cast<double>(i % 7) - 0.11 * static_cast<double>(i % 3);
    double nv = norm2(v.span());
    for (double& e : v) e /= nv;

    constexpr int iterations = 100;
    constexpr int burn_in = 50;
    double log_growth = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = matvec(a, v);
        const double growth = norm2(w.span());
        if (growth == 0.0) return 0.0;
        if (it >= burn_in) log_growth += std::log(growth);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / growth;
    }
    return std::exp(log_growth / (iterations - burn_in));
}

Matrix neumann_inverse(const Vector& d, const Matrix& w, std::size_t k_max) {
    const Matrix a = scale_rows(d, w);
    const double rho = spectral_radius_estimate(a);
    if (!(rho < 1.0)) {
        throw Error(ErrorCode::invalid_argument,
                    "Neumann series does not converge: spectral radius estimate " +
                        std::to_string(rho));
    }
    Matrix sum = Matrix::identity(a.rows());
    Matrix term = Matrix::identity(a.rows());
    for (std::size_t k = 1; k <= k_max; ++k) {
        term = matmul(term, a);
        auto s = sum.span();
        auto t = term.span();
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += t[i];
    }
    return sum;
}

std::vector<BlockError> relative_errors(const Model& a, const Model& b, double floor) {
    if (a.index() != b.index()) {
        throw Error(ErrorCode::invalid_argument, "relative_errors: different architectures");
    }
    std::vector<std::pair<std::string, std::span<const double>>> blocks_a;
    for_each_block(a, [&](std::string_view name, auto, auto, std::span<const double> v) {
        blocks_a.emplace_back(std::string(name), v);
    });
    std::vector<BlockError> out;
    std::size_t idx = 0;
    for_each_block(b, [&](std::string_view, auto, auto, std::span<const double> vb) {
        const auto& [name, va] = blocks_a[idx++];
        if (va.size() != vb.size()) {
            throw Error(ErrorCode::dimension_mismatch, "relative_errors: block " + name + " differs in size");
        }
        BlockError e{name, 0.0};
        for (std::size_t k = 0; k < va.size(); ++k) {
            const double scale = std::max(std::abs(va[k]), std::abs(vb[k]));
            if (scale < floor) continue;
            e.max_rel_error = std::max(e.max_rel_error, std::abs(va[k] - vb[k]) / scale);
        }
        out.push_back(std::move(e));
    });
    return out;
}

}  // namespace irnn
