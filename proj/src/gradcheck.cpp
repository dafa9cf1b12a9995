#include "irnn/gradcheck.hpp"

#include <algorithm>

#include "irnn/networks.hpp"

namespace irnn {

namespace {

void fill_uniform(std::span<double> v, double range, Rng& rng) {
    for (double& x : v) x = rng.uniform(-range, range);
}

}  // namespace

SolverConfig oracle_solver() {
    SolverConfig cfg;
    cfg.iterations = 400;
    cfg.tolerance = 1e-12;
    return cfg;
}

Model random_recurrent_model(const ArchDescriptor& arch, double recurrent_range, Rng& rng) {
    Model model = init_model(arch, rng);
    if (auto* p = std::get_if<OneLayerParams>(&model)) {
        fill_uniform(p->w.span(), recurrent_range, rng);
    } else if (auto* p = std::get_if<TwoLayerParams>(&model)) {
        fill_uniform(p->w_l2.span(), recurrent_range, rng);
        fill_uniform(p->r.span(), recurrent_range, rng);
        fill_uniform(p->w_l1.span(), recurrent_range, rng);
    }
    return model;
}

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
    if (o.arch == TrainArch::feedforward) {
        throw Error(ErrorCode::invalid_argument, "gradcheck covers implicit architectures only");
    }
    if (!(o.step > 0.0) || !(o.tol > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "gradcheck step and tolerance must be positive");
    }
    Rng rng(o.seed);
    const ArchDescriptor arch{model_architecture(o.arch), o.n_in, o.n_hidden, o.n_out};
    const Model model = random_recurrent_model(arch, o.recurrent_range, rng);
    Vector x(o.n_in);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Vector target(o.n_out);
    for (double& v : target) v = rng.uniform(0.1, 0.9);

    const SolverConfig cfg = oracle_solver();
    const Equilibrium eq = forward(model, x, cfg);
    if (!eq.converged) {
        throw Error(ErrorCode::not_converged,
                    "gradcheck network did not reach equilibrium (residual " +
                        std::to_string(eq.residual_norm) + ")");
    }

    const SampleGradient analytic =
        sample_gradient(model, gradient_mode(o.arch), Example{x, target}, {}, cfg);
    const auto loss = [&](const Vector& y) { return masked_mse(y, target); };
    const Model fd = finite_diff_grads(model, x, loss, o.step, cfg);

    GradcheckReport report;
    report.blocks = relative_errors(analytic.grads, fd);
    report.passed = std::all_of(report.blocks.begin(), report.blocks.end(),
                                [&](const BlockError& e) { return e.max_rel_error <= o.tol; });

    if (const auto* p = std::get_if<OneLayerParams>(&model)) {
        const Vector d = sigmoid_prime_from_output(eq.output);
        const double rho = spectral_radius_estimate(scale_rows(d, p->w));
        report.spectral_radius = rho;
        if (rho < 0.9) {
            const Vector dl_dy = masked_mse_gradient(eq.output, target);
            const Model unrolled = unrolled_grads(*p, x, dl_dy, 500);
            double worst = 0.0;
            for (const auto& e : relative_errors(analytic.grads, unrolled)) {
                worst = std::max(worst, e.max_rel_error);
            }
            report.unrolled_max_rel_error = worst;
            report.passed = report.passed && worst <= o.tol;
        }
    }
    return report;
}

}  // namespace irnn
