#include "irnn/irnn.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "irnn/gradcheck.hpp"
#include "irnn/networks.hpp"
#include "irnn/training.hpp"

struct irnn_model {
    irnn::Model model;
};

struct irnn_dataset {
    irnn::PendulumDataset data;
};

struct irnn_experiment {
    irnn::ExperimentResult result;
};

namespace {

thread_local std::string last_error;
thread_local std::int64_t last_index = -1;

irnn_status fail(irnn_status status, std::string message, std::int64_t index = -1) {
    last_error = std::move(message);
    last_index = index;
    return status;
}

irnn_status to_status(irnn::ErrorCode code) {
    using irnn::ErrorCode;
    switch (code) {
        case ErrorCode::invalid_argument: return IRNN_ERR_INVALID_ARGUMENT;
        case ErrorCode::dimension_mismatch: return IRNN_ERR_DIMENSION_MISMATCH;
        case ErrorCode::singular_system: return IRNN_ERR_SINGULAR;
        case ErrorCode::not_converged: return IRNN_ERR_NOT_CONVERGED;
        case ErrorCode::diverged: return IRNN_ERR_DIVERGED;
        case ErrorCode::io: return IRNN_ERR_IO;
        case ErrorCode::parse: return IRNN_ERR_PARSE;
        case ErrorCode::unsupported_version: return IRNN_ERR_UNSUPPORTED_VERSION;
    }
    return IRNN_ERR_INTERNAL;
}

template <class F>
irnn_status guarded(F&& body) {
    try {
        body();
        return IRNN_OK;
    } catch (const irnn::Error& e) {
        return fail(to_status(e.code()), e.what(),
                    e.has_index() ? static_cast<std::int64_t>(e.index()) : -1);
    } catch (const std::bad_alloc&) {
        return fail(IRNN_ERR_OUT_OF_MEMORY, "out of memory");
    } catch (const std::exception& e) {
        return fail(IRNN_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(IRNN_ERR_INTERNAL, "unknown exception");
    }
}

irnn_status null_argument(const char* name) {
    return fail(IRNN_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

irnn::Architecture to_arch(irnn_arch a) {
    switch (a) {
        case IRNN_ARCH_ONE_LAYER: return irnn::Architecture::one_layer;
        case IRNN_ARCH_TWO_LAYER: return irnn::Architecture::two_layer;
        case IRNN_ARCH_FEEDFORWARD: return irnn::Architecture::feedforward;
    }
    throw irnn::Error(irnn::ErrorCode::invalid_argument, "unknown architecture");
}

irnn_arch from_arch(irnn::Architecture a) {
    switch (a) {
        case irnn::Architecture::one_layer: return IRNN_ARCH_ONE_LAYER;
        case irnn::Architecture::two_layer: return IRNN_ARCH_TWO_LAYER;
        case irnn::Architecture::feedforward: return IRNN_ARCH_FEEDFORWARD;
    }
    return IRNN_ARCH_ONE_LAYER;
}

irnn::TrainArch to_train_arch(irnn_train_arch a) {
    switch (a) {
        case IRNN_TRAIN_ONE_LAYER_EXACT: return irnn::TrainArch::one_layer_exact;
        case IRNN_TRAIN_ONE_LAYER_SEMI: return irnn::TrainArch::one_layer_semi;
        case IRNN_TRAIN_TWO_LAYER_EXACT: return irnn::TrainArch::two_layer_exact;
        case IRNN_TRAIN_TWO_LAYER_SEMI: return irnn::TrainArch::two_layer_semi;
        case IRNN_TRAIN_FEEDFORWARD: return irnn::TrainArch::feedforward;
    }
    throw irnn::Error(irnn::ErrorCode::invalid_argument, "unknown training architecture");
}

irnn::SolverConfig to_solver(const irnn_solver_options& o) {
    irnn::SolverConfig cfg;
    switch (o.method) {
        case IRNN_RK4: cfg.method = irnn::Integrator::rk4; break;
        case IRNN_EULER: cfg.method = irnn::Integrator::euler; break;
        default: throw irnn::Error(irnn::ErrorCode::invalid_argument, "unknown integrator");
    }
    cfg.iterations = o.iterations;
    cfg.step_size = o.step_size;
    cfg.tolerance = o.tolerance;
    cfg.max_iterations = o.max_iterations;
    cfg.validate();
    return cfg;
}

irnn::TrainConfig to_train_config(const irnn_train_options& o) {
    irnn::TrainConfig c;
    c.arch = to_train_arch(o.arch);
    c.n_hidden = o.n_hidden;
    c.epochs = o.epochs;
    c.steps_per_epoch = o.steps_per_epoch;
    c.n_batches = o.n_batches;
    c.batch_size = o.batch_size;
    c.eval_every = o.eval_every;
    c.lr = o.lr;
    c.seed = o.seed;
    c.solver = to_solver(o.solver);
    c.skip_unconverged = o.skip_unconverged != 0;
    if (o.runs < 1) throw irnn::Error(irnn::ErrorCode::invalid_argument, "runs must be >= 1");
    if (o.jobs < 1) throw irnn::Error(irnn::ErrorCode::invalid_argument, "jobs must be >= 1");
    c.validate();
    return c;
}

template <class Write>
void write_file(const char* path, Write&& write) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw irnn::Error(irnn::ErrorCode::io, std::string("cannot open ") + path);
    write(out);
    out.flush();
    if (!out) throw irnn::Error(irnn::ErrorCode::io, std::string("write failed: ") + path);
}

void check_run(const irnn_experiment* e, std::size_t run) {
    if (run >= e->result.final_models.size()) {
        throw irnn::Error(irnn::ErrorCode::invalid_argument,
                          "run " + std::to_string(run) + " out of range", run);
    }
}

}  // namespace

extern "C" {

const char* irnn_version(void) { return "1.0.0"; }

const char* irnn_status_name(irnn_status status) {
    switch (status) {
        case IRNN_OK: return "ok";
        case IRNN_ERR_INVALID_ARGUMENT: return "invalid argument";
        case IRNN_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
        case IRNN_ERR_SINGULAR: return "singular system";
        case IRNN_ERR_NOT_CONVERGED: return "not converged";
        case IRNN_ERR_DIVERGED: return "diverged";
        case IRNN_ERR_IO: return "i/o error";
        case IRNN_ERR_PARSE: return "parse error";
        case IRNN_ERR_UNSUPPORTED_VERSION: return "unsupported version";
        case IRNN_ERR_OUT_OF_MEMORY: return "out of memory";
        case IRNN_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* irnn_last_error(void) { return last_error.c_str(); }

int64_t irnn_last_error_index(void) { return last_index; }

void irnn_solver_options_default(irnn_solver_options* options) {
    if (!options) return;
    const irnn::SolverConfig cfg;
    options->method = IRNN_RK4;
    options->iterations = cfg.iterations;
    options->step_size = cfg.step_size;
    options->tolerance = cfg.tolerance;
    options->max_iterations = cfg.max_iterations;
}

irnn_status irnn_model_create(irnn_arch arch, size_t n_in, size_t n_hidden, size_t n_out,
                              uint64_t seed, irnn_model** out) {
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const irnn::ArchDescriptor desc{to_arch(arch), n_in, n_hidden, n_out};
        (void)irnn::count_parameters(desc);  // rejects zero dimensions
        irnn::Rng rng(seed);
        *out = new irnn_model{irnn::init_model(desc, rng)};
    });
}

irnn_status irnn_model_load(const char* path, irnn_model** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new irnn_model{irnn::load_model(path)}; });
}

irnn_status irnn_model_save(const irnn_model* model, const char* path) {
    if (!model) return null_argument("model");
    if (!path) return null_argument("path");
    return guarded([&] { irnn::save_model(model->model, path); });
}

void irnn_model_free(irnn_model* model) { delete model; }

irnn_status irnn_model_describe(const irnn_model* model, irnn_arch* arch, size_t* n_in,
                                size_t* n_hidden, size_t* n_out, size_t* n_params) {
    if (!model) return null_argument("model");
    return guarded([&] {
        const irnn::ArchDescriptor d = irnn::describe(model->model);
        if (arch) *arch = from_arch(d.arch);
        if (n_in) *n_in = d.n_in;
        if (n_hidden) *n_hidden = d.arch == irnn::Architecture::one_layer ? 0 : d.n_hidden;
        if (n_out) *n_out = d.n_out;
        if (n_params) *n_params = irnn::count_parameters(model->model);
    });
}

irnn_status irnn_model_forward(const irnn_model* model, const double* x, size_t n_in,
                               const irnn_solver_options* options, double* y, size_t n_out,
                               double* residual, int* converged) {
    if (!model) return null_argument("model");
    if (!x) return null_argument("x");
    if (!y) return null_argument("y");
    return guarded([&] {
        irnn_solver_options o;
        irnn_solver_options_default(&o);
        const irnn::SolverConfig cfg = to_solver(options ? *options : o);
        const irnn::ArchDescriptor d = irnn::describe(model->model);
        if (n_out != d.n_out) {
            throw irnn::Error(irnn::ErrorCode::dimension_mismatch,
                              "output buffer has length " + std::to_string(n_out) +
                                  ", network has " + std::to_string(d.n_out) + " outputs");
        }
        irnn::Vector input(n_in);
        for (std::size_t i = 0; i < n_in; ++i) input[i] = x[i];
        const irnn::Equilibrium eq = irnn::forward(model->model, input, cfg);
        for (std::size_t i = 0; i < n_out; ++i) y[i] = eq.output[i];
        if (residual) *residual = eq.residual_norm;
        if (converged) *converged = eq.converged ? 1 : 0;
    });
}

irnn_status irnn_pendulum_generate(size_t n_samples, size_t length, uint64_t seed,
                                   irnn_dataset** out) {
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded(
        [&] { *out = new irnn_dataset{irnn::generate_pendulum_dataset(n_samples, length, seed)}; });
}

irnn_status irnn_dataset_load(const char* path, irnn_dataset** out) {
    if (!path) return null_argument("path");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new irnn_dataset{irnn::load_pendulum_dataset(path)}; });
}

irnn_status irnn_dataset_save(const irnn_dataset* data, const char* path) {
    if (!data) return null_argument("data");
    if (!path) return null_argument("path");
    return guarded([&] { irnn::save_pendulum_dataset(data->data, path); });
}

void irnn_dataset_free(irnn_dataset* data) { delete data; }

irnn_status irnn_dataset_describe(const irnn_dataset* data, size_t* n_train, size_t* n_test,
                                  size_t* length) {
    if (!data) return null_argument("data");
    if (n_train) *n_train = data->data.train.size();
    if (n_test) *n_test = data->data.test.size();
    if (length) *length = data->data.meta.length;
    return IRNN_OK;
}

irnn_status irnn_pendulum_evaluate(const irnn_model* model, const irnn_dataset* data,
                                   const irnn_solver_options* options, irnn_pendulum_eval* out) {
    if (!model) return null_argument("model");
    if (!data) return null_argument("data");
    if (!out) return null_argument("out");
    return guarded([&] {
        irnn_train_options defaults;
        irnn_train_options_default(&defaults);
        const irnn::SolverConfig cfg = to_solver(options ? *options : defaults.solver);
        const irnn::PendulumEvaluation ev =
            irnn::evaluate_pendulum(model->model, data->data.test, cfg);
        out->mse_normalized = ev.mse_normalized;
        out->mse_raw = ev.mse_raw;
        out->unconverged = ev.unconverged;
        out->n_samples = data->data.test.size();
    });
}

void irnn_gradcheck_options_default(irnn_gradcheck_options* options) {
    if (!options) return;
    const irnn::GradcheckOptions d;
    options->arch = IRNN_TRAIN_ONE_LAYER_EXACT;
    options->n_in = d.n_in;
    options->n_hidden = d.n_hidden;
    options->n_out = d.n_out;
    options->seed = d.seed;
    options->step = d.step;
    options->tol = d.tol;
}

irnn_status irnn_gradcheck(const irnn_gradcheck_options* options, irnn_gradcheck_report* report) {
    if (!options) return null_argument("options");
    if (!report) return null_argument("report");
    return guarded([&] {
        irnn::GradcheckOptions o;
        o.arch = to_train_arch(options->arch);
        o.n_in = options->n_in;
        o.n_hidden = options->n_hidden;
        o.n_out = options->n_out;
        o.seed = options->seed;
        o.step = options->step;
        o.tol = options->tol;
        const irnn::GradcheckReport r = irnn::run_gradcheck(o);
        std::memset(report, 0, sizeof *report);
        report->n_blocks = r.blocks.size();
        for (std::size_t i = 0; i < r.blocks.size() && i < IRNN_MAX_BLOCKS; ++i) {
            std::strncpy(report->block_names[i], r.blocks[i].name.c_str(),
                         sizeof report->block_names[i] - 1);
            report->max_rel_error[i] = r.blocks[i].max_rel_error;
        }
        report->unrolled_checked = r.unrolled_max_rel_error.has_value() ? 1 : 0;
        report->unrolled_max_rel_error = r.unrolled_max_rel_error.value_or(NAN);
        report->spectral_radius = r.spectral_radius.value_or(NAN);
        report->passed = r.passed ? 1 : 0;
    });
}

void irnn_train_options_default(irnn_train_options* options) {
    if (!options) return;
    const irnn::TrainConfig c;
    options->arch = IRNN_TRAIN_TWO_LAYER_EXACT;
    options->n_hidden = c.n_hidden;
    options->epochs = c.epochs;
    options->steps_per_epoch = c.steps_per_epoch;
    options->n_batches = c.n_batches;
    options->batch_size = 256;
    options->eval_every = c.eval_every;
    options->lr = c.lr;
    options->seed = 0;
    options->runs = 5;
    options->jobs = 1;
    irnn_solver_options_default(&options->solver);
    options->solver.max_iterations = 1000;
    options->skip_unconverged = 1;
}

void irnn_xor_options_default(irnn_train_options* options) {
    if (!options) return;
    irnn_train_options_default(options);
    options->arch = IRNN_TRAIN_ONE_LAYER_EXACT;
    options->epochs = 2000;
    options->steps_per_epoch = 1;
    options->n_batches = 1;
    options->batch_size = 0;
    options->eval_every = 100;
    options->runs = 1;
}

irnn_status irnn_pendulum_train(const irnn_train_options* options, const irnn_dataset* data,
                                irnn_experiment** out) {
    if (!options) return null_argument("options");
    if (!data) return null_argument("data");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const irnn::TrainConfig c = to_train_config(*options);
        const auto train = irnn::pendulum_examples(data->data.train);
        const auto test = irnn::pendulum_examples(data->data.test);
        *out = new irnn_experiment{irnn::run_experiment(c, options->runs, train, test, options->jobs)};
    });
}

irnn_status irnn_xor_train(const irnn_train_options* options, irnn_experiment** out) {
    if (!options) return null_argument("options");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        irnn::TrainConfig c = to_train_config(*options);
        if (irnn::model_architecture(c.arch) != irnn::Architecture::one_layer) {
            throw irnn::Error(irnn::ErrorCode::invalid_argument,
                              "XOR is trained on a one-layer network");
        }
        if (irnn::gradient_mode(c.arch) == irnn::GradientMode::exact) {
            c.supervised_mask = {true, false};
        }
        const auto examples = irnn::xor_examples();
        *out = new irnn_experiment{
            irnn::run_experiment(c, options->runs, examples, examples, options->jobs)};
    });
}

void irnn_experiment_free(irnn_experiment* experiment) { delete experiment; }

size_t irnn_experiment_runs(const irnn_experiment* experiment) {
    return experiment ? experiment->result.final_models.size() : 0;
}

int irnn_experiment_partial_failure(const irnn_experiment* experiment) {
    return experiment && experiment->result.partial_failure() ? 1 : 0;
}

size_t irnn_experiment_skipped(const irnn_experiment* experiment, size_t run) {
    if (!experiment || run >= experiment->result.skipped.size()) return 0;
    return experiment->result.skipped[run];
}

irnn_status irnn_experiment_run_result(const irnn_experiment* experiment, size_t run,
                                       double* final_test_mse) {
    if (!experiment) return null_argument("experiment");
    irnn_status st = guarded([&] { check_run(experiment, run); });
    if (st != IRNN_OK) return st;
    const auto& r = experiment->result;
    if (r.final_test_mse[run]) {
        if (final_test_mse) *final_test_mse = *r.final_test_mse[run];
        return IRNN_OK;
    }
    for (const auto& f : r.failures) {
        if (f.run_id == run) {
            const irnn_status code = f.code ? to_status(*f.code) : IRNN_ERR_INTERNAL;
            return fail(code, f.message, static_cast<std::int64_t>(run));
        }
    }
    return fail(IRNN_ERR_INTERNAL, "run has neither a result nor a failure");
}

irnn_status irnn_experiment_model(const irnn_experiment* experiment, size_t run,
                                  irnn_model** out) {
    if (!experiment) return null_argument("experiment");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        check_run(experiment, run);
        const auto& m = experiment->result.final_models[run];
        if (!m) {
            throw irnn::Error(irnn::ErrorCode::invalid_argument,
                              "run " + std::to_string(run) + " did not finish", run);
        }
        *out = new irnn_model{*m};
    });
}

irnn_status irnn_experiment_final_summary(const irnn_experiment* experiment, double* mean_mse,
                                          double* sem_mse, size_t* n_runs) {
    if (!experiment) return null_argument("experiment");
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& v : experiment->result.final_test_mse) {
        if (!v) continue;
        sum += *v;
        ++n;
    }
    if (n_runs) *n_runs = n;
    if (n == 0) return fail(IRNN_ERR_NOT_CONVERGED, "no run finished");
    const double mean = sum / static_cast<double>(n);
    for (const auto& v : experiment->result.final_test_mse) {
        if (v) sum_sq += (*v - mean) * (*v - mean);
    }
    if (mean_mse) *mean_mse = mean;
    if (sem_mse) {
        *sem_mse = n > 1 ? std::sqrt(sum_sq / static_cast<double>(n - 1)) /
                               std::sqrt(static_cast<double>(n))
                         : 0.0;
    }
    return IRNN_OK;
}

irnn_status irnn_experiment_write_metrics(const irnn_experiment* experiment, const char* path) {
    if (!experiment) return null_argument("experiment");
    if (!path) return null_argument("path");
    return guarded([&] {
        write_file(path, [&](std::ostream& out) {
            irnn::write_metrics_csv(out, experiment->result.rows);
        });
    });
}

irnn_status irnn_experiment_write_summary(const irnn_experiment* experiment, const char* path) {
    if (!experiment) return null_argument("experiment");
    if (!path) return null_argument("path");
    return guarded([&] {
        write_file(path, [&](std::ostream& out) {
            irnn::write_summary_csv(out, experiment->result.summary);
        });
    });
}

}  // extern "C"
