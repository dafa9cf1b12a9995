// irnn: gradient checks, XOR and pendulum experiments on implicit recurrent nets.
//
// Exit codes: 0 success, 1 quantitative failure (tolerance breach, training
// target missed, failed runs), 2 infrastructure failure (bad flags, I/O,
// parse errors, solver breakdown outside training).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irnn/irnn.h"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_quantitative = 1;
constexpr int exit_infrastructure = 2;

struct ModelDeleter {
    void operator()(irnn_model* m) const { irnn_model_free(m); }
};
struct DatasetDeleter {
    void operator()(irnn_dataset* d) const { irnn_dataset_free(d); }
};
struct ExperimentDeleter {
    void operator()(irnn_experiment* e) const { irnn_experiment_free(e); }
};
using ModelPtr = std::unique_ptr<irnn_model, ModelDeleter>;
using DatasetPtr = std::unique_ptr<irnn_dataset, DatasetDeleter>;
using ExperimentPtr = std::unique_ptr<irnn_experiment, ExperimentDeleter>;

int report_failure(const char* what, irnn_status st) {
    std::fprintf(stderr, "error: %s: %s: %s\n", what, irnn_status_name(st), irnn_last_error());
    return exit_infrastructure;
}

// Seed resolution: IRNN_SEED beats --seed.
struct Seed {
    std::uint64_t value = 0;
    const char* source = "default";
};

std::optional<Seed> resolve_seed(std::uint64_t flag_value, bool flag_given) {
    Seed s{flag_value, flag_given ? "flag" : "default"};
    if (const char* env = std::getenv("IRNN_SEED"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (*end != '\0' || env[0] == '-') {
            std::fprintf(stderr, "error: IRNN_SEED is not an unsigned integer: '%s'\n", env);
            return std::nullopt;
        }
        s.value = v;
        s.source = "env";
    }
    return s;
}

// Audit line: `config: key=value ...`, one line, no spaces inside values.
class Audit {
public:
    explicit Audit(const std::string& command) { out_ << "config: command=" << command; }
    template <class T>
    Audit& add(const char* key, const T& value) {
        out_ << ' ' << key << '=' << value;
        return *this;
    }
    Audit& add(const char* key, double value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out_ << ' ' << key << '=' << buf;
        return *this;
    }
    void print() const { std::printf("%s\n", out_.str().c_str()); }

private:
    std::ostringstream out_;
};

std::string path_for_run(const std::string& path, std::size_t run, std::size_t runs) {
    if (runs == 1) return path;
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    const std::string tag = ".run" + std::to_string(run);
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash) ||
        dot == (slash == std::string::npos ? 0 : slash + 1)) {
        return path + tag;
    }
    return path.substr(0, dot) + tag + path.substr(dot);
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckArgs {
    std::string arch = "one-layer";
    std::size_t n_in = 3;
    std::size_t n_h = 4;
    std::size_t n_out = 2;
    std::uint64_t seed = 0;
    double step = 1e-5;
    double tol = 1e-5;
};

int run_gradcheck(const GradcheckArgs& a, bool seed_given) {
    const auto seed = resolve_seed(a.seed, seed_given);
    if (!seed) return exit_infrastructure;
    irnn_gradcheck_options o;
    irnn_gradcheck_options_default(&o);
    if (a.arch == "one-layer") o.arch = IRNN_TRAIN_ONE_LAYER_EXACT;
    else if (a.arch == "one-layer-semi") o.arch = IRNN_TRAIN_ONE_LAYER_SEMI;
    else if (a.arch == "two-layer") o.arch = IRNN_TRAIN_TWO_LAYER_EXACT;
    else o.arch = IRNN_TRAIN_TWO_LAYER_SEMI;
    o.n_in = a.n_in;
    o.n_hidden = a.n_h;
    o.n_out = a.n_out;
    o.seed = seed->value;
    o.step = a.step;
    o.tol = a.tol;

    Audit("gradcheck")
        .add("arch", a.arch)
        .add("n_in", a.n_in)
        .add("n_h", a.n_h)
        .add("n_out", a.n_out)
        .add("seed", seed->value)
        .add("seed_source", seed->source)
        .add("step", a.step)
        .add("tol", a.tol)
        .print();

    irnn_gradcheck_report r;
    if (const irnn_status st = irnn_gradcheck(&o, &r); st != IRNN_OK) {
        return report_failure("gradcheck", st);
    }
    std::printf("%-6s %s\n", "block", "max_rel_error");
    for (std::size_t i = 0; i < r.n_blocks; ++i) {
        std::printf("%-6s %.3e%s\n", r.block_names[i], r.max_rel_error[i],
                    r.max_rel_error[i] <= a.tol ? "" : "  BREACH");
    }
    if (!std::isnan(r.spectral_radius)) std::printf("spectral_radius %.4f\n", r.spectral_radius);
    if (r.unrolled_checked) {
        std::printf("unrolled_max_rel_error %.3e%s\n", r.unrolled_max_rel_error,
                    r.unrolled_max_rel_error <= a.tol ? "" : "  BREACH");
    }
    std::printf("result %s\n", r.passed ? "PASS" : "FAIL");
    return r.passed ? exit_ok : exit_quantitative;
}

// ---- xor -------------------------------------------------------------------

struct XorArgs {
    std::string mode = "exact";
    std::size_t epochs = 2000;
    std::uint64_t seed = 0;
    std::string out;
};

int run_xor(const XorArgs& a, bool seed_given) {
    const auto seed = resolve_seed(a.seed, seed_given);
    if (!seed) return exit_infrastructure;
    irnn_train_options o;
    irnn_xor_options_default(&o);
    o.arch = a.mode == "semi" ? IRNN_TRAIN_ONE_LAYER_SEMI : IRNN_TRAIN_ONE_LAYER_EXACT;
    o.epochs = a.epochs;
    o.seed = seed->value;

    Audit("xor")
        .add("mode", a.mode)
        .add("epochs", a.epochs)
        .add("steps_per_epoch", o.steps_per_epoch)
        .add("lr", o.lr)
        .add("seed", seed->value)
        .add("seed_source", seed->source)
        .add("solver_iterations", o.solver.iterations)
        .add("solver_max_iterations", o.solver.max_iterations)
        .add("tolerance", o.solver.tolerance)
        .add("out", a.out.empty() ? "-" : a.out)
        .print();

    irnn_experiment* raw = nullptr;
    if (const irnn_status st = irnn_xor_train(&o, &raw); st != IRNN_OK) {
        return report_failure("xor training", st);
    }
    ExperimentPtr exp(raw);
    if (!a.out.empty()) {
        if (const irnn_status st = irnn_experiment_write_metrics(exp.get(), a.out.c_str());
            st != IRNN_OK) {
            return report_failure("writing metrics", st);
        }
    }
    double mse = 0.0;
    if (const irnn_status st = irnn_experiment_run_result(exp.get(), 0, &mse); st != IRNN_OK) {
        std::fprintf(stderr, "training failed: %s\n", irnn_last_error());
        return exit_quantitative;
    }
    irnn_model* model_raw = nullptr;
    if (const irnn_status st = irnn_experiment_model(exp.get(), 0, &model_raw); st != IRNN_OK) {
        return report_failure("fetching model", st);
    }
    ModelPtr model(model_raw);

    irnn_solver_options solver = o.solver;
    const double rows[4][4] = {{0, 0, 0, 1}, {0, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 0, 0}};
    std::printf("%3s %3s | %4s %4s | %8s %8s\n", "x1", "x2", "XOR", "NOR", "Y1", "Y2");
    int nor_agree = 0;
    for (const auto& r : rows) {
        double y[2];
        if (const irnn_status st =
                irnn_model_forward(model.get(), r, 2, &solver, y, 2, nullptr, nullptr);
            st != IRNN_OK) {
            return report_failure("forward pass", st);
        }
        if ((y[1] >= 0.5) == (r[3] >= 0.5)) ++nor_agree;
        std::printf("%3.0f %3.0f | %4.0f %4.0f | %8.4f %8.4f\n", r[0], r[1], r[2], r[3], y[0], y[1]);
    }
    const bool exact = a.mode == "exact";
    std::printf("%s_mse %.6e\n", exact ? "y1" : "combined", mse);
    std::printf("nor_agreement %d/4\n", nor_agree);
    std::printf("skipped_samples %zu\n", irnn_experiment_skipped(exp.get(), 0));
    const bool passed = mse < 1e-2 && (!exact || nor_agree >= 3);
    std::printf("result %s\n", passed ? "PASS" : "FAIL");
    return passed ? exit_ok : exit_quantitative;
}

// ---- pendulum --------------------------------------------------------------

struct GenerateArgs {
    std::size_t samples = 20000;
    std::size_t traj_len = 50;
    std::uint64_t seed = 0;
    std::string out;
};

int run_generate(const GenerateArgs& a, bool seed_given) {
    const auto seed = resolve_seed(a.seed, seed_given);
    if (!seed) return exit_infrastructure;
    Audit("pendulum-generate")
        .add("samples", a.samples)
        .add("traj_len", a.traj_len)
        .add("dt", 0.1)
        .add("seed", seed->value)
        .add("seed_source", seed->source)
        .add("out", a.out)
        .print();
    irnn_dataset* raw = nullptr;
    if (const irnn_status st = irnn_pendulum_generate(a.samples, a.traj_len, seed->value, &raw);
        st != IRNN_OK) {
        return report_failure("generating dataset", st);
    }
    DatasetPtr data(raw);
    if (const irnn_status st = irnn_dataset_save(data.get(), a.out.c_str()); st != IRNN_OK) {
        return report_failure("writing dataset", st);
    }
    std::size_t n_train = 0, n_test = 0;
    irnn_dataset_describe(data.get(), &n_train, &n_test, nullptr);
    std::printf("wrote %s: %zu train, %zu test\n", a.out.c_str(), n_train, n_test);
    return exit_ok;
}

struct TrainArgs {
    std::string arch = "implicit";
    std::size_t n_h = 5;
    std::size_t epochs = 50;
    std::size_t runs = 5;
    std::string data;
    std::string out;
    std::string summary;
    std::string save;
    std::size_t jobs = 1;
    std::size_t batch_size = 256;
    std::size_t steps_per_epoch = 200;
    std::size_t batches = 6;
    std::size_t eval_every = 4;
    double lr = 0.01;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 1000;
    bool abort_unconverged = false;
};

int run_train(const TrainArgs& a, bool seed_given) {
    const auto seed = resolve_seed(a.seed, seed_given);
    if (!seed) return exit_infrastructure;
    irnn_train_options o;
    irnn_train_options_default(&o);
    if (a.arch == "implicit") o.arch = IRNN_TRAIN_TWO_LAYER_EXACT;
    else if (a.arch == "semi") o.arch = IRNN_TRAIN_TWO_LAYER_SEMI;
    else o.arch = IRNN_TRAIN_FEEDFORWARD;
    o.n_hidden = a.n_h;
    o.epochs = a.epochs;
    o.runs = a.runs;
    o.jobs = a.jobs;
    o.batch_size = a.batch_size;
    o.steps_per_epoch = a.steps_per_epoch;
    o.n_batches = a.batches;
    o.eval_every = a.eval_every;
    o.lr = a.lr;
    o.seed = seed->value;
    o.solver.max_iterations = a.max_iterations;
    o.skip_unconverged = a.abort_unconverged ? 0 : 1;

    Audit("pendulum-train")
        .add("arch", a.arch)
        .add("n_h", a.n_h)
        .add("epochs", a.epochs)
        .add("steps_per_epoch", a.steps_per_epoch)
        .add("batches", a.batches)
        .add("batch_size", a.batch_size)
        .add("eval_every", a.eval_every)
        .add("lr", a.lr)
        .add("runs", a.runs)
        .add("jobs", a.jobs)
        .add("seed", seed->value)
        .add("seed_source", seed->source)
        .add("solver", "rk4")
        .add("solver_iterations", o.solver.iterations)
        .add("solver_max_iterations", a.max_iterations)
        .add("tolerance", o.solver.tolerance)
        .add("unconverged", a.abort_unconverged ? "abort" : "skip")
        .add("data", a.data)
        .add("out", a.out.empty() ? "-" : a.out)
        .add("summary", a.summary.empty() ? "-" : a.summary)
        .add("save", a.save.empty() ? "-" : a.save)
        .print();

    irnn_dataset* data_raw = nullptr;
    if (const irnn_status st = irnn_dataset_load(a.data.c_str(), &data_raw); st != IRNN_OK) {
        return report_failure("loading dataset", st);
    }
    DatasetPtr data(data_raw);
    irnn_experiment* exp_raw = nullptr;
    if (const irnn_status st = irnn_pendulum_train(&o, data.get(), &exp_raw); st != IRNN_OK) {
        return report_failure("training", st);
    }
    ExperimentPtr exp(exp_raw);

    if (!a.out.empty()) {
        if (const irnn_status st = irnn_experiment_write_metrics(exp.get(), a.out.c_str());
            st != IRNN_OK) {
            return report_failure("writing metrics", st);
        }
    }
    if (!a.summary.empty()) {
        if (const irnn_status st = irnn_experiment_write_summary(exp.get(), a.summary.c_str());
            st != IRNN_OK) {
            return report_failure("writing summary", st);
        }
    }

    for (std::size_t r = 0; r < a.runs; ++r) {
        double mse = 0.0;
        const irnn_status st = irnn_experiment_run_result(exp.get(), r, &mse);
        const std::size_t skipped = irnn_experiment_skipped(exp.get(), r);
        if (st != IRNN_OK) {
            std::printf("run %zu FAILED skipped=%zu: %s\n", r, skipped, irnn_last_error());
            continue;
        }
        std::printf("run %zu final_test_mse %.17g skipped=%zu\n", r, mse, skipped);
        if (!a.save.empty()) {
            irnn_model* m = nullptr;
            if (const irnn_status ms = irnn_experiment_model(exp.get(), r, &m); ms != IRNN_OK) {
                return report_failure("fetching model", ms);
            }
            ModelPtr model(m);
            const std::string path = path_for_run(a.save, r, a.runs);
            if (const irnn_status ss = irnn_model_save(model.get(), path.c_str()); ss != IRNN_OK) {
                return report_failure("saving model", ss);
            }
        }
    }
    double mean = 0.0, sem = 0.0;
    std::size_t finished = 0;
    if (irnn_experiment_final_summary(exp.get(), &mean, &sem, &finished) == IRNN_OK) {
        std::printf("final_test_mse mean %.17g sem %.17g n_runs %zu\n", mean, sem, finished);
    }
    if (irnn_experiment_partial_failure(exp.get())) {
        std::fprintf(stderr, "%zu of %zu runs failed\n", a.runs - finished, a.runs);
        return exit_quantitative;
    }
    return exit_ok;
}

struct EvalArgs {
    std::string model;
    std::string data;
    std::size_t max_iterations = 1000;
};

int run_eval(const EvalArgs& a) {
    Audit("pendulum-eval")
        .add("model", a.model)
        .add("data", a.data)
        .add("solver", "rk4")
        .add("solver_max_iterations", a.max_iterations)
        .print();
    irnn_model* m = nullptr;
    if (const irnn_status st = irnn_model_load(a.model.c_str(), &m); st != IRNN_OK) {
        return report_failure("loading model", st);
    }
    ModelPtr model(m);
    irnn_dataset* d = nullptr;
    if (const irnn_status st = irnn_dataset_load(a.data.c_str(), &d); st != IRNN_OK) {
        return report_failure("loading dataset", st);
    }
    DatasetPtr data(d);
    irnn_solver_options solver;
    irnn_solver_options_default(&solver);
    solver.max_iterations = a.max_iterations;
    irnn_pendulum_eval ev;
    if (const irnn_status st = irnn_pendulum_evaluate(model.get(), data.get(), &solver, &ev);
        st != IRNN_OK) {
        return report_failure("evaluating", st);
    }
    std::printf("test_mse_normalized %.17g\n", ev.mse_normalized);
    std::printf("test_mse_raw %.17g\n", ev.mse_raw);
    std::printf("unconverged %zu of %zu\n", ev.unconverged, ev.n_samples);
    if (ev.unconverged > 0) {
        std::fprintf(stderr, "warning: %zu equilibria missed the solver tolerance\n", ev.unconverged);
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implicit recurrent networks: gradient checks, XOR and pendulum experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(irnn_version()));

    GradcheckArgs gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    gradcheck->add_option("--arch", gc.arch, "Network and gradient rule")
        ->check(CLI::IsMember({"one-layer", "one-layer-semi", "two-layer", "two-layer-semi"}))
        ->capture_default_str();
    gradcheck->add_option("--n-in", gc.n_in, "Inputs")->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--n-h", gc.n_h, "Hidden neurons (two-layer)")->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--n-out", gc.n_out, "Output neurons")->check(CLI::PositiveNumber)->capture_default_str();
    auto* gc_seed = gradcheck->add_option("--seed", gc.seed, "Seed (IRNN_SEED overrides)")->capture_default_str();
    gradcheck->add_option("--step", gc.step, "Central difference step")->capture_default_str();
    gradcheck->add_option("--tol", gc.tol, "Max relative error")->capture_default_str();

    XorArgs xr;
    auto* xor_cmd = app.add_subcommand("xor", "Train a two-neuron implicit net on XOR");
    xor_cmd->add_option("--mode", xr.mode, "exact: Y2 unsupervised; semi: semi-gradient, Y2 learns NOR")
        ->check(CLI::IsMember({"exact", "semi"}))
        ->capture_default_str();
    xor_cmd->add_option("--epochs", xr.epochs, "Epochs (one full-batch step each)")->check(CLI::PositiveNumber)->capture_default_str();
    auto* xor_seed = xor_cmd->add_option("--seed", xr.seed, "Seed (IRNN_SEED overrides)")->capture_default_str();
    xor_cmd->add_option("--out", xr.out, "Metrics CSV path");

    auto* pendulum = app.add_subcommand("pendulum", "Damped oscillator parameter regression");
    pendulum->require_subcommand(1);

    GenerateArgs gen;
    auto* generate = pendulum->add_subcommand("generate", "Write a trajectory dataset CSV");
    generate->add_option("--samples", gen.samples, "Number of trajectories (>= 5)")->capture_default_str();
    generate->add_option("--traj-len", gen.traj_len, "Points per trajectory")->check(CLI::PositiveNumber)->capture_default_str();
    auto* gen_seed = generate->add_option("--seed", gen.seed, "Seed (IRNN_SEED overrides)")->capture_default_str();
    generate->add_option("--out", gen.out, "Output CSV")->required();

    TrainArgs tr;
    auto* train = pendulum->add_subcommand("train", "Train and evaluate repeated runs");
    train->add_option("--arch", tr.arch, "implicit: two-layer exact; semi: two-layer semi-gradient; ff: feed-forward")
        ->check(CLI::IsMember({"implicit", "semi", "ff"}))
        ->capture_default_str();
    train->add_option("--n-h", tr.n_h, "Hidden neurons")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--runs", tr.runs, "Independent runs (seeds seed..seed+runs-1)")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--data", tr.data, "Dataset CSV")->required();
    train->add_option("--out", tr.out, "Per-run metrics CSV");
    train->add_option("--summary", tr.summary, "Cross-run summary CSV");
    train->add_option("--save", tr.save, "Final model path; .run<r> is inserted when runs > 1");
    train->add_option("--jobs", tr.jobs, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--batch-size", tr.batch_size, "Samples per step, 0 = whole partition")->capture_default_str();
    train->add_option("--steps-per-epoch", tr.steps_per_epoch, "ADAM steps per epoch")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--batches", tr.batches, "Training set partitions")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--eval-every", tr.eval_every, "Test evaluation period in epochs")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--lr", tr.lr, "ADAM learning rate")->capture_default_str();
    auto* tr_seed = train->add_option("--seed", tr.seed, "Base seed (IRNN_SEED overrides)")->capture_default_str();
    train->add_option("--max-iterations", tr.max_iterations, "Relaxation step cap for slow equilibria (0: exactly 30 steps)")->capture_default_str();
    train->add_flag("--abort-unconverged", tr.abort_unconverged, "Abort a run on an unconverged training sample instead of skipping it");

    EvalArgs ev;
    auto* eval = pendulum->add_subcommand("eval", "Test-split MSE of a saved model");
    eval->add_option("--model", ev.model, "Model file")->required();
    eval->add_option("--data", ev.data, "Dataset CSV")->required();
    eval->add_option("--max-iterations", ev.max_iterations, "Relaxation step cap, as in training")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_infrastructure;
    }

    if (*gradcheck) return run_gradcheck(gc, gc_seed->count() > 0);
    if (*xor_cmd) return run_xor(xr, xor_seed->count() > 0);
    if (*generate) return run_generate(gen, gen_seed->count() > 0);
    if (*train) return run_train(tr, tr_seed->count() > 0);
    if (*eval) return run_eval(ev);
    return exit_infrastructure;
}
