#include "irnn/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <utility>

#include "irnn/networks.hpp"

namespace irnn {

namespace {

void add_into(Model& acc, const Model& g) {
    std::vector<std::span<const double>> src;
    for_each_block(g, [&](auto, auto, auto, std::span<const double> v) { src.push_back(v); });
    std::size_t b = 0;
    for_each_block(acc, [&](auto, auto, auto, std::span<double> v) {
        const auto s = src[b++];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += s[i];
    });
}

void scale(Model& m, double factor) {
    for_each_block(m, [&](auto, auto, auto, std::span<double> v) {
        for (double& x : v) x *= factor;
    });
}

std::pair<std::size_t, std::size_t> partition(std::size_t n, std::size_t parts, std::size_t p) {
    return {p * n / parts, (p + 1) * n / parts};
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

}  // namespace

std::string_view train_arch_name(TrainArch arch) noexcept {
    switch (arch) {
        case TrainArch::one_layer_exact: return "one-layer-exact";
        case TrainArch::one_layer_semi: return "one-layer-semi";
        case TrainArch::two_layer_exact: return "two-layer-exact";
        case TrainArch::two_layer_semi: return "two-layer-semi";
        case TrainArch::feedforward: return "feedforward";
    }
    return "unknown";
}

std::optional<TrainArch> parse_train_arch(std::string_view name) noexcept {
    for (auto a : {TrainArch::one_layer_exact, TrainArch::one_layer_semi, TrainArch::two_layer_exact,
                   TrainArch::two_layer_semi, TrainArch::feedforward}) {
        if (train_arch_name(a) == name) return a;
    }
    return std::nullopt;
}

Architecture model_architecture(TrainArch arch) noexcept {
    switch (arch) {
        case TrainArch::one_layer_exact:
        case TrainArch::one_layer_semi: return Architecture::one_layer;
        case TrainArch::two_layer_exact:
        case TrainArch::two_layer_semi: return Architecture::two_layer;
        case TrainArch::feedforward: return Architecture::feedforward;
    }
    return Architecture::one_layer;
}

GradientMode gradient_mode(TrainArch arch) noexcept {
    return (arch == TrainArch::one_layer_semi || arch == TrainArch::two_layer_semi)
               ? GradientMode::semi
               : GradientMode::exact;
}

void TrainConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v < 1) throw Error(ErrorCode::invalid_argument, std::string(name) + " must be >= 1");
    };
    positive(epochs, "epochs");
    positive(steps_per_epoch, "steps_per_epoch");
    positive(n_batches, "n_batches");
    positive(eval_every, "eval_every");
    if (model_architecture(arch) != Architecture::one_layer) positive(n_hidden, "n_hidden");
    if (!(lr >= 0.0) || !std::isfinite(lr)) {
        throw Error(ErrorCode::invalid_argument, "learning rate must be finite and >= 0");
    }
    solver.validate();
}

TrainingState::TrainingState(Model m, const TrainConfig& config)
    : model(std::move(m)), adam(model, AdamSettings{config.lr}), cursors(config.n_batches, 0) {}

SampleGradient sample_gradient(const Model& model, GradientMode mode, const Example& example,
                               const OutputMask& mask, const SolverConfig& solver,
                               const TrainHooks& hooks) {
    SampleGradient out;
    const Equilibrium eq = forward(model, example.input, solver);
    if (!eq.converged) {
        throw Error(ErrorCode::not_converged,
                    "equilibrium not converged (residual " + format_real(eq.residual_norm) +
                        " > tolerance " + format_real(solver.tolerance) + ")");
    }
    out.loss = masked_mse(eq.output, example.target, mask);
    const Vector dl_dy = masked_mse_gradient(eq.output, example.target, mask);
    if (hooks.on_loss_gradient) hooks.on_loss_gradient(dl_dy);

    if (const auto* p = std::get_if<OneLayerParams>(&model)) {
        out.grads = mode == GradientMode::exact ? loss_grads_one_layer(*p, example.input, eq, dl_dy)
                                                : semi_grads_one_layer(*p, example.input, eq, dl_dy);
    } else if (const auto* p = std::get_if<TwoLayerParams>(&model)) {
        out.grads = mode == GradientMode::exact ? loss_grads_two_layer(*p, example.input, eq, dl_dy)
                                                : semi_grads_two_layer(*p, example.input, eq, dl_dy);
    } else {
        const FeedForwardActivations acts{eq.hidden, eq.output};
        out.grads = loss_grads_feedforward(std::get<FeedForwardParams>(model), example.input, acts,
                                           dl_dy);
    }
    return out;
}

double train_epoch(TrainingState& state, std::span<const Example> train, const TrainConfig& config,
                   const TrainHooks& hooks) {
    config.validate();
    if (train.size() < config.n_batches) {
        throw Error(ErrorCode::invalid_argument,
                    "training set (" + std::to_string(train.size()) + ") smaller than n_batches (" +
                        std::to_string(config.n_batches) + ")");
    }
    if (state.cursors.size() != config.n_batches) state.cursors.assign(config.n_batches, 0);
    const GradientMode mode = gradient_mode(config.arch);

    double loss_sum = 0.0;
    std::size_t processed = 0;
    for (std::size_t s = 0; s < config.steps_per_epoch; ++s) {
        const std::size_t p = state.steps_taken % config.n_batches;
        const auto [lo, hi] = partition(train.size(), config.n_batches, p);
        const std::size_t part_size = hi - lo;
        const std::size_t batch =
            config.batch_size == 0 ? part_size : std::min(config.batch_size, part_size);

        Model acc = zeros_like(state.model);
        std::size_t& cursor = state.cursors[p];
        std::size_t used = 0;
        for (std::size_t k = 0; k < batch; ++k) {
            const std::size_t index = lo + cursor;
            cursor = (cursor + 1) % part_size;
            try {
                SampleGradient g = sample_gradient(state.model, mode, train[index],
                                                   config.supervised_mask, config.solver, hooks);
                loss_sum += g.loss;
                add_into(acc, g.grads);
                ++used;
            } catch (const Error& e) {
                if (e.code() == ErrorCode::not_converged && config.skip_unconverged) {
                    ++state.skipped;
                    continue;
                }
                if (e.code() == ErrorCode::not_converged) {
                    throw Error(ErrorCode::not_converged,
                                "training sample " + std::to_string(index) + ": " + e.what(), index);
                }
                if (e.code() == ErrorCode::singular_system) {
                    throw Error(ErrorCode::singular_system,
                                "step " + std::to_string(state.steps_taken) + ", sample " +
                                    std::to_string(index) + ": " + e.what(),
                                state.steps_taken);
                }
                throw;
            }
        }
        processed += used;
        if (used > 0) {
            scale(acc, 1.0 / static_cast<double>(used));
            state.adam.step(state.model, acc);
        }
        ++state.steps_taken;
    }
    return processed > 0 ? loss_sum / static_cast<double>(processed)
                         : std::numeric_limits<double>::quiet_NaN();
}

Evaluation evaluate(const Model& model, std::span<const Example> samples, const OutputMask& mask,
                    const SolverConfig& solver) {
    Evaluation ev;
    if (samples.empty()) return ev;
    double sum = 0.0;
    for (const auto& ex : samples) {
        const Equilibrium eq = forward(model, ex.input, solver);
        if (!eq.converged) ++ev.unconverged;
        sum += masked_mse(eq.output, ex.target, mask);
    }
    ev.mse = sum / static_cast<double>(samples.size());
    return ev;
}

double evaluate_mse(const Model& model, std::span<const Example> samples, const OutputMask& mask,
                    const SolverConfig& solver) {
    return evaluate(model, samples, mask, solver).mse;
}

namespace {

struct RunOutcome {
    std::vector<MetricsRow> rows;
    std::optional<Model> model;
    std::optional<double> final_test;
    std::optional<std::string> failure;
    std::optional<ErrorCode> code;
    std::size_t skipped = 0;
};

RunOutcome run_one(const TrainConfig& config, std::size_t run_id, std::span<const Example> train,
                   std::span<const Example> test) {
    using clock = std::chrono::steady_clock;
    RunOutcome out;
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
    std::optional<TrainingState> state;
    try {
        const std::size_t n_in = train.front().input.size();
        const std::size_t n_out = train.front().target.size();
        ArchDescriptor arch{model_architecture(config.arch), n_in, config.n_hidden, n_out};
        Rng rng(config.seed + run_id);
        state.emplace(init_model(arch, rng), config);
        for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
            const double train_mse = train_epoch(*state, train, config);
            out.rows.push_back({run_id, epoch, Split::train, train_mse, elapsed()});
            if (epoch % config.eval_every == 0 || epoch == config.epochs) {
                const Evaluation ev = evaluate(state->model, test, config.supervised_mask, config.solver);
                out.rows.push_back({run_id, epoch, Split::test, ev.mse, elapsed()});
                if (epoch == config.epochs) out.final_test = ev.mse;
            }
        }
        out.model = std::move(state->model);
    } catch (const Error& e) {
        out.failure = e.what();
        out.code = e.code();
        out.final_test.reset();
    } catch (const std::exception& e) {
        out.failure = e.what();
        out.final_test.reset();
    }
    if (state) out.skipped = state->skipped;
    return out;
}

}  // namespace

ExperimentResult run_experiment(const TrainConfig& config, std::size_t n_runs,
                                std::span<const Example> train, std::span<const Example> test,
                                std::size_t jobs) {
    config.validate();
    if (n_runs < 1) throw Error(ErrorCode::invalid_argument, "n_runs must be >= 1");
    if (train.empty() || test.empty()) {
        throw Error(ErrorCode::invalid_argument, "training and test sets must be non-empty");
    }

    std::vector<RunOutcome> outcomes(n_runs);
    const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n_runs);
    if (workers == 1) {
        for (std::size_t r = 0; r < n_runs; ++r) outcomes[r] = run_one(config, r, train, test);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < n_runs; r = next++) {
                    outcomes[r] = run_one(config, r, train, test);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    ExperimentResult result;
    std::vector<MetricsRow> surviving;
    for (std::size_t r = 0; r < n_runs; ++r) {
        auto& o = outcomes[r];
        result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
        if (o.failure) {
            result.failures.push_back({r, *o.failure, o.code});
        } else {
            surviving.insert(surviving.end(), o.rows.begin(), o.rows.end());
        }
        result.final_models.push_back(std::move(o.model));
        result.final_test_mse.push_back(o.final_test);
        result.skipped.push_back(o.skipped);
    }
    result.summary = summarize(surviving);
    return result;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows) {
    std::map<std::pair<std::size_t, int>, std::vector<double>> groups;
    for (const auto& r : rows) groups[{r.epoch, static_cast<int>(r.split)}].push_back(r.mse);
    std::vector<SummaryRow> out;
    for (const auto& [key, values] : groups) {
        const double n = static_cast<double>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= n;
        double sem = 0.0;
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
        out.push_back({key.first, static_cast<Split>(key.second), mean, sem, values.size()});
    }
    return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << "run_id,epoch,split,mse,wallclock_s\n";
    char wall[32];
    for (const auto& r : rows) {
        std::snprintf(wall, sizeof wall, "%.6f", r.wallclock_s);
        out << r.run_id << ',' << r.epoch << ',' << split_name(r.split) << ',' << format_real(r.mse)
            << ',' << wall << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "epoch,split,mean_mse,sem_mse,n_runs\n";
    for (const auto& r : rows) {
        out << r.epoch << ',' << split_name(r.split) << ',' << format_real(r.mean_mse) << ','
            << format_real(r.sem_mse) << ',' << r.n_runs << '\n';
    }
}

std::vector<Example> xor_examples() {
    std::vector<Example> out;
    for (const auto& s : xor_dataset()) out.push_back({s.x, Vector{s.y_xor, s.y_nor}});
    return out;
}

std::vector<Example> pendulum_examples(const std::vector<OscillatorSample>& samples) {
    std::vector<Example> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.trajectory, normalize_targets(s.omega0, s.delta)});
    return out;
}

PendulumEvaluation evaluate_pendulum(const Model& model,
                                     const std::vector<OscillatorSample>& samples,
                                     const SolverConfig& solver) {
    PendulumEvaluation ev;
    if (samples.empty()) return ev;
    double norm_sum = 0.0;
    double raw_sum = 0.0;
    for (const auto& s : samples) {
        const Equilibrium eq = forward(model, s.trajectory, solver);
        if (!eq.converged) ++ev.unconverged;
        norm_sum += masked_mse(eq.output, normalize_targets(s.omega0, s.delta));
        raw_sum += masked_mse(denormalize_targets(eq.output), Vector{s.omega0, s.delta});
    }
    ev.mse_normalized = norm_sum / static_cast<double>(samples.size());
    ev.mse_raw = raw_sum / static_cast<double>(samples.size());
    return ev;
}

}  // namespace irnn
