#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irnn/datasets.hpp"
#include "irnn/equilibrium.hpp"
#include "irnn/gradients.hpp"
#include "irnn/optimizer.hpp"
#include "irnn/params.hpp"

namespace irnn {

enum class TrainArch { one_layer_exact, one_layer_semi, two_layer_exact, two_layer_semi, feedforward };
enum class GradientMode { exact, semi };

[[nodiscard]] std::string_view train_arch_name(TrainArch arch) noexcept;
[[nodiscard]] std::optional<TrainArch> parse_train_arch(std::string_view name) noexcept;
[[nodiscard]] Architecture model_architecture(TrainArch arch) noexcept;
[[nodiscard]] GradientMode gradient_mode(TrainArch arch) noexcept;

struct Example {
    Vector input;
    Vector target;
};

struct TrainConfig {
    TrainArch arch = TrainArch::two_layer_exact;
    std::size_t n_hidden = 5;  // ignored by one-layer architectures
    std::size_t epochs = 50;
    std::size_t steps_per_epoch = 200;
    std::size_t n_batches = 6;
    /// Samples per ADAM step, taken as a rolling window inside the current
    /// partition. 0 uses the whole partition.
    std::size_t batch_size = 0;
    std::size_t eval_every = 4;
    double lr = 0.01;
    std::uint64_t seed = 0;
    OutputMask supervised_mask;  // empty: all outputs supervised
    SolverConfig solver;
    /// Leave samples whose equilibrium misses the tolerance out of the batch
    /// average and count them, instead of aborting the run.
    bool skip_unconverged = false;

    /// Throws Error{invalid_argument}.
    void validate() const;
};

/// Everything a run mutates: the model, one ADAM state per block, and the
/// read position inside each batch partition.
struct TrainingState {
    TrainingState(Model model, const TrainConfig& config);

    Model model;
    BlockAdam adam;
    std::vector<std::size_t> cursors;
    std::size_t steps_taken = 0;
    std::size_t skipped = 0;  // samples left out under skip_unconverged
};

/// Instrumentation callbacks; `on_loss_gradient` sees every per-sample dL/dY.
struct TrainHooks {
    std::function<void(const Vector& dl_dy)> on_loss_gradient;
};

struct SampleGradient {
    double loss = 0.0;
    Model grads;
};

/// Loss and parameter gradient for one example. Throws Error{not_converged}
/// when the equilibrium misses the solver tolerance.
[[nodiscard]] SampleGradient sample_gradient(const Model& model, GradientMode mode,
                                             const Example& example, const OutputMask& mask,
                                             const SolverConfig& solver,
                                             const TrainHooks& hooks = {});

/// Runs config.steps_per_epoch ADAM steps. The training set is cut into
/// config.n_batches contiguous partitions which are visited in order, one per
/// step. Returns the mean per-sample loss over the processed samples
/// (evaluated before each step). Non-converged equilibria throw
/// Error{not_converged} carrying the sample index; singular sensitivities
/// rethrow Error{singular_system} naming the step.
double train_epoch(TrainingState& state, std::span<const Example> train, const TrainConfig& config,
                   const TrainHooks& hooks = {});

struct Evaluation {
    double mse = 0.0;
    std::size_t unconverged = 0;  // equilibria that missed the tolerance
};

/// Mean per-sample masked MSE. Never mutates the model; non-converged
/// equilibria are counted rather than fatal.
[[nodiscard]] Evaluation evaluate(const Model& model, std::span<const Example> samples,
                                  const OutputMask& mask, const SolverConfig& solver);
[[nodiscard]] double evaluate_mse(const Model& model, std::span<const Example> samples,
                                  const OutputMask& mask = {}, const SolverConfig& solver = {});

enum class Split { train, test };

struct MetricsRow {
    std::size_t run_id = 0;
    std::size_t epoch = 0;
    Split split = Split::train;
    double mse = 0.0;
    double wallclock_s = 0.0;
};

struct SummaryRow {
    std::size_t epoch = 0;
    Split split = Split::train;
    double mean_mse = 0.0;
    double sem_mse = 0.0;  // standard deviation of the mean
    std::size_t n_runs = 0;
};

struct RunFailure {
    std::size_t run_id = 0;
    std::string message;
    std::optional<ErrorCode> code;  // empty for non-library exceptions
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;        // ordered by (run_id, epoch, split)
    std::vector<SummaryRow> summary;     // ordered by (epoch, split)
    std::vector<std::optional<Model>> final_models;  // per run; empty on failure
    std::vector<std::optional<double>> final_test_mse;
    std::vector<std::size_t> skipped;  // per run, see TrainConfig::skip_unconverged
    std::vector<RunFailure> failures;

    [[nodiscard]] bool partial_failure() const noexcept { return !failures.empty(); }
};

/// Trains n_runs independent models with seeds config.seed + r. Training MSE
/// is logged every epoch; test MSE every eval_every epochs and after the last
/// epoch. Up to `jobs` runs execute concurrently; results do not depend on it.
[[nodiscard]] ExperimentResult run_experiment(const TrainConfig& config, std::size_t n_runs,
                                              std::span<const Example> train,
                                              std::span<const Example> test,
                                              std::size_t jobs = 1);

/// Cross-run mean and standard deviation of the mean per (epoch, split).
[[nodiscard]] std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows);

/// `run_id,epoch,split,mse,wallclock_s`
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// `epoch,split,mean_mse,sem_mse,n_runs`
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

// Task adapters

/// XOR rows with targets (y_xor, y_nor).
[[nodiscard]] std::vector<Example> xor_examples();
/// Trajectory in, normalized (ω₀, δ) out.
[[nodiscard]] std::vector<Example> pendulum_examples(const std::vector<OscillatorSample>& samples);

struct PendulumEvaluation {
    double mse_normalized = 0.0;
    double mse_raw = 0.0;  // in physical units of (ω₀, δ)
    std::size_t unconverged = 0;
};

[[nodiscard]] PendulumEvaluation evaluate_pendulum(const Model& model,
                                                   const std::vector<OscillatorSample>& samples,
                                                   const SolverConfig& solver = {});

}  // namespace irnn
