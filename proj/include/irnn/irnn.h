/*
 * C interface to the implicit recurrent network library.
 *
 * Objects are opaque handles created and released through this API. Every
 * fallible call returns an irnn_status; on failure irnn_last_error() holds a
 * message for the calling thread until its next failing call.
 */
#ifndef IRNN_IRNN_H
#define IRNN_IRNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(IRNN_BUILDING_LIBRARY)
#    define IRNN_API __declspec(dllexport)
#  else
#    define IRNN_API __declspec(dllimport)
#  endif
#else
#  define IRNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum irnn_status {
  IRNN_OK = 0,
  IRNN_ERR_INVALID_ARGUMENT = 1,
  IRNN_ERR_DIMENSION_MISMATCH = 2,
  IRNN_ERR_SINGULAR = 3,
  IRNN_ERR_NOT_CONVERGED = 4,
  IRNN_ERR_DIVERGED = 5,
  IRNN_ERR_IO = 6,
  IRNN_ERR_PARSE = 7,
  IRNN_ERR_UNSUPPORTED_VERSION = 8,
  IRNN_ERR_OUT_OF_MEMORY = 9,
  IRNN_ERR_INTERNAL = 10
} irnn_status;

typedef enum irnn_arch {
  IRNN_ARCH_ONE_LAYER = 0,
  IRNN_ARCH_TWO_LAYER = 1,
  IRNN_ARCH_FEEDFORWARD = 2
} irnn_arch;

/* Network architecture together with the gradient rule used to train it. */
typedef enum irnn_train_arch {
  IRNN_TRAIN_ONE_LAYER_EXACT = 0,
  IRNN_TRAIN_ONE_LAYER_SEMI = 1,
  IRNN_TRAIN_TWO_LAYER_EXACT = 2,
  IRNN_TRAIN_TWO_LAYER_SEMI = 3,
  IRNN_TRAIN_FEEDFORWARD = 4
} irnn_train_arch;

typedef enum irnn_integrator { IRNN_RK4 = 0, IRNN_EULER = 1 } irnn_integrator;

typedef struct irnn_model irnn_model;
typedef struct irnn_dataset irnn_dataset;
typedef struct irnn_experiment irnn_experiment;

IRNN_API const char* irnn_version(void);
IRNN_API const char* irnn_status_name(irnn_status status);
/* Message of the last failing call on this thread; "" if none. */
IRNN_API const char* irnn_last_error(void);
/* Pivot, iteration, sample or line number attached to the last error; -1 if none. */
IRNN_API int64_t irnn_last_error_index(void);

/* ---- equilibrium solver ------------------------------------------------ */

typedef struct irnn_solver_options {
  irnn_integrator method;
  size_t iterations;
  double step_size;
  double tolerance;
  /* Equilibria still above tolerance after `iterations` steps keep relaxing
   * up to this many steps in total; 0 disables the extension. */
  size_t max_iterations;
} irnn_solver_options;

/* RK4, 30 iterations, step 1.0, tolerance 1e-6, no extension. */
IRNN_API void irnn_solver_options_default(irnn_solver_options* options);

/* ---- models ------------------------------------------------------------ */

IRNN_API irnn_status irnn_model_create(irnn_arch arch, size_t n_in, size_t n_hidden,
                                       size_t n_out, uint64_t seed, irnn_model** out);
IRNN_API irnn_status irnn_model_load(const char* path, irnn_model** out);
IRNN_API irnn_status irnn_model_save(const irnn_model* model, const char* path);
IRNN_API void irnn_model_free(irnn_model* model);
/* Any output pointer may be NULL. n_hidden is 0 for one-layer models. */
IRNN_API irnn_status irnn_model_describe(const irnn_model* model, irnn_arch* arch, size_t* n_in,
                                         size_t* n_hidden, size_t* n_out, size_t* n_params);
/* Output-layer equilibrium for input x. `options` may be NULL for defaults;
 * `residual` and `converged` may be NULL. */
IRNN_API irnn_status irnn_model_forward(const irnn_model* model, const double* x, size_t n_in,
                                        const irnn_solver_options* options, double* y,
                                        size_t n_out, double* residual, int* converged);

/* ---- pendulum datasets ------------------------------------------------- */

IRNN_API irnn_status irnn_pendulum_generate(size_t n_samples, size_t length, uint64_t seed,
                                            irnn_dataset** out);
IRNN_API irnn_status irnn_dataset_load(const char* path, irnn_dataset** out);
IRNN_API irnn_status irnn_dataset_save(const irnn_dataset* data, const char* path);
IRNN_API void irnn_dataset_free(irnn_dataset* data);
IRNN_API irnn_status irnn_dataset_describe(const irnn_dataset* data, size_t* n_train,
                                           size_t* n_test, size_t* length);

typedef struct irnn_pendulum_eval {
  double mse_normalized;
  double mse_raw;
  size_t unconverged;
  size_t n_samples;
} irnn_pendulum_eval;

/* Test-split MSE of `model` in normalized and physical target units.
 * `options` may be NULL for the solver of irnn_train_options_default. */
IRNN_API irnn_status irnn_pendulum_evaluate(const irnn_model* model, const irnn_dataset* data,
                                            const irnn_solver_options* options,
                                            irnn_pendulum_eval* out);

/* ---- gradient check ---------------------------------------------------- */

#define IRNN_MAX_BLOCKS 7

typedef struct irnn_gradcheck_options {
  irnn_train_arch arch; /* the feed-forward arch is not checkable */
  size_t n_in;
  size_t n_hidden;
  size_t n_out;
  uint64_t seed;
  double step;
  double tol;
} irnn_gradcheck_options;

typedef struct irnn_gradcheck_report {
  size_t n_blocks;
  char block_names[IRNN_MAX_BLOCKS][8];
  double max_rel_error[IRNN_MAX_BLOCKS];
  int unrolled_checked;
  double unrolled_max_rel_error;
  double spectral_radius; /* of diag(f')·W, one-layer only */
  int passed;             /* every checked error <= tol */
} irnn_gradcheck_report;

IRNN_API void irnn_gradcheck_options_default(irnn_gradcheck_options* options);
/* Builds a random network with non-zero recurrent weights and compares its
 * analytic gradients against central finite differences. A tolerance breach
 * is reported through `passed`, not through the status. */
IRNN_API irnn_status irnn_gradcheck(const irnn_gradcheck_options* options,
                                    irnn_gradcheck_report* report);

/* ---- training ---------------------------------------------------------- */

typedef struct irnn_train_options {
  irnn_train_arch arch;
  size_t n_hidden;
  size_t epochs;
  size_t steps_per_epoch;
  size_t n_batches;
  size_t batch_size; /* 0: whole partition */
  size_t eval_every;
  double lr;
  uint64_t seed;
  size_t runs;
  size_t jobs;
  irnn_solver_options solver;
  /* Nonzero: training samples whose equilibrium misses the tolerance are
   * left out of the batch and counted. Zero: they abort the run. */
  int skip_unconverged;
} irnn_train_options;

/* Desk-scale pendulum defaults: two-layer exact, n_h 5, 50 epochs of 200
 * steps over 6 partitions, batch 256, test every 4 epochs, lr 0.01, 5 runs,
 * relaxation extended to 1000 steps, unconverged samples skipped. */
IRNN_API void irnn_train_options_default(irnn_train_options* options);
/* XOR defaults: one-layer exact, 2000 epochs of one full-batch step. */
IRNN_API void irnn_xor_options_default(irnn_train_options* options);

IRNN_API irnn_status irnn_pendulum_train(const irnn_train_options* options,
                                         const irnn_dataset* data, irnn_experiment** out);
/* Trains a two-neuron one-layer net on XOR. Exact mode supervises Y1 only;
 * semi mode also supervises Y2 with NOR. */
IRNN_API irnn_status irnn_xor_train(const irnn_train_options* options, irnn_experiment** out);

IRNN_API void irnn_experiment_free(irnn_experiment* experiment);
IRNN_API size_t irnn_experiment_runs(const irnn_experiment* experiment);
IRNN_API int irnn_experiment_partial_failure(const irnn_experiment* experiment);
/* Training samples skipped by `run` for missing the solver tolerance. */
IRNN_API size_t irnn_experiment_skipped(const irnn_experiment* experiment, size_t run);
/* IRNN_OK with the final test MSE if the run finished; otherwise the run's
 * failure status, with the message available from irnn_last_error(). */
IRNN_API irnn_status irnn_experiment_run_result(const irnn_experiment* experiment, size_t run,
                                                double* final_test_mse);
/* Copy of a finished run's final model; free with irnn_model_free. */
IRNN_API irnn_status irnn_experiment_model(const irnn_experiment* experiment, size_t run,
                                           irnn_model** out);
/* Final test MSE averaged over finished runs and its standard deviation of the mean. */
IRNN_API irnn_status irnn_experiment_final_summary(const irnn_experiment* experiment,
                                                   double* mean_mse, double* sem_mse,
                                                   size_t* n_runs);
IRNN_API irnn_status irnn_experiment_write_metrics(const irnn_experiment* experiment,
                                                   const char* path);
IRNN_API irnn_status irnn_experiment_write_summary(const irnn_experiment* experiment,
                                                   const char* path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* IRNN_IRNN_H */
