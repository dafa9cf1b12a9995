#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "irnn/irnn.h"

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(irnn_version()).size() > 0);
    CHECK(std::string(irnn_status_name(IRNN_OK)) == "ok");
    CHECK(std::string(irnn_status_name(IRNN_ERR_SINGULAR)).size() > 0);
}

TEST_CASE("model lifecycle") {
    irnn_model* m = nullptr;
    REQUIRE(irnn_model_create(IRNN_ARCH_TWO_LAYER, 50, 5, 2, 1, &m) == IRNN_OK);
    irnn_arch arch;
    size_t n_in = 0, n_h = 0, n_out = 0, n_params = 0;
    CHECK(irnn_model_describe(m, &arch, &n_in, &n_h, &n_out, &n_params) == IRNN_OK);
    CHECK(arch == IRNN_ARCH_TWO_LAYER);
    CHECK(n_in == 50);
    CHECK(n_h == 5);
    CHECK(n_out == 2);
    CHECK(n_params == 306);
    CHECK(irnn_model_describe(m, nullptr, nullptr, nullptr, nullptr, nullptr) == IRNN_OK);

    double x[50] = {0};
    double y[2];
    double residual = -1;
    int converged = 0;
    CHECK(irnn_model_forward(m, x, 50, nullptr, y, 2, &residual, &converged) == IRNN_OK);
    CHECK(converged == 1);
    CHECK(residual <= 1e-6);
    CHECK((y[0] > 0 && y[0] < 1));

    const std::string path = temp_path("irnn_c_api_model.txt");
    CHECK(irnn_model_save(m, path.c_str()) == IRNN_OK);
    irnn_model* back = nullptr;
    REQUIRE(irnn_model_load(path.c_str(), &back) == IRNN_OK);
    double y2[2];
    CHECK(irnn_model_forward(back, x, 50, nullptr, y2, 2, nullptr, nullptr) == IRNN_OK);
    CHECK(y2[0] == y[0]);
    CHECK(y2[1] == y[1]);
    irnn_model_free(back);
    irnn_model_free(m);
    irnn_model_free(nullptr);
    std::filesystem::remove(path);
}

TEST_CASE("error codes and last error") {
    irnn_model* m = nullptr;
    CHECK(irnn_model_create(IRNN_ARCH_ONE_LAYER, 0, 0, 2, 1, &m) == IRNN_ERR_INVALID_ARGUMENT);
    CHECK(m == nullptr);
    CHECK(std::string(irnn_last_error()).size() > 0);
    CHECK(irnn_model_create(IRNN_ARCH_ONE_LAYER, 2, 0, 2, 1, nullptr) == IRNN_ERR_INVALID_ARGUMENT);

    REQUIRE(irnn_model_create(IRNN_ARCH_ONE_LAYER, 2, 0, 2, 1, &m) == IRNN_OK);
    double x[3] = {0, 0, 0}, y[2];
    CHECK(irnn_model_forward(m, x, 3, nullptr, y, 2, nullptr, nullptr) == IRNN_ERR_DIMENSION_MISMATCH);
    CHECK(irnn_model_forward(m, x, 2, nullptr, y, 1, nullptr, nullptr) == IRNN_ERR_DIMENSION_MISMATCH);
    irnn_solver_options bad;
    irnn_solver_options_default(&bad);
    bad.tolerance = -1;
    CHECK(irnn_model_forward(m, x, 2, &bad, y, 2, nullptr, nullptr) == IRNN_ERR_INVALID_ARGUMENT);
    irnn_model_free(m);

    irnn_model* missing = nullptr;
    CHECK(irnn_model_load("/nonexistent/m.txt", &missing) == IRNN_ERR_IO);

    const std::string path = temp_path("irnn_c_api_bad_model.txt");
    {
        std::ofstream out(path);
        out << "IRNN-MODEL v1\narch one-layer n_in 2 n_h - n_out 2\n[matrix Q 2 2]\n1 2\n";
    }
    CHECK(irnn_model_load(path.c_str(), &missing) == IRNN_ERR_PARSE);
    CHECK(irnn_last_error_index() >= 1);
    {
        std::ofstream out(path);
        out << "IRNN-MODEL v7\n";
    }
    CHECK(irnn_model_load(path.c_str(), &missing) == IRNN_ERR_UNSUPPORTED_VERSION);
    std::filesystem::remove(path);
}

TEST_CASE("last error is per thread") {
    irnn_model* m = nullptr;
    CHECK(irnn_model_create(IRNN_ARCH_ONE_LAYER, 0, 0, 2, 1, &m) == IRNN_ERR_INVALID_ARGUMENT);
    const std::string mine = irnn_last_error();
    std::string theirs;
    std::thread t([&] {
        irnn_model* other = nullptr;
        (void)irnn_model_load("/nonexistent/other.txt", &other);
        theirs = irnn_last_error();
    });
    t.join();
    CHECK(theirs != mine);
    CHECK(std::string(irnn_last_error()) == mine);
}

TEST_CASE("datasets and evaluation") {
    irnn_dataset* d = nullptr;
    REQUIRE(irnn_pendulum_generate(25, 8, 4, &d) == IRNN_OK);
    size_t n_train = 0, n_test = 0, len = 0;
    CHECK(irnn_dataset_describe(d, &n_train, &n_test, &len) == IRNN_OK);
    CHECK(n_train == 20);
    CHECK(n_test == 5);
    CHECK(len == 8);

    const std::string path = temp_path("irnn_c_api_data.csv");
    CHECK(irnn_dataset_save(d, path.c_str()) == IRNN_OK);
    irnn_dataset* back = nullptr;
    REQUIRE(irnn_dataset_load(path.c_str(), &back) == IRNN_OK);

    irnn_model* m = nullptr;
    REQUIRE(irnn_model_create(IRNN_ARCH_FEEDFORWARD, 8, 3, 2, 1, &m) == IRNN_OK);
    irnn_pendulum_eval a, b;
    CHECK(irnn_pendulum_evaluate(m, d, nullptr, &a) == IRNN_OK);
    CHECK(irnn_pendulum_evaluate(m, back, nullptr, &b) == IRNN_OK);
    CHECK(a.mse_normalized == b.mse_normalized);
    CHECK(a.n_samples == 5);
    CHECK(a.mse_raw > a.mse_normalized);

    irnn_model* wrong = nullptr;
    REQUIRE(irnn_model_create(IRNN_ARCH_FEEDFORWARD, 7, 3, 2, 1, &wrong) == IRNN_OK);
    CHECK(irnn_pendulum_evaluate(wrong, d, nullptr, &a) == IRNN_ERR_DIMENSION_MISMATCH);
    CHECK(irnn_pendulum_generate(4, 8, 1, &back) != IRNN_OK);

    irnn_model_free(wrong);
    irnn_model_free(m);
    irnn_dataset_free(back);
    irnn_dataset_free(d);
    std::filesystem::remove(path);
}

TEST_CASE("gradcheck through the C API") {
    irnn_gradcheck_options o;
    irnn_gradcheck_options_default(&o);
    o.arch = IRNN_TRAIN_TWO_LAYER_EXACT;
    irnn_gradcheck_report r;
    REQUIRE(irnn_gradcheck(&o, &r) == IRNN_OK);
    CHECK(r.n_blocks == 7);
    CHECK(r.passed == 1);
    CHECK(std::string(r.block_names[2]) == "R");

    o.arch = IRNN_TRAIN_ONE_LAYER_SEMI;
    REQUIRE(irnn_gradcheck(&o, &r) == IRNN_OK);
    CHECK(r.passed == 0);

    o.arch = IRNN_TRAIN_FEEDFORWARD;
    CHECK(irnn_gradcheck(&o, &r) == IRNN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("experiments") {
    irnn_dataset* d = nullptr;
    REQUIRE(irnn_pendulum_generate(60, 6, 2, &d) == IRNN_OK);
    irnn_train_options o;
    irnn_train_options_default(&o);
    CHECK(o.arch == IRNN_TRAIN_TWO_LAYER_EXACT);
    CHECK(o.runs == 5);
    CHECK(o.skip_unconverged != 0);
    o.epochs = 3;
    o.steps_per_epoch = 4;
    o.batch_size = 8;
    o.eval_every = 1;
    o.runs = 2;
    o.n_hidden = 3;

    irnn_experiment* e = nullptr;
    REQUIRE(irnn_pendulum_train(&o, d, &e) == IRNN_OK);
    CHECK(irnn_experiment_runs(e) == 2);
    CHECK(irnn_experiment_partial_failure(e) == 0);
    double final0 = 0;
    CHECK(irnn_experiment_run_result(e, 0, &final0) == IRNN_OK);
    CHECK(irnn_experiment_run_result(e, 5, &final0) == IRNN_ERR_INVALID_ARGUMENT);
    CHECK(irnn_experiment_skipped(e, 0) == 0);

    irnn_model* m = nullptr;
    REQUIRE(irnn_experiment_model(e, 0, &m) == IRNN_OK);
    irnn_pendulum_eval ev;
    CHECK(irnn_pendulum_evaluate(m, d, nullptr, &ev) == IRNN_OK);
    CHECK(std::abs(ev.mse_normalized - final0) <= 1e-12);

    double mean = 0, sem = 0;
    size_t n = 0;
    CHECK(irnn_experiment_final_summary(e, &mean, &sem, &n) == IRNN_OK);
    CHECK(n == 2);
    double final1 = 0;
    (void)irnn_experiment_run_result(e, 1, &final1);
    CHECK(std::abs(mean - (final0 + final1) / 2) <= 1e-15);
    CHECK(std::abs(sem - std::abs(final0 - final1) / 2) <= 1e-15);

    const std::string metrics = temp_path("irnn_c_api_metrics.csv");
    const std::string summary = temp_path("irnn_c_api_summary.csv");
    CHECK(irnn_experiment_write_metrics(e, metrics.c_str()) == IRNN_OK);
    CHECK(irnn_experiment_write_summary(e, summary.c_str()) == IRNN_OK);
    CHECK(slurp(metrics).rfind("run_id,epoch,split,mse,wallclock_s\n", 0) == 0);
    CHECK(slurp(summary).rfind("epoch,split,mean_mse,sem_mse,n_runs\n", 0) == 0);
    CHECK(irnn_experiment_write_metrics(e, "/nonexistent/x.csv") == IRNN_ERR_IO);
    std::filesystem::remove(metrics);
    std::filesystem::remove(summary);
    irnn_model_free(m);
    irnn_experiment_free(e);

    // a solver that cannot converge fails every run when skipping is off
    o.skip_unconverged = 0;
    o.solver.iterations = 1;
    o.solver.max_iterations = 0;
    o.solver.tolerance = 1e-300;
    REQUIRE(irnn_pendulum_train(&o, d, &e) == IRNN_OK);
    CHECK(irnn_experiment_partial_failure(e) == 1);
    CHECK(irnn_experiment_run_result(e, 0, &final0) == IRNN_ERR_NOT_CONVERGED);
    CHECK(std::string(irnn_last_error()).find("not converged") != std::string::npos);
    CHECK(irnn_experiment_model(e, 0, &m) != IRNN_OK);
    CHECK(irnn_experiment_final_summary(e, &mean, &sem, &n) != IRNN_OK);
    irnn_experiment_free(e);

    o.runs = 0;
    CHECK(irnn_pendulum_train(&o, d, &e) == IRNN_ERR_INVALID_ARGUMENT);
    irnn_dataset_free(d);
}

TEST_CASE("xor through the C API") {
    irnn_train_options o;
    irnn_xor_options_default(&o);
    CHECK(o.arch == IRNN_TRAIN_ONE_LAYER_EXACT);
    CHECK(o.epochs == 2000);
    o.epochs = 50;
    irnn_experiment* a = nullptr;
    irnn_experiment* b = nullptr;
    REQUIRE(irnn_xor_train(&o, &a) == IRNN_OK);
    REQUIRE(irnn_xor_train(&o, &b) == IRNN_OK);
    double fa = 0, fb = 0;
    CHECK(irnn_experiment_run_result(a, 0, &fa) == IRNN_OK);
    CHECK(irnn_experiment_run_result(b, 0, &fb) == IRNN_OK);
    CHECK(fa == fb);
    irnn_experiment_free(a);
    irnn_experiment_free(b);

    o.arch = IRNN_TRAIN_TWO_LAYER_EXACT;
    CHECK(irnn_xor_train(&o, &a) == IRNN_ERR_INVALID_ARGUMENT);
}
