#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "irnn/networks.hpp"

using namespace irnn;

namespace {

Vector random_input(std::size_t n, Rng& rng) {
    Vector x(n);
    for (double& v : x) v = rng.uniform(-1, 1);
    return x;
}

double max_diff(const Vector& a, const Vector& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

std::size_t count_serialized_scalars(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '[') continue;
        std::istringstream ls(line);
        double v;
        while (ls >> v) ++n;
    }
    return n;
}

std::string serialize(const Model& m) {
    std::ostringstream out;
    write_model(out, m);
    return out.str();
}

Model parse(const std::string& text) {
    std::istringstream in(text);
    return read_model(in);
}

}  // namespace

TEST_CASE("initialization: recurrent blocks zero, others in [-0.5, 0.5)") {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        Rng rng(seed);
        const OneLayerParams one = init_one_layer(3, 4, rng);
        for (double v : one.w.span()) CHECK(v == 0.0);
        for (double v : one.q.span()) CHECK((v >= -0.5 && v < 0.5));
        for (double v : one.t) CHECK((v >= -0.5 && v < 0.5));

        const TwoLayerParams two = init_two_layer(3, 5, 2, rng);
        for (const Matrix* m : {&two.w_l2, &two.r, &two.w_l1})
            for (double v : m->span()) CHECK(v == 0.0);
        for (const Matrix* m : {&two.q_l2, &two.q_l1})
            for (double v : m->span()) CHECK((v >= -0.5 && v < 0.5));
    }
}

TEST_CASE("initialization: same seed, same network") {
    Rng a(17), b(17);
    CHECK(init_two_layer(6, 5, 2, a) == init_two_layer(6, 5, 2, b));
    Rng c(17), d(18);
    CHECK_FALSE(init_one_layer(6, 2, c) == init_one_layer(6, 2, d));
}

TEST_CASE("initialization: draw order is row-major, Q before T, layer 2 before layer 1") {
    Rng rng(5);
    const TwoLayerParams p = init_two_layer(3, 2, 2, rng);
    Rng ref(5);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(p.q_l2(i, j) == ref.uniform(-0.5, 0.5));
    for (std::size_t i = 0; i < 2; ++i) CHECK(p.t_l2[i] == ref.uniform(-0.5, 0.5));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(p.q_l1(i, j) == ref.uniform(-0.5, 0.5));
    for (std::size_t i = 0; i < 2; ++i) CHECK(p.t_l1[i] == ref.uniform(-0.5, 0.5));

    Rng f1(5), f2(5);
    const FeedForwardParams ff = init_feedforward(3, 2, 2, f1);
    const TwoLayerParams tw = init_two_layer(3, 2, 2, f2);
    CHECK(ff.q_l2 == tw.q_l2);
    CHECK(ff.t_l2 == tw.t_l2);
    CHECK(ff.q_l1 == tw.q_l1);
    CHECK(ff.t_l1 == tw.t_l1);
}

TEST_CASE("forward: W = 0 one-layer equals f(Qx + T)") {
    Rng rng(6);
    const OneLayerParams p = init_one_layer(4, 3, rng);
    const Vector x = random_input(4, rng);
    CHECK(max_diff(forward_one_layer(p, x).output, sigmoid(add(matvec(p.q, x), p.t))) < 1e-12);
}

TEST_CASE("forward: single neuron reproduces the scalar fixed point") {
    OneLayerParams p;
    p.q = Matrix{{0.7}};
    p.w = Matrix{{-1.3}};
    p.t = Vector{0.2};
    const double x = 0.4;
    double y = 0.0;
    for (int i = 0; i < 2000; ++i) y = 0.5 * y + 0.5 / (1.0 + std::exp(-(0.7 * x - 1.3 * y + 0.2)));
    CHECK(std::abs(forward_one_layer(p, Vector{x}).output[0] - y) < 1e-10);
}

TEST_CASE("property: zero-recurrence two-layer equals feed-forward") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const TwoLayerParams p = init_two_layer(5, 4, 2, rng);
        const FeedForwardParams ff{p.q_l2, p.t_l2, p.q_l1, p.t_l1};
        const Vector x = random_input(5, rng);
        const Equilibrium eq = forward_two_layer(p, x);
        CHECK(max_diff(eq.output, forward_feedforward(ff, x)) < 1e-8);
        CHECK(max_diff(eq.hidden, forward_feedforward_full(ff, x).hidden) < 1e-8);
    }
}

TEST_CASE("forward: zero network gives 0.5 everywhere, random outputs lie in (0,1)") {
    TwoLayerParams z;
    z.q_l2 = Matrix(3, 2);
    z.w_l2 = Matrix(3, 3);
    z.r = Matrix(3, 2);
    z.t_l2 = Vector(3);
    z.q_l1 = Matrix(2, 3);
    z.w_l1 = Matrix(2, 2);
    z.t_l1 = Vector(2);
    for (double v : forward_two_layer(z, Vector(2)).output) CHECK(std::abs(v - 0.5) < 1e-12);
    FeedForwardParams zf{z.q_l2, z.t_l2, z.q_l1, z.t_l1};
    for (double v : forward_feedforward(zf, Vector(2))) CHECK(v == 0.5);

    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        TwoLayerParams p = init_two_layer(3, 3, 2, rng);
        for (double& v : p.w_l2.span()) v = rng.uniform(-1, 1);
        for (double& v : p.r.span()) v = rng.uniform(-1, 1);
        for (double v : forward_two_layer(p, random_input(3, rng)).output) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("forward: dimension mismatch") {
    Rng rng(9);
    const Model m = init_model({Architecture::feedforward, 3, 2, 1}, rng);
    CHECK_THROWS_AS((void)forward(m, Vector(4)), Error);
    const Model m2 = init_model({Architecture::two_layer, 3, 2, 1}, rng);
    CHECK_THROWS_AS((void)forward(m2, Vector(2)), Error);
}

TEST_CASE("count_parameters") {
    CHECK(count_parameters(ArchDescriptor{Architecture::feedforward, 50, 5, 2}) ==
          50 * 5 + 5 + 2 * 5 + 2);
    CHECK(count_parameters(ArchDescriptor{Architecture::feedforward, 50, 5, 2}) == 267);
    CHECK(count_parameters(ArchDescriptor{Architecture::two_layer, 50, 5, 2}) == 306);
    CHECK(count_parameters(ArchDescriptor{Architecture::one_layer, 2, 0, 2}) == 2 * 2 + 2 * 2 + 2);
    CHECK_THROWS_AS((void)count_parameters(ArchDescriptor{Architecture::two_layer, 50, 0, 2}), Error);
    CHECK_THROWS_AS((void)count_parameters(ArchDescriptor{Architecture::one_layer, 0, 0, 2}), Error);
}

TEST_CASE("property: count_parameters equals the serialized scalar count") {
    Rng rng(10);
    for (auto arch : {Architecture::one_layer, Architecture::two_layer, Architecture::feedforward}) {
        for (std::size_t n_h : {1u, 5u}) {
            const Model m = init_model({arch, 50, n_h, 2}, rng);
            std::size_t stored = 0;
            for_each_block(m, [&](auto, std::size_t, std::size_t, auto span) { stored += span.size(); });
            CHECK(count_parameters(m) == stored);
            CHECK(count_serialized_scalars(serialize(m)) == stored);
        }
    }
}

TEST_CASE("persistence round-trip is bit-exact") {
    Rng rng(11);
    for (auto arch : {Architecture::one_layer, Architecture::two_layer, Architecture::feedforward}) {
        Model m = init_model({arch, 4, 3, 2}, rng);
        // subnormal and non-terminating values
        for_each_block(m, [&](auto, std::size_t, std::size_t, auto span) {
            for (double& v : span) v = rng.normal(0.0, 3.0) / 7.0;
            span[0] = 4.9e-324;
            span[span.size() - 1] = -1.0 / 3.0;
        });
        const Model back = parse(serialize(m));
        CHECK(back == m);
    }

    const auto path = std::filesystem::temp_directory_path() / "irnn_test_model_roundtrip.txt";
    Rng r2(12);
    const Model m = init_model({Architecture::two_layer, 50, 5, 2}, r2);
    save_model(m, path);
    CHECK(load_model(path) == m);
    std::filesystem::remove(path);
}

TEST_CASE("model file layout") {
    Rng rng(13);
    const std::string text = serialize(init_model({Architecture::two_layer, 3, 2, 1}, rng));
    std::istringstream in(text);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1 == "IRNN-MODEL v1");
    CHECK(l2 == "arch two-layer n_in 3 n_h 2 n_out 1");
    CHECK(l3 == "[matrix Q_L2 2 3]");
    for (const char* name : {"[matrix W_L2 2 2]", "[matrix R 2 1]", "[matrix T_L2 2 1]",
                             "[matrix Q_L1 1 2]", "[matrix W_L1 1 1]", "[matrix T_L1 1 1]"}) {
        CHECK(text.find(name) != std::string::npos);
    }
    Rng r2(13);
    const std::string one = serialize(init_model({Architecture::one_layer, 3, 0, 2}, r2));
    CHECK(one.find("arch one-layer n_in 3 n_h - n_out 2") != std::string::npos);
}

TEST_CASE("truncated model file is a parse error with a line number") {
    Rng rng(14);
    const std::string text = serialize(init_model({Architecture::one_layer, 3, 0, 2}, rng));
    // drop the last line
    const std::string cut = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    try {
        (void)parse(cut);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
        CHECK(e.has_index());
        CHECK(e.index() >= 1);
    }
    CHECK_THROWS_AS((void)parse(""), Error);
    CHECK_THROWS_AS((void)parse(text.substr(0, text.size() / 2)), Error);

    std::string bad = text;
    bad.replace(bad.find("[matrix W"), 9, "[matrix X");
    try {
        (void)parse(bad);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
    }
}

TEST_CASE("version mismatch is reported explicitly") {
    Rng rng(15);
    std::string text = serialize(init_model({Architecture::one_layer, 2, 0, 2}, rng));
    text.replace(0, 13, "IRNN-MODEL v2");
    try {
        (void)parse(text);
        FAIL("expected unsupported version");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unsupported_version);
    }
}

TEST_CASE("missing model file is an I/O error") {
    try {
        (void)load_model("/nonexistent/dir/model.txt");
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
    }
}
