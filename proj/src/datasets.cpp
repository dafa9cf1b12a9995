#include "irnn/datasets.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace irnn {

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::parse, "dataset line " + std::to_string(line) + ": " + what, line);
}

double parse_real(const std::string& token, std::size_t line) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) {
        parse_fail(line, "malformed number '" + token + "'");
    }
    return v;
}

double affine(double v, double lo, double hi, double out_lo, double out_hi) {
    return out_lo + (v - lo) * (out_hi - out_lo) / (hi - lo);
}

}  // namespace

std::array<XorSample, 4> xor_dataset() {
    return {{
        {Vector{0.0, 0.0}, 0.0, 1.0},
        {Vector{0.0, 1.0}, 1.0, 0.0},
        {Vector{1.0, 0.0}, 1.0, 0.0},
        {Vector{1.0, 1.0}, 0.0, 0.0},
    }};
}

Vector oscillator_trajectory(double omega0, double delta, double x0, double v0,
                             std::size_t length, double dt) {
    if (!(omega0 > 0.0) || !(delta >= 0.0) || length < 2 || !(dt > 0.0) ||
        !std::isfinite(x0) || !std::isfinite(v0)) {
        throw Error(ErrorCode::invalid_argument,
                    "oscillator_trajectory: need omega0 > 0, delta >= 0, length >= 2, dt > 0");
    }
    Vector x(length);
    if (std::abs(delta - omega0) <= critical_band) {
        // (A + B·t)·e^{−δt}
        const double a = x0;
        const double b = v0 + delta * x0;
        for (std::size_t k = 0; k < length; ++k) {
            const double t = static_cast<double>(k) * dt;
            x[k] = (a + b * t) * std::exp(-delta * t);
        }
    } else if (delta < omega0) {
        // e^{−δt}·(A·cos ωt + B·sin ωt)
        const double omega = std::sqrt(omega0 * omega0 - delta * delta);
        const double a = x0;
        const double b = (v0 + delta * x0) / omega;
        for (std::size_t k = 0; k < length; ++k) {
            const double t = static_cast<double>(k) * dt;
            x[k] = std::exp(-delta * t) * (a * std::cos(omega * t) + b * std::sin(omega * t));
        }
    } else {
        // A·e^{r1·t} + B·e^{r2·t}
        const double root = std::sqrt(delta * delta - omega0 * omega0);
        const double r1 = -delta + root;
        const double r2 = -delta - root;
        const double a = (v0 - r2 * x0) / (r1 - r2);
        const double b = x0 - a;
        for (std::size_t k = 0; k < length; ++k) {
            const double t = static_cast<double>(k) * dt;
            x[k] = a * std::exp(r1 * t) + b * std::exp(r2 * t);
        }
    }
    x[0] = x0;
    return x;
}

Vector normalize_targets(double omega0, double delta) {
    using M = TargetMap;
    if (!(omega0 >= M::omega_lo && omega0 <= M::omega_hi) ||
        !(delta >= M::delta_lo && delta <= M::delta_hi)) {
        throw Error(ErrorCode::invalid_argument,
                    "targets out of range: omega0=" + format_real(omega0) +
                        " (expected [1,2]), delta=" + format_real(delta) + " (expected [0,2])");
    }
    return Vector{affine(omega0, M::omega_lo, M::omega_hi, M::out_lo, M::out_hi),
                  affine(delta, M::delta_lo, M::delta_hi, M::out_lo, M::out_hi)};
}

Vector denormalize_targets(const Vector& normalized) {
    using M = TargetMap;
    if (normalized.size() != 2) {
        throw Error(ErrorCode::dimension_mismatch, "denormalize_targets expects 2 values");
    }
    return Vector{affine(normalized[0], M::out_lo, M::out_hi, M::omega_lo, M::omega_hi),
                  affine(normalized[1], M::out_lo, M::out_hi, M::delta_lo, M::delta_hi)};
}

PendulumDataset generate_pendulum_dataset(std::size_t n_samples, std::size_t length,
                                          std::uint64_t seed) {
    if (n_samples < 5) {
        throw Error(ErrorCode::invalid_argument, "pendulum dataset needs at least 5 samples");
    }
    if (length < 2) throw Error(ErrorCode::invalid_argument, "trajectory length must be >= 2");

    Rng rng(seed);
    PendulumDataset data;
    data.meta.length = length;
    data.meta.dt = pendulum_dt;
    data.meta.seed = seed;
    data.meta.n_train = n_samples * 4 / 5;
    data.meta.n_test = n_samples - data.meta.n_train;
    data.train.reserve(data.meta.n_train);
    data.test.reserve(data.meta.n_test);

    std::set<std::array<double, 4>> seen;
    for (std::size_t i = 0; i < n_samples; ++i) {
        OscillatorSample s;
        do {
            s.omega0 = rng.uniform(TargetMap::omega_lo, TargetMap::omega_hi);
            s.delta = rng.uniform(TargetMap::delta_lo, TargetMap::delta_hi);
            s.x0 = rng.normal(0.0, 2.0);
            s.v0 = rng.normal(0.0, 2.0);
        } while (!seen.insert({s.x0, s.v0, s.omega0, s.delta}).second);
        s.trajectory = oscillator_trajectory(s.omega0, s.delta, s.x0, s.v0, length, pendulum_dt);
        (i < data.meta.n_train ? data.train : data.test).push_back(std::move(s));
    }
    return data;
}

void write_pendulum_csv(std::ostream& out, const PendulumDataset& data) {
    const std::size_t length = data.meta.length;
    out << "# IRNN-PENDULUM v1, L=" << length << ", dt=" << shortest(data.meta.dt)
        << ", seed=" << data.meta.seed << '\n';
    for (std::size_t k = 0; k < length; ++k) out << "x_" << k << ',';
    out << "omega0,delta,x0,v0,split\n";
    auto rows = [&](const std::vector<OscillatorSample>& samples, const char* split) {
        for (const auto& s : samples) {
            for (double v : s.trajectory) out << format_real(v) << ',';
            out << format_real(s.omega0) << ',' << format_real(s.delta) << ','
                << format_real(s.x0) << ',' << format_real(s.v0) << ',' << split << '\n';
        }
    };
    rows(data.train, "train");
    rows(data.test, "test");
}

PendulumDataset read_pendulum_csv(std::istream& in) {
    PendulumDataset data;
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&](const char* expecting) -> bool {
        if (!std::getline(in, line)) {
            if (expecting != nullptr) parse_fail(line_no + 1, std::string("expected ") + expecting);
            return false;
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    next_line("dataset header");
    {
        unsigned long long length = 0;
        unsigned long long seed = 0;
        double dt = 0.0;
        char version[16] = {};
        if (std::sscanf(line.c_str(), "# IRNN-PENDULUM %15[^,], L=%llu, dt=%lf, seed=%llu",
                        version, &length, &dt, &seed) != 4) {
            parse_fail(line_no, "malformed header '" + line + "'");
        }
        if (std::string(version) != "v1") {
            throw Error(ErrorCode::unsupported_version,
                        "unsupported dataset version '" + std::string(version) + "'", line_no);
        }
        if (length < 2 || !(dt > 0.0)) parse_fail(line_no, "invalid L or dt in header");
        data.meta.length = static_cast<std::size_t>(length);
        data.meta.dt = dt;
        data.meta.seed = seed;
    }

    next_line("column header");
    {
        std::string expected;
        for (std::size_t k = 0; k < data.meta.length; ++k) expected += "x_" + std::to_string(k) + ',';
        expected += "omega0,delta,x0,v0,split";
        if (line != expected) parse_fail(line_no, "column header does not match L");
    }

    const std::size_t fields = data.meta.length + 5;
    while (next_line(nullptr)) {
        if (line.empty()) continue;
        std::vector<std::string> tokens;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) tokens.push_back(token);
        if (tokens.size() != fields) {
            parse_fail(line_no, "expected " + std::to_string(fields) + " fields, got " +
                                    std::to_string(tokens.size()));
        }
        OscillatorSample s;
        s.trajectory = Vector(data.meta.length);
        for (std::size_t k = 0; k < data.meta.length; ++k) s.trajectory[k] = parse_real(tokens[k], line_no);
        s.omega0 = parse_real(tokens[data.meta.length], line_no);
        s.delta = parse_real(tokens[data.meta.length + 1], line_no);
        s.x0 = parse_real(tokens[data.meta.length + 2], line_no);
        s.v0 = parse_real(tokens[data.meta.length + 3], line_no);
        const std::string& split = tokens.back();
        if (split == "train") {
            data.train.push_back(std::move(s));
        } else if (split == "test") {
            data.test.push_back(std::move(s));
        } else {
            parse_fail(line_no, "unknown split '" + split + "'");
        }
    }
    data.meta.n_train = data.train.size();
    data.meta.n_test = data.test.size();
    return data;
}

void save_pendulum_dataset(const PendulumDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    write_pendulum_csv(out, data);
    out.flush();
    if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

PendulumDataset load_pendulum_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    return read_pendulum_csv(in);
}

}  // namespace irnn
