#include "irnn/networks.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace irnn {

namespace {

constexpr const char* model_magic = "IRNN-MODEL";
constexpr const char* model_version = "v1";

void require_positive(std::size_t n, const char* what) {
    if (n == 0) {
        throw Error(ErrorCode::invalid_argument, std::string(what) + " must be positive");
    }
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.span()) v = rng.uniform(-0.5, 0.5);
    return m;
}

Vector uniform_vector(std::size_t n, Rng& rng) {
    Vector v(n);
    for (double& x : v) x = rng.uniform(-0.5, 0.5);
    return v;
}

Model zero_model(const ArchDescriptor& a) {
    switch (a.arch) {
        case Architecture::one_layer:
            return OneLayerParams{Matrix(a.n_out, a.n_in), Matrix(a.n_out, a.n_out),
                                  Vector(a.n_out)};
        case Architecture::two_layer:
            return TwoLayerParams{Matrix(a.n_hidden, a.n_in), Matrix(a.n_hidden, a.n_hidden),
                                  Matrix(a.n_hidden, a.n_out), Vector(a.n_hidden),
                                  Matrix(a.n_out, a.n_hidden), Matrix(a.n_out, a.n_out),
                                  Vector(a.n_out)};
        case Architecture::feedforward:
            return FeedForwardParams{Matrix(a.n_hidden, a.n_in), Vector(a.n_hidden),
                                     Matrix(a.n_out, a.n_hidden), Vector(a.n_out)};
    }
    throw Error(ErrorCode::invalid_argument, "unknown architecture");
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next(const char* expecting) {
        std::string line;
        if (!std::getline(in_, line)) {
            throw Error(ErrorCode::parse,
                        "model file truncated at line " + std::to_string(line_no_ + 1) +
                            ": expected " + expecting,
                        line_no_ + 1);
        }
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::parse,
                    "model file line " + std::to_string(line_no_) + ": " + what, line_no_);
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

std::size_t parse_count(const std::string& token, const LineReader& reader) {
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
        reader.fail("expected a non-negative integer, got '" + token + "'");
    }
    return static_cast<std::size_t>(std::stoull(token));
}

double parse_real(const std::string& token, const LineReader& reader) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') reader.fail("malformed number '" + token + "'");
    return v;
}

}  // namespace

OneLayerParams init_one_layer(std::size_t n_in, std::size_t n_out, Rng& rng) {
    require_positive(n_in, "n_in");
    require_positive(n_out, "n_out");
    OneLayerParams p;
    p.q = uniform_matrix(n_out, n_in, rng);
    p.t = uniform_vector(n_out, rng);
    p.w = Matrix(n_out, n_out);
    return p;
}

TwoLayerParams init_two_layer(std::size_t n_in, std::size_t n_hidden, std::size_t n_out,
                              Rng& rng) {
    require_positive(n_in, "n_in");
    require_positive(n_hidden, "n_h");
    require_positive(n_out, "n_out");
    TwoLayerParams p;
    p.q_l2 = uniform_matrix(n_hidden, n_in, rng);
    p.t_l2 = uniform_vector(n_hidden, rng);
    p.q_l1 = uniform_matrix(n_out, n_hidden, rng);
    p.t_l1 = uniform_vector(n_out, rng);
    p.w_l2 = Matrix(n_hidden, n_hidden);
    p.r = Matrix(n_hidden, n_out);
    p.w_l1 = Matrix(n_out, n_out);
    return p;
}

FeedForwardParams init_feedforward(std::size_t n_in, std::size_t n_hidden, std::size_t n_out,
                                   Rng& rng) {
    require_positive(n_in, "n_in");
    require_positive(n_hidden, "n_h");
    require_positive(n_out, "n_out");
    FeedForwardParams p;
    p.q_l2 = uniform_matrix(n_hidden, n_in, rng);
    p.t_l2 = uniform_vector(n_hidden, rng);
    p.q_l1 = uniform_matrix(n_out, n_hidden, rng);
    p.t_l1 = uniform_vector(n_out, rng);
    return p;
}

Model init_model(const ArchDescriptor& a, Rng& rng) {
    switch (a.arch) {
        case Architecture::one_layer: return init_one_layer(a.n_in, a.n_out, rng);
        case Architecture::two_layer: return init_two_layer(a.n_in, a.n_hidden, a.n_out, rng);
        case Architecture::feedforward:
            return init_feedforward(a.n_in, a.n_hidden, a.n_out, rng);
    }
    throw Error(ErrorCode::invalid_argument, "unknown architecture");
}

Equilibrium forward_one_layer(const OneLayerParams& params, const Vector& x,
                              const SolverConfig& cfg) {
    return solve_one_layer(params, x, cfg);
}

Equilibrium forward_two_layer(const TwoLayerParams& params, const Vector& x,
                              const SolverConfig& cfg) {
    return solve_two_layer(params, x, cfg);
}

FeedForwardActivations forward_feedforward_full(const FeedForwardParams& params,
                                                const Vector& x) {
    FeedForwardActivations a;
    a.hidden = sigmoid(add(matvec(params.q_l2, x), params.t_l2));
    a.output = sigmoid(add(matvec(params.q_l1, a.hidden), params.t_l1));
    return a;
}

Vector forward_feedforward(const FeedForwardParams& params, const Vector& x) {
    return forward_feedforward_full(params, x).output;
}

Equilibrium forward(const Model& model, const Vector& x, const SolverConfig& cfg) {
    if (const auto* p = std::get_if<OneLayerParams>(&model)) return solve_one_layer(*p, x, cfg);
    if (const auto* p = std::get_if<TwoLayerParams>(&model)) return solve_two_layer(*p, x, cfg);
    auto a = forward_feedforward_full(std::get<FeedForwardParams>(model), x);
    Equilibrium eq;
    eq.output = std::move(a.output);
    eq.hidden = std::move(a.hidden);
    eq.residual_norm = 0.0;
    eq.converged = true;
    return eq;
}

std::size_t count_parameters(const ArchDescriptor& a) {
    require_positive(a.n_in, "n_in");
    require_positive(a.n_out, "n_out");
    if (a.arch == Architecture::one_layer) {
        return a.n_out * a.n_in + a.n_out * a.n_out + a.n_out;
    }
    require_positive(a.n_hidden, "n_h");
    const std::size_t ff = a.n_hidden * a.n_in + a.n_hidden + a.n_out * a.n_hidden + a.n_out;
    if (a.arch == Architecture::feedforward) return ff;
    return ff + a.n_hidden * a.n_hidden + a.n_out * a.n_out + a.n_hidden * a.n_out;
}

std::size_t count_parameters(const Model& model) { return count_parameters(describe(model)); }

void write_model(std::ostream& out, const Model& model) {
    const ArchDescriptor a = describe(model);
    out << model_magic << ' ' << model_version << '\n';
    out << "arch " << architecture_name(a.arch) << " n_in " << a.n_in << " n_h ";
    if (a.arch == Architecture::one_layer) {
        out << '-';
    } else {
        out << a.n_hidden;
    }
    out << " n_out " << a.n_out << '\n';
    for_each_block(model, [&](std::string_view name, std::size_t rows, std::size_t cols,
                              std::span<const double> values) {
        out << "[matrix " << name << ' ' << rows << ' ' << cols << "]\n";
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                if (j != 0) out << ' ';
                out << format_real(values[i * cols + j]);
            }
            out << '\n';
        }
    });
}

Model read_model(std::istream& in) {
    LineReader reader(in);

    {
        std::istringstream header(reader.next("model header"));
        std::string magic, version, extra;
        header >> magic >> version;
        if (magic != model_magic) reader.fail("not an IRNN model file");
        if (version != model_version) {
            throw Error(ErrorCode::unsupported_version,
                        "unsupported model version '" + version + "' (supported: " +
                            model_version + ")",
                        reader.line());
        }
        if (header >> extra) reader.fail("unexpected trailing text in header");
    }

    ArchDescriptor a;
    {
        std::istringstream line(reader.next("architecture line"));
        std::string k_arch, arch, k_in, n_in, k_h, n_h, k_out, n_out, extra;
        line >> k_arch >> arch >> k_in >> n_in >> k_h >> n_h >> k_out >> n_out;
        if (k_arch != "arch" || k_in != "n_in" || k_h != "n_h" || k_out != "n_out" ||
            (line >> extra)) {
            reader.fail("malformed architecture line");
        }
        if (arch == "one-layer") {
            a.arch = Architecture::one_layer;
        } else if (arch == "two-layer") {
            a.arch = Architecture::two_layer;
        } else if (arch == "feedforward") {
            a.arch = Architecture::feedforward;
        } else {
            reader.fail("unknown architecture '" + arch + "'");
        }
        a.n_in = parse_count(n_in, reader);
        a.n_out = parse_count(n_out, reader);
        if (a.arch == Architecture::one_layer) {
            if (n_h != "-") reader.fail("one-layer models take n_h -");
        } else {
            a.n_hidden = parse_count(n_h, reader);
        }
        if (a.n_in == 0 || a.n_out == 0 ||
            (a.arch != Architecture::one_layer && a.n_hidden == 0)) {
            reader.fail("dimensions must be positive");
        }
    }

    Model model = zero_model(a);
    for_each_block(model, [&](std::string_view name, std::size_t rows, std::size_t cols,
                              std::span<double> values) {
        const std::string expected = "[matrix " + std::string(name) + ' ' +
                                     std::to_string(rows) + ' ' + std::to_string(cols) + ']';
        const std::string header = reader.next(expected.c_str());
        if (header != expected) {
            reader.fail("expected '" + expected + "', got '" + header + "'");
        }
        for (std::size_t i = 0; i < rows; ++i) {
            std::istringstream line(reader.next("matrix row"));
            std::string token;
            std::size_t j = 0;
            while (line >> token) {
                if (j == cols) reader.fail("too many values in row of " + std::string(name));
                values[i * cols + j++] = parse_real(token, reader);
            }
            if (j != cols) reader.fail("too few values in row of " + std::string(name));
        }
    });
    validate(model);
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    write_model(out, model);
    out.flush();
    if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    return read_model(in);
}

}  // namespace irnn
