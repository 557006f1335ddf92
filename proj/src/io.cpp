#include "euwick/io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace euwick {

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) known = true;
        if (!known)
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace

RunConfig parse_config(const json& j) {
    reject_unknown(j, {"background", "lattice", "parametrix", "output_dir", "seed", "task",
                       "tolerances"},
                   "config");
    RunConfig c;

    const json& b = j.at("background");
    reject_unknown(b, {"dim", "kind", "extent", "c", "A", "metric_diag"}, "background");
    BackgroundGeometry& g = c.background;
    g.dim = b.at("dim").get<int>();
    std::string kind = b.value("kind", "torus");
    if (kind == "torus")
        g.kind = BackgroundGeometry::Kind::FlatTorus;
    else if (kind == "patch")
        g.kind = BackgroundGeometry::Kind::FlatPatch;
    else
        throw std::invalid_argument("background kind must be 'torus' or 'patch'");
    g.extent = b.at("extent").get<std::vector<double>>();
    g.c_const = b.value("c", 0.0);
    g.metric = Eigen::MatrixXd::Identity(g.dim, g.dim);
    if (b.contains("metric_diag")) {
        auto d = b.at("metric_diag").get<std::vector<double>>();
        if (static_cast<int>(d.size()) != g.dim)
            throw std::invalid_argument("metric_diag needs one entry per dimension");
        for (int i = 0; i < g.dim; ++i) g.metric(i, i) = d[i];
    }
    g.covector_A = Eigen::VectorXd::Zero(g.dim);
    if (b.contains("A")) {
        auto a = b.at("A").get<std::vector<double>>();
        if (static_cast<int>(a.size()) != g.dim)
            throw std::invalid_argument("A needs one entry per dimension");
        for (int i = 0; i < g.dim; ++i) g.covector_A[i] = a[i];
    }
    g.validate();

    const json& l = j.at("lattice");
    reject_unknown(l, {"n", "refinements"}, "lattice");
    if (l.contains("n"))
        c.lattice_sizes = {l.at("n").get<int>()};
    else
        c.lattice_sizes = l.at("refinements").get<std::vector<int>>();
    if (c.lattice_sizes.empty()) throw std::invalid_argument("lattice list is empty");

    if (j.contains("parametrix")) {
        const json& p = j.at("parametrix");
        reject_unknown(p, {"nu", "order"}, "parametrix");
        c.nu = p.value("nu", 1.0);
        c.hadamard_order = p.value("order", 3);
    }
    c.output_dir = j.value("output_dir", ".");
    c.seed = j.value("seed", 20240711ul);
    c.task = j.value("task", json::object());
    c.tolerances = j.value("tolerances", json::object());
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    return parse_config(j);
}

std::string config_hash(const json& j) {
    std::string s = j.dump();  // nlohmann objects iterate in sorted key order
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json config_to_json(const RunConfig& c) {
    json b;
    b["dim"] = c.background.dim;
    b["kind"] = c.background.kind == BackgroundGeometry::Kind::FlatTorus ? "torus" : "patch";
    b["extent"] = c.background.extent;
    b["c"] = c.background.c_const;
    std::vector<double> a(c.background.covector_A.data(),
                          c.background.covector_A.data() + c.background.dim);
    b["A"] = a;
    std::vector<double> md;
    for (int i = 0; i < c.background.dim; ++i) md.push_back(c.background.metric(i, i));
    b["metric_diag"] = md;
    json j;
    j["background"] = b;
    j["lattice"] = {{"refinements", c.lattice_sizes}};
    j["parametrix"] = {{"nu", c.nu}, {"order", c.hadamard_order}};
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["task"] = c.task;
    j["tolerances"] = c.tolerances;
    return j;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::uint64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) {
            double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
}

Eigen::MatrixXd read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    Eigen::MatrixXd m(rows, cols);
    for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), 8);
            m(i, j) = v;
        }
    if (!in) throw std::runtime_error("truncated matrix file: " + path);
    return m;
}

}  // namespace euwick
