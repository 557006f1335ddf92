#pragma once

#include <string>

#include <json.hpp>

#include "euwick/geometry.hpp"

namespace euwick {

using json = nlohmann::json;

/// Resolved run configuration shared by the command-line pipelines.
struct RunConfig {
    BackgroundGeometry background;
    std::vector<int> lattice_sizes;  // single entry or a refinement list
    double nu = 1.0;
    int hadamard_order = 3;
    std::string output_dir = ".";
    unsigned long seed = 20240711;
    json task;        // free-form, interpreted per subcommand
    json tolerances;  // overrides, applied per check name

    int n() const { return lattice_sizes.front(); }
};

/// Parses and validates a configuration object; unknown keys are rejected.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

/// Canonical FNV-1a hash of a JSON value (dump with sorted keys).
std::string config_hash(const json& j);
json config_to_json(const RunConfig& c);

/// Matrix round-trip: CSV for plot fodder, raw binary for caching
/// ([u64 rows][u64 cols][f64 row-major]).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(const std::string& path);

}  // namespace euwick
