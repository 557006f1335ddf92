#pragma once

#include "euwick/io.hpp"

namespace euwick {

struct CheckResult {
    std::string name;
    std::string ref;  // names the mathematical identity being checked
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    json extra;
};

/// Collects check results into a versioned JSON report with the resolved
/// config hash and seed embedded.
class Report {
  public:
    explicit Report(std::string title) : title_(std::move(title)) {}

    void add(CheckResult r) { checks_.push_back(std::move(r)); }
    CheckResult& add(const std::string& name, const std::string& ref, double value,
                     double tolerance);

    bool all_passed() const;
    const std::vector<CheckResult>& checks() const { return checks_; }

    json to_json(const json& resolved_config, unsigned long seed) const;
    void write(const std::string& path, const json& resolved_config, unsigned long seed) const;

  private:
    std::string title_;
    std::vector<CheckResult> checks_;
};

}  // namespace euwick
