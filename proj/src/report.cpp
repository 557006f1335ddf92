#include "euwick/report.hpp"

#include <cmath>
#include <fstream>

namespace euwick {

CheckResult& Report::add(const std::string& name, const std::string& ref, double value,
                         double tolerance) {
    CheckResult r;
    r.name = name;
    r.ref = ref;
    r.value = value;
    r.tolerance = tolerance;
    r.passed = std::isfinite(value) && std::abs(value) <= tolerance;
    checks_.push_back(std::move(r));
    return checks_.back();
}

bool Report::all_passed() const {
    for (const auto& c : checks_)
        if (!c.passed) return false;
    return true;
}

json Report::to_json(const json& resolved_config, unsigned long seed) const {
    json checks = json::array();
    for (const auto& c : checks_) {
        json e;
        e["name"] = c.name;
        e["ref"] = c.ref;
        e["passed"] = c.passed;
        e["value"] = c.value;
        e["tolerance"] = c.tolerance;
        if (!c.extra.is_null()) e["detail"] = c.extra;
        checks.push_back(std::move(e));
    }
    json j;
    j["title"] = title_;
    j["format_version"] = 1;
    j["config"] = resolved_config;
    j["config_hash"] = config_hash(resolved_config);
    j["seed"] = seed;
    j["all_passed"] = all_passed();
    j["checks"] = std::move(checks);
    return j;
}

void Report::write(const std::string& path, const json& resolved_config,
                   unsigned long seed) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(resolved_config, seed).dump(2) << '\n';
}

}  // namespace euwick
