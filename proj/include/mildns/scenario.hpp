#pragma once

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mildns {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key = value configuration with dotted sections; '#' starts a comment.
// --set overrides replace file keys.
class ScenarioConfig {
public:
    static ScenarioConfig from_file(const std::string& path);
    static ScenarioConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string require(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double require_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int require_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

struct ScenarioInfo {
    std::string name;
    std::string description;
};

std::vector<ScenarioInfo> list_scenarios();

// Runs the configured scenario, writing report.json, tables/*.csv and
// snapshots/*.mnsf under the output directory (MILDNS_OUT env overrides the
// config key). Exit codes: 0 success or finding, 2 config error, 3 I/O error.
int run_scenario(const ScenarioConfig& config, std::ostream& log);

// `mildns check`: validates the snapshot format and reports divergence.
int check_snapshot(const std::string& path, std::ostream& log);

}  // namespace mildns
