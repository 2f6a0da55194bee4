#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mildns/common.hpp"
#include "mildns/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mildns - mild Navier-Stokes solutions on a periodic box"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 1;
    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    run->add_option("config", config_path, "key = value config file")->required();
    run->add_option("--set", overrides, "override a config key, e.g. --set grid.n=64");
    run->add_option("--threads", threads, "worker cap for parallel loops");

    auto* list = app.add_subcommand("list", "list available scenarios");

    std::string snapshot_path;
    auto* check = app.add_subcommand("check", "validate a field snapshot");
    check->add_option("snapshot", snapshot_path, "snapshot file (.mnsf)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& info : mildns::list_scenarios())
            std::cout << info.name << "  -  " << info.description << "\n";
        return 0;
    }

    if (check->parsed()) return mildns::check_snapshot(snapshot_path, std::cout);

    mildns::set_threads(threads);
    mildns::ScenarioConfig config;
    try {
        config = mildns::ScenarioConfig::from_file(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw mildns::ConfigError("--set expects key=value, got '" + kv + "'");
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    } catch (const mildns::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return mildns::run_scenario(config, std::cout);
}
