#include "mildns/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "mildns/calculus.hpp"
#include "mildns/picard.hpp"
#include "mildns/reference.hpp"
#include "mildns/snapshot.hpp"
#include "mildns/spaces.hpp"

namespace mildns {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct OutputDirs {
    fs::path root, tables, snapshots;
};

OutputDirs prepare_output(const ScenarioConfig& cfg) {
    std::string out = cfg.get("out", "out");
    if (const char* env = std::getenv("MILDNS_OUT")) out = env;
    OutputDirs dirs{out, fs::path(out) / "tables", fs::path(out) / "snapshots"};
    std::error_code ec;
    fs::create_directories(dirs.tables, ec);
    if (ec) throw IoError("cannot create output directory " + dirs.tables.string());
    fs::create_directories(dirs.snapshots, ec);
    if (ec) throw IoError("cannot create output directory " + dirs.snapshots.string());
    return dirs;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string());
    os << text;
    if (!os) throw IoError("write failed for " + path.string());
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    write_text(path, os.str());
}

json config_echo(const ScenarioConfig& cfg) {
    json j;
    for (const auto& [k, v] : cfg.entries()) j[k] = v;
    return j;
}

GridPtr grid_from_config(const ScenarioConfig& cfg) {
    const int d = cfg.require_int("grid.d");
    const int n = cfg.require_int("grid.n");
    const double L = cfg.require_double("grid.L");
    return make_grid(d, n, L);
}

SpaceParams params_from_config(const ScenarioConfig& cfg, int d) {
    return admissible_params(d, cfg.require_double("params.p"), cfg.require_double("params.s"),
                             cfg.require_double("params.qtilde"));
}

// Named initial-datum profiles; all divergence-free and zero-mean.
Field datum_from_config(const ScenarioConfig& cfg, const GridPtr& grid) {
    const std::string profile = cfg.get("datum.profile", "taylor-green");
    const double amplitude = cfg.get_double("datum.amplitude", 1.0);
    if (profile == "taylor-green") return taylor_green(grid, amplitude);
    if (profile == "random") {
        const int band = cfg.get_int("datum.band", grid->samples_per_axis() / 4);
        const std::uint64_t seed = cfg.get_seed("datum.seed", cfg.get_seed("seed", 1));
        Field f = leray_project(
            random_band_limited(grid, grid->dim(), band, seed).projected_zero_mean());
        const double m = f.max_abs();
        return m > 0.0 ? f * (amplitude / m) : f;
    }
    if (profile == "snapshot") {
        const Field f = read_snapshot(cfg.require("datum.snapshot"));
        if (!f.grid()->same_as(*grid)) throw ConfigError("datum.snapshot grid does not match grid.*");
        return f * amplitude;
    }
    throw ConfigError("datum.profile must be taylor-green, random or snapshot");
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(key + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(key + " is empty");
    return out;
}

// ---------------------------------------------------------------- scenarios

void scenario_kernel_decay(const ScenarioConfig& cfg, const OutputDirs& dirs, json& report) {
    KernelSampleRequest req;
    req.d = cfg.get_int("kernel.d", 2);
    req.s = cfg.get_double("kernel.s", 0.0);
    req.t = cfg.get_double("kernel.t", 1.0);
    req.n = cfg.get_int("kernel.n", req.d == 2 ? 1024 : 128);
    req.box_length = cfg.get_double("kernel.L", req.d == 2 ? 128.0 : 32.0);
    if (cfg.has("kernel.radii")) {
        req.radii = parse_list(cfg.require("kernel.radii"), "kernel.radii");
    } else {
        for (int i = 0; i < 10; ++i) req.radii.push_back(1.0 + 7.0 * i / 9.0);
    }
    const double hom = req.d + req.s + 1.0;
    req.gammas = {{hom - 2.0, 1.0}, {0.5 * hom, 0.25 * hom}};

    const OseenKernelSample base = oseen_kernel_sample(req);

    // Self-similarity partner: K_{4t}(2x) scaled by 2^{d+s+1}.
    KernelSampleRequest dil = req;
    dil.t = 4.0 * req.t;
    dil.radii.clear();
    for (const auto& pt : base.points) dil.radii.push_back(2.0 * pt.radius);
    const OseenKernelSample dilated = oseen_kernel_sample(dil);

    double self_sim_dev = 0.0;
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        const double ratio = base.points[i].magnitude /
                             (std::pow(2.0, hom) * dilated.points[i].magnitude);
        self_sim_dev = std::max(self_sim_dev, std::abs(ratio - 1.0));
    }

    // Refinement stability of the decay table at half resolution.
    KernelSampleRequest coarse = req;
    coarse.n = req.n / 2;
    const OseenKernelSample half = oseen_kernel_sample(coarse);
    double refine_dev = 0.0;
    for (std::size_t i = 0; i < base.points.size(); ++i)
        refine_dev = std::max(refine_dev, std::abs(half.points[i].magnitude / base.points[i].magnitude - 1.0));

    double sup_bound = 0.0;
    std::vector<std::vector<std::string>> rows;
    const int d = req.d;
    for (const auto& pt : base.points) {
        const double decay_ratio = pt.magnitude * (1.0 + std::pow(pt.radius, hom));
        sup_bound = std::max(sup_bound, decay_ratio);
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l)
                for (int j = 0; j < d; ++j) {
                    const double v = pt.entries[(i * d + l) * d + j];
                    std::ostringstream entry;
                    entry << i << ":" << l << j;
                    rows.push_back({fmt(pt.radius), fmt(req.t), entry.str(), fmt(v),
                                    fmt(std::abs(v) * std::pow(req.t, req.gammas[0].second) *
                                        std::pow(pt.radius, req.gammas[0].first))});
                }
        rows.push_back({fmt(pt.radius), fmt(req.t), "magnitude", fmt(pt.magnitude),
                        fmt(pt.bound_ratios[0])});
    }
    write_csv(dirs.tables / "kernel_decay.csv", {"radius", "t", "entry", "value", "bound_ratio"}, rows);

    report["kernel"] = {{"d", req.d}, {"s", req.s}, {"t", req.t}, {"n", req.n},
                        {"L", req.box_length}, {"surrogate_width", base.surrogate_width}};
    report["self_similarity_max_deviation"] = self_sim_dev;
    report["refinement_max_deviation"] = refine_dev;
    report["sup_decay_bound_ratio"] = sup_bound;
}

void scenario_bilinear_scaling(const ScenarioConfig& cfg, const OutputDirs& dirs, json& report) {
    auto grid = grid_from_config(cfg);
    auto params = params_from_config(cfg, grid->dim());
    const Field u0 = datum_from_config(cfg, grid);

    std::vector<double> horizons;
    if (cfg.has("probe.horizons")) {
        horizons = parse_list(cfg.require("probe.horizons"), "probe.horizons");
    } else {
        const double t_lo = cfg.get_double("probe.T_min", 1.0);
        const double t_hi = cfg.get_double("probe.T_max", 16.0);
        const int count = cfg.get_int("probe.count", 6);
        for (int i = 0; i < count; ++i)
            horizons.push_back(t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (count - 1)));
    }

    const auto probe = bilinear_scaling_probe(u0, params, horizons,
                                              cfg.get_int("time.geometric_nodes", 16),
                                              cfg.get_int("time.uniform_nodes", 28));

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : probe.rows)
        rows.push_back({fmt(r.T), fmt(r.h_norm_B), fmt(r.g_norm_u), fmt(r.ratio_h),
                        fmt(probe.slope_h), fmt(r.g_norm_B), fmt(r.ratio_g), fmt(probe.slope_g)});
    write_csv(dirs.tables / "bilinear_scaling.csv",
              {"T", "h_norm_B", "g_norm_u", "ratio", "fitted_slope", "g_norm_B", "ratio_g",
               "fitted_slope_g"},
              rows);

    report["slope_h"] = probe.slope_h;
    report["slope_g"] = probe.slope_g;
    report["formula_h"] = probe.formula_h;
    report["formula_g"] = probe.formula_g;
    report["slope_h_deviation"] = std::abs(probe.slope_h - probe.formula_h);
    report["slope_g_deviation"] = std::abs(probe.slope_g - probe.formula_g);
}

void scenario_threshold_scan(const ScenarioConfig& cfg, const OutputDirs& dirs, json& report) {
    auto grid = grid_from_config(cfg);
    auto params = params_from_config(cfg, grid->dim());
    const Field profile = datum_from_config(cfg, grid);
    const double T = cfg.require_double("time.T");
    DuhamelScheme scheme = DuhamelScheme::standard(T, cfg.get_int("time.geometric_nodes", 16),
                                                   cfg.get_int("time.uniform_nodes", 28));

    std::vector<double> amplitudes;
    if (cfg.has("scan.amplitudes")) {
        amplitudes = parse_list(cfg.require("scan.amplitudes"), "scan.amplitudes");
    } else {
        const double a_lo = cfg.get_double("scan.A_min", 0.25);
        const double a_hi = cfg.get_double("scan.A_max", 8.0);
        const int count = cfg.get_int("scan.count", 8);
        for (int i = 0; i < count; ++i)
            amplitudes.push_back(a_lo * std::pow(a_hi / a_lo, static_cast<double>(i) / (count - 1)));
    }

    PicardOptions opts;
    opts.tol = cfg.get_double("tol", 1e-9);
    opts.max_iter = cfg.get_int("picard.max_iter", 60);
    const auto scan = threshold_scan(profile, params, scheme, amplitudes, opts);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : scan.rows)
        rows.push_back({fmt(r.amplitude), fmt(r.lhs_eq1), fmt(r.lhs_eq6),
                        r.converged ? "1" : "0", std::to_string(r.iterations),
                        fmt(r.final_residual)});
    write_csv(dirs.tables / "threshold_scan.csv",
              {"A", "lhs_eq1", "lhs_eq6", "converged", "iters", "final_residual"}, rows);

    report["delta_hat"] = scan.delta_hat;
    report["monotone_boundary"] = scan.monotone_boundary;
    report["first_failure_index"] = scan.first_failure;
    report["status"] = scan.first_failure >= 0 ? "divergence-observed" : "all-converged";
}

void scenario_picard_taylor_green(const ScenarioConfig& cfg, const OutputDirs& dirs, json& report) {
    auto grid = grid_from_config(cfg);
    if (grid->dim() != 2) throw ConfigError("grid.d must be 2 for picard-taylor-green");
    auto params = params_from_config(cfg, 2);
    const double T = cfg.require_double("time.T");
    const double dt = cfg.get_double("rk4.dt", T * 1e-4);
    const double amplitude = cfg.get_double("datum.amplitude", 0.05);

    const Field u0 = taylor_green(grid, amplitude);
    DuhamelScheme scheme = DuhamelScheme::aligned(T, dt, cfg.get_int("time.uniform_nodes", 28));

    PicardOptions opts;
    opts.tol = cfg.get_double("tol", 1e-10);
    const MildSolution mild = picard_solve(u0, params, scheme, opts);
    const ReferenceRun ref = rk4_solve(u0, T, dt, scheme.times);
    const double deviation = compare(mild.trajectory, ref);

    write_snapshot((dirs.snapshots / "initial.mnsf").string(), u0);
    write_snapshot((dirs.snapshots / "final.mnsf").string(),
                   mild.trajectory.field(mild.trajectory.size() - 1));
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : ref.energy_series) rows.push_back({fmt(e.first), fmt(e.second)});
    write_csv(dirs.tables / "reference_energy.csv", {"t", "kinetic_energy"}, rows);

    report["converged"] = mild.report.converged;
    report["diverged"] = mild.report.diverged;
    report["iterations"] = mild.report.iterations;
    report["final_residual"] = mild.report.final_residual;
    report["comparison_max_rel_l2"] = deviation;
    report["smallness_lhs_eq1"] =
        smallness_lhs(u0, params, T, SmallnessVariant::HeatSup).value;
    report["iteration_report"] = json::parse(mild.report.to_json());
    report["status"] = mild.report.diverged ? "diverged" : "ok";
}

void scenario_norm_equivalence(const ScenarioConfig& cfg, const OutputDirs& dirs, json& report) {
    auto grid = grid_from_config(cfg);
    auto params = params_from_config(cfg, grid->dim());
    const double T = cfg.get_double("time.T", 1.0);
    const int seeds = cfg.get_int("seeds", 20);
    const std::uint64_t seed0 = cfg.get_seed("seed", 1);
    const int band = cfg.get_int("datum.band", grid->samples_per_axis() / 4);

    std::vector<std::vector<std::string>> rows;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (int i = 0; i < seeds; ++i) {
        const Field u0 = leray_project(
            random_band_limited(grid, grid->dim(), band, seed0 + i).projected_zero_mean());
        const double lhs1 = smallness_lhs(u0, params, T, SmallnessVariant::HeatSup).value;
        const double lhs6 = smallness_lhs(u0, params, T, SmallnessVariant::Triebel).value;
        const double ratio = lhs6 / lhs1;
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
        rows.push_back({std::to_string(seed0 + i), fmt(lhs1), fmt(lhs6), fmt(ratio)});
    }
    write_csv(dirs.tables / "norm_equivalence.csv", {"seed", "lhs_eq1", "lhs_eq6", "ratio"}, rows);

    report["ratio_min"] = rmin;
    report["ratio_max"] = rmax;
    report["two_sided_spread"] = rmax / rmin;
}

struct ScenarioEntry {
    std::string description;
    std::function<void(const ScenarioConfig&, const OutputDirs&, json&)> run;
};

const std::map<std::string, ScenarioEntry>& registry() {
    static const std::map<std::string, ScenarioEntry> reg = {
        {"kernel-decay",
         {"Oseen kernel self-similarity and decay-bound tables", scenario_kernel_decay}},
        {"bilinear-scaling",
         {"T-scaling of the bilinear estimate ratios with fitted slopes", scenario_bilinear_scaling}},
        {"threshold-scan",
         {"Picard convergence vs amplitude with smallness left-hand sides", scenario_threshold_scan}},
        {"picard-taylor-green",
         {"Mild solution for the Taylor-Green datum compared against the RK4 oracle",
          scenario_picard_taylor_green}},
        {"norm-equivalence",
         {"Heat-characterized Triebel norm against the smallness LHS over seeded data",
          scenario_norm_equivalence}},
    };
    return reg;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_string(const std::string& text) {
    ScenarioConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_string(ss.str());
}

std::string ScenarioConfig::require(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(key + " required");
    return it->second;
}

std::string ScenarioConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ScenarioConfig::require_double(const std::string& key) const {
    const std::string v = require(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as a number");
    }
}

double ScenarioConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? require_double(key) : fallback;
}

int ScenarioConfig::require_int(const std::string& key) const {
    const double v = require_double(key);
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9) throw ConfigError(key + ": expected an integer");
    return i;
}

int ScenarioConfig::get_int(const std::string& key, int fallback) const {
    return has(key) ? require_int(key) : fallback;
}

std::uint64_t ScenarioConfig::get_seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = require(key);
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as a seed");
    }
}

std::vector<ScenarioInfo> list_scenarios() {
    std::vector<ScenarioInfo> out;
    for (const auto& [name, entry] : registry()) out.push_back({name, entry.description});
    return out;
}

int run_scenario(const ScenarioConfig& config, std::ostream& log) {
    std::string name;
    try {
        name = config.require("scenario");
        auto it = registry().find(name);
        if (it == registry().end()) throw ConfigError("scenario '" + name + "' unknown");

        const OutputDirs dirs = prepare_output(config);
        json report;
        report["scenario"] = name;
        report["config"] = config_echo(config);
        it->second.run(config, dirs, report);
        if (!report.contains("status")) report["status"] = "ok";
        write_text(dirs.root / "report.json", report.dump(2) + "\n");
        log << name << ": " << report["status"].get<std::string>() << " (report at "
            << (dirs.root / "report.json").string() << ")\n";
        return 0;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        log << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    }
}

int check_snapshot(const std::string& path, std::ostream& log) {
    try {
        const Field f = read_snapshot(path);
        log << "format: ok (d = " << f.grid()->dim() << ", m = " << f.channels()
            << ", n = " << f.grid()->samples_per_axis() << ", L = " << f.grid()->box_length() << ")\n";
        if (f.channels() == f.grid()->dim()) {
            const double div = relative_divergence(f);
            log << "relative divergence: " << div << (div <= 1e-10 ? " (divergence-free)" : " (NOT divergence-free)")
                << "\n";
        } else {
            log << "divergence check skipped (channel count != d)\n";
        }
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace mildns
