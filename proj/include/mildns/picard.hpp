#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mildns/duhamel.hpp"
#include "mildns/spaces.hpp"

namespace mildns {

struct IterationRecord {
    int iteration = 0;
    double g_norm = 0.0;
    double h_norm = 0.0;
    double g_distance = 0.0;   // ||u^{n} - u^{n-1}||_G
    double contraction = 0.0;  // ratio of successive G distances (0 for the first)
    double residual = 0.0;     // normalized L^2 residual of the iterate
};

struct IterationReport {
    std::vector<IterationRecord> iterates;
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
    double final_residual = 0.0;
    double initial_g_norm = 0.0;
    double final_g_norm = 0.0;
    bool in_theorem_ball = false;  // ||u||_G <= 2 ||u^0||_G

    std::string to_json() const;
};

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 60;
    bool start_from_zero = false;   // test hook: initial iterate 0 instead of heat flow
    bool disable_bilinear = false;  // test hook: B forced to 0 (linear limit)
    double divergence_factor = 10.0;
};

struct MildSolution {
    Trajectory trajectory;
    SpaceParams params;
    IterationReport report;
};

// Successive substitution u^{n+1} = e^{tD} u0 - B(u^n, u^n) on the scheme's
// time grid, stopping on the G-distance of successive iterates. Divergence
// (G-norm growth past divergence_factor x the heat iterate) yields a report
// carrying the last finite iterate.
MildSolution picard_solve(const Field& u0, const SpaceParams& params, const DuhamelScheme& scheme,
                          const PicardOptions& opts = {});

// max over nodes of ||u(t_n) - e^{t_n D}u0 + B(u,u)(t_n)||_2 / (1 + ||u(t_n)||_2).
double residual(const Trajectory& u, const Field& u0, const DuhamelScheme& scheme);

// etahat = max over pairs of ||B(u,v)||_G / (||u||_G ||v||_G); zero-norm
// pairs are skipped, an empty effective corpus is an error.
double estimate_eta(const std::vector<std::pair<Trajectory, Trajectory>>& corpus,
                    const SpaceParams& params, const DuhamelScheme& scheme);

struct ThresholdRow {
    double amplitude = 0.0;
    double lhs_eq1 = 0.0;
    double lhs_eq6 = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
};

struct ThresholdScanResult {
    std::vector<ThresholdRow> rows;
    double delta_hat = 0.0;        // largest converged LHS(1) value
    bool monotone_boundary = true; // converged rows form a prefix of the ladder
    int first_failure = -1;        // index of first non-converged row, -1 if none
};

// Runs picard_solve on A * profile for each amplitude of an increasing
// ladder and tabulates convergence against the smallness left-hand sides.
ThresholdScanResult threshold_scan(const Field& profile, const SpaceParams& params,
                                   const DuhamelScheme& scheme, const std::vector<double>& amplitudes,
                                   const PicardOptions& opts = {});

}  // namespace mildns
