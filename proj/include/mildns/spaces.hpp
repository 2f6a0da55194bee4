#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mildns/grid.hpp"

namespace mildns {

// Index tuple of the well-posedness theory: p > d/2, d/p - 1 <= s < d/(2p),
// 1/q = 1/p - s/d, qtilde > max{p, q}, alpha = d (1/q - 1/qtilde).
struct SpaceParams {
    int d = 0;
    double p = 0.0;
    double s = 0.0;
    double q = 0.0;
    double q_tilde = 0.0;
    double T = std::numeric_limits<double>::infinity();
    double alpha = 0.0;
    bool critical = false;

    // T-prefactor exponent (1/2)(1 + s - d/p); zero exactly when critical.
    double horizon_exponent() const { return 0.5 * (1.0 + s - d / p); }
};

// Returns one message per violated admissibility inequality; empty if valid.
std::vector<std::string> validate_params(int d, double p, double s, double q_tilde);

// Populated SpaceParams, or throws std::invalid_argument naming every
// violated inequality.
SpaceParams admissible_params(int d, double p, double s, double q_tilde);

struct LadderSpec {
    double t_min = 0.0;
    double t_max = 0.0;
    int nodes_per_decade = 64;
    std::vector<double> nodes() const;
};

struct NormReport {
    std::string kind;
    double value = 0.0;
    std::optional<SpaceParams> params;
    // resolution metadata
    int n = 0;
    double box_length = 0.0;
    int time_nodes = 0;
    std::optional<LadderSpec> ladder;
    double ladder_stability = std::numeric_limits<double>::quiet_NaN();
    // diagnostics, e.g. the vanishing-window values (tau, value)
    std::vector<std::pair<double, double>> decay_diagnostic;
    std::vector<std::pair<std::string, double>> extras;

    std::string to_json() const;
};

// L^p norm, p in [1, inf]; vector fields combine per-channel norms as
// (sum_m ||f_m||^2)^{1/2}.
double lebesgue_norm(const Field& f, double p);

// Weak L^p quasi-norm sup_l l * mu{|f| > l}^{1/p} from the exact decreasing
// rearrangement of the cell-weighted pointwise magnitudes. p in (1, inf).
double weak_lebesgue_norm(const Field& f, double p);

// ||Lambda^s f||_p.
double sobolev_norm(const Field& f, double s, double p);

// Pointwise-in-x sup over time nodes of t^{alpha/2} |u(t,x)| (Euclidean
// channel magnitude). The t = 0 node is excluded when alpha > 0.
Field caloric_sup_field(const Trajectory& traj, double alpha);

// ||u||_G = || sup_t t^{alpha/2} |u| ||_{L^qtilde}, over the trajectory's
// own nodes, plus the vanishing diagnostic on dyadically shrinking windows.
NormReport g_norm(const Trajectory& traj, const SpaceParams& params);

// ||u||_H = || sup_t |Lambda^s u(t,.)| ||_{L^p}; also reports the weaker
// sup_t ||Lambda^s u(t)||_p under extras["sup_slice_norm"].
NormReport h_norm(const Trajectory& traj, double s, double p);

// Heat characterization of the Triebel norm: || sup_t t^{-s/2} |e^{tD} f|
// ||_{L^q} over a geometric ladder; requires s < 0.
NormReport triebel_norm_heat(const Field& f, double s, double q, const LadderSpec& ladder);
NormReport triebel_norm_heat(const Field& f, double s, double q);

enum class SmallnessVariant : int {
    HeatSup = 1,      // T^{(1/2)(1+s-d/p)} || sup_t t^{alpha/2} |e^{tD} u0| ||_qtilde
    CriticalSup = 2,  // || sup_t t^{(1/2)(1-d/qtilde)} |e^{tD} u0| ||_qtilde
    Triebel = 6,      // T^{(1/2)(1+s-d/p)} || u0 ||_{F^{s-d(1/p-1/qtilde),inf}_qtilde}
};

// Exact left-hand side of the chosen smallness condition over (0, T);
// T may be infinite at critical indexes (the heat tail is certified
// negligible below 1e-10 before truncation).
NormReport smallness_lhs(const Field& u0, const SpaceParams& params, double T, SmallnessVariant variant);

}  // namespace mildns
