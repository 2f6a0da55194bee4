#pragma once

#include <vector>

#include "mildns/spaces.hpp"

namespace mildns {

// Time discretization of the Duhamel integral. Per-mode weights integrate
// e^{-(t-tau)|k|^2} exactly against piecewise-linear data on each interval,
// so the stiff kernel never limits the step.
struct DuhamelScheme {
    std::vector<double> times;  // 0 = t_0 < t_1 < ... < t_N = T

    double horizon() const { return times.back(); }

    // Geometric nodes near 0 (mild data have t^{-alpha/2} transients),
    // then uniform to T.
    static DuhamelScheme standard(double T, int geometric_nodes = 16, int uniform_nodes = 28,
                                  double t0_frac = 1e-4, double split_frac = 0.125);

    // Same layout, but every node an exact integer multiple of dt, so the
    // nodes land on a fixed-step reference solver's lattice.
    static DuhamelScheme aligned(double T, double dt, int uniform_nodes = 28);

    // Exact local weights: integral over an interval of length h of
    // e^{-(t_right - tau) lambda} against the linear interpolant equals
    // w_left * G(t_left) + w_right * G(t_right); decay carries the
    // accumulated integral forward.
    static void local_weights(double lambda, double h, double& decay, double& w_left, double& w_right);
};

// B(u, v)(t_n) = integral_0^{t_n} e^{(t_n - tau) D} P div (u tensor v) dtau,
// computed per mode by the exact exponential recurrence. The product is
// formed pointwise in physical space and dealiased (2/3 rule). Output is
// divergence-free and B(u, v)(0) = 0.
Trajectory bilinear_apply(const Trajectory& u, const Trajectory& v, const DuhamelScheme& scheme);

// integral_0^t (t - tau)^{-gamma} tau^{-theta} dtau = C t^{1 - gamma - theta}
// with C = B(1 - gamma, 1 - theta) evaluated by adaptive quadrature after
// endpoint substitution; requires gamma < 1, theta < 1, t > 0.
double beta_time_integral(double gamma, double theta, double t);

// Index window of the G x G -> G bilinear estimate: requires
// d <= q < q1 < inf and 1/q2 in (0, 1/q] intersect (2/q1 - 1/d, 2/q1).
// Throws naming the violated constraint.
void check_bilinear_g_window(int d, double q, double q1, double q2);

struct ScalingProbeRow {
    double T = 0.0;
    double h_norm_B = 0.0;
    double g_norm_B = 0.0;
    double g_norm_u = 0.0;
    double ratio_h = 0.0;  // h_norm_B / g_norm_u^2
    double ratio_g = 0.0;  // g_norm_B / g_norm_u^2
};

struct ScalingProbeResult {
    std::vector<ScalingProbeRow> rows;
    double slope_h = 0.0;    // fitted log-log slope of ratio_h vs T
    double slope_g = 0.0;
    double formula_h = 0.0;  // (1/2)(1 + s - d/p)
    double formula_g = 0.0;  // (1/2)(1 - d/q)
};

// For u = v = e^{tD} u0, computes h_norm(B(u,u)) / g_norm(u)^2 and the
// G-norm variant across a T ladder and fits the log-log slopes.
ScalingProbeResult bilinear_scaling_probe(const Field& u0, const SpaceParams& params,
                                          const std::vector<double>& horizons,
                                          int geometric_nodes = 16, int uniform_nodes = 28);

}  // namespace mildns
