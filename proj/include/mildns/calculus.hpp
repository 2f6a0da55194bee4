#pragma once

#include <utility>
#include <vector>

#include "mildns/grid.hpp"

namespace mildns {

// Homogeneous multiplier |k|^s (Lambda^s). Requires zero-mean input; the
// k = 0 mode stays zero.
Field fractional_laplacian(const Field& f, double s);

// Riesz transform, symbol i k_j / |k|.
Field riesz_transform(const Field& f, int axis);

// Helmholtz-Leray projection onto divergence-free fields:
// uhat_j - k_j (k . uhat) / |k|^2.
Field leray_project(const Field& u);

// Heat semigroup e^{t Laplacian}, symbol e^{-|k|^2 t}.
Field heat_evolve(const Field& f, double t);

// (div F)_l = sum_j d_j F_lj for a d x d tensor field (channel l*d + j).
Field tensor_divergence(const Field& tensor);

// Lambda^s e^{t Laplacian} P div applied to a tensor field, fused into a
// single multiplier pass. Output is divergence-free.
Field oseen_apply(const Field& tensor, double t, double s);

// Heat trajectory t -> e^{t Laplacian} u0 on the given nodes (t = 0 allowed).
Trajectory heat_trajectory(const Field& u0, const std::vector<double>& times);

struct KernelSampleRequest {
    int d = 2;
    double s = 0.0;
    double t = 1.0;
    // Offsets along the main diagonal, given as radii |x|; each is snapped to
    // the nearest grid node on the diagonal.
    std::vector<double> radii;
    int n = 1024;
    double box_length = 96.0;
    double surrogate_width_factor = 2.0;  // bump width = factor * spacing
    // (gamma1, gamma2) pairs for the two-parameter bound table; each must
    // satisfy gamma1 > 0, gamma2 > 0, gamma1 + 2*gamma2 = d + s + 1.
    std::vector<std::pair<double, double>> gammas;
};

struct KernelPointSample {
    double radius = 0.0;               // |x| actually sampled (node-snapped)
    std::vector<double> entries;       // K_t(x) entries, index i*d*d + l*d + j
    double magnitude = 0.0;            // Frobenius norm over entries
    std::vector<double> bound_ratios;  // |K_t(x)| * t^g2 * |x|^g1 per gamma pair
};

struct OseenKernelSample {
    int d = 0;
    double s = 0.0;
    double t = 0.0;
    int n = 0;
    double box_length = 0.0;
    double surrogate_width = 0.0;
    std::vector<std::pair<double, double>> gammas;
    std::vector<KernelPointSample> points;
};

// Samples the physical-space kernel of Lambda^s e^{t Laplacian} P div by
// applying the operator to a narrow normalized Gaussian surrogate on a large
// box. The surrogate equals e^{(w^2/2) Laplacian} delta, so its smoothing is
// absorbed exactly by shrinking the heat time to t - w^2/2.
OseenKernelSample oseen_kernel_sample(const KernelSampleRequest& req);

}  // namespace mildns
