#include "mildns/picard.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "mildns/calculus.hpp"

namespace mildns {

namespace {

double g_value(const Trajectory& traj, const SpaceParams& params) {
    return lebesgue_norm(caloric_sup_field(traj, params.alpha), params.q_tilde);
}

Trajectory zero_trajectory(const GridPtr& grid, int channels, const std::vector<double>& times) {
    std::vector<Field> fields(times.size(), Field::zero(grid, channels));
    return Trajectory(times, std::move(fields));
}

double normalized_l2_gap(const Trajectory& a, const Trajectory& b) {
    double worst = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double gap = lebesgue_norm(a.field(n) - b.field(n), 2.0);
        worst = std::max(worst, gap / (1.0 + lebesgue_norm(a.field(n), 2.0)));
    }
    return worst;
}

}  // namespace

MildSolution picard_solve(const Field& u0, const SpaceParams& params, const DuhamelScheme& scheme,
                          const PicardOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("picard_solve: need tol > 0");
    if (relative_divergence(u0) > 1e-12)
        throw std::invalid_argument("picard_solve: u0 is not divergence-free");

    const Trajectory y = heat_trajectory(u0, scheme.times);
    Trajectory u = opts.start_from_zero ? zero_trajectory(u0.grid(), u0.channels(), scheme.times) : y;

    IterationReport report;
    report.initial_g_norm = g_value(y, params);

    double prev_dist = 0.0;
    bool have_prev_dist = false;
    Trajectory next = u;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        if (opts.disable_bilinear) {
            next = y;
        } else {
            try {
                const Trajectory bu = bilinear_apply(u, u, scheme);
                std::vector<Field> fields;
                fields.reserve(scheme.times.size());
                for (std::size_t n = 0; n < scheme.times.size(); ++n)
                    fields.push_back(y.field(n) - bu.field(n));
                next = Trajectory(scheme.times, std::move(fields));
            } catch (const std::domain_error&) {
                // Overflow to non-finite samples: unambiguous divergence.
                report.diverged = true;
                report.iterations = iter;
                report.final_g_norm = g_value(u, params);
                report.final_residual = 0.0;
                MildSolution sol{std::move(u), params, std::move(report)};
                return sol;
            }
        }

        const Trajectory diff = next - u;
        const double dist = g_value(diff, params);
        // u - (y - B(u,u)) is exactly the integral-equation residual of u.
        const double res_of_u = normalized_l2_gap(u, next);

        IterationRecord rec;
        rec.iteration = iter;
        rec.g_norm = g_value(next, params);
        rec.h_norm = h_norm(next, params.s, params.p).value;
        rec.g_distance = dist;
        rec.contraction = have_prev_dist && prev_dist > 0.0 ? dist / prev_dist : 0.0;
        rec.residual = res_of_u;
        report.iterates.push_back(rec);
        report.iterations = iter;

        if (!std::isfinite(rec.g_norm) ||
            rec.g_norm > opts.divergence_factor * std::max(report.initial_g_norm, 1e-300)) {
            report.diverged = true;
            report.final_g_norm = g_value(u, params);
            report.final_residual = res_of_u;
            MildSolution sol{std::move(u), params, std::move(report)};
            return sol;
        }

        prev_dist = dist;
        have_prev_dist = true;
        u = std::move(next);

        if (dist <= opts.tol) {
            // Verify the residual contract before declaring convergence.
            double res_final;
            if (opts.disable_bilinear) {
                res_final = 0.0;
            } else {
                const Trajectory bu = bilinear_apply(u, u, scheme);
                double worst = 0.0;
                for (std::size_t n = 0; n < scheme.times.size(); ++n) {
                    const Field gap = u.field(n) - y.field(n) + bu.field(n);
                    worst = std::max(worst,
                                     lebesgue_norm(gap, 2.0) / (1.0 + lebesgue_norm(u.field(n), 2.0)));
                }
                res_final = worst;
            }
            if (res_final <= 2.0 * opts.tol || iter == opts.max_iter) {
                report.converged = res_final <= 2.0 * opts.tol;
                report.final_residual = res_final;
                report.final_g_norm = g_value(u, params);
                report.in_theorem_ball = report.final_g_norm <= 2.0 * report.initial_g_norm + 1e-12;
                MildSolution sol{std::move(u), params, std::move(report)};
                return sol;
            }
        }
    }

    report.final_g_norm = g_value(u, params);
    report.final_residual = residual(u, u0, scheme);
    report.in_theorem_ball = report.final_g_norm <= 2.0 * report.initial_g_norm + 1e-12;
    MildSolution sol{std::move(u), params, std::move(report)};
    return sol;
}

double residual(const Trajectory& u, const Field& u0, const DuhamelScheme& scheme) {
    if (u.times() != scheme.times) throw std::invalid_argument("residual: trajectory/scheme time grids differ");
    const Trajectory y = heat_trajectory(u0, scheme.times);
    const Trajectory bu = bilinear_apply(u, u, scheme);
    double worst = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        const Field gap = u.field(n) - y.field(n) + bu.field(n);
        worst = std::max(worst, lebesgue_norm(gap, 2.0) / (1.0 + lebesgue_norm(u.field(n), 2.0)));
    }
    return worst;
}

double estimate_eta(const std::vector<std::pair<Trajectory, Trajectory>>& corpus,
                    const SpaceParams& params, const DuhamelScheme& scheme) {
    if (corpus.empty()) throw std::invalid_argument("estimate_eta: empty corpus");
    double eta = 0.0;
    int effective = 0;
    for (const auto& [u, v] : corpus) {
        const double gu = g_value(u, params);
        const double gv = g_value(v, params);
        if (gu == 0.0 || gv == 0.0) continue;
        const double gb = g_value(bilinear_apply(u, v, scheme), params);
        eta = std::max(eta, gb / (gu * gv));
        ++effective;
    }
    if (effective == 0) throw std::invalid_argument("estimate_eta: empty effective corpus");
    return eta;
}

ThresholdScanResult threshold_scan(const Field& profile, const SpaceParams& params,
                                   const DuhamelScheme& scheme, const std::vector<double>& amplitudes,
                                   const PicardOptions& opts) {
    for (std::size_t i = 1; i < amplitudes.size(); ++i)
        if (!(amplitudes[i] > amplitudes[i - 1]))
            throw std::invalid_argument("threshold_scan: amplitude ladder must be increasing");

    ThresholdScanResult out;
    const double T = scheme.horizon();
    for (double a : amplitudes) {
        const Field u0 = profile * a;
        ThresholdRow row;
        row.amplitude = a;
        row.lhs_eq1 = smallness_lhs(u0, params, T, SmallnessVariant::HeatSup).value;
        row.lhs_eq6 = smallness_lhs(u0, params, T, SmallnessVariant::Triebel).value;
        const MildSolution sol = picard_solve(u0, params, scheme, opts);
        row.converged = sol.report.converged;
        row.iterations = sol.report.iterations;
        row.final_residual = sol.report.final_residual;
        out.rows.push_back(row);
    }

    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        if (out.rows[i].converged) {
            out.delta_hat = std::max(out.delta_hat, out.rows[i].lhs_eq1);
            if (out.first_failure >= 0) out.monotone_boundary = false;
        } else if (out.first_failure < 0) {
            out.first_failure = static_cast<int>(i);
        }
    }
    return out;
}

std::string IterationReport::to_json() const {
    nlohmann::ordered_json j;
    j["converged"] = converged;
    j["diverged"] = diverged;
    j["iterations"] = iterations;
    j["final_residual"] = final_residual;
    j["initial_g_norm"] = initial_g_norm;
    j["final_g_norm"] = final_g_norm;
    j["in_theorem_ball"] = in_theorem_ball;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : iterates) {
        arr.push_back({{"iteration", r.iteration},
                       {"g_norm", r.g_norm},
                       {"h_norm", r.h_norm},
                       {"g_distance", r.g_distance},
                       {"contraction", r.contraction},
                       {"residual", r.residual}});
    }
    j["iterates"] = arr;
    return j.dump(2);
}

}  // namespace mildns
