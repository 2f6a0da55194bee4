#include "mildns/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mildns/calculus.hpp"
#include "mildns/mode_loop.hpp"

namespace mildns {

namespace {

constexpr double kRelTol = 1e-12;

double channel_euclid(const std::vector<double>& per_channel) {
    double s = 0.0;
    for (double v : per_channel) s += v * v;
    return std::sqrt(s);
}

// l^1 spectral mass per channel, combined Euclidean: bounds |e^{tD}f(x)|
// by S1 * e^{-kmin^2 t} for zero-mean f.
double spectral_l1_mass(const Field& f) {
    std::vector<double> per(f.channels());
    for (int c = 0; c < f.channels(); ++c) {
        auto s = f.spectral(c);
        per[c] = pairwise_sum(0, s.size(), [&](std::size_t i) { return std::abs(s[i]); });
    }
    return channel_euclid(per);
}

double scalar_lq_norm(const GridPtr& grid, const std::vector<double>& values, double q) {
    if (std::isinf(q)) return pairwise_max(0, values.size(), [&](std::size_t i) { return values[i]; });
    const double sum = pairwise_sum(0, values.size(), [&](std::size_t i) { return std::pow(values[i], q); });
    return std::pow(grid->cell_volume() * sum, 1.0 / q);
}

struct HeatSupResult {
    double value = 0.0;
    double stability = 0.0;
    LadderSpec ladder;
    int nodes_used = 0;
};

// || sup_t t^a |e^{tD} u0| ||_{L^q} streamed over a geometric ladder.
// t_max may be infinite; the tail is then certified negligible via the
// e^{-kmin^2 t} envelope before truncation. `stability` compares against
// the half-density subsequence.
HeatSupResult heat_weighted_sup_norm(const Field& u0, double a, double q, double t_min, double t_max,
                                     int npd) {
    const auto& grid = u0.grid();
    const std::size_t np = u0.points();
    const double kmin2 = grid->min_wave_number() * grid->min_wave_number();
    const double mass = spectral_l1_mass(u0);

    HeatSupResult res;
    res.ladder = {t_min, t_max, npd};
    if (mass == 0.0) return res;

    const bool infinite = std::isinf(t_max);
    const double t_decreasing = a > 0.0 ? a / kmin2 : 0.0;

    std::vector<double> sup_all(np, 0.0), sup_even(np, 0.0);
    double running_max = 0.0;
    double t = t_min;
    int idx = 0;
    double last_t = t_min;
    while (true) {
        const Field ut = heat_evolve(u0, t);
        const double w = std::pow(t, a);
        for (std::size_t i = 0; i < np; ++i) {
            const double v = w * ut.magnitude_at(i);
            sup_all[i] = std::max(sup_all[i], v);
            if (idx % 2 == 0) sup_even[i] = std::max(sup_even[i], v);
            running_max = std::max(running_max, v);
        }
        last_t = t;
        ++idx;
        if (idx > 50000) throw std::runtime_error("heat_weighted_sup_norm: ladder did not terminate");
        t = t_min * std::pow(10.0, static_cast<double>(idx) / npd);
        if (infinite) {
            const double tail = std::pow(t, a) * std::exp(-kmin2 * t) * mass;
            if (t >= t_decreasing && tail <= 1e-13 * std::max(running_max, 1e-300)) break;
        } else {
            if (last_t >= t_max * (1.0 - 1e-12)) break;
            if (t > t_max) t = t_max;
        }
    }
    res.value = scalar_lq_norm(grid, sup_all, q);
    const double v_even = scalar_lq_norm(grid, sup_even, q);
    res.stability = res.value > 0.0 ? std::abs(res.value - v_even) / res.value : 0.0;
    res.ladder.t_max = last_t;
    res.nodes_used = idx;
    return res;
}

// Doubles the ladder density until the half-density value agrees within 1%.
HeatSupResult stable_heat_weighted_sup_norm(const Field& u0, double a, double q, double t_min,
                                            double t_max, int npd) {
    HeatSupResult res = heat_weighted_sup_norm(u0, a, q, t_min, t_max, npd);
    while (res.stability > 0.01 && npd < 256) {
        npd *= 2;
        res = heat_weighted_sup_norm(u0, a, q, t_min, t_max, npd);
    }
    return res;
}

void fill_resolution(NormReport& rep, const GridPtr& grid) {
    rep.n = grid->samples_per_axis();
    rep.box_length = grid->box_length();
}

}  // namespace

std::vector<double> LadderSpec::nodes() const {
    std::vector<double> out;
    double t = t_min;
    int idx = 0;
    while (t < t_max * (1.0 - 1e-12)) {
        out.push_back(t);
        ++idx;
        t = t_min * std::pow(10.0, static_cast<double>(idx) / nodes_per_decade);
    }
    out.push_back(t_max);
    return out;
}

std::vector<std::string> validate_params(int d, double p, double s, double q_tilde) {
    std::vector<std::string> bad;
    if (d != 2 && d != 3) {
        bad.push_back("d must be 2 or 3");
        return bad;
    }
    if (!(p > 0.5 * d)) bad.push_back("p <= d/2");
    if (p > 0.0) {
        if (!(s >= d / p - 1.0 - 1e-12)) bad.push_back("s < d/p - 1");
        if (!(s < d / (2.0 * p))) bad.push_back("s >= d/(2p)");
        const double inv_q = 1.0 / p - s / d;
        if (inv_q > 0.0) {
            const double q = 1.0 / inv_q;
            if (!(q_tilde > std::max(p, q))) bad.push_back("q_tilde <= max{p, q}");
        }
    }
    return bad;
}

SpaceParams admissible_params(int d, double p, double s, double q_tilde) {
    auto bad = validate_params(d, p, s, q_tilde);
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "admissible_params:";
        for (const auto& b : bad) msg << " [" << b << "]";
        throw std::invalid_argument(msg.str());
    }
    SpaceParams sp;
    sp.d = d;
    sp.p = p;
    sp.s = s;
    sp.q = 1.0 / (1.0 / p - s / d);
    sp.q_tilde = q_tilde;
    sp.alpha = d * (1.0 / sp.q - 1.0 / q_tilde);
    sp.critical = std::abs(s - (d / p - 1.0)) <= 1e-12 * std::max(1.0, std::abs(s));
    return sp;
}

double lebesgue_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lebesgue_norm: need p >= 1");
    std::vector<double> per(f.channels());
    for (int c = 0; c < f.channels(); ++c) {
        auto v = f.physical(c);
        if (std::isinf(p)) {
            per[c] = pairwise_max(0, v.size(), [&](std::size_t i) { return std::abs(v[i]); });
        } else {
            const double sum = pairwise_sum(0, v.size(), [&](std::size_t i) { return std::pow(std::abs(v[i]), p); });
            per[c] = std::pow(f.grid()->cell_volume() * sum, 1.0 / p);
        }
    }
    return channel_euclid(per);
}

double weak_lebesgue_norm(const Field& f, double p) {
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("weak_lebesgue_norm: need p in (1, inf)");
    const std::size_t np = f.points();
    std::vector<double> mags(np);
    for (std::size_t i = 0; i < np; ++i) mags[i] = f.magnitude_at(i);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    const double vc = f.grid()->cell_volume();
    double best = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        if (mags[i] == 0.0) break;
        best = std::max(best, mags[i] * std::pow(vc * static_cast<double>(i + 1), 1.0 / p));
    }
    return best;
}

double sobolev_norm(const Field& f, double s, double p) {
    return lebesgue_norm(fractional_laplacian(f, s), p);
}

Field caloric_sup_field(const Trajectory& traj, double alpha) {
    if (traj.size() == 0) throw std::invalid_argument("caloric_sup_field: empty time grid");
    if (!(alpha >= 0.0)) throw std::invalid_argument("caloric_sup_field: need alpha >= 0");
    const auto& grid = traj.grid();
    const std::size_t np = grid->point_count();
    std::vector<double> sup(np, 0.0);
    for (std::size_t nidx = 0; nidx < traj.size(); ++nidx) {
        const double t = traj.time(nidx);
        if (t == 0.0 && alpha > 0.0) continue;
        const double w = t == 0.0 ? 1.0 : std::pow(t, 0.5 * alpha);
        const Field& u = traj.field(nidx);
        for (std::size_t i = 0; i < np; ++i) sup[i] = std::max(sup[i], w * u.magnitude_at(i));
    }
    return Field::from_physical(grid, 1, std::move(sup));
}

NormReport g_norm(const Trajectory& traj, const SpaceParams& params) {
    NormReport rep;
    rep.kind = "g_norm";
    rep.params = params;
    fill_resolution(rep, traj.grid());
    rep.time_nodes = static_cast<int>(traj.size());
    rep.value = lebesgue_norm(caloric_sup_field(traj, params.alpha), params.q_tilde);

    // Vanishing diagnostic: the same quantity restricted to t < tau on a
    // dyadic ladder, so decay toward 0 can be inspected.
    const double T = traj.horizon();
    for (int j = 0; j < 8; ++j) {
        const double tau = T / static_cast<double>(1 << j);
        std::vector<double> times;
        std::vector<Field> fields;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (traj.time(i) < tau) {
                times.push_back(traj.time(i));
                fields.push_back(traj.field(i));
            }
        }
        double v = 0.0;
        if (!fields.empty())
            v = lebesgue_norm(caloric_sup_field(Trajectory(times, std::move(fields)), params.alpha),
                              params.q_tilde);
        rep.decay_diagnostic.emplace_back(tau, v);
    }
    return rep;
}

NormReport h_norm(const Trajectory& traj, double s, double p) {
    const int d = traj.grid()->dim();
    if (!(p > 1.0)) throw std::invalid_argument("h_norm: need p > 1");
    if (!(s >= d / p - 1.0 - 1e-12)) throw std::invalid_argument("h_norm: need s >= d/p - 1");
    const std::size_t np = traj.grid()->point_count();
    std::vector<double> sup(np, 0.0);
    double sup_slice = 0.0;
    for (std::size_t nidx = 0; nidx < traj.size(); ++nidx) {
        const Field ls = fractional_laplacian(traj.field(nidx), s);
        for (std::size_t i = 0; i < np; ++i) sup[i] = std::max(sup[i], ls.magnitude_at(i));
        sup_slice = std::max(sup_slice, lebesgue_norm(ls, p));
    }
    NormReport rep;
    rep.kind = "h_norm";
    fill_resolution(rep, traj.grid());
    rep.time_nodes = static_cast<int>(traj.size());
    rep.value = lebesgue_norm(Field::from_physical(traj.grid(), 1, std::move(sup)), p);
    rep.extras.emplace_back("sup_slice_norm", sup_slice);
    if (rep.value < sup_slice * (1.0 - 1e-10))
        throw std::runtime_error("h_norm: pointwise sup norm fell below the slice sup");
    return rep;
}

NormReport triebel_norm_heat(const Field& f, double s, double q, const LadderSpec& ladder) {
    if (!(s < 0.0)) throw std::invalid_argument("triebel_norm_heat: need s < 0");
    auto res = stable_heat_weighted_sup_norm(f, -0.5 * s, q, ladder.t_min, ladder.t_max,
                                             ladder.nodes_per_decade);
    NormReport rep;
    rep.kind = "triebel_norm_heat";
    fill_resolution(rep, f.grid());
    rep.value = res.value;
    rep.ladder = res.ladder;
    rep.ladder_stability = res.stability;
    rep.time_nodes = res.nodes_used;
    return rep;
}

NormReport triebel_norm_heat(const Field& f, double s, double q) {
    const double kmin = f.grid()->min_wave_number();
    const double t_ref = 1.0 / (kmin * kmin);
    LadderSpec ladder{1e-6 * t_ref, std::numeric_limits<double>::infinity(), 64};
    return triebel_norm_heat(f, s, q, ladder);
}

NormReport smallness_lhs(const Field& u0, const SpaceParams& params, double T, SmallnessVariant variant) {
    if (u0.channels() != params.d || u0.grid()->dim() != params.d)
        throw std::invalid_argument("smallness_lhs: u0 must be a d-vector field on a d-dim grid");
    if (relative_divergence(u0) > kRelTol)
        throw std::invalid_argument("smallness_lhs: u0 is not divergence-free");
    if (!(T > 0.0)) throw std::invalid_argument("smallness_lhs: need T > 0");
    const bool infinite = std::isinf(T);
    const double sigma = params.horizon_exponent();
    if (infinite && std::abs(sigma) > 1e-12)
        throw std::invalid_argument("smallness_lhs: T = inf requires critical indexes");

    const double kmin = u0.grid()->min_wave_number();
    const double t_ref = 1.0 / (kmin * kmin);

    NormReport rep;
    rep.params = params;
    fill_resolution(rep, u0.grid());

    switch (variant) {
        case SmallnessVariant::HeatSup: {
            const double t_min = infinite ? 1e-6 * t_ref : 1e-6 * T;
            auto res = stable_heat_weighted_sup_norm(u0, 0.5 * params.alpha, params.q_tilde, t_min, T, 64);
            rep.kind = "smallness_lhs_eq1";
            rep.value = (infinite ? 1.0 : std::pow(T, sigma)) * res.value;
            rep.ladder = res.ladder;
            rep.ladder_stability = res.stability;
            rep.time_nodes = res.nodes_used;
            rep.extras.emplace_back("sup_norm", res.value);
            rep.extras.emplace_back("horizon_prefactor", infinite ? 1.0 : std::pow(T, sigma));
            break;
        }
        case SmallnessVariant::CriticalSup: {
            if (!params.critical)
                throw std::invalid_argument("smallness_lhs: variant 2 requires critical indexes");
            const double a = 0.5 * (1.0 - params.d / params.q_tilde);
            const double t_min = infinite ? 1e-6 * t_ref : 1e-6 * T;
            auto res = stable_heat_weighted_sup_norm(u0, a, params.q_tilde, t_min, T, 64);
            rep.kind = "smallness_lhs_eq2";
            rep.value = res.value;
            rep.ladder = res.ladder;
            rep.ladder_stability = res.stability;
            rep.time_nodes = res.nodes_used;
            break;
        }
        case SmallnessVariant::Triebel: {
            const double s_triebel = params.s - params.d * (1.0 / params.p - 1.0 / params.q_tilde);
            NormReport tri = triebel_norm_heat(u0, s_triebel, params.q_tilde);
            rep.kind = "smallness_lhs_eq6";
            rep.value = (infinite ? 1.0 : std::pow(T, sigma)) * tri.value;
            rep.ladder = tri.ladder;
            rep.ladder_stability = tri.ladder_stability;
            rep.time_nodes = tri.time_nodes;
            rep.extras.emplace_back("triebel_norm", tri.value);
            rep.extras.emplace_back("triebel_order", s_triebel);
            rep.extras.emplace_back("horizon_prefactor", infinite ? 1.0 : std::pow(T, sigma));
            break;
        }
        default:
            throw std::invalid_argument("smallness_lhs: unknown variant");
    }
    return rep;
}

std::string NormReport::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["value"] = value;
    if (params) {
        j["params"] = {{"d", params->d},       {"p", params->p},
                       {"s", params->s},       {"q", params->q},
                       {"q_tilde", params->q_tilde}, {"alpha", params->alpha},
                       {"critical", params->critical}};
        if (!std::isinf(params->T)) j["params"]["T"] = params->T;
    }
    j["resolution"] = {{"n", n}, {"L", box_length}, {"time_nodes", time_nodes}};
    if (ladder) {
        j["resolution"]["ladder"] = {{"t_min", ladder->t_min},
                                     {"t_max", ladder->t_max},
                                     {"nodes_per_decade", ladder->nodes_per_decade}};
    }
    if (!std::isnan(ladder_stability)) j["ladder_stability"] = ladder_stability;
    if (!decay_diagnostic.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (auto [tau, v] : decay_diagnostic) arr.push_back({{"tau", tau}, {"value", v}});
        j["decay_diagnostic"] = arr;
    }
    for (const auto& [k, v] : extras) j[k] = v;
    return j.dump(2);
}

}  // namespace mildns
