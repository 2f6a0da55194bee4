#include "mildns/duhamel.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "mildns/calculus.hpp"
#include "mildns/mode_loop.hpp"

namespace mildns {

namespace {

// P (i k . That) with the 2/3 mask applied to the product spectrum.
void assemble_nonlinear_term(const SpectralGrid& grid, const Field& u, const Field& v,
                             std::vector<complex>& g_out) {
    const int d = grid.dim();
    const std::size_t np = grid.point_count();
    std::vector<double> prod(np * static_cast<std::size_t>(d * d));
    for (int l = 0; l < d; ++l) {
        auto ul = u.physical(l);
        for (int j = 0; j < d; ++j) {
            auto vj = v.physical(j);
            double* dst = prod.data() + (l * d + j) * np;
            for (std::size_t i = 0; i < np; ++i) dst[i] = ul[i] * vj[i];
        }
    }
    Field tensor = Field::from_physical(u.grid(), d * d, std::move(prod));
    std::vector<std::span<const complex>> that;
    for (int c = 0; c < d * d; ++c) that.push_back(tensor.spectral(c));

    g_out.assign(np * static_cast<std::size_t>(d), complex(0.0));
    complex a[3];
    for_each_mode(grid, [&](std::size_t i, const double* k, double k2) {
        if (k2 == 0.0 || !grid.dealias_keep(i)) return;
        for (int l = 0; l < d; ++l) {
            complex acc(0.0);
            for (int j = 0; j < d; ++j) acc += k[j] * that[l * d + j][i];
            a[l] = complex(0.0, 1.0) * acc;
        }
        complex kdot(0.0);
        for (int l = 0; l < d; ++l) kdot += k[l] * a[l];
        kdot /= k2;
        for (int l = 0; l < d; ++l) g_out[l * np + i] = a[l] - k[l] * kdot;
    });
}

// Runs the exponential recurrence over the scheme and hands each node's
// spectrum of B to the sink. field_at supplies u(t_n), v(t_n).
void duhamel_sweep(const GridPtr& grid, const std::vector<double>& times,
                   const std::function<const Field&(std::size_t)>& u_at,
                   const std::function<const Field&(std::size_t)>& v_at,
                   const std::function<void(std::size_t, double, const std::vector<complex>&)>& sink) {
    const int d = grid->dim();
    const std::size_t np = grid->point_count();
    std::vector<complex> bhat(np * static_cast<std::size_t>(d), complex(0.0));
    std::vector<complex> g_prev, g_curr;
    assemble_nonlinear_term(*grid, u_at(0), v_at(0), g_prev);
    for (std::size_t node = 1; node < times.size(); ++node) {
        assemble_nonlinear_term(*grid, u_at(node), v_at(node), g_curr);
        const double h = times[node] - times[node - 1];
        for_each_mode(*grid, [&](std::size_t i, const double*, double k2) {
            double decay, wl, wr;
            DuhamelScheme::local_weights(k2, h, decay, wl, wr);
            for (int c = 0; c < d; ++c) {
                const std::size_t idx = c * np + i;
                bhat[idx] = decay * bhat[idx] + wl * g_prev[idx] + wr * g_curr[idx];
            }
        });
        sink(node, times[node], bhat);
        std::swap(g_prev, g_curr);
    }
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("slope fit: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) return left + right + delta / 15.0;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

DuhamelScheme DuhamelScheme::standard(double T, int geometric_nodes, int uniform_nodes, double t0_frac,
                                      double split_frac) {
    if (!(T > 0.0)) throw std::invalid_argument("duhamel scheme: need T > 0");
    if (geometric_nodes < 2 || uniform_nodes < 1) throw std::invalid_argument("duhamel scheme: too few nodes");
    DuhamelScheme s;
    s.times.push_back(0.0);
    const double t0 = T * t0_frac;
    const double split = T * split_frac;
    const double r = std::pow(split / t0, 1.0 / (geometric_nodes - 1));
    for (int j = 0; j < geometric_nodes; ++j) s.times.push_back(t0 * std::pow(r, j));
    const double step = (T - split) / uniform_nodes;
    for (int i = 1; i < uniform_nodes; ++i) s.times.push_back(split + i * step);
    s.times.push_back(T);
    return s;
}

DuhamelScheme DuhamelScheme::aligned(double T, double dt, int uniform_nodes) {
    const long long m_total = std::llround(T / dt);
    if (m_total < 16 || std::abs(m_total * dt - T) > 1e-9 * T)
        throw std::invalid_argument("duhamel scheme: T must be an integer multiple of dt");
    DuhamelScheme s;
    s.times.push_back(0.0);
    long long m = 1;
    while (m * 2 <= m_total / 8) m *= 2;
    for (long long v = 1; v <= m; v *= 2) s.times.push_back(static_cast<double>(v) * dt);
    const long long step = std::max<long long>(1, (m_total - m) / uniform_nodes);
    for (long long v = m + step; v < m_total; v += step) s.times.push_back(static_cast<double>(v) * dt);
    s.times.push_back(static_cast<double>(m_total) * dt);
    return s;
}

void DuhamelScheme::local_weights(double lambda, double h, double& decay, double& w_left,
                                  double& w_right) {
    const double z = lambda * h;
    decay = std::exp(-z);
    const double p1 = phi1(z);
    const double p2 = phi2(z);
    w_left = h * p2;
    w_right = h * (p1 - p2);
}

Trajectory bilinear_apply(const Trajectory& u, const Trajectory& v, const DuhamelScheme& scheme) {
    if (!u.grid()->same_as(*v.grid())) throw std::invalid_argument("bilinear_apply: mismatched grids");
    if (u.times() != v.times() || u.times() != scheme.times)
        throw std::invalid_argument("bilinear_apply: mismatched time grids");
    const auto& grid = u.grid();
    const int d = grid->dim();
    if (u.field(0).channels() != d || v.field(0).channels() != d)
        throw std::invalid_argument("bilinear_apply: need d-channel vector trajectories");

    std::vector<Field> fields;
    fields.reserve(scheme.times.size());
    fields.push_back(Field::zero(grid, d));
    duhamel_sweep(
        grid, scheme.times, [&](std::size_t n) -> const Field& { return u.field(n); },
        [&](std::size_t n) -> const Field& { return v.field(n); },
        [&](std::size_t, double, const std::vector<complex>& bhat) {
            fields.push_back(Field::from_spectral(grid, d, bhat));
        });
    return Trajectory(scheme.times, std::move(fields));
}

double beta_time_integral(double gamma, double theta, double t) {
    if (!(gamma < 1.0)) throw std::invalid_argument("beta_time_integral: need gamma < 1");
    if (!(theta < 1.0)) throw std::invalid_argument("beta_time_integral: need theta < 1");
    if (!(t > 0.0)) throw std::invalid_argument("beta_time_integral: need t > 0");
    // C = int_0^1 (1-tau)^{-gamma} tau^{-theta} dtau, split at 1/2 with the
    // substitution u = tau^{1-theta} (resp. v = (1-tau)^{1-gamma}) so both
    // halves have bounded smooth integrands.
    const double tol = 1e-12;
    const double a = 1.0 - theta;
    const double b = 1.0 - gamma;
    const double i1 = integrate([&](double u) { return std::pow(1.0 - std::pow(u, 1.0 / a), -gamma); },
                                0.0, std::pow(0.5, a), tol) / a;
    const double i2 = integrate([&](double v) { return std::pow(1.0 - std::pow(v, 1.0 / b), -theta); },
                                0.0, std::pow(0.5, b), tol) / b;
    return (i1 + i2) * std::pow(t, 1.0 - gamma - theta);
}

void check_bilinear_g_window(int d, double q, double q1, double q2) {
    std::ostringstream msg;
    if (!(q >= d)) {
        msg << "bilinear G window: q < d (q = " << q << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(q1 > q)) {
        msg << "bilinear G window: q1 <= q (q1 = " << q1 << ")";
        throw std::invalid_argument(msg.str());
    }
    const double inv_q2 = 1.0 / q2;
    if (!(inv_q2 > 0.0 && inv_q2 <= 1.0 / q + 1e-12)) {
        msg << "bilinear G window: 1/q2 outside (0, 1/q] (q2 = " << q2 << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(inv_q2 > 2.0 / q1 - 1.0 / d)) {
        msg << "bilinear G window: 1/q2 <= 2/q1 - 1/d (q2 = " << q2 << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(inv_q2 < 2.0 / q1)) {
        msg << "bilinear G window: 1/q2 >= 2/q1 (q2 = " << q2 << ")";
        throw std::invalid_argument(msg.str());
    }
}

ScalingProbeResult bilinear_scaling_probe(const Field& u0, const SpaceParams& params,
                                          const std::vector<double>& horizons, int geometric_nodes,
                                          int uniform_nodes) {
    if (horizons.size() < 2) throw std::invalid_argument("scaling probe: need at least two horizons");
    if (!(params.q_tilde < 2.0 * params.p))
        throw std::invalid_argument("scaling probe: q_tilde >= 2p (H estimate window)");
    check_bilinear_g_window(params.d, params.q, params.q_tilde, params.q_tilde);

    const auto& grid = u0.grid();
    const int d = grid->dim();
    const std::size_t np = grid->point_count();

    ScalingProbeResult out;
    out.formula_h = params.horizon_exponent();
    out.formula_g = 0.5 * (1.0 - params.d / params.q);

    for (double T : horizons) {
        DuhamelScheme scheme = DuhamelScheme::standard(T, geometric_nodes, uniform_nodes);
        const std::size_t nn = scheme.times.size();

        // Heat fields generated on the fly; only previous/current are live.
        std::vector<Field> cache(nn);
        auto u_at = [&](std::size_t n) -> const Field& {
            if (!cache[n].valid()) {
                cache[n] = scheme.times[n] == 0.0 ? u0 : heat_evolve(u0, scheme.times[n]);
                if (n >= 2) cache[n - 2] = Field();
            }
            return cache[n];
        };

        std::vector<double> sup_h(np, 0.0), sup_gB(np, 0.0), sup_gu(np, 0.0);
        {
            // Denominator sup over the same nodes; t = 0 excluded when alpha > 0.
            for (std::size_t n = params.alpha > 0.0 ? 1 : 0; n < nn; ++n) {
                const double t = scheme.times[n];
                const double w = t == 0.0 ? 1.0 : std::pow(t, 0.5 * params.alpha);
                const Field& ut = u_at(n);
                for (std::size_t i = 0; i < np; ++i)
                    sup_gu[i] = std::max(sup_gu[i], w * ut.magnitude_at(i));
            }
            // The cache walked forward; reset for the sweep.
            for (auto& f : cache) f = Field();
        }

        duhamel_sweep(grid, scheme.times, u_at, u_at,
                      [&](std::size_t, double t, const std::vector<complex>& bhat) {
                          Field b = Field::from_spectral(grid, d, bhat);
                          const Field lsb = fractional_laplacian(b, params.s);
                          const double w = std::pow(t, 0.5 * params.alpha);
                          for (std::size_t i = 0; i < np; ++i) {
                              sup_h[i] = std::max(sup_h[i], lsb.magnitude_at(i));
                              sup_gB[i] = std::max(sup_gB[i], w * b.magnitude_at(i));
                          }
                      });

        ScalingProbeRow row;
        row.T = T;
        row.h_norm_B = lebesgue_norm(Field::from_physical(grid, 1, std::move(sup_h)), params.p);
        row.g_norm_B = lebesgue_norm(Field::from_physical(grid, 1, std::move(sup_gB)), params.q_tilde);
        row.g_norm_u = lebesgue_norm(Field::from_physical(grid, 1, std::move(sup_gu)), params.q_tilde);
        if (!(row.g_norm_u > 0.0)) throw std::invalid_argument("scaling probe: datum has zero G norm");
        row.ratio_h = row.h_norm_B / (row.g_norm_u * row.g_norm_u);
        row.ratio_g = row.g_norm_B / (row.g_norm_u * row.g_norm_u);
        if (!(row.ratio_h > 0.0) || !(row.ratio_g > 0.0))
            throw std::invalid_argument("scaling probe: degenerate datum (B vanished)");
        out.rows.push_back(row);
    }

    std::vector<double> ts, rh, rg;
    for (const auto& r : out.rows) {
        ts.push_back(r.T);
        rh.push_back(r.ratio_h);
        rg.push_back(r.ratio_g);
    }
    out.slope_h = fit_loglog_slope(ts, rh);
    out.slope_g = fit_loglog_slope(ts, rg);
    return out;
}

}  // namespace mildns
