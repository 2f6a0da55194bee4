#include "mildns/reference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mildns/mode_loop.hpp"
#include "mildns/spaces.hpp"

namespace mildns {

namespace {

// Ghat = -P(ik . (u tensor u)hat), dealiased. The product tensor is
// symmetric, so only d(d+1)/2 channels are transformed.
std::vector<complex> nonlinear_term(const Field& u) {
    const auto& grid = *u.grid();
    const int d = grid.dim();
    const std::size_t np = grid.point_count();
    const int pairs = d * (d + 1) / 2;
    std::vector<double> prod(np * static_cast<std::size_t>(pairs));
    int pair_of[3][3] = {};
    {
        int idx = 0;
        for (int l = 0; l < d; ++l) {
            auto ul = u.physical(l);
            for (int j = l; j < d; ++j) {
                auto uj = u.physical(j);
                double* dst = prod.data() + idx * np;
                for (std::size_t i = 0; i < np; ++i) dst[i] = ul[i] * uj[i];
                pair_of[l][j] = pair_of[j][l] = idx;
                ++idx;
            }
        }
    }
    Field tensor = Field::from_physical(u.grid(), pairs, std::move(prod));
    std::vector<std::span<const complex>> that;
    for (int c = 0; c < pairs; ++c) that.push_back(tensor.spectral(c));

    std::vector<complex> g(np * static_cast<std::size_t>(d), complex(0.0));
    complex a[3];
    for_each_mode(grid, [&](std::size_t i, const double* k, double k2) {
        if (k2 == 0.0 || !grid.dealias_keep(i)) return;
        for (int l = 0; l < d; ++l) {
            complex acc(0.0);
            for (int j = 0; j < d; ++j) acc += k[j] * that[pair_of[l][j]][i];
            a[l] = complex(0.0, 1.0) * acc;
        }
        complex kdot(0.0);
        for (int l = 0; l < d; ++l) kdot += k[l] * a[l];
        kdot /= k2;
        for (int l = 0; l < d; ++l) g[l * np + i] = -(a[l] - k[l] * kdot);
    });
    return g;
}

double max_pointwise_magnitude(const Field& u) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.points(); ++i) m = std::max(m, u.magnitude_at(i));
    return m;
}

}  // namespace

ReferenceRun rk4_solve(const Field& u0, double T, double dt, std::vector<double> record_times,
                       bool disable_nonlinearity) {
    const auto& grid = u0.grid();
    const int d = grid->dim();
    if (u0.channels() != d) throw std::invalid_argument("rk4_solve: u0 must have d channels");
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("rk4_solve: need T > 0 and dt > 0");
    if (relative_divergence(u0) > 1e-12) throw std::invalid_argument("rk4_solve: u0 is not divergence-free");

    const long long steps = std::llround(T / dt);
    if (std::abs(steps * dt - T) > 1e-9 * T)
        throw std::invalid_argument("rk4_solve: T must be an integer multiple of dt");

    if (record_times.empty()) {
        const long long every = std::max<long long>(1, steps / 64);
        for (long long m = 0; m <= steps; m += every) record_times.push_back(static_cast<double>(m) * dt);
        if (record_times.back() != static_cast<double>(steps) * dt)
            record_times.push_back(static_cast<double>(steps) * dt);
    }
    std::vector<long long> record_steps;
    for (double t : record_times) {
        const long long m = std::llround(t / dt);
        if (m < 0 || m > steps || std::abs(static_cast<double>(m) * dt - t) > 1e-9 * std::max(1.0, t))
            throw std::invalid_argument("rk4_solve: record time not on the step lattice");
        record_steps.push_back(m);
    }

    const std::size_t np = grid->point_count();
    const double k_max = M_PI * grid->samples_per_axis() / grid->box_length() *
                         std::sqrt(static_cast<double>(d));

    // Viscous decay factors for half and full step.
    std::vector<double> e_half(np), e_full(np);
    for_each_mode(*grid, [&](std::size_t i, const double*, double k2) {
        e_half[i] = std::exp(-0.5 * k2 * dt);
        e_full[i] = std::exp(-k2 * dt);
    });

    auto pack = [&](const Field& f) {
        std::vector<complex> s(np * static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            auto sp = f.spectral(c);
            std::copy(sp.begin(), sp.end(), s.begin() + c * np);
        }
        return s;
    };

    std::vector<complex> state = pack(u0);
    auto as_field = [&](const std::vector<complex>& s) { return Field::from_spectral(grid, d, s); };

    ReferenceRun run;
    run.dt = dt;
    std::vector<double> times;
    std::vector<Field> fields;

    const std::size_t total = np * static_cast<std::size_t>(d);
    long long rec_idx = 0;
    for (long long m = 0; m <= steps; ++m) {
        Field u = as_field(state);
        while (rec_idx < static_cast<long long>(record_steps.size()) && record_steps[rec_idx] == m) {
            times.push_back(static_cast<double>(m) * dt);
            fields.push_back(u);
            ++rec_idx;
        }
        run.energy_series.emplace_back(static_cast<double>(m) * dt, 0.5 * physical_energy(u));
        if (m == steps) break;

        const double umax = max_pointwise_magnitude(u);
        if (dt * umax * k_max > 0.5) {
            std::ostringstream msg;
            msg << "rk4_solve: CFL violated at t = " << m * dt << " (dt*max|u|*max|k| = "
                << dt * umax * k_max << "); suggest dt <= " << 0.4 / (umax * k_max);
            throw std::runtime_error(msg.str());
        }

        std::vector<complex> k1(total, complex(0.0)), k2v(total, complex(0.0)),
            k3(total, complex(0.0)), k4(total, complex(0.0));
        if (!disable_nonlinearity) {
            std::vector<complex> arg(total);
            k1 = nonlinear_term(u);
            // stage 2: e^{-l dt/2} (u + dt/2 k1)
            for (int c = 0; c < d; ++c)
                for (std::size_t i = 0; i < np; ++i) {
                    const std::size_t idx = c * np + i;
                    arg[idx] = e_half[i] * (state[idx] + 0.5 * dt * k1[idx]);
                }
            k2v = nonlinear_term(as_field(arg));
            // stage 3: e^{-l dt/2} u + dt/2 k2
            for (int c = 0; c < d; ++c)
                for (std::size_t i = 0; i < np; ++i) {
                    const std::size_t idx = c * np + i;
                    arg[idx] = e_half[i] * state[idx] + 0.5 * dt * k2v[idx];
                }
            k3 = nonlinear_term(as_field(arg));
            // stage 4: e^{-l dt} u + dt e^{-l dt/2} k3
            for (int c = 0; c < d; ++c)
                for (std::size_t i = 0; i < np; ++i) {
                    const std::size_t idx = c * np + i;
                    arg[idx] = e_full[i] * state[idx] + dt * e_half[i] * k3[idx];
                }
            k4 = nonlinear_term(as_field(arg));
        }

        std::vector<complex> next(total);
        for (int c = 0; c < d; ++c) {
            for (std::size_t i = 0; i < np; ++i) {
                const std::size_t idx = c * np + i;
                next[idx] = e_full[i] * state[idx] +
                            (dt / 6.0) * (e_full[i] * k1[idx] + 2.0 * e_half[i] * (k2v[idx] + k3[idx]) +
                                          k4[idx]);
            }
        }
        state = std::move(next);
    }

    run.trajectory = Trajectory(times, std::move(fields));
    return run;
}

Field taylor_green(const GridPtr& grid, double amplitude) {
    const double k = 2.0 * M_PI / grid->box_length();
    if (grid->dim() == 2) {
        return sample_function(grid, 2, [&](std::span<const double> x, std::span<double> out) {
            out[0] = amplitude * std::sin(k * x[0]) * std::cos(k * x[1]);
            out[1] = -amplitude * std::cos(k * x[0]) * std::sin(k * x[1]);
        });
    }
    return sample_function(grid, 3, [&](std::span<const double> x, std::span<double> out) {
        out[0] = amplitude * std::sin(k * x[0]) * std::cos(k * x[1]) * std::cos(k * x[2]);
        out[1] = -amplitude * std::cos(k * x[0]) * std::sin(k * x[1]) * std::cos(k * x[2]);
        out[2] = 0.0;
    });
}

double compare(const Trajectory& mild, const ReferenceRun& ref) {
    const Trajectory& rt = ref.trajectory;
    if (!mild.grid()->same_as(*rt.grid())) throw std::invalid_argument("compare: mismatched grids");
    double worst = 0.0;
    for (std::size_t n = 0; n < mild.size(); ++n) {
        const double t = mild.time(n);
        std::size_t match = rt.size();
        for (std::size_t r = 0; r < rt.size(); ++r) {
            if (std::abs(rt.time(r) - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
                match = r;
                break;
            }
        }
        if (match == rt.size()) {
            std::ostringstream msg;
            msg << "compare: mild node t = " << t << " not present in the reference run";
            throw std::invalid_argument(msg.str());
        }
        const double ref_norm = lebesgue_norm(rt.field(match), 2.0);
        if (ref_norm < 1e-14) continue;
        worst = std::max(worst, lebesgue_norm(mild.field(n) - rt.field(match), 2.0) / ref_norm);
    }
    return worst;
}

}  // namespace mildns
