#include "mildns/calculus.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mildns/mode_loop.hpp"

namespace mildns {

namespace {

void require_zero_mean(const Field& f, const char* op) {
    const double scale = 1.0 + f.max_abs();
    for (int c = 0; c < f.channels(); ++c) {
        if (std::abs(f.mean(c)) > 1e-10 * scale) {
            std::ostringstream msg;
            msg << op << ": input must have zero mean (channel " << c << " mean " << f.mean(c) << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

}  // namespace

Field fractional_laplacian(const Field& f, double s) {
    if (!(s > -f.grid()->dim())) throw std::invalid_argument("fractional_laplacian: need s > -d");
    require_zero_mean(f, "fractional_laplacian");
    const std::size_t np = f.points();
    std::vector<complex> out(np * static_cast<std::size_t>(f.channels()));
    for (int c = 0; c < f.channels(); ++c) {
        auto in = f.spectral(c);
        complex* o = out.data() + c * np;
        for_each_mode(*f.grid(), [&](std::size_t i, const double*, double k2) {
            o[i] = k2 > 0.0 ? std::pow(k2, 0.5 * s) * in[i] : complex(0.0);
        });
    }
    return Field::from_spectral(f.grid(), f.channels(), std::move(out));
}

Field riesz_transform(const Field& f, int axis) {
    if (axis < 0 || axis >= f.grid()->dim()) throw std::invalid_argument("riesz_transform: axis out of range");
    require_zero_mean(f, "riesz_transform");
    const std::size_t np = f.points();
    std::vector<complex> out(np * static_cast<std::size_t>(f.channels()));
    for (int c = 0; c < f.channels(); ++c) {
        auto in = f.spectral(c);
        complex* o = out.data() + c * np;
        for_each_mode(*f.grid(), [&](std::size_t i, const double* k, double k2) {
            o[i] = k2 > 0.0 ? complex(0.0, k[axis] / std::sqrt(k2)) * in[i] : complex(0.0);
        });
    }
    return Field::from_spectral(f.grid(), f.channels(), std::move(out));
}

Field leray_project(const Field& u) {
    const int d = u.grid()->dim();
    if (u.channels() != d) throw std::invalid_argument("leray_project: field must have d channels");
    require_zero_mean(u, "leray_project");
    const std::size_t np = u.points();
    std::vector<std::span<const complex>> in;
    for (int c = 0; c < d; ++c) in.push_back(u.spectral(c));
    std::vector<complex> out(np * static_cast<std::size_t>(d));
    for_each_mode(*u.grid(), [&](std::size_t i, const double* k, double k2) {
        if (k2 == 0.0) {
            for (int c = 0; c < d; ++c) out[c * np + i] = complex(0.0);
            return;
        }
        complex kdot(0.0);
        for (int c = 0; c < d; ++c) kdot += k[c] * in[c][i];
        kdot /= k2;
        for (int c = 0; c < d; ++c) out[c * np + i] = in[c][i] - k[c] * kdot;
    });
    return Field::from_spectral(u.grid(), d, std::move(out));
}

Field heat_evolve(const Field& f, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_evolve: t must be >= 0");
    if (t == 0.0) return f;
    const std::size_t np = f.points();
    std::vector<complex> out(np * static_cast<std::size_t>(f.channels()));
    for (int c = 0; c < f.channels(); ++c) {
        auto in = f.spectral(c);
        complex* o = out.data() + c * np;
        for_each_mode(*f.grid(), [&](std::size_t i, const double*, double k2) {
            o[i] = std::exp(-k2 * t) * in[i];
        });
    }
    return Field::from_spectral(f.grid(), f.channels(), std::move(out));
}

Field tensor_divergence(const Field& tensor) {
    const int d = tensor.grid()->dim();
    if (tensor.channels() != d * d) throw std::invalid_argument("tensor_divergence: field must have d*d channels");
    const std::size_t np = tensor.points();
    std::vector<std::span<const complex>> in;
    for (int c = 0; c < d * d; ++c) in.push_back(tensor.spectral(c));
    std::vector<complex> out(np * static_cast<std::size_t>(d));
    for_each_mode(*tensor.grid(), [&](std::size_t i, const double* k, double) {
        for (int l = 0; l < d; ++l) {
            complex s(0.0);
            for (int j = 0; j < d; ++j) s += k[j] * in[l * d + j][i];
            out[l * np + i] = complex(0.0, 1.0) * s;
        }
    });
    return Field::from_spectral(tensor.grid(), d, std::move(out));
}

Field oseen_apply(const Field& tensor, double t, double s) {
    const int d = tensor.grid()->dim();
    if (tensor.channels() != d * d) throw std::invalid_argument("oseen_apply: field must have d*d channels");
    if (!(t > 0.0)) throw std::invalid_argument("oseen_apply: t must be > 0");
    if (!(s > -1.0)) throw std::invalid_argument("oseen_apply: need s > -1");
    require_zero_mean(tensor, "oseen_apply");
    const std::size_t np = tensor.points();
    std::vector<std::span<const complex>> in;
    for (int c = 0; c < d * d; ++c) in.push_back(tensor.spectral(c));
    std::vector<complex> out(np * static_cast<std::size_t>(d));
    complex a[3];
    for_each_mode(*tensor.grid(), [&](std::size_t i, const double* k, double k2) {
        if (k2 == 0.0) {
            for (int c = 0; c < d; ++c) out[c * np + i] = complex(0.0);
            return;
        }
        // a = i k . Fhat, then project, then |k|^s e^{-|k|^2 t}.
        for (int l = 0; l < d; ++l) {
            complex acc(0.0);
            for (int j = 0; j < d; ++j) acc += k[j] * in[l * d + j][i];
            a[l] = complex(0.0, 1.0) * acc;
        }
        complex kdot(0.0);
        for (int l = 0; l < d; ++l) kdot += k[l] * a[l];
        kdot /= k2;
        const double amp = std::pow(k2, 0.5 * s) * std::exp(-k2 * t);
        for (int l = 0; l < d; ++l) out[l * np + i] = amp * (a[l] - k[l] * kdot);
    });
    return Field::from_spectral(tensor.grid(), d, std::move(out));
}

Trajectory heat_trajectory(const Field& u0, const std::vector<double>& times) {
    std::vector<Field> fields;
    fields.reserve(times.size());
    for (double t : times) fields.push_back(t == 0.0 ? u0 : heat_evolve(u0, t));
    return Trajectory(times, std::move(fields));
}

OseenKernelSample oseen_kernel_sample(const KernelSampleRequest& req) {
    if (!(req.t > 0.0)) throw std::invalid_argument("oseen_kernel_sample: t must be > 0");
    if (!(req.s > -1.0)) throw std::invalid_argument("oseen_kernel_sample: need s > -1");
    if (req.radii.empty()) throw std::invalid_argument("oseen_kernel_sample: no sample points");
    const double homogeneity = req.d + req.s + 1.0;
    for (auto [g1, g2] : req.gammas) {
        if (!(g1 > 0.0) || !(g2 > 0.0) || std::abs(g1 + 2.0 * g2 - homogeneity) > 1e-9) {
            std::ostringstream msg;
            msg << "oseen_kernel_sample: inadmissible (gamma1, gamma2) = (" << g1 << ", " << g2
                << "); need gamma1 > 0, gamma2 > 0, gamma1 + 2*gamma2 = d + s + 1 = " << homogeneity;
            throw std::invalid_argument(msg.str());
        }
    }

    auto grid = make_grid(req.d, req.n, req.box_length);
    const int d = req.d;
    const int n = req.n;
    const double h = grid->spacing();
    const double w = req.surrogate_width_factor * h;
    const double t_eff = req.t - 0.5 * w * w;
    if (!(t_eff > 0.0))
        throw std::invalid_argument("oseen_kernel_sample: surrogate width too large for requested t");

    // Normalized Gaussian bump, exact in spectral space; k = 0 removed.
    const std::size_t np = grid->point_count();
    std::vector<complex> bump(np);
    const double inv_vol = 1.0 / std::pow(req.box_length, d);
    for_each_mode(*grid, [&](std::size_t i, const double*, double k2) {
        bump[i] = k2 > 0.0 ? complex(inv_vol * std::exp(-0.5 * w * w * k2)) : complex(0.0);
    });

    // Snap requested radii to diagonal nodes x = m*h*(1,..,1).
    const double diag = h * std::sqrt(static_cast<double>(d));
    std::vector<std::size_t> node_steps;
    OseenKernelSample sample;
    sample.d = d;
    sample.s = req.s;
    sample.t = req.t;
    sample.n = n;
    sample.box_length = req.box_length;
    sample.surrogate_width = w;
    sample.gammas = req.gammas;
    for (double r : req.radii) {
        if (!(r > 0.0)) throw std::invalid_argument("oseen_kernel_sample: points must avoid 0");
        const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r / diag)));
        if (m >= static_cast<std::size_t>(n) / 2)
            throw std::invalid_argument("oseen_kernel_sample: sample radius beyond half box");
        node_steps.push_back(m);
        KernelPointSample pt;
        pt.radius = static_cast<double>(m) * diag;
        pt.entries.assign(static_cast<std::size_t>(d) * d * d, 0.0);
        sample.points.push_back(std::move(pt));
    }

    // One source slot (l, j) at a time; the output vector gives column (., l, j).
    for (int l = 0; l < d; ++l) {
        for (int j = 0; j < d; ++j) {
            std::vector<complex> coeffs(np * static_cast<std::size_t>(d) * d, complex(0.0));
            std::copy(bump.begin(), bump.end(), coeffs.begin() + (l * d + j) * np);
            Field tensor = Field::from_spectral(grid, d * d, std::move(coeffs));
            Field col = oseen_apply(tensor, t_eff, req.s);
            for (std::size_t pidx = 0; pidx < node_steps.size(); ++pidx) {
                // Flat index of node (m, m[, m]).
                std::size_t flat = 0;
                for (int a = 0; a < d; ++a) flat = flat * n + node_steps[pidx];
                for (int i = 0; i < d; ++i)
                    sample.points[pidx].entries[(i * d + l) * d + j] = col.physical(i)[flat];
            }
        }
    }

    for (auto& pt : sample.points) {
        double frob = 0.0;
        for (double e : pt.entries) frob += e * e;
        pt.magnitude = std::sqrt(frob);
        if (!std::isfinite(pt.magnitude))
            throw std::runtime_error("oseen_kernel_sample: non-finite kernel value");
        for (auto [g1, g2] : req.gammas)
            pt.bound_ratios.push_back(pt.magnitude * std::pow(req.t, g2) * std::pow(pt.radius, g1));
    }
    return sample;
}

}  // namespace mildns
