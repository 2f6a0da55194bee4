#include "mildns/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mildns {

namespace {

// FFTW plans are cached per (d, n, sign). FFTW_ESTIMATE keeps planning
// deterministic; FFTW_UNALIGNED lets plans run on std::vector storage via
// the new-array execute interface (which is re-entrant).
class PlanCache {
public:
    fftw_plan get(int d, int n, int sign) {
        std::scoped_lock lock(mu_);
        const auto key = std::tuple{d, n, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t total = 1;
        std::array<int, 3> dims{};
        for (int a = 0; a < d; ++a) {
            dims[a] = n;
            total *= static_cast<std::size_t>(n);
        }
        fftw_complex* in = fftw_alloc_complex(total);
        fftw_complex* out = fftw_alloc_complex(total);
        fftw_plan plan = fftw_plan_dft(d, dims.data(), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void run_dft(int d, int n, int sign, const complex* in, complex* out) {
    fftw_plan plan = plan_cache().get(d, n, sign);
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(const_cast<complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

SpectralGrid::SpectralGrid(int d, int n, double box_length) : d_(d), n_(n), L_(box_length) {
    if (d != 2 && d != 3) throw std::invalid_argument("grid: d must be 2 or 3");
    if (n < 4) throw std::invalid_argument("grid: n must be >= 4");
    if (n % 2 != 0) throw std::invalid_argument("grid: n must be even");
    if (!(box_length > 0.0)) throw std::invalid_argument("grid: L must be > 0");
    points_ = 1;
    for (int a = 0; a < d; ++a) points_ *= static_cast<std::size_t>(n);
    cell_volume_ = std::pow(L_ / n, d);
    k_axis_.resize(n);
    for (int m = -n / 2; m < n / 2; ++m) k_axis_[m + n / 2] = 2.0 * M_PI * m / L_;
}

int SpectralGrid::mode_index(std::size_t flat, int axis) const {
    std::size_t stride = 1;
    for (int a = d_ - 1; a > axis; --a) stride *= static_cast<std::size_t>(n_);
    const int idx = static_cast<int>((flat / stride) % static_cast<std::size_t>(n_));
    return idx < n_ / 2 ? idx : idx - n_;
}

double SpectralGrid::wave_number_sq(std::size_t flat) const {
    double s = 0.0;
    for (int a = 0; a < d_; ++a) {
        const double k = wave_component(flat, a);
        s += k * k;
    }
    return s;
}

double SpectralGrid::coordinate(std::size_t flat, int axis) const {
    std::size_t stride = 1;
    for (int a = d_ - 1; a > axis; --a) stride *= static_cast<std::size_t>(n_);
    const int idx = static_cast<int>((flat / stride) % static_cast<std::size_t>(n_));
    return spacing() * idx;
}

bool SpectralGrid::dealias_keep(std::size_t flat) const {
    const int cut = n_ / 3;
    for (int a = 0; a < d_; ++a) {
        if (std::abs(mode_index(flat, a)) > cut) return false;
    }
    return true;
}

GridPtr make_grid(int d, int n, double box_length) {
    return std::make_shared<const SpectralGrid>(d, n, box_length);
}

Field Field::from_physical(GridPtr grid, int channels, std::vector<double> samples) {
    if (!grid) throw std::invalid_argument("field: null grid");
    if (channels < 1) throw std::invalid_argument("field: channels must be >= 1");
    if (samples.size() != grid->point_count() * static_cast<std::size_t>(channels))
        throw std::invalid_argument("field: sample buffer size mismatch");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::domain_error("field: non-finite physical sample");
    Field f;
    f.grid_ = std::move(grid);
    f.channels_ = channels;
    f.rep_ = std::make_shared<Rep>();
    f.rep_->phys = std::move(samples);
    f.rep_->has_phys = true;
    return f;
}

Field Field::from_spectral(GridPtr grid, int channels, std::vector<complex> coeffs) {
    if (!grid) throw std::invalid_argument("field: null grid");
    if (channels < 1) throw std::invalid_argument("field: channels must be >= 1");
    if (coeffs.size() != grid->point_count() * static_cast<std::size_t>(channels))
        throw std::invalid_argument("field: coefficient buffer size mismatch");
    Field f;
    f.grid_ = std::move(grid);
    f.channels_ = channels;
    f.rep_ = std::make_shared<Rep>();
    f.rep_->spec = std::move(coeffs);
    f.rep_->has_spec = true;
    return f;
}

Field Field::zero(GridPtr grid, int channels) {
    std::vector<double> z(grid->point_count() * static_cast<std::size_t>(channels), 0.0);
    return from_physical(std::move(grid), channels, std::move(z));
}

Field::Field(const Field& other) : grid_(other.grid_), channels_(other.channels_) {
    if (other.rep_) {
        rep_ = std::make_shared<Rep>();
        std::scoped_lock lock(other.rep_->mu);
        rep_->phys = other.rep_->phys;
        rep_->spec = other.rep_->spec;
        rep_->has_phys = other.rep_->has_phys;
        rep_->has_spec = other.rep_->has_spec;
    }
}

Field& Field::operator=(const Field& other) {
    if (this != &other) {
        Field tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

void Field::ensure_spectral() const {
    std::scoped_lock lock(rep_->mu);
    if (rep_->has_spec) return;
    const std::size_t np = grid_->point_count();
    rep_->spec.resize(np * static_cast<std::size_t>(channels_));
    std::vector<complex> in(np);
    const double scale = 1.0 / static_cast<double>(np);
    for (int c = 0; c < channels_; ++c) {
        const double* p = rep_->phys.data() + c * np;
        for (std::size_t i = 0; i < np; ++i) in[i] = complex(p[i], 0.0);
        complex* out = rep_->spec.data() + c * np;
        run_dft(grid_->dim(), grid_->samples_per_axis(), FFTW_FORWARD, in.data(), out);
        for (std::size_t i = 0; i < np; ++i) out[i] *= scale;
    }
    rep_->has_spec = true;
}

void Field::ensure_physical() const {
    std::scoped_lock lock(rep_->mu);
    if (rep_->has_phys) return;
    const std::size_t np = grid_->point_count();
    rep_->phys.resize(np * static_cast<std::size_t>(channels_));
    std::vector<complex> out(np);
    for (int c = 0; c < channels_; ++c) {
        const complex* in = rep_->spec.data() + c * np;
        run_dft(grid_->dim(), grid_->samples_per_axis(), FFTW_BACKWARD, in, out.data());
        double* p = rep_->phys.data() + c * np;
        for (std::size_t i = 0; i < np; ++i) p[i] = out[i].real();
    }
    rep_->has_phys = true;
}

std::span<const double> Field::physical(int channel) const {
    ensure_physical();
    const std::size_t np = grid_->point_count();
    return {rep_->phys.data() + channel * np, np};
}

std::span<const complex> Field::spectral(int channel) const {
    ensure_spectral();
    const std::size_t np = grid_->point_count();
    return {rep_->spec.data() + channel * np, np};
}

double Field::mean(int channel) const {
    auto p = physical(channel);
    return pairwise_sum(0, p.size(), [&](std::size_t i) { return p[i]; }) / static_cast<double>(p.size());
}

double Field::magnitude_at(std::size_t node) const {
    ensure_physical();
    const std::size_t np = grid_->point_count();
    double s = 0.0;
    for (int c = 0; c < channels_; ++c) {
        const double v = rep_->phys[c * np + node];
        s += v * v;
    }
    return std::sqrt(s);
}

double Field::max_abs() const {
    ensure_physical();
    return pairwise_max(0, rep_->phys.size(), [&](std::size_t i) { return std::abs(rep_->phys[i]); });
}

Field Field::projected_zero_mean() const {
    ensure_physical();
    const std::size_t np = grid_->point_count();
    std::vector<double> out(rep_->phys);
    for (int c = 0; c < channels_; ++c) {
        const double mu = mean(c);
        for (std::size_t i = 0; i < np; ++i) out[c * np + i] -= mu;
    }
    return from_physical(grid_, channels_, std::move(out));
}

Field Field::operator*(double c) const {
    ensure_physical();
    std::vector<double> out(rep_->phys);
    for (double& v : out) v *= c;
    return from_physical(grid_, channels_, std::move(out));
}

Field Field::operator+(const Field& other) const {
    if (!grid_->same_as(*other.grid_) || channels_ != other.channels_)
        throw std::invalid_argument("field: mismatched operands");
    ensure_physical();
    other.ensure_physical();
    std::vector<double> out(rep_->phys);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += other.rep_->phys[i];
    return from_physical(grid_, channels_, std::move(out));
}

Field Field::operator-(const Field& other) const {
    if (!grid_->same_as(*other.grid_) || channels_ != other.channels_)
        throw std::invalid_argument("field: mismatched operands");
    ensure_physical();
    other.ensure_physical();
    std::vector<double> out(rep_->phys);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= other.rep_->phys[i];
    return from_physical(grid_, channels_, std::move(out));
}

Field sample_function(const GridPtr& grid, int channels,
                      const std::function<void(std::span<const double>, std::span<double>)>& rule) {
    const std::size_t np = grid->point_count();
    std::vector<double> samples(np * static_cast<std::size_t>(channels));
    std::vector<double> x(grid->dim());
    std::vector<double> val(channels);
    for (std::size_t i = 0; i < np; ++i) {
        for (int a = 0; a < grid->dim(); ++a) x[a] = grid->coordinate(i, a);
        rule(x, val);
        for (int c = 0; c < channels; ++c) {
            if (!std::isfinite(val[c])) {
                std::ostringstream msg;
                msg << "sample_function: non-finite value at node " << i << " (x =";
                for (int a = 0; a < grid->dim(); ++a) msg << " " << x[a];
                msg << ", channel " << c << ")";
                throw std::domain_error(msg.str());
            }
            samples[c * np + i] = val[c];
        }
    }
    return Field::from_physical(grid, channels, std::move(samples));
}

Field sample_scalar(const GridPtr& grid, const std::function<double(std::span<const double>)>& rule) {
    return sample_function(grid, 1, [&](std::span<const double> x, std::span<double> out) { out[0] = rule(x); });
}

double transform_roundtrip_check(const Field& f) {
    const std::size_t np = f.points();
    std::vector<complex> out(np);
    double worst = 0.0;
    for (int c = 0; c < f.channels(); ++c) {
        auto spec = f.spectral(c);
        run_dft(f.grid()->dim(), f.grid()->samples_per_axis(), FFTW_BACKWARD, spec.data(), out.data());
        auto phys = f.physical(c);
        worst = std::max(worst, pairwise_max(0, np, [&](std::size_t i) {
                             return std::abs(out[i].real() - phys[i]) / (1.0 + std::abs(phys[i]));
                         }));
    }
    return worst;
}

double physical_energy(const Field& f) {
    double total = 0.0;
    for (int c = 0; c < f.channels(); ++c) {
        auto p = f.physical(c);
        total += pairwise_sum(0, p.size(), [&](std::size_t i) { return p[i] * p[i]; });
    }
    return f.grid()->cell_volume() * total;
}

double spectral_energy(const Field& f) {
    double total = 0.0;
    for (int c = 0; c < f.channels(); ++c) {
        auto s = f.spectral(c);
        total += pairwise_sum(0, s.size(), [&](std::size_t i) { return std::norm(s[i]); });
    }
    return std::pow(f.grid()->box_length(), f.grid()->dim()) * total;
}

Field dealias(const Field& f) {
    const auto& g = *f.grid();
    const std::size_t np = f.points();
    std::vector<complex> coeffs(np * static_cast<std::size_t>(f.channels()));
    for (int c = 0; c < f.channels(); ++c) {
        auto s = f.spectral(c);
        for (std::size_t i = 0; i < np; ++i) coeffs[c * np + i] = g.dealias_keep(i) ? s[i] : complex(0.0);
    }
    return Field::from_spectral(f.grid(), f.channels(), std::move(coeffs));
}

double relative_divergence(const Field& u) {
    const auto& g = *u.grid();
    const int d = g.dim();
    if (u.channels() != d) throw std::invalid_argument("relative_divergence: need d channels");
    const std::size_t np = u.points();
    std::vector<std::span<const complex>> spec;
    for (int c = 0; c < d; ++c) spec.push_back(u.spectral(c));
    double max_div = 0.0;
    double max_coeff = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        complex div(0.0);
        for (int c = 0; c < d; ++c) {
            div += g.wave_component(i, c) * spec[c][i];
            max_coeff = std::max(max_coeff, std::abs(spec[c][i]));
        }
        max_div = std::max(max_div, std::abs(div));
    }
    if (max_coeff == 0.0) return 0.0;
    return max_div / max_coeff;
}

Trajectory::Trajectory(std::vector<double> times, std::vector<Field> fields)
    : times_(std::move(times)), fields_(std::move(fields)) {
    if (times_.empty() || times_.size() != fields_.size())
        throw std::invalid_argument("trajectory: need matching nonempty times/fields");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("trajectory: times must be strictly increasing");
    for (const auto& f : fields_)
        if (!f.grid()->same_as(*fields_.front().grid())) throw std::invalid_argument("trajectory: mixed grids");
}

Trajectory Trajectory::operator-(const Trajectory& other) const {
    if (times_ != other.times_) throw std::invalid_argument("trajectory: mismatched time grids");
    std::vector<Field> out;
    out.reserve(fields_.size());
    for (std::size_t i = 0; i < fields_.size(); ++i) out.push_back(fields_[i] - other.fields_[i]);
    return Trajectory(times_, std::move(out));
}

Trajectory Trajectory::operator*(double c) const {
    std::vector<Field> out;
    out.reserve(fields_.size());
    for (const auto& f : fields_) out.push_back(f * c);
    return Trajectory(times_, std::move(out));
}

Field random_band_limited(const GridPtr& grid, int channels, int band, std::uint64_t seed) {
    GaussianStream gs(seed);
    const std::size_t np = grid->point_count();
    std::vector<double> noise(np * static_cast<std::size_t>(channels));
    for (double& v : noise) v = gs.next();
    Field white = Field::from_physical(grid, channels, std::move(noise));
    std::vector<complex> coeffs(np * static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
        auto s = white.spectral(c);
        for (std::size_t i = 0; i < np; ++i) {
            bool keep = true;
            int mmax = 0;
            for (int a = 0; a < grid->dim(); ++a) mmax = std::max(mmax, std::abs(grid->mode_index(i, a)));
            keep = mmax > 0 && mmax <= band;
            coeffs[c * np + i] = keep ? s[i] : complex(0.0);
        }
    }
    Field f = Field::from_spectral(grid, channels, std::move(coeffs));
    const double m = f.max_abs();
    return m > 0.0 ? f * (1.0 / m) : f;
}

}  // namespace mildns
