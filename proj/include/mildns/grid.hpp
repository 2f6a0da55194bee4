#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "mildns/common.hpp"

namespace mildns {

// Periodic box discretization of R^d. Wave vectors follow the standard
// symmetric truncation k = (2*pi/L)*m with m in {0,...,n/2-1, -n/2,...,-1}
// per axis. Forward transforms carry 1/n^d so that
//   cell_volume * sum_x |f(x)|^2 = L^d * sum_k |fhat(k)|^2.
class SpectralGrid {
public:
    SpectralGrid(int d, int n, double box_length);

    int dim() const { return d_; }
    int samples_per_axis() const { return n_; }
    double box_length() const { return L_; }
    double cell_volume() const { return cell_volume_; }
    double spacing() const { return L_ / n_; }
    std::size_t point_count() const { return points_; }

    // Integer mode index m_j in [-n/2, n/2) for spectral flat index.
    int mode_index(std::size_t flat, int axis) const;
    // Wave vector component k_j = (2*pi/L) * m_j.
    double wave_component(std::size_t flat, int axis) const { return k_axis_[mode_index(flat, axis) + n_ / 2]; }
    double wave_number_sq(std::size_t flat) const;
    double min_wave_number() const { return 2.0 * M_PI / L_; }

    // Physical coordinate of grid node.
    double coordinate(std::size_t flat, int axis) const;

    // 2/3-rule dealiasing: true if the mode is kept after a pointwise product.
    bool dealias_keep(std::size_t flat) const;

    bool same_as(const SpectralGrid& other) const {
        return d_ == other.d_ && n_ == other.n_ && L_ == other.L_;
    }

private:
    int d_;
    int n_;
    double L_;
    double cell_volume_;
    std::size_t points_;
    std::vector<double> k_axis_;  // k for m = -n/2 .. n/2-1, indexed m + n/2
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

GridPtr make_grid(int d, int n, double box_length);

// A function sampled on the grid: m scalar channels of real physical samples
// with a lazily materialized, write-once spectral representation.
class Field {
public:
    Field() = default;
    static Field from_physical(GridPtr grid, int channels, std::vector<double> samples);
    static Field from_spectral(GridPtr grid, int channels, std::vector<complex> coeffs);
    static Field zero(GridPtr grid, int channels);

    Field(const Field& other);
    Field& operator=(const Field& other);
    Field(Field&&) noexcept = default;
    Field& operator=(Field&&) noexcept = default;

    const GridPtr& grid() const { return grid_; }
    int channels() const { return channels_; }
    bool valid() const { return static_cast<bool>(grid_); }
    std::size_t points() const { return grid_->point_count(); }

    std::span<const double> physical(int channel) const;
    std::span<const complex> spectral(int channel) const;

    double mean(int channel) const;
    // Pointwise Euclidean magnitude over channels at a node.
    double magnitude_at(std::size_t node) const;
    double max_abs() const;

    Field projected_zero_mean() const;

    Field operator*(double c) const;
    Field operator+(const Field& other) const;
    Field operator-(const Field& other) const;

private:
    struct Rep {
        std::vector<double> phys;
        std::vector<complex> spec;
        bool has_phys = false;
        bool has_spec = false;
        std::mutex mu;
    };
    void ensure_physical() const;
    void ensure_spectral() const;

    GridPtr grid_;
    int channels_ = 0;
    std::shared_ptr<Rep> rep_;  // unique per Field; shared_ptr only for cheap moves
};

// Samples a pointwise rule R^d -> R^m at the grid nodes. Throws
// std::domain_error naming the node if the rule produces a non-finite value.
Field sample_function(const GridPtr& grid, int channels,
                      const std::function<void(std::span<const double>, std::span<double>)>& rule);

// Convenience overload for scalar rules.
Field sample_scalar(const GridPtr& grid, const std::function<double(std::span<const double>)>& rule);

// max over channels/nodes of |inverse(forward(f)) - f| / (1 + |f|).
double transform_roundtrip_check(const Field& f);

// cell_volume * sum_x |f|^2 and its spectral counterpart L^d * sum_k |fhat|^2.
double physical_energy(const Field& f);
double spectral_energy(const Field& f);

// Zeroes all modes killed by the 2/3 rule.
Field dealias(const Field& f);

// Relative size of the spectral divergence: max_k |k . uhat(k)| / max_k |uhat(k)|.
double relative_divergence(const Field& u);

// A time-indexed sequence of fields on [0, T].
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<double> times, std::vector<Field> fields);

    std::size_t size() const { return times_.size(); }
    double time(std::size_t i) const { return times_[i]; }
    const std::vector<double>& times() const { return times_; }
    const Field& field(std::size_t i) const { return fields_[i]; }
    const GridPtr& grid() const { return fields_.front().grid(); }
    double horizon() const { return times_.back(); }

    Trajectory operator-(const Trajectory& other) const;
    Trajectory operator*(double c) const;

private:
    std::vector<double> times_;
    std::vector<Field> fields_;
};

// Seeded band-limited test data: channels of Gaussian modes with |m| <= band,
// projected to zero mean. Used throughout tests and scans.
Field random_band_limited(const GridPtr& grid, int channels, int band, std::uint64_t seed);

}  // namespace mildns
