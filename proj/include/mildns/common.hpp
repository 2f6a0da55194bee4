#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace mildns {

using complex = std::complex<double>;

// Global worker cap for parallel mode/node loops. 1 = serial.
void set_threads(int n);
int threads();

// Deterministic pairwise (tree) summation. Serial and independent of the
// thread count, so every norm and Parseval sum is bit-reproducible.
template <class F>
double pairwise_sum(std::size_t lo, std::size_t hi, F&& term) {
    if (hi <= lo) return 0.0;
    if (hi - lo <= 16) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

template <class F>
double pairwise_max(std::size_t lo, std::size_t hi, F&& term) {
    if (hi <= lo) return 0.0;
    if (hi - lo <= 16) {
        double m = term(lo);
        for (std::size_t i = lo + 1; i < hi; ++i) m = std::max(m, term(i));
        return m;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return std::max(pairwise_max(lo, mid, term), pairwise_max(mid, hi, term));
}

// Static-chunked parallel loop. Chunks depend only on the worker count and
// workers write disjoint ranges, so results are reproducible at fixed count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// phi1(z) = (1 - e^{-z})/z and phi2(z) = (1 - (1+z)e^{-z})/z^2, the
// exponential-integrator coefficients, with series branches near z = 0.
double phi1(double z);
double phi2(double z);

// Deterministic Gaussian stream (Box-Muller over mt19937_64), so seeded
// data do not depend on the standard library's distribution internals.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}
    double next();

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mildns
