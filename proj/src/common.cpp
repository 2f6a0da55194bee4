#include "mildns/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace mildns {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) { g_threads.store(std::max(1, n)); }
int threads() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const int nw = std::min<std::size_t>(threads(), n == 0 ? 1 : n);
    if (nw <= 1 || n < 1024) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nw - 1);
    const std::size_t chunk = (n + nw - 1) / nw;
    for (int w = 1; w < nw; ++w) {
        const std::size_t lo = std::min(n, chunk * static_cast<std::size_t>(w));
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(body, lo, hi);
    }
    body(0, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

double phi1(double z) {
    if (std::abs(z) < 1e-5) {
        // 1 - z/2 + z^2/6 - z^3/24
        return 1.0 + z * (-0.5 + z * (1.0 / 6.0 + z * (-1.0 / 24.0)));
    }
    return -std::expm1(-z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 1e-4) {
        // 1/2 - z/3 + z^2/8 - z^3/30
        return 0.5 + z * (-1.0 / 3.0 + z * (0.125 + z * (-1.0 / 30.0)));
    }
    return (1.0 - (1.0 + z) * std::exp(-z)) / (z * z);
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on explicit uniforms; u1 in (0,1], u2 in [0,1).
    const double denom = static_cast<double>(gen_.max()) + 1.0;
    const double u1 = (static_cast<double>(gen_()) + 1.0) / denom;
    const double u2 = static_cast<double>(gen_()) / denom;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

}  // namespace mildns
