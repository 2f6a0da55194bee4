#pragma once

#include "mildns/grid.hpp"

namespace mildns {

// Iterates all spectral modes in flat (row-major) order, handing the body
// the flat index, the wave vector and |k|^2. Nested loops keep the index
// arithmetic out of the hot path.
template <class Body>
void for_each_mode(const SpectralGrid& g, Body&& body) {
    const int n = g.samples_per_axis();
    const double k_unit = 2.0 * M_PI / g.box_length();
    auto kax = [&](int idx) { return k_unit * (idx < n / 2 ? idx : idx - n); };
    double k[3] = {0.0, 0.0, 0.0};
    if (g.dim() == 2) {
        std::size_t flat = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            k[0] = kax(i0);
            for (int i1 = 0; i1 < n; ++i1, ++flat) {
                k[1] = kax(i1);
                body(flat, k, k[0] * k[0] + k[1] * k[1]);
            }
        }
    } else {
        std::size_t flat = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            k[0] = kax(i0);
            for (int i1 = 0; i1 < n; ++i1) {
                k[1] = kax(i1);
                const double k01 = k[0] * k[0] + k[1] * k[1];
                for (int i2 = 0; i2 < n; ++i2, ++flat) {
                    k[2] = kax(i2);
                    body(flat, k, k01 + k[2] * k[2]);
                }
            }
        }
    }
}

}  // namespace mildns
