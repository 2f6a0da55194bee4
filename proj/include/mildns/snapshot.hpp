#pragma once

#include <string>

#include "mildns/grid.hpp"

namespace mildns {

// Field snapshot format: magic "MNSF1", then u32 d, u32 m, u32 n, f64 L,
// then channels in order, row-major physical samples, all little-endian f64.
void write_snapshot(const std::string& path, const Field& field);
Field read_snapshot(const std::string& path);

}  // namespace mildns
