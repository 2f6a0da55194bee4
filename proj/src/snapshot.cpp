#include "mildns/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mildns {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

constexpr char kMagic[5] = {'M', 'N', 'S', 'F', '1'};

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const Field& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
    os.write(kMagic, 5);
    put_u32(os, static_cast<std::uint32_t>(field.grid()->dim()));
    put_u32(os, static_cast<std::uint32_t>(field.channels()));
    put_u32(os, static_cast<std::uint32_t>(field.grid()->samples_per_axis()));
    put_f64(os, field.grid()->box_length());
    for (int c = 0; c < field.channels(); ++c) {
        auto p = field.physical(c);
        os.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * 8));
    }
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + path);
}

Field read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error("read_snapshot: bad magic in " + path);
    const std::uint32_t d = get_u32(is);
    const std::uint32_t m = get_u32(is);
    const std::uint32_t n = get_u32(is);
    const double L = get_f64(is);
    if (!is) throw std::runtime_error("read_snapshot: truncated header in " + path);
    if (d < 2 || d > 3 || m < 1 || m > 16 || n < 4 || n > 65536 || !(L > 0.0))
        throw std::runtime_error("read_snapshot: implausible header in " + path);
    auto grid = make_grid(static_cast<int>(d), static_cast<int>(n), L);
    std::vector<double> samples(grid->point_count() * m);
    is.read(reinterpret_cast<char*>(samples.data()), static_cast<std::streamsize>(samples.size() * 8));
    if (!is) throw std::runtime_error("read_snapshot: truncated payload in " + path);
    return Field::from_physical(std::move(grid), static_cast<int>(m), std::move(samples));
}

}  // namespace mildns
