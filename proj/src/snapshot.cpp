#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hfb/states.hpp"

namespace hfb {

namespace {

constexpr char kMagic[8] = {'H', 'F', 'B', 'S', 'N', 'A', 'P', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, const T& x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T x{};
    is.read(reinterpret_cast<char*>(&x), sizeof(T));
    if (!is) throw std::runtime_error("truncated snapshot");
    return x;
}

void put_complex(std::ofstream& os, const cxd* p, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        put(os, p[i].real());
        put(os, p[i].imag());
    }
}

void get_complex(std::ifstream& is, cxd* p, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        double re = get<double>(is);
        double im = get<double>(is);
        p[i] = cxd(re, im);
    }
}

}  // namespace

void write_snapshot(const std::string& path, const QuasifreeState& r) {
    check_shapes(r);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.write(kMagic, 8);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(r.grid.dim));
    put(os, static_cast<std::uint32_t>(r.grid.points_per_side));
    put(os, static_cast<std::uint32_t>(0));
    put(os, r.grid.half_length);
    const std::size_t n = r.grid.sites;
    put_complex(os, r.phi.data(), n);
    // kernels row-major
    Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g = r.gamma, s = r.sigma;
    put_complex(os, g.data(), n * n);
    put_complex(os, s.data(), n * n);
    if (!os) throw std::runtime_error("write failed for " + path);
}

QuasifreeState read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not a snapshot file");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("unsupported snapshot version");
    const auto d = get<std::uint32_t>(is);
    const auto N = get<std::uint32_t>(is);
    get<std::uint32_t>(is);
    const double L = get<double>(is);
    QuasifreeState r = vacuum_state(make_grid(static_cast<int>(d), static_cast<int>(N), L));
    const std::size_t n = r.grid.sites;
    get_complex(is, r.phi.data(), n);
    Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g(n, n), s(n, n);
    get_complex(is, g.data(), n * n);
    get_complex(is, s.data(), n * n);
    r.gamma = g;
    r.sigma = s;
    return r;
}

}  // namespace hfb
