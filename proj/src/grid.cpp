#include "hfb/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

namespace hfb {

namespace {

// FFTW planning is not thread safe; plans are cached per (dim, N, sign).
class PlanCache {
public:
    fftw_plan get(int dim, int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(dim, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<int> dims(dim, n);
        int total = 1;
        for (int a = 0; a < dim; ++a) total *= n;
        std::vector<fftw_complex> buf(total);
        fftw_plan p = fftw_plan_dft(dim, dims.data(), buf.data(), buf.data(), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_[key] = p;
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void run_fft(const TorusGrid& g, cvec& data, int sign) {
    fftw_plan p = plan_cache().get(g.dim, g.points_per_side, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

// FFT storage index of mode p (per axis m -> m mod N).
int fft_index_of_mode(const TorusGrid& g, int p) {
    const int n = g.points_per_side;
    int idx = 0;
    int rem = p;
    int stride = g.sites / n;
    for (int a = 0; a < g.dim; ++a) {
        int pa = rem / stride;
        rem %= stride;
        int q = (pa + n / 2) % n;
        idx += q * stride;
        stride = (a + 1 < g.dim) ? stride / n : 1;
    }
    return idx;
}

// (-1)^{sum m_a} for mode p
double mode_sign(const TorusGrid& g, int p) {
    const int n = g.points_per_side;
    int total = 0;
    int rem = p;
    int stride = g.sites / n;
    for (int a = 0; a < g.dim; ++a) {
        int pa = rem / stride;
        rem %= stride;
        total += pa - n / 2;
        stride = (a + 1 < g.dim) ? stride / n : 1;
    }
    return (total % 2 == 0) ? 1.0 : -1.0;
}

void check_field(const TorusGrid& g, const GridField& f) {
    if (f.size() != g.sites) throw std::invalid_argument("field size does not match grid");
}

}  // namespace

TorusGrid make_grid(int d, int N, double L) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (N < 2 || N % 2 != 0) throw std::invalid_argument("points per side must be even and >= 2");
    if (!(L > 0.0)) throw std::invalid_argument("half length must be positive");
    TorusGrid g;
    g.dim = d;
    g.points_per_side = N;
    g.half_length = L;
    g.spacing = 2.0 * L / N;
    g.cell_volume = std::pow(g.spacing, d);
    long total = 1;
    for (int a = 0; a < d; ++a) {
        total *= N;
        if (total > (1L << 24)) throw std::invalid_argument("grid too large");
    }
    g.sites = static_cast<int>(total);
    g.modes.resize(g.sites, d);
    const double k0 = std::numbers::pi / L;
    for (int p = 0; p < g.sites; ++p) {
        auto c = g.site_coords(p);
        for (int a = 0; a < d; ++a) g.modes(p, a) = k0 * (c[a] - N / 2);
    }
    return g;
}

std::vector<int> TorusGrid::site_coords(int index) const {
    std::vector<int> c(dim);
    for (int a = dim - 1; a >= 0; --a) {
        c[a] = index % points_per_side;
        index /= points_per_side;
    }
    return c;
}

int TorusGrid::site_index(const std::vector<int>& coords) const {
    int idx = 0;
    for (int a = 0; a < dim; ++a) {
        int c = ((coords[a] % points_per_side) + points_per_side) % points_per_side;
        idx = idx * points_per_side + c;
    }
    return idx;
}

double TorusGrid::position(int index, int axis) const {
    return -half_length + spacing * site_coords(index)[axis];
}

int TorusGrid::zero_mode() const {
    return site_index(std::vector<int>(dim, points_per_side / 2));
}

int TorusGrid::reflected_site(int index) const {
    auto c = site_coords(index);
    for (auto& x : c) x = points_per_side - x;
    return site_index(c);
}

int TorusGrid::displacement_site(int i, int j) const {
    auto ci = site_coords(i);
    auto cj = site_coords(j);
    for (int a = 0; a < dim; ++a) ci[a] = ci[a] - cj[a] + points_per_side / 2;
    return site_index(ci);
}

GridField to_fourier(const TorusGrid& g, const GridField& f) {
    check_field(g, f);
    cvec data = f;
    run_fft(g, data, FFTW_FORWARD);
    GridField out(g.sites);
    for (int p = 0; p < g.sites; ++p)
        out(p) = g.cell_volume * mode_sign(g, p) * data(fft_index_of_mode(g, p));
    return out;
}

GridField from_fourier(const TorusGrid& g, const GridField& fhat) {
    check_field(g, fhat);
    cvec data(g.sites);
    for (int p = 0; p < g.sites; ++p)
        data(fft_index_of_mode(g, p)) = mode_sign(g, p) * fhat(p);
    run_fft(g, data, FFTW_BACKWARD);
    return data / g.volume();
}

rvec laplacian_symbol(const TorusGrid& g) {
    return g.modes.rowwise().squaredNorm();
}

GridField apply_minus_laplacian(const TorusGrid& g, const GridField& f) {
    cvec fh = to_fourier(g, f);
    fh.array() *= laplacian_symbol(g).array();
    return from_fourier(g, fh);
}

rmat kinetic_matrix(const TorusGrid& g) {
    rmat D(g.sites, g.sites);
    cvec e = cvec::Zero(g.sites);
    for (int j = 0; j < g.sites; ++j) {
        e.setZero();
        e(j) = 1.0;
        D.col(j) = apply_minus_laplacian(g, e).real();
    }
    return 0.5 * (D + D.transpose());
}

cmat unitary_dft(const TorusGrid& g) {
    cmat F(g.sites, g.sites);
    const double norm = 1.0 / std::sqrt(static_cast<double>(g.sites));
    for (int j = 0; j < g.sites; ++j) {
        cvec e = cvec::Zero(g.sites);
        e(j) = 1.0;
        F.col(j) = to_fourier(g, e) * (norm / g.cell_volume);
    }
    return F;
}

GridField plane_wave(const TorusGrid& g, int mode) {
    GridField f(g.sites);
    for (int j = 0; j < g.sites; ++j) {
        double phase = 0.0;
        auto c = g.site_coords(j);
        for (int a = 0; a < g.dim; ++a)
            phase += g.modes(mode, a) * (-g.half_length + g.spacing * c[a]);
        f(j) = std::polar(1.0, phase);
    }
    return f;
}

}  // namespace hfb
