#include "hotspot/spectral.hpp"

#include "hotspot/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hotspot {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int signed_index(int idx, int n) { return idx < (n + 1) / 2 ? idx : idx - n; }

} // namespace

double SpectralSlice::kx(int m) const {
    return 2.0 * std::numbers::pi * signed_index(m, spec.nx) / (spec.nx * spec.dx);
}

double SpectralSlice::ky(int l) const {
    return 2.0 * std::numbers::pi * signed_index(l, spec.ny) / (spec.ny * spec.dx);
}

struct Fft2d::Impl {
    GridSpec spec;
    std::size_t n{0};
    fftw_complex* in{nullptr};
    fftw_complex* out{nullptr};
    fftw_plan plus{nullptr};   // sum exp(+i ...)
    fftw_plan minus{nullptr};  // sum exp(-i ...)
    std::vector<cplx> phase;   // exp(i k . c0), c0 = center of cell (0,0)

    explicit Impl(const GridSpec& s) : spec(s), n(s.cells()) {
        spec.validate();
        std::lock_guard lock(planner_mutex());
        in = fftw_alloc_complex(n);
        out = fftw_alloc_complex(n);
        plus = fftw_plan_dft_2d(spec.ny, spec.nx, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
        minus = fftw_plan_dft_2d(spec.ny, spec.nx, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plus);
        fftw_destroy_plan(minus);
        fftw_free(in);
        fftw_free(out);
    }
};

Fft2d::Fft2d(const GridSpec& spec) : impl_(std::make_unique<Impl>(spec)) {
    SpectralSlice probe{impl_->spec, {}};
    const double cx = spec.center_x(0);
    const double cy = spec.center_y(0);
    impl_->phase.resize(impl_->n);
    for (int l = 0; l < spec.ny; ++l) {
        for (int m = 0; m < spec.nx; ++m) {
            impl_->phase[static_cast<std::size_t>(l) * spec.nx + m] =
                std::polar(1.0, probe.kx(m) * cx + probe.ky(l) * cy);
        }
    }
}

Fft2d::~Fft2d() = default;

SpectralSlice Fft2d::forward(std::span<const cplx> slice) const {
    auto& d = *impl_;
    if (slice.size() != d.n) {
        throw ConfigError("spatial slice has " + std::to_string(slice.size()) + " values, grid expects " +
                          std::to_string(d.n));
    }
    std::memcpy(d.in, slice.data(), d.n * sizeof(fftw_complex));
    fftw_execute(d.plus);
    SpectralSlice res{d.spec, std::vector<cplx>(d.n)};
    const double area = d.spec.cell_area();
    for (std::size_t q = 0; q < d.n; ++q) {
        res.values[q] = area * d.phase[q] * cplx(d.out[q][0], d.out[q][1]);
    }
    return res;
}

SpectralSlice Fft2d::forward(std::span<const double> slice) const {
    std::vector<cplx> tmp(slice.begin(), slice.end());
    return forward(std::span<const cplx>(tmp));
}

std::vector<cplx> Fft2d::inverse(const SpectralSlice& spectrum) const {
    auto& d = *impl_;
    if (spectrum.values.size() != d.n) {
        throw ConfigError("spectrum size does not match the grid");
    }
    for (std::size_t q = 0; q < d.n; ++q) {
        const cplx v = spectrum.values[q] * std::conj(d.phase[q]);
        d.in[q][0] = v.real();
        d.in[q][1] = v.imag();
    }
    fftw_execute(d.minus);
    const double scale = 1.0 / (static_cast<double>(d.n) * d.spec.cell_area());
    std::vector<cplx> res(d.n);
    for (std::size_t q = 0; q < d.n; ++q) {
        res[q] = scale * cplx(d.out[q][0], d.out[q][1]);
    }
    return res;
}

SpectralSlice forward_fft2(std::span<const double> slice, const GridSpec& spec) {
    return Fft2d(spec).forward(slice);
}

std::vector<cplx> inverse_fft2(const SpectralSlice& spectrum) { return Fft2d(spectrum.spec).inverse(spectrum); }

RadialBinning::RadialBinning(const GridSpec& spec) {
    spec.validate();
    dk_ = 2.0 * std::numbers::pi / (spec.nx * spec.dx);
    k_max_ = std::numbers::pi / spec.dx;
    const SpectralSlice probe{spec, {}};
    std::vector<int> raw(spec.cells());
    int max_bin = 0;
    for (int l = 0; l < spec.ny; ++l) {
        for (int m = 0; m < spec.nx; ++m) {
            const double kr = std::hypot(probe.kx(m), probe.ky(l));
            const int b = static_cast<int>(std::floor(kr / dk_ + 0.5));
            raw[static_cast<std::size_t>(l) * spec.nx + m] = b;
            max_bin = std::max(max_bin, b);
        }
    }
    std::vector<int> count(static_cast<std::size_t>(max_bin) + 1, 0);
    for (int b : raw) {
        ++count[static_cast<std::size_t>(b)];
    }
    std::vector<int> remap(count.size(), -1);
    for (std::size_t b = 0; b < count.size(); ++b) {
        if (count[b] > 0) {
            remap[b] = static_cast<int>(centers_.size());
            centers_.push_back(static_cast<double>(b) * dk_);
            counts_.push_back(count[b]);
        }
    }
    bin_of_.resize(raw.size());
    for (std::size_t q = 0; q < raw.size(); ++q) {
        bin_of_[q] = remap[static_cast<std::size_t>(raw[q])];
    }
}

RadialProfile RadialBinning::average(std::span<const cplx> mesh) const {
    if (mesh.size() != bin_of_.size()) {
        throw ConfigError("mesh size does not match the radial binning");
    }
    RadialProfile p;
    p.k = centers_;
    p.dk = dk_;
    p.k_max = k_max_;
    p.value.assign(centers_.size(), cplx{});
    for (std::size_t q = 0; q < mesh.size(); ++q) {
        p.value[static_cast<std::size_t>(bin_of_[q])] += mesh[q];
    }
    for (std::size_t b = 0; b < p.value.size(); ++b) {
        p.value[b] /= static_cast<double>(counts_[b]);
    }
    return p;
}

RadialProfile radial_average(const SpectralSlice& slice) {
    return RadialBinning(slice.spec).average(slice.values);
}

std::vector<cplx> coeff_extract(const std::function<cplx(cplx)>& evaluator, std::size_t n_terms,
                                std::size_t m_points, double rho0) {
    if (n_terms == 0) {
        return {};
    }
    if (m_points < 2 * n_terms) {
        throw ConfigError("coeff_extract needs m_points >= 2 * n_terms");
    }
    if (!(rho0 > 0.0) || rho0 > 1.0) {
        throw ConfigError("coeff_extract needs 0 < rho0 <= 1");
    }
    const int m = static_cast<int>(m_points);
    fftw_complex* buf = nullptr;
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(planner_mutex());
        buf = fftw_alloc_complex(m_points);
        plan = fftw_plan_dft_1d(m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    struct Release {
        fftw_complex* buf;
        fftw_plan plan;
        ~Release() {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
            fftw_free(buf);
        }
    } release{buf, plan};

    for (int j = 0; j < m; ++j) {
        const cplx w = std::polar(rho0, 2.0 * std::numbers::pi * j / m);
        const cplx f = evaluator(w);
        if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) {
            std::ostringstream msg;
            msg << "coefficient extraction: evaluator is not finite at w = (" << w.real() << ", " << w.imag() << ")";
            throw NumericalError(msg.str());
        }
        buf[j][0] = f.real();
        buf[j][1] = f.imag();
    }
    fftw_execute(plan);
    std::vector<cplx> c(n_terms);
    double scale = 1.0 / m;
    for (std::size_t n = 0; n < n_terms; ++n) {
        c[n] = scale * cplx(buf[n][0], buf[n][1]);
        scale /= rho0;
    }
    return c;
}

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

std::vector<double> hankel_inverse(std::span<const double> k, std::span<const double> values,
                                   std::span<const double> r_targets, double k_max) {
    if (k.size() != values.size()) {
        throw ConfigError("hankel_inverse: k and values differ in length");
    }
    std::size_t used = 0;
    while (used < k.size() && k[used] <= k_max * (1.0 + 1e-12)) {
        ++used;
    }
    std::vector<double> out(r_targets.size(), 0.0);
    if (used < 2) {
        return out;
    }
    for (std::size_t t = 0; t < r_targets.size(); ++t) {
        const double r = r_targets[t];
        std::vector<double> f(used);
        for (std::size_t b = 0; b < used; ++b) {
            f[b] = values[b] * bessel_j0(k[b] * r) * k[b];
        }
        double acc = 0.0;
        for (std::size_t b = 1; b < used; ++b) {
            acc += 0.5 * (f[b - 1] + f[b]) * (k[b] - k[b - 1]);
        }
        // Euler-Maclaurin end corrections, h^2/12 (f'(a) - f'(b)). The integrand
        // vanishes at k = 0 with slope values[0]; the upper slope is one-sided.
        const double h0 = k[1] - k[0];
        const double d0 = k[0] == 0.0 ? values[0] : (f[1] - f[0]) / h0;
        const double hn = k[used - 1] - k[used - 2];
        const double dn = used >= 3 ? (3.0 * f[used - 1] - 4.0 * f[used - 2] + f[used - 3]) / (2.0 * hn)
                                    : (f[used - 1] - f[used - 2]) / hn;
        acc += h0 * h0 / 12.0 * d0 - hn * hn / 12.0 * dn;
        out[t] = acc / (2.0 * std::numbers::pi);
    }
    return out;
}

std::vector<cplx> hankel_inverse(const RadialProfile& profile, std::span<const double> r_targets) {
    std::vector<double> re(profile.value.size());
    std::vector<double> im(profile.value.size());
    for (std::size_t b = 0; b < re.size(); ++b) {
        re[b] = profile.value[b].real();
        im[b] = profile.value[b].imag();
    }
    const auto hr = hankel_inverse(profile.k, re, r_targets, profile.k_max);
    const auto hi = hankel_inverse(profile.k, im, r_targets, profile.k_max);
    std::vector<cplx> out(r_targets.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = {hr[t], hi[t]};
    }
    return out;
}

void write_profile_csv(std::ostream& out, const RadialProfile& profile) {
    out << "index,k_r,re,im\n";
    for (std::size_t b = 0; b < profile.k.size(); ++b) {
        out << b << ',' << format_double(profile.k[b]) << ',' << format_double(profile.value[b].real()) << ','
            << format_double(profile.value[b].imag()) << '\n';
    }
}

} // namespace hotspot
