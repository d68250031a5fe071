#include "hotspot/errors.hpp"
#include "hotspot/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hotspot;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec square(int n, double dx = 0.25) {
    GridSpec g;
    g.nx = g.ny = n;
    g.dx = dx;
    g.origin_x = g.origin_y = -0.5 * n * dx;
    return g;
}

int signed_freq(int idx, int n) { return idx < (n + 1) / 2 ? idx : idx - n; }

// Direct O(N^2) evaluation of sum_cells exp(i k.x) Y(x) dS at cell centers.
std::vector<cplx> naive_dft(const std::vector<double>& y, const GridSpec& g) {
    std::vector<cplx> out(g.cells());
    for (int l = 0; l < g.ny; ++l) {
        for (int m = 0; m < g.nx; ++m) {
            const double kx = 2 * kPi * signed_freq(m, g.nx) / (g.nx * g.dx);
            const double ky = 2 * kPi * signed_freq(l, g.ny) / (g.ny * g.dx);
            cplx acc{};
            for (int j = 0; j < g.ny; ++j) {
                for (int i = 0; i < g.nx; ++i) {
                    const double x = g.center_x(i);
                    const double yy = g.center_y(j);
                    acc += std::polar(1.0, kx * x + ky * yy) * y[static_cast<std::size_t>(j) * g.nx + i];
                }
            }
            out[static_cast<std::size_t>(l) * g.nx + m] = acc * g.cell_area();
        }
    }
    return out;
}

// J0 by its power series for small arguments and the Hankel asymptotic form beyond.
double j0_oracle(double x) {
    x = std::abs(x);
    if (x < 12.0) {
        double term = 1.0;
        double sum = 1.0;
        const double q = x * x / 4.0;
        for (int k = 1; k < 80; ++k) {
            term *= -q / (static_cast<double>(k) * k);
            sum += term;
        }
        return sum;
    }
    // P and Q asymptotic series.
    double p = 1.0, q = -1.0 / (8.0 * x);
    double tp = 1.0, tq = q;
    for (int k = 1; k < 12; ++k) {
        const double a = 4.0 * k - 3.0, b = 4.0 * k - 1.0, c = 4.0 * k + 1.0;
        tp *= -(a * a) * (b * b) / (2.0 * k * (2.0 * k - 1.0) * 64.0 * x * x);
        tq *= -(b * b) * (c * c) / (2.0 * k * (2.0 * k + 1.0) * 64.0 * x * x);
        p += tp;
        q += tq;
    }
    const double chi = x - kPi / 4.0;
    return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace

TEST(Fft, MatchesNaiveDft) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0.0, 5.0);
    for (int n : {6, 7, 10}) {
        const auto g = square(n);
        std::vector<double> y(g.cells());
        for (auto& v : y) {
            v = d(rng);
        }
        const auto fast = forward_fft2(y, g);
        const auto slow = naive_dft(y, g);
        for (std::size_t q = 0; q < y.size(); ++q) {
            EXPECT_NEAR(std::abs(fast.values[q] - slow[q]), 0.0, 1e-10 * (1.0 + std::abs(slow[q])));
        }
    }
}

TEST(Fft, ZeroAndImpulse) {
    const auto g = square(40);
    std::vector<double> y(g.cells(), 0.0);
    for (const auto& v : forward_fft2(y, g).values) {
        EXPECT_EQ(v, cplx{});
    }
    const double dt = 1.0;
    y[17 * 40 + 23] = 1.0 / (g.cell_area() * dt);
    for (const auto& v : forward_fft2(y, g).values) {
        EXPECT_NEAR(std::abs(v), 1.0 / dt, 1e-12);
    }
}

TEST(Fft, RoundTripOnRandomFields) {
    const auto g = square(40);
    const Fft2d fft(g);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> y(g.cells());
        for (auto& v : y) {
            v = d(rng);
        }
        const auto back = fft.inverse(fft.forward(y));
        double num = 0.0, den = 0.0;
        for (std::size_t q = 0; q < y.size(); ++q) {
            num += std::norm(back[q] - y[q]);
            den += y[q] * y[q];
        }
        EXPECT_LE(std::sqrt(num / den), 1e-10);
    }
}

TEST(Fft, Parseval) {
    const auto g = square(40);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> y(g.cells());
    for (auto& v : y) {
        v = d(rng);
    }
    const auto s = forward_fft2(y, g);
    double lhs = 0.0, rhs = 0.0;
    for (double v : y) {
        lhs += v * v * g.cell_area();
    }
    for (const auto& v : s.values) {
        rhs += std::norm(v);
    }
    rhs /= static_cast<double>(g.cells()) * g.cell_area();
    EXPECT_NEAR(lhs, rhs, 1e-10 * lhs);
}

TEST(Fft, DimensionMismatchIsFatal) {
    const auto g = square(8);
    std::vector<double> y(10, 0.0);
    EXPECT_THROW((void)forward_fft2(y, g), ConfigError);
}

TEST(Radial, ConstantSliceAndDc) {
    const auto g = square(40);
    SpectralSlice s{g, std::vector<cplx>(g.cells(), cplx{2.5, -1.0})};
    const auto p = radial_average(s);
    ASSERT_FALSE(p.k.empty());
    EXPECT_EQ(p.k[0], 0.0);
    for (const auto& v : p.value) {
        EXPECT_NEAR(std::abs(v - cplx{2.5, -1.0}), 0.0, 1e-14);
    }
    s.values[0] = {7.0, 0.0};
    EXPECT_EQ(radial_average(s).value[0], (cplx{7.0, 0.0}));
    for (std::size_t b = 1; b < p.k.size(); ++b) {
        EXPECT_GT(p.k[b], p.k[b - 1]);
    }
    EXPECT_NEAR(p.dk, 2 * kPi / 10.0, 1e-15);
    EXPECT_NEAR(p.k_max, kPi / 0.25, 1e-15);
}

TEST(Radial, KSquaredProfile) {
    const auto g = square(40);
    SpectralSlice s{g, std::vector<cplx>(g.cells())};
    for (int l = 0; l < g.ny; ++l) {
        for (int m = 0; m < g.nx; ++m) {
            s.values[static_cast<std::size_t>(l) * g.nx + m] = s.kx(m) * s.kx(m) + s.ky(l) * s.ky(l);
        }
    }
    const auto p = radial_average(s);
    for (std::size_t b = 0; b < p.k.size(); ++b) {
        const double lo = std::max(0.0, p.k[b] - p.dk / 2);
        const double hi = p.k[b] + p.dk / 2;
        EXPECT_GE(p.value[b].real(), lo * lo - 1e-9);
        EXPECT_LE(p.value[b].real(), hi * hi + 1e-9);
    }
}

TEST(Radial, IsotropicGaussianWithinOneBin) {
    const auto g = square(40);
    SpectralSlice s{g, std::vector<cplx>(g.cells())};
    auto f = [](double k) { return std::exp(-0.5 * k * k * 0.25); };
    for (int l = 0; l < g.ny; ++l) {
        for (int m = 0; m < g.nx; ++m) {
            s.values[static_cast<std::size_t>(l) * g.nx + m] = f(std::hypot(s.kx(m), s.ky(l)));
        }
    }
    const auto p = radial_average(s);
    for (std::size_t b = 0; b < p.k.size(); ++b) {
        const double lo = f(p.k[b] + p.dk / 2);
        const double hi = f(std::max(0.0, p.k[b] - p.dk / 2));
        EXPECT_GE(p.value[b].real(), lo - 1e-12);
        EXPECT_LE(p.value[b].real(), hi + 1e-12);
    }
}

TEST(CoeffExtract, WorkedExamples) {
    const auto one = coeff_extract([](cplx) { return cplx{1.0}; }, 8, 16, 1.0);
    EXPECT_NEAR(std::abs(one[0] - 1.0), 0.0, 1e-14);
    for (std::size_t n = 1; n < one.size(); ++n) {
        EXPECT_NEAR(std::abs(one[n]), 0.0, 1e-14);
    }
    const auto sq = coeff_extract([](cplx w) { return w * w; }, 8, 16, 1.0);
    for (std::size_t n = 0; n < sq.size(); ++n) {
        EXPECT_NEAR(std::abs(sq[n] - (n == 2 ? 1.0 : 0.0)), 0.0, 1e-10);
    }
    const std::size_t terms = 51;
    const auto geo = coeff_extract([](cplx w) { return 1.0 / (1.0 - 0.5 * w); }, terms, 4 * terms, 0.9);
    for (std::size_t n = 0; n < terms; ++n) {
        EXPECT_NEAR(std::abs(geo[n] - std::pow(0.5, static_cast<double>(n))), 0.0, 1e-8) << n;
    }
}

TEST(CoeffExtract, RecoversRandomPolynomials) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + trial % 40;
        std::vector<cplx> c(n);
        for (auto& v : c) {
            v = {d(rng), d(rng)};
        }
        auto poly = [&](cplx w) {
            cplx acc{};
            for (std::size_t q = n; q-- > 0;) {
                acc = acc * w + c[q];
            }
            return acc;
        };
        const auto got = coeff_extract(poly, n, 2 * n, 1.0);
        for (std::size_t q = 0; q < n; ++q) {
            EXPECT_NEAR(std::abs(got[q] - c[q]), 0.0, 1e-10);
        }
    }
}

TEST(CoeffExtract, Preconditions) {
    auto f = [](cplx) { return cplx{1.0}; };
    EXPECT_THROW((void)coeff_extract(f, 10, 19, 1.0), ConfigError);
    EXPECT_THROW((void)coeff_extract(f, 10, 20, 0.0), ConfigError);
    EXPECT_THROW((void)coeff_extract(f, 10, 20, 1.5), ConfigError);
    try {
        (void)coeff_extract([](cplx w) { return 1.0 / (1.0 - w); }, 4, 8, 1.0);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("w ="), std::string::npos);
    }
}

TEST(Bessel, AgreesWithSeriesOracle) {
    for (double x = 0.0; x <= 40.0; x += 0.37) {
        EXPECT_NEAR(bessel_j0(x), j0_oracle(x), 1e-10) << x;
        EXPECT_EQ(bessel_j0(-x), bessel_j0(x));
    }
    EXPECT_EQ(bessel_j0(0.0), 1.0);
}

TEST(Hankel, ZeroAndConstantProfiles) {
    const auto g = square(40);
    const RadialBinning bins(g);
    std::vector<double> k(bins.centers().begin(), bins.centers().end());
    std::vector<double> r{0.0, 0.25, 1.0};
    for (double v : hankel_inverse(k, std::vector<double>(k.size(), 0.0), r, bins.k_max())) {
        EXPECT_EQ(v, 0.0);
    }
    const double c = 1.7;
    const auto h = hankel_inverse(k, std::vector<double>(k.size(), c), std::vector<double>{0.0}, bins.k_max());
    EXPECT_NEAR(h[0], c * bins.k_max() * bins.k_max() / (4 * kPi), 1e-12 * h[0]);
}

TEST(Hankel, GaussianPair) {
    const auto g = square(40);
    const RadialBinning bins(g);
    std::vector<double> k(bins.centers().begin(), bins.centers().end());
    for (double sigma : {0.5, 0.75, 1.0}) {
        std::vector<double> prof(k.size());
        for (std::size_t b = 0; b < k.size(); ++b) {
            prof[b] = std::exp(-0.5 * k[b] * k[b] * sigma * sigma);
        }
        std::vector<double> r;
        for (double x = 0.0; x <= 1.5 * sigma; x += 0.125) {
            r.push_back(x);
        }
        const auto h = hankel_inverse(k, prof, r, bins.k_max());
        for (std::size_t t = 0; t < r.size(); ++t) {
            const double exact = std::exp(-r[t] * r[t] / (2 * sigma * sigma)) / (2 * kPi * sigma * sigma);
            EXPECT_NEAR(h[t], exact, 0.02 * exact) << "sigma " << sigma << " r " << r[t];
        }
    }
}

TEST(Hankel, Linear) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const auto g = square(40);
    const RadialBinning bins(g);
    std::vector<double> k(bins.centers().begin(), bins.centers().end());
    std::vector<double> f(k.size()), h(k.size()), mix(k.size());
    const double a = 0.7, b = -2.3;
    for (std::size_t q = 0; q < k.size(); ++q) {
        f[q] = d(rng);
        h[q] = d(rng);
        mix[q] = a * f[q] + b * h[q];
    }
    const std::vector<double> r{0.0, 0.3, 1.1, 2.5};
    const auto hf = hankel_inverse(k, f, r, bins.k_max());
    const auto hh = hankel_inverse(k, h, r, bins.k_max());
    const auto hm = hankel_inverse(k, mix, r, bins.k_max());
    for (std::size_t t = 0; t < r.size(); ++t) {
        EXPECT_NEAR(hm[t], a * hf[t] + b * hh[t], 1e-12 * (1.0 + std::abs(hm[t])));
    }
}
