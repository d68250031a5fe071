#include "hotspot/ddgf.hpp"
#include "hotspot/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hotspot;

namespace {

GridSpec grid(int n, int nt) {
    GridSpec g;
    g.nx = g.ny = n;
    g.nt = nt;
    g.origin_x = g.origin_y = -0.5 * n * g.dx;
    return g;
}

Event at(double t, double x, double y) { return {t, 0.0, 0.0, x, y, "X"}; }

// An operator with a single radial bin and prescribed phi[n].
TransferOperator single_bin(const std::vector<cplx>& phi) {
    TransferOperator op;
    op.k = {0.0, 1.0};
    op.dk = 1.0;
    op.k_max = 1.0;
    op.n_lags = phi.size();
    op.phi.resize(2 * phi.size());
    for (std::size_t n = 0; n < phi.size(); ++n) {
        op.phi[2 * n] = phi[n];
        op.phi[2 * n + 1] = phi[n];
    }
    op.sample_counts.assign(phi.size(), 1);
    return op;
}

// Delta-t g_n from the power-series reciprocal of 1 + gamma P: G = P * sum (-gamma P)^j,
// computed by the recursion G_n = P_n - gamma sum_{m<=n} P_m G_{n-m}.
std::vector<cplx> series_oracle(const std::vector<cplx>& p, double gamma, std::size_t n_terms) {
    // G (1 + gamma P) = P, so (1 + gamma P_0) G_n = P_n - gamma sum_{m=1..n} P_m G_{n-m}.
    std::vector<cplx> g(n_terms);
    for (std::size_t n = 0; n < n_terms; ++n) {
        cplx rhs = n < p.size() ? p[n] : cplx{};
        for (std::size_t m = 1; m <= n && m < p.size(); ++m) {
            rhs -= gamma * p[m] * g[n - m];
        }
        g[n] = rhs / (1.0 + gamma * p[0]);
    }
    return g;
}

// Spectrum-domain kernel samples before the Hankel step: invert the radial
// transform of a single-bin kernel by reading g at the k=0 and k=1 bins.
// With both bins equal the Hankel trapezoid is value * (0 + 1)/2 * 1 / (2 pi).
double hankel_of_flat(double v) { return v * 0.5 / (2.0 * std::numbers::pi); }

} // namespace

TEST(EstimatePhi, RepeatInSameCellGivesOne) {
    const auto g = grid(8, 2);
    EventCatalog cat;
    cat.events = {at(0.5, 0.1, 0.1), at(1.5, 0.1, 0.1)};
    const auto op = estimate_phi(rasterize(cat, g));
    ASSERT_EQ(op.n_lags, 2u);
    for (std::size_t b = 0; b < op.n_bins(); ++b) {
        EXPECT_NEAR(std::abs(op.at(1, b) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(op.at(0, b) - 1.0), 0.0, 1e-12);
    }
    EXPECT_EQ(op.sample_counts[0], 2u);
    EXPECT_EQ(op.sample_counts[1], 1u);
}

TEST(EstimatePhi, NoLaterEventsGivesZero) {
    const auto g = grid(8, 4);
    EventCatalog cat;
    cat.events = {at(0.5, 0.3, -0.2)};
    const auto op = estimate_phi(rasterize(cat, g));
    for (std::size_t n = 1; n < op.n_lags; ++n) {
        for (std::size_t b = 0; b < op.n_bins(); ++b) {
            EXPECT_EQ(op.at(n, b), cplx{});
        }
    }
}

TEST(EstimatePhi, AveragesOverOrigins) {
    // t0 = 0 has a repeat at lag 1 (phi = 1); t0 = 2 has none (phi = 0).
    const auto g = grid(8, 4);
    EventCatalog cat;
    cat.events = {at(0.5, 0.1, 0.1), at(1.5, 0.1, 0.1), at(3.5, -0.6, 0.4)};
    // Origins 0, 1, 3: lag 1 admissible for 0 and 1 only (3 + 1 is outside).
    const auto op = estimate_phi(rasterize(cat, g));
    EXPECT_EQ(op.sample_counts[1], 2u);
    EXPECT_NEAR(op.at(1, 0).real(), 0.5, 1e-12);
}

TEST(EstimatePhi, MatchesLiteralPerEventSum) {
    // Literal definition: average over eventful t0 of sum_j rho(t0+n,k) / rho_j(t0,k),
    // rho_j = exp(i k.x_j)/dt with x_j the cell centre, then radial averaging.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> pos(-0.99, 0.99);
    std::uniform_real_distribution<double> t(0.0, 6.0);
    const auto g = grid(8, 6);
    EventCatalog cat;
    for (int i = 0; i < 15; ++i) {
        cat.events.push_back(at(t(rng), pos(rng), pos(rng)));
    }
    std::sort(cat.events.begin(), cat.events.end(), [](auto& a, auto& b) { return a.time < b.time; });
    const auto field = rasterize(cat, g);
    DdgfConfig cfg;
    cfg.nt_lag = 3;
    const auto op = estimate_phi(field, cfg);

    const Fft2d fft(g);
    std::vector<SpectralSlice> spectra;
    for (int n = 0; n < g.nt; ++n) {
        spectra.push_back(fft.forward(field.slice(n)));
    }
    const RadialBinning bins(g);
    for (std::size_t lag = 0; lag <= 3; ++lag) {
        std::vector<cplx> mesh(g.cells(), cplx{});
        int origins = 0;
        for (int t0 = 0; t0 + static_cast<int>(lag) < g.nt; ++t0) {
            std::vector<const Event*> here;
            for (const auto& e : cat.events) {
                if (static_cast<int>(std::floor(e.time)) == t0) {
                    here.push_back(&e);
                }
            }
            if (here.empty()) {
                continue;
            }
            ++origins;
            const auto& later = spectra[static_cast<std::size_t>(t0) + lag];
            for (int l = 0; l < g.ny; ++l) {
                for (int m = 0; m < g.nx; ++m) {
                    const std::size_t q = static_cast<std::size_t>(l) * g.nx + m;
                    for (const Event* e : here) {
                        const auto c = *cell_of(e->x, e->y, g);
                        const double phase = later.kx(m) * g.center_x(c.i) + later.ky(l) * g.center_y(c.j);
                        const cplx rho_j = std::polar(1.0 / g.dt, phase);
                        mesh[q] += later.values[q] / rho_j;
                    }
                }
            }
        }
        for (auto& v : mesh) {
            v /= origins;
        }
        const auto prof = bins.average(mesh);
        for (std::size_t b = 0; b < op.n_bins(); ++b) {
            EXPECT_NEAR(std::abs(op.at(lag, b) - prof.value[b]), 0.0, 1e-9 * (1.0 + std::abs(prof.value[b])));
        }
    }
    for (std::size_t n = 1; n < op.n_lags; ++n) {
        EXPECT_LE(op.sample_counts[n], op.sample_counts[n - 1]);
    }
}

TEST(EstimatePhi, EmptyWindowIsFatal) {
    try {
        (void)estimate_phi(rasterize(EventCatalog{}, grid(8, 3)));
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("empty training window"), std::string::npos);
    }
}

TEST(SolveKernel, StationaryIdentity) {
    const std::size_t nt_lag = 60;
    const auto op = single_bin(std::vector<cplx>(nt_lag + 1, cplx{1.0}));
    const auto sol = solve_kernel_detailed(op, grid(8, 61));
    const double gamma = std::numbers::ln2;
    // Recover dt*g_n through the known flat-profile Hankel factor.
    for (std::size_t n = 0; n <= 30; ++n) {
        const double expect = std::pow(1.0 + gamma, -static_cast<double>(n + 1));
        EXPECT_NEAR(sol.kernel.at(n, 0), hankel_of_flat(expect), 1e-6 * hankel_of_flat(1.0)) << n;
    }
}

TEST(SolveKernel, MatchesPowerSeriesRecursion) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<cplx> phi(25);
        // Decaying coefficients keep 1 + gamma P away from zero on the closed unit disc.
        for (std::size_t n = 0; n < phi.size(); ++n) {
            phi[n] = std::pow(0.5, static_cast<double>(n)) * cplx{d(rng), 0.2 * d(rng)};
        }
        phi[0] = {1.0 + d(rng), 0.0};
        const auto op = single_bin(phi);
        const auto sol = solve_kernel_detailed(op, grid(8, 25));
        const auto oracle = series_oracle(phi, std::numbers::ln2, phi.size());
        for (std::size_t n = 0; n < phi.size(); ++n) {
            EXPECT_NEAR(sol.kernel.at(n, 0), hankel_of_flat(oracle[n].real()), 1e-9) << n;
            EXPECT_NEAR(sol.imag[n * sol.kernel.n_radii()], hankel_of_flat(oracle[n].imag()), 1e-9) << n;
        }
    }
}

TEST(SolveKernel, ZeroOperatorAndSmallSingleTerm) {
    const auto zero = solve_kernel(single_bin(std::vector<cplx>(10, cplx{})), grid(8, 10));
    for (double v : zero.g) {
        EXPECT_EQ(v, 0.0);
    }
    const double eps = 1e-3;
    std::vector<cplx> phi(10, cplx{});
    phi[1] = eps;
    const auto k = solve_kernel(single_bin(phi), grid(8, 10));
    EXPECT_NEAR(k.at(1, 0), hankel_of_flat(eps), 1e-12);
    EXPECT_NEAR(k.at(2, 0), hankel_of_flat(-std::numbers::ln2 * eps * eps), 1e-12);
    EXPECT_NEAR(k.at(0, 0), 0.0, 1e-12);
}

TEST(SolveKernel, SmallAmplitudeLinearity) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const auto g = grid(8, 12);
    EventCatalog cat;
    for (int i = 0; i < 40; ++i) {
        cat.events.push_back(at(12.0 * d(rng), 1.9 * d(rng) - 0.95, 1.9 * d(rng) - 0.95));
    }
    std::sort(cat.events.begin(), cat.events.end(), [](auto& a, auto& b) { return a.time < b.time; });
    auto op = estimate_phi(rasterize(cat, g));
    // Scale so that eps is the largest |Phi|.
    double peak = 0.0;
    for (const auto& v : op.phi) {
        peak = std::max(peak, std::abs(v));
    }
    const double eps = 1e-4;
    for (auto& v : op.phi) {
        v *= eps / peak;
    }
    auto linear = op;
    DdgfConfig lin_cfg;
    lin_cfg.gamma = 1e-300;  // effectively drops the feedback term
    const auto k = solve_kernel(op, g);
    const auto kl = solve_kernel(linear, g, lin_cfg);
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < k.g.size(); ++q) {
        num += (k.g[q] - kl.g[q]) * (k.g[q] - kl.g[q]);
        den += kl.g[q] * kl.g[q];
    }
    EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(SolveKernel, Deterministic) {
    const auto g = grid(8, 10);
    EventCatalog cat;
    cat.events = {at(0.2, 0.1, 0.1), at(1.3, 0.2, 0.3), at(4.5, -0.4, 0.1), at(7.1, 0.3, -0.6)};
    const auto a = fit_ddgf(cat, g);
    const auto b = fit_ddgf(cat, g);
    EXPECT_EQ(a.g, b.g);
    EXPECT_EQ(a.n_lags(), 10u);
    EXPECT_EQ(a.n_radii(), 9u);
    EXPECT_EQ(a.radii[1], 0.125);
}

TEST(SolveKernel, CutoffsZeroTable) {
    const auto g = grid(8, 10);
    EventCatalog cat;
    cat.events = {at(0.2, 0.1, 0.1), at(1.3, 0.2, 0.3), at(4.5, -0.4, 0.1)};
    DdgfConfig cfg;
    cfg.t_cut = 3.0;
    cfg.r_cut = 0.4;
    const auto k = fit_ddgf(cat, g, cfg);
    for (std::size_t n = 0; n < k.n_lags(); ++n) {
        for (std::size_t m = 0; m < k.n_radii(); ++m) {
            if (k.lags[n] > 3.0 || k.radii[m] > 0.4) {
                EXPECT_EQ(k.at(n, m), 0.0);
            }
        }
    }
}

TEST(Diagnostics, LogTailRecoversOwnModel) {
    std::vector<double> t, y;
    for (int d = 1; d <= 400; ++d) {
        t.push_back(d);
        y.push_back(-0.1 * std::log(0.01 * d));
    }
    const auto fit = fit_log_tail(t, y);
    ASSERT_TRUE(fit);
    EXPECT_NEAR(fit->a, 0.1, 0.001);
    EXPECT_NEAR(fit->b, 0.01, 0.0001);
    EXPECT_GT(fit->r_squared, 0.999);
    EXPECT_FALSE(fit->degenerate);
}

TEST(Diagnostics, ConstantIsDegenerateAndShortIsOmitted) {
    const auto fit = fit_log_tail({1, 2, 3, 4}, {2, 2, 2, 2});
    ASSERT_TRUE(fit);
    EXPECT_TRUE(fit->degenerate);
    EXPECT_EQ(fit->r_squared, 0.0);
    EXPECT_FALSE(fit_log_tail({1, 2}, {3, 4}));
}

TEST(Diagnostics, MonotoneKernelPeaksAtLagOne) {
    TriggerKernel k(KernelShape::Tabulated, "ddgf", 1.0, 0.25, 20, {0.0, 0.125});
    for (std::size_t n = 0; n < 20; ++n) {
        k.at(n, 0) = std::exp(-0.3 * static_cast<double>(n));
    }
    const auto d = kernel_diagnostics(k, 2, 19);
    ASSERT_EQ(d.peak_lags.size(), 1u);
    EXPECT_EQ(d.peak_lags[0], 1.0);
    EXPECT_TRUE(d.tail_fit);
    TriggerKernel tiny(KernelShape::Tabulated, "ddgf", 1.0, 0.25, 5, {0.0});
    EXPECT_THROW((void)kernel_diagnostics(tiny), ConfigError);
}

TEST(Diagnostics, FindsInteriorPeaks) {
    TriggerKernel k(KernelShape::Tabulated, "ddgf", 1.0, 0.25, 12, {0.0});
    const double g0[] = {9, 5, 3, 2, 4, 6, 3, 2, 2, 7, 1, 0.5};
    for (std::size_t n = 0; n < 12; ++n) {
        k.at(n, 0) = g0[n];
    }
    const auto d = kernel_diagnostics(k, 1, 11);
    EXPECT_EQ(d.peak_lags, (std::vector<double>{1.0, 5.0, 9.0}));
}
