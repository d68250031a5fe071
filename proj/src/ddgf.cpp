#include "hotspot/ddgf.hpp"

#include "hotspot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace hotspot {

namespace {

constexpr double kSingularDenominator = 1e-8;

int resolve_nt_lag(const DdgfConfig& cfg, int nt) {
    const int nt_lag = cfg.nt_lag.value_or(std::min(400, nt - 1));
    return std::max(0, std::min(nt_lag, nt - 1));
}

std::vector<double> default_radii(const GridSpec& grid) {
    std::vector<double> r(static_cast<std::size_t>(grid.nx) + 1);
    for (std::size_t m = 0; m < r.size(); ++m) {
        r[m] = static_cast<double>(m) * grid.dx / 2.0;
    }
    return r;
}

} // namespace

void DdgfConfig::validate() const {
    if (!std::isfinite(gamma) || gamma <= 0.0) {
        throw ConfigError("ddgf gamma must be positive");
    }
    if (nt_lag && *nt_lag < 1) {
        throw ConfigError("ddgf nt_lag must be >= 1");
    }
    if (rho0 && (!(*rho0 > 0.0) || *rho0 > 1.0)) {
        throw ConfigError("ddgf rho0 must lie in (0, 1]");
    }
    if (std::any_of(r_targets.begin(), r_targets.end(), [](double r) { return !(r >= 0.0); })) {
        throw ConfigError("ddgf r_targets must be non-negative");
    }
    if (!std::is_sorted(r_targets.begin(), r_targets.end())) {
        throw ConfigError("ddgf r_targets must be increasing");
    }
}

TransferOperator estimate_phi(const DensityField& field, const DdgfConfig& cfg) {
    cfg.validate();
    const GridSpec& spec = field.spec();
    const int nt = spec.nt;
    const std::size_t cells = spec.cells();

    std::vector<int> origins;
    std::vector<long> origin_events;
    for (int t = 0; t < nt; ++t) {
        const long c = field.slice_count(t);
        if (c > 0) {
            origins.push_back(t);
            origin_events.push_back(c);
        }
    }
    if (origins.empty()) {
        throw NumericalError("empty training window: no time slice contains an event");
    }

    const Fft2d fft(spec);
    std::vector<cplx> spectra(static_cast<std::size_t>(nt) * cells);
    for (int t = 0; t < nt; ++t) {
        const auto s = fft.forward(field.slice(t));
        std::copy(s.values.begin(), s.values.end(), spectra.begin() + static_cast<std::ptrdiff_t>(t * cells));
    }

    const int nt_lag = resolve_nt_lag(cfg, nt);
    const auto n_lags = static_cast<std::size_t>(nt_lag) + 1;
    std::vector<cplx> acc(n_lags * cells, cplx{});
    std::vector<std::size_t> counts(n_lags, 0);
    std::vector<double> weight_sum(n_lags, 0.0);

    // With x_j taken at cell centers, sum_j 1/rho_j(t0,k) = dt^2 conj(rho(t0,k)), so each
    // origin contributes rho(t0+n,k) * dt^2 * conj(rho(t0,k)).
    std::vector<cplx> inv_sum(cells);
    const double dt2 = spec.dt * spec.dt;
    for (std::size_t o = 0; o < origins.size(); ++o) {
        const int t0 = origins[o];
        const cplx* base = spectra.data() + static_cast<std::size_t>(t0) * cells;
        for (std::size_t q = 0; q < cells; ++q) {
            inv_sum[q] = dt2 * std::conj(base[q]);
        }
        for (std::size_t n = 0; n < n_lags && t0 + static_cast<int>(n) < nt; ++n) {
            const cplx* later = spectra.data() + (static_cast<std::size_t>(t0) + n) * cells;
            cplx* out = acc.data() + n * cells;
            for (std::size_t q = 0; q < cells; ++q) {
                out[q] += later[q] * inv_sum[q];
            }
            ++counts[n];
            weight_sum[n] += static_cast<double>(origin_events[o]);
        }
    }

    const RadialBinning binning(spec);
    TransferOperator op;
    op.k.assign(binning.centers().begin(), binning.centers().end());
    op.dk = binning.dk();
    op.k_max = binning.k_max();
    op.dt = spec.dt;
    op.dx = spec.dx;
    op.n_lags = n_lags;
    op.sample_counts = counts;
    op.phi.assign(n_lags * op.k.size(), cplx{});
    for (std::size_t n = 0; n < n_lags; ++n) {
        const double norm = cfg.weighting == OriginWeighting::PerSlice ? static_cast<double>(counts[n]) : weight_sum[n];
        if (counts[n] == 0 || norm <= 0.0) {
            continue;
        }
        std::span<cplx> mesh(acc.data() + n * cells, cells);
        for (auto& v : mesh) {
            v /= norm;
        }
        const RadialProfile prof = binning.average(mesh);
        std::copy(prof.value.begin(), prof.value.end(), op.phi.begin() + static_cast<std::ptrdiff_t>(n * op.k.size()));
    }
    return op;
}

KernelSolution solve_kernel_detailed(const TransferOperator& op, const GridSpec& grid, const DdgfConfig& cfg) {
    cfg.validate();
    if (op.n_lags == 0 || op.k.empty()) {
        throw ConfigError("solve_kernel needs a non-empty transfer operator");
    }
    const std::size_t n_terms = op.n_lags;
    const std::size_t m_points = cfg.m_points.value_or(4 * n_terms);
    double rho0 = cfg.rho0.value_or(std::pow(10.0, -10.0 / static_cast<double>(m_points)));
    const double gamma = cfg.gamma;

    // Delta-t * g_n(k_b) for every bin, from the w-domain image G = P / (1 + gamma P).
    std::vector<cplx> gk(n_terms * op.n_bins());
    auto extract_all = [&](double radius) {
        for (std::size_t b = 0; b < op.n_bins(); ++b) {
            double min_denominator = std::numeric_limits<double>::infinity();
            const auto evaluator = [&](cplx w) {
                cplx p{};
                for (std::size_t n = n_terms; n-- > 0;) {
                    p = p * w + op.at(n, b);
                }
                const cplx denom = 1.0 + gamma * p;
                min_denominator = std::min(min_denominator, std::abs(denom));
                return p / denom;
            };
            const auto c = coeff_extract(evaluator, n_terms, m_points, radius);
            if (min_denominator < kSingularDenominator) {
                return false;
            }
            for (std::size_t n = 0; n < n_terms; ++n) {
                gk[n * op.n_bins() + b] = c[n];
            }
        }
        return true;
    };
    bool ok = false;
    try {
        ok = extract_all(rho0);
    } catch (const NumericalError&) {
        ok = false;
    }
    if (!ok) {
        rho0 *= 0.99;
        try {
            ok = extract_all(rho0);
        } catch (const NumericalError&) {
            ok = false;
        }
        if (!ok) {
            throw NumericalError("kernel solve is singular: |1 + gamma Phi| vanishes on the extraction circle");
        }
    }

    const std::vector<double> radii = cfg.r_targets.empty() ? default_radii(grid) : cfg.r_targets;
    KernelSolution sol;
    sol.rho0 = rho0;
    sol.m_points = m_points;
    sol.kernel = TriggerKernel(KernelShape::Tabulated, "ddgf", op.dt, op.dx, n_terms, radii);
    sol.kernel.t_cut = cfg.t_cut;
    sol.kernel.r_cut = cfg.r_cut;
    sol.imag.assign(sol.kernel.g.size(), 0.0);
    std::vector<double> re(op.n_bins());
    std::vector<double> im(op.n_bins());
    for (std::size_t n = 0; n < n_terms; ++n) {
        for (std::size_t b = 0; b < op.n_bins(); ++b) {
            const cplx v = gk[n * op.n_bins() + b] / op.dt;
            re[b] = v.real();
            im[b] = v.imag();
        }
        const auto hr = hankel_inverse(op.k, re, radii, op.k_max);
        const auto hi = hankel_inverse(op.k, im, radii, op.k_max);
        for (std::size_t m = 0; m < radii.size(); ++m) {
            sol.kernel.at(n, m) = hr[m];
            sol.imag[n * radii.size() + m] = hi[m];
        }
    }
    sol.kernel.apply_cutoffs();
    return sol;
}

TriggerKernel solve_kernel(const TransferOperator& op, const GridSpec& grid, const DdgfConfig& cfg) {
    return solve_kernel_detailed(op, grid, cfg).kernel;
}

TriggerKernel fit_ddgf(const EventCatalog& training, const GridSpec& grid, const DdgfConfig& cfg) {
    const DensityField field = rasterize(training, grid);
    return solve_kernel(estimate_phi(field, cfg), grid, cfg);
}

std::optional<LogTailFit> fit_log_tail(const std::vector<double>& t, const std::vector<double>& y) {
    std::vector<double> u;
    std::vector<double> v;
    for (std::size_t q = 0; q < t.size() && q < y.size(); ++q) {
        if (t[q] > 0.0 && std::isfinite(y[q])) {
            u.push_back(std::log(t[q]));
            v.push_back(y[q]);
        }
    }
    if (u.size() < 3) {
        return std::nullopt;
    }
    const double n = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) {
        mu += u[q];
        mv += v[q];
    }
    mu /= n;
    mv /= n;
    double suu = 0.0, suv = 0.0, svv = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) {
        suu += (u[q] - mu) * (u[q] - mu);
        suv += (u[q] - mu) * (v[q] - mv);
        svv += (v[q] - mv) * (v[q] - mv);
    }
    LogTailFit fit;
    fit.points = u.size();
    if (suu <= 0.0 || svv <= 0.0) {
        fit.degenerate = true;
        return fit;
    }
    const double slope = suv / suu;
    const double intercept = mv - slope * mu;
    double ss_res = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) {
        const double e = v[q] - (intercept + slope * u[q]);
        ss_res += e * e;
    }
    fit.r_squared = 1.0 - ss_res / svv;
    fit.a = -slope;
    if (fit.a == 0.0) {
        fit.degenerate = true;
        return fit;
    }
    // y = -a log b - a log t
    fit.b = std::exp(-intercept / fit.a);
    return fit;
}

KernelDiagnostics kernel_diagnostics(const TriggerKernel& kernel, double fit_from_days, double fit_to_days) {
    if (kernel.n_lags() < 10 || kernel.n_radii() == 0) {
        throw ConfigError("kernel diagnostics need at least 10 lags");
    }
    std::vector<double> t;
    std::vector<double> g0;
    for (std::size_t n = 0; n < kernel.n_lags(); ++n) {
        if (kernel.lags[n] > 0.0) {
            t.push_back(kernel.lags[n]);
            g0.push_back(kernel.at(n, 0));
        }
    }
    KernelDiagnostics d;
    for (std::size_t q = 0; q + 1 < g0.size(); ++q) {
        const bool rises = q == 0 || g0[q] > g0[q - 1];
        if (rises && g0[q] >= g0[q + 1]) {
            d.peak_lags.push_back(t[q]);
        }
    }
    std::vector<double> ft;
    std::vector<double> fy;
    for (std::size_t q = 0; q < t.size(); ++q) {
        if (t[q] >= fit_from_days && t[q] <= fit_to_days) {
            ft.push_back(t[q]);
            fy.push_back(g0[q]);
        }
    }
    d.tail_fit = fit_log_tail(ft, fy);
    return d;
}

void write_phi_csv(std::ostream& out, const TransferOperator& op) {
    out << "lag_days,k_r,re,im\n";
    for (std::size_t n = 0; n < op.n_lags; ++n) {
        for (std::size_t b = 0; b < op.n_bins(); ++b) {
            const cplx v = op.at(n, b);
            out << format_double(static_cast<double>(n) * op.dt) << ',' << format_double(op.k[b]) << ','
                << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
        }
    }
}

} // namespace hotspot
