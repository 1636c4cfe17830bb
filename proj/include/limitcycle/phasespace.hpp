// phasespace.hpp: Wigner functions on (x, p) grids, radial profiles and
// limit-cycle amplitude extraction.
//
// W(x, p) uses alpha = (x + i p)/sqrt(2) and integrates to one over dx dp.

#pragma once

#include "limitcycle/error.hpp"
#include "limitcycle/fock.hpp"
#include "limitcycle/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace limitcycle {

// ------------------------------- PhaseGrid -----------------------------------

struct PhaseGrid {
    double x_min = -5.0, x_max = 5.0;
    double p_min = -5.0, p_max = 5.0;
    int nx = 201, np = 201;

    static PhaseGrid symmetric(double extent, int n = 201) {
        return PhaseGrid{-extent, extent, -extent, extent, n, n};
    }

    void validate() const {
        detail::require(nx >= 16 && np >= 16, ErrorCode::invalid_parameter, "grid needs at least 16x16 samples");
        detail::require(x_max > x_min && p_max > p_min, ErrorCode::invalid_parameter, "empty grid range");
    }

    double dx() const noexcept { return (x_max - x_min) / (nx - 1); }
    double dp() const noexcept { return (p_max - p_min) / (np - 1); }
    double x(int i) const noexcept { return x_min + i * dx(); }
    double p(int j) const noexcept { return p_min + j * dp(); }
};

// ------------------------------- WignerField ---------------------------------

struct WignerField {
    PhaseGrid grid;
    Eigen::MatrixXd values;  // values(i, j) = W(x_i, p_j)
    bool coverage_warning = false;

    // Trapezoid rule over the grid.
    double integrate() const { return integrate_weighted([](double, double) { return 1.0; }); }
    double normalization() const { return integrate(); }

    template <class G>
    double integrate_weighted(G g) const {
        double s = 0.0;
        for (int i = 0; i < grid.nx; ++i) {
            const double wx = (i == 0 || i == grid.nx - 1) ? 0.5 : 1.0;
            for (int j = 0; j < grid.np; ++j) {
                const double wp = (j == 0 || j == grid.np - 1) ? 0.5 : 1.0;
                s += wx * wp * g(grid.x(i), grid.p(j)) * values(i, j);
            }
        }
        return s * grid.dx() * grid.dp();
    }

    double min() const { return values.minCoeff(); }
    double max() const { return values.maxCoeff(); }
};

namespace detail {

inline void flag_coverage(WignerField& f) {
    const double peak = f.values.cwiseAbs().maxCoeff();
    double edge = 0.0;
    for (int i = 0; i < f.grid.nx; ++i)
        edge = std::max({edge, std::abs(f.values(i, 0)), std::abs(f.values(i, f.grid.np - 1))});
    for (int j = 0; j < f.grid.np; ++j)
        edge = std::max({edge, std::abs(f.values(0, j)), std::abs(f.values(f.grid.nx - 1, j))});
    f.coverage_warning = edge > 1e-6 * peak;
}

}  // namespace detail

// ---- kernel ----

// Precomputed subdiagonals rho_{n+k, n} that are not identically zero.
class WignerKernel {
public:
    explicit WignerKernel(const Matrix& rho) : N_(static_cast<int>(rho.rows())) {
        detail::require(rho.rows() == rho.cols(), ErrorCode::invalid_cutoff, "density matrix must be square");
        for (int k = 0; k < N_; ++k) {
            std::vector<cplx> d(N_ - k);
            bool any = false;
            for (int n = 0; n + k < N_; ++n) {
                // Hermitian part of the pair (n+k, n), (n, n+k).
                d[n] = k == 0 ? cplx(rho(n, n).real()) : 0.5 * (rho(n + k, n) + std::conj(rho(n, n + k)));
                any = any || d[n] != cplx(0.0);
            }
            if (any) {
                ks_.push_back(k);
                diags_.push_back(std::move(d));
            }
        }
    }

    double operator()(double x, double p) const {
        const double ar = x / std::sqrt(2.0), ai = p / std::sqrt(2.0);
        const double r2 = ar * ar + ai * ai;
        const double y = 4.0 * r2;
        const double theta = std::atan2(ai, ar);
        double w = 0.0;
        for (std::size_t q = 0; q < ks_.size(); ++q) {
            const int k = ks_[q];
            const auto& d = diags_[q];
            if (k > 0 && r2 == 0.0) continue;
            // G_n = sqrt(n!/(n+k)!) (2|alpha|)^k e^{-y/2} L_n^{(k)}(y), kept as g * exp(logscale).
            double logscale = (k > 0 ? k * std::log(2.0 * std::sqrt(r2)) : 0.0) - 0.5 * y -
                              0.5 * std::lgamma(k + 1.0);
            double gprev = 0.0, g = 1.0;
            double acc = 0.0;  // accumulated sum in units of exp(logscale)
            const cplx phase = std::polar(1.0, -k * theta);
            const int len = static_cast<int>(d.size());
            for (int n = 0; n < len; ++n) {
                const double coef = k == 0 ? d[n].real() : 2.0 * (d[n] * phase).real();
                acc += ((n % 2) ? -1.0 : 1.0) * coef * g;
                if (n + 1 < len) {
                    const double gn = ((2.0 * n + k + 1.0 - y) * g - std::sqrt(double(n) * (n + k)) * gprev) /
                                      std::sqrt((n + 1.0) * (n + k + 1.0));
                    gprev = g;
                    g = gn;
                    const double big = std::max(std::abs(g), std::abs(gprev));
                    if (big > 1e150) {
                        g *= 1e-150;
                        gprev *= 1e-150;
                        acc *= 1e-150;
                        logscale += 150.0 * std::log(10.0);
                    }
                }
            }
            if (acc != 0.0) w += std::copysign(std::exp(std::log(std::abs(acc)) + logscale), acc);
        }
        return w / std::numbers::pi;
    }

private:
    int N_;
    std::vector<int> ks_;
    std::vector<std::vector<cplx>> diags_;
};

inline double wigner_at(const Matrix& rho, double x, double p) { return WignerKernel(rho)(x, p); }

inline WignerField wigner(const Matrix& rho, const PhaseGrid& grid, int jobs = 1) {
    grid.validate();
    const WignerKernel kernel(rho);
    WignerField f{grid, Eigen::MatrixXd(grid.nx, grid.np)};
    parallel_for(static_cast<std::size_t>(grid.nx), jobs, [&](std::size_t i) {
        for (int j = 0; j < grid.np; ++j) f.values(i, j) = kernel(grid.x(static_cast<int>(i)), grid.p(j));
    });
    detail::flag_coverage(f);
    return f;
}

inline WignerField wigner(const DensityMatrix& rho, const PhaseGrid& grid, int jobs = 1) {
    return wigner(rho.matrix(), grid, jobs);
}

// W = (1/pi)(4|alpha|^2 + 1 + R) e^{-2|alpha|^2} / (3 + R)
inline WignerField wigner_two_state(double R, const PhaseGrid& grid) {
    detail::require(R >= 0.0, ErrorCode::invalid_parameter, "R must be >= 0");
    grid.validate();
    WignerField f{grid, Eigen::MatrixXd(grid.nx, grid.np)};
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.np; ++j) {
            const double a2 = 0.5 * (grid.x(i) * grid.x(i) + grid.p(j) * grid.p(j));
            f.values(i, j) = (4.0 * a2 + 1.0 + R) * std::exp(-2.0 * a2) / ((3.0 + R) * std::numbers::pi);
        }
    detail::flag_coverage(f);
    return f;
}

// Square grid covering the populated Fock levels: half-width sqrt(2 n_top + 1) + 3, at
// least 4.5, where n_top is the highest level with P_n >= 1e-12.
inline PhaseGrid default_grid(const Matrix& rho, int n = 201) {
    int top = 0;
    for (int k = 0; k < rho.rows(); ++k)
        if (rho(k, k).real() >= 1e-12) top = k;
    return PhaseGrid::symmetric(std::max(std::sqrt(2.0 * top + 1.0) + 3.0, 4.5), n);
}

// ------------------------------ radial profile --------------------------------

struct RadialProfile {
    std::vector<double> radii;   // mean radius of the samples in each annulus
    std::vector<double> values;  // mean W on the annulus
    std::vector<int> counts;
    std::vector<double> anisotropy;  // max(|c_1|, |c_2|) angular harmonics relative to the mean
    double asymmetry = 0.0;          // largest anisotropy over annuli holding >= 10% of the peak
};

// Annuli of width min(dx, dp) around the origin, restricted to the inscribed disk.
inline RadialProfile radial_profile(const WignerField& f) {
    const auto& g = f.grid;
    const double h = std::min(g.dx(), g.dp());
    const double rmax = std::min({std::abs(g.x_min), std::abs(g.x_max), std::abs(g.p_min), std::abs(g.p_max)});
    const int nb = static_cast<int>(std::floor(rmax / h + 0.5)) + 1;
    std::vector<double> rsum(nb, 0.0), wsum(nb, 0.0);
    std::vector<cplx> h1(nb), h2(nb);
    std::vector<int> cnt(nb, 0);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.np; ++j) {
            const double x = g.x(i), p = g.p(j);
            const double r = std::hypot(x, p);
            if (r > rmax) continue;
            const int b = static_cast<int>(std::floor(r / h + 0.5));
            if (b >= nb) continue;
            const double w = f.values(i, j);
            const double phi = std::atan2(p, x);
            rsum[b] += r;
            wsum[b] += w;
            h1[b] += w * std::polar(1.0, -phi);
            h2[b] += w * std::polar(1.0, -2.0 * phi);
            ++cnt[b];
        }
    RadialProfile out;
    for (int b = 0; b < nb; ++b) {
        if (cnt[b] == 0) continue;
        out.radii.push_back(rsum[b] / cnt[b]);
        out.values.push_back(wsum[b] / cnt[b]);
        out.counts.push_back(cnt[b]);
        const double aniso = (b == 0 || wsum[b] == 0.0)
                                 ? 0.0
                                 : std::max(std::abs(h1[b]), std::abs(h2[b])) / std::abs(wsum[b]);
        out.anisotropy.push_back(aniso);
    }
    const double peak = *std::max_element(out.values.begin(), out.values.end());
    for (std::size_t b = 0; b < out.values.size(); ++b)
        if (out.values[b] >= 0.1 * peak) out.asymmetry = std::max(out.asymmetry, out.anisotropy[b]);
    return out;
}

inline constexpr double max_peak_asymmetry = 0.05;

// Radius of the maximum of the angular-averaged field, in x units, refined by a
// parabola through the three bins around the maximum.
inline double peak_radius(const WignerField& f) {
    const auto prof = radial_profile(f);
    if (prof.asymmetry >= max_peak_asymmetry)
        throw Error(ErrorCode::not_applicable,
                    "field is not rotationally symmetric (asymmetry " + std::to_string(prof.asymmetry) + ")");
    const auto it = std::max_element(prof.values.begin(), prof.values.end());
    const std::size_t i = static_cast<std::size_t>(it - prof.values.begin());
    if (i == 0) return 0.0;
    if (i + 1 >= prof.values.size()) return prof.radii[i];
    const double r0 = prof.radii[i - 1], r1 = prof.radii[i], r2 = prof.radii[i + 1];
    const double v0 = prof.values[i - 1], v1 = prof.values[i], v2 = prof.values[i + 1];
    // Vertex of the interpolating parabola through (r0,v0), (r1,v1), (r2,v2).
    const double num = (r1 - r0) * (r1 - r0) * (v1 - v2) - (r1 - r2) * (r1 - r2) * (v1 - v0);
    const double den = (r1 - r0) * (v1 - v2) - (r1 - r2) * (v1 - v0);
    if (den == 0.0) return r1;
    const double r = r1 - 0.5 * num / den;
    return std::clamp(r, r0, r2);
}

}  // namespace limitcycle
